"""First-order fault injection producing buggy/fixed program pairs.

Ground truth follows the bug-fix convention: a function is buggy iff the fix
(buggy -> fixed) modifies it, i.e. iff it holds a mutation site.
"""
from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from sbstdp.minilang import ast, execute, parse_program, print_program
from sbstdp.minilang.interp import DEFAULT_LIMITS, Limits, wrap
from sbstdp.progen import generate_program
from sbstdp.seeds import derive_seed
from sbstdp.testcase import TestCase

OPERATORS = ("ROR", "AOR", "constant_perturbation", "condition_negation", "assignment_deletion")

# deterministic replacements
ROR_MAP = {"<": "<=", "<=": "<", ">": ">=", ">=": ">", "==": "!=", "!=": "=="}
AOR_MAP = {"+": "-", "-": "+", "*": "+", "/": "*", "%": "/"}

DEFAULT_DOMAIN = (-100, 100)
DEFAULT_SAMPLES = 10_000
DEFAULT_RETRIES = 50

SCHEMA_CORPUS = "sbstdp.corpus/1"


class NoCompatibleSite(ValueError):
    pass


class InsufficientFunctions(ValueError):
    pass


class GenerationExhausted(RuntimeError):
    pass


class CorpusInvalid(ValueError):
    pass


@dataclass(frozen=True)
class FaultSpec:
    operator: str
    site_count: int = 1

    def __post_init__(self):
        if self.operator not in OPERATORS:
            raise ValueError(f"unknown operator {self.operator!r}")
        if self.site_count < 1:
            raise ValueError("site_count must be >= 1")


@dataclass(frozen=True)
class MutationSite:
    function: int
    node: int  # node id in the fixed program
    operator: str
    detail: str = ""

    def to_json(self) -> dict:
        return {"function": self.function, "node": self.node, "operator": self.operator, "detail": self.detail}


@dataclass
class FaultedPair:
    fixed: ast.Program
    buggy: ast.Program
    ground_truth: tuple[int, ...]
    mutation_sites: list[MutationSite]
    pair_id: str = "pair"
    meta: dict = field(default_factory=dict)

    @property
    def site_count(self) -> int:
        return sum(self.ground_truth)

    def truth_json(self) -> dict:
        return {
            "functions": [fn.name for fn in self.fixed.functions],
            "ground_truth": list(self.ground_truth),
            "mutation_sites": [s.to_json() for s in self.mutation_sites],
            **self.meta,
        }


def compatible_sites(fn: ast.Function, operator: str) -> list:
    """Syntax nodes of ``fn`` the operator can rewrite, in pre-order."""
    out = []
    for n in ast.walk(fn):
        if operator == "ROR" and isinstance(n, ast.Binary) and n.op in ROR_MAP:
            out.append(n)
        elif operator == "AOR" and isinstance(n, ast.Binary) and n.op in AOR_MAP:
            out.append(n)
        elif operator == "constant_perturbation" and isinstance(n, ast.IntLit):
            out.append(n)
        elif operator == "condition_negation" and isinstance(n, (ast.If, ast.While)):
            out.append(n.cond)
        elif operator == "assignment_deletion" and isinstance(n, ast.Assign):
            out.append(n)
    return out


def _rewrite(node, target: int, make):
    """Rebuild ``node`` with the subtree whose id is ``target`` replaced by ``make(subtree)``.

    ``make`` returning None deletes a statement from its block.
    """
    if getattr(node, "id", None) == target:
        return make(node)

    def block(stmts):
        if stmts is None:
            return None
        out = []
        for s in stmts:
            r = _rewrite(s, target, make)
            if r is not None:
                out.append(r)
        return tuple(out)

    if isinstance(node, ast.Function):
        return dataclasses.replace(node, body=block(node.body))
    if isinstance(node, (ast.IntLit, ast.BoolLit, ast.Var)):
        return node
    if isinstance(node, ast.Unary):
        return dataclasses.replace(node, operand=_rewrite(node.operand, target, make))
    if isinstance(node, ast.Binary):
        return dataclasses.replace(node, lhs=_rewrite(node.lhs, target, make), rhs=_rewrite(node.rhs, target, make))
    if isinstance(node, ast.Call):
        return dataclasses.replace(node, args=tuple(_rewrite(a, target, make) for a in node.args))
    if isinstance(node, (ast.Let, ast.Assign, ast.Return, ast.Output)):
        return dataclasses.replace(node, value=_rewrite(node.value, target, make))
    if isinstance(node, ast.If):
        return dataclasses.replace(node, cond=_rewrite(node.cond, target, make), then=block(node.then),
                                   orelse=block(node.orelse))
    if isinstance(node, ast.While):
        return dataclasses.replace(node, cond=_rewrite(node.cond, target, make), body=block(node.body))
    raise TypeError(node)


def _mutator(operator: str, rng: random.Random):
    if operator == "ROR":
        return lambda n: dataclasses.replace(n, op=ROR_MAP[n.op]), lambda n: f"{n.op}->{ROR_MAP[n.op]}"
    if operator == "AOR":
        return lambda n: dataclasses.replace(n, op=AOR_MAP[n.op]), lambda n: f"{n.op}->{AOR_MAP[n.op]}"
    if operator == "constant_perturbation":
        delta = rng.choice((-1, 1))
        return (lambda n: dataclasses.replace(n, value=wrap(n.value + delta)),
                lambda n: f"{n.value}->{wrap(n.value + delta)}")
    if operator == "condition_negation":
        return lambda n: ast.Unary("not", n), lambda n: "negated"
    return lambda n: None, lambda n: f"deleted {n.name}"


def inject(fixed: ast.Program, spec: FaultSpec, rng: random.Random | int) -> FaultedPair:
    """Mutate one site in each of ``spec.site_count`` distinct functions of ``fixed``."""
    if isinstance(rng, int):
        rng = random.Random(rng)
    candidates = [fn for fn in fixed.functions if compatible_sites(fn, spec.operator)]
    if not candidates:
        raise NoCompatibleSite(f"{spec.operator} applies nowhere in {fixed.source_name}")
    if spec.site_count > len(candidates):
        raise InsufficientFunctions(
            f"{spec.site_count} sites requested, {len(candidates)} functions accept {spec.operator}"
        )
    chosen = sorted(rng.sample(candidates, spec.site_count), key=lambda f: f.id)
    functions = list(fixed.functions)
    sites = []
    for fn in chosen:
        node = rng.choice(compatible_sites(fn, spec.operator))
        make, describe = _mutator(spec.operator, rng)
        sites.append(MutationSite(fn.id, node.id, spec.operator, describe(node)))
        functions[fn.id] = _rewrite(fn, node.id, make)
    mutated = ast.Program(tuple(functions), fixed.source_name)
    buggy = parse_program(print_program(mutated), _sibling_name(fixed.source_name, "buggy.mlp"))
    truth = tuple(1 if any(s.function == fn.id for s in sites) else 0 for fn in fixed.functions)
    return FaultedPair(fixed, buggy, truth, sites)


def _sibling_name(name: str, leaf: str) -> str:
    if "/" in name:
        return name.rsplit("/", 1)[0] + "/" + leaf
    return leaf


def find_witness(pair: FaultedPair, samples: int, rng: random.Random | int,
                 domain: tuple[int, int] = DEFAULT_DOMAIN,
                 limits: Limits = DEFAULT_LIMITS) -> Optional[TestCase]:
    """First randomly sampled call whose observable behaviour differs between the versions."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if isinstance(rng, int):
        rng = random.Random(rng)
    fns = pair.fixed.functions
    for _ in range(samples):
        fn = fns[rng.randrange(len(fns))]
        args = tuple(rng.random() < 0.5 if t == "bool" else rng.randint(*domain) for t in fn.param_types)
        a = execute(pair.buggy, fn.id, args, limits).observable()
        b = execute(pair.fixed, fn.id, args, limits).observable()
        if a != b:
            return TestCase(fn.id, args, "sampled")
    return None


def check_detectable(pair: FaultedPair, samples: int = DEFAULT_SAMPLES, rng: random.Random | int = 0,
                     domain: tuple[int, int] = DEFAULT_DOMAIN, limits: Limits = DEFAULT_LIMITS) -> bool:
    """True iff random sampling finds a call that tells the versions apart.

    False is not a proof of equivalence.
    """
    return find_witness(pair, samples, rng, domain, limits) is not None


@dataclass(frozen=True)
class CorpusParams:
    n_programs: int = 60
    functions: tuple[int, int] = (3, 5)
    depth: tuple[int, int] = (1, 3)
    # site_count -> relative weight
    site_counts: dict = field(default_factory=lambda: {1: 1.0})
    operators: tuple[str, ...] = OPERATORS
    samples: int = DEFAULT_SAMPLES
    retries: int = DEFAULT_RETRIES
    # split n_programs across site counts in proportion to the weights instead of sampling
    stratify: bool = False
    domain: tuple[int, int] = DEFAULT_DOMAIN

    def __post_init__(self):
        for lo, hi in (self.functions, self.depth):
            if lo > hi or lo < 1:
                raise ValueError("empty range in corpus parameters")
        if not self.site_counts or not self.operators:
            raise ValueError("site_counts and operators must be non-empty")

    def to_json(self) -> dict:
        return {
            "n_programs": self.n_programs,
            "functions": list(self.functions),
            "depth": list(self.depth),
            "site_counts": {str(k): v for k, v in sorted(self.site_counts.items())},
            "operators": list(self.operators),
            "samples": self.samples,
            "retries": self.retries,
            "stratify": self.stratify,
            "domain": list(self.domain),
        }

    @classmethod
    def from_json(cls, d: dict) -> "CorpusParams":
        d = dict(d)
        for k in ("functions", "depth", "domain"):
            if k in d:
                d[k] = tuple(d[k])
        if "operators" in d:
            d["operators"] = tuple(d["operators"])
        if "site_counts" in d:
            d["site_counts"] = {int(k): float(v) for k, v in d["site_counts"].items()}
        return cls(**d)


def generate_pair(params: CorpusParams, slot_seed: int, pair_id: str,
                  site_count: Optional[int] = None) -> FaultedPair:
    """One detectable pair for a corpus slot, retrying up to ``params.retries`` times."""
    rng = random.Random(slot_seed)
    if site_count is None:
        counts = sorted(params.site_counts)
        weights = [params.site_counts[c] for c in counts]
        site_count = rng.choices(counts, weights)[0]
    for attempt in range(params.retries):
        n_fn = max(rng.randint(*params.functions), site_count)
        depth = rng.randint(*params.depth)
        fixed = generate_program(rng, n_fn, depth, f"{pair_id}/fixed.mlp")
        operator = rng.choice(params.operators)
        try:
            pair = inject(fixed, FaultSpec(operator, site_count), rng)
        except (NoCompatibleSite, InsufficientFunctions):
            continue
        if check_detectable(pair, params.samples, rng, params.domain):
            pair.pair_id = pair_id
            pair.meta = {"seed": slot_seed, "operator": operator, "site_count": site_count,
                         "attempts": attempt + 1}
            return pair
    raise GenerationExhausted(f"no detectable pair for {pair_id} after {params.retries} attempts")


def stratum_sizes(params: CorpusParams) -> dict[int, int]:
    """Pairs per site count under ``stratify``, by largest remainder."""
    counts = sorted(params.site_counts)
    total = sum(params.site_counts.values())
    exact = [params.n_programs * params.site_counts[c] / total for c in counts]
    sizes = [int(x) for x in exact]
    by_remainder = sorted(range(len(counts)), key=lambda i: (-(exact[i] - sizes[i]), i))
    for i in by_remainder[:params.n_programs - sum(sizes)]:
        sizes[i] += 1
    return dict(zip(counts, sizes))


def gen_corpus(params: CorpusParams, seed: int) -> list[FaultedPair]:
    slots: list = [None] * params.n_programs
    if params.stratify:
        slots = [c for c, n in stratum_sizes(params).items() for _ in range(n)]
    return [generate_pair(params, derive_seed(seed, "corpus", i), f"p{i}", slots[i])
            for i in range(params.n_programs)]


def manifest(pairs: Sequence[FaultedPair], params: CorpusParams, seed: int) -> dict:
    strata: dict[str, int] = {}
    for p in pairs:
        strata[str(p.site_count)] = strata.get(str(p.site_count), 0) + 1
    return {
        "schema": SCHEMA_CORPUS,
        "seed": seed,
        "params": params.to_json(),
        "pairs": [
            {
                "id": p.pair_id,
                "site_count": p.site_count,
                "n_functions": len(p.fixed.functions),
                **{k: p.meta[k] for k in ("seed", "operator", "attempts") if k in p.meta},
            }
            for p in pairs
        ],
        "stratification": dict(sorted(strata.items())),
    }


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_corpus(out: Path, pairs: Sequence[FaultedPair], params: CorpusParams, seed: int) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for p in pairs:
        d = out / p.pair_id
        d.mkdir(exist_ok=True)
        (d / "fixed.mlp").write_text(print_program(p.fixed))
        (d / "buggy.mlp").write_text(print_program(p.buggy))
        (d / "truth.json").write_text(_dump(p.truth_json()))
    man = manifest(pairs, params, seed)
    (out / "manifest.json").write_text(_dump(man))
    return man


def load_pair(directory: Path, pair_id: Optional[str] = None) -> FaultedPair:
    directory = Path(directory)
    pair_id = pair_id or directory.name
    try:
        fixed = parse_program((directory / "fixed.mlp").read_text(), f"{pair_id}/fixed.mlp")
        buggy = parse_program((directory / "buggy.mlp").read_text(), f"{pair_id}/buggy.mlp")
        truth = json.loads((directory / "truth.json").read_text())
    except (OSError, ValueError) as exc:
        raise CorpusInvalid(f"{directory}: {exc}") from exc
    gt = tuple(truth["ground_truth"])
    sites = [MutationSite(s["function"], s["node"], s["operator"], s.get("detail", ""))
             for s in truth["mutation_sites"]]
    if len(gt) != len(fixed.functions) or len(gt) != len(buggy.functions):
        raise CorpusInvalid(f"{pair_id}: ground truth length does not match the programs")
    if [f.name for f in fixed.functions] != [f.name for f in buggy.functions]:
        raise CorpusInvalid(f"{pair_id}: buggy and fixed declare different functions")
    if gt != tuple(1 if any(s.function == i for s in sites) else 0 for i in range(len(gt))):
        raise CorpusInvalid(f"{pair_id}: ground truth disagrees with mutation sites")
    meta = {k: v for k, v in truth.items() if k not in ("functions", "ground_truth", "mutation_sites")}
    return FaultedPair(fixed, buggy, gt, sites, pair_id, meta)


def load_corpus(directory: Path) -> tuple[list[FaultedPair], dict]:
    directory = Path(directory)
    try:
        man = json.loads((directory / "manifest.json").read_text())
    except (OSError, ValueError) as exc:
        raise CorpusInvalid(f"{directory}: unreadable manifest ({exc})") from exc
    if man.get("schema") != SCHEMA_CORPUS:
        raise CorpusInvalid(f"{directory}: unexpected manifest schema {man.get('schema')!r}")
    pairs = []
    for entry in man["pairs"]:
        pair = load_pair(directory / entry["id"], entry["id"])
        if pair.site_count != entry["site_count"]:
            raise CorpusInvalid(f"{entry['id']}: site count differs from manifest")
        pairs.append(pair)
    return pairs, man
