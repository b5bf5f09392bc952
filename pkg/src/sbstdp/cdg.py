"""Control dependency graphs, coverage targets and independent-path counts.

The language is structured, so control dependence follows the nesting tree:
a predicate nested in the then-branch of ``n`` hangs off ``n``'s true edge,
loop bodies hang off the loop predicate's true edge.

Graph shape per function: an ``entry`` root with one unconditional edge per
top-level predicate. Each predicate has exactly two outgoing branch edges. A
branch edge leads directly to the single predicate in its region, to a leaf
``region`` node when the region holds no predicate, or to a ``region`` node
with unconditional edges when the region holds several predicates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from sbstdp.minilang import ast
from sbstdp.minilang.interp import branch_key, entry_key


class CyclicGraph(ValueError):
    pass


@dataclass(frozen=True)
class CoverageTarget:
    id: int
    kind: str  # "entry" or "branch"
    owner: int
    node: Optional[int] = None
    outcome: Optional[bool] = None
    # target id of the branch outcome this target is control dependent on; None at top level
    parent: Optional[int] = None
    # (predicate node, outcome) pairs from the outermost ancestor down to this target
    chain: tuple = ()

    @property
    def key(self) -> tuple:
        if self.kind == "entry":
            return entry_key(self.owner)
        return branch_key(self.node, self.outcome)

    @property
    def depth(self) -> int:
        return len(self.chain)

    def label(self, program: Optional[ast.Program] = None) -> str:
        fn = program.functions[self.owner].name if program else f"f{self.owner}"
        if self.kind == "entry":
            return f"entry({fn})"
        return f"{fn}:n{self.node}:{'T' if self.outcome else 'F'}"


@dataclass(frozen=True)
class CdgNode:
    index: int
    kind: str  # "entry", "predicate" or "region"
    stmt: Optional[int] = None  # syntax node id for predicates


@dataclass(frozen=True)
class CdgEdge:
    index: int
    src: int
    dst: int
    outcome: Optional[bool]  # None for unconditional edges


@dataclass
class Cdg:
    function: int
    nodes: list[CdgNode]
    edges: list[CdgEdge]
    phi: dict[int, frozenset]
    root: int = 0
    _out: dict = field(default_factory=dict, repr=False)

    def outgoing(self, node: int) -> list[CdgEdge]:
        if not self._out:
            for e in self.edges:
                self._out.setdefault(e.src, []).append(e)
        return self._out.get(node, [])

    def predicate_nodes(self) -> list[CdgNode]:
        return [n for n in self.nodes if n.kind == "predicate"]

    def branch_edge(self, stmt: int, outcome: bool) -> CdgEdge:
        for e in self.edges:
            if e.outcome is outcome and self.nodes[e.src].stmt == stmt:
                return e
        raise KeyError((stmt, outcome))

    def to_dot(self, name: str = "cdg") -> str:
        lines = [f"digraph {name} {{"]
        for n in self.nodes:
            label = {"entry": "entry", "region": f"R{n.index}"}.get(n.kind, f"n{n.stmt}")
            shape = "diamond" if n.kind == "predicate" else "box"
            lines.append(f'  {n.index} [label="{label}", shape={shape}];')
        for e in self.edges:
            lab = {True: "T", False: "F", None: ""}[e.outcome]
            targets = ",".join(str(t) for t in sorted(self.phi.get(e.index, ())))
            lines.append(f'  {e.src} -> {e.dst} [label="{lab} {{{targets}}}"];')
        lines.append("}")
        return "\n".join(lines)


def _direct_predicates(stmts) -> list:
    return [s for s in stmts or () if isinstance(s, (ast.If, ast.While))]


def _local_target_ids(fn: ast.Function) -> dict:
    ids = {entry_key(fn.id): 0}
    for p in ast.predicates(fn):
        ids[branch_key(p.id, True)] = len(ids)
        ids[branch_key(p.id, False)] = len(ids)
    return ids


def build_cdg(fn: ast.Function, target_ids: Optional[dict] = None) -> Cdg:
    """Build the control dependency graph of ``fn``.

    ``target_ids`` maps target keys to program-wide ids; without it a local
    numbering is used (entry 0, then branch outcomes in pre-order).
    """
    ids = target_ids if target_ids is not None else _local_target_ids(fn)
    nodes = [CdgNode(0, "entry")]
    edges: list[CdgEdge] = []
    phi: dict[int, frozenset] = {}

    def add_node(kind, stmt=None) -> int:
        nodes.append(CdgNode(len(nodes), kind, stmt))
        return len(nodes) - 1

    def add_edge(src, dst, outcome) -> int:
        edges.append(CdgEdge(len(edges), src, dst, outcome))
        return len(edges) - 1

    def predicate(p) -> int:
        idx = add_node("predicate", p.id)
        if isinstance(p, ast.If):
            regions = ((True, p.then), (False, p.orelse))
        else:
            regions = ((True, p.body), (False, ()))
        for outcome, stmts in regions:
            inner = _direct_predicates(stmts)
            if len(inner) == 1:
                e = add_edge(idx, predicate(inner[0]), outcome)
            else:
                region = add_node("region")
                e = add_edge(idx, region, outcome)
                for q in inner:
                    add_edge(region, predicate(q), None)
            phi[e] = frozenset({ids[branch_key(p.id, outcome)]})
        return idx

    for p in _direct_predicates(fn.body):
        add_edge(0, predicate(p), None)
    for e in edges:
        phi.setdefault(e.index, frozenset())
    return Cdg(fn.id, nodes, edges, phi)


def independent_paths(cdg: Cdg) -> dict[int, int]:
    """Number of root-to-leaf continuations starting at each edge.

    count(e) = 1 when e's head has no outgoing edges, otherwise the sum over the
    head's outgoing edges.
    """
    counts: dict[int, int] = {}
    state: dict[int, int] = {}  # 1 = on stack, 2 = done

    def visit(edge: CdgEdge) -> int:
        if edge.index in counts:
            return counts[edge.index]
        head = edge.dst
        if state.get(head) == 1:
            raise CyclicGraph(f"cycle through node {head}")
        state[head] = 1
        out = cdg.outgoing(head)
        total = sum(visit(e) for e in out) if out else 1
        state[head] = 2
        counts[edge.index] = total
        return total

    for e in cdg.edges:
        visit(e)
    return counts


@dataclass
class TargetSpace:
    """All coverage targets of a program with the per-function graphs and path counts."""

    program: ast.Program
    targets: list[CoverageTarget]
    cdgs: dict[int, Cdg]
    path_counts: dict[int, dict[int, int]]
    key_to_id: dict[tuple, int]
    conditions: dict[int, object]  # predicate node id -> condition expression

    def __iter__(self):
        # unpacks as (targets, cdgs, path_counts)
        return iter((self.targets, self.cdgs, self.path_counts))

    def ids_of(self, keys) -> set[int]:
        k2i = self.key_to_id
        return {k2i[k] for k in keys if k in k2i}

    def owned_by(self, fids) -> list[int]:
        fids = set(fids)
        return [t.id for t in self.targets if t.owner in fids]


def collect_targets(program: ast.Program) -> TargetSpace:
    key_to_id: dict[tuple, int] = {}
    for fn in program.functions:
        key_to_id[entry_key(fn.id)] = len(key_to_id)
        for p in ast.predicates(fn):
            key_to_id[branch_key(p.id, True)] = len(key_to_id)
            key_to_id[branch_key(p.id, False)] = len(key_to_id)

    targets: list[CoverageTarget] = []
    conditions = {}
    for fn in program.functions:
        targets.append(CoverageTarget(key_to_id[entry_key(fn.id)], "entry", fn.id))

        def visit(stmts, chain, parent):
            for p in _direct_predicates(stmts):
                conditions[p.id] = p.cond
                for outcome in (True, False):
                    tid = key_to_id[branch_key(p.id, outcome)]
                    targets.append(CoverageTarget(
                        tid, "branch", fn.id, p.id, outcome, parent, chain + ((p.id, outcome),)
                    ))
                t_id = key_to_id[branch_key(p.id, True)]
                body = p.then if isinstance(p, ast.If) else p.body
                visit(body, chain + ((p.id, True),), t_id)
                if isinstance(p, ast.If) and p.orelse is not None:
                    visit(p.orelse, chain + ((p.id, False),), key_to_id[branch_key(p.id, False)])

        visit(fn.body, (), None)
    targets.sort(key=lambda t: t.id)
    cdgs = {fn.id: build_cdg(fn, key_to_id) for fn in program.functions}
    counts = {fid: independent_paths(g) for fid, g in cdgs.items()}
    return TargetSpace(program, targets, cdgs, counts, key_to_id, conditions)
