"""The recall x precision sweep: predictor simulation, search and detection for every cell.

Output directory layout::

    config.json                     resolved configuration (without the worker count)
    cells/<config>/sim<s>/prediction.json
    cells/<config>/sim<s>/run<k>/index.json     pair -> search key
    store/<key>/suite.json          one directory per distinct search
    store/<key>/verdict.json        written last; marks the search as done
    results.csv                     one row per (recall, precision, sim, run, pair)
    aggregates.csv                  one row per (recall, precision, sim, run)

A search is identified by the content hash of its inputs (pair text, restricted
labels, seed, budget, parameters). Search seeds depend on the restricted labels
rather than the grid point, so cells that hand a pair the same labels share one
search and the store makes reruns resumable.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from sbstdp.evaluation import suite_detects
from sbstdp.faults import FaultedPair, load_corpus
from sbstdp.harness.config import ExperimentConfig
from sbstdp.minilang import print_program
from sbstdp.predictor import Classification, simulate
from sbstdp.search import SKIPPED, SearchParams, run_search
from sbstdp.seeds import content_hash, derive_seed

log = logging.getLogger(__name__)

RESULTS_SCHEMA = "sbstdp.results/1"
AGGREGATES_SCHEMA = "sbstdp.aggregates/1"
RESULT_COLUMNS = ["recall", "precision", "sim", "run", "pair", "site_count", "status", "detected",
                  "evaluations", "covered", "realized_recall", "realized_precision"]
AGGREGATE_COLUMNS = ["recall", "precision", "sim", "run", "n_pairs", "skipped", "errors", "bugs_found"]
ERROR = "error"


def dump_json(obj, compact: bool = False) -> str:
    if compact:
        return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def fmt_level(x: float) -> str:
    return f"{x:.2f}"


def fmt_real(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.6f}"


def config_dir(recall: float, precision: float) -> str:
    return f"r{fmt_level(recall)}_p{fmt_level(precision)}"


def pair_hash(pair: FaultedPair) -> str:
    return content_hash([print_program(pair.fixed), print_program(pair.buggy), list(pair.ground_truth)])


def buckets(pairs: Sequence[FaultedPair], bucket_size: Optional[int]) -> list[list[FaultedPair]]:
    if bucket_size is None:
        return [list(pairs)]
    return [list(pairs[i:i + bucket_size]) for i in range(0, len(pairs), bucket_size)]


def simulate_bucket(bucket: Sequence[FaultedPair], recall: float, precision: float,
                    master: int, sim: int, index: int) -> tuple[Classification, dict]:
    """Classify the bucket's concatenated ground truth; returns the classification and per-pair labels."""
    truth = [c for p in bucket for c in p.ground_truth]
    c = simulate(truth, recall, precision, derive_seed(master, "predictor", recall, precision, sim, index))
    labels, at = {}, 0
    for p in bucket:
        n = len(p.ground_truth)
        labels[p.pair_id] = tuple(c.labels[at:at + n])
        at += n
    return c, labels


def search_seed(master: int, pair_id: str, run: int, labels: Sequence[int]) -> int:
    return derive_seed(master, "search", pair_id, run, list(labels))


def search_key(phash: str, labels: Sequence[int], seed: int, budget: int, params: SearchParams) -> str:
    return content_hash({"pair": phash, "labels": list(labels), "seed": seed, "budget": budget,
                         "search": params.to_json()})


def compute_search(pair: FaultedPair, labels: Sequence[int], seed: int, budget: int,
                   params: SearchParams) -> tuple[dict, dict]:
    """Run one search and judge its suite. Returns ``(suite_json, verdict_json)``."""
    result = run_search(pair.buggy, labels, budget, seed, params)
    verdict = suite_detects(pair, result.suite, params.limits, skipped=result.status == SKIPPED)
    suite = result.to_json(pair.buggy)
    suite.update({"pair": pair.pair_id, "labels": list(labels), "seed": seed, "budget": budget})
    summary = {
        "pair": pair.pair_id,
        "search": {
            "status": result.status,
            "evaluations": result.stats["evaluations"],
            "targets": result.stats["targets"],
            "covered": len(result.stats["covered_targets"]),
            "suite_size": len(result.suite),
        },
        "verdict": verdict.to_json(),
    }
    return suite, summary


_PAIRS: dict = {}


def _load_pairs(corpus: str) -> dict:
    if corpus not in _PAIRS:
        pairs, _ = load_corpus(Path(corpus))
        _PAIRS[corpus] = {p.pair_id: p for p in pairs}
    return _PAIRS[corpus]


def _search_job(job: tuple) -> tuple[str, Optional[str]]:
    key, corpus, pair_id, labels, seed, budget, params_json, store = job
    try:
        pair = _load_pairs(corpus)[pair_id]
        suite, summary = compute_search(pair, labels, seed, budget, SearchParams.from_json(params_json))
        d = Path(store) / key
        write_atomic(d / "suite.json", dump_json(suite, compact=True))
        write_atomic(d / "verdict.json", dump_json(summary))
        return key, None
    except Exception as exc:  # reported as partial results, retried on the next run
        log.exception("search %s for %s failed", key, pair_id)
        return key, f"{type(exc).__name__}: {exc}"


@dataclass
class ExperimentResult:
    out: Path
    n_rows: int
    n_aggregates: int
    searches: int
    reused: int
    errors: dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return not self.errors


def _csv_text(schema: str, columns: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {schema}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([row[c] for c in columns])
    return buf.getvalue()


def run_experiment(config: ExperimentConfig, out: Path, progress=None) -> ExperimentResult:
    """Run (or resume) the full sweep described by ``config`` into ``out``."""
    out = Path(out)
    pairs, man = load_corpus(Path(config.corpus))
    store = out / "store"
    identity = {**config.identity(), "corpus": content_hash(man)}
    # the worker count is left out so the output tree does not depend on it
    write_atomic(out / "config.json", dump_json({**config.identity(), "identity": content_hash(identity)}))
    hashes = {p.pair_id: pair_hash(p) for p in pairs}
    groups = buckets(pairs, config.bucket_size)
    params_json = config.search.to_json()

    # plan: every (cell, pair) slot and the search it needs
    slots = []  # (recall, precision, sim, run, pair, labels, realized, key or None)
    jobs: dict[str, tuple] = {}
    for recall, precision in config.grid:
        for sim in range(config.n_sims):
            predictions = []
            for b, bucket in enumerate(groups):
                c, labels = simulate_bucket(bucket, recall, precision, config.seed, sim, b)
                cj = c.to_json()
                predictions.append({**cj, "bucket": b, "pairs": [p.pair_id for p in bucket]})
                realized = (cj["realized"]["recall"], cj["realized"]["precision"])
                for run in range(config.n_runs):
                    for p in bucket:
                        lab = labels[p.pair_id]
                        key = None
                        if any(lab):
                            seed = search_seed(config.seed, p.pair_id, run, lab)
                            key = search_key(hashes[p.pair_id], lab, seed, config.budget, config.search)
                            jobs.setdefault(key, (key, config.corpus, p.pair_id, list(lab), seed,
                                                  config.budget, params_json, str(store)))
                        slots.append((recall, precision, sim, run, p, lab, realized, key))
            cell = out / "cells" / config_dir(recall, precision) / f"sim{sim}"
            write_atomic(cell / "prediction.json", dump_json({"recall": recall, "precision": precision,
                                                              "sim": sim, "buckets": predictions}))

    todo = sorted(k for k in jobs if not (store / k / "verdict.json").exists())
    reused = len(jobs) - len(todo)
    log.info("%d distinct searches, %d already stored", len(jobs), reused)
    errors: dict[str, str] = {}
    job_args = [jobs[k] for k in todo]
    if config.workers > 1 and len(job_args) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = pool.map(_search_job, job_args, chunksize=1)
            for i, (key, err) in enumerate(outcomes):
                if err:
                    errors[key] = err
                if progress:
                    progress(i + 1, len(job_args))
    else:
        for i, job in enumerate(job_args):
            key, err = _search_job(job)
            if err:
                errors[key] = err
            if progress:
                progress(i + 1, len(job_args))

    summaries = {}
    for key in jobs:
        if key not in errors:
            summaries[key] = json.loads((store / key / "verdict.json").read_text())

    rows, index = [], {}
    for recall, precision, sim, run, p, lab, realized, key in slots:
        row = {"recall": fmt_level(recall), "precision": fmt_level(precision), "sim": sim, "run": run,
               "pair": p.pair_id, "site_count": p.site_count,
               "realized_recall": fmt_real(realized[0]), "realized_precision": fmt_real(realized[1])}
        if key is None:
            row.update(status=SKIPPED, detected=0, evaluations=0, covered=0)
        elif key in errors:
            row.update(status=ERROR, detected=0, evaluations=0, covered=0)
        else:
            s = summaries[key]
            row.update(status=s["search"]["status"], detected=int(s["verdict"]["detected"]),
                       evaluations=s["search"]["evaluations"], covered=s["search"]["covered"])
        rows.append(row)
        index.setdefault((recall, precision, sim, run), {})[p.pair_id] = key

    for (recall, precision, sim, run), mapping in index.items():
        path = out / "cells" / config_dir(recall, precision) / f"sim{sim}" / f"run{run}" / "index.json"
        write_atomic(path, dump_json(mapping))

    rows.sort(key=lambda r: (r["recall"], r["precision"], r["sim"], r["run"], _pair_order(r["pair"])))
    aggregates = aggregate(rows)
    write_atomic(out / "results.csv", _csv_text(RESULTS_SCHEMA, RESULT_COLUMNS, rows))
    write_atomic(out / "aggregates.csv", _csv_text(AGGREGATES_SCHEMA, AGGREGATE_COLUMNS, aggregates))
    if errors:
        write_atomic(out / "errors.json", dump_json(errors))
    elif (out / "errors.json").exists():
        (out / "errors.json").unlink()
    return ExperimentResult(out, len(rows), len(aggregates), len(jobs), reused, errors)


def _pair_order(pair_id: str):
    """p2 before p10."""
    head = pair_id.rstrip("0123456789")
    tail = pair_id[len(head):]
    return (head, int(tail) if tail else -1, pair_id)


def aggregate(rows: Sequence[dict]) -> list[dict]:
    """Bugs found per (recall, precision, sim, run)."""
    out: dict = {}
    for r in rows:
        k = (r["recall"], r["precision"], r["sim"], r["run"])
        a = out.setdefault(k, {"recall": k[0], "precision": k[1], "sim": k[2], "run": k[3],
                               "n_pairs": 0, "skipped": 0, "errors": 0, "bugs_found": 0})
        a["n_pairs"] += 1
        a["skipped"] += r["status"] == SKIPPED
        a["errors"] += r["status"] == ERROR
        a["bugs_found"] += int(r["detected"])
    return [out[k] for k in sorted(out)]


def read_csv(path: Path) -> list[dict]:
    """Rows of a schema-tagged CSV written by this module."""
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))


@dataclass
class CellRun:
    classification: Classification
    labels: tuple
    seed: int
    suite: dict
    verdict: dict


def run_cell(corpus: Path, pair_id: str, recall: float, precision: float, sim: int, run: int,
             seed: int, budget: int, params: SearchParams = SearchParams(),
             bucket_size: Optional[int] = None) -> CellRun:
    """One (grid point, sim, run, pair) cell, computed exactly as the sweep computes it."""
    pairs, _ = load_corpus(Path(corpus))
    for b, bucket in enumerate(buckets(pairs, bucket_size)):
        if any(p.pair_id == pair_id for p in bucket):
            break
    else:
        raise KeyError(f"pair {pair_id} not in corpus")
    c, labels = simulate_bucket(bucket, recall, precision, seed, sim, b)
    pair = next(p for p in bucket if p.pair_id == pair_id)
    lab = labels[pair_id]
    s = search_seed(seed, pair_id, run, lab)
    suite, summary = compute_search(pair, lab, s, budget, params)
    return CellRun(c, lab, s, suite, summary)
