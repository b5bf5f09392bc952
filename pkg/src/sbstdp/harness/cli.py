"""Command-line entry point: ``sbstdp <subcommand> ...``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 partial results.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from sbstdp.cdg import build_cdg
from sbstdp.evaluation import suite_detects
from sbstdp.faults import (
    CorpusInvalid,
    CorpusParams,
    GenerationExhausted,
    gen_corpus,
    load_corpus,
    load_pair,
    write_corpus,
)
from sbstdp.harness.analysis import IncompleteDataset, analyze, render
from sbstdp.harness.config import ConfigError, ExperimentConfig
from sbstdp.harness.experiment import dump_json, run_cell, run_experiment, write_atomic
from sbstdp.minilang import ParseError
from sbstdp.predictor import DegenerateTruth, InsufficientNegatives, LengthMismatch, simulate
from sbstdp.search import SearchParams
from sbstdp.stats import StatsError
from sbstdp.testcase import TestCase

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PARTIAL = 0, 2, 3, 4

DATA_ERRORS = (CorpusInvalid, ConfigError, ParseError, IncompleteDataset, InsufficientNegatives, DegenerateTruth,
               LengthMismatch, GenerationExhausted, StatsError, KeyError, OSError, json.JSONDecodeError)

log = logging.getLogger("sbstdp")


def _range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("-")
    try:
        return int(lo), int(hi or lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO-HI, got {text!r}")


def _site_counts(text: str) -> dict:
    out = {}
    try:
        for part in text.split(","):
            k, _, w = part.partition(":")
            out[int(k)] = float(w or 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected COUNT:WEIGHT[,...], got {text!r}")
    return out


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def cmd_gen_corpus(args) -> int:
    params = CorpusParams(n_programs=args.n, functions=args.functions, depth=args.depth,
                          site_counts=args.site_counts, samples=args.samples, stratify=args.stratify)
    pairs = gen_corpus(params, args.seed)
    man = write_corpus(args.out, pairs, params, args.seed)
    log.info("wrote %d pairs to %s (strata %s)", len(pairs), args.out, man["stratification"])
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.truth is not None:
        truth = [int(x) for x in args.truth.split(",") if x.strip()]
    elif args.corpus is not None:
        pairs, _ = load_corpus(args.corpus)
        truth = [c for p in pairs for c in p.ground_truth]
    else:
        raise SystemExit("simulate-predictor: one of --truth or --corpus is required")
    c = simulate(truth, args.recall, args.precision, args.seed)
    _emit(dump_json(c.to_json()), args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    cell = run_cell(args.corpus, args.pair, args.recall, args.precision, args.sim, args.run, args.seed,
                    args.budget, SearchParams(), args.bucket_size)
    out = args.out
    write_atomic(out / "prediction.json", dump_json({**cell.classification.to_json(), "pair": args.pair,
                                                     "pair_labels": list(cell.labels)}))
    write_atomic(out / "suite.json", dump_json(cell.suite, compact=True))
    write_atomic(out / "verdict.json", dump_json(cell.verdict))
    if args.dump_cdg:
        pair = load_pair(args.corpus / args.pair)
        for fn in pair.buggy.functions:
            write_atomic(out / "cdg" / f"{fn.name}.dot", build_cdg(fn).to_dot(fn.name))
    v = cell.verdict
    log.info("%s: %s, %d tests, detected=%s", args.pair, v["search"]["status"], v["search"]["suite_size"],
             v["verdict"]["detected"])
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = ExperimentConfig.load(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        config = ExperimentConfig.from_json({**config.to_json(), **overrides})

    def progress(i, n):
        if i == n or i % 50 == 0:
            log.info("searches %d/%d", i, n)

    result = run_experiment(config, args.out, progress)
    log.info("%d rows, %d aggregates, %d searches (%d reused)", result.n_rows, result.n_aggregates,
             result.searches, result.reused)
    if not result.complete:
        log.error("%d searches failed; see %s", len(result.errors), args.out / "errors.json")
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_analyze(args) -> int:
    report = analyze(args.results, args.out)
    if not args.quiet:
        sys.stdout.write(render(report))
    return EXIT_OK


def cmd_replay(args) -> int:
    pair = load_pair(args.pair)
    data = json.loads(Path(args.suite).read_text())
    suite = [TestCase.from_json(t, pair.buggy) for t in data["tests"]]
    verdict = suite_detects(pair, suite, skipped=data.get("status") == "skipped")
    if not args.quiet:
        for i, (t, v) in enumerate(zip(suite, verdict.verdicts)):
            if v or args.all:
                print(f"{i}\t{pair.buggy.functions[t.entry].name}{t.args}\t"
                      f"{'invalid' if v is None else 'DETECTS' if v else 'passes'}")
        print(f"detected={verdict.detected} first={verdict.first_detecting_test} reason={verdict.reason}")
    if args.out is not None:
        write_atomic(args.out, dump_json(verdict.to_json()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--quiet", action="store_true", help="only log warnings and errors")

    parser = argparse.ArgumentParser(prog="sbstdp", description="Defect-prediction-guided test generation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", parents=[common], help="generate buggy/fixed program pairs")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--n", type=int, default=60, help="number of pairs")
    p.add_argument("--functions", type=_range, default=(3, 5), help="functions per program, LO-HI")
    p.add_argument("--depth", type=_range, default=(1, 3), help="if-nesting depth, LO-HI")
    p.add_argument("--site-counts", type=_site_counts, default={1: 1.0},
                   help="mutation sites per pair with weights, e.g. 1:1,3:1")
    p.add_argument("--stratify", action="store_true",
                   help="split pairs across site counts in proportion to the weights")
    p.add_argument("--samples", type=int, default=10_000, help="random calls for the detectability check")
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("simulate-predictor", parents=[common], help="simulate one classification")
    p.add_argument("--corpus", type=Path)
    p.add_argument("--truth", help="comma-separated 0/1 labels instead of a corpus")
    p.add_argument("--recall", type=float, required=True)
    p.add_argument("--precision", type=float, required=True)
    p.add_argument("--out", type=Path, help="output JSON file (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", parents=[common], help="run a single experiment cell")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--pair", required=True)
    p.add_argument("--recall", type=float, required=True)
    p.add_argument("--precision", type=float, required=True)
    p.add_argument("--sim", type=int, default=0)
    p.add_argument("--run", type=int, default=0)
    p.add_argument("--budget", type=int, default=20_000, help="fitness evaluations")
    p.add_argument("--bucket-size", type=int, default=None)
    p.add_argument("--dump-cdg", action="store_true", help="also write each function's CDG as DOT")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", parents=[common], help="run the full sweep from exp.json")
    p.set_defaults(seed=None)
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--workers", type=int, default=None, help="override the configured width")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("analyze", parents=[common], help="statistics over a results directory")
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None, help="report directory (default: the results directory)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("replay", parents=[common], help="re-execute a stored suite against a pair")
    p.add_argument("--pair", type=Path, required=True, help="pair directory")
    p.add_argument("--suite", type=Path, required=True)
    p.add_argument("--all", action="store_true", help="list passing tests too")
    p.add_argument("--out", type=Path, default=None, help="write the verdict JSON here")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DATA_ERRORS as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_DATA
    except (ValueError, SystemExit) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
