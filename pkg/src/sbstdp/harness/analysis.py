"""Statistical analysis of a finished sweep.

The sample unit is bugs found per (recall, precision, sim, run). The pipeline
runs normality and homogeneity checks, the two-way ANOVA with epsilon squared,
Welch ANOVAs stratified by the number of mutation sites, pairwise comparisons
across recall levels and the mean-bugs-found profile.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from sbstdp.harness.experiment import ERROR, aggregate, read_csv, write_atomic
from sbstdp.stats import (
    FactorialSample,
    StatsError,
    bartlett,
    epsilon_squared,
    ks_normality,
    one_way_anova,
    pairwise_comparisons,
    two_way_anova,
    welch_anova,
)
from sbstdp.stats.anova import mean, variance

REPORT_SCHEMA = "sbstdp.report/1"
ANOVA_COLUMNS = ["effect", "df", "ss", "ms", "F", "p"]
EFFECT_COLUMNS = ["analysis", "stratum", "effect", "F", "df_num", "df_denom", "p", "epsilon_squared"]
PROFILE_COLUMNS = ["recall", "precision", "n", "mean_bugs_found", "sd_bugs_found", "mean_skipped"]
NORMALITY_COLUMNS = ["recall", "precision", "n", "D", "p"]
PAIRWISE_COLUMNS = ["a", "b", "t", "df", "p", "cohens_d"]

STRATA = {"all": lambda n: True, "single": lambda n: n == 1, "multi": lambda n: n > 1}


class IncompleteDataset(ValueError):
    pass


@dataclass
class StatsReport:
    anova: list = field(default_factory=list)
    effects: list = field(default_factory=list)
    profile: list = field(default_factory=list)
    normality: list = field(default_factory=list)
    pairwise: list = field(default_factory=list)
    bartlett: Optional[dict] = None
    notes: list = field(default_factory=list)

    def effect(self, analysis: str, stratum: str, effect: str) -> Optional[dict]:
        for e in self.effects:
            if (e["analysis"], e["stratum"], e["effect"]) == (analysis, stratum, effect):
                return e
        return None


def _check_complete(aggs: Sequence[dict]) -> None:
    if not aggs:
        raise IncompleteDataset("no results")
    bad = [a for a in aggs if int(a["errors"])]
    if bad:
        raise IncompleteDataset(f"{len(bad)} aggregate rows contain failed searches")
    levels_r = sorted({a["recall"] for a in aggs})
    levels_p = sorted({a["precision"] for a in aggs})
    reps = {}
    for a in aggs:
        reps.setdefault((a["recall"], a["precision"]), set()).add((a["sim"], a["run"]))
    expected = reps.get((levels_r[0], levels_p[0]), set())
    for r in levels_r:
        for p in levels_p:
            if reps.get((r, p)) != expected:
                raise IncompleteDataset(f"cell recall={r} precision={p} has missing repetitions")
    sizes = {int(a["n_pairs"]) for a in aggs}
    if len(sizes) != 1:
        raise IncompleteDataset("aggregate rows cover different numbers of pairs")


def _num(x) -> Optional[float]:
    return None if x is None else float(x)


def _welch_rows(stratum: str, groups: dict, effect: str) -> dict:
    keys = sorted(groups)
    data = [groups[k] for k in keys]
    row = {"analysis": "welch", "stratum": stratum, "effect": effect,
           "F": None, "df_num": None, "df_denom": None, "p": None, "epsilon_squared": None}
    try:
        w = welch_anova(data)
        row.update(F=w.F, df_num=w.df_num, df_denom=w.df_denom, p=w.p)
    except StatsError:
        pass
    try:
        row["epsilon_squared"] = epsilon_squared(one_way_anova(data, effect), effect)
    except StatsError:
        pass
    return row


def analyze_rows(rows: Sequence[dict]) -> StatsReport:
    """Analyse result rows (dicts with the results.csv columns)."""
    if not rows:
        raise IncompleteDataset("no results")
    if any(r["status"] == ERROR for r in rows):
        raise IncompleteDataset("results contain failed searches")
    aggs = aggregate(rows)
    _check_complete(aggs)
    report = StatsReport()

    cells: dict = {}
    for a in aggs:
        cells.setdefault((float(a["recall"]), float(a["precision"])), []).append(a)
    sample = FactorialSample({k: [float(a["bugs_found"]) for a in v] for k, v in cells.items()})

    for (r, p), v in sorted(cells.items()):
        ys = [float(a["bugs_found"]) for a in v]
        report.profile.append({"recall": r, "precision": p, "n": len(ys), "mean_bugs_found": mean(ys),
                               "sd_bugs_found": math.sqrt(variance(ys)) if len(ys) > 1 else None,
                               "mean_skipped": mean([float(a["skipped"]) for a in v])})
        try:
            ks = ks_normality(ys)
            report.normality.append({"recall": r, "precision": p, "n": len(ys), "D": ks.D, "p": ks.p})
        except StatsError as exc:
            report.normality.append({"recall": r, "precision": p, "n": len(ys), "D": None, "p": None})
            report.notes.append(f"KS skipped for recall={r} precision={p}: {exc}")

    try:
        b = bartlett([sample.cells[k] for k in sorted(sample.cells)])
        report.bartlett = {"statistic": b.statistic, "df": b.df, "p": b.p}
    except StatsError as exc:
        report.notes.append(f"Bartlett skipped: {exc}")

    try:
        table = two_way_anova(sample)
        report.anova = table.to_records()
        for eff in table.effects:
            row = table[eff]
            report.effects.append({"analysis": "two_way", "stratum": "all", "effect": eff, "F": row.F,
                                   "df_num": row.df, "df_denom": table.residual.df, "p": row.p,
                                   "epsilon_squared": epsilon_squared(table, eff)})
    except StatsError as exc:
        report.notes.append(f"two-way ANOVA skipped: {exc}")

    # Welch path, stratified by the number of mutation sites
    for stratum, keep in STRATA.items():
        sub = [r for r in rows if keep(int(r["site_count"]))]
        if not sub:
            continue
        by_rec, by_prec = {}, {}
        for a in aggregate(sub):
            by_rec.setdefault(float(a["recall"]), []).append(float(a["bugs_found"]))
            by_prec.setdefault(float(a["precision"]), []).append(float(a["bugs_found"]))
        report.effects.append(_welch_rows(stratum, by_rec, "recall"))
        report.effects.append(_welch_rows(stratum, by_prec, "precision"))

    by_rec = {}
    for (r, _), ys in sample.cells.items():
        by_rec.setdefault(r, []).extend(ys)
    labels = sorted(by_rec)
    try:
        report.pairwise = [c.to_record() for c in pairwise_comparisons([by_rec[k] for k in labels], labels)]
    except StatsError as exc:
        report.notes.append(f"pairwise comparisons skipped: {exc}")
    return report


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _csv(columns: list, records: list) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {REPORT_SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([_fmt(rec.get(c)) for c in columns])
    return buf.getvalue()


def _table(columns: list, records: list) -> str:
    cells = [[_fmt(r.get(c)) or "-" for c in columns] for r in records]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.ljust(w) if i == 0 else v.rjust(w) for i, (v, w) in enumerate(zip(row, widths)))
              for row in cells]
    return "\n".join(lines)


def render(report: StatsReport) -> str:
    parts = ["Two-way ANOVA (bugs found ~ recall * precision)", _table(ANOVA_COLUMNS, report.anova) or "-", "",
             "Effect sizes and Welch ANOVA", _table(EFFECT_COLUMNS, report.effects), "",
             "Mean bugs found per configuration", _table(PROFILE_COLUMNS, report.profile), "",
             "Normality (KS against fitted normal) per configuration", _table(NORMALITY_COLUMNS, report.normality), ""]
    if report.bartlett:
        b = report.bartlett
        parts += [f"Bartlett: statistic={_fmt(b['statistic'])} df={b['df']} p={_fmt(b['p'])}", ""]
    parts += ["Pairwise recall comparisons (Welch t, Cohen's d; unadjusted)",
              _table(PAIRWISE_COLUMNS, report.pairwise), ""]
    if report.notes:
        parts += ["Notes"] + [f"- {n}" for n in report.notes] + [""]
    return "\n".join(parts)


def write_report(report: StatsReport, out: Path) -> list[Path]:
    out = Path(out)
    files = {
        "anova.csv": _csv(ANOVA_COLUMNS, report.anova),
        "effects.csv": _csv(EFFECT_COLUMNS, report.effects),
        "profile.csv": _csv(PROFILE_COLUMNS, report.profile),
        "normality.csv": _csv(NORMALITY_COLUMNS, report.normality),
        "pairwise.csv": _csv(PAIRWISE_COLUMNS, report.pairwise),
        "report.txt": render(report),
    }
    for name, text in files.items():
        write_atomic(out / name, text)
    return [out / n for n in files]


def analyze(results: Path, out: Optional[Path] = None) -> StatsReport:
    """Analyse ``results/results.csv`` and write the report files to ``out`` (default ``results``)."""
    results = Path(results)
    path = results / "results.csv" if results.is_dir() else results
    try:
        rows = read_csv(path)
    except OSError as exc:
        raise IncompleteDataset(f"cannot read {path}: {exc}") from exc
    report = analyze_rows(rows)
    write_report(report, out or (results if results.is_dir() else results.parent))
    return report
