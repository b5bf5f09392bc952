"""Balanced two-way ANOVA, epsilon squared and Welch's heteroscedastic one-way ANOVA."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from sbstdp.stats.special import f_sf


class StatsError(ValueError):
    pass


class UnbalancedDesign(StatsError):
    pass


class ZeroVarianceGroup(StatsError):
    pass


class InsufficientData(StatsError):
    pass


def mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs)


def variance(xs: Sequence[float]) -> float:
    """Unbiased sample variance."""
    m = mean(xs)
    return math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1)


@dataclass
class FactorialSample:
    """Observations keyed by (level of factor A, level of factor B)."""

    cells: dict
    factors: tuple = ("recall", "precision")

    @property
    def a_levels(self) -> list:
        return sorted({a for a, _ in self.cells})

    @property
    def b_levels(self) -> list:
        return sorted({b for _, b in self.cells})

    @classmethod
    def from_rows(cls, rows, factors=("recall", "precision")) -> "FactorialSample":
        """Build from ``(a, b, value)`` triples."""
        cells: dict = {}
        for a, b, y in rows:
            cells.setdefault((a, b), []).append(float(y))
        return cls(cells, tuple(factors))


@dataclass
class AnovaRow:
    df: float
    ss: float
    ms: float
    F: Optional[float] = None
    p: Optional[float] = None


@dataclass
class AnovaTable:
    rows: dict = field(default_factory=dict)  # effect name -> AnovaRow, "residuals" last

    RESIDUAL = "residuals"

    @property
    def residual(self) -> AnovaRow:
        return self.rows[self.RESIDUAL]

    @property
    def effects(self) -> list[str]:
        return [k for k in self.rows if k != self.RESIDUAL]

    @property
    def ss_total(self) -> float:
        return math.fsum(r.ss for r in self.rows.values())

    @property
    def df_total(self) -> float:
        return sum(r.df for r in self.rows.values())

    def __getitem__(self, effect: str) -> AnovaRow:
        return self.rows[effect]

    def to_records(self) -> list[dict]:
        return [{"effect": k, "df": r.df, "ss": r.ss, "ms": r.ms, "F": r.F, "p": r.p}
                for k, r in self.rows.items()]


def anova_from_sums(effects: Mapping[str, tuple], residual: tuple) -> AnovaTable:
    """Complete an ANOVA table from ``{effect: (SS, df)}`` and the residual ``(SS, df)``."""
    ss_e, df_e = residual
    if df_e <= 0:
        raise InsufficientData("residual degrees of freedom must be positive")
    ms_e = ss_e / df_e
    table = AnovaTable()
    for name, (ss, df) in effects.items():
        ms = ss / df
        if ms_e > 0:
            F = ms / ms_e
            p = f_sf(F, df, df_e)
        else:
            F = p = None
        table.rows[name] = AnovaRow(df, ss, ms, F, p)
    table.rows[AnovaTable.RESIDUAL] = AnovaRow(df_e, ss_e, ms_e)
    return table


def two_way_anova(sample: FactorialSample) -> AnovaTable:
    """Classical balanced two-way ANOVA with interaction.

    F and p are None when the residual variance is zero.
    """
    A, B = sample.a_levels, sample.b_levels
    if len(A) < 2 or len(B) < 2:
        raise InsufficientData("each factor needs at least two levels")
    sizes = set()
    for a in A:
        for b in B:
            cell = sample.cells.get((a, b))
            if not cell:
                raise UnbalancedDesign(f"missing cell {(a, b)}")
            sizes.add(len(cell))
    if len(sizes) != 1:
        raise UnbalancedDesign(f"cell sizes differ: {sorted(sizes)}")
    n = sizes.pop()
    if n < 2:
        raise InsufficientData("need at least two observations per cell")
    a, b = len(A), len(B)
    cm = {k: mean(v) for k, v in sample.cells.items()}
    grand = mean([y for v in sample.cells.values() for y in v])
    ma = {i: mean([cm[(i, j)] for j in B]) for i in A}
    mb = {j: mean([cm[(i, j)] for i in A]) for j in B}
    ss_a = b * n * math.fsum((ma[i] - grand) ** 2 for i in A)
    ss_b = a * n * math.fsum((mb[j] - grand) ** 2 for j in B)
    ss_ab = n * math.fsum((cm[(i, j)] - ma[i] - mb[j] + grand) ** 2 for i in A for j in B)
    ss_e = math.fsum((y - cm[k]) ** 2 for k, v in sample.cells.items() for y in v)
    fa, fb = sample.factors
    return anova_from_sums(
        {fa: (ss_a, a - 1), fb: (ss_b, b - 1), f"{fa}:{fb}": (ss_ab, (a - 1) * (b - 1))},
        (ss_e, a * b * (n - 1)),
    )


def epsilon_squared(table: AnovaTable, effect: str) -> Optional[float]:
    """(SS_effect - df_effect * MS_error) / SS_total, clamped at zero. None if SS_total is 0."""
    row = table[effect]
    total = table.ss_total
    if total <= 0:
        return None
    return max(0.0, (row.ss - row.df * table.residual.ms) / total)


def one_way_anova(groups: Sequence[Sequence[float]], name: str = "group") -> AnovaTable:
    """Classical one-way ANOVA; groups may differ in size."""
    if len(groups) < 2:
        raise InsufficientData("need at least two groups")
    if any(len(g) == 0 for g in groups):
        raise InsufficientData("empty group")
    N = sum(len(g) for g in groups)
    if N - len(groups) <= 0:
        raise InsufficientData("no residual degrees of freedom")
    grand = mean([y for g in groups for y in g])
    ss_b = math.fsum(len(g) * (mean(g) - grand) ** 2 for g in groups)
    ss_w = math.fsum((y - mean(g)) ** 2 for g in groups for y in g)
    return anova_from_sums({name: (ss_b, len(groups) - 1)}, (ss_w, N - len(groups)))


@dataclass
class WelchResult:
    F: float
    df_num: float
    df_denom: float
    p: float

    def to_json(self) -> dict:
        return {"F": self.F, "df_num": self.df_num, "df_denom": self.df_denom, "p": self.p}


def welch_anova(groups: Sequence[Sequence[float]]) -> WelchResult:
    """Welch's F* test for equal means without assuming equal variances."""
    k = len(groups)
    if k < 2:
        raise InsufficientData("need at least two groups")
    ns, ms, ws = [], [], []
    for i, g in enumerate(groups):
        if len(g) < 2:
            raise InsufficientData(f"group {i} has fewer than two observations")
        v = variance(g)
        if v <= 0:
            raise ZeroVarianceGroup(f"group {i} has zero variance")
        ns.append(len(g))
        ms.append(mean(g))
        ws.append(len(g) / v)
    W = math.fsum(ws)
    m_w = math.fsum(w * m for w, m in zip(ws, ms)) / W
    A = math.fsum(w * (m - m_w) ** 2 for w, m in zip(ws, ms)) / (k - 1)
    tmp = math.fsum((1 - w / W) ** 2 / (n - 1) for w, n in zip(ws, ns))
    B = 1 + 2 * (k - 2) / (k * k - 1) * tmp
    F = A / B
    df2 = (k * k - 1) / (3 * tmp)
    return WelchResult(F, float(k - 1), df2, f_sf(F, k - 1, df2))
