"""Assumption checks and pairwise effect sizes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from sbstdp.stats.anova import InsufficientData, StatsError, ZeroVarianceGroup, mean, variance
from sbstdp.stats.special import chi2_sf, kolmogorov_sf, normal_cdf, t_sf_two_sided


class ZeroVariance(StatsError):
    pass


class DegenerateSample(StatsError):
    pass


def cohens_d(a: Sequence[float], b: Sequence[float]) -> float:
    """Standardised mean difference using the df-weighted pooled standard deviation."""
    if not a or not b:
        raise InsufficientData("both samples must be non-empty")
    df = len(a) + len(b) - 2
    if df <= 0:
        raise ZeroVariance("pooled standard deviation undefined for two single observations")
    ss = math.fsum((x - mean(a)) ** 2 for x in a) + math.fsum((x - mean(b)) ** 2 for x in b)
    if ss <= 0:
        raise ZeroVariance("pooled standard deviation is zero")
    return (mean(a) - mean(b)) / math.sqrt(ss / df)


@dataclass
class KsResult:
    D: float
    p: float


def ks_normality(observations: Sequence[float]) -> KsResult:
    """One-sample KS distance to a normal with estimated mean and sd.

    The p-value uses the asymptotic Kolmogorov tail at
    lam = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) * D.
    """
    n = len(observations)
    if n < 3:
        raise InsufficientData("KS normality needs n >= 3")
    m = mean(observations)
    sd = math.sqrt(variance(observations))
    if sd <= 0:
        raise DegenerateSample("sample standard deviation is zero")
    xs = sorted(observations)
    D = 0.0
    for i, x in enumerate(xs):
        F = normal_cdf((x - m) / sd)
        D = max(D, (i + 1) / n - F, F - i / n)
    sq = math.sqrt(n)
    return KsResult(D, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * D))


@dataclass
class BartlettResult:
    statistic: float
    df: int
    p: float


def bartlett(groups: Sequence[Sequence[float]]) -> BartlettResult:
    k = len(groups)
    if k < 2:
        raise InsufficientData("Bartlett's test needs at least two groups")
    ns, vs = [], []
    for i, g in enumerate(groups):
        if len(g) < 2:
            raise InsufficientData(f"group {i} has fewer than two observations")
        v = variance(g)
        if v <= 0:
            raise ZeroVarianceGroup(f"group {i} has zero variance")
        ns.append(len(g))
        vs.append(v)
    N = sum(ns)
    pooled = math.fsum((n - 1) * v for n, v in zip(ns, vs)) / (N - k)
    num = (N - k) * math.log(pooled) - math.fsum((n - 1) * math.log(v) for n, v in zip(ns, vs))
    corr = 1 + (math.fsum(1 / (n - 1) for n in ns) - 1 / (N - k)) / (3 * (k - 1))
    stat = max(0.0, num / corr)
    return BartlettResult(stat, k - 1, chi2_sf(stat, k - 1))


@dataclass
class WelchT:
    t: float
    df: float
    p: float


def welch_t(a: Sequence[float], b: Sequence[float]) -> WelchT:
    if len(a) < 2 or len(b) < 2:
        raise InsufficientData("Welch's t needs two observations per group")
    va, vb = variance(a) / len(a), variance(b) / len(b)
    if va + vb <= 0:
        raise ZeroVariance("both groups have zero variance")
    t = (mean(a) - mean(b)) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / ((va * va / (len(a) - 1) if va else 0.0) + (vb * vb / (len(b) - 1) if vb else 0.0))
    return WelchT(t, df, t_sf_two_sided(t, df))


@dataclass
class Comparison:
    pair: tuple
    welch: WelchT
    cohens_d: float

    def to_record(self) -> dict:
        return {"a": self.pair[0], "b": self.pair[1], "t": self.welch.t, "df": self.welch.df,
                "p": self.welch.p, "cohens_d": self.cohens_d}


def pairwise_comparisons(groups: Sequence[Sequence[float]], labels: Sequence) -> list[Comparison]:
    """Welch t and Cohen's d for every unordered pair of groups, ordered by label.

    A labelled stand-in for post-hoc tests based on the studentized range;
    p-values are not adjusted for multiplicity.
    """
    if len(groups) < 2:
        raise InsufficientData("need at least two groups")
    if len(groups) != len(labels):
        raise ValueError("one label per group")
    order = sorted(range(len(labels)), key=lambda i: labels[i])
    out = []
    for x, i in enumerate(order):
        for j in order[x + 1:]:
            a, b = groups[i], groups[j]
            if mean(a) == mean(b) and variance(a) + variance(b) == 0:
                raise ZeroVariance(f"groups {labels[i]} and {labels[j]} are constant")
            out.append(Comparison((labels[i], labels[j]), welch_t(a, b), cohens_d(a, b)))
    return out
