"""Simulated binary defect predictors at a commanded recall and precision."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

RECALL_LEVELS = (0.75, 0.80, 0.85, 0.90, 0.95, 1.00)
PRECISION_LEVELS = (0.75, 1.00)


class InsufficientNegatives(ValueError):
    pass


class DegenerateTruth(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Classification:
    labels: tuple[int, ...]
    recall: float  # requested
    precision: float  # requested
    tp: int
    fp: int
    fn: int
    seed: Optional[int] = None

    @property
    def predicted(self) -> list[int]:
        return [i for i, c in enumerate(self.labels) if c]

    def to_json(self) -> dict:
        rec, prec = measure_counts(self.tp, self.fp, self.fn)
        return {
            "requested": {"recall": self.recall, "precision": self.precision},
            "realized": {"recall": rec, "precision": prec, "tp": self.tp, "fp": self.fp, "fn": self.fn},
            "labels": list(self.labels),
            "seed": self.seed,
        }


def round_half_up(x: Fraction) -> int:
    return int((x + Fraction(1, 2)) // 1)


def _exact(x: float) -> Fraction:
    # grid values such as 0.85 are meant as decimals, not their binary expansion
    return Fraction(str(x))


def target_counts(d: int, r: float, p: float) -> tuple[int, int]:
    """Requested true and false positives for ``d`` buggy methods."""
    tp = round_half_up(d * _exact(r))
    fr = tp * (1 - _exact(p)) / _exact(p)
    return tp, round_half_up(fr)


def simulate(truth: Sequence[int], r: float, p: float, rng: random.Random | int) -> Classification:
    """Label ``round(d*r)`` random buggy and ``round(tp*(1-p)/p)`` random clean methods as buggy."""
    if not 0 <= r <= 1 or not 0 < p <= 1:
        raise ValueError(f"recall must lie in [0,1] and precision in (0,1], got {r}, {p}")
    seed = rng if isinstance(rng, int) else None
    if isinstance(rng, int):
        rng = random.Random(rng)
    buggy = [i for i, m in enumerate(truth) if m == 1]
    clean = [i for i, m in enumerate(truth) if m == 0]
    d, nd = len(buggy), len(clean)
    if d == 0:
        raise DegenerateTruth("ground truth has no buggy method")
    tp, fp = target_counts(d, r, p)
    if fp > nd:
        raise InsufficientNegatives(f"need {fp} false positives but only {nd} clean methods")
    chosen = set(rng.sample(buggy, tp)) | set(rng.sample(clean, fp))
    labels = tuple(1 if i in chosen else 0 for i in range(len(truth)))
    return Classification(labels, r, p, tp, fp, d - tp, seed)


def measure_counts(tp: int, fp: int, fn: int) -> tuple[float, Optional[float]]:
    recall = tp / (tp + fn) if tp + fn else 0.0
    precision = tp / (tp + fp) if tp + fp else None
    return recall, precision


def confusion(truth: Sequence[int], labels: Sequence[int]) -> tuple[int, int, int]:
    if len(truth) != len(labels):
        raise LengthMismatch(f"{len(truth)} labels in truth, {len(labels)} predicted")
    tp = sum(1 for m, c in zip(truth, labels) if m and c)
    fp = sum(1 for m, c in zip(truth, labels) if not m and c)
    fn = sum(1 for m, c in zip(truth, labels) if m and not c)
    return tp, fp, fn


def measure(truth: Sequence[int], c: Classification | Sequence[int]) -> tuple[float, Optional[float]]:
    """Realised (recall, precision); precision is None when nothing is predicted buggy."""
    labels = c.labels if isinstance(c, Classification) else c
    return measure_counts(*confusion(truth, labels))


def rounding_bounds(d: int, tp: int, fp: int, p: float) -> tuple[float, float]:
    """Worst-case |realised - requested| for recall and precision caused by rounding.

    Recall: tp differs from d*r by at most 1/2. Precision: fp differs from the
    exact tp*(1-p)/p by at most 1/2, and with ``f`` the exact value
    ``|tp/(tp+fp) - tp/(tp+f)| = tp*|fp-f| / ((tp+fp)*(tp+f))``.
    """
    recall_bound = 0.5 / d
    if tp == 0:
        return recall_bound, 0.0
    exact_fp = float(tp * (1 - _exact(p)) / _exact(p))
    precision_bound = 0.5 * tp / ((tp + fp) * (tp + exact_fp))
    return recall_bound, precision_bound


def config_grid() -> list[tuple[float, float]]:
    """The twelve (precision, recall) predictor configurations."""
    return [(p, r) for p in PRECISION_LEVELS for r in RECALL_LEVELS]
