import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbstdp.predictor import (
    PRECISION_LEVELS,
    RECALL_LEVELS,
    DegenerateTruth,
    InsufficientNegatives,
    LengthMismatch,
    config_grid,
    measure,
    round_half_up,
    rounding_bounds,
    simulate,
    target_counts,
)


def truth_vector(k, d, seed=0):
    m = [1] * d + [0] * (k - d)
    random.Random(seed).shuffle(m)
    return m


def test_counts_k100_d20():
    c = simulate(truth_vector(100, 20), 0.75, 0.75, 1)
    assert (c.tp, c.fp) == (15, 5)
    assert sum(c.labels) == 20


def test_identity_case():
    m = truth_vector(30, 7)
    c = simulate(m, 1.0, 1.0, 4)
    assert list(c.labels) == m


def test_recall_08_precision_1():
    m = truth_vector(40, 10)
    c = simulate(m, 0.8, 1.0, 2)
    assert (c.tp, c.fp) == (8, 0)
    missed = [i for i in range(40) if m[i] and not c.labels[i]]
    assert len(missed) == 2


def test_measure_examples():
    m = [1] * 20 + [0] * 10
    labels = [1] * 15 + [0] * 5 + [1] * 5 + [0] * 5
    assert measure(m, labels) == (0.75, 0.75)
    assert measure(m, [0] * 30) == (0.0, None)


def test_errors():
    with pytest.raises(DegenerateTruth):
        simulate([0, 0, 0], 1.0, 1.0, 0)
    with pytest.raises(InsufficientNegatives):
        simulate([1] * 8 + [0], 1.0, 0.75, 0)
    with pytest.raises(LengthMismatch):
        measure([1, 0], [1])


def test_config_grid():
    grid = config_grid()
    assert len(grid) == 12
    assert (0.75, 0.85) in grid and (1.0, 1.0) in grid
    assert min(r for _, r in grid) == 0.75
    assert set(grid) == {(p, r) for p in (0.75, 1.0) for r in (0.75, 0.8, 0.85, 0.9, 0.95, 1.0)}
    assert RECALL_LEVELS[0] == 0.75 and PRECISION_LEVELS == (0.75, 1.0)


def test_round_half_up():
    assert [round_half_up(Fraction(x, 2)) for x in range(6)] == [0, 1, 1, 2, 2, 3]
    # 0.85 * 10 is 8.5 exactly as a decimal, whatever the float says
    assert target_counts(10, 0.85, 1.0) == (9, 0)


def test_seed_determinism():
    m = truth_vector(50, 12)
    assert simulate(m, 0.8, 0.75, 9) == simulate(m, 0.8, 0.75, 9)
    assert simulate(m, 0.8, 0.75, random.Random(3)).labels == simulate(m, 0.8, 0.75, random.Random(3)).labels


@settings(max_examples=100, deadline=None)
@given(d=st.integers(1, 40), extra=st.integers(0, 60), grid=st.sampled_from(config_grid()), seed=st.integers(0, 999))
def test_roundtrip_within_rounding_bound(d, extra, grid, seed):
    p, r = grid
    m = truth_vector(d + extra, d, seed)
    try:
        c = simulate(m, r, p, seed)
    except InsufficientNegatives:
        assert target_counts(d, r, p)[1] > extra
        return
    rec, prec = measure(m, c)
    rb, pb = rounding_bounds(d, c.tp, c.fp, p)
    assert abs(rec - r) <= rb + 1e-12
    if c.tp:
        assert abs(prec - p) <= pb + 1e-12
    exact_tp = d * Fraction(str(r))
    if exact_tp.denominator == 1 and (exact_tp * (1 - Fraction(str(p))) / Fraction(str(p))).denominator == 1:
        assert (rec, prec) == (r, p)


def test_uniform_selection_of_buggy_methods():
    m = [1] * 20 + [0] * 30
    n = 2000
    hits = [0] * 20
    for s in range(n):
        c = simulate(m, 0.75, 1.0, s)
        for i in range(20):
            hits[i] += c.labels[i]
    sigma = (n * 0.75 * 0.25) ** 0.5
    for h in hits:
        assert abs(h - 0.75 * n) <= 4 * sigma
