"""Differential bug detection: does a suite behave differently on the buggy and fixed versions?"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from sbstdp.faults import FaultedPair
from sbstdp.fitness import InvalidTest
from sbstdp.minilang.interp import DEFAULT_LIMITS, InvalidArguments, Limits, execute
from sbstdp.testcase import TestCase

log = logging.getLogger(__name__)

DETECTED = "detected"
NOT_DETECTED = "not_detected"
SKIPPED = "skipped"
EMPTY = "empty_suite"


def observe(pair: FaultedPair, test: TestCase, limits: Limits = DEFAULT_LIMITS) -> tuple:
    """(buggy observable, fixed observable) for one test."""
    try:
        buggy = execute(pair.buggy, test.entry, test.args, limits).observable()
        fixed = execute(pair.fixed, test.entry, test.args, limits).observable()
    except InvalidArguments as exc:
        raise InvalidTest(str(exc)) from exc
    return buggy, fixed


def test_detects(pair: FaultedPair, test: TestCase, limits: Limits = DEFAULT_LIMITS) -> bool:
    buggy, fixed = observe(pair, test, limits)
    return buggy != fixed


test_detects.__test__ = False  # not a pytest test


@dataclass
class Verdict:
    detected: bool
    first_detecting_test: Optional[int] = None
    verdicts: list = field(default_factory=list)  # True / False / None (invalid test)
    reason: str = NOT_DETECTED
    witness: Optional[dict] = None
    invalid_tests: int = 0

    def to_json(self) -> dict:
        return {
            "detected": self.detected,
            "first_detecting_test": self.first_detecting_test,
            "reason": self.reason,
            "witness": self.witness,
            "tests": len(self.verdicts),
            "detecting_tests": sum(1 for v in self.verdicts if v),
            "invalid_tests": self.invalid_tests,
        }


def suite_detects(pair: FaultedPair, suite: Sequence[TestCase], limits: Limits = DEFAULT_LIMITS,
                  skipped: bool = False, stop_at_first: bool = False) -> Verdict:
    """Suite-level verdict: detected iff any test detects. Invalid tests count as non-detecting."""
    if skipped:
        return Verdict(False, reason=SKIPPED)
    if not suite:
        return Verdict(False, reason=EMPTY)
    verdict = Verdict(False)
    for i, test in enumerate(suite):
        try:
            buggy, fixed = observe(pair, test, limits)
        except InvalidTest as exc:
            log.warning("broken test %d in %s: %s", i, pair.pair_id, exc)
            verdict.verdicts.append(None)
            verdict.invalid_tests += 1
            continue
        hit = buggy != fixed
        verdict.verdicts.append(hit)
        if hit and not verdict.detected:
            verdict.detected = True
            verdict.first_detecting_test = i
            verdict.reason = DETECTED
            verdict.witness = {**test.to_json(pair.buggy), "buggy": list(buggy), "fixed": list(fixed)}
            if stop_at_first:
                break
    return verdict
