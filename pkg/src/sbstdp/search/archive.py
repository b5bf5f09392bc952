"""Archive of every distinct test covering each selected target."""
from __future__ import annotations

from typing import Optional

from sbstdp.testcase import TestCase


class Archive:
    def __init__(self, cap: Optional[int] = None):
        self.cap = cap
        self._by_target: dict[int, dict[tuple, TestCase]] = {}
        self._first_seen: dict[tuple, TestCase] = {}
        self.insertions = 0

    @staticmethod
    def key(test: TestCase) -> tuple:
        return (test.entry, test.args)

    def add(self, target: int, test: TestCase) -> bool:
        tests = self._by_target.setdefault(target, {})
        k = self.key(test)
        if k in tests:
            return False
        tests[k] = test
        self._first_seen.setdefault(k, test)
        self.insertions += 1
        if self.cap is not None and len(tests) > self.cap:
            del tests[next(iter(tests))]
        return True

    def tests(self, target: int) -> list[TestCase]:
        return list(self._by_target.get(target, {}).values())

    def size(self, target: int) -> int:
        return len(self._by_target.get(target, ()))

    def targets(self) -> list[int]:
        return sorted(t for t, v in self._by_target.items() if v)

    def sizes(self) -> dict[int, int]:
        return {t: len(v) for t, v in sorted(self._by_target.items())}

    def suite(self) -> list[TestCase]:
        """Union of all archived tests, deduplicated, in first-archived order."""
        live = set()
        for tests in self._by_target.values():
            live.update(tests)
        return [t for k, t in self._first_seen.items() if k in live]

    def __len__(self) -> int:
        return len(self._by_target)
