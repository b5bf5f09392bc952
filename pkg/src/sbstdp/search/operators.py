"""Genetic operators over test cases."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from sbstdp.minilang.ast import Program
from sbstdp.minilang.interp import DEFAULT_LIMITS, Limits
from sbstdp.testcase import TestCase


@dataclass(frozen=True)
class SearchParams:
    population_size: int = 50
    tournament_size: int = 2
    crossover_rate: float = 0.75
    # None means 1 / (arity + 1) per gene
    mutation_rate: Optional[float] = None
    reassign_rate: float = 0.05
    mutation_sigma: float = 10.0
    int_domain: tuple[int, int] = (-100, 100)
    archive_cap: Optional[int] = None
    limits: Limits = field(default=DEFAULT_LIMITS)

    def to_json(self) -> dict:
        return {
            "population_size": self.population_size,
            "tournament_size": self.tournament_size,
            "crossover_rate": self.crossover_rate,
            "mutation_rate": self.mutation_rate,
            "reassign_rate": self.reassign_rate,
            "mutation_sigma": self.mutation_sigma,
            "int_domain": list(self.int_domain),
            "archive_cap": self.archive_cap,
            "max_steps": self.limits.max_steps,
            "max_call_depth": self.limits.max_call_depth,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SearchParams":
        d = dict(d)
        limits = Limits(d.pop("max_steps", DEFAULT_LIMITS.max_steps),
                        d.pop("max_call_depth", DEFAULT_LIMITS.max_call_depth))
        if "int_domain" in d:
            d["int_domain"] = tuple(d["int_domain"])
        return cls(limits=limits, **d)


def random_value(ptype: str, rng: random.Random, domain: tuple[int, int]):
    if ptype == "bool":
        return rng.random() < 0.5
    return rng.randint(*domain)


def random_args(program: Program, entry: int, rng: random.Random, domain) -> tuple:
    return tuple(random_value(t, rng, domain) for t in program.functions[entry].param_types)


def random_test(program: Program, entries: Sequence[int], rng: random.Random, params: SearchParams) -> TestCase:
    entry = entries[rng.randrange(len(entries))]
    return TestCase(entry, random_args(program, entry, rng, params.int_domain), "random")


def _clamp(v: int, domain: tuple[int, int]) -> int:
    lo, hi = domain
    return lo if v < lo else hi if v > hi else v


def _tournament(n: int, ranks, crowding, rng: random.Random, size: int) -> int:
    best = rng.randrange(n)
    for _ in range(size - 1):
        other = rng.randrange(n)
        if (ranks[other], -crowding[other]) < (ranks[best], -crowding[best]):
            best = other
    return best


def crossover(a: TestCase, b: TestCase, rng: random.Random) -> tuple[TestCase, TestCase]:
    """Single-point crossover of argument vectors; parents of different entries are returned unchanged."""
    if a.entry != b.entry or len(a.args) < 2:
        return a, b
    point = rng.randint(1, len(a.args) - 1)
    return (
        TestCase(a.entry, a.args[:point] + b.args[point:], "crossover"),
        TestCase(b.entry, b.args[:point] + a.args[point:], "crossover"),
    )


def mutate(test: TestCase, program: Program, entries: Sequence[int], rng: random.Random,
           params: SearchParams) -> TestCase:
    # entry reassignment is itself a mutation and is disabled along with it
    if params.mutation_rate != 0 and len(entries) > 1 and rng.random() < params.reassign_rate:
        entry = entries[rng.randrange(len(entries))]
        return TestCase(entry, random_args(program, entry, rng, params.int_domain), "mutation")
    types = program.functions[test.entry].param_types
    rate = params.mutation_rate if params.mutation_rate is not None else 1.0 / (len(types) + 1)
    args = list(test.args)
    changed = False
    for i, t in enumerate(types):
        if rng.random() < rate:
            if t == "bool":
                args[i] = not args[i]
            else:
                step = round(rng.gauss(0.0, params.mutation_sigma))
                args[i] = _clamp(args[i] + step, params.int_domain)
            changed = True
    if not changed:
        return test
    return TestCase(test.entry, tuple(args), "mutation")


def generate_offspring(population: Sequence[TestCase], ranks, crowding, rng: random.Random,
                       params: SearchParams, program: Program, entries: Sequence[int],
                       n: Optional[int] = None) -> list[TestCase]:
    """Tournament selection, crossover and mutation; returns ``n`` (default: population size) tests."""
    n = len(population) if n is None else n
    out: list[TestCase] = []
    while len(out) < n:
        a = population[_tournament(len(population), ranks, crowding, rng, params.tournament_size)]
        b = population[_tournament(len(population), ranks, crowding, rng, params.tournament_size)]
        if rng.random() < params.crossover_rate:
            a, b = crossover(a, b, rng)
        out.append(mutate(a, program, entries, rng, params))
        if len(out) < n:
            out.append(mutate(b, program, entries, rng, params))
    return out
