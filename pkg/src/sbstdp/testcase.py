"""The individual of the genetic search: one call with concrete arguments."""
from __future__ import annotations

from dataclasses import dataclass, field

from sbstdp.minilang.ast import Program


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest class

    entry: int
    args: tuple
    origin: str = field(default="random", compare=False)

    @property
    def size(self) -> int:
        return len(self.args)

    def to_json(self, program: Program) -> dict:
        return {"entry": program.functions[self.entry].name, "args": list(self.args)}

    @classmethod
    def from_json(cls, data: dict, program: Program, origin: str = "replay") -> "TestCase":
        fn = program.function(data["entry"])
        return cls(fn.id, tuple(data["args"]), origin)
