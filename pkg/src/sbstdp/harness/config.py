"""Experiment configuration (the ``exp.json`` file)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from sbstdp.predictor import config_grid
from sbstdp.search.operators import SearchParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: str
    # (recall, precision) pairs; config_grid() lists them as (precision, recall)
    grid: tuple = field(default_factory=lambda: tuple((r, p) for p, r in config_grid()))
    n_sims: int = 5
    n_runs: int = 5
    budget: int = 20_000
    seed: int = 0
    workers: int = 1
    # pairs per ground-truth bucket; None puts the whole corpus in one bucket
    bucket_size: Optional[int] = None
    search: SearchParams = field(default_factory=SearchParams)

    def __post_init__(self):
        if self.n_sims < 1 or self.n_runs < 1:
            raise ConfigError("n_sims and n_runs must be >= 1")
        if not self.grid:
            raise ConfigError("grid must be non-empty")
        if self.budget < 1:
            raise ConfigError("budget must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.bucket_size is not None and self.bucket_size < 1:
            raise ConfigError("bucket_size must be >= 1")
        for r, p in self.grid:
            if not (0 < r <= 1 and 0 < p <= 1):
                raise ConfigError(f"grid point {(r, p)} outside (0, 1]")

    def to_json(self) -> dict:
        return {
            "corpus": self.corpus,
            "grid": [list(g) for g in self.grid],
            "n_sims": self.n_sims,
            "n_runs": self.n_runs,
            "budget": self.budget,
            "seed": self.seed,
            "workers": self.workers,
            "bucket_size": self.bucket_size,
            "search": self.search.to_json(),
        }

    def identity(self) -> dict:
        """Everything that influences results; ``workers`` does not."""
        d = self.to_json()
        del d["workers"]
        return d

    @classmethod
    def from_json(cls, d: dict, base: Optional[Path] = None) -> "ExperimentConfig":
        d = dict(d)
        known = {"corpus", "grid", "n_sims", "n_runs", "budget", "seed", "workers", "bucket_size", "search"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "corpus" not in d:
            raise ConfigError("config needs a corpus path")
        corpus = Path(d["corpus"])
        if base is not None and not corpus.is_absolute():
            corpus = base / corpus
        d["corpus"] = str(corpus)
        if "grid" in d:
            d["grid"] = tuple((float(r), float(p)) for r, p in d["grid"])
        if "search" in d:
            d["search"] = SearchParams.from_json(d["search"])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_json(data, path.parent)
