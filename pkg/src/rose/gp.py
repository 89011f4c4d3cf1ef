"""Run parameters and bookkeeping shared by the two genetic searches
(repair programs and fitness expressions)."""
from __future__ import annotations

import random
from dataclasses import asdict, dataclass, fields
from typing import Callable, Mapping, Sequence, TypeVar

T = TypeVar("T")


@dataclass(frozen=True)
class GpParams:
    population: int = 50
    generations: int = 20
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    tournament: int = 4
    elites: int = 2
    max_depth: int = 6
    patience: int = 5
    seed: int = 0

    def __post_init__(self):
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("population", "generations", "tournament", "max_depth", "patience"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.elites <= self.population:
            raise ValueError("elites must be between 0 and the population size")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "GpParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown GP parameters: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "GpParams":
        return type(self)(**{**asdict(self), **changes})


def stopping_rule(best_history: Sequence[float], params: GpParams) -> bool:
    """True once the run should stop.

    ``best_history[i]`` is the best fitness seen after generation ``i``.
    The run stops at ``params.generations`` generations, or when the last
    ``params.patience`` generations brought no improvement.
    """
    g = len(best_history)
    if g >= params.generations:
        return True
    if g > params.patience:
        before = max(best_history[:-params.patience])
        return max(best_history[-params.patience:]) <= before
    return False


def tournament(rng: random.Random, ranked: Sequence[T], key: Callable[[T], object], k: int) -> T:
    """Best of ``k`` uniform draws (with replacement) under ``key``."""
    picks = [ranked[rng.randrange(len(ranked))] for _ in range(k)]
    return max(picks, key=key)
