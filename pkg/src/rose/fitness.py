"""Scoring repair hypotheses.

Three numbers describe a hypothesis: how many MY-COMB operations it ran
(``x1``), how big its result is (``x2``, frames plus atomic fillers), and
the mean slot/filler association of the insertions it made (``x3``).  The
association is pointwise mutual information between a slot and the type of
its filler, estimated from gold structures.  A small arithmetic expression
over the three numbers, learned by genetic programming from ranked
examples, turns them into a single fitness.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .gp import GpParams, stopping_rule, tournament
from .interlingua import (ATOM, FeatureStructure, InterlinguaError, InterlinguaSpec, Multiple,
                          iter_frames, read_sexpr, similarity, size, validate)

STATS_HEADER = "rose-stats v1"
FITNESS_HEADER = "rose-fitness v1"


# ---------------------------------------------------------------------------
# slot/filler statistics


@dataclass(frozen=True)
class StatModel:
    """Add-``smoothing`` estimate of PMI over the declared slot x type table."""

    slots: tuple[str, ...]
    types: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]
    smoothing: float = 1.0

    def __post_init__(self):
        if len(self.counts) != len(self.slots) or any(len(r) != len(self.types) for r in self.counts):
            raise ValueError("count table does not match the slot and type lists")
        table = np.asarray(self.counts, dtype=float) + self.smoothing
        joint = table / table.sum()
        ps = joint.sum(axis=1, keepdims=True)
        pt = joint.sum(axis=0, keepdims=True)
        mi = np.log2(joint / (ps * pt))
        object.__setattr__(self, "_joint", joint)
        object.__setattr__(self, "_mi", mi)
        object.__setattr__(self, "_slot_ix", {s: i for i, s in enumerate(self.slots)})
        object.__setattr__(self, "_type_ix", {t: i for i, t in enumerate(self.types)})

    @property
    def joint(self) -> np.ndarray:
        return self._joint

    @property
    def mi(self) -> np.ndarray:
        return self._mi

    def score(self, slot: str, filler_type: str) -> float:
        """PMI of (slot, type); 0 for pairs outside the table."""
        i, j = self._slot_ix.get(slot), self._type_ix.get(filler_type)
        if i is None or j is None:
            return 0.0
        return float(self._mi[i, j])

    def to_text(self) -> str:
        lines = [STATS_HEADER, f"smoothing {self.smoothing!r}", "types " + " ".join(self.types)]
        for slot, row in zip(self.slots, self.counts):
            lines.append(f"slot {slot} " + " ".join(str(c) for c in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "StatModel":
        lines = [l.split() for l in text.splitlines() if l.strip()]
        if not lines or " ".join(lines[0]) != STATS_HEADER:
            raise ValueError(f"not a statistics file (expected {STATS_HEADER!r} header)")
        smoothing, types, slots, counts = 1.0, (), [], []
        for parts in lines[1:]:
            if parts[0] == "smoothing":
                smoothing = float(parts[1])
            elif parts[0] == "types":
                types = tuple(parts[1:])
            elif parts[0] == "slot":
                slots.append(parts[1])
                counts.append(tuple(int(c) for c in parts[2:]))
            else:
                raise ValueError(f"bad statistics line: {' '.join(parts)}")
        return cls(tuple(slots), types, tuple(counts), smoothing)


def slot_events(fs, spec: InterlinguaSpec) -> Iterable[tuple[str, str]]:
    """(slot, filler type) for every filled slot instance; each member of a
    ``*MULTIPLE*`` set counts once."""
    for frame in iter_frames(fs):
        for slot, value in frame.slots:
            members = value.items if isinstance(value, Multiple) else (value,)
            for m in members:
                yield slot, spec.type_of(m)


def train_mi(corpus: Iterable[FeatureStructure], spec: InterlinguaSpec,
             smoothing: float = 1.0) -> StatModel:
    slots = tuple(spec.slots)
    types = spec.filler_types
    counts = {(s, t): 0 for s in slots for t in types}
    n = 0
    for fs in corpus:
        problems = validate(fs, spec)
        if problems:
            raise InterlinguaError(f"training structure is invalid: {problems[0].path}: {problems[0].message}")
        n += 1
        for event in slot_events(fs, spec):
            counts[event] += 1
    if n == 0:
        raise ValueError("empty-corpus: no training structures")
    table = tuple(tuple(counts[s, t] for t in types) for s in slots)
    return StatModel(slots, types, table, smoothing)


def load_stats(path) -> StatModel:
    with open(path, encoding="utf-8") as f:
        return StatModel.from_text(f.read())


# ---------------------------------------------------------------------------
# features


class FeatureTriple(NamedTuple):
    n_ops: int
    size_score: int
    avg_stat: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


def score_features(h, stats: StatModel | None = None) -> FeatureTriple:
    """Features of a hypothesis (anything with ``program``, ``result`` and
    ``trace``).  Insert scores come from ``stats`` when given, otherwise from
    the scores recorded in the trace."""
    scores = []
    for step in h.trace:
        if step.kind != "insert":
            continue
        scores.append(stats.score(step.slot, step.child_type) if stats is not None else step.score)
    avg = sum(scores) / len(scores) if scores else 0.0
    return FeatureTriple(h.program.n_ops, size(h.result), avg)


# ---------------------------------------------------------------------------
# fitness expressions


@dataclass(frozen=True)
class Var:
    index: int  # 0-based column; printed x1..x3

    def __str__(self):
        return f"x{self.index + 1}"


@dataclass(frozen=True)
class Const:
    value: float

    def __str__(self):
        v = self.value
        return str(int(v)) if float(v).is_integer() else repr(v)


@dataclass(frozen=True)
class Op:
    op: str
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return f"({self.op} {self.left} {self.right})"


Expr = Var | Const | Op
OPS = ("+", "-", "*", "/")
CONSTANTS = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)
N_FEATURES = 3


def _apply(op: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    zero = b == 0
    return np.where(zero, 1.0, a / np.where(zero, 1.0, b))


class FitnessExpression:
    """An arithmetic expression over x1=n_ops, x2=size_score, x3=avg_stat.

    Division is protected: anything divided by zero is 1.
    """

    def __init__(self, root: Expr):
        self.root = root

    def __eq__(self, other):
        return isinstance(other, FitnessExpression) and self.root == other.root

    def __hash__(self):
        return hash(self.root)

    def __repr__(self):
        return f"FitnessExpression({self})"

    def __str__(self):
        return str(self.root)

    def evaluate(self, features) -> np.ndarray:
        """Vectorised over rows of an (m, 3) array."""
        x = np.atleast_2d(np.asarray(features, dtype=float))
        with np.errstate(all="ignore"):
            out = _eval(self.root, x)
            out = np.broadcast_to(out, (x.shape[0],)).astype(float)
        return np.nan_to_num(out, nan=-np.inf)

    def __call__(self, triple) -> float:
        return float(self.evaluate([tuple(triple)])[0])

    @property
    def size(self) -> int:
        return _count(self.root)

    @property
    def depth(self) -> int:
        return _depth(self.root)

    def to_text(self) -> str:
        return f"{FITNESS_HEADER}\n{self}\n"

    @classmethod
    def parse(cls, text: str) -> "FitnessExpression":
        return cls(_from_sexpr(read_sexpr(text)))

    @classmethod
    def from_text(cls, text: str) -> "FitnessExpression":
        head, _, body = text.strip().partition("\n")
        if head.strip() != FITNESS_HEADER:
            raise ValueError(f"not a fitness file (expected {FITNESS_HEADER!r} header)")
        return cls.parse(body)


def _eval(e: Expr, x: np.ndarray):
    if isinstance(e, Var):
        return x[:, e.index]
    if isinstance(e, Const):
        return np.full(x.shape[0], e.value)
    return _apply(e.op, _eval(e.left, x), _eval(e.right, x))


def _count(e: Expr) -> int:
    return 1 + _count(e.left) + _count(e.right) if isinstance(e, Op) else 1


def _depth(e: Expr) -> int:
    return 1 + max(_depth(e.left), _depth(e.right)) if isinstance(e, Op) else 0


def _from_sexpr(sx) -> Expr:
    if isinstance(sx, list):
        if len(sx) != 3 or sx[0] not in OPS:
            raise ValueError(f"bad fitness expression: {sx}")
        return Op(sx[0], _from_sexpr(sx[1]), _from_sexpr(sx[2]))
    if isinstance(sx, str) and len(sx) >= 2 and sx[0] == "x" and sx[1:].isdigit():
        i = int(sx[1:]) - 1
        if not 0 <= i < N_FEATURES:
            raise ValueError(f"unknown feature {sx}")
        return Var(i)
    try:
        return Const(float(sx))
    except (TypeError, ValueError):
        raise ValueError(f"bad fitness expression atom: {sx!r}") from None


def load_fitness(path) -> FitnessExpression:
    with open(path, encoding="utf-8") as f:
        return FitnessExpression.from_text(f.read())


DEFAULT_FITNESS = FitnessExpression(Op("+", Op("-", Var(1), Var(0)), Var(2)))


# ---------------------------------------------------------------------------
# ranked training data


@dataclass(frozen=True)
class RankedExample:
    """Feature triples of one sentence's hypotheses, best first.

    ``scores`` are the ideal scores in the same order (non-increasing);
    equal scores mark ties, which never form a training pair.  Without
    scores the list is taken as strictly ordered.
    """

    features: tuple[FeatureTriple, ...]
    scores: tuple | None = None

    def __post_init__(self):
        if len(self.features) < 2:
            raise ValueError("a ranked example needs at least two entries")
        if self.scores is not None and len(self.scores) != len(self.features):
            raise ValueError("scores and features differ in length")

    def pairs(self) -> list[tuple[int, int]]:
        """(better, worse) index pairs that carry an ordering."""
        out = []
        for i, j in combinations(range(len(self.features)), 2):
            if self.features[i] == self.features[j]:
                continue
            if self.scores is not None and not self.scores[i] > self.scores[j]:
                continue
            out.append((i, j))
        return out


def ideal_rank(hypotheses: Sequence, gold: FeatureStructure) -> list:
    """Best first by similarity to ``gold``; ties go to fewer operations.
    The sort is stable."""
    return sorted(hypotheses, key=lambda h: (-similarity(h.result, gold).f1, h.program.n_ops))


def ideal_score(h, gold) -> tuple[float, int]:
    return (round(similarity(h.result, gold).f1, 12), -h.program.n_ops)


def ranked_example(hypotheses: Sequence, gold: FeatureStructure,
                   stats: StatModel | None = None) -> RankedExample | None:
    """Training example from a hypothesis set, or None when fewer than two
    distinct results are available."""
    ranked = ideal_rank(hypotheses, gold)
    if len(ranked) < 2:
        return None
    feats = tuple(score_features(h, stats) for h in ranked)
    scores = tuple(ideal_score(h, gold) for h in ranked)
    return RankedExample(feats, scores)


class _Pairs:
    """All training pairs stacked into two (P, 3) arrays."""

    def __init__(self, examples: Iterable[RankedExample]):
        better, worse = [], []
        for ex in examples:
            for i, j in ex.pairs():
                better.append(ex.features[i])
                worse.append(ex.features[j])
        self.better = np.asarray(better, dtype=float).reshape(-1, N_FEATURES)
        self.worse = np.asarray(worse, dtype=float).reshape(-1, N_FEATURES)

    def __len__(self):
        return len(self.better)

    def accuracy(self, expr: FitnessExpression) -> float:
        if not len(self):
            return 1.0
        return float(np.mean(expr.evaluate(self.better) > expr.evaluate(self.worse)))


def pairwise_accuracy(expr: FitnessExpression, examples: Iterable[RankedExample]) -> float:
    """Share of ordered pairs the expression scores strictly in order.
    With no ordered pairs at all the accuracy is vacuously 1."""
    return _Pairs(examples).accuracy(expr)


# ---------------------------------------------------------------------------
# expression GP


def _random_expr(rng: random.Random, depth: int, full: bool) -> Expr:
    if depth == 0 or (not full and rng.random() < 0.3):
        if rng.random() < 0.75:
            return Var(rng.randrange(N_FEATURES))
        return Const(rng.choice(CONSTANTS))
    return Op(rng.choice(OPS), _random_expr(rng, depth - 1, full), _random_expr(rng, depth - 1, full))


def _subtrees(e: Expr, path=()):
    yield path, e
    if isinstance(e, Op):
        yield from _subtrees(e.left, path + (0,))
        yield from _subtrees(e.right, path + (1,))


def _replace(e: Expr, path, new: Expr) -> Expr:
    if not path:
        return new
    if path[0] == 0:
        return Op(e.op, _replace(e.left, path[1:], new), e.right)
    return Op(e.op, e.left, _replace(e.right, path[1:], new))


def _seeds() -> list[Expr]:
    out = []
    for i in range(N_FEATURES):
        out.append(Var(i))
        out.append(Op("*", Const(-1.0), Var(i)))
    return out


def train_fitness(examples: Sequence[RankedExample], params: GpParams | None = None,
                  max_depth: int = 4) -> FitnessExpression:
    """Evolve an expression maximising pairwise-order accuracy.

    The initial population holds every single feature and its negation, so
    the result is never worse on the training pairs than the best raw
    feature.  Ties in accuracy favour smaller expressions.
    """
    params = params or GpParams()
    examples = list(examples)
    if not examples:
        raise ValueError("train_fitness needs at least one example")
    data = _Pairs(examples)
    rng = random.Random(params.seed)
    depth_cap = min(max_depth, params.max_depth)
    cache: dict[Expr, float] = {}

    def fit(e: Expr) -> float:
        v = cache.get(e)
        if v is None:
            v = cache[e] = data.accuracy(FitnessExpression(e))
        return v

    def key(e: Expr):
        return (fit(e), -_count(e))

    pop = _seeds()[:params.population]
    while len(pop) < params.population:
        d = 1 + len(pop) % depth_cap
        pop.append(_random_expr(rng, d, full=len(pop) % 2 == 0))

    history: list[float] = []
    best = max(pop, key=key)
    while True:
        ranked = sorted(pop, key=lambda e: (-fit(e), _count(e), str(e)))
        if key(ranked[0]) > key(best):
            best = ranked[0]
        history.append(fit(best))
        if stopping_rule(history, params) or fit(best) == 1.0:
            break
        nxt = ranked[:params.elites]
        while len(nxt) < params.population:
            a = tournament(rng, ranked, key, params.tournament)
            if rng.random() < params.crossover_rate:
                b = tournament(rng, ranked, key, params.tournament)
                pa, _ = rng.choice(list(_subtrees(a)))
                _, sb = rng.choice(list(_subtrees(b)))
                child = _replace(a, pa, sb)
            else:
                child = a
            if rng.random() < params.mutation_rate:
                pm, _ = rng.choice(list(_subtrees(child)))
                child = _replace(child, pm, _random_expr(rng, 2, full=False))
            if _depth(child) > depth_cap:
                child = a
            nxt.append(child)
        pop = nxt
    return FitnessExpression(best)
