"""Combining parser chunks into one meaning representation.

A repair program is a binary tree whose leaves index chunks and whose
internal nodes are MY-COMB operations.  ``MY-COMB(a, b)`` inserts ``b``
into a slot of ``a``; when no slot admits it the two are merged, and when
they do not merge the larger one is kept.  The slot chosen for an insert is
recorded on the node; a node that did not insert prints its slot as ``??``.

Programs are evolved by genetic programming under a learned fitness.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterator, NamedTuple, Sequence

from .fitness import DEFAULT_FITNESS, FitnessExpression, StatModel, score_features
from .gp import GpParams, stopping_rule, tournament
from .interlingua import (FeatureStructure, InterlinguaSpec, MergeClash, NoSlot, format_fs,
                          insert, merge, size)

__all__ = ["Leaf", "Comb", "RepairStep", "Hypothesis", "needs_repair", "eval_program",
           "evolve", "exhaustive_best", "initial_population", "enumerate_programs",
           "format_program", "parse_program", "stopping_rule", "GpParams"]

HOLE = "??"


@dataclass(frozen=True)
class Leaf:
    index: int

    @property
    def depth(self) -> int:
        return 0

    @property
    def n_ops(self) -> int:
        return 0

    @property
    def leaves(self) -> tuple[int, ...]:
        return (self.index,)

    def unbound(self) -> "Leaf":
        return self

    def __str__(self):
        return f"#{self.index}"


@dataclass(frozen=True)
class Comb:
    left: "Program"
    right: "Program"
    slot: str | None = None

    @property
    def depth(self) -> int:
        return 1 + max(self.left.depth, self.right.depth)

    @property
    def n_ops(self) -> int:
        return 1 + self.left.n_ops + self.right.n_ops

    @property
    def leaves(self) -> tuple[int, ...]:
        return self.left.leaves + self.right.leaves

    def unbound(self) -> "Comb":
        return Comb(self.left.unbound(), self.right.unbound())

    def __str__(self):
        return f"(MY-COMB {self.left} {self.right} {self.slot or HOLE})"


Program = Leaf | Comb


def is_well_formed(p: Program, n_chunks: int, max_depth: int | None = None) -> bool:
    leaves = p.leaves
    if len(set(leaves)) != len(leaves) or any(not 0 <= i < n_chunks for i in leaves):
        return False
    return max_depth is None or p.depth <= max_depth


class RepairStep(NamedTuple):
    kind: str  # insert | merge | fallback-largest
    parent_frame: str | None
    child_frame: str | None
    slot: str | None
    score: float
    child_type: str | None = None


@dataclass(frozen=True)
class Hypothesis:
    program: Program
    result: FeatureStructure
    trace: tuple[RepairStep, ...]
    fitness: float = 0.0
    features: tuple = field(default=(), compare=False)

    def format(self, chunks: Sequence[FeatureStructure], pretty: bool = True) -> str:
        return format_program(self.program, chunks, pretty)


def needs_repair(chunks) -> bool:
    """False only for a single chunk spanning the whole input."""
    items = list(chunks)
    if len(items) != 1:
        return True
    n = getattr(chunks, "n_tokens", None)
    c = items[0]
    span = getattr(c, "span", None)
    if n is None or span is None:
        return False
    return not (span == (0, n) and not getattr(c, "skipped", ()))


def _chunk_values(chunks) -> list[FeatureStructure]:
    values = getattr(chunks, "values", None)
    if values is not None and not callable(values):
        return list(values)
    return [getattr(c, "value", c) for c in chunks]


def _frame(x):
    return x.frame if isinstance(x, FeatureStructure) else None


def my_comb(a, b, spec: InterlinguaSpec, stats: StatModel | None = None):
    """One MY-COMB step: returns (result, step)."""
    try:
        result, slot = insert(a, b, spec, stats)
    except NoSlot:
        pass
    else:
        t = spec.type_of(b)
        score = stats.score(slot, t) if stats is not None else 0.0
        return result, RepairStep("insert", a.frame, b.frame, slot, score, t)
    try:
        result = merge(a, b, spec)
    except MergeClash:
        pass
    else:
        return result, RepairStep("merge", _frame(a), _frame(b), None, 0.0)
    keep = a if size(a) >= size(b) else b
    return keep, RepairStep("fallback-largest", _frame(a), _frame(b), None, 0.0)


def eval_program(p: Program, chunks, spec: InterlinguaSpec,
                 stats: StatModel | None = None) -> Hypothesis:
    """Evaluate bottom-up, left operand first; fitness is left at 0."""
    values = _chunk_values(chunks)
    trace: list[RepairStep] = []

    def run(node):
        if isinstance(node, Leaf):
            return values[node.index], node
        left, lp = run(node.left)
        right, rp = run(node.right)
        result, step = my_comb(left, right, spec, stats)
        trace.append(step)
        return result, Comb(lp, rp, step.slot if step.kind == "insert" else None)

    result, bound = run(p.unbound())
    return Hypothesis(bound, result, tuple(trace))


# ---------------------------------------------------------------------------
# printing


def format_program(p: Program, chunks, pretty: bool = True, column: int = 0) -> str:
    """Programs with their chunk literals spliced in, one MY-COMB argument
    per line when ``pretty``."""
    values = _chunk_values(chunks)
    if isinstance(p, Leaf):
        return format_fs(values[p.index], pretty, column)
    if not pretty:
        return (f"(MY-COMB {format_program(p.left, values, False)} "
                f"{format_program(p.right, values, False)} {p.slot or HOLE})")
    inner = column + 2
    pad = " " * inner
    return ("(MY-COMB\n" + pad + format_program(p.left, values, True, inner) + "\n"
            + pad + format_program(p.right, values, True, inner) + "\n"
            + pad + (p.slot or HOLE) + ")")


def parse_program(text: str) -> Program:
    """Read the index form produced by ``str(program)``: ``#i`` leaves."""
    from .interlingua import read_sexpr

    def build(sx):
        if isinstance(sx, str) and sx.startswith("#"):
            return Leaf(int(sx[1:]))
        if isinstance(sx, list) and len(sx) == 4 and sx[0] == "MY-COMB":
            slot = None if sx[3] == HOLE else sx[3]
            return Comb(build(sx[1]), build(sx[2]), slot)
        raise ValueError(f"bad repair program: {sx}")

    return build(read_sexpr(text))


# ---------------------------------------------------------------------------
# program spaces


def _shapes(items: tuple[int, ...], max_depth: int) -> Iterator[Program]:
    if len(items) == 1:
        yield Leaf(items[0])
        return
    if max_depth == 0:
        return
    for k in range(1, len(items)):
        for left in _shapes(items[:k], max_depth - 1):
            for right in _shapes(items[k:], max_depth - 1):
                yield Comb(left, right)


def enumerate_programs(n_chunks: int, max_depth: int) -> Iterator[Program]:
    """Every program over distinct chunk indices with depth <= max_depth."""
    for k in range(1, n_chunks + 1):
        for perm in permutations(range(n_chunks), k):
            yield from _shapes(perm, max_depth)


def random_program(rng: random.Random, indices: Sequence[int], max_depth: int) -> Program:
    """A random tree over exactly ``indices`` (in the given order)."""
    items = list(indices)
    if len(items) == 1:
        return Leaf(items[0])
    cap = 1 << (max_depth - 1)
    lo, hi = max(1, len(items) - cap), min(len(items) - 1, cap)
    k = rng.randint(lo, hi)
    return Comb(random_program(rng, items[:k], max_depth - 1),
                random_program(rng, items[k:], max_depth - 1))


def _random_subset(rng: random.Random, pool: Sequence[int], max_depth: int) -> list[int]:
    limit = min(len(pool), 1 << max_depth)
    k = rng.randint(1, limit)
    return rng.sample(list(pool), k)


def _nodes(p: Program, path=()):
    yield path, p
    if isinstance(p, Comb):
        yield from _nodes(p.left, path + (0,))
        yield from _nodes(p.right, path + (1,))


def _node_at(p: Program, path):
    for step in path:
        p = p.left if step == 0 else p.right
    return p


def _replace(p: Program, path, new: Program) -> Program:
    if not path:
        return new
    if path[0] == 0:
        return Comb(_replace(p.left, path[1:], new), p.right)
    return Comb(p.left, _replace(p.right, path[1:], new))


def _crossover(rng, a: Program, b: Program, n: int, max_depth: int) -> Program | None:
    pa, _ = rng.choice(list(_nodes(a)))
    _, sb = rng.choice(list(_nodes(b)))
    child = _replace(a, pa, sb)
    return child if is_well_formed(child, n, max_depth) else None


def _mutate(rng, p: Program, n: int, max_depth: int) -> Program | None:
    path, sub = rng.choice(list(_nodes(p)))
    if isinstance(sub, Comb) and rng.random() < 0.5:
        return _replace(p, path, Comb(sub.right, sub.left))
    outside = set(p.leaves) - set(sub.leaves)
    pool = [i for i in range(n) if i not in outside]
    room = max_depth - len(path)
    if not pool or room < 0:
        return None
    new = random_program(rng, _random_subset(rng, pool, room), max(room, 1))
    child = _replace(p, path, new)
    return child if is_well_formed(child, n, max_depth) else None


# ---------------------------------------------------------------------------
# evolution


class _Scorer:
    def __init__(self, chunks, spec, fitness, stats):
        self.values = _chunk_values(chunks)
        self.spec = spec
        self.fitness = fitness
        self.stats = stats
        self.cache: dict[Program, Hypothesis] = {}

    def __call__(self, p: Program) -> Hypothesis:
        key = p.unbound()
        h = self.cache.get(key)
        if h is None:
            h = eval_program(key, self.values, self.spec, self.stats)
            feats = score_features(h, self.stats)
            h = Hypothesis(h.program, h.result, h.trace, self.fitness(feats), feats)
            self.cache[key] = h
        return h


def _order(h: Hypothesis):
    return (-h.fitness, h.program.n_ops, str(h.program))


def _distinct(hyps) -> list[Hypothesis]:
    out, seen = [], set()
    for h in sorted(hyps, key=_order):
        if h.result in seen:
            continue
        seen.add(h.result)
        out.append(h)
    return out


def initial_population(rng: random.Random, n_chunks: int, params: GpParams) -> list[Program]:
    """Every single-chunk program, then random trees over random subsets."""
    pop: list[Program] = [Leaf(i) for i in range(n_chunks)][:params.population]
    while len(pop) < params.population:
        subset = _random_subset(rng, range(n_chunks), params.max_depth)
        pop.append(random_program(rng, subset, params.max_depth))
    return pop


def evolve(chunks, spec: InterlinguaSpec, fitness: FitnessExpression | None = None,
           stats: StatModel | None = None, params: GpParams | None = None) -> list[Hypothesis]:
    """Evolve repair programs; return distinct results, best first.

    The first generation contains every single-chunk program plus random
    trees over random chunk subsets.  Each later generation keeps the
    elites and fills up with tournament-selected parents under subtree
    crossover and mutation; offspring that would reuse a chunk or grow too
    deep are discarded in favour of the parent.  The returned list covers
    every program evaluated during the run.
    """
    params = params or GpParams()
    fitness = fitness or DEFAULT_FITNESS
    values = _chunk_values(chunks)
    n = len(values)
    if n == 0:
        raise ValueError("evolve needs at least one chunk")
    rng = random.Random(params.seed)
    score = _Scorer(values, spec, fitness, stats)
    pop = initial_population(rng, n, params)

    def key(p):
        h = score(p)
        return (h.fitness, -h.program.n_ops)

    history: list[float] = []
    while True:
        ranked = sorted(pop, key=lambda p: _order(score(p)))
        history.append(max(h.fitness for h in score.cache.values()))
        if stopping_rule(history, params):
            break
        nxt = ranked[:params.elites]
        while len(nxt) < params.population:
            parent = tournament(rng, ranked, key, params.tournament)
            child = parent
            if rng.random() < params.crossover_rate:
                other = tournament(rng, ranked, key, params.tournament)
                child = _crossover(rng, parent, other, n, params.max_depth) or parent
            if rng.random() < params.mutation_rate:
                child = _mutate(rng, child, n, params.max_depth) or child
            nxt.append(child)
        pop = nxt
    return _distinct(score.cache.values())


def exhaustive_best(chunks, spec: InterlinguaSpec, fitness: FitnessExpression | None = None,
                    stats: StatModel | None = None, max_depth: int = 3) -> list[Hypothesis]:
    """Every program up to ``max_depth``, ranked as :func:`evolve` ranks."""
    fitness = fitness or DEFAULT_FITNESS
    values = _chunk_values(chunks)
    score = _Scorer(values, spec, fitness, stats)
    for p in enumerate_programs(len(values), max_depth):
        score(p)
    return _distinct(score.cache.values())
