"""Flexible parsing on top of the LR tables.

Three strategies:

* ``skip``: GLR*-style word skipping; finds an analysis of the largest
  parseable subsequence (penalty = words skipped).
* ``restarts``: skipping restricted to initial segments, so the parser emits
  contiguous chunks by left-to-right maximal munch.
* ``mdp``: minimum distance parsing with word deletions and nonterminal
  insertions, each insertion costing the nonterminal's minimum yield, under
  a maximum deviation penalty.

Skip and MDP share one search: parser configurations (input position plus a
persistent LR stack) are expanded in order of accumulated penalty, so the
first penalty level that yields a complete parse is the minimum.  Stacks are
interned, and a configuration already reached at an equal or lower penalty is
not expanded again.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .glr import MAX_AMBIGUITY, Analysis, GSSParser, glr_parse
from .grammar import END, ActionError, ParseTable, evaluate_action
from .interlingua import FeatureStructure, InterlinguaSpec

MODES = ("full-parse", "skip", "restarts", "mdp")
CLOSURE_LIMIT = 4096


@dataclass(frozen=True)
class FlexConfig:
    """How much flexibility a parse may use.

    ``beam_width`` caps the configurations kept per (position, penalty);
    ``None`` means unbounded, which makes the MDP search exact.
    ``max_insert_run`` optionally caps consecutive insertions between shifts.
    """

    mode: str = "full-parse"
    max_penalty: int = 0
    beam_width: int | None = 256
    max_insert_run: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, not {self.mode!r}")
        if self.max_penalty < 0:
            raise ValueError("max_penalty must be non-negative")
        if self.beam_width is not None and self.beam_width < 1:
            raise ValueError("beam_width must be positive")

    @property
    def effective_penalty(self) -> int:
        return 0 if self.mode == "full-parse" else self.max_penalty


@dataclass(frozen=True)
class ChunkSet:
    """Contiguous fragments left to right plus the tokens none of them cover."""

    chunks: tuple[Analysis, ...]
    uncovered: tuple[int, ...]
    n_tokens: int

    def __iter__(self):
        return iter(self.chunks)

    def __len__(self):
        return len(self.chunks)

    @property
    def values(self) -> list:
        return [c.value for c in self.chunks]


# ---------------------------------------------------------------------------
# restarts


def restarts_parse(table: ParseTable, tokens: Sequence[str],
                   spec: InterlinguaSpec | None = None) -> ChunkSet:
    """Maximal-munch segmentation into chunks of any category the table
    can accept.

    From the leftmost unconsumed token, the longest span parseable as a
    whole is emitted as a chunk; when no span starts there the token is
    left uncovered.  Build the table with ``entries="all"`` to accept every
    nonterminal.
    """
    parser = GSSParser(table, spec)
    chunks, uncovered = [], []
    pos, n = 0, len(tokens)
    while pos < n:
        best = None
        for end, found in parser.prefixes(tokens, pos):
            best = (end, found)
        if best is None:
            uncovered.append(pos)
            pos += 1
            continue
        end, found = best
        chunks.append(found[0])
        pos = end
    return ChunkSet(tuple(chunks), tuple(uncovered), n)


# ---------------------------------------------------------------------------
# penalty-ordered search


class _Stack:
    __slots__ = ("state", "value", "sig", "prev", "uid")

    def __init__(self, state, value, sig, prev, uid):
        self.state = state
        self.value = value
        self.sig = sig
        self.prev = prev
        self.uid = uid


class _Search:
    def __init__(self, table: ParseTable, tokens: Sequence[str], spec, *,
                 deletions: bool, insertions: bool, max_penalty: float,
                 beam: int | None, insert_run: int | None, entry: str | None):
        self.table = table
        self.grammar = g = table.grammar
        self.tokens = list(tokens)
        self.spec = spec
        self.deletions = deletions
        self.insertions = insertions
        self.max_penalty = max_penalty
        self.beam = beam
        self.insert_run = insert_run
        self.entry = entry or g.start
        self.readings = [g.lookup(t) for t in tokens]
        self._interned: dict = {}
        self._closures: dict = {}
        self.insertable = self._insertable() if insertions else None

    def _insertable(self):
        g, table = self.grammar, self.table
        frames = g.result_frames
        out = []
        for row in table.gotos:
            options = []
            for nt, target in row.items():
                cost = g.min_yields.get(nt, math.inf)
                if cost == 0 or cost == math.inf:
                    continue
                frame = frames.get(nt)
                value = FeatureStructure(frame, synthetic=True) if frame else None
                options.append((nt, target, int(cost), value))
            out.append(tuple(options))
        return tuple(out)

    def intern(self, state, value, sig, prev):
        key = (state, value, prev.uid if prev is not None else 0)
        node = self._interned.get(key)
        if node is None:
            node = _Stack(state, value, sig, prev, len(self._interned) + 1)
            self._interned[key] = node
        return node

    def closure(self, node: _Stack, lookahead: str | None) -> list[_Stack]:
        """All stacks reachable from ``node`` by reductions before
        ``lookahead`` (``None``: any reduction, used ahead of insertions)."""
        key = (node.uid, lookahead)
        cached = self._closures.get(key)
        if cached is not None:
            return cached
        table, rules = self.table, self.grammar.rules
        out = [node]
        seen = {node.uid}
        i = 0
        while i < len(out) and len(out) < CLOSURE_LIMIT:
            top = out[i]
            i += 1
            if lookahead is None:
                candidates = table.all_reductions[top.state]
            else:
                candidates = table.reductions[top.state].get(lookahead, ())
            for r in candidates:
                rule = rules[r]
                k = len(rule.rhs)
                children, sigs, below = [], [], top
                for _ in range(k):
                    if below.prev is None:
                        break
                    children.append(below.value)
                    sigs.append(below.sig)
                    below = below.prev
                else:
                    children.reverse()
                    try:
                        value = evaluate_action(rule.action, children, self.spec)
                    except ActionError:
                        continue
                    target = table.gotos[below.state].get(rule.lhs)
                    if target is None:
                        continue
                    sig = tuple(x for s in reversed(sigs) for x in s) + (r,)
                    new = self.intern(target, value, sig, below)
                    if new.uid not in seen:
                        seen.add(new.uid)
                        out.append(new)
        self._closures[key] = out
        return out

    def run(self) -> list[Analysis]:
        n = len(self.tokens)
        root = self.intern(self.table.entries[self.entry], None, (), None)
        buckets: dict[int, list[list]] = {}
        best: dict[tuple[int, int], int] = {}
        counts: dict[tuple[int, int], int] = {}

        def push(p, pos, node, skipped, inserted, run):
            if p > self.max_penalty:
                return
            key = (pos, node.uid)
            old = best.get(key)
            if old is not None and old <= p:
                return
            if self.beam is not None:
                c = counts.get((p, pos), 0)
                if c >= self.beam:
                    return
                counts[(p, pos)] = c + 1
            best[key] = p
            rows = buckets.get(p)
            if rows is None:
                rows = buckets[p] = [[] for _ in range(n + 1)]
            rows[pos].append((node, skipped, inserted, run))

        push(0, 0, root, (), (), 0)
        results: list[Analysis] = []
        p = 0
        while buckets:
            rows = buckets.get(p)
            if rows is not None:
                # same-penalty shifts land in later rows of this bucket
                for pos in range(n + 1):
                    for node, skipped, inserted, run in rows[pos]:
                        if best.get((pos, node.uid)) != p:
                            continue
                        self._expand(p, pos, node, skipped, inserted, run, push, results)
                del buckets[p]
                if results:
                    break
            p += 1
            if p > self.max_penalty:
                break
        return _rank(results)

    def _expand(self, p, pos, node, skipped, inserted, run, push, results):
        n = len(self.tokens)
        table = self.table
        if pos == n:
            for s in self.closure(node, END):
                if table.accepts[s.state] == self.entry and s.prev is not None and s.prev.prev is None:
                    results.append(Analysis(s.value, (0, n), frozenset(skipped), inserted, p, s.sig,
                                            self.entry))
        else:
            if self.deletions:
                push(p + 1, pos + 1, node, skipped + (pos,), inserted, 0)
            for cat, value in self.readings[pos]:
                for s in self.closure(node, cat):
                    target = table.shifts[s.state].get(cat)
                    if target is not None:
                        push(p, pos + 1, self.intern(target, value, (), s), skipped, inserted, 0)
        if self.insertions and (self.insert_run is None or run < self.insert_run):
            for s in self.closure(node, None):
                for nt, target, cost, value in self.insertable[s.state]:
                    if p + cost <= self.max_penalty:
                        push(p + cost, pos, self.intern(target, value, (), s), skipped,
                             inserted + ((nt, cost),), run + 1)


def _rank(results: list[Analysis]) -> list[Analysis]:
    results.sort(key=_best_key)
    out, seen = [], set()
    for a in results:
        if a.value in seen:
            continue
        seen.add(a.value)
        out.append(a)
        if len(out) == MAX_AMBIGUITY:
            break
    return out


def skip_parse(table: ParseTable, tokens: Sequence[str], config: FlexConfig | None = None,
               spec: InterlinguaSpec | None = None) -> list[Analysis]:
    """Analyses of the largest parseable subsequences of ``tokens``.

    Every returned analysis skips the minimum number of words; the list is
    empty only when not even the empty subsequence parses.
    """
    config = config or FlexConfig(mode="skip")
    return _Search(table, tokens, spec, deletions=True, insertions=False,
                   max_penalty=math.inf, beam=config.beam_width, insert_run=None,
                   entry=None).run()


def mdp_parse(table: ParseTable, tokens: Sequence[str], config: FlexConfig,
              spec: InterlinguaSpec | None = None) -> list[Analysis]:
    """Minimum distance parse with deletions and nonterminal insertions.

    Returns the minimum-penalty analyses when that minimum is at most
    ``config.max_penalty``; otherwise an empty list (a NIL parse).  Because
    the result only depends on the true minimum, raising the bound never
    removes an analysis.
    """
    return _Search(table, tokens, spec, deletions=True, insertions=True,
                   max_penalty=config.max_penalty, beam=config.beam_width,
                   insert_run=config.max_insert_run, entry=None).run()


def _best_key(a: Analysis):
    return (a.deviation_penalty, -a.covered, len(a.inserted), a.rules)


def select_best(analyses: Iterable[Analysis]) -> Analysis | None:
    """Least deviation; ties go to more tokens covered, fewer insertions,
    then the lowest rule-order signature."""
    analyses = list(analyses)
    if not analyses:
        return None
    return min(analyses, key=_best_key)


def flex_parse(table: ParseTable, tokens: Sequence[str], config: FlexConfig,
               spec: InterlinguaSpec | None = None):
    """Dispatch on ``config.mode``; restarts returns a :class:`ChunkSet`."""
    if config.mode == "full-parse":
        return glr_parse(table, tokens, spec)
    if config.mode == "skip":
        return skip_parse(table, tokens, config, spec)
    if config.mode == "restarts":
        return restarts_parse(table, tokens, spec)
    return mdp_parse(table, tokens, config, spec)
