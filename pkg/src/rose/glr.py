"""Tomita-style generalised LR parsing over a graph-structured stack.

Semantic values are built eagerly: every GSS link carries the value of the
symbol it spans together with the rule-id signature of its derivation.
With local ambiguity packing on, nodes are unique per (state, position) and
alternative derivations become extra links; with it off the stack is a
plain tree.  Either way the set of analyses is the same.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence, TextIO

from .grammar import ANY, END, ActionError, ParseTable, Rule, evaluate_action
from .interlingua import FeatureStructure, InterlinguaSpec, format_filler

MAX_AMBIGUITY = 64


class UnknownTokenError(ValueError):
    def __init__(self, token: str, position: int):
        super().__init__(f"unknown token {token!r} at position {position}")
        self.token = token
        self.position = position


@dataclass(frozen=True)
class Analysis:
    """One reading of (part of) a sentence.

    ``span`` is the half-open token range the analysis accounts for;
    ``skipped`` the token indices inside it that were deleted and
    ``inserted`` the hypothesised nonterminals with their penalties.
    """

    value: object
    span: tuple[int, int]
    skipped: frozenset = frozenset()
    inserted: tuple[tuple[str, int], ...] = ()
    deviation_penalty: int = 0
    rules: tuple[int, ...] = field(default=(), compare=False)
    category: str | None = field(default=None, compare=False)

    @property
    def covered(self) -> int:
        return self.span[1] - self.span[0] - len(self.skipped)


def reduce_with_action(rule: Rule, children: Sequence, spec: InterlinguaSpec | None = None):
    """Run ``rule``'s action over its children's values.

    Raises :class:`ActionError` when the result is illegal under ``spec``;
    parsers treat that as a dead path.
    """
    if len(children) != len(rule.rhs):
        raise ValueError(f"rule {rule} takes {len(rule.rhs)} children, got {len(children)}")
    return evaluate_action(rule.action, children, spec)


class _Node:
    __slots__ = ("state", "level", "links", "uid")

    def __init__(self, state, level, uid):
        self.state = state
        self.level = level
        self.links = []  # (prev node, value, signature)
        self.uid = uid


class GSSParser:
    """Parser over a fixed table; one instance may parse many sentences."""

    def __init__(self, table: ParseTable, spec: InterlinguaSpec | None = None,
                 packing: bool = True, trace: TextIO | None = None):
        self.table = table
        self.grammar = table.grammar
        self.spec = spec
        self.packing = packing
        self.trace = trace
        self._uid = 0

    def _new(self, state, level):
        self._uid += 1
        return _Node(state, level, self._uid)

    # -- reduction phase ----------------------------------------------------

    def _paths(self, node, k) -> Iterator[tuple]:
        """Link sequences of length k leading down from ``node`` (top first)."""
        if k == 0:
            yield ()
            return
        for link in node.links:
            for rest in self._paths(link[0], k - 1):
                yield (link,) + rest

    def _reduce_phase(self, base: list[_Node], lookahead: str, level: int) -> list[_Node]:
        """Apply every reduction valid before ``lookahead``; return all nodes."""
        table, rules = self.table, self.grammar.rules
        created: dict[int, _Node] = {}
        order: list[_Node] = list(base)
        processed: list[_Node] = []
        queue = deque(base)

        def attach(target_state, prev, value, sig):
            w = created.get(target_state) if self.packing else None
            if w is None:
                w = self._new(target_state, level)
                if self.packing:
                    created[target_state] = w
                w.links.append((prev, value, sig))
                order.append(w)
                queue.append(w)
                return
            same = [l for l in w.links if l[0] is prev]
            if any(l[1] == value for l in same) or len(same) >= MAX_AMBIGUITY:
                return
            link = (prev, value, sig)
            w.links.append(link)
            if w in processed_set:
                # Paths through the new link were missed by already-processed nodes.
                for v in list(processed):
                    for r in table.reductions[v.state].get(lookahead, ()):
                        k = len(rules[r].rhs)
                        if k == 0:
                            continue
                        for path in list(self._paths(v, k)):
                            if any(l is link for l in path):
                                do_reduce(v, r, path)

        def do_reduce(v, r, path):
            rule = rules[r]
            children = [l[1] for l in reversed(path)]
            try:
                value = reduce_with_action(rule, children, self.spec)
            except ActionError:
                return
            sig = tuple(x for l in reversed(path) for x in l[2]) + (r,)
            bottom = path[-1][0] if path else v
            target = table.gotos[bottom.state].get(rule.lhs)
            if target is not None:
                attach(target, bottom, value, sig)

        processed_set: set = set()
        while queue:
            v = queue.popleft()
            processed.append(v)
            processed_set.add(v)
            for r in table.reductions[v.state].get(lookahead, ()):
                for path in list(self._paths(v, len(rules[r].rhs))):
                    do_reduce(v, r, path)
        return order

    def _shift(self, nodes, category, readings, level):
        out: dict[int, _Node] = {}
        fresh = []
        for v in nodes:
            target = self.table.shifts[v.state].get(category)
            if target is None:
                continue
            w = out.get(target) if self.packing else None
            if w is None:
                w = self._new(target, level + 1)
                if self.packing:
                    out[target] = w
                fresh.append(w)
            for value in readings:
                w.links.append((v, value, ()))
        return fresh

    def _accepts(self, nodes, roots, start, end):
        found = []
        for v in nodes:
            entry = self.table.accepts[v.state]
            if entry is None:
                continue
            for prev, value, sig in v.links:
                if prev in roots:
                    found.append(Analysis(value, (start, end), rules=sig, category=entry))
        return found

    def _dump(self, level, nodes):
        for v in nodes:
            links = " ".join(f"->{p.state}@{p.level}:{format_filler(val) if val is not None else 'nil'}"
                             for p, val, _ in v.links)
            self.trace.write(f"level {level} node {v.state} {links}\n")

    # -- driver -------------------------------------------------------------

    def prefixes(self, tokens: Sequence[str], start: int = 0,
                 entries: Sequence[str] | None = None, strict: bool = False):
        """Parse ``tokens[start:]`` and yield ``(end, analyses)`` for every
        ``end`` at which the prefix is a complete phrase of some entry.

        Stops when the stack dies.  ``strict`` raises on unknown tokens.
        """
        if entries is None:
            entries = [e for e in self.table.entries if e != ANY]
            if ANY in self.table.entries:
                roots = [self._new(self.table.entries[ANY], start)]
            else:
                roots = [self._new(self.table.entries[e], start) for e in entries]
        else:
            roots = [self._new(self.table.entries[e], start) for e in entries]
        root_set = set(roots)
        frontier = list(roots)
        n = len(tokens)
        for pos in range(start, n + 1):
            if pos > start or n == start:
                closed = self._reduce_phase(frontier, END, pos)
                found = self._accepts(closed, root_set, start, pos)
                if found:
                    yield pos, _rank(found, entries)
            if pos == n:
                return
            readings = self.grammar.lookup(tokens[pos])
            if not readings and strict:
                raise UnknownTokenError(tokens[pos], pos)
            by_cat: dict[str, list] = {}
            for cat, value in readings:
                by_cat.setdefault(cat, []).append(value)
            nxt: list[_Node] = []
            merged: dict[int, _Node] = {}
            for cat, values in by_cat.items():
                closed = self._reduce_phase(frontier, cat, pos)
                if self.trace is not None:
                    self._dump(pos, closed)
                for w in self._shift(closed, cat, values, pos):
                    if self.packing and w.state in merged:
                        merged[w.state].links.extend(w.links)
                    else:
                        merged[w.state] = w
                        nxt.append(w)
            frontier = nxt
            if not frontier:
                return

    def parse(self, tokens: Sequence[str], entry: str | None = None,
              strict: bool = True) -> list[Analysis]:
        entries = [entry or self.grammar.start]
        for end, found in self.prefixes(tokens, 0, entries, strict):
            if end == len(tokens):
                return found
        return []


def _rank(found: list[Analysis], entries) -> list[Analysis]:
    rank = {e: i for i, e in enumerate(entries)}
    found.sort(key=lambda a: (rank.get(a.category, len(rank)), a.rules))
    out, seen = [], set()
    for a in found:
        if a.value in seen:
            continue
        seen.add(a.value)
        out.append(a)
        if len(out) == MAX_AMBIGUITY:
            break
    return out


def glr_parse(table: ParseTable, tokens: Sequence[str], spec: InterlinguaSpec | None = None,
              *, entry: str | None = None, packing: bool = True,
              trace: TextIO | None = None) -> list[Analysis]:
    """All complete analyses of ``tokens`` with no flexibility.

    Returns distinct-valued analyses ranked by rule-order signature (at most
    64); an empty list means the sentence is outside the grammar.  Raises
    :class:`UnknownTokenError` for words missing from the lexicon.
    """
    return GSSParser(table, spec, packing, trace).parse(tokens, entry)


def is_structure(value) -> bool:
    return isinstance(value, FeatureStructure)
