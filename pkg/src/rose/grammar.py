"""Semantic grammars, their structure-building actions, and SLR tables.

Grammar source is line oriented::

    # comment
    %start S
    %terminal plus a
    %frame TIME *SIMPLE-TIME
    S -> TIME BE RESP : (set-slot $3 WHEN $1)
    TIME -> TOD : (make-frame *SIMPLE-TIME (TIME-OF-DAY $1) (NUMBER PLURAL))
    out :: RESP : ((FRAME *RESPOND) (DEGREE NORMAL) (TYPE NEGATIVE))
    mornings :: TOD : MORNING

``%terminal`` declares categories that have no lexicon entry and ``%frame``
names the frame a nonterminal builds when it is hypothesised by insertion
(otherwise it is inferred from the rules).  A rule without an action
passes its first child through (``$1``); an empty rule defaults to
``nil``.  A token that is itself a declared terminal and has no lexicon
entry reads as that category with the token as its value.
"""
from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Sequence, Union

from .interlingua import (
    FeatureStructure,
    InterlinguaSpec,
    LiteralSyntaxError,
    Multiple,
    atom_value,
    filler_from_sexpr,
    format_filler,
    read_sexpr,
    validate,
)

END = "$"
ANY = "%any"  # entry that accepts every augmented nonterminal at once


class GrammarError(ValueError):
    """Invalid grammar; ``kind`` names the failure."""

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


class ActionError(ValueError):
    """A semantic action built an illegal structure; the parse path dies."""


# ---------------------------------------------------------------------------
# action templates


@dataclass(frozen=True)
class ChildRef:
    index: int  # 1-based


@dataclass(frozen=True)
class Atom:
    value: object  # atom, literal FeatureStructure, or None


@dataclass(frozen=True)
class SetSlot:
    slot: str
    expr: "Template"
    base: "Template | None" = None


@dataclass(frozen=True)
class MakeFrame:
    name: str
    assignments: tuple[SetSlot, ...] = ()


Template = Union[ChildRef, Atom, SetSlot, MakeFrame]


def parse_action(text: str) -> Template:
    try:
        return _template(read_sexpr(text))
    except LiteralSyntaxError as exc:
        raise GrammarError("bad-action", str(exc)) from None


def _template(sx) -> Template:
    if isinstance(sx, str):
        if sx.startswith("$") and sx[1:].isdigit():
            return ChildRef(int(sx[1:]))
        if sx == "nil":
            return Atom(None)
        return Atom(atom_value(sx))
    if not sx:
        raise GrammarError("bad-action", "empty expression")
    head = sx[0]
    if head == "make-frame":
        if len(sx) < 2 or not isinstance(sx[1], str):
            raise GrammarError("bad-action", "make-frame needs a frame name")
        assigns = []
        for pair in sx[2:]:
            if isinstance(pair, list) and len(pair) == 2 and isinstance(pair[0], str):
                assigns.append(SetSlot(pair[0], _template(pair[1])))
            elif isinstance(pair, list) and len(pair) == 3 and pair[0] == "set-slot":
                assigns.append(SetSlot(pair[1], _template(pair[2])))
            else:
                raise GrammarError("bad-action", f"bad slot assignment {pair!r}")
        return MakeFrame(sx[1], tuple(assigns))
    if head == "set-slot":
        if len(sx) != 4 or not isinstance(sx[2], str):
            raise GrammarError("bad-action", "use (set-slot BASE SLOT EXPR)")
        return SetSlot(sx[2], _template(sx[3]), _template(sx[1]))
    try:
        return Atom(filler_from_sexpr(sx))
    except LiteralSyntaxError:
        raise GrammarError("bad-action", f"unknown expression {sx!r}") from None


def format_action(t: Template) -> str:
    if isinstance(t, ChildRef):
        return f"${t.index}"
    if isinstance(t, Atom):
        return "nil" if t.value is None else format_filler(t.value)
    if isinstance(t, MakeFrame):
        parts = [f"({a.slot} {format_action(a.expr)})" for a in t.assignments]
        return "(make-frame " + " ".join([t.name] + parts) + ")"
    return f"(set-slot {format_action(t.base)} {t.slot} {format_action(t.expr)})"


def _child_refs(t: Template):
    if isinstance(t, ChildRef):
        yield t.index
    elif isinstance(t, SetSlot):
        yield from _child_refs(t.expr)
        if t.base is not None:
            yield from _child_refs(t.base)
    elif isinstance(t, MakeFrame):
        for a in t.assignments:
            yield from _child_refs(a.expr)


def evaluate_action(t: Template, children: Sequence, spec: InterlinguaSpec | None = None):
    """Evaluate a template over child values; raises :class:`ActionError`."""
    value = _eval(t, children)
    if spec is not None and isinstance(value, FeatureStructure) and not isinstance(t, ChildRef):
        problems = validate(value, spec)
        if problems:
            raise ActionError("; ".join(f"{'/'.join(p.path) or '.'}: {p.message}" for p in problems))
    return value


def _eval(t: Template, children):
    if isinstance(t, ChildRef):
        return children[t.index - 1]
    if isinstance(t, Atom):
        return t.value
    if isinstance(t, MakeFrame):
        slots = []
        for a in t.assignments:
            v = _eval(a.expr, children)
            if v is not None:
                slots.append((a.slot, v))
        return FeatureStructure(t.name, slots)
    base = _eval(t.base, children)
    if not isinstance(base, FeatureStructure):
        raise ActionError(f"set-slot {t.slot} on a non-structure {base!r}")
    v = _eval(t.expr, children)
    return base if v is None else base.with_slot(t.slot, v)


# ---------------------------------------------------------------------------
# grammar


@dataclass(frozen=True)
class Rule:
    id: int
    lhs: str
    rhs: tuple[str, ...]
    action: Template

    def __str__(self):
        return f"{self.lhs} -> {' '.join(self.rhs)}".rstrip()


@dataclass(frozen=True)
class LexEntry:
    token: str
    category: str
    value: object = None


@dataclass(frozen=True)
class Grammar:
    start: str
    rules: tuple[Rule, ...]
    lexicon: tuple[LexEntry, ...] = ()
    terminals: tuple[str, ...] = ()  # explicitly declared categories
    frames: tuple[tuple[str, str], ...] = ()  # %frame overrides

    def __post_init__(self):
        _check_grammar(self)

    @cached_property
    def nonterminals(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(r.lhs for r in self.rules))

    @cached_property
    def terminal_set(self) -> frozenset[str]:
        return frozenset(self.terminals) | {e.category for e in self.lexicon}

    @cached_property
    def symbol_order(self) -> dict[str, int]:
        order = list(self.nonterminals)
        order += [t for t in self.terminals if t not in order]
        order += [e.category for e in self.lexicon if e.category not in order]
        return {s: i for i, s in enumerate(dict.fromkeys(order))}

    @cached_property
    def lexical_index(self) -> dict[str, tuple[tuple[str, object], ...]]:
        index: dict[str, list] = {}
        for e in self.lexicon:
            index.setdefault(e.token, []).append((e.category, e.value))
        return {k: tuple(v) for k, v in index.items()}

    def lookup(self, token: str) -> tuple[tuple[str, object], ...]:
        """Lexical readings of ``token`` as (category, value) pairs."""
        found = self.lexical_index.get(token)
        if found is not None:
            return found
        if token in self.terminals:
            return ((token, token),)
        return ()

    def is_terminal(self, symbol: str) -> bool:
        return symbol in self.terminal_set

    @cached_property
    def rules_for(self) -> dict[str, tuple[Rule, ...]]:
        out: dict[str, list[Rule]] = {}
        for r in self.rules:
            out.setdefault(r.lhs, []).append(r)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def nullable(self) -> frozenset[str]:
        found: set[str] = set()
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                if r.lhs not in found and all(s in found for s in r.rhs):
                    found.add(r.lhs)
                    changed = True
        return frozenset(found)

    @cached_property
    def first_sets(self) -> dict[str, frozenset[str]]:
        first = {nt: set() for nt in self.nonterminals}
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                acc = first[r.lhs]
                before = len(acc)
                for s in r.rhs:
                    if self.is_terminal(s):
                        acc.add(s)
                        break
                    acc |= first[s]
                    if s not in self.nullable:
                        break
                changed |= len(acc) != before
        return {k: frozenset(v) for k, v in first.items()}

    def first_of(self, symbols: Sequence[str]) -> tuple[frozenset[str], bool]:
        """FIRST of a symbol string and whether the string is nullable."""
        out: set[str] = set()
        for s in symbols:
            if self.is_terminal(s):
                out.add(s)
                return frozenset(out), False
            out |= self.first_sets[s]
            if s not in self.nullable:
                return frozenset(out), False
        return frozenset(out), True

    def follow_sets(self, entries: Sequence[str] | None = None) -> dict[str, frozenset[str]]:
        entries = tuple(entries or (self.start,))
        follow = {nt: set() for nt in self.nonterminals}
        for e in entries:
            follow[e].add(END)
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                for i, s in enumerate(r.rhs):
                    if self.is_terminal(s):
                        continue
                    rest_first, rest_nullable = self.first_of(r.rhs[i + 1:])
                    before = len(follow[s])
                    follow[s] |= rest_first
                    if rest_nullable:
                        follow[s] |= follow[r.lhs]
                    changed |= len(follow[s]) != before
        return {k: frozenset(v) for k, v in follow.items()}

    @cached_property
    def min_yields(self) -> dict[str, float]:
        """Least terminal count derivable from each nonterminal (inf if none)."""
        best = {nt: math.inf for nt in self.nonterminals}
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                cost = sum(1 if self.is_terminal(s) else best[s] for s in r.rhs)
                if cost < best[r.lhs]:
                    best[r.lhs] = cost
                    changed = True
        return {k: (int(v) if v != math.inf else v) for k, v in best.items()}

    @cached_property
    def result_frames(self) -> dict[str, str | None]:
        """Frame each nonterminal builds, used for inserted empty frames."""
        cat_frame: dict[str, str] = {}
        for e in self.lexicon:
            if isinstance(e.value, FeatureStructure):
                cat_frame.setdefault(e.category, e.value.frame)
        frames: dict[str, str | None] = {nt: None for nt in self.nonterminals}
        declared = dict(self.frames)

        def frame_of(t, rhs):
            if isinstance(t, MakeFrame):
                return t.name
            if isinstance(t, SetSlot):
                return frame_of(t.base, rhs) if t.base is not None else None
            if isinstance(t, Atom):
                return t.value.frame if isinstance(t.value, FeatureStructure) else None
            sym = rhs[t.index - 1]
            return frames.get(sym) if sym in frames else cat_frame.get(sym)

        changed = True
        while changed:
            changed = False
            for r in self.rules:
                if r.lhs in declared or frames[r.lhs] is not None:
                    continue
                f = frame_of(r.action, r.rhs)
                if f is not None:
                    frames[r.lhs] = f
                    changed = True
        frames.update(declared)
        return frames

    @cached_property
    def digest(self) -> str:
        return hashlib.sha256(dump_grammar(self).encode()).hexdigest()


def _check_grammar(g: Grammar) -> None:
    lhs = {r.lhs for r in g.rules}
    terms = set(g.terminals) | {e.category for e in g.lexicon}
    if g.start not in lhs:
        raise GrammarError("undefined-symbol", f"start symbol {g.start} has no rule")
    clash = lhs & terms
    if clash:
        raise GrammarError("symbol-clash", f"symbols both terminal and nonterminal: {sorted(clash)}")
    for i, r in enumerate(g.rules):
        if r.id != i:
            raise GrammarError("bad-rule-id", f"rule {r} has id {r.id}, expected {i}")
        for s in r.rhs:
            if s not in lhs and s not in terms:
                raise GrammarError("undefined-symbol", f"{s} in rule {r}")
        for k in _child_refs(r.action):
            if not 1 <= k <= len(r.rhs):
                raise GrammarError("bad-action", f"${k} out of range in rule {r}")
    for nt, _ in g.frames:
        if nt not in lhs:
            raise GrammarError("undefined-symbol", f"%frame for unknown nonterminal {nt}")
    _check_acyclic(g)


def _check_acyclic(g: Grammar) -> None:
    # A =>+ A makes every GLR variant diverge.
    nullable = g.nullable
    unit: dict[str, set[str]] = {}
    for r in g.rules:
        for i, s in enumerate(r.rhs):
            if s in g.terminal_set:
                continue
            others = r.rhs[:i] + r.rhs[i + 1:]
            if all(o in nullable for o in others):
                unit.setdefault(r.lhs, set()).add(s)
    for nt in g.nonterminals:
        seen, todo = set(), list(unit.get(nt, ()))
        while todo:
            s = todo.pop()
            if s == nt:
                raise GrammarError("cyclic", f"{nt} derives itself")
            if s not in seen:
                seen.add(s)
                todo.extend(unit.get(s, ()))


def load_grammar(text: str) -> Grammar:
    start = None
    rules: list[Rule] = []
    lexicon: list[LexEntry] = []
    terminals: list[str] = []
    frames: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            if line.startswith("%start"):
                parts = line.split()
                if len(parts) != 2:
                    raise GrammarError("syntax", "use %start SYMBOL")
                if start is not None:
                    raise GrammarError("duplicate-start", f"second %start {parts[1]}")
                start = parts[1]
            elif line.startswith("%terminal"):
                terminals.extend(t for t in line.split()[1:] if t not in terminals)
            elif line.startswith("%frame"):
                parts = line.split()
                if len(parts) != 3:
                    raise GrammarError("syntax", "use %frame NONTERMINAL *FRAME")
                frames.append((parts[1], parts[2]))
            elif " -> " in f" {line} " and "::" not in line.split("->", 1)[0]:
                lhs, _, rest = line.partition("->")
                body, colon, action_text = rest.partition(":")
                rhs = tuple(body.split())
                if colon and action_text.strip():
                    action = parse_action(action_text)
                else:
                    action = ChildRef(1) if rhs else Atom(None)
                if len(lhs.split()) != 1:
                    raise GrammarError("syntax", f"bad left-hand side {lhs!r}")
                rules.append(Rule(len(rules), lhs.strip(), rhs, action))
            elif "::" in line:
                token, _, rest = line.partition("::")
                cat, colon, literal = rest.partition(":")
                if len(token.split()) != 1 or len(cat.split()) != 1:
                    raise GrammarError("syntax", "use TOKEN :: CATEGORY : literal")
                value = None
                if colon and literal.strip():
                    try:
                        value = filler_from_sexpr(read_sexpr(literal))
                    except LiteralSyntaxError as exc:
                        raise GrammarError("bad-literal", str(exc)) from None
                lexicon.append(LexEntry(token.strip(), cat.strip(), value))
            else:
                raise GrammarError("syntax", f"cannot read {raw!r}")
        except GrammarError as exc:
            raise GrammarError(exc.kind, f"line {lineno}: {exc.args[0].split(': ', 1)[1]}") from None
    if not rules:
        raise GrammarError("syntax", "no rules")
    if start is None:
        start = rules[0].lhs
    return Grammar(start, tuple(rules), tuple(lexicon), tuple(terminals), tuple(frames))


def dump_grammar(g: Grammar) -> str:
    lines = [f"%start {g.start}"]
    if g.terminals:
        lines.append("%terminal " + " ".join(g.terminals))
    lines += [f"%frame {nt} {f}" for nt, f in g.frames]
    for r in g.rules:
        lines.append(f"{r.lhs} -> {' '.join(r.rhs)} : {format_action(r.action)}".replace("->  :", "-> :"))
    for e in g.lexicon:
        tail = "" if e.value is None else f" : {format_filler(e.value)}"
        lines.append(f"{e.token} :: {e.category}{tail}")
    return "\n".join(lines) + "\n"


def min_yield(g: Grammar, nt: str) -> int:
    """Least number of words any derivation from ``nt`` produces."""
    if nt not in g.min_yields:
        raise GrammarError("undefined-symbol", f"{nt} is not a nonterminal")
    y = g.min_yields[nt]
    if y == math.inf:
        raise GrammarError("nonproductive-symbol", f"{nt} derives no terminal string")
    return y


# ---------------------------------------------------------------------------
# SLR tables


class Action(NamedTuple):
    kind: str  # "shift", "reduce" or "accept"
    arg: Union[int, str]  # target state, rule id, or accepted entry symbol


@dataclass(frozen=True)
class ParseTable:
    """LR(0) automaton with SLR-filtered reductions; conflicts are kept.

    ``entries`` maps each nonterminal the table can parse as a whole to its
    initial state.  ``actions[q][a]`` is a tuple of :class:`Action` (shifts,
    then reductions by rule id, then accept); ``gotos[q][A]`` the successor.
    """

    grammar: Grammar
    entries: dict[str, int]
    items: tuple[frozenset, ...]
    actions: tuple[dict[str, tuple[Action, ...]], ...]
    gotos: tuple[dict[str, int], ...]

    @property
    def n_states(self) -> int:
        return len(self.actions)

    @cached_property
    def all_reductions(self) -> tuple[tuple[int, ...], ...]:
        """Every rule reducible in each state, ignoring lookahead."""
        out = []
        for q in self.items:
            out.append(tuple(sorted(r for r, dot in q if r < len(self.grammar.rules)
                                    and dot == len(self.grammar.rules[r].rhs))))
        return tuple(out)

    @cached_property
    def reductions(self) -> tuple[dict[str, tuple[int, ...]], ...]:
        return tuple({a: tuple(x.arg for x in acts if x.kind == "reduce")
                      for a, acts in row.items()} for row in self.actions)

    @cached_property
    def shifts(self) -> tuple[dict[str, int], ...]:
        return tuple({a: x.arg for a, acts in row.items() for x in acts if x.kind == "shift"}
                     for row in self.actions)

    @cached_property
    def accepts(self) -> tuple[str | None, ...]:
        out = []
        for row in self.actions:
            acc = [x.arg for x in row.get(END, ()) if x.kind == "accept"]
            out.append(acc[0] if acc else None)
        return tuple(out)

    def conflicts(self) -> list[tuple[int, str]]:
        return [(q, a) for q, row in enumerate(self.actions) for a, acts in row.items() if len(acts) > 1]


def compile_tables(g: Grammar, entries: Sequence[str] | str | None = None) -> ParseTable:
    """Build the LR(0) canonical collection and SLR action/goto tables.

    ``entries`` lists the nonterminals to augment (default: the start
    symbol); ``"all"`` makes every nonterminal parseable on its own, which is
    what the restart parser needs to recognise fragments of any category.
    With several entries there is also a combined start state, ``ANY``, from
    which a single parse recognises all of them.
    """
    if entries is None:
        entries = (g.start,)
    elif entries == "all":
        entries = (g.start,) + tuple(nt for nt in g.nonterminals if nt != g.start)
    entries = tuple(entries)
    for e in entries:
        if e not in g.rules_for:
            raise GrammarError("undefined-symbol", f"entry {e} is not a nonterminal")
    n_rules = len(g.rules)
    rhs = [r.rhs for r in g.rules] + [(e,) for e in entries]
    lhs = [r.lhs for r in g.rules] + [None] * len(entries)
    order = g.symbol_order

    def closure(kernel):
        items = set(kernel)
        todo = list(kernel)
        while todo:
            r, dot = todo.pop()
            if dot < len(rhs[r]):
                sym = rhs[r][dot]
                for rule in g.rules_for.get(sym, ()):
                    item = (rule.id, 0)
                    if item not in items:
                        items.add(item)
                        todo.append(item)
        return frozenset(items)

    states: list[frozenset] = []
    index: dict[frozenset, int] = {}
    transitions: list[dict[str, int]] = []

    def intern(kernel):
        key = frozenset(kernel)
        if key not in index:
            index[key] = len(states)
            states.append(closure(key))
            transitions.append({})
        return index[key]

    entry_states = {e: intern({(n_rules + k, 0)}) for k, e in enumerate(entries)}
    if len(entries) > 1:
        entry_states[ANY] = intern({(n_rules + k, 0) for k in range(len(entries))})
    queue = deque(range(len(states)))
    while queue:
        q = queue.popleft()
        step: dict[str, set] = {}
        for r, dot in states[q]:
            if dot < len(rhs[r]):
                step.setdefault(rhs[r][dot], set()).add((r, dot + 1))
        for sym in sorted(step, key=order.__getitem__):
            before = len(states)
            transitions[q][sym] = intern(step[sym])
            if len(states) > before:
                queue.append(len(states) - 1)

    follow = g.follow_sets(entries)
    actions: list[dict[str, tuple[Action, ...]]] = []
    gotos: list[dict[str, int]] = []
    term_order = sorted(g.terminal_set, key=lambda t: order.get(t, len(order))) + [END]
    term_rank = {t: i for i, t in enumerate(term_order)}
    for q, items in enumerate(states):
        cells: dict[str, list[Action]] = {}
        goto_row: dict[str, int] = {}
        for sym, target in transitions[q].items():
            if g.is_terminal(sym):
                cells.setdefault(sym, []).append(Action("shift", target))
            else:
                goto_row[sym] = target
        for r, dot in sorted(items):
            if dot != len(rhs[r]):
                continue
            if r < n_rules:
                for a in sorted(follow[lhs[r]], key=term_rank.__getitem__):
                    cells.setdefault(a, []).append(Action("reduce", r))
            else:
                cells.setdefault(END, []).append(Action("accept", entries[r - n_rules]))
        row = {a: tuple(cells[a]) for a in term_order if a in cells}
        actions.append(row)
        gotos.append(goto_row)
    return ParseTable(g, entry_states, tuple(states), tuple(actions), tuple(gotos))


TABLE_VERSION = "rose-table v1"


def dump_table(t: ParseTable) -> str:
    """Canonical text form; identical tables give identical text."""
    g = t.grammar
    lines = [f"{TABLE_VERSION} {g.digest}"]
    lines.append("entries " + " ".join(f"{e}={q}" for e, q in t.entries.items()))
    for q in range(t.n_states):
        lines.append(f"state {q}")
        items = sorted(t.items[q])
        lines.append("  items " + " ".join(f"{r}.{d}" for r, d in items))
        for a, acts in t.actions[q].items():
            lines.append(f"  {a} " + " ".join(f"{x.kind} {x.arg}" for x in acts))
        for nt, target in t.gotos[q].items():
            lines.append(f"  {nt} goto {target}")
    return "\n".join(lines) + "\n"


def load_table(text: str, g: Grammar) -> ParseTable:
    lines = text.splitlines()
    header = lines[0].split()
    if " ".join(header[:2]) != TABLE_VERSION or header[2] != g.digest:
        raise ValueError("table file does not match this grammar")
    entries = {}
    for pair in lines[1].split()[1:]:
        e, q = pair.split("=")
        entries[e] = int(q)
    items, actions, gotos = [], [], []
    for line in lines[2:]:
        parts = line.split()
        if parts[0] == "state":
            items.append(frozenset())
            actions.append({})
            gotos.append({})
        elif parts[0] == "items":
            items[-1] = frozenset(tuple(int(x) for x in p.split(".")) for p in parts[1:])
        elif len(parts) == 3 and parts[1] == "goto":
            gotos[-1][parts[0]] = int(parts[2])
        else:
            acts = []
            for kind, arg in zip(parts[1::2], parts[2::2]):
                acts.append(Action(kind, arg if kind == "accept" else int(arg)))
            actions[-1][parts[0]] = tuple(acts)
    return ParseTable(g, entries, tuple(items), tuple(actions), tuple(gotos))


def cached_tables(g: Grammar, path, entries=None) -> ParseTable:
    """Load tables from ``path`` unless the grammar changed; then rebuild."""
    path = Path(path)
    if path.exists():
        try:
            table = load_table(path.read_text(), g)
            if entries is None or set(table.entries) == set(
                    compile_entries(g, entries)):
                return table
        except (ValueError, IndexError):
            pass
    table = compile_tables(g, entries)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(dump_table(table))
    tmp.replace(path)
    return table


def compile_entries(g: Grammar, entries) -> tuple[str, ...]:
    if entries is None:
        return (g.start,)
    if entries == "all":
        entries = (g.start,) + tuple(nt for nt in g.nonterminals if nt != g.start)
    entries = tuple(entries)
    return entries + (ANY,) if len(entries) > 1 else entries
