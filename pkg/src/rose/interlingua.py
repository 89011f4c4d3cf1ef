"""Frame-based meaning representation.

A feature structure is a frame name plus slots.  Each slot holds an atomic
value (a symbol or a number), a nested feature structure, or a
``*MULTIPLE*`` set of structures.  The interlingua specification says which
slots a frame may carry and which fillers each slot accepts; insertion and
merging of chunks are only licensed through it.

The literal notation is the parenthesised one used for the chunk dumps::

    ((FRAME *RESPOND)
     (DEGREE NORMAL)
     (TYPE NEGATIVE)
     (WHEN ((FRAME *SIMPLE-TIME)
            (TIME-OF-DAY MORNING))))

``(FRAME *X)`` is read as the structure's frame, never as a slot.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Union

ATOM = "ATOM"
MULTIPLE = "*MULTIPLE*"
FRAME_KEY = "FRAME"

Atom = Union[str, int, float]


class InterlinguaError(ValueError):
    """Base class for interlingua faults."""


class LiteralSyntaxError(InterlinguaError):
    pass


class SpecError(InterlinguaError):
    pass


class NoSlot(InterlinguaError):
    """No slot of the parent admits the child."""


class MergeClash(InterlinguaError):
    """Two structures cannot be unified."""


class FeatureStructure:
    """Immutable frame with ordered slots.

    Slot order is kept for printing only; equality and hashing ignore it.
    ``synthetic`` marks empty frames hypothesised by insertion during
    minimum-distance parsing; it does not take part in equality.
    """

    __slots__ = ("frame", "slots", "synthetic", "_hash", "_index")

    def __init__(self, frame: str, slots=(), synthetic: bool = False):
        if isinstance(slots, Mapping):
            items = tuple(slots.items())
        else:
            items = tuple((name, value) for name, value in slots)
        index = {}
        for name, value in items:
            if name in index:
                raise InterlinguaError(f"duplicate slot {name} in {frame}")
            if name == FRAME_KEY:
                raise InterlinguaError("FRAME is not a slot")
            index[name] = value
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "slots", items)
        object.__setattr__(self, "synthetic", synthetic)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("FeatureStructure is immutable")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FeatureStructure):
            return NotImplemented
        return self.frame == other.frame and self._index == other._index

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.frame, frozenset(self.slots)))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"FeatureStructure({format_fs(self)})"

    def __contains__(self, slot):
        return slot in self._index

    def __getitem__(self, slot):
        return self._index[slot]

    def __len__(self):
        return len(self.slots)

    def get(self, slot, default=None):
        return self._index.get(slot, default)

    @property
    def slot_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.slots)

    def with_slot(self, slot: str, filler) -> "FeatureStructure":
        """Copy with ``slot`` set to ``filler`` (replacing any old filler)."""
        if slot in self._index:
            items = tuple((n, filler if n == slot else v) for n, v in self.slots)
        else:
            items = self.slots + ((slot, filler),)
        return FeatureStructure(self.frame, items, self.synthetic)


class Multiple:
    """An unordered set of two or more structures filling one slot."""

    __slots__ = ("items", "_hash")

    def __init__(self, items: Iterable[FeatureStructure]):
        object.__setattr__(self, "items", tuple(items))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Multiple is immutable")

    def __eq__(self, other):
        if not isinstance(other, Multiple):
            return NotImplemented
        return Counter(self.items) == Counter(other.items)

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(frozenset(Counter(self.items).items()))
            object.__setattr__(self, "_hash", h)
        return h

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __repr__(self):
        return f"Multiple({format_filler(self)})"


def is_atom(value) -> bool:
    return isinstance(value, (str, int, float)) and not isinstance(value, bool)


# ---------------------------------------------------------------------------
# literal notation

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def read_sexpr(text: str):
    """Read one s-expression; ``;`` starts a comment running to end of line."""
    text = re.sub(r";[^\n]*", "", text)
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise LiteralSyntaxError("empty literal")
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise LiteralSyntaxError("unbalanced parentheses")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while True:
                if pos >= len(tokens):
                    raise LiteralSyntaxError("unbalanced parentheses")
                if tokens[pos] == ")":
                    pos += 1
                    return items
                items.append(read())
        if tok == ")":
            raise LiteralSyntaxError("unexpected ')'")
        return tok

    value = read()
    if pos != len(tokens):
        raise LiteralSyntaxError(f"trailing input after literal: {tokens[pos:]}")
    return value


def atom_value(token: str) -> Atom:
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        return token


def filler_from_sexpr(sx):
    if isinstance(sx, str):
        return atom_value(sx)
    if sx and sx[0] == MULTIPLE:
        return Multiple(fs_from_sexpr(item) for item in sx[1:])
    return fs_from_sexpr(sx)


def fs_from_sexpr(sx) -> FeatureStructure:
    if isinstance(sx, str) or not all(isinstance(p, list) and len(p) == 2 for p in sx):
        raise LiteralSyntaxError(f"not a feature structure: {sx!r}")
    frame = None
    slots = []
    for key, value in sx:
        if not isinstance(key, str):
            raise LiteralSyntaxError(f"slot name must be a symbol: {key!r}")
        if key == FRAME_KEY:
            if frame is not None or not isinstance(value, str):
                raise LiteralSyntaxError("bad or repeated FRAME pair")
            frame = value
        else:
            slots.append((key, filler_from_sexpr(value)))
    if frame is None:
        raise LiteralSyntaxError(f"structure without FRAME: {sx!r}")
    try:
        return FeatureStructure(frame, slots)
    except InterlinguaError as exc:
        raise LiteralSyntaxError(str(exc)) from None


def parse_fs(text: str) -> FeatureStructure:
    return fs_from_sexpr(read_sexpr(text))


def parse_filler(text: str):
    """Parse either a structure literal or a bare atom."""
    return filler_from_sexpr(read_sexpr(text))


def format_atom(value: Atom) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def format_filler(value, pretty: bool = False, column: int = 0) -> str:
    if isinstance(value, FeatureStructure):
        return format_fs(value, pretty, column)
    if isinstance(value, Multiple):
        if not pretty:
            return "(" + " ".join([MULTIPLE] + [format_fs(x) for x in value]) + ")"
        inner = column + 1
        parts = [format_fs(x, True, inner) for x in value]
        return "(" + MULTIPLE + "".join("\n" + " " * inner + p for p in parts) + ")"
    return format_atom(value)


def format_fs(fs: FeatureStructure, pretty: bool = False, column: int = 0) -> str:
    """Render ``fs`` in literal notation, FRAME first then slots in order.

    With ``pretty`` each pair goes on its own line, aligned one column right
    of the opening parenthesis; ``column`` is where that parenthesis sits.
    """
    if not pretty:
        pairs = [f"({FRAME_KEY} {fs.frame})"]
        pairs += [f"({name} {format_filler(v)})" for name, v in fs.slots]
        return "(" + " ".join(pairs) + ")"
    inner = column + 1
    lines = [f"({FRAME_KEY} {fs.frame})"]
    for name, value in fs.slots:
        head = f"({name} "
        lines.append(head + format_filler(value, True, inner + len(head)) + ")")
    return "(" + ("\n" + " " * inner).join(lines) + ")"


# ---------------------------------------------------------------------------
# specification


@dataclass(frozen=True)
class FrameDecl:
    name: str
    type: str
    slots: tuple[str, ...]


@dataclass(frozen=True)
class SlotDecl:
    name: str
    fillers: tuple[str, ...]


@dataclass(frozen=True)
class InterlinguaSpec:
    """Frames grouped into types, slots with their admissible filler types.

    A slot's filler entries name a type, a frame (``*NAME``) or ``ATOM``.
    """

    frames: Mapping[str, FrameDecl]
    slots: Mapping[str, SlotDecl]
    types: tuple[str, ...] = field(default=())

    def __post_init__(self):
        problems = []
        declared_types = set(self.types) | {f.type for f in self.frames.values()}
        for frame in self.frames.values():
            for slot in frame.slots:
                if slot not in self.slots:
                    problems.append(f"frame {frame.name} uses undeclared slot {slot}")
        for slot in self.slots.values():
            if not slot.fillers:
                problems.append(f"slot {slot.name} admits no fillers")
            for filler in slot.fillers:
                if filler == ATOM:
                    continue
                if filler.startswith("*"):
                    if filler not in self.frames:
                        problems.append(f"slot {slot.name} names undeclared frame {filler}")
                elif filler not in declared_types:
                    problems.append(f"slot {slot.name} names undeclared type {filler}")
        if problems:
            raise SpecError("; ".join(problems))
        if not self.types:
            ordered = list(dict.fromkeys(f.type for f in self.frames.values()))
            object.__setattr__(self, "types", tuple(ordered))

    @property
    def filler_types(self) -> tuple[str, ...]:
        """Every filler type: the frame type tags followed by ``ATOM``."""
        return self.types + (ATOM,)

    def type_of(self, filler) -> str:
        if isinstance(filler, FeatureStructure):
            return self.frames[filler.frame].type
        if isinstance(filler, Multiple):
            raise InterlinguaError("a *MULTIPLE* set has no single type")
        return ATOM

    def admits(self, slot: str, filler) -> bool:
        decl = self.slots.get(slot)
        if decl is None:
            return False
        if isinstance(filler, Multiple):
            return len(filler) >= 2 and all(self.admits(slot, x) for x in filler)
        if isinstance(filler, FeatureStructure):
            frame = self.frames.get(filler.frame)
            if frame is None:
                return False
            return filler.frame in decl.fillers or frame.type in decl.fillers
        return is_atom(filler) and ATOM in decl.fillers

    def slots_for(self, frame: str) -> tuple[str, ...]:
        return self.frames[frame].slots


def load_spec(text: str) -> InterlinguaSpec:
    """Read the spec file format::

        # comment
        type TEMPORAL
        frame *SIMPLE-TIME TEMPORAL : TIME-OF-DAY NUMBER
        slot WHEN : TEMPORAL *THAT
        slot NUMBER : ATOM
    """
    frames: dict[str, FrameDecl] = {}
    slots: dict[str, SlotDecl] = {}
    types: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        keyword, _, rest = line.partition(" ")
        head, colon, tail = rest.partition(":")
        names = head.split()
        if keyword == "type" and len(names) >= 1 and not colon:
            types.extend(n for n in names if n not in types)
        elif keyword == "frame" and len(names) == 2 and colon:
            name, tag = names
            if name in frames:
                raise SpecError(f"line {lineno}: frame {name} declared twice")
            frames[name] = FrameDecl(name, tag, tuple(tail.split()))
            if tag not in types:
                types.append(tag)
        elif keyword == "slot" and len(names) == 1 and colon:
            if names[0] in slots:
                raise SpecError(f"line {lineno}: slot {names[0]} declared twice")
            slots[names[0]] = SlotDecl(names[0], tuple(tail.split()))
        else:
            raise SpecError(f"line {lineno}: cannot read {raw!r}")
    return InterlinguaSpec(frames, slots, tuple(types))


def dump_spec(spec: InterlinguaSpec) -> str:
    lines = [f"type {t}" for t in spec.types]
    lines += [f"frame {f.name} {f.type} : {' '.join(f.slots)}" for f in spec.frames.values()]
    lines += [f"slot {s.name} : {' '.join(s.fillers)}" for s in spec.slots.values()]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# operations


class Violation(NamedTuple):
    path: tuple[str, ...]
    message: str


def validate(fs, spec: InterlinguaSpec) -> list[Violation]:
    """Return the violations of ``fs`` against ``spec``; empty means legal."""
    out: list[Violation] = []
    _validate(fs, spec, (), out)
    return out


def _validate(fs, spec, path, out):
    if not isinstance(fs, FeatureStructure):
        out.append(Violation(path, f"not a feature structure: {fs!r}"))
        return
    decl = spec.frames.get(fs.frame)
    if decl is None:
        out.append(Violation(path, f"undeclared frame {fs.frame}"))
        return
    for slot, filler in fs.slots:
        here = path + (slot,)
        if slot not in decl.slots:
            out.append(Violation(here, f"slot {slot} not declared for {fs.frame}"))
            continue
        if isinstance(filler, Multiple):
            if len(filler) < 2:
                out.append(Violation(here, "*MULTIPLE* needs at least two members"))
            for i, item in enumerate(filler):
                _check_filler(slot, item, spec, path + (f"{slot}[{i}]",), out)
        else:
            _check_filler(slot, filler, spec, here, out)


def _check_filler(slot, filler, spec, path, out):
    if not spec.admits(slot, filler):
        out.append(Violation(path, f"slot {slot} does not admit {_describe(filler)}"))
        if not isinstance(filler, FeatureStructure):
            return
    if isinstance(filler, FeatureStructure):
        _validate(filler, spec, path, out)


def _describe(filler) -> str:
    if isinstance(filler, FeatureStructure):
        return filler.frame
    return format_filler(filler)


def is_valid(fs, spec: InterlinguaSpec) -> bool:
    return not validate(fs, spec)


def insert(parent, child, spec: InterlinguaSpec, stats=None) -> tuple[FeatureStructure, str]:
    """Place ``child`` into a licensed slot of ``parent``.

    Empty slots are preferred, ranked by the slot/filler-type association
    score from ``stats`` (highest first) and then by declaration order.  If
    only filled slots admit the child, the old and new fillers become a
    ``*MULTIPLE*`` set.  Raises :class:`NoSlot` when nothing admits it.
    """
    if not isinstance(parent, FeatureStructure) or not isinstance(child, FeatureStructure):
        raise NoSlot("only feature structures can be combined")
    if parent.frame not in spec.frames or child.frame not in spec.frames:
        raise NoSlot("undeclared frame")
    child_type = spec.type_of(child)
    empty, filled = [], []
    for order, slot in enumerate(spec.slots_for(parent.frame)):
        if not spec.admits(slot, child):
            continue
        score = stats.score(slot, child_type) if stats is not None else 0.0
        current = parent.get(slot)
        if current is None:
            empty.append((-score, order, slot))
        elif isinstance(current, (FeatureStructure, Multiple)):
            filled.append((-score, order, slot))
    if empty:
        slot = min(empty)[2]
        return parent.with_slot(slot, child), slot
    if filled:
        slot = min(filled)[2]
        current = parent[slot]
        members = current.items if isinstance(current, Multiple) else (current,)
        return parent.with_slot(slot, Multiple(members + (child,))), slot
    raise NoSlot(f"no slot of {parent.frame} admits {child.frame}")


def merge(a, b, spec: InterlinguaSpec | None = None) -> FeatureStructure:
    """Unify two structures of the same frame; raises :class:`MergeClash`."""
    if not isinstance(a, FeatureStructure) or not isinstance(b, FeatureStructure):
        raise MergeClash("only feature structures merge")
    if a.frame != b.frame:
        raise MergeClash(f"frames differ: {a.frame} vs {b.frame}")
    items = list(a.slots)
    for slot, theirs in b.slots:
        if slot not in a:
            items.append((slot, theirs))
            continue
        ours = a[slot]
        if ours == theirs:
            continue
        if isinstance(ours, FeatureStructure) and isinstance(theirs, FeatureStructure):
            merged = merge(ours, theirs, spec)
            items = [(n, merged if n == slot else v) for n, v in items]
        else:
            raise MergeClash(f"slot {slot} holds {_describe(ours)} and {_describe(theirs)}")
    return FeatureStructure(a.frame, items, a.synthetic and b.synthetic)


def size(fs) -> int:
    """Frames plus atomic fillers, counted recursively."""
    if isinstance(fs, FeatureStructure):
        return 1 + sum(size(v) for _, v in fs.slots)
    if isinstance(fs, Multiple):
        return sum(size(x) for x in fs)
    return 1


def iter_frames(fs) -> Iterator[FeatureStructure]:
    """Every frame instance in ``fs``, outermost first."""
    if isinstance(fs, FeatureStructure):
        yield fs
        for _, value in fs.slots:
            yield from iter_frames(value)
    elif isinstance(fs, Multiple):
        for item in fs:
            yield from iter_frames(item)


def iter_atoms(fs) -> Iterator[Atom]:
    if isinstance(fs, FeatureStructure):
        for _, value in fs.slots:
            yield from iter_atoms(value)
    elif isinstance(fs, Multiple):
        for item in fs:
            yield from iter_atoms(item)
    else:
        yield fs


def facts(fs) -> frozenset:
    """Decompose ``fs`` into feature paths anchored at each frame.

    Every frame instance contributes ``(FRAME, name)``; every slot adds
    ``(frame, slot, filler)`` where the filler is an atom or the child's
    frame name.  Members of a ``*MULTIPLE*`` set each add their own path, so
    their order does not matter.
    """
    out = set()
    for frame in iter_frames(fs):
        out.add((FRAME_KEY, frame.frame))
        for slot, value in frame.slots:
            members = value.items if isinstance(value, Multiple) else (value,)
            for m in members:
                label = m.frame if isinstance(m, FeatureStructure) else m
                out.add((frame.frame, slot, label))
    if not isinstance(fs, (FeatureStructure, Multiple)) and fs is not None:
        out.add((ATOM, fs))
    return frozenset(out)


class Similarity(NamedTuple):
    precision: float
    recall: float
    f1: float
    matched: int
    candidate_facts: int
    gold_facts: int


def similarity(candidate, gold) -> Similarity:
    cand, ref = facts(candidate), facts(gold)
    hit = len(cand & ref)
    p = hit / len(cand) if cand else 0.0
    r = hit / len(ref) if ref else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return Similarity(p, r, f1, hit, len(cand), len(ref))
