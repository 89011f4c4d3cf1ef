"""Corpus benchmark: parse every sentence under each strategy, time it,
and grade the output against a gold structure.

Grades are an automated stand-in for human judgements, computed from the
fact overlap between result and gold:

* NIL      no output at all
* Perfect  every fact matches both ways
* Okay     all gold facts present, plus extras
* Partial  no wrong facts, some gold facts missing
* Bad      anything else
"""
from __future__ import annotations

import csv
import io
import math
import os
import random
import tempfile
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .fitness import (DEFAULT_FITNESS, FitnessExpression, RankedExample, StatModel,
                      ranked_example, train_fitness, train_mi)
from .flex import ChunkSet, FlexConfig, flex_parse, restarts_parse, select_best
from .gp import GpParams
from .grammar import (ChildRef, Grammar, LexEntry, MakeFrame, ParseTable, Rule, SetSlot,
                      compile_tables, evaluate_action)
from .interlingua import (ATOM, FeatureStructure, FrameDecl, InterlinguaSpec, SlotDecl,
                          format_fs, load_spec, parse_fs, similarity, size, validate)
from .repair import evolve, exhaustive_best, needs_repair

BUCKETS = ("NIL", "Bad", "Partial", "Okay", "Perfect")


# ---------------------------------------------------------------------------
# corpus


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    tokens: tuple[str, ...]
    gold: FeatureStructure

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"corpus entry {self.id} has no tokens")

    def to_line(self) -> str:
        return f"{self.id}\t{' '.join(self.tokens)}\t{format_fs(self.gold)}"


def read_corpus(text: str, spec: InterlinguaSpec | None = None) -> list[CorpusEntry]:
    """Tab-separated ``id, tokens, gold literal``; ``#`` lines are comments."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"corpus line {lineno}: expected 3 tab-separated fields")
        entry = CorpusEntry(parts[0], tuple(parts[1].split()), parse_fs(parts[2]))
        if spec is not None:
            problems = validate(entry.gold, spec)
            if problems:
                raise ValueError(f"corpus line {lineno}: gold is invalid at {problems[0].path}: "
                                 f"{problems[0].message}")
        out.append(entry)
    return out


def load_corpus(path, spec: InterlinguaSpec | None = None) -> list[CorpusEntry]:
    return read_corpus(Path(path).read_text(encoding="utf-8"), spec)


def dump_corpus(entries: Iterable[CorpusEntry]) -> str:
    return "".join(e.to_line() + "\n" for e in entries)


# ---------------------------------------------------------------------------
# grading


def grade(result, gold: FeatureStructure) -> str:
    if result is None:
        return "NIL"
    s = similarity(result, gold)
    if s.precision == 1 and s.recall == 1:
        return "Perfect"
    if s.recall == 1:
        return "Okay"
    if s.precision == 1 and s.recall > 0:
        return "Partial"
    return "Bad"


# ---------------------------------------------------------------------------
# strategies


@dataclass(frozen=True)
class StrategyConfig:
    label: str
    flex: FlexConfig
    repair: bool = False

    def __post_init__(self):
        if self.repair and self.flex.mode != "restarts":
            raise ValueError("repair combines restart chunks; use restarts parsing")


STANDARD_STRATEGIES = (
    StrategyConfig("MDP 1", FlexConfig("mdp", 1)),
    StrategyConfig("MDP 3", FlexConfig("mdp", 3)),
    StrategyConfig("MDP 5", FlexConfig("mdp", 5)),
    StrategyConfig("GLR* with Restarts", FlexConfig("restarts")),
    StrategyConfig("GLR* with Restarts + Repair", FlexConfig("restarts"), repair=True),
)


def strategy_by_name(name: str) -> StrategyConfig:
    """``mdp1``/``mdp3``/``mdp5``/``restarts``/``repair`` or a full label;
    ``mdpK`` works for any K."""
    key = name.strip().lower().replace(" ", "")
    for s in STANDARD_STRATEGIES:
        if s.label.lower().replace(" ", "") == key:
            return s
    if key.startswith("mdp") and key[3:].isdigit():
        k = int(key[3:])
        return StrategyConfig(f"MDP {k}", FlexConfig("mdp", k))
    if key == "restarts":
        return STANDARD_STRATEGIES[3]
    if key == "repair":
        return STANDARD_STRATEGIES[4]
    if key == "skip":
        return StrategyConfig("GLR*", FlexConfig("skip"))
    if key in ("full", "full-parse"):
        return StrategyConfig("Full parse", FlexConfig("full-parse"))
    raise ValueError(f"unknown strategy {name!r}")


@dataclass(frozen=True)
class Artifacts:
    stats: StatModel | None = None
    fitness: FitnessExpression = DEFAULT_FITNESS
    params: GpParams = field(default_factory=GpParams)


def largest_chunk(chunks: ChunkSet):
    """Output of restarts without repair: the biggest chunk, then the one
    covering most tokens, then the leftmost."""
    if not len(chunks):
        return None
    best = min(enumerate(chunks.chunks), key=lambda ic: (-size(ic[1].value), -ic[1].covered, ic[0]))
    return best[1].value


@dataclass(frozen=True)
class SentenceResult:
    id: str
    bucket: str
    seconds: float
    repaired: bool = False
    result: FeatureStructure | None = None
    error: str | None = None


def process(tokens: Sequence[str], table: ParseTable, spec: InterlinguaSpec,
            strategy: StrategyConfig, artifacts: Artifacts | None = None):
    """Output structure (or None) and whether repair ran."""
    artifacts = artifacts or Artifacts()
    parsed = flex_parse(table, tokens, strategy.flex, spec)
    if isinstance(parsed, ChunkSet):
        if not len(parsed):
            return None, False
        if strategy.repair and needs_repair(parsed):
            hyps = evolve(parsed, spec, artifacts.fitness, artifacts.stats, artifacts.params)
            return hyps[0].result, True
        return largest_chunk(parsed), False
    best = select_best(parsed)
    return (best.value if best is not None else None), False


def run_strategy(corpus: Sequence[CorpusEntry], table: ParseTable, spec: InterlinguaSpec,
                 strategy: StrategyConfig, artifacts: Artifacts | None = None,
                 clock: Callable[[], float] = time.perf_counter) -> "StrategyReport":
    """Parse, optionally repair, time and grade every entry in order.

    A failure on one sentence is recorded as NIL with its error message.
    """
    rows = []
    for entry in corpus:
        t0 = clock()
        try:
            result, repaired = process(entry.tokens, table, spec, strategy, artifacts)
            error = None
        except Exception as exc:  # per-sentence faults never abort a run
            result, repaired, error = None, False, f"{type(exc).__name__}: {exc}"
        elapsed = clock() - t0
        rows.append(SentenceResult(entry.id, grade(result, entry.gold), elapsed, repaired,
                                   result, error))
    return StrategyReport(strategy.label, tuple(rows))


@dataclass(frozen=True)
class StrategyReport:
    label: str
    results: tuple[SentenceResult, ...]

    @property
    def n(self) -> int:
        return len(self.results)

    @property
    def counts(self) -> dict[str, int]:
        out = {b: 0 for b in BUCKETS}
        for r in self.results:
            out[r.bucket] += 1
        return out

    @property
    def percentages(self) -> dict[str, float]:
        n = self.n
        return {b: (100.0 * c / n if n else 0.0) for b, c in self.counts.items()}

    @property
    def times(self) -> list[float]:
        return [r.seconds for r in self.results]

    @property
    def total_time(self) -> float:
        return math.fsum(self.times)

    @property
    def mean_time(self) -> float:
        return self.total_time / self.n if self.n else 0.0

    @property
    def repairs(self) -> int:
        return sum(r.repaired for r in self.results)


def warm_up(table: ParseTable) -> None:
    """Build the table's and grammar's lazily computed indexes so that no
    strategy's timings include them."""
    for name in ("all_reductions", "reductions", "shifts", "accepts"):
        getattr(table, name)
    g = table.grammar
    for name in ("lexical_index", "min_yields", "nullable", "result_frames", "rules_for"):
        getattr(g, name)


def run_benchmark(corpus, table, spec, strategies=STANDARD_STRATEGIES, artifacts=None,
                  clock=time.perf_counter) -> list[StrategyReport]:
    warm_up(table)
    return [run_strategy(corpus, table, spec, s, artifacts, clock) for s in strategies]


# ---------------------------------------------------------------------------
# report files


def quality_csv(reports: Sequence[StrategyReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["strategy", *BUCKETS, "sentences"])
    for r in reports:
        pct = r.percentages
        w.writerow([r.label, *(f"{pct[b]:.1f}" for b in BUCKETS), r.n])
    return buf.getvalue()


def timing_csv(reports: Sequence[StrategyReport]) -> str:
    """One row per (strategy, sentence) with the cumulative time, which is
    the series a parse-time-per-corpus plot needs."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["strategy", "index", "id", "seconds", "cumulative_seconds"])
    for r in reports:
        total = 0.0
        for i, s in enumerate(r.results):
            total += s.seconds
            w.writerow([r.label, i, s.id, f"{s.seconds:.6f}", f"{total:.6f}"])
    return buf.getvalue()


def emit_report(reports: Sequence[StrategyReport], out_dir) -> tuple[Path, Path]:
    """Write ``quality.csv`` and ``timing.csv``; either both appear or neither."""
    if not reports or any(r.n == 0 for r in reports):
        raise ValueError("cannot report on an empty corpus")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"quality.csv": quality_csv(reports), "timing.csv": timing_csv(reports)}
    staged = []
    try:
        for name, text in payload.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out)
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            staged.append((tmp, out / name))
        for tmp, final in staged:
            os.replace(tmp, final)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
    return out / "quality.csv", out / "timing.csv"


# ---------------------------------------------------------------------------
# shipped scheduling domain


@dataclass(frozen=True)
class Domain:
    grammar: Grammar
    spec: InterlinguaSpec
    table: ParseTable
    stats: StatModel | None = None
    fitness: FitnessExpression | None = None

    def artifacts(self, params: GpParams | None = None) -> Artifacts:
        return Artifacts(self.stats, self.fitness or DEFAULT_FITNESS, params or GpParams())


def data_path(name: str) -> Path:
    return Path(str(resources.files("rose") / "data" / name))


def load_domain(grammar_path=None, spec_path=None, stats_path=None, fitness_path=None) -> Domain:
    """Grammar, spec and trained artifacts; defaults are the shipped
    scheduling files.  The table accepts every nonterminal so the same one
    serves restarts and whole-sentence parsing."""
    from .fitness import load_fitness, load_stats
    from .grammar import load_grammar

    shipped = grammar_path is None
    g = load_grammar(Path(grammar_path or data_path("scheduling.grammar")).read_text(encoding="utf-8"))
    spec = load_spec(Path(spec_path or data_path("scheduling.spec")).read_text(encoding="utf-8"))
    if stats_path is None and shipped:
        stats_path = data_path("scheduling.stats")
    if fitness_path is None and shipped:
        fitness_path = data_path("scheduling.fitness")
    stats = load_stats(stats_path) if stats_path and Path(stats_path).exists() else None
    fitness = load_fitness(fitness_path) if fitness_path and Path(fitness_path).exists() else None
    return Domain(g, spec, compile_tables(g, "all"), stats, fitness)


# ---------------------------------------------------------------------------
# training


def training_examples(corpus: Sequence[CorpusEntry], table: ParseTable, spec: InterlinguaSpec,
                      stats: StatModel | None, max_exhaustive: int = 5,
                      params: GpParams | None = None) -> list[RankedExample]:
    """Ranked hypothesis lists for sentences whose restarts parse needs
    repair.  Small chunk sets contribute every program up to depth 3,
    larger ones whatever an evolution run visits."""
    out = []
    for entry in corpus:
        chunks = restarts_parse(table, entry.tokens, spec)
        if not len(chunks) or not needs_repair(chunks):
            continue
        if len(chunks) <= max_exhaustive:
            hyps = exhaustive_best(chunks, spec, DEFAULT_FITNESS, stats, max_depth=3)
        else:
            hyps = evolve(chunks, spec, DEFAULT_FITNESS, stats, params)
        ex = ranked_example(hyps, entry.gold, stats)
        if ex is not None:
            out.append(ex)
    return out


def train_artifacts(corpus: Sequence[CorpusEntry], table: ParseTable, spec: InterlinguaSpec,
                    params: GpParams | None = None) -> tuple[StatModel, FitnessExpression]:
    stats = train_mi([e.gold for e in corpus], spec)
    examples = training_examples(corpus, table, spec, stats, params=params)
    if not examples:
        return stats, DEFAULT_FITNESS
    return stats, train_fitness(examples, params)


# ---------------------------------------------------------------------------
# synthetic domain


@dataclass(frozen=True)
class SyntheticSpec:
    categories: int = 12
    words_per_category: int = 4
    phrases: int = 20
    phrase_rules: int = 3
    clauses: int = 30
    clause_rules: int = 4
    sentences: int = 20
    sentence_rules: int = 4
    n_types: int = 4
    seed: int = 0


def _slots(*pairs) -> tuple[SetSlot, ...]:
    return tuple(SetSlot(slot, ChildRef(i)) for slot, i in pairs)


def synthetic_domain(shape: SyntheticSpec | None = None) -> tuple[Grammar, InterlinguaSpec]:
    """A layered, acyclic semantic grammar with its interlingua spec.

    Phrases (``A*``) build typed frames from two word categories, clauses
    (``B*``) combine phrases into frames with ARG1/ARG2 slots, and sentence
    nonterminals (``C*``) attach a phrase (EXTRA) or a second clause (NEXT)
    to a clause; sentences are C phrases.  The default shape has 280 rules.
    """
    shape = shape or SyntheticSpec()
    rng = random.Random(shape.seed)
    cats = [f"P{i}" for i in range(shape.categories)]
    lexicon = [LexEntry(f"w{i}x{j}", c, f"V{i}X{j}")
               for i, c in enumerate(cats) for j in range(shape.words_per_category)]
    atypes = [f"TA{i}" for i in range(shape.n_types)]
    rules: list[Rule] = []
    frames: dict[str, FrameDecl] = {}
    slots: dict[str, SlotDecl] = {c: SlotDecl(c, (ATOM,)) for c in cats}
    for role in ("ARG1", "ARG2", "EXTRA"):
        slots[role] = SlotDecl(role, tuple(atypes))
    slots["NEXT"] = SlotDecl("NEXT", ("TB",))

    def add(lhs, rhs, action):
        rules.append(Rule(len(rules), lhs, tuple(rhs), action))

    a_nts = [f"A{i}" for i in range(shape.phrases)]
    for i, nt in enumerate(a_nts):
        used: list[str] = []
        for _ in range(shape.phrase_rules):
            x, y = rng.sample(cats, 2)
            used += [c for c in (x, y) if c not in used]
            add(nt, (x, y), MakeFrame(f"*A{i}", _slots((x, 1), (y, 2))))
        frames[f"*A{i}"] = FrameDecl(f"*A{i}", atypes[i % shape.n_types], tuple(used))

    b_nts = [f"B{i}" for i in range(shape.clauses)]
    for i, nt in enumerate(b_nts):
        used = ["ARG1", "ARG2", "EXTRA", "NEXT"]
        for r in range(shape.clause_rules):
            x, y = rng.sample(a_nts, 2)
            c = rng.choice(cats)
            form = r % 3
            if form == 0:
                add(nt, (x, y), MakeFrame(f"*B{i}", _slots(("ARG1", 1), ("ARG2", 2))))
            elif form == 1:
                add(nt, (x, c, y), MakeFrame(f"*B{i}", _slots(("ARG1", 1), (c, 2), ("ARG2", 3))))
            else:
                add(nt, (c, x), MakeFrame(f"*B{i}", _slots((c, 1), ("ARG1", 2))))
            if form and c not in used:
                used.append(c)
        frames[f"*B{i}"] = FrameDecl(f"*B{i}", "TB", tuple(used))

    c_nts = [f"C{i}" for i in range(shape.sentences)]
    for nt in c_nts:
        for r in range(shape.sentence_rules):
            if r % 2 == 0:
                b, a = rng.choice(b_nts), rng.choice(a_nts)
                add(nt, (b, a), SetSlot("EXTRA", ChildRef(2), ChildRef(1)))
            else:
                b1, b2 = rng.sample(b_nts, 2)
                add(nt, (b1, b2), SetSlot("NEXT", ChildRef(2), ChildRef(1)))

    for nt in c_nts:
        add("S", (nt,), ChildRef(1))

    g = Grammar("S", tuple(rules), tuple(lexicon), (), ())
    spec = InterlinguaSpec(frames, slots, tuple(atypes) + ("TB",))
    return g, spec


def sample_sentence(g: Grammar, rng: random.Random, spec: InterlinguaSpec | None = None,
                    symbol: str | None = None) -> tuple[list[str], object]:
    """Random derivation from ``symbol``: tokens and the structure built."""
    symbol = symbol or g.start
    if symbol not in g.rules_for:
        words = [e for e in g.lexicon if e.category == symbol]
        if not words:
            return [symbol], symbol
        e = rng.choice(words)
        return [e.token], e.value
    rule = rng.choice(g.rules_for[symbol])
    tokens, children = [], []
    for s in rule.rhs:
        t, v = sample_sentence(g, rng, spec, s)
        tokens += t
        children.append(v)
    return tokens, evaluate_action(rule.action, children, spec)


def corrupt(tokens: Sequence[str], rng: random.Random, vocabulary: Sequence[str],
            p_delete: float = 0.1, p_insert: float = 0.1, p_foreign: float = 0.1) -> list[str]:
    """Drop tokens, insert known words, and insert unknown words; never
    returns an empty list."""
    out: list[str] = []
    for tok in tokens:
        if rng.random() >= p_delete:
            out.append(tok)
        if rng.random() < p_insert:
            out.append(rng.choice(vocabulary))
        if rng.random() < p_foreign:
            out.append(f"zz{rng.randrange(1000)}")
    return out or [tokens[0]]


def generate_corpus(g: Grammar, spec: InterlinguaSpec, n: int, seed: int = 0,
                    p_delete: float = 0.1, p_insert: float = 0.1, p_foreign: float = 0.1,
                    prefix: str = "s") -> list[CorpusEntry]:
    """Sampled sentences, corrupted, paired with the structure of the
    uncorrupted sentence."""
    rng = random.Random(seed)
    vocab = sorted({e.token for e in g.lexicon})
    width = len(str(max(n, 1)))
    out = []
    for i in range(n):
        tokens, gold = sample_sentence(g, rng, spec)
        noisy = corrupt(tokens, rng, vocab, p_delete, p_insert, p_foreign)
        out.append(CorpusEntry(f"{prefix}{i:0{width}d}", tuple(noisy), gold))
    return out
