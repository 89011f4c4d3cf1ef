"""Randomised checks of the invariants, 1000 examples per property."""
import random

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import TOY_WORDS
from rose.fitness import FeatureTriple, FitnessExpression, RankedExample, score_features, train_fitness, train_mi
from rose.flex import FlexConfig, mdp_parse, restarts_parse
from rose.gp import GpParams
from rose.grammar import dump_grammar, load_grammar
from rose.harness import load_domain
from rose.interlingua import (
    ATOM,
    FeatureStructure,
    MergeClash,
    Multiple,
    NoSlot,
    facts,
    format_fs,
    insert,
    is_valid,
    merge,
    parse_fs,
    similarity,
    size,
)
from rose.repair import eval_program, evolve, random_program

DOMAIN = load_domain()
SPEC = DOMAIN.spec
ATOMS = ["MORNING", "PLURAL", "TOD", "NEGATIVE", "NORMAL", "THAT", "PRONOUN", "I", "MONDAY", "DEFINITE"]
FRAMES = sorted(SPEC.frames)

MANY = settings(max_examples=1000, deadline=None, suppress_health_check=list(HealthCheck))


def _frames_admitted(slot):
    decl = SPEC.slots[slot]
    return [f for f in FRAMES if f in decl.fillers or SPEC.frames[f].type in decl.fillers]


@st.composite
def structures(draw, depth=2, frame=None):
    """Spec-valid feature structures."""
    frame = frame or draw(st.sampled_from(FRAMES))
    slots = []
    for slot in SPEC.slots_for(frame):
        if not draw(st.booleans()):
            continue
        decl = SPEC.slots[slot]
        if ATOM in decl.fillers:
            slots.append((slot, draw(st.sampled_from(ATOMS))))
            continue
        if depth == 0:
            continue
        options = _frames_admitted(slot)
        kids = draw(st.lists(st.sampled_from(options), min_size=1, max_size=2))
        values = [draw(structures(depth - 1, k)) for k in kids]
        if len(values) == 2 and values[0] != values[1]:
            slots.append((slot, Multiple(values)))
        else:
            slots.append((slot, values[0]))
    return FeatureStructure(frame, slots)


toy_tokens = st.lists(st.sampled_from(TOY_WORDS + ["zz"]), min_size=1, max_size=7)
features = st.builds(FeatureTriple, st.integers(0, 4), st.integers(1, 15),
                     st.floats(-3, 3, allow_nan=False).map(lambda x: round(x, 3)))


# ---------------------------------------------------------------------------
# interlingua


@MANY
@given(structures(), structures())
def test_insert_keeps_structures_valid(parent, child):
    assert is_valid(parent, SPEC) and is_valid(child, SPEC)
    try:
        result, slot = insert(parent, child, SPEC, DOMAIN.stats)
    except NoSlot:
        return
    assert is_valid(result, SPEC)
    if slot not in parent:
        assert size(result) == size(parent) + size(child)


@MANY
@given(structures(), structures())
def test_merge_commutes_up_to_order(a, b):
    try:
        ab = merge(a, b, SPEC)
    except MergeClash:
        with pytest.raises(MergeClash):
            merge(b, a, SPEC)
        return
    ba = merge(b, a, SPEC)
    assert facts(ab) == facts(ba)
    assert ab == ba


@MANY
@given(structures(), structures())
def test_similarity_symmetry(a, b):
    ab, ba = similarity(a, b), similarity(b, a)
    assert ab.precision == ba.recall and ab.recall == ba.precision
    assert 0 <= ab.f1 <= 1


@MANY
@given(structures())
def test_literal_round_trip(fs):
    assert parse_fs(format_fs(fs)) == fs
    assert parse_fs(format_fs(fs, pretty=True)) == fs


@MANY
@given(structures())
def test_merge_with_self_is_identity(a):
    assert merge(a, a, SPEC) == a


# ---------------------------------------------------------------------------
# parsing


@pytest.fixture(scope="module")
def toy():
    from conftest import TOY_GRAMMAR
    from rose.grammar import compile_tables

    g = load_grammar(TOY_GRAMMAR)
    return compile_tables(g), compile_tables(g, "all")


@MANY
@given(toy_tokens, st.integers(0, 4))
def test_penalty_arithmetic(toy, tokens, k):
    table, _ = toy
    for a in mdp_parse(table, tokens, FlexConfig("mdp", k)):
        assert a.deviation_penalty == len(a.skipped) + sum(p for _, p in a.inserted) <= k
        assert all(p >= 1 for _, p in a.inserted)
        assert a.span == (0, len(tokens))


@MANY
@given(toy_tokens, st.integers(0, 3))
def test_mdp_subset_in_bound(toy, tokens, k):
    table, _ = toy
    small = {(a.value, a.deviation_penalty) for a in mdp_parse(table, tokens, FlexConfig("mdp", k, beam_width=None))}
    large = {(a.value, a.deviation_penalty) for a in mdp_parse(table, tokens, FlexConfig("mdp", k + 1, beam_width=None))}
    assert small <= large


@MANY
@given(toy_tokens)
def test_restart_segments_cover_input(toy, tokens):
    _, table = toy
    chunks = restarts_parse(table, tokens)
    seen = sorted([i for c in chunks for i in range(*c.span)] + list(chunks.uncovered))
    assert seen == list(range(len(tokens)))


# ---------------------------------------------------------------------------
# repair and fitness


@MANY
@given(st.lists(structures(depth=1), min_size=1, max_size=4), st.integers(0, 2 ** 16))
def test_evolve_is_seeded(chunks, seed):
    params = GpParams(population=8, generations=3, seed=seed, elites=1, tournament=2)
    a = evolve(chunks, SPEC, DOMAIN.fitness, DOMAIN.stats, params)
    b = evolve(chunks, SPEC, DOMAIN.fitness, DOMAIN.stats, params)
    assert [(h.program, h.result, h.fitness) for h in a] == [(h.program, h.result, h.fitness) for h in b]
    for h in a:
        assert is_valid(h.result, SPEC)


@MANY
@given(st.lists(structures(depth=1), min_size=1, max_size=4), st.integers(0, 2 ** 16))
def test_insert_free_hypotheses_have_zero_statistic(chunks, seed):
    rng = random.Random(seed)
    subset = rng.sample(range(len(chunks)), rng.randint(1, len(chunks)))
    h = eval_program(random_program(rng, subset, 3), chunks, SPEC, DOMAIN.stats)
    f = score_features(h, DOMAIN.stats)
    if not any(step.kind == "insert" for step in h.trace):
        assert f.avg_stat == 0.0
    assert f.n_ops == len(subset) - 1


@MANY
@given(st.lists(st.lists(features, min_size=2, max_size=5), min_size=1, max_size=4), st.integers(0, 2 ** 16))
def test_train_fitness_is_seeded(groups, seed):
    examples = [RankedExample(tuple(g)) for g in groups]
    params = GpParams(population=8, generations=3, seed=seed, elites=1, tournament=2)
    assert train_fitness(examples, params) == train_fitness(examples, params)


@MANY
@given(st.lists(features, min_size=2, max_size=8),
       st.floats(0.01, 100, allow_nan=False), st.floats(-100, 100, allow_nan=False))
def test_ranking_survives_positive_affine_maps(feats, a, b):
    e = FitnessExpression.parse("(+ (- x2 x1) x3)")
    scaled = FitnessExpression.parse(f"(+ (* {a!r} (+ (- x2 x1) x3)) {b!r})")
    x = np.array([f.as_array() for f in feats])
    u, v = e.evaluate(x), scaled.evaluate(x)
    order = np.argsort(-u, kind="stable")
    # only compare where the plain scores are clearly apart
    for i, j in zip(order, order[1:]):
        if u[i] - u[j] > 1e-6:
            assert v[i] > v[j]


@MANY
@given(st.lists(structures(), min_size=1, max_size=6), st.randoms(use_true_random=False))
def test_train_mi_ignores_corpus_order(corpus, rnd):
    shuffled = list(corpus)
    rnd.shuffle(shuffled)
    assert train_mi(corpus, SPEC) == train_mi(shuffled, SPEC)


# ---------------------------------------------------------------------------
# grammars


@st.composite
def grammars(draw):
    """Small random acyclic grammars; rule i of A may only use later
    nonterminals in unit position, which rules out A =>+ A."""
    nts = ["S", "A", "B", "C"]
    terms = ["a", "b", "c"]
    lines = ["%start S", "%terminal " + " ".join(terms)]
    for i, nt in enumerate(nts):
        later = nts[i + 1:]
        lines.append(f"{nt} -> {draw(st.sampled_from(terms))}")
        for _ in range(draw(st.integers(0, 2))):
            n = draw(st.integers(1, 3))
            pool = terms + nts if n > 1 else terms + later
            rhs = [draw(st.sampled_from(pool)) for _ in range(n)]
            lines.append(f"{nt} -> {' '.join(rhs)}")
    return "\n".join(lines) + "\n"


@MANY
@given(grammars())
def test_grammar_round_trip_and_fixpoint(text):
    g = load_grammar(text)
    assert load_grammar(dump_grammar(g)) == g
    cost = lambda s: g.min_yields[s] if s in g.rules_for else 1  # noqa: E731
    for nt, rules in g.rules_for.items():
        assert g.min_yields[nt] == min(sum(cost(s) for s in r.rhs) for r in rules)
