import math
import random

import numpy as np
import pytest

from rose.fitness import (
    DEFAULT_FITNESS,
    FeatureTriple,
    FitnessExpression,
    RankedExample,
    StatModel,
    ideal_rank,
    load_fitness,
    load_stats,
    pairwise_accuracy,
    ranked_example,
    score_features,
    train_fitness,
    train_mi,
)
from rose.gp import GpParams, stopping_rule
from rose.interlingua import ATOM, InterlinguaError, load_spec, parse_fs
from rose.repair import eval_program, parse_program
from rose.flex import restarts_parse

TINY_SPEC = load_spec("""
frame *R RESPONSE : WHEN KIND
frame *T TEMPORAL : PART
frame *D DEMONSTRATIVE : ROOT
slot WHEN : TEMPORAL DEMONSTRATIVE
slot KIND : ATOM
slot PART : ATOM
slot ROOT : ATOM
""")

TEN = [
    "((FRAME *R) (WHEN ((FRAME *T) (PART AM))) (KIND NO))",
    "((FRAME *R) (WHEN ((FRAME *T) (PART PM))))",
    "((FRAME *R) (WHEN ((FRAME *T))) (KIND YES))",
    "((FRAME *R) (KIND NO))",
    "((FRAME *T) (PART AM))",
    "((FRAME *D) (ROOT THAT))",
    "((FRAME *R) (WHEN ((FRAME *D) (ROOT THAT))))",
    "((FRAME *R) (WHEN ((FRAME *T) (PART AM))))",
    "((FRAME *T))",
    "((FRAME *R) (WHEN ((FRAME *T) (PART PM))) (KIND YES))",
]


def manual_mi(structures, slot, filler_type):
    """Count (slot, filler type) events by hand and apply the add-one PMI
    formula; everything in plain floats."""
    slots = ["WHEN", "KIND", "PART", "ROOT"]
    types = ["RESPONSE", "TEMPORAL", "DEMONSTRATIVE", ATOM]
    counts = {(s, t): 1.0 for s in slots for t in types}
    type_of = {"*R": "RESPONSE", "*T": "TEMPORAL", "*D": "DEMONSTRATIVE"}

    def walk(fs):
        for name, value in fs.slots:
            if hasattr(value, "frame"):
                counts[name, type_of[value.frame]] += 1
                walk(value)
            else:
                counts[name, ATOM] += 1

    for fs in structures:
        walk(fs)
    total = sum(counts.values())
    p_st = counts[slot, filler_type] / total
    p_s = sum(counts[slot, t] for t in types) / total
    p_t = sum(counts[s, filler_type] for s in slots) / total
    return math.log2(p_st / (p_s * p_t))


@pytest.fixture(scope="module")
def ten():
    return [parse_fs(x) for x in TEN]


class TestTrainMi:
    @pytest.mark.parametrize("slot", ["WHEN", "KIND", "PART", "ROOT"])
    @pytest.mark.parametrize("filler_type", ["RESPONSE", "TEMPORAL", "DEMONSTRATIVE", ATOM])
    def test_matches_hand_computation(self, ten, slot, filler_type):
        model = train_mi(ten, TINY_SPEC)
        assert model.score(slot, filler_type) == pytest.approx(manual_mi(ten, slot, filler_type), abs=1e-12)

    def test_probabilities_sum_to_one(self, ten):
        model = train_mi(ten, TINY_SPEC)
        assert model.joint.sum() == pytest.approx(1.0)
        assert (model.joint > 0).all()

    def test_perfect_association_is_row_maximum(self):
        corpus = [parse_fs("((FRAME *R) (WHEN ((FRAME *T))))")] * 5 + [parse_fs("((FRAME *R) (KIND NO))")] * 5
        model = train_mi(corpus, TINY_SPEC)
        row = {t: model.score("WHEN", t) for t in model.types}
        assert max(row, key=row.get) == "TEMPORAL"

    def test_unseen_pair_is_negative(self, ten):
        model = train_mi(ten, TINY_SPEC)
        assert model.score("KIND", "TEMPORAL") < 0

    def test_permutation_invariant(self, ten):
        shuffled = list(ten)
        random.Random(3).shuffle(shuffled)
        assert train_mi(shuffled, TINY_SPEC) == train_mi(ten, TINY_SPEC)

    def test_invalid_structure(self):
        with pytest.raises(InterlinguaError):
            train_mi([parse_fs("((FRAME *T) (WHEN ((FRAME *T))))")], TINY_SPEC)

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            train_mi([], TINY_SPEC)

    def test_unknown_pair_scores_zero(self, ten):
        assert train_mi(ten, TINY_SPEC).score("NOPE", "TEMPORAL") == 0.0

    def test_text_round_trip(self, ten, tmp_path):
        model = train_mi(ten, TINY_SPEC)
        path = tmp_path / "m.stats"
        path.write_text(model.to_text())
        again = load_stats(path)
        assert again == model
        np.testing.assert_array_equal(again.mi, model.mi)

    def test_bad_header(self):
        with pytest.raises(ValueError):
            StatModel.from_text("something else\n")

    def test_shipped_statistics(self, domain):
        assert domain.stats.score("WHEN", "TEMPORAL") > 0 > domain.stats.score("WHEN", "DEMONSTRATIVE")


@pytest.fixture(scope="module")
def wipes_hyps(domain, wipes_tokens):
    chunks = restarts_parse(domain.table, wipes_tokens, domain.spec)
    run = lambda text: eval_program(parse_program(text), chunks, domain.spec, domain.stats)  # noqa: E731
    return {
        "ideal": run("(MY-COMB #1 #3 WHEN)"),
        "extra": run("(MY-COMB (MY-COMB #1 #3 WHEN) #0 WHEN)"),
        "partial": run("(MY-COMB #3 #1 ??)"),
        "bare": run("#3"),
    }


class TestFeatures:
    def test_ideal(self, wipes_hyps, domain):
        f = score_features(wipes_hyps["ideal"], domain.stats)
        assert (f.n_ops, f.size_score) == (1, 7)
        assert f.avg_stat == domain.stats.score("WHEN", "TEMPORAL")

    def test_bare_chunk(self, wipes_hyps, domain):
        assert score_features(wipes_hyps["bare"], domain.stats) == (0, 4, 0.0)

    def test_nested(self, wipes_hyps, domain):
        f = score_features(wipes_hyps["extra"], domain.stats)
        assert f.n_ops == 2
        expected = (domain.stats.score("WHEN", "TEMPORAL") + domain.stats.score("WHEN", "DEMONSTRATIVE")) / 2
        assert f.avg_stat == pytest.approx(expected)

    def test_fallback_has_no_statistic(self, wipes_hyps, domain):
        assert score_features(wipes_hyps["partial"], domain.stats).avg_stat == 0.0

    def test_trace_scores_without_model(self, wipes_hyps, domain):
        h = wipes_hyps["ideal"]
        assert score_features(h) == score_features(h, domain.stats)


class TestIdealRank:
    def test_ideal_first(self, wipes_hyps):
        gold = wipes_hyps["ideal"].result
        order = ideal_rank([wipes_hyps["partial"], wipes_hyps["extra"], wipes_hyps["ideal"]], gold)
        # f1: ideal 1, extra 0.8 (12 paths, 8 shared), partial 2/3 (4 of 8)
        assert [h is wipes_hyps[k] for h, k in zip(order, ["ideal", "extra", "partial"])] == [True] * 3

    def test_stable_for_identical(self, wipes_hyps):
        h = wipes_hyps["ideal"]
        hyps = [h, h, h]
        assert ideal_rank(hyps, h.result) == hyps

    def test_ranked_example(self, wipes_hyps, domain):
        gold = wipes_hyps["ideal"].result
        ex = ranked_example(list(wipes_hyps.values()), gold, domain.stats)
        assert ex.features[0] == score_features(wipes_hyps["ideal"], domain.stats)
        assert list(ex.scores) == sorted(ex.scores, reverse=True)
        assert ranked_example([wipes_hyps["ideal"]], gold) is None


class TestExpressions:
    def test_default_is_size_minus_ops_plus_stat(self):
        assert str(DEFAULT_FITNESS) == "(+ (- x2 x1) x3)"
        assert DEFAULT_FITNESS(FeatureTriple(1, 7, 2.0)) == 8.0

    def test_protected_division(self):
        e = FitnessExpression.parse("(/ x2 x1)")
        assert e(FeatureTriple(0, 5, 0.0)) == 1.0
        assert e(FeatureTriple(2, 5, 0.0)) == 2.5

    def test_vectorised(self):
        e = FitnessExpression.parse("(* x3 (+ x2 -1))")
        x = np.array([[1, 2, 3], [0, 4, 0.5]], dtype=float)
        np.testing.assert_allclose(e.evaluate(x), [3.0, 1.5])

    def test_text_round_trip(self, tmp_path):
        e = FitnessExpression.parse("(+ (+ (* x3 (+ x2 x3)) -1) (+ x2 x2))")
        path = tmp_path / "f.fitness"
        path.write_text(e.to_text())
        assert load_fitness(path) == e
        assert e.size == 11 and e.depth == 4

    def test_bad_text(self):
        with pytest.raises(ValueError):
            FitnessExpression.from_text("nope\n(+ x1 x2)\n")
        with pytest.raises(ValueError):
            FitnessExpression.parse("(% x1 x2)")
        with pytest.raises(ValueError):
            FitnessExpression.parse("x4")

    def test_shipped_fitness_prefers_ideal(self, wipes_hyps, domain):
        scores = {k: domain.fitness(score_features(h, domain.stats)) for k, h in wipes_hyps.items()}
        assert max(scores, key=scores.get) == "ideal"


def _synthetic_examples(rng, n, target, size=5):
    out = []
    for _ in range(n):
        feats = [FeatureTriple(rng.randint(0, 3), rng.randint(1, 12), rng.uniform(-2, 3)) for _ in range(size)]
        feats.sort(key=target, reverse=True)
        out.append(RankedExample(tuple(feats), tuple(target(f) for f in feats)))
    return out


class TestTrainFitness:
    def test_single_feature_ordering_is_learned_exactly(self):
        rng = random.Random(1)
        examples = _synthetic_examples(rng, 30, lambda f: f.size_score)
        expr = train_fitness(examples, GpParams(seed=0))
        assert pairwise_accuracy(expr, examples) == 1.0

    def test_hidden_target(self):
        rng = random.Random(2)
        target = lambda f: f.size_score - f.n_ops + f.avg_stat  # noqa: E731
        train = _synthetic_examples(rng, 40, target)
        held_out = _synthetic_examples(rng, 40, target)
        expr = train_fitness(train, GpParams(seed=0))
        assert pairwise_accuracy(expr, held_out) >= 0.9

    def test_degenerate_tied_example(self):
        ex = RankedExample((FeatureTriple(1, 2, 0.0), FeatureTriple(1, 2, 0.0)))
        assert ex.pairs() == []
        expr = train_fitness([ex], GpParams(seed=0))
        assert isinstance(expr, FitnessExpression)
        assert pairwise_accuracy(expr, [ex]) == 1.0

    def test_at_least_as_good_as_every_raw_feature(self):
        rng = random.Random(4)
        target = lambda f: f.avg_stat * f.size_score - 2 * f.n_ops  # noqa: E731
        examples = _synthetic_examples(rng, 30, target)
        expr = train_fitness(examples, GpParams(seed=3, generations=5))
        learned = pairwise_accuracy(expr, examples)
        for i in (1, 2, 3):
            for text in (f"x{i}", f"(* -1 x{i})"):
                assert learned >= pairwise_accuracy(FitnessExpression.parse(text), examples)

    def test_seeded(self):
        rng = random.Random(5)
        examples = _synthetic_examples(rng, 20, lambda f: f.avg_stat - f.n_ops)
        a = train_fitness(examples, GpParams(seed=9))
        b = train_fitness(examples, GpParams(seed=9))
        assert a == b

    def test_needs_examples(self):
        with pytest.raises(ValueError):
            train_fitness([])

    def test_short_example_rejected(self):
        with pytest.raises(ValueError):
            RankedExample((FeatureTriple(1, 2, 0.0),))


class TestStoppingRule:
    def test_flat_for_patience(self):
        p = GpParams(generations=50, patience=5)
        assert not stopping_rule([1.0, 2.0, 2.0, 2.0, 2.0, 2.0], GpParams(generations=50, patience=6))
        assert stopping_rule([1.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0], p)

    def test_generation_cap(self):
        p = GpParams(generations=4, patience=10)
        assert stopping_rule([1.0, 2.0, 3.0, 4.0], p)

    def test_improving_continues(self):
        p = GpParams(generations=10, patience=2)
        history = []
        for g in range(9):
            history.append(float(g))
            assert not stopping_rule(history, p)
        history.append(9.0)
        assert stopping_rule(history, p)

    def test_params_validated(self):
        with pytest.raises(ValueError):
            GpParams(population=1)
        with pytest.raises(ValueError):
            GpParams(crossover_rate=1.5)

    def test_params_mapping_round_trip(self):
        p = GpParams(seed=4, population=12)
        assert GpParams.from_mapping(p.to_dict()) == p
        assert p.replace(seed=5).seed == 5
