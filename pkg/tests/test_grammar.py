import math

import pytest

from oracles import min_yield_by_enumeration, textbook_slr
from rose.grammar import (
    ANY,
    ActionError,
    ChildRef,
    GrammarError,
    cached_tables,
    compile_tables,
    dump_grammar,
    dump_table,
    evaluate_action,
    load_grammar,
    load_table,
    min_yield,
    parse_action,
)
from rose.interlingua import parse_fs

SLR_GRAMMARS = {
    "single": "%start S\n%terminal a\nS -> a\n",
    "expression": """%start E
%terminal plus times lp rp id
E -> E plus T
E -> T
T -> T times F
T -> F
F -> lp E rp
F -> id
""",
    "lists": """%start L
%terminal a comma
L -> L comma I
L -> I
I -> a
""",
    "nullable": """%start S
%terminal a b c
S -> A B c
A -> a
A ->
B -> b B
B ->
""",
    "balanced": """%start S
%terminal lp rp
S -> lp S rp S
S ->
""",
}


def _cells(table):
    """(kernel, terminal, action) triples with textbook item numbering."""
    n = len(table.grammar.rules)
    out = set()
    for q, items in enumerate(table.items):
        kernel = frozenset((0 if r >= n else r + 1, d) for r, d in items if d > 0 or r >= n)
        for a, acts in table.actions[q].items():
            for x in acts:
                if x.kind == "reduce":
                    out.add((kernel, a, f"reduce {x.arg}"))
                else:
                    out.add((kernel, a, x.kind))
    return out


class TestLoad:
    def test_minimal(self):
        g = load_grammar("%start S\n%terminal a\nS -> a\n")
        assert g.start == "S" and len(g.rules) == 1

    def test_undefined_symbol(self):
        with pytest.raises(GrammarError) as err:
            load_grammar("%start S\n%terminal a\nS -> a Q\n")
        assert err.value.kind == "undefined-symbol"

    def test_start_without_rule(self):
        with pytest.raises(GrammarError):
            load_grammar("%start X\n%terminal a\nS -> a\n")

    def test_cyclic_grammar_rejected(self):
        with pytest.raises(GrammarError) as err:
            load_grammar("%start S\n%terminal a\nS -> A\nS -> a\nA -> S\n")
        assert err.value.kind == "cyclic"

    def test_action_reference_out_of_range(self):
        with pytest.raises(GrammarError) as err:
            load_grammar("%start S\n%terminal a\nS -> a : $2\n")
        assert err.value.kind == "bad-action"

    def test_lexicon_value(self, domain):
        g = domain.grammar
        (reading,) = g.lookup("out")
        assert reading[1] == parse_fs("((FRAME *RESPOND) (TYPE NEGATIVE) (DEGREE NORMAL))")

    def test_declared_terminal_reads_as_itself(self, domain):
        assert domain.grammar.lookup("how") == (("how", "how"),)
        assert domain.grammar.lookup("zzz") == ()

    @pytest.mark.parametrize("name", sorted(SLR_GRAMMARS))
    def test_round_trip(self, name):
        g = load_grammar(SLR_GRAMMARS[name])
        assert load_grammar(dump_grammar(g)) == g

    def test_round_trip_with_actions(self, domain, toy_grammar):
        for g in (domain.grammar, toy_grammar):
            assert load_grammar(dump_grammar(g)) == g


class TestActions:
    def test_identity(self):
        x = parse_fs("((FRAME *I) (ROOT I))")
        assert evaluate_action(ChildRef(1), [x]) is x

    def test_make_frame_from_atom(self, domain):
        t = parse_action("(make-frame *SIMPLE-TIME (TIME-OF-DAY $1) (NUMBER PLURAL) (SIMPLE-UNIT-NAME TOD))")
        got = evaluate_action(t, ["MORNING"], domain.spec)
        assert got == parse_fs("((TIME-OF-DAY MORNING) (NUMBER PLURAL) (FRAME *SIMPLE-TIME) (SIMPLE-UNIT-NAME TOD))")

    def test_ill_typed_result_is_refused(self, domain):
        t = parse_action("(make-frame *RESPOND (WHEN $1))")
        with pytest.raises(ActionError):
            evaluate_action(t, ["MORNING"], domain.spec)

    def test_set_slot(self, domain):
        t = parse_action("(set-slot $2 WHEN $1)")
        time = parse_fs("((FRAME *SIMPLE-TIME) (TIME-OF-DAY MORNING))")
        resp = parse_fs("((FRAME *RESPOND) (TYPE NEGATIVE))")
        assert evaluate_action(t, [time, resp], domain.spec)["WHEN"] == time


class TestTables:
    def test_single_rule_has_three_states(self):
        t = compile_tables(load_grammar(SLR_GRAMMARS["single"]))
        assert t.n_states == 3
        assert t.conflicts() == []

    def test_ambiguous_grammar_has_shift_reduce_cell(self):
        g = load_grammar("%start E\n%terminal plus a\nE -> E plus E\nE -> a\n")
        t = compile_tables(g)
        kinds = [{x.kind for x in t.actions[q][a]} for q, a in t.conflicts()]
        assert {"shift", "reduce"} in kinds

    @pytest.mark.parametrize("name", sorted(SLR_GRAMMARS))
    def test_matches_textbook_construction(self, name):
        g = load_grammar(SLR_GRAMMARS[name])
        t = compile_tables(g)
        n_states, cells = textbook_slr(g)
        assert t.n_states == n_states
        assert _cells(t) == cells
        assert t.conflicts() == []

    def test_toy_grammar_matches_textbook_including_conflicts(self, toy_grammar, toy_table):
        n_states, cells = textbook_slr(toy_grammar)
        assert toy_table.n_states == n_states
        assert _cells(toy_table) == cells
        assert toy_table.conflicts()  # prepositional attachment

    def test_deterministic_serialisation(self, domain):
        a = dump_table(compile_tables(domain.grammar, "all"))
        b = dump_table(compile_tables(load_grammar(dump_grammar(domain.grammar)), "all"))
        assert a == b

    def test_table_file_round_trip(self, toy_grammar, toy_table_all):
        again = load_table(dump_table(toy_table_all), toy_grammar)
        assert dump_table(again) == dump_table(toy_table_all)
        assert again.entries == toy_table_all.entries

    def test_table_file_for_other_grammar_rejected(self, toy_table_all, domain):
        with pytest.raises(ValueError):
            load_table(dump_table(toy_table_all), domain.grammar)

    def test_cached_tables(self, tmp_path, toy_grammar):
        path = tmp_path / "toy.table"
        first = cached_tables(toy_grammar, path, "all")
        assert path.exists()
        again = cached_tables(toy_grammar, path, "all")
        assert dump_table(again) == dump_table(first)

    def test_all_entries(self, toy_grammar, toy_table_all):
        assert set(toy_table_all.entries) == set(toy_grammar.nonterminals) | {ANY}

    def test_unknown_entry(self, toy_grammar):
        with pytest.raises(GrammarError):
            compile_tables(toy_grammar, ["NOPE"])


class TestMinYield:
    def test_single_terminal(self):
        g = load_grammar("%start S\n%terminal a\nS -> a\n")
        assert min_yield(g, "S") == 1

    def test_additive(self):
        g = load_grammar("%start S\n%terminal a b\nS -> A B\nA -> a\nB -> b\n")
        assert min_yield(g, "S") == 2

    def test_recursive_alternative(self):
        g = load_grammar("%start N\n%terminal a b c\nN -> a b c\nN -> N a\n")
        assert min_yield(g, "N") == 3 == min_yield_by_enumeration(g, "N")

    def test_nullable(self):
        g = load_grammar(SLR_GRAMMARS["nullable"])
        assert min_yield(g, "A") == 0 and min_yield(g, "S") == 1

    def test_nonproductive(self):
        g = load_grammar("%start S\n%terminal a\nS -> a\nS -> X\nX -> a X\n")
        assert g.min_yields["X"] == math.inf
        with pytest.raises(GrammarError):
            min_yield(g, "X")

    @pytest.mark.parametrize("which", ["toy", "scheduling"] + sorted(SLR_GRAMMARS))
    def test_fixpoint_agrees_with_enumeration(self, which, toy_grammar, domain):
        g = {"toy": toy_grammar, "scheduling": domain.grammar}.get(which)
        if g is None:
            g = load_grammar(SLR_GRAMMARS[which])
        for nt in g.nonterminals:
            assert g.min_yields[nt] == min_yield_by_enumeration(g, nt)

    def test_fixpoint_equation(self, domain):
        g = domain.grammar
        cost = lambda s: g.min_yields[s] if s in g.rules_for else 1  # noqa: E731
        for nt, rules in g.rules_for.items():
            assert g.min_yields[nt] == min(sum(cost(s) for s in r.rhs) for r in rules)
