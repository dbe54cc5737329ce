from fractions import Fraction

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from tautodensity.logic import (
    BASES, Cat, Categorizer, FormulaSyntaxError, Impl, Neg, SimpleKind, Strength, Var,
    category_classify, classify_simple, enumerate_formulas, falsity_mask, formulas_by_length,
    full_mask, in_s1, in_s1_or_s2, is_antilogy, is_tautology, is_type_formula, norm_stats,
    parse_formula, permute_mask, permute_vars, premise_chain, render_formula, type_of,
    variables,
)

X0, X1, X2 = Var(0), Var(1), Var(2)


def truth_table_mask(phi, m):
    """Independent evaluator: walk the tree per assignment."""

    def value(node, t):
        if isinstance(node, Var):
            return bool((t >> node.index) & 1)
        if isinstance(node, Neg):
            return not value(node.child, t)
        return (not value(node.left, t)) or value(node.right, t)

    return sum(1 << t for t in range(1 << m) if not value(phi, t))


def formulas(m, max_depth=5):
    leaf = st.integers(0, m - 1).map(Var)
    return st.recursive(
        leaf,
        lambda kids: st.one_of(kids.map(Neg), st.tuples(kids, kids).map(lambda p: Impl(*p))),
        max_leaves=12,
    )


# parsing and rendering


def test_parse_examples():
    assert parse_formula("x0", 1) == X0
    assert parse_formula("x0->x0", 1) == Impl(X0, X0)
    assert parse_formula("~[x0->~x1]", 2) == Neg(Impl(X0, Neg(X1)))
    assert parse_formula(" ( x0 -> x1 ) ", 2) == Impl(X0, X1)


def test_render_examples():
    assert render_formula(X0) == "x0"
    assert render_formula(Impl(X0, Impl(X0, X0))) == "x0->[x0->x0]"
    assert render_formula(Neg(Neg(X1))) == "~~x1"


@pytest.mark.parametrize("text", ["x0->x1->x0", "x0->", "[x0->x1)", "x0 x1", "y0", "~", "[x0"])
def test_parse_rejects(text):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(text, 2)


def test_parse_reports_position_and_range():
    with pytest.raises(FormulaSyntaxError) as err:
        parse_formula("x0->x2", 2)
    assert err.value.position == 4


def test_round_trip_exhaustive():
    for level in formulas_by_length(2, 9):
        for phi in level:
            assert parse_formula(render_formula(phi), 2) == phi


# semantics


def test_lengths():
    assert X0.length == 1
    assert Neg(X0).length == 2
    assert Impl(X0, Neg(X1)).length == 4


def test_variable_masks_match_product_formula():
    for m in range(1, 5):
        for i in range(m):
            product = 1
            for j in range(m):
                if j != i:
                    product *= 2 ** (2 ** j) + 1
            assert falsity_mask(Var(i), m) == product


def test_mask_examples():
    assert falsity_mask(X0, 2) == 5
    assert falsity_mask(X1, 2) == 3
    assert falsity_mask(Impl(X0, X1), 2) == 2
    assert falsity_mask(Impl(X0, X0), 1) == 0


def test_taut_anti_flags():
    taut = Impl(X0, X0)
    assert is_tautology(taut) and not is_antilogy(taut)
    assert is_antilogy(Neg(taut)) and not is_tautology(Neg(taut))
    assert not is_tautology(X0) and not is_antilogy(X0)


@given(formulas(3))
def test_mask_matches_truth_table(phi):
    assert falsity_mask(phi, 3) == truth_table_mask(phi, 3)


def test_enumeration_counts():
    assert list(enumerate_formulas(1, 1)) == [X0]
    assert set(enumerate_formulas(1, 3)) == {Neg(Neg(X0)), Impl(X0, X0)}
    assert set(enumerate_formulas(2, 2)) == {Neg(X0), Neg(X1)}
    expected = {1: [1, 1, 2, 4, 9, 21], 2: [2, 2, 6, 14, 42, 122]}
    for m, counts in expected.items():
        for n, c in enumerate(counts, start=1):
            found = list(enumerate_formulas(m, n))
            assert len(found) == c == len(set(found))
            assert all(phi.length == n for phi in found)


# types and norms


def test_type_examples():
    assert type_of(parse_formula("x1->x1", 2)) == Impl(X0, X0)
    assert type_of(parse_formula("x2->[x0->x2]", 3)) == parse_formula("x0->[x1->x0]", 2)
    assert type_of(X0) == X0


@given(formulas(4))
def test_type_properties(phi):
    t = type_of(phi)
    assert type_of(t) == t
    assert is_type_formula(t)
    assert t.length == phi.length
    assert is_tautology(t, 4) == is_tautology(phi, 4)


def test_norm_examples():
    assert norm_stats(X0).norm == Fraction(1, 2)
    stats = norm_stats(Impl(X0, X0))
    assert (stats.distinct_vars, stats.length, stats.norm) == (1, 3, Fraction(-1, 2))
    assert norm_stats(Neg(Impl(X0, X0))).norm == -1


@pytest.mark.slow
def test_norm_bounds_exhaustive():
    for m in (1, 2, 3):
        max_len = 11 if m < 3 else 9
        for level in formulas_by_length(m, max_len):
            for phi in level:
                s = norm_stats(phi)
                assert s.norm == Fraction(1, 2) - s.repeats - Fraction(s.negations, 2)
                assert s.norm <= Fraction(1, 2)
                mask = falsity_mask(phi, m)
                if mask == 0:
                    assert s.norm <= Fraction(-1, 2)
                if mask == full_mask(m):
                    assert s.norm <= -1


def _has_minimal_decomposition(phi):
    """phi = psi_1,...,psi_k, p |-> eta with p the rightmost variable of eta."""
    premises, head = premise_chain(phi)
    for j, p in enumerate(premises):
        if not isinstance(p, Var):
            continue
        eta = head
        for q in reversed(premises[j + 1:]):
            eta = Impl(q, eta)
        if variables(eta)[-1] == p.index:
            return True
    return False


def test_minimal_norm_tautologies_decompose():
    for m in (1, 2, 3):
        for level in formulas_by_length(m, 9):
            for phi in level:
                s = norm_stats(phi)
                if s.norm == Fraction(-1, 2) and falsity_mask(phi, m) == 0:
                    assert s.negations == 0 and s.repeats == 1
                    assert _has_minimal_decomposition(phi)


@given(formulas(3), st.permutations([0, 1, 2]))
@settings(max_examples=100)
def test_permutation_acts_on_masks(phi, sigma):
    assert falsity_mask(permute_vars(phi, sigma), 3) == permute_mask(falsity_mask(phi, 3), sigma, 3)


def test_permutation_examples():
    swap = [1, 0]
    assert permute_vars(Impl(X0, X1), swap) == Impl(X1, X0)
    assert permute_vars(X0, [0]) == X0
    assert falsity_mask(Impl(X0, X1), 2) == 2
    assert falsity_mask(permute_vars(Impl(X0, X1), swap), 2) == 4


# simple tautologies


def test_simple_examples():
    both = {SimpleKind.FIRST, SimpleKind.STRICT_FIRST}
    assert classify_simple(parse_formula("x0->x0", 1)) == both
    assert classify_simple(parse_formula("x1->[x0->x0]", 2)) == {SimpleKind.FIRST}
    assert classify_simple(parse_formula("x0->[~x0->x1]", 2)) == {SimpleKind.SECOND}
    assert classify_simple(X0) == set()


def test_simple_implies_tautology():
    for m in (1, 2):
        for level in formulas_by_length(m, 10):
            for phi in level:
                if classify_simple(phi):
                    assert falsity_mask(phi, m) == 0


# categories


def test_category_examples():
    taut = parse_formula("x0->x0", 1)
    assert category_classify(taut, in_s1, "strong").kind is Cat.T
    assert category_classify(Neg(taut), in_s1, "strong").kind is Cat.A
    assert category_classify(parse_formula("~x0->x1", 2), in_s1, "weak").kind is Cat.U
    # weak table: antilogy premise gives a tautology, strong does not
    phi = Impl(Neg(taut), X0)
    assert category_classify(phi, in_s1, Strength.WEAK).kind is Cat.T
    assert category_classify(phi, in_s1, Strength.STRONG).kind is Cat.U


@pytest.mark.parametrize("seed", [in_s1, in_s1_or_s2])
def test_category_soundness(seed):
    m = 2
    strong, weak = Categorizer(seed, "strong"), Categorizer(seed, "weak")
    for level in formulas_by_length(m, 10):
        for phi in level:
            s, w = strong.label(phi), weak.label(phi)
            mask = falsity_mask(phi, m)
            if s is Cat.T:
                assert w is Cat.T
            if w is Cat.T:
                assert mask == 0
            if w is Cat.A:
                assert mask == full_mask(m)


@pytest.mark.parametrize("name", ["strong-S1", "weak-S1"])
def test_first_kind_bases_match_definition(name):
    seed, strength, structural = BASES[name]
    generic = Categorizer(seed, strength)
    for m, n_max in ((1, 11), (2, 9)):
        for level in formulas_by_length(m, n_max):
            for phi in level:
                assert generic.is_basic(phi) == structural(phi, generic.label)


def test_combined_basis_disagreement_is_pinned():
    """The structural bullets over-accept when a suffix is already first-kind."""
    seed, strength, structural = BASES["combined-S1S2"]
    generic = Categorizer(seed, strength)
    extra = []
    for m, n_max in ((1, 11), (2, 9)):
        for level in formulas_by_length(m, n_max):
            for phi in level:
                g, s = generic.is_basic(phi), structural(phi, generic.label)
                assert s or not g
                if s and not g:
                    extra.append(phi)
    assert len(extra) == 12
    assert parse_formula("x0->[x1->[~x0->x1]]", 2) in extra
    # every extra formula is labelled T by the recursive rule without itself
    for phi in extra:
        assert generic.label(phi) is Cat.T


@pytest.mark.parametrize("name", list(BASES))
def test_basis_generates_same_labels(name):
    seed, strength, structural = BASES[name]
    full = Categorizer(seed, strength)
    basis = Categorizer(structural, strength, needs_labels=True)
    for level in formulas_by_length(2, 9):
        for phi in level:
            assert full.label(phi) is basis.label(phi)
