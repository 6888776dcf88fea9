import pytest
from hypothesis import given

from constants import CLL, ILL, ULL
from core import (
    BOT, EMPTY, ONE, Bang, CloseOut, Context, Forward, Input, Judgment, Lolli, Plus, Query,
    Tensor, WaitIn, With, alpha_eq, bound_send, context, cut, dual, free_names, in_ill_grammar,
    par, process_size, substitute, unshadow,
)
from strategies import types


@given(types)
def test_dual_is_an_involution(t):
    assert dual(dual(t)) == t


@given(types, types)
def test_de_morgan_for_tensor(a, b):
    assert dual(Tensor(a, b)) == par(dual(a), dual(b))
    assert dual(Tensor(a, b)) == Lolli(a, dual(b))


def test_par_is_lolli_of_the_dual():
    assert par(ONE, BOT) == Lolli(BOT, BOT)
    assert dual(Bang(ONE)) == Query(BOT)


def test_choice_branches_are_sorted_and_unique():
    assert Plus({"r": ONE, "l": BOT}).labels() == ("l", "r")
    with pytest.raises(ValueError):
        With(())
    with pytest.raises(ValueError):
        Plus((("l", ONE), ("l", BOT)))


def test_ill_grammar_excludes_bot_and_query():
    assert in_ill_grammar(Lolli(ONE, Bang(ONE)))
    assert not in_ill_grammar(Tensor(ONE, BOT))
    assert not in_ill_grammar(Query(ONE))


def test_substitution_avoids_capture():
    p = Input("a", "y", Forward("y", "x"))
    assert substitute(p, "y", "x") == Input("a", "y1", Forward("y1", "y"))


def test_substitution_leaves_bound_names_alone():
    p = Input("a", "x", CloseOut("x"))
    assert substitute(p, "b", "x") is p


def test_alpha_equivalence():
    assert alpha_eq(Input("a", "y", CloseOut("y")), Input("a", "z", CloseOut("z")))
    assert not alpha_eq(Input("a", "y", CloseOut("y")), Input("a", "z", CloseOut("a")))


def test_bound_send_counts_once():
    send = bound_send("x", "y", CloseOut("y"), CloseOut("x"))
    assert process_size(send) == 3
    assert free_names(send) == {"x"}


def test_unshadow_renames_clashing_binders_only():
    p = cut("x", CloseOut("x"), WaitIn("x", Input("z", "w", CloseOut("w"))))
    assert unshadow(p) is p
    clash = Input("a", "a", CloseOut("a"))
    assert unshadow(clash) == Input("a", "a1", CloseOut("a1"))


def test_context_equality_ignores_order():
    assert context({"x": ONE, "y": BOT}) == context({"y": BOT, "x": ONE})
    with pytest.raises(ValueError):
        Context((("x", ONE), ("x", BOT)))


def test_judgment_invariants():
    with pytest.raises(ValueError):
        Judgment(ULL, EMPTY, context({"x": ONE}), CloseOut("x"), context({"x": ONE}))
    with pytest.raises(ValueError):
        Judgment(ILL, EMPTY, EMPTY, CloseOut("x"), EMPTY)
    with pytest.raises(ValueError):
        Judgment(ILL, EMPTY, EMPTY, CloseOut("x"), context({"x": BOT}))
    with pytest.raises(ValueError):
        Judgment(CLL, EMPTY, EMPTY, CloseOut("x"), context({"x": ONE}))
    with pytest.raises(ValueError):
        Judgment("lk", EMPTY, EMPTY, CloseOut("x"), EMPTY)
