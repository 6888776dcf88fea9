import pytest

from checker import Derivation, set_extension
from constants import ULL
from core import (
    BOT, EMPTY, ONE, CloseOut, Forward, Judgment, Par, Restrict, WaitIn, alpha_eq, context, cut,
)
from dynamics import (
    canonical, congruence_axioms, congruent, find_redex, harvest_types, run_closed, step,
)
from errors import FuelExhausted
from syntax import parse_derivation, parse_process
from strategies import CORPUS


def _load(name):
    return parse_derivation((CORPUS / name).read_text(), name).derivation


def test_beta_close():
    process = parse_process((CORPUS / "beta_close.spi").read_text())
    reducts = {label.rule: reduct for label, reduct in step(process)}
    assert alpha_eq(reducts["betaClose"], CloseOut("z"))


def test_forwarder_redex_substitutes():
    process = parse_process("new x (close x | fwd x y)")
    labels = {label.rule: reduct for label, reduct in step(process)}
    assert alpha_eq(labels["betaId"], CloseOut("y"))


def test_symmetry_flips_the_annotation():
    process = cut("x", CloseOut("x"), WaitIn("x", CloseOut("z")), ONE)
    rewrites = congruence_axioms(process)
    assert rewrites[0].axiom == "cutSymm"
    assert rewrites[0].process == cut("x", WaitIn("x", CloseOut("z")), CloseOut("x"), BOT)
    assert rewrites[0].position == ()


def test_congruence_search():
    p = parse_process("new x (close x | wait x. close z)")
    q = parse_process("new y (wait y. close z | close y)")
    assert congruent(p, q, 2) == ["cutSymm"]
    assert congruent(p, p, 0) == []
    assert congruent(p, parse_process("close z"), 3) is None


def test_canonical_renames_binders():
    assert canonical(parse_process("recv a(y). close y")) == canonical(parse_process("recv a(w). close w"))


def test_find_redex_follows_the_derivation():
    label, reduct = find_redex(_load("closed.deriv.json"))
    assert label.rule == "betaClose"
    assert alpha_eq(reduct, CloseOut("z"))


def test_run_closed_reaches_close():
    trace = []
    final = run_closed(_load("closed.deriv.json"), fuel=50, trace=trace)
    assert alpha_eq(final, CloseOut("z"))
    assert [entry["rule"] for entry in trace] == ["betaClose"]


def test_run_closed_respects_fuel():
    with pytest.raises(FuelExhausted) as raised:
        run_closed(_load("closed.deriv.json"), fuel=0)
    assert raised.value.steps == 0


def test_run_closed_rejects_open_programs():
    with pytest.raises(ValueError):
        run_closed(_load("beyond_ill.deriv.json"))


def test_harvested_types_include_subformulas():
    assert ONE in harvest_types(_load("beyond_ill.deriv.json"))


def _stuck_component_cut():
    """new x:1 ((close x | fwd a b) | wait w. wait x. close z), typed with mix on the left."""
    unit_x = Derivation("1R", Judgment(ULL, EMPTY, EMPTY, CloseOut("x"), context({"x": ONE})))
    forward = Derivation("idR", Judgment(ULL, EMPTY, context({"a": ONE}), Forward("a", "b"),
                                         context({"b": ONE})))
    left = Par(CloseOut("x"), Forward("a", "b"))
    mixed = Derivation("mix", Judgment(ULL, EMPTY, context({"a": ONE}), left,
                                       context({"x": ONE, "b": ONE})), (unit_x, forward))
    unit_z = Derivation("1R", Judgment(ULL, EMPTY, EMPTY, CloseOut("z"), context({"z": ONE})))
    wait_x = Derivation("1L", Judgment(ULL, EMPTY, context({"x": ONE}), WaitIn("x", CloseOut("z")),
                                       context({"z": ONE})), (unit_z,))
    right = WaitIn("w", WaitIn("x", CloseOut("z")))
    wait_w = Derivation("1L", Judgment(ULL, EMPTY, context({"w": ONE, "x": ONE}), right,
                                       context({"z": ONE})), (wait_x,))
    return Derivation("cutRL", Judgment(ULL, EMPTY, context({"a": ONE, "w": ONE}), cut("x", left, right, ONE),
                                        context({"b": ONE, "z": ONE})), (mixed, wait_w))


def test_find_redex_commutes_past_a_stuck_component():
    d = _stuck_component_cut()
    label, reduct = find_redex(d, set_extension("mix"))
    assert label.rule == "kappaClose"
    assert label.position == ()
    left = Par(CloseOut("x"), Forward("a", "b"))
    assert reduct == WaitIn("w", Restrict("x", ONE, Par(left, WaitIn("x", CloseOut("z")))))
    assert (label.rule, reduct) in [(found.rule, r) for found, r in step(d.conclusion.process)]
