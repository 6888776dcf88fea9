import pytest

from checker import (
    DEFAULT_CONFIG, CheckerConfig, Derivation, assert_valid, check_derivation, known_rules,
    rule_table, set_extension,
)
from constants import CYCLE_RULES, ILL, MIX_RULES, ULL
from core import BOT, EMPTY, INACT, ONE, CloseOut, Judgment, Par, WaitIn, context, cut
from errors import MalformedDerivation
from syntax import parse_derivation
from strategies import CORPUS


def _load(name):
    return parse_derivation((CORPUS / name).read_text(), name).derivation


def _close(x, t=ONE):
    return Derivation("1R", Judgment(ULL, EMPTY, EMPTY, CloseOut(x), context({x: t})))


@pytest.mark.parametrize("name", ["beyond_ill.deriv.json", "closed.deriv.json", "ill_identity.deriv.json"])
def test_golden_derivations_are_valid(name):
    assert check_derivation(_load(name)) is None


def test_violation_names_the_node_and_rule():
    violation = check_derivation(_close("x", BOT))
    assert violation.path == ()
    assert violation.rule == "1R"


def test_violation_deep_in_the_tree():
    closed = _load("closed.deriv.json")
    wrong = Derivation(closed.rule, closed.conclusion,
                       (closed.premises[0], Derivation("idR", closed.premises[1].conclusion)))
    violation = check_derivation(wrong)
    assert violation is not None
    assert violation.path in ((), (1,))


def test_cut_annotation_is_checked():
    closed = _load("closed.deriv.json")
    j = closed.conclusion
    mislabelled = Derivation(closed.rule,
                             j.with_(process=cut("x", CloseOut("x"), WaitIn("x", CloseOut("z")), BOT)),
                             closed.premises)
    assert check_derivation(mislabelled) is not None


def test_assert_valid_raises_malformed():
    with pytest.raises(MalformedDerivation) as raised:
        assert_valid(_close("x", BOT))
    assert raised.value.path == ()


def test_mix_rules_follow_the_extension():
    assert not set(MIX_RULES) & set(rule_table(ULL))
    assert set(MIX_RULES) <= set(rule_table(ULL, set_extension("mix")))
    with pytest.raises(ValueError):
        set_extension("cycles")


def test_mix_derivation_needs_the_extension():
    j = Judgment(ULL, EMPTY, EMPTY, Par(CloseOut("x"), CloseOut("y")),
                 context({"x": ONE, "y": ONE}))
    d = Derivation("mix", j, (_close("x"), _close("y")))
    assert check_derivation(d, set_extension("mix")) is None
    assert check_derivation(d, DEFAULT_CONFIG) is not None
    empty = Derivation("empty", Judgment(ULL, EMPTY, EMPTY, INACT, EMPTY))
    assert check_derivation(empty, set_extension("mix")) is None


def test_cycle_rules_are_rejected_by_default():
    assert set(CYCLE_RULES) <= known_rules(ULL)
    assert CheckerConfig().cycle_condition(_close("x").conclusion) is False


def test_ill_rule_names():
    assert {"id", "copy"} <= known_rules(ILL)
    assert "idR" not in known_rules(ILL)
