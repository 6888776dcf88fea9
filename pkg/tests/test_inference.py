import pytest

from checker import check_derivation, set_extension
from constants import CLL, ILL, ULL
from core import (
    BOT, EMPTY, INACT, ONE, Bang, CloseOut, Judgment, Lolli, Par, Query, Tensor, alpha_eq,
    context,
)
from errors import NotFound
from inference import InferenceBudget, candidate_judgments, infer, infer_all, type_universe
from syntax import parse_judgment, parse_process
from strategies import CORPUS

RECEIVED_SERVER = parse_process("recv x(y). serv y(z). close z")
RECEIVED_SERVER_UNIVERSE = (Lolli(Query(BOT), Query(BOT)), Tensor(Query(BOT), Bang(ONE)))


def test_infer_returns_a_valid_derivation_of_the_goal():
    j = parse_judgment((CORPUS / "tensor_unit.judgment").read_text().strip(), ULL)
    d = infer(j)
    assert check_derivation(d) is None
    assert alpha_eq(d.conclusion.process, j.process)
    assert d.conclusion.delta == j.delta


def test_infer_intuitionistic_goal():
    j = parse_judgment(". ; x:1 -o 1 |-i send x(y).(close y | fwd x w) :: w:1")
    d = infer(j)
    assert d.system == ILL
    assert check_derivation(d) is None


def test_untypable_goal_raises_not_found():
    with pytest.raises(NotFound):
        infer(parse_judgment(". ; . |- close x :: x:bot", ULL))


def test_budget_exhaustion_is_not_found():
    j = parse_judgment((CORPUS / "tensor_unit.judgment").read_text().strip(), ULL)
    with pytest.raises(NotFound):
        infer(j, InferenceBudget(max_depth=1))


def test_universe_is_closed_under_duality():
    j = parse_judgment(". ; x:1 * bot |- wait x. 0 :: .", ULL)
    universe = type_universe(j)
    assert Lolli(ONE, ONE) in universe
    assert ONE in universe and BOT in universe


def test_three_derivations_of_the_non_intuitionistic_witness():
    found = infer_all(RECEIVED_SERVER, ULL, InferenceBudget(universe=RECEIVED_SERVER_UNIVERSE))
    assert len(found) == 3
    assert len(set(found)) == 3
    # two of the derivations share the judgment with x on the right
    assert len({j for j, _ in found}) == 2
    for j, d in found:
        assert check_derivation(d) is None
        assert len(j.right) + len(j.delta) == 1


def test_witnesses_are_rejected_intuitionistically():
    ill_universe = (ONE, Bang(ONE), Tensor(ONE, ONE), Lolli(ONE, ONE))
    for text in ("recv x(y). serv y(z). close z", "recv x(y). wait x. close y"):
        assert infer_all(parse_process(text), ILL, InferenceBudget(universe=ill_universe)) == []


def test_empty_send_witness_is_classical():
    process = parse_process("recv x(y). wait x. close y")
    universe = (Tensor(BOT, ONE), Lolli(BOT, BOT))
    assert infer_all(process, ULL, InferenceBudget(universe=universe))
    assert infer_all(process, CLL, InferenceBudget(universe=universe))


def test_intuitionistic_candidates_have_one_right_name():
    process = parse_process("recv x(y). wait x. close y")
    goals = list(candidate_judgments(process, ILL, (ONE, BOT, Tensor(ONE, ONE))))
    assert goals
    assert all(len(g.right) == 1 for g in goals)
    assert all(BOT not in g.types() for g in goals)


def test_mix_is_needed_for_parallel_composition():
    j = Judgment(ULL, EMPTY, EMPTY, Par(CloseOut("x"), CloseOut("y")), context({"x": ONE, "y": ONE}))
    assert infer(j, config=set_extension("mix")).rule == "mix"
    with pytest.raises(NotFound):
        infer(j)


def test_inaction_needs_the_empty_rule():
    j = Judgment(ULL, EMPTY, EMPTY, INACT, EMPTY)
    assert infer(j, config=set_extension("mix")).rule == "empty"
    with pytest.raises(NotFound):
        infer(j)
