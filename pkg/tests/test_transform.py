import pytest

from checker import Derivation, check_derivation, set_extension
from constants import CLL, ILL, MOVES, STAR_RULES, ULL, ULLM
from core import BOT, EMPTY, ONE, Branch, CloseOut, Judgment, Par, Plus, WaitIn, With, context
from errors import MalformedDerivation, NotInFragment
from syntax import parse_derivation, parse_process
from transform import (
    classical_judgment, eliminate_moves, eliminate_nonstar, embed_intuitionistic, flip,
    fragment_report, locality_diagnose, to_classical, to_intuitionistic, to_united,
    united_judgment,
)
from strategies import CORPUS


def _load(name):
    return parse_derivation((CORPUS / name).read_text(), name).derivation


@pytest.fixture
def beyond_ill():
    return _load("beyond_ill.deriv.json")


@pytest.fixture
def closed():
    return _load("closed.deriv.json")


def test_nonstar_rules_become_moves(beyond_ill):
    starred = eliminate_nonstar(beyond_ill)
    assert starred.system == ULLM
    assert check_derivation(starred) is None
    assert starred.rules() <= STAR_RULES | set(MOVES)
    assert starred.conclusion == beyond_ill.conclusion.with_(system=ULLM)


def test_moves_are_eliminated(beyond_ill):
    back = eliminate_moves(eliminate_nonstar(beyond_ill))
    assert back.system == ULL
    assert check_derivation(back) is None
    assert not back.rules() & set(MOVES)
    assert back.conclusion == beyond_ill.conclusion


def test_wrong_source_system_is_rejected(beyond_ill):
    with pytest.raises(MalformedDerivation):
        eliminate_moves(beyond_ill)


def test_classical_round_trip(beyond_ill):
    classical = to_classical(beyond_ill)
    assert classical.system == CLL
    assert check_derivation(classical) is None
    assert classical.conclusion == classical_judgment(beyond_ill.conclusion)
    assert not len(classical.conclusion.right)
    united = to_united(classical)
    assert check_derivation(united) is None
    assert united.conclusion == united_judgment(classical.conclusion)


def test_flip_moves_one_entry(closed):
    flipped = flip(closed.premises[0], "x")
    assert flipped.rule == "botL"
    assert flipped.conclusion.delta == context({"x": BOT})
    assert check_derivation(flipped) is None


def _wait_on_x_then_close(channel):
    unit = Derivation("1R", Judgment(ULL, EMPTY, EMPTY, CloseOut(channel), context({channel: ONE})))
    return Derivation("1L", Judgment(ULL, EMPTY, context({"x": ONE}), WaitIn("x", CloseOut(channel)),
                                     context({channel: ONE})), (unit,))


def test_flip_reaches_every_branch_of_an_offer():
    arm = _wait_on_x_then_close("z")
    offer = With({"l": ONE, "r": ONE})
    process = Branch("z", (("l", arm.conclusion.process), ("r", arm.conclusion.process)))
    d = Derivation("withR", Judgment(ULL, EMPTY, context({"x": ONE}), process, context({"z": offer})),
                   (arm, arm))
    assert check_derivation(d) is None
    flipped = flip(d, "x")
    assert check_derivation(flipped) is None
    assert flipped.rule == "withR"
    assert [p.rule for p in flipped.premises] == ["botR", "botR"]
    assert flipped.conclusion.delta == EMPTY
    assert flipped.conclusion.right == context({"x": BOT, "z": offer})


def test_flip_reaches_every_branch_of_a_case():
    inner = _wait_on_x_then_close("z")
    arm = Derivation("1L", Judgment(ULL, EMPTY, context({"p": ONE, "x": ONE}),
                                    WaitIn("p", inner.conclusion.process), context({"z": ONE})), (inner,))
    case = Plus({"l": ONE, "r": ONE})
    process = Branch("p", (("l", arm.conclusion.process), ("r", arm.conclusion.process)))
    d = Derivation("plusL", Judgment(ULL, EMPTY, context({"p": case, "x": ONE}), process,
                                     context({"z": ONE})), (arm, arm))
    assert check_derivation(d) is None
    flipped = flip(d, "x")
    assert check_derivation(flipped) is None
    assert flipped.conclusion.delta == context({"p": case})
    assert flipped.conclusion.right == context({"x": BOT, "z": ONE})


def test_beyond_ill_lies_outside_the_fragment(beyond_ill):
    report = fragment_report(beyond_ill)
    assert report.max_r_degree == 2
    assert not report.ill_member
    assert report.to_dict()["max_r_degree"] == 2
    with pytest.raises(NotInFragment):
        to_intuitionistic(beyond_ill)


def test_closed_program_is_intuitionistic(closed):
    report = fragment_report(closed)
    assert report.ill_member and report.witness is None
    ill = to_intuitionistic(closed)
    assert ill.system == ILL
    assert check_derivation(ill) is None
    assert embed_intuitionistic(ill) == closed


def test_embedding_renames_rules():
    embedded = embed_intuitionistic(_load("ill_identity.deriv.json"))
    assert embedded.rule == "idR"
    assert embedded.system == ULL


def test_mix_nodes_leave_the_fragment():
    mix = set_extension("mix")
    close = lambda x: Derivation("1R", Judgment(ULL, EMPTY, EMPTY, CloseOut(x), context({x: ONE})))
    d = Derivation("mix", Judgment(ULL, EMPTY, EMPTY, Par(CloseOut("x"), CloseOut("y")),
                                   context({"x": ONE, "y": ONE})), (close("x"), close("y")))
    report = fragment_report(d, mix)
    assert not report.ill_member
    assert report.witness == ()


@pytest.mark.parametrize("name, kind, channel", [
    ("beyond_ill.spi", "NonLocalServer", "y"),
    ("empty_send.spi", "NonLocalEmptySend", "y"),
])
def test_locality_witnesses(name, kind, channel):
    found = locality_diagnose(parse_process((CORPUS / name).read_text()))
    assert [(d.kind, d.name) for d in found] == [(kind, channel)]


def test_local_server_is_silent():
    assert locality_diagnose(parse_process((CORPUS / "local_server.spi").read_text())) == []


def test_rebinding_clears_a_received_name():
    assert locality_diagnose(parse_process("recv x(y). recv z(w). serv w(v). close v")) != []
    assert locality_diagnose(parse_process("recv x(y). new y (close y | wait y. close x)")) == []
