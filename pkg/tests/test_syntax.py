import pytest
from hypothesis import given

from constants import CLL, ILL, ULL, ULLM
from core import (
    BOT, ONE, Bang, Branch, CloseOut, Input, Lolli, Plus, Query, Tensor, WaitIn, bound_send,
    context, copy_request, cut, par,
)
from errors import SyntaxFault
from syntax import (
    parse_derivation, parse_judgment, parse_process, parse_type, print_derivation,
    print_judgment, print_process, print_type,
)
from strategies import CORPUS, types


@given(types)
def test_types_survive_printing(t):
    assert parse_type(print_type(t)) == t


def test_type_precedence():
    assert parse_type("1 * 1 -o bot") == Lolli(Tensor(ONE, ONE), BOT)
    assert parse_type("1 par bot") == par(ONE, BOT)
    assert parse_type("!?bot") == Bang(Query(BOT))
    assert print_type(Tensor(Lolli(ONE, ONE), ONE)) == "(1 -o 1) * 1"


def test_golden_types_print_back_verbatim():
    for line in (CORPUS / "types.sty").read_text().splitlines():
        assert print_type(parse_type(line)) == line


def test_processes():
    assert parse_process("send x(y).(close y | wait x. 0)") == \
        bound_send("x", "y", CloseOut("y"), WaitIn("x", parse_process("0")))
    assert parse_process("send u(x). close x") == copy_request("u", "x", CloseOut("x"))
    assert parse_process("new x:1 (close x | wait x. close z)") == \
        cut("x", CloseOut("x"), WaitIn("x", CloseOut("z")), ONE)
    assert parse_process("x >> {r: close x, l: 0}").labels() == ("l", "r")


def test_process_printing_is_canonical():
    text = "new x:1 -o 1 (recv x(y). wait y. close x | send x(w).(close w | wait x. close z))"
    assert print_process(parse_process(text)) == text


def test_parse_error_carries_a_span():
    with pytest.raises(SyntaxFault) as raised:
        parse_process("recv x(. close x", file="broken.spi")
    assert raised.value.span.file == "broken.spi"
    assert raised.value.span.start[0] == 1


def test_judgment_shapes():
    j = parse_judgment(". ; x:1 |-i fwd x y :: y:1")
    assert j.system == ILL and j.right == context({"y": ONE})
    c = parse_judgment("close x |-c . ; x:1")
    assert c.system == CLL
    assert parse_judgment(". ; . |- close x :: x:1", ULLM).system == ULLM
    with pytest.raises(SyntaxFault):
        parse_judgment(". ; . |- close x :: x:1", ILL)


def test_invalid_judgment_is_a_syntax_fault():
    with pytest.raises(SyntaxFault):
        parse_judgment(". ; x:1 |- close x :: x:1")


def test_judgment_printing():
    text = "u:1 ; x:1 * bot |- recv x(y). wait y. close x :: ."
    assert print_judgment(parse_judgment(text, ULL)) == text


@pytest.mark.parametrize("name", ["beyond_ill.deriv.json", "closed.deriv.json", "ill_identity.deriv.json"])
def test_golden_derivations_print_back_verbatim(name):
    text = (CORPUS / name).read_text()
    assert print_derivation(parse_derivation(text, name)) == text


def test_derivation_documents_are_checked_for_shape():
    with pytest.raises(SyntaxFault):
        parse_derivation("{not json")
    with pytest.raises(SyntaxFault):
        parse_derivation('{"format": "deriv-v0", "system": "ull"}')
    bad_arity = ('{"format": "deriv-v1", "system": "ull", "rule": "1R", '
                 '"conclusion": ". ; . |- close x :: x:1", "premises": [{"rule": "1R", '
                 '"conclusion": ". ; . |- close y :: y:1", "premises": []}]}')
    with pytest.raises(SyntaxFault):
        parse_derivation(bad_arity)
    unknown = ('{"format": "deriv-v1", "system": "ill", "rule": "botL", '
               '"conclusion": ". ; . |-i close x :: x:1", "premises": []}')
    with pytest.raises(SyntaxFault):
        parse_derivation(unknown)
