"""Surface syntax: parsers and printers for propositions, processes,
judgments and derivation documents.

    types      1 | bot | A * B | A -o B | A par B | +{l: A, ...} | &{l: A, ...} | !A | ?A
    processes  0 | new x (P | Q) | new x:T (P | Q) | send x(y).(P | Q) | send u(x). P
               | recv x(y). P | x << l. P | x >> {l: P, ...} | serv x(y). P
               | fwd x y | close x | wait x. P
    judgments  G ; D |- P :: L      (ull, ullm)
               G ; D |-i P :: x:A   (ill)
               P |-c G ; D          (cll)

Printing is canonical, so `parse(print(v)) == v` for every printable value.
"""

import json
from dataclasses import dataclass
from functools import reduce
from typing import Optional

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from constants import CLL, DERIVATION_FORMAT, ILL, SYSTEMS, ULL, ULLM
from core import (
    Bang, Bot, Branch, CloseOut, Context, Forward, Inact, Input, Judgment, Lolli, One,
    Output, Par, Plus, Process, Query, Restrict, Select, Server, Tensor, TypeExpr,
    WaitIn, With, as_output, cut, bound_send, copy_request, dual, EMPTY,
)
from errors import SourceSpan, SyntaxFault

GRAMMAR = r"""
type_top: type
process_top: process
ull_judgment: context ";" context "|-" process "::" context
ill_judgment: context ";" context "|-i" process "::" NAME ":" type
cll_judgment: process "|-c" context ";" context

context: "."                     -> empty_context
       | binding ("," binding)*  -> bindings
binding: NAME ":" type

?type: par_type
     | par_type "-o" type                   -> lolli
?par_type: tensor_type
     | tensor_type "par" par_type           -> parr
?tensor_type: unary_type
     | unary_type "*" tensor_type           -> tensor
?unary_type: "!" unary_type                 -> bang
     | "?" unary_type                       -> query
     | atom_type
?atom_type: "1"                             -> one
     | "bot"                                -> bot
     | "+" "{" type_branches "}"            -> plus
     | "&" "{" type_branches "}"            -> with_
     | "(" type ")"
type_branches: type_branch ("," type_branch)*
type_branch: NAME ":" type

?process: term
     | term ("|" term)+                     -> par
?term: "0"                                  -> inact
     | "new" NAME [":" type] "(" process ")" -> restrict
     | "send" NAME "(" NAME ")" "." term    -> send
     | "recv" NAME "(" NAME ")" "." term    -> recv
     | NAME "<<" NAME "." term              -> select
     | NAME ">>" "{" arms "}"               -> branch
     | "serv" NAME "(" NAME ")" "." term    -> serv
     | "fwd" NAME NAME                      -> fwd
     | "close" NAME                         -> close
     | "wait" NAME "." term                 -> wait
     | "(" process ")"
arms: arm ("," arm)*
arm: NAME ":" process

NAME: /[A-Za-z_][A-Za-z0-9_']*/

%import common.WS
%ignore WS
"""

_PARSER = Lark(
    GRAMMAR,
    parser="lalr",
    start=["type_top", "process_top", "ull_judgment", "ill_judgment", "cll_judgment"],
    maybe_placeholders=True,
)


def _labelled_once(pairs, what):
    labels = [label for label, _ in pairs]
    duplicates = sorted({label for label in labels if labels.count(label) > 1})
    if duplicates:
        raise SyntaxFault(f"duplicate {what} label {duplicates[0]!r}")
    return tuple(pairs)


class _ToValues(Transformer):
    """Builds core values from the parse tree."""

    # propositions
    def one(self, _):
        return One()

    def bot(self, _):
        return Bot()

    def tensor(self, items):
        return Tensor(items[0], items[1])

    def lolli(self, items):
        return Lolli(items[0], items[1])

    def parr(self, items):
        return Lolli(dual(items[0]), items[1])

    def bang(self, items):
        return Bang(items[0])

    def query(self, items):
        return Query(items[0])

    def type_branch(self, items):
        return str(items[0]), items[1]

    def type_branches(self, items):
        return _labelled_once(items, "choice")

    def plus(self, items):
        return Plus(items[0])

    def with_(self, items):
        return With(items[0])

    # processes
    def inact(self, _):
        return Inact()

    def restrict(self, items):
        name, annotation, body = items
        if not isinstance(body, Par):
            raise SyntaxFault(f"the body of new {name} must be a parallel composition")
        return Restrict(str(name), annotation, body)

    def send(self, items):
        channel, payload, body = str(items[0]), str(items[1]), items[2]
        if isinstance(body, Par):
            return bound_send(channel, payload, body.left, body.right)
        return copy_request(channel, payload, body)

    def recv(self, items):
        return Input(str(items[0]), str(items[1]), items[2])

    def select(self, items):
        return Select(str(items[0]), str(items[1]), items[2])

    def arm(self, items):
        return str(items[0]), items[1]

    def arms(self, items):
        return _labelled_once(items, "branch")

    def branch(self, items):
        return Branch(str(items[0]), items[1])

    def serv(self, items):
        return Server(str(items[0]), str(items[1]), items[2])

    def fwd(self, items):
        return Forward(str(items[0]), str(items[1]))

    def close(self, items):
        return CloseOut(str(items[0]))

    def wait(self, items):
        return WaitIn(str(items[0]), items[1])

    def par(self, items):
        return reduce(Par, items)

    # judgments
    def binding(self, items):
        return str(items[0]), items[1]

    def empty_context(self, _):
        return EMPTY

    def bindings(self, items):
        return tuple(items)

    def type_top(self, items):
        return items[0]

    def process_top(self, items):
        return items[0]

    def ull_judgment(self, items):
        return "two-sided", items

    def ill_judgment(self, items):
        return "intuitionistic", items

    def cll_judgment(self, items):
        return "classical", items


def _parse(text: str, start: str, file: Optional[str]):
    try:
        tree = _PARSER.parse(text, start=start)
        return _ToValues().transform(tree)
    except UnexpectedInput as e:
        line = max(getattr(e, "line", 1) or 1, 1)
        column = max(getattr(e, "column", 1) or 1, 1)
        detail = str(e).strip().splitlines()[0]
        raise SyntaxFault(detail, SourceSpan(file, (line, column), (line, column))) from e
    except VisitError as e:
        orig = e.orig_exc
        if isinstance(orig, SyntaxFault):
            raise SyntaxFault(orig.message, orig.span or _whole(text, file)) from orig
        if isinstance(orig, ValueError):
            raise SyntaxFault(str(orig), _whole(text, file)) from orig
        raise


def _whole(text: str, file: Optional[str]) -> SourceSpan:
    lines = text.splitlines() or [""]
    return SourceSpan(file, (1, 1), (len(lines), len(lines[-1]) + 1))


def _to_context(value, text, file) -> Context:
    if isinstance(value, Context):
        return value
    try:
        return Context(tuple(value))
    except ValueError as e:
        raise SyntaxFault(str(e), _whole(text, file)) from e


def parse_type(text: str, file: Optional[str] = None) -> TypeExpr:
    return _parse(text, "type_top", file)


def parse_process(text: str, file: Optional[str] = None) -> Process:
    return _parse(text, "process_top", file)


def parse_judgment(text: str, system: Optional[str] = None, file: Optional[str] = None) -> Judgment:
    """Parse a judgment; the turnstile decides its shape, `system` may pick ullm."""
    if "|-i" in text:
        start = "ill_judgment"
    elif "|-c" in text:
        start = "cll_judgment"
    else:
        start = "ull_judgment"
    shape, items = _parse(text, start, file)

    expected = {"two-sided": (ULL, ULLM), "intuitionistic": (ILL,), "classical": (CLL,)}[shape]
    if system is None:
        system = expected[0]
    elif system not in expected:
        raise SyntaxFault(f"a {shape} judgment cannot belong to system {system!r}", _whole(text, file))

    try:
        if shape == "two-sided":
            gamma, delta, process, right = items
            return Judgment(system, _to_context(gamma, text, file), _to_context(delta, text, file),
                            process, _to_context(right, text, file))
        if shape == "intuitionistic":
            gamma, delta, process, name, t = items
            return Judgment(system, _to_context(gamma, text, file), _to_context(delta, text, file),
                            process, Context(((str(name), t),)))
        process, gamma, delta = items
        return Judgment(system, _to_context(gamma, text, file), _to_context(delta, text, file), process)
    except ValueError as e:
        raise SyntaxFault(str(e), _whole(text, file)) from e


# ---------------------------------------------------------------------------
# Printers
# ---------------------------------------------------------------------------

_LOLLI, _TENSOR, _UNARY, _ATOM = 1, 2, 3, 4


def print_type(t: TypeExpr) -> str:
    return _type(t, _LOLLI)


def _type(t: TypeExpr, needed: int) -> str:
    if isinstance(t, One):
        text, level = "1", _ATOM
    elif isinstance(t, Bot):
        text, level = "bot", _ATOM
    elif isinstance(t, Lolli):
        text, level = f"{_type(t.left, _TENSOR)} -o {_type(t.right, _LOLLI)}", _LOLLI
    elif isinstance(t, Tensor):
        text, level = f"{_type(t.left, _UNARY)} * {_type(t.right, _TENSOR)}", _TENSOR
    elif isinstance(t, Bang):
        text, level = f"!{_type(t.body, _UNARY)}", _UNARY
    elif isinstance(t, Query):
        text, level = f"?{_type(t.body, _UNARY)}", _UNARY
    elif isinstance(t, (Plus, With)):
        sigil = "+" if isinstance(t, Plus) else "&"
        inner = ", ".join(f"{label}: {_type(a, _LOLLI)}" for label, a in t.branches)
        text, level = f"{sigil}{{{inner}}}", _ATOM
    else:
        raise TypeError(f"not a proposition: {t!r}")
    return f"({text})" if level < needed else text


def print_process(p: Process) -> str:
    if isinstance(p, Par):
        return f"{print_process(p.left)} | {_term(p.right)}"
    return _term(p)


def _term(p: Process) -> str:
    if isinstance(p, Par):
        return f"({print_process(p)})"
    if isinstance(p, Inact):
        return "0"
    if isinstance(p, Restrict):
        shape = as_output(p)
        if shape is not None:
            if p.annotation is not None:
                raise ValueError("a sent name carries no annotation in the surface syntax")
            channel, payload, body = shape
            if isinstance(body, Par):
                return f"send {channel}({payload}).({print_process(body)})"
            return f"send {channel}({payload}). {_term(body)}"
        if not isinstance(p.body, Par):
            raise ValueError(f"restriction of {p.name} has no surface form")
        head = p.name if p.annotation is None else f"{p.name}:{print_type(p.annotation)}"
        return f"new {head} ({print_process(p.body)})"
    if isinstance(p, Input):
        return f"recv {p.channel}({p.binder}). {_term(p.body)}"
    if isinstance(p, Server):
        return f"serv {p.channel}({p.binder}). {_term(p.body)}"
    if isinstance(p, Select):
        return f"{p.channel} << {p.label}. {_term(p.body)}"
    if isinstance(p, Branch):
        arms = ", ".join(f"{label}: {print_process(arm)}" for label, arm in p.arms)
        return f"{p.channel} >> {{{arms}}}"
    if isinstance(p, Forward):
        return f"fwd {p.left} {p.right}"
    if isinstance(p, CloseOut):
        return f"close {p.channel}"
    if isinstance(p, WaitIn):
        return f"wait {p.channel}. {_term(p.body)}"
    if isinstance(p, Output):
        raise ValueError("free output has no surface form")
    raise TypeError(f"not a process: {p!r}")


def print_context(c: Context) -> str:
    if not len(c):
        return "."
    return ", ".join(f"{name}:{print_type(t)}" for name, t in c.entries)


def print_judgment(j: Judgment) -> str:
    process = print_process(j.process)
    if j.system == CLL:
        return f"{process} |-c {print_context(j.gamma)} ; {print_context(j.delta)}"
    turnstile = "|-i" if j.system == ILL else "|-"
    return f"{print_context(j.gamma)} ; {print_context(j.delta)} {turnstile} {process} :: {print_context(j.right)}"


# ---------------------------------------------------------------------------
# Derivation documents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DerivationDoc:
    system: str
    derivation: "Derivation"

    @property
    def root(self) -> Judgment:
        return self.derivation.conclusion


def _node_to_json(d) -> dict:
    return {
        "rule": d.rule,
        "conclusion": print_judgment(d.conclusion),
        "premises": [_node_to_json(p) for p in d.premises],
    }


def print_derivation(d) -> str:
    """Serialise a derivation (or a DerivationDoc) as a deriv-v1 JSON document."""
    if isinstance(d, DerivationDoc):
        d = d.derivation
    doc = {"format": DERIVATION_FORMAT, "system": d.conclusion.system}
    doc.update(_node_to_json(d))
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def parse_derivation(text: str, file: Optional[str] = None) -> DerivationDoc:
    from checker import Derivation, rule_arity, known_rules

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SyntaxFault(e.msg, SourceSpan(file, (e.lineno, e.colno), (e.lineno, e.colno))) from e
    if not isinstance(doc, dict) or doc.get("format") != DERIVATION_FORMAT:
        raise SyntaxFault(f"expected a {DERIVATION_FORMAT} document", _whole(text, file))
    system = doc.get("system")
    if system not in SYSTEMS:
        raise SyntaxFault(f"unknown system {system!r}", _whole(text, file))
    rules = known_rules(system)

    def build(node, path):
        where = ".".join(map(str, path)) or "root"
        if not isinstance(node, dict) or not {"rule", "conclusion", "premises"} <= node.keys():
            raise SyntaxFault(f"node {where} needs rule, conclusion and premises", _whole(text, file))
        rule = node["rule"]
        if rule not in rules:
            raise SyntaxFault(f"node {where}: unknown rule {rule!r} for system {system}",
                              _whole(text, file))
        premises = node["premises"]
        arity = rule_arity(system, rule)
        if (arity is None and not premises) or (arity is not None and len(premises) != arity):
            wanted = "at least 1" if arity is None else str(arity)
            raise SyntaxFault(f"node {where}: rule {rule} takes {wanted} premises, got {len(premises)}",
                              _whole(text, file))
        conclusion = parse_judgment(node["conclusion"], system, file)
        return Derivation(rule, conclusion,
                          tuple(build(p, path + (i,)) for i, p in enumerate(premises)))

    return DerivationDoc(system, build(doc, ()))
