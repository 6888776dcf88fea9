"""Rule tables and derivation checking for the four type systems.

A derivation is checked node by node. Each rule is implemented as a check of
its conclusion against its premises: the rule's process shape is matched on
the conclusion, the premises must hold exactly the continuations, and the
contexts of the conclusion are rebuilt from the premises and compared.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterator, Optional, Tuple

from constants import (
    CLL, CLL_RULES, CYCLE_RULES, ILL, ILL_RULES, ILL_TO_ULL, MIX_RULES, MOVE_LEFT,
    MOVE_RIGHT, STAR_RULES, ULL, ULL_AXIOMS, ULL_CUTS, ULL_LOGICAL, ULLM,
)
from core import (
    Bang, Bot, Branch, CloseOut, Context, EMPTY, Forward, Inact, Input, Judgment, Lolli,
    One, Par, Plus, Query, Restrict, Select, Server, Tensor, TypeExpr, WaitIn, With,
    alpha_eq, as_bound_send, as_cut, as_output, dual, free_names, substitute,
)
from errors import MalformedDerivation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: Judgment
    premises: Tuple["Derivation", ...] = ()

    @property
    def system(self) -> str:
        return self.conclusion.system

    def walk(self, path: Tuple[int, ...] = ()) -> Iterator[Tuple[Tuple[int, ...], "Derivation"]]:
        """Every node with its path, root first."""
        yield path, self
        for i, premise in enumerate(self.premises):
            yield from premise.walk(path + (i,))

    def depth(self) -> int:
        return 1 + max((p.depth() for p in self.premises), default=0)

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def rules(self) -> FrozenSet[str]:
        return frozenset(node.rule for _, node in self.walk())

    def subderivation(self, path: Tuple[int, ...]) -> "Derivation":
        node = self
        for i in path:
            node = node.premises[i]
        return node


@dataclass(frozen=True)
class RuleSchema:
    """A rule as printed: its process shape, premises and side conditions."""
    name: str
    systems: FrozenSet[str]
    arity: Optional[int]          # None: one premise per label
    conclusion: str
    premises: Tuple[str, ...] = ()
    side_conditions: Tuple[str, ...] = ()
    star: bool = False


@dataclass(frozen=True)
class RuleViolation:
    path: Tuple[int, ...]
    rule: str
    clause: str

    def __str__(self):
        where = ".".join(map(str, self.path)) or "root"
        return f"node {where} ({self.rule}): {self.clause}"


def reject_cycles(judgment: Judgment) -> bool:
    return False


@dataclass(frozen=True)
class CheckerConfig:
    mix: bool = False
    cycle_condition: Callable[[Judgment], bool] = field(default=reject_cycles, compare=False)


DEFAULT_CONFIG = CheckerConfig()


def set_extension(mode: str) -> CheckerConfig:
    """Checker configuration for extension mode "none" or "mix"."""
    if mode not in ("none", "mix"):
        raise ValueError(f"unknown extension mode {mode!r}")
    return CheckerConfig(mix=(mode == "mix"))


# ---------------------------------------------------------------------------
# Rule tables
# ---------------------------------------------------------------------------

_TWO_SIDED = frozenset({ULL, ULLM, ILL})


def _s(name, arity, conclusion, premises=(), side=(), systems=frozenset({ULL})):
    return RuleSchema(name, frozenset(systems), arity, conclusion, tuple(premises), tuple(side),
                      star=name in STAR_RULES)


_ULL_SCHEMAS = [
    _s("idR", 0, "G; x:A |- fwd x y :: y:A"),
    _s("idL", 0, "G; x:A, y:~A |- fwd x y :: ."),
    _s("idRL", 0, "G; y:A |- fwd x y :: x:A"),
    _s("idRR", 0, "G; . |- fwd x y :: x:A, y:~A"),
    _s("1R", 0, "G; . |- close x :: x:1"),
    _s("botL", 0, "G; x:bot |- close x :: ."),
    _s("1L", 1, "G; D, x:1 |- wait x. P :: L", ["G; D |- P :: L"]),
    _s("botR", 1, "G; D |- wait x. P :: L, x:bot", ["G; D |- P :: L"]),
    _s("tensorR", 2, "G; D, D' |- send x(y).(P | Q) :: L, L', x:A * B",
       ["G; D |- P :: L, y:A", "G; D' |- Q :: L', x:B"]),
    _s("tensorL", 1, "G; D, x:A * B |- recv x(y). P :: L", ["G; D, y:A, x:B |- P :: L"]),
    _s("parR", 1, "G; D |- recv x(y). P :: L, x:A par B", ["G; D |- P :: L, y:A, x:B"]),
    _s("parL", 2, "G; D, D', x:A par B |- send x(y).(P | Q) :: L, L'",
       ["G; D, y:A |- P :: L", "G; D', x:B |- Q :: L'"]),
    _s("lolliR", 1, "G; D |- recv x(y). P :: L, x:A -o B", ["G; D, y:A |- P :: L, x:B"]),
    _s("lolliL", 2, "G; D, D', x:A -o B |- send x(y).(P | Q) :: L, L'",
       ["G; D |- P :: L, y:A", "G; D', x:B |- Q :: L'"]),
    _s("plusR", 1, "G; D |- x << l. P :: L, x:+{i: A_i}", ["G; D |- P :: L, x:A_l"], ["l in I"]),
    _s("plusL", None, "G; D, x:+{i: A_i} |- x >> {i: P_i} :: L", ["G; D, x:A_i |- P_i :: L"],
       ["labels of the branch equal I"]),
    _s("withR", None, "G; D |- x >> {i: P_i} :: L, x:&{i: A_i}", ["G; D |- P_i :: L, x:A_i"],
       ["labels of the branch equal I"]),
    _s("withL", 1, "G; D, x:&{i: A_i} |- x << l. P :: L", ["G; D, x:A_l |- P :: L"], ["l in I"]),
    _s("copyR", 1, "G, u:A; D |- send u(x). P :: L", ["G, u:A; D |- P :: L, x:~A"]),
    _s("copyL", 1, "G, u:A; D |- send u(x). P :: L", ["G, u:A; D, x:A |- P :: L"]),
    _s("!R", 1, "G; . |- serv x(y). P :: x:!A", ["G; . |- P :: y:A"]),
    _s("!L", 1, "G; D, x:!A |- P{x/u} :: L", ["G, u:A; D |- P :: L"]),
    _s("?R", 1, "G; D |- P{x/u} :: L, x:?~A", ["G, u:A; D |- P :: L"]),
    _s("?L", 1, "G; x:?A |- serv x(y). P :: .", ["G; y:A |- P :: ."]),
    _s("cutRL", 2, "G; D, D' |- new x (P | Q) :: L, L'",
       ["G; D |- P :: L, x:A", "G; D', x:A |- Q :: L'"]),
    _s("cutLR", 2, "G; D, D' |- new x (P | Q) :: L, L'",
       ["G; D, x:A |- P :: L", "G; D' |- Q :: L', x:A"]),
    _s("cutRR", 2, "G; D, D' |- new x (P | Q) :: L, L'",
       ["G; D |- P :: L, x:A", "G; D' |- Q :: L', x:~A"]),
    _s("cutLL", 2, "G; D, D' |- new x (P | Q) :: L, L'",
       ["G; D, x:A |- P :: L", "G; D', x:~A |- Q :: L'"]),
    _s("cut!R", 2, "G; D |- new u (P | serv u(y). Q) :: L",
       ["G, u:A; D |- P :: L", "G; . |- Q :: y:A"]),
    _s("cut?R", 2, "G; D |- new u (P | serv u(y). Q) :: L",
       ["G, u:A; D |- P :: L", "G; y:~A |- Q :: ."]),
    _s("cut!L", 2, "G; D |- new u (serv u(y). P | Q) :: L",
       ["G; . |- P :: y:A", "G, u:A; D |- Q :: L"]),
    _s("cut?L", 2, "G; D |- new u (serv u(y). P | Q) :: L",
       ["G; y:~A |- P :: .", "G, u:A; D |- Q :: L"]),
    _s("moveL", 1, "G; D, x:~A |- P :: L", ["G; D |- P :: L, x:A"], systems={ULLM}),
    _s("moveR", 1, "G; D |- P :: L, x:~A", ["G; D, x:A |- P :: L"], systems={ULLM}),
    _s("mix", 2, "G; D, D' |- P | Q :: L, L'", ["G; D |- P :: L", "G; D' |- Q :: L'"],
       ["mix extension enabled"], systems={ULL, ULLM}),
    _s("empty", 0, "G; . |- 0 :: .", side=["mix extension enabled"], systems={ULL, ULLM}),
]
_ULL_SCHEMAS += [
    _s(name, 1, "G; D |- new x (new y (P)) :: L",
       ["G; D, x, y placed per rule at dual types |- P :: L"], ["phi(judgment)"])
    for name in CYCLE_RULES
]

_CLL_SCHEMAS = [
    _s("id", 0, "fwd x y |-c G; x:A, y:~A", systems={CLL}),
    _s("1", 0, "close x |-c G; x:1", systems={CLL}),
    _s("bot", 1, "wait x. P |-c G; D, x:bot", ["P |-c G; D"], systems={CLL}),
    _s("tensor", 2, "send x(y).(P | Q) |-c G; D, D', x:A * B",
       ["P |-c G; D, y:A", "Q |-c G; D', x:B"], systems={CLL}),
    _s("par", 1, "recv x(y). P |-c G; D, x:A par B", ["P |-c G; D, y:A, x:B"], systems={CLL}),
    _s("plus", 1, "x << l. P |-c G; D, x:+{i: A_i}", ["P |-c G; D, x:A_l"], ["l in I"],
       systems={CLL}),
    _s("with", None, "x >> {i: P_i} |-c G; D, x:&{i: A_i}", ["P_i |-c G; D, x:A_i"],
       ["labels of the branch equal I"], systems={CLL}),
    _s("copy", 1, "send u(y). P |-c G, u:A; D", ["P |-c G, u:A; D, y:A"], systems={CLL}),
    _s("?", 1, "P{x/u} |-c G; D, x:?A", ["P |-c G, u:A; D"], systems={CLL}),
    _s("!", 1, "serv x(y). P |-c G; x:!A", ["P |-c G; y:A"], systems={CLL}),
    _s("cut", 2, "new x (P | Q) |-c G; D, D'", ["P |-c G; D, x:A", "Q |-c G; D', x:~A"],
       systems={CLL}),
    _s("cut?R", 2, "new u (P | serv u(y). Q) |-c G; D", ["P |-c G, u:A; D", "Q |-c G; y:~A"],
       systems={CLL}),
    _s("cut?L", 2, "new u (serv u(y). P | Q) |-c G; D", ["P |-c G; y:~A", "Q |-c G, u:A; D"],
       systems={CLL}),
    _s("mix", 2, "P | Q |-c G; D, D'", ["P |-c G; D", "Q |-c G; D'"], ["mix extension enabled"],
       systems={CLL}),
    _s("empty", 0, "0 |-c G; .", side=["mix extension enabled"], systems={CLL}),
]


def _ill_schema(name: str) -> RuleSchema:
    base = ULL_TABLE[ILL_TO_ULL.get(name, name)]
    return RuleSchema(name, frozenset({ILL}), base.arity, base.conclusion, base.premises,
                      base.side_conditions + ("exactly one name on the right",), star=True)


ULL_TABLE: Dict[str, RuleSchema] = {
    s.name: s for s in _ULL_SCHEMAS if ULL in s.systems
}
ULLM_TABLE: Dict[str, RuleSchema] = {
    s.name: s for s in _ULL_SCHEMAS if s.star or ULLM in s.systems
}
ILL_TABLE: Dict[str, RuleSchema] = {name: _ill_schema(name) for name in ILL_RULES}
CLL_TABLE: Dict[str, RuleSchema] = {s.name: s for s in _CLL_SCHEMAS}

_TABLES = {ULL: ULL_TABLE, ULLM: ULLM_TABLE, ILL: ILL_TABLE, CLL: CLL_TABLE}


def rule_table(system: str, config: CheckerConfig = DEFAULT_CONFIG) -> Dict[str, RuleSchema]:
    """Rules active for a system under a configuration."""
    table = dict(_TABLES[system])
    if not config.mix:
        for name in MIX_RULES:
            table.pop(name, None)
    return table


def known_rules(system: str) -> FrozenSet[str]:
    """Every rule name a document of this system may mention."""
    return frozenset(_TABLES[system])


def rule_arity(system: str, rule: str) -> Optional[int]:
    return _TABLES[system][rule].arity


# ---------------------------------------------------------------------------
# Checking
# ---------------------------------------------------------------------------

class _Violated(Exception):
    pass


def _require(condition, clause: str):
    if not condition:
        raise _Violated(clause)


def _fits(found: Context, expected: Context, what: str):
    if found != expected:
        raise _Violated(f"{what} should be {_show(expected)}, found {_show(found)}")


def _show(c: Context) -> str:
    from syntax import print_context
    return print_context(c)


def _union(*contexts: Context) -> Context:
    try:
        result = EMPTY
        for c in contexts:
            result = result.union(c)
        return result
    except ValueError:
        raise _Violated("a linear name occurs in both premises")


def _same_process(found, expected, what="premise process"):
    if not alpha_eq(found, expected):
        raise _Violated(f"{what} does not match the continuation of the rule")


def _typed(c: Context, name: str, kind, where: str) -> TypeExpr:
    t = c.get(name)
    _require(t is not None, f"{name} must be in {where}")
    if kind is not None and not isinstance(t, kind):
        raise _Violated(f"{name} in {where} must have a {kind.__name__} type, found {t}")
    return t


def _annotation(ann: Optional[TypeExpr], expected: TypeExpr):
    _require(ann is None or ann == expected,
             f"restriction annotation {ann} should be {expected}")


def _shared_gamma(j: Judgment, *premises: Judgment):
    for p in premises:
        _fits(p.gamma, j.gamma, "premise unrestricted context")


def _fresh_unrestricted(j: Judgment, p: Judgment) -> Tuple[str, TypeExpr]:
    added = p.gamma.names() - j.gamma.names()
    _require(len(added) == 1 and len(p.gamma) == len(j.gamma) + 1,
             "premise must extend the unrestricted context by one name")
    u = next(iter(added))
    _fits(p.gamma.remove(u), j.gamma, "premise unrestricted context")
    return u, p.gamma.get(u)


def _forward(j: Judgment) -> Forward:
    _require(isinstance(j.process, Forward), "process must be a forwarder")
    _require(j.process.left != j.process.right, "forwarder endpoints must differ")
    return j.process


# two-sided rules ------------------------------------------------------------

def _id_r(j, ps):
    fwd = _forward(j)
    a = _typed(j.delta, fwd.left, None, "the left region")
    _fits(j.delta, Context(((fwd.left, a),)), "left region")
    _fits(j.right, Context(((fwd.right, a),)), "right region")


def _id_l(j, ps):
    fwd = _forward(j)
    a = _typed(j.delta, fwd.left, None, "the left region")
    _fits(j.delta, Context(((fwd.left, a), (fwd.right, dual(a)))), "left region")
    _fits(j.right, EMPTY, "right region")


def _id_rl(j, ps):
    fwd = _forward(j)
    a = _typed(j.right, fwd.left, None, "the right region")
    _fits(j.delta, Context(((fwd.right, a),)), "left region")
    _fits(j.right, Context(((fwd.left, a),)), "right region")


def _id_rr(j, ps):
    fwd = _forward(j)
    a = _typed(j.right, fwd.left, None, "the right region")
    _fits(j.delta, EMPTY, "left region")
    _fits(j.right, Context(((fwd.left, a), (fwd.right, dual(a)))), "right region")


def _one_r(j, ps):
    _require(isinstance(j.process, CloseOut), "process must be close x")
    _fits(j.delta, EMPTY, "left region")
    _fits(j.right, Context(((j.process.channel, One()),)), "right region")


def _bot_l(j, ps):
    _require(isinstance(j.process, CloseOut), "process must be close x")
    _fits(j.delta, Context(((j.process.channel, Bot()),)), "left region")
    _fits(j.right, EMPTY, "right region")


def _wait(j, ps, left: bool):
    _require(isinstance(j.process, WaitIn), "process must be wait x. P")
    x, p = j.process.channel, ps[0].conclusion
    _shared_gamma(j, p)
    _same_process(p.process, j.process.body)
    if left:
        _typed(j.delta, x, One, "the left region")
        _fits(p.delta, j.delta.remove(x), "premise left region")
        _fits(p.right, j.right, "premise right region")
    else:
        _typed(j.right, x, Bot, "the right region")
        _fits(p.delta, j.delta, "premise left region")
        _fits(p.right, j.right.remove(x), "premise right region")


def _input(j: Judgment) -> Input:
    _require(isinstance(j.process, Input), "process must be recv x(y). P")
    return j.process


def _tensor_l(j, ps):
    inp, p = _input(j), ps[0].conclusion
    x, y = inp.channel, inp.binder
    t = _typed(j.delta, x, Tensor, "the left region")
    _shared_gamma(j, p)
    _same_process(p.process, inp.body)
    _fits(p.delta, j.delta.remove(x).add(y, t.left).add(x, t.right), "premise left region")
    _fits(p.right, j.right, "premise right region")


def _par_r(j, ps):
    inp, p = _input(j), ps[0].conclusion
    x, y = inp.channel, inp.binder
    t = _typed(j.right, x, Lolli, "the right region")
    _shared_gamma(j, p)
    _same_process(p.process, inp.body)
    _fits(p.delta, j.delta, "premise left region")
    _fits(p.right, j.right.remove(x).add(y, dual(t.left)).add(x, t.right), "premise right region")


def _lolli_r(j, ps):
    inp, p = _input(j), ps[0].conclusion
    x, y = inp.channel, inp.binder
    t = _typed(j.right, x, Lolli, "the right region")
    _shared_gamma(j, p)
    _same_process(p.process, inp.body)
    _fits(p.delta, j.delta.add(y, t.left), "premise left region")
    _fits(p.right, j.right.remove(x).add(x, t.right), "premise right region")


def _send(j: Judgment):
    shape = as_bound_send(j.process)
    _require(shape is not None, "process must be send x(y).(P | Q)")
    return shape


def _tensor_r(j, ps):
    x, y, left, right = _send(j)
    p, q = ps[0].conclusion, ps[1].conclusion
    _shared_gamma(j, p, q)
    _same_process(p.process, left)
    _same_process(q.process, right)
    a = _typed(p.right, y, None, "the right region of the first premise")
    b = _typed(q.right, x, None, "the right region of the second premise")
    _fits(j.delta, _union(p.delta, q.delta), "left region")
    _fits(j.right, _union(p.right.remove(y), q.right.remove(x)).add(x, Tensor(a, b)), "right region")


def _par_l(j, ps):
    x, y, left, right = _send(j)
    p, q = ps[0].conclusion, ps[1].conclusion
    _shared_gamma(j, p, q)
    _same_process(p.process, left)
    _same_process(q.process, right)
    a = _typed(p.delta, y, None, "the left region of the first premise")
    b = _typed(q.delta, x, None, "the left region of the second premise")
    _fits(j.delta, _union(p.delta.remove(y), q.delta.remove(x)).add(x, Lolli(dual(a), b)),
          "left region")
    _fits(j.right, _union(p.right, q.right), "right region")


def _lolli_l(j, ps):
    x, y, left, right = _send(j)
    p, q = ps[0].conclusion, ps[1].conclusion
    _shared_gamma(j, p, q)
    _same_process(p.process, left)
    _same_process(q.process, right)
    a = _typed(p.right, y, None, "the right region of the first premise")
    b = _typed(q.delta, x, None, "the left region of the second premise")
    _fits(j.delta, _union(p.delta, q.delta.remove(x)).add(x, Lolli(a, b)), "left region")
    _fits(j.right, _union(p.right.remove(y), q.right), "right region")


def _select(j, ps, region: str, kind):
    _require(isinstance(j.process, Select), "process must be x << l. P")
    x, label, p = j.process.channel, j.process.label, ps[0].conclusion
    t = _typed(getattr(j, region), x, kind, f"the {region} region")
    _require(t.branch(label) is not None, f"label {label} is not offered by {t}")
    _shared_gamma(j, p)
    _same_process(p.process, j.process.body)
    chosen = getattr(j, region).remove(x).add(x, t.branch(label))
    other = "right" if region == "delta" else "delta"
    _fits(getattr(p, region), chosen, "premise region of the selected name")
    _fits(getattr(p, other), getattr(j, other), "premise opposite region")


def _branch(j, ps, region: str, kind):
    _require(isinstance(j.process, Branch), "process must be x >> {...}")
    x = j.process.channel
    t = _typed(getattr(j, region), x, kind, f"the {region} region")
    _require(t.labels() == j.process.labels(), "branch labels must equal the labels of the type")
    _require(len(ps) == len(t.labels()), "one premise per label is required")
    other = "right" if region == "delta" else "delta"
    for (label, arm), premise in zip(j.process.arms, ps):
        p = premise.conclusion
        _shared_gamma(j, p)
        _same_process(p.process, arm, f"premise for label {label}")
        _fits(getattr(p, region), getattr(j, region).remove(x).add(x, t.branch(label)),
              f"premise region for label {label}")
        _fits(getattr(p, other), getattr(j, other), f"premise opposite region for label {label}")


def _copy(j, ps, left: bool):
    shape = as_output(j.process)
    _require(shape is not None, "process must be send u(x). P")
    u, x, body = shape
    a = _typed(j.gamma, u, None, "the unrestricted region")
    p = ps[0].conclusion
    _shared_gamma(j, p)
    _same_process(p.process, body)
    if left:
        _fits(p.delta, j.delta.add(x, a), "premise left region")
        _fits(p.right, j.right, "premise right region")
    else:
        _fits(p.delta, j.delta, "premise left region")
        _fits(p.right, j.right.add(x, dual(a)), "premise right region")


def _bang_r(j, ps):
    _require(isinstance(j.process, Server), "process must be serv x(y). P")
    x, y, p = j.process.channel, j.process.binder, ps[0].conclusion
    t = _typed(j.right, x, Bang, "the right region")
    _fits(j.right, Context(((x, t),)), "right region")
    _fits(j.delta, EMPTY, "left region")
    _shared_gamma(j, p)
    _same_process(p.process, j.process.body)
    _fits(p.delta, EMPTY, "premise left region")
    _fits(p.right, Context(((y, t.body),)), "premise right region")


def _query_l(j, ps):
    _require(isinstance(j.process, Server), "process must be serv x(y). P")
    x, y, p = j.process.channel, j.process.binder, ps[0].conclusion
    t = _typed(j.delta, x, Query, "the left region")
    _fits(j.delta, Context(((x, t),)), "left region")
    _fits(j.right, EMPTY, "right region")
    _shared_gamma(j, p)
    _same_process(p.process, j.process.body)
    _fits(p.delta, Context(((y, t.body),)), "premise left region")
    _fits(p.right, EMPTY, "premise right region")


def _silent(j, p, x):
    u, a = _fresh_unrestricted(j, p)
    _require(x not in free_names(p.process), f"{x} must not occur free in the premise")
    _same_process(j.process, substitute(p.process, x, u), "conclusion process")
    return u, a


def _bang_l(j, ps):
    p = ps[0].conclusion
    added = j.delta.names() - p.delta.names()
    _require(len(added) == 1, "exactly one left name must be introduced")
    x = next(iter(added))
    t = _typed(j.delta, x, Bang, "the left region")
    _, a = _silent(j, p, x)
    _require(a == t.body, f"unrestricted type {a} must match {t}")
    _fits(p.delta, j.delta.remove(x), "premise left region")
    _fits(p.right, j.right, "premise right region")


def _query_r(j, ps):
    p = ps[0].conclusion
    added = j.right.names() - p.right.names()
    _require(len(added) == 1, "exactly one right name must be introduced")
    x = next(iter(added))
    t = _typed(j.right, x, Query, "the right region")
    _, a = _silent(j, p, x)
    _require(dual(a) == t.body, f"unrestricted type {a} must be dual to the body of {t}")
    _fits(p.delta, j.delta, "premise left region")
    _fits(p.right, j.right.remove(x), "premise right region")


def _linear_cut(j, ps, left_side: str, right_side: str):
    shape = as_cut(j.process)
    _require(shape is not None, "process must be new x (P | Q)")
    x, ann, left, right = shape
    p, q = ps[0].conclusion, ps[1].conclusion
    _shared_gamma(j, p, q)
    _same_process(p.process, left)
    _same_process(q.process, right)
    a = _typed(getattr(p, left_side), x, None, f"the {left_side} region of the first premise")
    b = _typed(getattr(q, right_side), x, None, f"the {right_side} region of the second premise")
    wanted = a if left_side != right_side else dual(a)
    _require(b == wanted, f"cut name {x} needs {wanted} in the second premise, found {b}")
    _annotation(ann, a if left_side == "right" else dual(a))
    _fits(j.delta, _union(p.delta.remove(x), q.delta.remove(x)), "left region")
    _fits(j.right, _union(p.right.remove(x), q.right.remove(x)), "right region")


def _server_cut(j, ps, server_first: bool, server_right: bool):
    shape = as_cut(j.process)
    _require(shape is not None, "process must be new u (P | Q)")
    u, ann, left, right = shape
    server = left if server_first else right
    _require(isinstance(server, Server) and server.channel == u,
             f"the {'first' if server_first else 'second'} component must be serv {u}(y). Q")
    srv, client = (ps[0].conclusion, ps[1].conclusion) if server_first \
        else (ps[1].conclusion, ps[0].conclusion)
    _fits(srv.gamma, j.gamma, "server premise unrestricted context")
    a = _typed(client.gamma, u, None, "the unrestricted region of the client premise")
    _fits(client.gamma, j.gamma.add(u, a), "client premise unrestricted context")
    _same_process(srv.process, server.body, "server premise process")
    _same_process(client.process, right if server_first else left, "client premise process")
    y = server.binder
    if server_right:
        _fits(srv.right, Context(((y, a),)), "server premise right region")
        _fits(srv.delta, EMPTY, "server premise left region")
    else:
        _fits(srv.delta, Context(((y, dual(a)),)), "server premise left region")
        _fits(srv.right, EMPTY, "server premise right region")
    _annotation(ann, Bang(a) if server_first else Query(dual(a)))
    _fits(j.delta, client.delta, "left region")
    _fits(j.right, client.right, "right region")


def _move(j, ps, to_left: bool):
    p = ps[0].conclusion
    source, target = ("right", "delta") if to_left else ("delta", "right")
    moved = getattr(p, source).names() - getattr(j, source).names()
    _require(len(moved) == 1, "exactly one name must change side")
    x = next(iter(moved))
    t = getattr(p, source).get(x)
    _shared_gamma(j, p)
    _same_process(p.process, j.process, "premise process")
    _fits(getattr(j, source), getattr(p, source).remove(x), f"{source} region")
    _fits(getattr(j, target), getattr(p, target).add(x, dual(t)), f"{target} region")


def _mix(j, ps):
    _require(isinstance(j.process, Par), "process must be P | Q")
    p, q = ps[0].conclusion, ps[1].conclusion
    _shared_gamma(j, p, q)
    _same_process(p.process, j.process.left)
    _same_process(q.process, j.process.right)
    _fits(j.delta, _union(p.delta, q.delta), "left region")
    _fits(j.right, _union(p.right, q.right), "right region")


def _empty(j, ps):
    _require(isinstance(j.process, Inact), "process must be 0")
    _fits(j.delta, EMPTY, "left region")
    _fits(j.right, EMPTY, "right region")


_CYCLE_PLACEMENT = {
    "cycleRL": ("right", "delta", False),
    "cycleLR": ("delta", "right", False),
    "cycleRR": ("right", "right", True),
    "cycleLL": ("delta", "delta", True),
}


def _cycle(j, ps, rule, config: CheckerConfig):
    _require(config.cycle_condition(j), "cycle side condition rejected")
    outer = j.process
    _require(isinstance(outer, Restrict) and isinstance(outer.body, Restrict),
             "process must be new x (new y (P))")
    x, y, body = outer.name, outer.body.name, outer.body.body
    p = ps[0].conclusion
    x_side, y_side, dualised = _CYCLE_PLACEMENT[rule]
    a = _typed(getattr(p, x_side), x, None, f"the {x_side} region of the premise")
    b = _typed(getattr(p, y_side), y, None, f"the {y_side} region of the premise")
    _require(b == (dual(a) if dualised else a), f"{x} and {y} must have dual types")
    _shared_gamma(j, p)
    _same_process(p.process, body)
    _fits(j.delta, p.delta.without({x, y}), "left region")
    _fits(j.right, p.right.without({x, y}), "right region")


_TWO_SIDED_CHECKS = {
    "idR": _id_r, "idL": _id_l, "idRL": _id_rl, "idRR": _id_rr,
    "1R": _one_r, "botL": _bot_l,
    "1L": lambda j, ps: _wait(j, ps, left=True),
    "botR": lambda j, ps: _wait(j, ps, left=False),
    "tensorR": _tensor_r, "tensorL": _tensor_l,
    "parR": _par_r, "parL": _par_l,
    "lolliR": _lolli_r, "lolliL": _lolli_l,
    "plusR": lambda j, ps: _select(j, ps, "right", Plus),
    "withL": lambda j, ps: _select(j, ps, "delta", With),
    "withR": lambda j, ps: _branch(j, ps, "right", With),
    "plusL": lambda j, ps: _branch(j, ps, "delta", Plus),
    "copyR": lambda j, ps: _copy(j, ps, left=False),
    "copyL": lambda j, ps: _copy(j, ps, left=True),
    "!R": _bang_r, "?L": _query_l, "!L": _bang_l, "?R": _query_r,
    "cutRL": lambda j, ps: _linear_cut(j, ps, "right", "delta"),
    "cutLR": lambda j, ps: _linear_cut(j, ps, "delta", "right"),
    "cutRR": lambda j, ps: _linear_cut(j, ps, "right", "right"),
    "cutLL": lambda j, ps: _linear_cut(j, ps, "delta", "delta"),
    "cut!R": lambda j, ps: _server_cut(j, ps, server_first=False, server_right=True),
    "cut?R": lambda j, ps: _server_cut(j, ps, server_first=False, server_right=False),
    "cut!L": lambda j, ps: _server_cut(j, ps, server_first=True, server_right=True),
    "cut?L": lambda j, ps: _server_cut(j, ps, server_first=True, server_right=False),
    "moveL": lambda j, ps: _move(j, ps, to_left=True),
    "moveR": lambda j, ps: _move(j, ps, to_left=False),
    "mix": _mix, "empty": _empty,
}


# classical rules -------------------------------------------------------------

def _c_id(j, ps):
    fwd = _forward(j)
    a = _typed(j.delta, fwd.left, None, "the linear region")
    _fits(j.delta, Context(((fwd.left, a), (fwd.right, dual(a)))), "linear region")


def _c_one(j, ps):
    _require(isinstance(j.process, CloseOut), "process must be close x")
    _fits(j.delta, Context(((j.process.channel, One()),)), "linear region")


def _c_bot(j, ps):
    _require(isinstance(j.process, WaitIn), "process must be wait x. P")
    x, p = j.process.channel, ps[0].conclusion
    _typed(j.delta, x, Bot, "the linear region")
    _shared_gamma(j, p)
    _same_process(p.process, j.process.body)
    _fits(p.delta, j.delta.remove(x), "premise linear region")


def _c_tensor(j, ps):
    x, y, left, right = _send(j)
    p, q = ps[0].conclusion, ps[1].conclusion
    _shared_gamma(j, p, q)
    _same_process(p.process, left)
    _same_process(q.process, right)
    a = _typed(p.delta, y, None, "the linear region of the first premise")
    b = _typed(q.delta, x, None, "the linear region of the second premise")
    _fits(j.delta, _union(p.delta.remove(y), q.delta.remove(x)).add(x, Tensor(a, b)),
          "linear region")


def _c_par(j, ps):
    inp, p = _input(j), ps[0].conclusion
    x, y = inp.channel, inp.binder
    t = _typed(j.delta, x, Lolli, "the linear region")
    _shared_gamma(j, p)
    _same_process(p.process, inp.body)
    _fits(p.delta, j.delta.remove(x).add(y, dual(t.left)).add(x, t.right), "premise linear region")


def _c_copy(j, ps):
    shape = as_output(j.process)
    _require(shape is not None, "process must be send u(y). P")
    u, y, body = shape
    a = _typed(j.gamma, u, None, "the unrestricted region")
    p = ps[0].conclusion
    _shared_gamma(j, p)
    _same_process(p.process, body)
    _fits(p.delta, j.delta.add(y, a), "premise linear region")


def _c_query(j, ps):
    p = ps[0].conclusion
    added = j.delta.names() - p.delta.names()
    _require(len(added) == 1, "exactly one linear name must be introduced")
    x = next(iter(added))
    t = _typed(j.delta, x, Query, "the linear region")
    _, a = _silent(j, p, x)
    _require(a == t.body, f"unrestricted type {a} must match {t}")
    _fits(p.delta, j.delta.remove(x), "premise linear region")


def _c_bang(j, ps):
    _require(isinstance(j.process, Server), "process must be serv x(y). P")
    x, y, p = j.process.channel, j.process.binder, ps[0].conclusion
    t = _typed(j.delta, x, Bang, "the linear region")
    _fits(j.delta, Context(((x, t),)), "linear region")
    _shared_gamma(j, p)
    _same_process(p.process, j.process.body)
    _fits(p.delta, Context(((y, t.body),)), "premise linear region")


def _c_cut(j, ps):
    shape = as_cut(j.process)
    _require(shape is not None, "process must be new x (P | Q)")
    x, ann, left, right = shape
    p, q = ps[0].conclusion, ps[1].conclusion
    _shared_gamma(j, p, q)
    _same_process(p.process, left)
    _same_process(q.process, right)
    a = _typed(p.delta, x, None, "the linear region of the first premise")
    b = _typed(q.delta, x, None, "the linear region of the second premise")
    _require(b == dual(a), f"cut name {x} needs {dual(a)} in the second premise, found {b}")
    _annotation(ann, a)
    _fits(j.delta, _union(p.delta.remove(x), q.delta.remove(x)), "linear region")


def _c_server_cut(j, ps, server_first: bool):
    shape = as_cut(j.process)
    _require(shape is not None, "process must be new u (P | Q)")
    u, ann, left, right = shape
    server = left if server_first else right
    _require(isinstance(server, Server) and server.channel == u,
             f"the {'first' if server_first else 'second'} component must be serv {u}(y). Q")
    srv, client = (ps[0].conclusion, ps[1].conclusion) if server_first \
        else (ps[1].conclusion, ps[0].conclusion)
    _fits(srv.gamma, j.gamma, "server premise unrestricted context")
    a = _typed(client.gamma, u, None, "the unrestricted region of the client premise")
    _fits(client.gamma, j.gamma.add(u, a), "client premise unrestricted context")
    _same_process(srv.process, server.body, "server premise process")
    _same_process(client.process, right if server_first else left, "client premise process")
    _fits(srv.delta, Context(((server.binder, dual(a)),)), "server premise linear region")
    _annotation(ann, Bang(dual(a)) if server_first else Query(a))
    _fits(j.delta, client.delta, "linear region")


def _c_mix(j, ps):
    _require(isinstance(j.process, Par), "process must be P | Q")
    p, q = ps[0].conclusion, ps[1].conclusion
    _shared_gamma(j, p, q)
    _same_process(p.process, j.process.left)
    _same_process(q.process, j.process.right)
    _fits(j.delta, _union(p.delta, q.delta), "linear region")


def _c_empty(j, ps):
    _require(isinstance(j.process, Inact), "process must be 0")
    _fits(j.delta, EMPTY, "linear region")


_CLASSICAL_CHECKS = {
    "id": _c_id, "1": _c_one, "bot": _c_bot, "tensor": _c_tensor, "par": _c_par,
    "plus": lambda j, ps: _select(j, ps, "delta", Plus),
    "with": lambda j, ps: _branch(j, ps, "delta", With),
    "copy": _c_copy, "?": _c_query, "!": _c_bang,
    "cut": _c_cut,
    "cut?R": lambda j, ps: _c_server_cut(j, ps, server_first=False),
    "cut?L": lambda j, ps: _c_server_cut(j, ps, server_first=True),
    "mix": _c_mix, "empty": _c_empty,
}


def _check_node(node: Derivation, system: str, config: CheckerConfig):
    table = rule_table(system, config)
    rule = node.rule
    if rule in MIX_RULES and rule in _TABLES[system] and not config.mix:
        raise _Violated("mix extension is not enabled")
    _require(rule in table, f"unknown rule for system {system}")
    _require(node.conclusion.system == system, f"node belongs to system {node.conclusion.system}")
    for premise in node.premises:
        _require(premise.conclusion.system == system,
                 f"premise belongs to system {premise.conclusion.system}")
    arity = table[rule].arity
    _require(arity is None or len(node.premises) == arity,
             f"expected {arity} premises, found {len(node.premises)}")
    _require(arity is not None or node.premises, "expected at least one premise")

    if system == CLL:
        _CLASSICAL_CHECKS[rule](node.conclusion, node.premises)
    elif rule in CYCLE_RULES:
        _cycle(node.conclusion, node.premises, rule, config)
    else:
        _TWO_SIDED_CHECKS[ILL_TO_ULL.get(rule, rule) if system == ILL else rule](
            node.conclusion, node.premises)


def check_derivation(d: Derivation, config: CheckerConfig = DEFAULT_CONFIG) -> Optional[RuleViolation]:
    """None when every node instantiates its rule, else the first violation found."""
    system = d.system
    for path, node in d.walk():
        try:
            _check_node(node, system, config)
        except _Violated as e:
            logger.debug("rule violation at %s (%s): %s", path, node.rule, e)
            return RuleViolation(path, node.rule, str(e))
    return None


def assert_valid(d: Derivation, config: CheckerConfig = DEFAULT_CONFIG) -> Derivation:
    violation = check_derivation(d, config)
    if violation is not None:
        raise MalformedDerivation(str(violation), violation.path)
    return d
