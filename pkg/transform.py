"""Derivation-to-derivation translations between the four systems.

All translations work node by node and keep the process of every node. The
side moves of the move calculus are pushed up to the node that introduces
the moved assignment, where a rule of the opposite side absorbs them.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from checker import CheckerConfig, DEFAULT_CONFIG, Derivation, assert_valid
from constants import (
    CLL, CYCLE_RULES, ILL, ILL_TO_ULL, MIX_RULES, MOVE_LEFT, MOVE_RIGHT, MOVES, STAR_RULES, ULL,
    ULLM,
)
from core import (
    EMPTY, Branch, CloseOut, Forward, Input, Judgment, Par, Select, Server, WaitIn, as_bound_send,
    as_output, binder_of, dual, in_ill_grammar, process_children,
)
from errors import MalformedDerivation, NotInFragment

logger = logging.getLogger(__name__)


def _validated(d: Derivation, system: str, config: CheckerConfig) -> Derivation:
    if d.system != system:
        raise MalformedDerivation(f"expected a {system} derivation, got {d.system}")
    return assert_valid(d, config)


def _retag(j: Judgment, system: str) -> Judgment:
    return j.with_(system=system)


def _moved(j: Judgment, x: str) -> Judgment:
    """j with the linear entry x on the other side, at the dual type."""
    if x in j.delta:
        return j.with_(delta=j.delta.remove(x), right=j.right.add(x, dual(j.delta.get(x))))
    if x in j.right:
        return j.with_(delta=j.delta.add(x, dual(j.right.get(x))), right=j.right.remove(x))
    raise ValueError(f"{x} is not a linear name of {j}")


def _move_left(d: Derivation, x: str) -> Derivation:
    return Derivation(MOVE_LEFT, _moved(d.conclusion, x), (d,))


def _move_right(d: Derivation, x: str) -> Derivation:
    return Derivation(MOVE_RIGHT, _moved(d.conclusion, x), (d,))


def _introduced(d: Derivation) -> str:
    """Linear name a silent rule introduces."""
    return next(iter(d.conclusion.linear_names - d.premises[0].conclusion.linear_names))


# ---------------------------------------------------------------------------
# Non-starred rules into the move calculus
# ---------------------------------------------------------------------------

def _forwarder_by_moves(j: Judgment) -> Derivation:
    """idR on the left endpoint, then moves that reach the placement of j."""
    a, b = j.process.left, j.process.right
    t = j.delta.get(a) if a in j.delta else dual(j.right.get(a))
    base = j.with_(delta=EMPTY.add(a, t), right=EMPTY.add(b, t))
    d = Derivation("idR", base)
    if b in j.delta:
        d = _move_left(d, b)
    if a in j.right:
        d = _move_right(d, a)
    return d


def eliminate_nonstar(d: Derivation, config: CheckerConfig = DEFAULT_CONFIG) -> Derivation:
    """A move-calculus derivation of the same judgment using starred rules and moves only."""
    _validated(d, ULL, config)
    return _star(d)


def _star(d: Derivation) -> Derivation:
    premises = tuple(_star(p) for p in d.premises)
    j = _retag(d.conclusion, ULLM)
    rule = d.rule
    p = j.process
    if rule in STAR_RULES or rule in MIX_RULES:
        return Derivation(rule, j, premises)
    if rule in ("idL", "idRL", "idRR"):
        return _forwarder_by_moves(j)
    if rule == "botL":
        return _move_left(Derivation("1R", _moved(j, p.channel)), p.channel)
    if rule == "botR":
        return _move_right(Derivation("1L", _moved(j, p.channel), premises), p.channel)
    if rule == "parR":
        return Derivation("lolliR", j, (_move_left(premises[0], p.binder),))
    if rule == "parL":
        _, y, _, _ = as_bound_send(p)
        return Derivation("lolliL", j, (_move_right(premises[0], y), premises[1]))
    if rule == "copyR":
        _, x, _ = as_output(p)
        return Derivation("copyL", j, (_move_left(premises[0], x),))
    if rule == "?R":
        x = _introduced(d)
        return _move_right(Derivation("!L", _moved(j, x), premises), x)
    if rule == "?L":
        body = _move_right(premises[0], p.binder)
        return _move_left(Derivation("!R", _moved(j, p.channel), (body,)), p.channel)
    if rule == "cutRR":
        return Derivation("cutRL", j, (premises[0], _move_left(premises[1], p.name)))
    if rule == "cutLL":
        return Derivation("cutLR", j, (premises[0], _move_right(premises[1], p.name)))
    if rule == "cut?R":
        server = p.body.right
        return Derivation("cut!R", j, (premises[0], _move_right(premises[1], server.binder)))
    if rule == "cut?L":
        server = p.body.left
        return Derivation("cut!L", j, (_move_right(premises[0], server.binder), premises[1]))
    raise MalformedDerivation(f"rule {rule} has no counterpart in the move calculus")


# ---------------------------------------------------------------------------
# Moves out of the move calculus
# ---------------------------------------------------------------------------

_FORWARDER_PLACEMENT = {
    ("delta", "right"): "idR",
    ("delta", "delta"): "idL",
    ("right", "delta"): "idRL",
    ("right", "right"): "idRR",
}

_OPPOSITE = {
    "1L": "botR", "botR": "1L",
    "plusR": "withL", "withL": "plusR",
    "withR": "plusL", "plusL": "withR",
    "!R": "?L", "?L": "!R",
    "!L": "?R", "?R": "!L",
}


def _channel(p) -> Optional[str]:
    if isinstance(p, (CloseOut, WaitIn, Input, Select, Branch, Server)):
        return p.channel
    send = as_bound_send(p)
    return send[0] if send else None


def _principal(d: Derivation, x: str) -> bool:
    if d.rule in ("!L", "?R"):
        return _introduced(d) == x
    if d.rule in _FORWARDER_PLACEMENT.values() or d.rule in ("1R", "botL"):
        return True
    if d.rule in ("copyR", "copyL") or d.rule in MIX_RULES or d.rule.startswith("cut"):
        return False
    return _channel(d.conclusion.process) == x


def flip(d: Derivation, x: str) -> Derivation:
    """A move-free derivation of d's judgment with the linear entry x on the other side."""
    j = d.conclusion
    target = _moved(j, x)
    rule = d.rule
    if not _principal(d, x):
        # additive rules carry x into every branch
        reached = [x in premise.conclusion.linear_names for premise in d.premises]
        if not any(reached):
            raise MalformedDerivation(f"{x} reaches no premise of {rule}")
        return Derivation(rule, target, tuple(flip(premise, x) if hit else premise
                                              for premise, hit in zip(d.premises, reached)))

    p = j.process
    if isinstance(p, Forward):
        placement = (target.region_of(p.left), target.region_of(p.right))
        return Derivation(_FORWARDER_PLACEMENT[placement], target)
    if rule in ("1R", "botL"):
        return Derivation("botL" if rule == "1R" else "1R", target)
    if rule in ("1L", "botR", "!L", "?R"):
        return Derivation(_OPPOSITE[rule], target, d.premises)
    if rule in ("plusR", "withL", "withR", "plusL"):
        return Derivation(_OPPOSITE[rule], target, tuple(flip(e, x) for e in d.premises))
    if rule in ("!R", "?L"):
        return Derivation(_OPPOSITE[rule], target, (flip(d.premises[0], p.binder),))
    if rule in ("tensorR", "lolliL"):
        first, second = d.premises
        return Derivation("lolliL" if rule == "tensorR" else "tensorR", target, (first, flip(second, x)))
    if rule == "parL":
        _, y, _, _ = as_bound_send(p)
        first, second = d.premises
        return Derivation("tensorR", target, (flip(first, y), flip(second, x)))
    if rule in ("tensorL", "lolliR"):
        return Derivation("lolliR" if rule == "tensorL" else "tensorL", target, (flip(d.premises[0], x),))
    if rule == "parR":
        return Derivation("tensorL", target, (flip(flip(d.premises[0], p.binder), x),))
    raise MalformedDerivation(f"cannot move {x} across rule {rule}")


def eliminate_moves(d: Derivation, config: CheckerConfig = DEFAULT_CONFIG) -> Derivation:
    """A derivation of the same judgment in the two-sided system without moves."""
    _validated(d, ULLM, config)
    return _without_moves(d)


def _without_moves(d: Derivation) -> Derivation:
    if d.rule in MOVES:
        premise = d.premises[0].conclusion
        source = "right" if d.rule == MOVE_LEFT else "delta"
        x = next(iter(getattr(premise, source).names() - getattr(d.conclusion, source).names()))
        return flip(_without_moves(d.premises[0]), x)
    return Derivation(d.rule, _retag(d.conclusion, ULL), tuple(_without_moves(p) for p in d.premises))


# ---------------------------------------------------------------------------
# Two-sided and classical systems
# ---------------------------------------------------------------------------

_TO_CLASSICAL = {
    "idR": "id", "idL": "id", "idRL": "id", "idRR": "id",
    "1R": "1", "botL": "1", "1L": "bot", "botR": "bot",
    "tensorR": "tensor", "lolliL": "tensor", "parL": "tensor",
    "tensorL": "par", "lolliR": "par", "parR": "par",
    "plusR": "plus", "withL": "plus", "withR": "with", "plusL": "with",
    "copyR": "copy", "copyL": "copy",
    "!R": "!", "?L": "!", "!L": "?", "?R": "?",
    "cutRL": "cut", "cutLR": "cut", "cutRR": "cut", "cutLL": "cut",
    "cut!R": "cut?R", "cut?R": "cut?R", "cut!L": "cut?L", "cut?L": "cut?L",
    "mix": "mix", "empty": "empty",
}


def classical_judgment(j: Judgment) -> Judgment:
    """G; D |- P :: L  becomes  P |-c ~G; ~D, L."""
    return Judgment(CLL, j.gamma.dualized(), j.delta.dualized().union(j.right), j.process)


def united_judgment(j: Judgment) -> Judgment:
    """P |-c G; D  becomes  ~G; . |- P :: D."""
    return Judgment(ULL, j.gamma.dualized(), EMPTY, j.process, j.delta)


def to_classical(d: Derivation, config: CheckerConfig = DEFAULT_CONFIG) -> Derivation:
    _validated(d, ULL, config)
    return _classical(d)


def _classical(d: Derivation) -> Derivation:
    if d.rule in CYCLE_RULES:
        raise MalformedDerivation(f"rule {d.rule} has no classical counterpart")
    return Derivation(_TO_CLASSICAL[d.rule], classical_judgment(d.conclusion),
                      tuple(_classical(p) for p in d.premises))


def to_united(d: Derivation, config: CheckerConfig = DEFAULT_CONFIG) -> Derivation:
    """Translate through the move calculus, then eliminate the moves."""
    _validated(d, CLL, config)
    return _without_moves(_united(d))


def _united(d: Derivation) -> Derivation:
    premises = tuple(_united(p) for p in d.premises)
    j = _retag(united_judgment(d.conclusion), ULLM)
    p = j.process
    rule = d.rule
    if rule == "id":
        a, b = p.left, p.right
        base = j.with_(delta=EMPTY.add(a, dual(j.right.get(a))), right=EMPTY.add(b, j.right.get(b)))
        return _move_right(Derivation("idR", base), a)
    if rule == "1":
        return Derivation("1R", j)
    if rule == "bot":
        return _move_right(Derivation("1L", _moved(j, p.channel), premises), p.channel)
    if rule == "tensor":
        return Derivation("tensorR", j, premises)
    if rule == "par":
        return Derivation("lolliR", j, (_move_left(premises[0], p.binder),))
    if rule in ("plus", "with"):
        return Derivation("plusR" if rule == "plus" else "withR", j, premises)
    if rule == "copy":
        _, y, _ = as_output(p)
        return Derivation("copyL", j, (_move_left(premises[0], y),))
    if rule == "?":
        x = _introduced(d)
        return _move_right(Derivation("!L", _moved(j, x), premises), x)
    if rule == "!":
        return Derivation("!R", j, premises)
    if rule == "cut":
        return Derivation("cutRL", j, (premises[0], _move_left(premises[1], p.name)))
    if rule in ("cut?R", "cut?L"):
        return Derivation("cut!R" if rule == "cut?R" else "cut!L", j, premises)
    if rule in MIX_RULES:
        return Derivation(rule, j, premises)
    raise MalformedDerivation(f"unknown classical rule {rule}")


# ---------------------------------------------------------------------------
# The intuitionistic fragment
# ---------------------------------------------------------------------------

@dataclass
class FragmentReport:
    max_r_degree: int
    r_degree_per_node: Dict[Tuple[int, ...], int] = field(default_factory=dict)
    ill_member: bool = False
    witness: Optional[Tuple[int, ...]] = None

    def to_dict(self) -> dict:
        return {
            "max_r_degree": self.max_r_degree,
            "r_degree_per_node": {".".join(map(str, path)) or "root": n
                                  for path, n in self.r_degree_per_node.items()},
            "ill_member": self.ill_member,
            "witness": None if self.witness is None else list(self.witness),
        }


def _intuitionistic_node(node: Derivation) -> bool:
    j = node.conclusion
    return (len(j.right) == 1 and node.rule in STAR_RULES
            and all(in_ill_grammar(t) for t in j.types()))


def fragment_report(d: Derivation, config: CheckerConfig = DEFAULT_CONFIG) -> FragmentReport:
    """r-degree of every node, and the first node outside the intuitionistic fragment."""
    _validated(d, ULL, config)
    degrees = {}
    witness = None
    for path, node in d.walk():
        degrees[path] = len(node.conclusion.right)
        if witness is None and not _intuitionistic_node(node):
            witness = path
    logger.debug("fragment report: max r-degree %d, first offending node %s",
                 max(degrees.values()), witness)
    return FragmentReport(max(degrees.values()), degrees, witness is None, witness)


_FROM_ULL = {ull: ill for ill, ull in ILL_TO_ULL.items()}


def to_intuitionistic(d: Derivation, config: CheckerConfig = DEFAULT_CONFIG) -> Derivation:
    report = fragment_report(d, config)
    if not report.ill_member:
        raise NotInFragment(report)
    return _relabel(d, ILL, _FROM_ULL)


def embed_intuitionistic(d: Derivation, config: CheckerConfig = DEFAULT_CONFIG) -> Derivation:
    """The same derivation read in the two-sided system."""
    _validated(d, ILL, config)
    return _relabel(d, ULL, ILL_TO_ULL)


def _relabel(d: Derivation, system: str, names: Dict[str, str]) -> Derivation:
    return Derivation(names.get(d.rule, d.rule), _retag(d.conclusion, system),
                      tuple(_relabel(p, system, names) for p in d.premises))


# ---------------------------------------------------------------------------
# Locality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    kind: str
    name: str
    path: Tuple[str, ...]
    message: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "name": self.name, "path": list(self.path), "message": self.message}


def locality_diagnose(p) -> List[Diagnostic]:
    """Servers and empty sends on names that were received earlier on the same thread."""
    found = []
    _diagnose(p, (), frozenset(), found)
    return found


def _steps(p):
    if isinstance(p, Par):
        return (("left", p.left), ("right", p.right))
    if isinstance(p, Branch):
        return tuple((f"arm:{label}", arm) for label, arm in p.arms)
    return tuple(("body", c) for c in process_children(p))


def _diagnose(p, path, received, found):
    if isinstance(p, Server) and p.channel in received:
        found.append(Diagnostic("NonLocalServer", p.channel, path,
                                f"received name {p.channel} is used as a server"))
    if isinstance(p, CloseOut) and p.channel in received:
        found.append(Diagnostic("NonLocalEmptySend", p.channel, path,
                                f"received name {p.channel} is closed by an empty send"))
    binder = binder_of(p)
    if isinstance(p, Input):
        received = received | {binder}
    elif binder is not None:
        received = received - {binder}
    for step, sub in _steps(p):
        _diagnose(sub, path + (step,), received, found)
