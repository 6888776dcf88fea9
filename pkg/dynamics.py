"""Structural congruence and reduction.

Reduction matches the beta and commuting-conversion rules at a restriction
`new x (P | Q)`, in the printed orientation and, after one `cutSymm`, in the
swapped one. It then closes under the right component of the restriction,
under the left one through `cutSymm`, and under both sides of a bare parallel
composition. Prefixed processes never reduce.
"""

import logging
from collections import deque
from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Optional, Tuple

from checker import CheckerConfig, DEFAULT_CONFIG, Derivation, assert_valid
from constants import CLL, CONGRUENCE_SEARCH_LIMIT, FUEL_FACTOR, MOVES, SILENT_RULES
from core import (
    BOT, Branch, CloseOut, Forward, Input, ONE, Output, Par, Plus, Process, Query, Restrict,
    Select, Server, Tensor, TypeExpr, WaitIn, as_bound_send, as_cut, as_output, all_names,
    alpha_eq, binder_of, bound_send, copy_request, dual, free_names, fresh_name, process_size,
    rename_binder, replace_at, subformulas, substitute, subterms,
)
from errors import FuelExhausted, NotFound, TypePreservationFailure
from inference import InferenceBudget, infer

logger = logging.getLogger(__name__)

Position = Tuple[str, ...]


@dataclass(frozen=True)
class StepLabel:
    rule: str
    position: Position
    preamble: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"rule": self.rule, "position": list(self.position), "preamble": list(self.preamble)}


@dataclass(frozen=True)
class Rewrite:
    axiom: str
    position: Position
    process: Process


def _flip(annotation: Optional[TypeExpr]) -> Optional[TypeExpr]:
    return None if annotation is None else dual(annotation)


def canonical(p: Process) -> Process:
    """Alpha-representative: binders renamed #0, #1, ... in preorder."""
    return _canonical(p, [0])


def _canonical(p: Process, counter: List[int]) -> Process:
    if binder_of(p) is not None:
        p = rename_binder(p, f"#{counter[0]}")
        counter[0] += 1
        return replace(p, body=_canonical(p.body, counter))
    if isinstance(p, Par):
        return Par(_canonical(p.left, counter), _canonical(p.right, counter))
    if isinstance(p, Branch):
        return Branch(p.channel, tuple((label, _canonical(arm, counter)) for label, arm in p.arms))
    if isinstance(p, (Output, Select, WaitIn)):
        return replace(p, body=_canonical(p.body, counter))
    return p


# ---------------------------------------------------------------------------
# Structural congruence
# ---------------------------------------------------------------------------

def _axioms_at(p: Process) -> Iterator[Tuple[str, Process]]:
    shape = as_cut(p)
    if shape is None:
        return
    x, t, left, right = shape
    yield "cutSymm", Restrict(x, _flip(t), Par(right, left))
    inner = as_cut(right)
    if inner is None:
        return
    y, u, q, r = inner
    if y == x:
        return
    if x not in free_names(q) and y not in free_names(left):
        yield "cutAssocL", Restrict(y, u, Par(q, Restrict(x, t, Par(left, r))))
    if x not in free_names(r) and y not in free_names(left):
        yield "cutAssocR", Restrict(y, u, Par(Restrict(x, t, Par(left, q)), r))


def congruence_axioms(p: Process) -> List[Rewrite]:
    """Every single-axiom rewrite of p, at every position."""
    found = []
    for position, sub in subterms(p):
        for axiom, image in _axioms_at(sub):
            found.append(Rewrite(axiom, position, replace_at(p, position, image)))
    return found


def congruent(p: Process, q: Process, budget: int) -> Optional[List[str]]:
    """Axiom names leading from p to q within `budget` applications, if found."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    target = canonical(q)
    start = canonical(p)
    if start == target:
        return []
    seen = {start}
    frontier = deque([(p, [])])
    while frontier:
        current, path = frontier.popleft()
        if len(path) >= budget:
            continue
        for rewrite in congruence_axioms(current):
            key = canonical(rewrite.process)
            if key in seen:
                continue
            if key == target:
                return path + [rewrite.axiom]
            seen.add(key)
            if len(seen) > CONGRUENCE_SEARCH_LIMIT:
                logger.info("congruence search stopped after %d terms", len(seen))
                return None
            frontier.append((rewrite.process, path + [rewrite.axiom]))
    return None


# ---------------------------------------------------------------------------
# Redexes
# ---------------------------------------------------------------------------

def _fresh_for(name: str, *processes: Process, extra=()) -> str:
    avoid = set(extra)
    for p in processes:
        avoid |= all_names(p)
    return fresh_name(name, avoid)


def _beta(x: str, t: Optional[TypeExpr], left: Process, right: Process) -> List[Tuple[str, Process]]:
    """Beta redexes of new x:t (left | right) in the printed orientation."""
    found = []
    if isinstance(right, Forward) and x in (right.left, right.right) and right.left != right.right:
        other = right.right if right.left == x else right.left
        found.append(("betaId", substitute(left, other, x)))
    if left == CloseOut(x) and isinstance(right, WaitIn) and right.channel == x:
        found.append(("betaClose", right.body))
    send = as_bound_send(left)
    if send is not None and send[0] == x and isinstance(right, Input) and right.channel == x:
        _, y, p1, p2 = send
        if y in free_names(right) or y in free_names(p2) or y == x:
            y2 = _fresh_for(y, left, right, extra={x})
            p1 = substitute(p1, y2, y)
            y = y2
        t1 = t.left if isinstance(t, Tensor) else None
        t2 = t.right if isinstance(t, Tensor) else None
        reduct = Restrict(x, t2, Par(p2, Restrict(y, t1, Par(p1, substitute(right.body, y, right.binder)))))
        found.append(("betaSend", reduct))
    if (isinstance(left, Select) and left.channel == x and isinstance(right, Branch)
            and right.channel == x and right.arm(left.label) is not None):
        tj = t.branch(left.label) if isinstance(t, Plus) else None
        found.append(("betaSel", Restrict(x, tj, Par(left.body, right.arm(left.label)))))
    if isinstance(right, Server) and right.channel == x:
        request = as_output(left)
        if x not in free_names(left):
            found.append(("betaWeaken", left))
        elif request is not None and request[0] == x:
            _, y, body = request
            if y in free_names(right) or y == x:
                y2 = _fresh_for(y, left, right, extra={x})
                body = substitute(body, y2, y)
                y = y2
            s = t.body if isinstance(t, Query) else None
            spawned = Restrict(y, s, Par(body, substitute(right.body, y, right.binder)))
            found.append(("betaServ", Restrict(x, t, Par(spawned, right))))
    return found


def _pulled(binder_holder: Process, avoid: Process, y: str) -> Process:
    """Rename the binder of a prefix that would capture a name of `avoid` or y."""
    b = binder_of(binder_holder)
    if b is not None and (b in free_names(avoid) or b == y):
        return rename_binder(binder_holder, _fresh_for(b, binder_holder, avoid, extra={y}))
    return binder_holder


def _kappa(y: str, t: Optional[TypeExpr], left: Process, right: Process) -> List[Tuple[str, Process]]:
    """Commuting conversions of new y:t (left | right), printed orientation."""
    found = []

    def cut_with(body: Process) -> Process:
        return Restrict(y, t, Par(left, body))

    if isinstance(right, WaitIn) and right.channel != y:
        found.append(("kappaClose", WaitIn(right.channel, cut_with(right.body))))
    send = as_bound_send(right)
    if send is not None and send[0] != y:
        renamed = _pulled(right, left, y)
        c, z, q1, q2 = as_bound_send(renamed)
        if y in free_names(q2):
            found.append(("kappaSendR", bound_send(c, z, q1, cut_with(q2), renamed.annotation)))
        if y in free_names(q1):
            found.append(("kappaSendL", bound_send(c, z, cut_with(q1), q2, renamed.annotation)))
    request = as_output(right)
    if request is not None and not isinstance(request[2], Par) and request[0] != y:
        renamed = _pulled(right, left, y)
        u, z, body = as_output(renamed)
        found.append(("kappaCopy", copy_request(u, z, cut_with(body))))
    if isinstance(right, Input) and right.channel != y:
        renamed = _pulled(right, left, y)
        found.append(("kappaRecv", Input(renamed.channel, renamed.binder, cut_with(renamed.body))))
    if isinstance(right, Select) and right.channel != y:
        found.append(("kappaSel", Select(right.channel, right.label, cut_with(right.body))))
    if isinstance(left, Branch) and left.channel != y:
        found.append(("kappaBra", Branch(left.channel, tuple(
            (label, Restrict(y, t, Par(arm, right))) for label, arm in left.arms))))
    return found


def _oriented(rules, x, t, left, right) -> List[Tuple[str, Tuple[str, ...], Process]]:
    found = [(rule, (), q) for rule, q in rules(x, t, left, right)]
    found += [(rule, ("cutSymm",), q) for rule, q in rules(x, _flip(t), right, left)]
    return found


def _redexes(x, t, left, right):
    return _oriented(_beta, x, t, left, right) + _oriented(_kappa, x, t, left, right)


def _exposed(x, t, left, right):
    """Beta redexes that one associativity step brings next to the restriction on x."""
    inner = as_cut(right)
    if inner is None:
        return
    y, u, q, r = inner
    if y == x or y in free_names(left):
        return
    if x not in free_names(q):
        for rule, preamble, reduct in _oriented(_beta, x, t, left, r):
            yield rule, ("cutAssocL",) + preamble, Restrict(y, u, Par(q, reduct))
    if x not in free_names(r):
        for rule, preamble, reduct in _oriented(_beta, x, t, left, q):
            yield rule, ("cutAssocR",) + preamble, Restrict(y, u, Par(reduct, r))


def _reductions(p: Process, position: Position) -> Iterator[Tuple[StepLabel, Process]]:
    shape = as_cut(p)
    if shape is not None:
        x, t, left, right = shape
        for rule, preamble, reduct in _redexes(x, t, left, right):
            yield StepLabel(rule, position, preamble), reduct
        for rule, preamble, reduct in _exposed(x, t, left, right):
            yield StepLabel(rule, position, preamble), reduct
        for label, reduct in _reductions(right, position + ("body", "right")):
            yield label, Restrict(x, t, Par(left, reduct))
        for label, reduct in _reductions(left, position + ("body", "left")):
            yield (StepLabel(label.rule, label.position, ("cutSymm",) + label.preamble),
                   Restrict(x, t, Par(reduct, right)))
    elif isinstance(p, Restrict) and as_output(p) is None:
        for label, reduct in _reductions(p.body, position + ("body",)):
            yield label, Restrict(p.name, p.annotation, reduct)
    elif isinstance(p, Par):
        for label, reduct in _reductions(p.left, position + ("left",)):
            yield label, Par(reduct, p.right)
        for label, reduct in _reductions(p.right, position + ("right",)):
            yield label, Par(p.left, reduct)


def step(p: Process) -> List[Tuple[StepLabel, Process]]:
    """All one-step reducts of p, without repeats up to renaming of bound names."""
    found = []
    seen = set()
    for label, reduct in _reductions(p, ()):
        key = (label.rule, canonical(reduct))
        if key not in seen:
            seen.add(key)
            found.append((label, reduct))
    return found


# ---------------------------------------------------------------------------
# Progress
# ---------------------------------------------------------------------------

def _silent_names(d: Derivation) -> Tuple[str, str]:
    premise = d.premises[0].conclusion
    u = next(iter(premise.gamma.names() - d.conclusion.gamma.names()))
    x = next(iter(d.conclusion.linear_names - premise.linear_names))
    return x, u


def _is_silent(d: Derivation) -> bool:
    if d.system == CLL:
        return d.rule == "?"
    return d.rule in SILENT_RULES


def _component(d: Derivation, process: Process) -> Optional[Derivation]:
    for premise in d.premises:
        if alpha_eq(premise.conclusion.process, process):
            return premise
    return None


def _progress(d: Derivation, position: Position) -> Tuple[StepLabel, Process]:
    if _is_silent(d):
        x, u = _silent_names(d)
        label, reduct = _progress(d.premises[0], position)
        return label, substitute(reduct, x, u)
    if d.rule in MOVES:
        return _progress(d.premises[0], position)

    p = d.conclusion.process
    if isinstance(p, Par):
        for side, component in (("left", p.left), ("right", p.right)):
            found = _component_progress(d, component, position + (side,))
            if found is not None:
                label, reduct = found
                return label, (Par(reduct, p.right) if side == "left" else Par(p.left, reduct))
        raise NotFound(f"no redex in {p}", [str(d.conclusion)])

    shape = as_cut(p)
    if shape is None:
        raise ValueError(f"not a composition: {p}")
    x, t, left, right = shape

    betas = _oriented(_beta, x, t, left, right)
    if betas:
        rule, preamble, reduct = betas[0]
        return StepLabel(rule, position, preamble), reduct

    for side, component in (("left", left), ("right", right)):
        found = _component_progress(d, component, position + ("body", side))
        if found is None:
            continue
        label, reduct = found
        if side == "left":
            return (StepLabel(label.rule, label.position, ("cutSymm",) + label.preamble),
                    Restrict(x, t, Par(reduct, right)))
        return label, Restrict(x, t, Par(left, reduct))

    exposed = list(_exposed(x, t, left, right))
    exposed += [(rule, ("cutSymm",) + preamble, reduct)
                for rule, preamble, reduct in _exposed(x, _flip(t), right, left)]
    if exposed:
        rule, preamble, reduct = exposed[0]
        return StepLabel(rule, position, preamble), reduct

    kappas = _oriented(_kappa, x, t, left, right)
    if kappas:
        rule, preamble, reduct = kappas[0]
        return StepLabel(rule, position, preamble), reduct

    logger.debug("no typed redex at %s in %s", position, p)
    raise NotFound(f"no redex in {p}", [str(d.conclusion)])


def _component_progress(d: Derivation, component: Process,
                        position: Position) -> Optional[Tuple[StepLabel, Process]]:
    """The component's own step, or None when it is stuck or not a composition."""
    premise = _component(d, component)
    if premise is None or not _reducible(component):
        return None
    try:
        return _progress(premise, position)
    except NotFound:
        return None


def _reducible(p: Process) -> bool:
    return as_cut(p) is not None or isinstance(p, Par)


def find_redex(d: Derivation, config: CheckerConfig = DEFAULT_CONFIG) -> Tuple[StepLabel, Process]:
    """One reduct of the root process, found by following the typing derivation."""
    assert_valid(d, config)
    if not _reducible(_strip(d).conclusion.process):
        raise ValueError(f"root process is not a composition: {d.conclusion.process}")
    return _progress(d, ())


def _strip(d: Derivation) -> Derivation:
    while _is_silent(d) or d.rule in MOVES:
        d = d.premises[0]
    return d


# ---------------------------------------------------------------------------
# Closed programs
# ---------------------------------------------------------------------------

def _closed(d: Derivation) -> bool:
    j = d.conclusion
    if d.system == CLL or len(j.gamma):
        return False
    entries = j.delta.entries + j.right.entries
    if len(entries) != 1:
        return False
    name, t = entries[0]
    return (t == ONE and name in j.right) or (t == BOT and name in j.delta)


def harvest_types(d: Derivation) -> Tuple[TypeExpr, ...]:
    found = set()
    for _, node in d.walk():
        for t in node.conclusion.types():
            found |= subformulas(t)
    return tuple(sorted(found, key=str))


def run_closed(d: Derivation, fuel: Optional[int] = None, trace: Optional[List[Dict]] = None,
               config: CheckerConfig = DEFAULT_CONFIG) -> Process:
    """Reduce a closed program until no composition is left.

    Every reduct is re-typed at the original judgment before the next step.
    Steps are appended to `trace` as {rule, position, before, after}.
    """
    assert_valid(d, config)
    if not _closed(d):
        raise ValueError(f"not a closed program: {d.conclusion}")
    process = d.conclusion.process
    fuel = FUEL_FACTOR * process_size(process) if fuel is None else fuel
    trace = [] if trace is None else trace
    budget = InferenceBudget(universe=harvest_types(d))
    current = d
    steps = 0
    while _reducible(process):
        if steps >= fuel:
            raise FuelExhausted(steps, trace)
        label, reduct = find_redex(current, config)
        steps += 1
        trace.append({"rule": label.rule, "position": list(label.position),
                      "before": str(process), "after": str(reduct)})
        logger.debug("step %d: %s at %s", steps, label.rule, label.position)
        try:
            current = infer(d.conclusion.with_(process=reduct), budget, config)
        except NotFound:
            raise TypePreservationFailure(steps, reduct)
        process = current.conclusion.process
    return process
