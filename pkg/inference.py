"""Goal-directed proof search for the four type systems.

The search reads every rule bottom-up. The head of the process decides
which rules apply, and the region and type of the subject name pick among
them. Binary rules split the linear context by the free names of the two
components. A linear name that can be weakened (a `!A` on the left, a `?A`
on the right) is turned into an unrestricted one only where it has to be:
at a request through it, at a rule that needs an otherwise empty linear
context, and when both components of a composition mention it.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple

from checker import CheckerConfig, DEFAULT_CONFIG, Derivation
from constants import (
    CLL, DEFAULT_MAX_BACKTRACKS, DEFAULT_MAX_DEPTH, ILL, MOVE_LEFT, MOVE_RIGHT, SYSTEMS, ULL, ULLM,
)
from core import (
    BOT, Bang, Bot, Branch, CloseOut, Context, EMPTY, Forward, Inact, Input, Judgment, Lolli,
    ONE, One, Par, Plus, Process, Query, Restrict, Select, Server, Tensor, TypeExpr,
    WaitIn, With, all_names, as_cut, as_output, dual, free_names, fresh_name, in_ill_grammar,
    subformulas, substitute, subterms, unshadow,
)
from errors import AnnotationRequired, NotFound

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InferenceBudget:
    max_depth: int = DEFAULT_MAX_DEPTH
    max_backtracks: int = DEFAULT_MAX_BACKTRACKS
    universe: Tuple[TypeExpr, ...] = ()

    def __post_init__(self):
        if self.max_depth < 0 or self.max_backtracks < 0:
            raise ValueError("inference bounds must be non-negative")


class _Exhausted(Exception):
    pass


def type_universe(judgment: Judgment, extra: Iterable[TypeExpr] = ()) -> Tuple[TypeExpr, ...]:
    """Candidate cut types: subformulas of the judgment, annotations and extras, closed under duality."""
    seeds = set(judgment.types()) | set(extra)
    for _, sub in subterms(judgment.process):
        if isinstance(sub, Restrict) and sub.annotation is not None:
            seeds.add(sub.annotation)
    found = {ONE, BOT}
    for t in seeds:
        for s in subformulas(t):
            found.add(s)
            found.add(dual(s))
    return tuple(sorted(found, key=lambda t: (str(t).count(" "), len(str(t)), str(t))))


def _head_kind(p: Process, x: str):
    """Constructor the classical type of x must have, judging by p's first use of x."""
    if x not in free_names(p):
        return Query
    for _, sub in subterms(p):
        if isinstance(sub, Forward) and x in (sub.left, sub.right):
            return None
        if isinstance(sub, CloseOut) and sub.channel == x:
            return One
        if isinstance(sub, WaitIn) and sub.channel == x:
            return Bot
        if isinstance(sub, Input) and sub.channel == x:
            return Lolli
        if isinstance(sub, Select) and sub.channel == x:
            return Plus
        if isinstance(sub, Branch) and sub.channel == x:
            return With
        if isinstance(sub, Server) and sub.channel == x:
            return Bang
        shape = as_output(sub)
        if shape and shape[0] == x:
            return (Tensor, Query) if isinstance(shape[2], Par) else Query
    return None


def _fits_kind(t: TypeExpr, kind) -> bool:
    return kind is None or isinstance(t, kind)


class ProofSearch:
    """One search over a fixed system, budget and universe of cut types."""

    def __init__(self, system: str, budget: InferenceBudget, config: CheckerConfig,
                 universe: Sequence[TypeExpr]):
        self.system = system
        self.budget = budget
        self.config = config
        self.universe = tuple(universe)
        self.backtracks = 0
        self.deepest: List[Tuple[int, str]] = []
        self.missing_annotation = False

    # -- bookkeeping ----------------------------------------------------------

    def trace(self) -> List[str]:
        return [f"depth {depth}: {goal}" for depth, goal in self.deepest]

    def _failed(self, goal: Judgment, depth: int):
        self.backtracks += 1
        if self.backtracks > self.budget.max_backtracks:
            raise _Exhausted()
        if not self.deepest or depth > self.deepest[0][0]:
            self.deepest = [(depth, str(goal))]
        elif depth == self.deepest[0][0] and len(self.deepest) < 5:
            self.deepest.append((depth, str(goal)))

    def _goal(self, base: Judgment, gamma=None, delta=None, process=None, right=None) -> Optional[Judgment]:
        try:
            return Judgment(
                self.system,
                base.gamma if gamma is None else gamma,
                base.delta if delta is None else delta,
                base.process if process is None else process,
                base.right if right is None else right,
            )
        except ValueError:
            return None

    # -- driving --------------------------------------------------------------

    def prove(self, goal: Judgment, depth: int = 0) -> Iterator[Derivation]:
        if depth > self.budget.max_depth:
            self._failed(goal, depth)
            return
        found = False
        for d in self._rules(goal, depth + 1):
            found = True
            yield d
        if not found:
            self._failed(goal, depth)

    def _premises(self, goals: Sequence[Optional[Judgment]], depth: int) -> Iterator[Tuple[Derivation, ...]]:
        if any(g is None for g in goals):
            return
        if not goals:
            yield ()
            return
        for first in self.prove(goals[0], depth):
            for rest in self._premises(goals[1:], depth):
                yield (first,) + rest

    def _apply(self, rule: str, goal: Judgment, premises: Sequence[Optional[Judgment]],
               depth: int) -> Iterator[Derivation]:
        for ds in self._premises(premises, depth):
            yield Derivation(rule, goal, ds)

    # -- weakenable names -----------------------------------------------------

    def _weakenable(self, goal: Judgment, x: str) -> bool:
        t = goal.delta.get(x)
        if t is not None:
            return isinstance(t, Query) if self.system == CLL else isinstance(t, Bang)
        t = goal.right.get(x)
        return t is not None and isinstance(t, Query) and self.system in (ULL, ULLM)

    def _convert(self, goal: Judgment, names: Iterable[str]) -> Optional[Tuple[Judgment, Callable]]:
        """Move weakenable linear names to the unrestricted region, one silent rule each."""
        steps = []
        g = goal
        for x in sorted(names):
            if not self._weakenable(g, x):
                return None
            u = fresh_name(x, g.context_names() | all_names(g.process))
            process = substitute(g.process, u, x)
            if x in g.delta:
                a = g.delta.get(x).body
                rule = "?" if self.system == CLL else "!L"
                premise = self._goal(g, gamma=g.gamma.add(u, a), delta=g.delta.remove(x), process=process)
            else:
                b = g.right.get(x).body
                if self.system == ULLM:
                    moved = self._goal(g, delta=g.delta.add(x, Bang(dual(b))), right=g.right.remove(x))
                    if moved is None:
                        return None
                    steps.append((MOVE_RIGHT, g))
                    g = moved
                rule = "!L" if self.system == ULLM else "?R"
                premise = self._goal(g, gamma=g.gamma.add(u, dual(b)),
                                     delta=g.delta.remove(x), right=g.right.remove(x), process=process)
            if premise is None:
                return None
            steps.append((rule, g))
            g = premise

        def wrap(d: Derivation) -> Derivation:
            for rule, conclusion in reversed(steps):
                d = Derivation(rule, conclusion, (d,))
            return d

        return g, wrap

    def _demanded(self, goal: Judgment) -> set:
        p = goal.process
        weak = {n for n in goal.linear_names if self._weakenable(goal, n)}
        if isinstance(p, Forward):
            return weak - {p.left, p.right}
        if isinstance(p, CloseOut):
            return weak - {p.channel}
        if isinstance(p, Server):
            return weak - {p.channel}
        if isinstance(p, Inact):
            return weak
        shape = as_output(p)
        if shape is not None:
            channel, payload, body = shape
            if channel in weak:
                return {channel}
            if isinstance(body, Par):
                return (weak & free_names(body.left) & free_names(body.right)) - {channel}
            return set()
        pair = as_cut(p)
        if pair is not None:
            x, _, left, right = pair
            return (weak & free_names(left) & free_names(right)) - {x}
        if isinstance(p, Par):
            return weak & free_names(p.left) & free_names(p.right)
        return set()

    def _split(self, goal: Judgment, principal: set, fn_left, fn_right):
        """Partition the non-principal linear entries between two components."""
        parts = {("delta", 0): [], ("delta", 1): [], ("right", 0): [], ("right", 1): []}
        for region in ("delta", "right"):
            for n, t in getattr(goal, region):
                if n in principal:
                    continue
                in_left, in_right = n in fn_left, n in fn_right
                if in_left and in_right:
                    return None
                if in_right:
                    parts[(region, 1)].append((n, t))
                elif in_left or self._weakenable(goal, n):
                    parts[(region, 0)].append((n, t))
                else:
                    return None
        return (Context(tuple(parts[("delta", 0)])), Context(tuple(parts[("right", 0)])),
                Context(tuple(parts[("delta", 1)])), Context(tuple(parts[("right", 1)])))

    # -- moves ----------------------------------------------------------------

    def _on_side(self, goal: Judgment, x: str, side: str, apply) -> Iterator[Derivation]:
        """Run a rule that needs x on `side`; the move calculus may first move x there."""
        region = goal.region_of(x)
        if region == side:
            yield from apply(goal)
        elif self.system == ULLM and region in ("delta", "right"):
            flipped, rule = self._flipped(goal, x)
            if flipped is not None:
                for d in apply(flipped):
                    yield Derivation(rule, goal, (d,))

    def _flipped(self, goal: Judgment, x: str):
        if x in goal.delta:
            t = goal.delta.get(x)
            return self._goal(goal, delta=goal.delta.remove(x), right=goal.right.add(x, dual(t))), MOVE_LEFT
        t = goal.right.get(x)
        return self._goal(goal, delta=goal.delta.add(x, dual(t)), right=goal.right.remove(x)), MOVE_RIGHT

    def _arranged(self, goal: Judgment, placement: dict, apply) -> Iterator[Derivation]:
        """Move every name of `placement` to its side (move calculus), then apply the axiom."""
        steps = []
        g = goal
        for x in sorted(placement):
            region = g.region_of(x)
            if region == placement[x]:
                continue
            if self.system != ULLM or region not in ("delta", "right"):
                return
            flipped, rule = self._flipped(g, x)
            if flipped is None:
                return
            steps.append((rule, g))
            g = flipped
        for d in apply(g):
            for rule, conclusion in reversed(steps):
                d = Derivation(rule, conclusion, (d,))
            yield d

    # -- rules ----------------------------------------------------------------

    def _rules(self, goal: Judgment, depth: int) -> Iterator[Derivation]:
        demanded = self._demanded(goal)
        if demanded:
            converted = self._convert(goal, demanded)
            if converted is None:
                return
            inner, wrap = converted
            for d in self._rules(inner, depth):
                yield wrap(d)
            return

        if self.system == CLL:
            yield from self._classical(goal, depth)
        else:
            yield from self._two_sided(goal, depth)

    def _two_sided(self, goal: Judgment, depth: int) -> Iterator[Derivation]:
        p = goal.process
        if isinstance(p, Forward):
            yield from self._forwarder(goal)
        elif isinstance(p, CloseOut):
            yield from self._close(goal)
        elif isinstance(p, WaitIn):
            yield from self._wait(goal, depth)
        elif isinstance(p, Input):
            yield from self._receive(goal, depth)
        elif isinstance(p, Select):
            yield from self._select(goal, depth)
        elif isinstance(p, Branch):
            yield from self._branch(goal, depth)
        elif isinstance(p, Server):
            yield from self._server(goal, depth)
        elif as_output(p) is not None:
            yield from self._send(goal, depth)
        elif as_cut(p) is not None:
            yield from self._cut(goal, depth)
        elif isinstance(p, Par):
            yield from self._mix(goal, depth)
        elif isinstance(p, Inact):
            yield from self._empty(goal)

    # axioms

    def _forwarder(self, goal: Judgment) -> Iterator[Derivation]:
        x, y = goal.process.left, goal.process.right
        if x == y:
            return
        names = {x, y}

        def axiom(rule, delta_names, right_names, dualised):
            def apply(g):
                if g.linear_names != names:
                    return
                a = g.delta.get(x) if x in delta_names else g.right.get(x)
                b = g.delta.get(y) if y in delta_names else g.right.get(y)
                if a is not None and b is not None and b == (dual(a) if dualised else a):
                    yield Derivation(rule, g)
            placement = {n: "delta" for n in delta_names}
            placement.update({n: "right" for n in right_names})
            return self._arranged(goal, placement, apply)

        if self.system == ULL:
            yield from axiom("idR", {x}, {y}, False)
            yield from axiom("idL", {x, y}, set(), True)
            yield from axiom("idRL", {y}, {x}, False)
            yield from axiom("idRR", set(), {x, y}, True)
        else:
            yield from axiom("id" if self.system == ILL else "idR", {x}, {y}, False)

    def _close(self, goal: Judgment) -> Iterator[Derivation]:
        x = goal.process.channel

        def one_r(g):
            if not len(g.delta) and g.right == Context(((x, ONE),)):
                yield Derivation("1R", g)

        def bot_l(g):
            if not len(g.right) and g.delta == Context(((x, BOT),)):
                yield Derivation("botL", g)

        yield from self._on_side(goal, x, "right", one_r)
        if self.system == ULL:
            yield from bot_l(goal)

    def _empty(self, goal: Judgment) -> Iterator[Derivation]:
        if self.config.mix and self.system in (ULL, ULLM) and not goal.linear_names:
            yield Derivation("empty", goal)

    # unary

    def _wait(self, goal, depth):
        p = goal.process
        x = p.channel

        def one_l(g):
            if isinstance(g.delta.get(x), One):
                yield from self._apply("1L", g, [self._goal(g, delta=g.delta.remove(x), process=p.body)], depth)

        def bot_r(g):
            if isinstance(g.right.get(x), Bot):
                yield from self._apply("botR", g, [self._goal(g, right=g.right.remove(x), process=p.body)], depth)

        yield from self._on_side(goal, x, "delta", one_l)
        if self.system == ULL:
            yield from bot_r(goal)

    def _receive(self, goal, depth):
        p = goal.process
        x, y = p.channel, p.binder

        def tensor_l(g):
            t = g.delta.get(x)
            if isinstance(t, Tensor):
                premise = self._goal(g, delta=g.delta.remove(x).add(y, t.left).add(x, t.right), process=p.body)
                yield from self._apply("tensorL", g, [premise], depth)

        def par_r(g):
            t = g.right.get(x)
            if isinstance(t, Lolli):
                premise = self._goal(g, right=g.right.remove(x).add(y, dual(t.left)).add(x, t.right),
                                     process=p.body)
                yield from self._apply("parR", g, [premise], depth)

        def lolli_r(g):
            t = g.right.get(x)
            if isinstance(t, Lolli):
                premise = self._goal(g, delta=g.delta.add(y, t.left), right=g.right.remove(x).add(x, t.right),
                                     process=p.body)
                yield from self._apply("lolliR", g, [premise], depth)

        if self.system == ULL:
            yield from tensor_l(goal)
            yield from par_r(goal)
            yield from lolli_r(goal)
        else:
            yield from self._on_side(goal, x, "delta", tensor_l)
            yield from self._on_side(goal, x, "right", lolli_r)

    def _select(self, goal, depth):
        p = goal.process
        x, label = p.channel, p.label

        def chosen(region, kind, rule):
            def apply(g):
                t = getattr(g, region).get(x)
                if isinstance(t, kind) and t.branch(label) is not None:
                    ctx = getattr(g, region).remove(x).add(x, t.branch(label))
                    premise = self._goal(g, process=p.body, **{region: ctx})
                    yield from self._apply(rule, g, [premise], depth)
            return apply

        yield from self._on_side(goal, x, "right", chosen("right", Plus, "plusR"))
        yield from self._on_side(goal, x, "delta", chosen("delta", With, "withL"))

    def _branch(self, goal, depth):
        p = goal.process
        x = p.channel

        def offered(region, kind, rule):
            def apply(g):
                t = getattr(g, region).get(x)
                if isinstance(t, kind) and t.labels() == p.labels():
                    premises = [
                        self._goal(g, process=arm,
                                   **{region: getattr(g, region).remove(x).add(x, t.branch(label))})
                        for label, arm in p.arms
                    ]
                    yield from self._apply(rule, g, premises, depth)
            return apply

        yield from self._on_side(goal, x, "right", offered("right", With, "withR"))
        yield from self._on_side(goal, x, "delta", offered("delta", Plus, "plusL"))

    def _server(self, goal, depth):
        p = goal.process
        x, y = p.channel, p.binder

        def bang_r(g):
            t = g.right.get(x)
            if isinstance(t, Bang) and len(g.right) == 1 and not len(g.delta):
                premise = self._goal(g, delta=EMPTY, right=Context(((y, t.body),)), process=p.body)
                yield from self._apply("!R", g, [premise], depth)

        def query_l(g):
            t = g.delta.get(x)
            if isinstance(t, Query) and len(g.delta) == 1 and not len(g.right):
                premise = self._goal(g, delta=Context(((y, t.body),)), right=EMPTY, process=p.body)
                yield from self._apply("?L", g, [premise], depth)

        yield from self._on_side(goal, x, "right", bang_r)
        if self.system == ULL:
            yield from query_l(goal)

    # binary

    def _send(self, goal, depth):
        channel, payload, body = as_output(goal.process)
        if channel in goal.gamma:
            yield from self._copy(goal, channel, payload, body, depth)
            return
        if not isinstance(body, Par):
            return
        left, right = body.left, body.right
        x, y = channel, payload
        split = self._split(goal, {x}, free_names(left) - {y}, free_names(right))
        if split is None:
            return
        ld, lr, rd, rr = split

        def tensor_r(g):
            t = g.right.get(x)
            if isinstance(t, Tensor):
                yield from self._apply("tensorR", g, [
                    self._goal(g, delta=ld, right=lr.add(y, t.left), process=left),
                    self._goal(g, delta=rd, right=rr.add(x, t.right), process=right),
                ], depth)

        def par_l(g):
            t = g.delta.get(x)
            if isinstance(t, Lolli):
                yield from self._apply("parL", g, [
                    self._goal(g, delta=ld.add(y, dual(t.left)), right=lr, process=left),
                    self._goal(g, delta=rd.add(x, t.right), right=rr, process=right),
                ], depth)

        def lolli_l(g):
            t = g.delta.get(x)
            if isinstance(t, Lolli):
                yield from self._apply("lolliL", g, [
                    self._goal(g, delta=ld, right=lr.add(y, t.left), process=left),
                    self._goal(g, delta=rd.add(x, t.right), right=rr, process=right),
                ], depth)

        if self.system == ULL:
            yield from tensor_r(goal)
            yield from par_l(goal)
            yield from lolli_l(goal)
        else:
            yield from self._on_side(goal, x, "right", tensor_r)
            yield from self._on_side(goal, x, "delta", lolli_l)

    def _copy(self, goal, u, x, body, depth):
        a = goal.gamma.get(u)
        if self.system == ULL:
            yield from self._apply("copyR", goal, [self._goal(goal, right=goal.right.add(x, dual(a)), process=body)],
                                   depth)
        rule = "copy" if self.system == ILL else "copyL"
        yield from self._apply(rule, goal, [self._goal(goal, delta=goal.delta.add(x, a), process=body)], depth)

    def _cut_types(self, x: str, ann: Optional[TypeExpr], left: Process, right: Process) -> List[TypeExpr]:
        if ann is not None:
            return [ann]
        left_kind, right_kind = _head_kind(left, x), _head_kind(right, x)
        candidates = [t for t in self.universe
                      if _fits_kind(t, left_kind) and _fits_kind(dual(t), right_kind)]
        if not candidates:
            self.missing_annotation = True
        return candidates

    def _linear_cut_variants(self):
        if self.system == ULL:
            return (("cutRL", "right", False, "delta", False), ("cutLR", "delta", True, "right", True),
                    ("cutRR", "right", False, "right", True), ("cutLL", "delta", True, "delta", False))
        return (("cutRL", "right", False, "delta", False), ("cutLR", "delta", True, "right", True))

    def _cut(self, goal, depth):
        x, ann, left, right = as_cut(goal.process)
        for t in self._cut_types(x, ann, left, right):
            split = self._split(goal, {x}, free_names(left) - {x}, free_names(right) - {x})
            if split is not None:
                ld, lr, rd, rr = split
                for rule, left_side, left_dual, right_side, right_dual in self._linear_cut_variants():
                    lt = dual(t) if left_dual else t
                    rt = dual(t) if right_dual else t
                    premises = [
                        self._goal(goal, delta=ld.add(x, lt) if left_side == "delta" else ld,
                                   right=lr.add(x, lt) if left_side == "right" else lr, process=left),
                        self._goal(goal, delta=rd.add(x, rt) if right_side == "delta" else rd,
                                   right=rr.add(x, rt) if right_side == "right" else rr, process=right),
                    ]
                    yield from self._apply(rule, goal, premises, depth)
            if isinstance(right, Server) and right.channel == x and isinstance(t, Query):
                yield from self._server_cut(goal, right, left, dual(t.body), False, depth)
            if isinstance(left, Server) and left.channel == x and isinstance(t, Bang):
                yield from self._server_cut(goal, left, right, t.body, True, depth)

    def _server_cut(self, goal, server: Server, client: Process, a: TypeExpr, server_first: bool, depth):
        """Cut against a replicated server; `a` is the client's unrestricted type."""
        u, y = server.channel, server.binder
        server_names = free_names(server.body) - {y}
        weak = {n for n in goal.linear_names if self._weakenable(goal, n) and n in server_names}
        converted = self._convert(goal, weak) if weak else (goal, lambda d: d)
        if converted is None:
            return
        g, wrap = converted
        if g.linear_names & free_names(g.process.body.left if server_first else g.process.body.right):
            return
        srv = g.process.body.left if server_first else g.process.body.right
        cli = g.process.body.right if server_first else g.process.body.left
        client_goal = self._goal(g, gamma=g.gamma.add(u, a), process=cli)
        if self.system == CLL:
            variants = (("cut?L" if server_first else "cut?R", EMPTY, Context(((y, dual(a)),))),)
        else:
            suffix = "L" if server_first else "R"
            variants = [(f"cut!{suffix}", Context(((y, a),)), EMPTY)]
            if self.system == ULL:
                variants.append((f"cut?{suffix}", EMPTY, Context(((y, dual(a)),))))
        for rule, server_right, server_delta in variants:
            server_goal = self._goal(g, delta=server_delta, right=server_right, process=srv.body)
            premises = [server_goal, client_goal] if server_first else [client_goal, server_goal]
            for d in self._apply(rule, g, premises, depth):
                yield wrap(d)

    def _mix(self, goal, depth):
        if not self.config.mix or self.system == ILL:
            return
        p = goal.process
        split = self._split(goal, set(), free_names(p.left), free_names(p.right))
        if split is None:
            return
        ld, lr, rd, rr = split
        yield from self._apply("mix", goal, [
            self._goal(goal, delta=ld, right=lr, process=p.left),
            self._goal(goal, delta=rd, right=rr, process=p.right),
        ], depth)

    # -- classical system -----------------------------------------------------

    def _classical(self, goal: Judgment, depth: int) -> Iterator[Derivation]:
        p = goal.process
        d = goal.delta
        if isinstance(p, Forward):
            a = d.get(p.left)
            if p.left != p.right and a is not None and d == Context(((p.left, a), (p.right, dual(a)))):
                yield Derivation("id", goal)
        elif isinstance(p, CloseOut):
            if d == Context(((p.channel, ONE),)):
                yield Derivation("1", goal)
        elif isinstance(p, WaitIn):
            if isinstance(d.get(p.channel), Bot):
                yield from self._apply("bot", goal, [self._goal(goal, delta=d.remove(p.channel), process=p.body)],
                                       depth)
        elif isinstance(p, Input):
            t = d.get(p.channel)
            if isinstance(t, Lolli):
                delta = d.remove(p.channel).add(p.binder, dual(t.left)).add(p.channel, t.right)
                yield from self._apply("par", goal, [self._goal(goal, delta=delta, process=p.body)], depth)
        elif isinstance(p, Select):
            t = d.get(p.channel)
            if isinstance(t, Plus) and t.branch(p.label) is not None:
                delta = d.remove(p.channel).add(p.channel, t.branch(p.label))
                yield from self._apply("plus", goal, [self._goal(goal, delta=delta, process=p.body)], depth)
        elif isinstance(p, Branch):
            t = d.get(p.channel)
            if isinstance(t, With) and t.labels() == p.labels():
                premises = [self._goal(goal, delta=d.remove(p.channel).add(p.channel, t.branch(label)), process=arm)
                            for label, arm in p.arms]
                yield from self._apply("with", goal, premises, depth)
        elif isinstance(p, Server):
            t = d.get(p.channel)
            if isinstance(t, Bang) and len(d) == 1:
                premise = self._goal(goal, delta=Context(((p.binder, t.body),)), process=p.body)
                yield from self._apply("!", goal, [premise], depth)
        elif as_output(p) is not None:
            channel, payload, body = as_output(p)
            if channel in goal.gamma:
                premise = self._goal(goal, delta=d.add(payload, goal.gamma.get(channel)), process=body)
                yield from self._apply("copy", goal, [premise], depth)
            elif isinstance(body, Par) and isinstance(d.get(channel), Tensor):
                t = d.get(channel)
                split = self._split(goal, {channel}, free_names(body.left) - {payload}, free_names(body.right))
                if split is not None:
                    ld, _, rd, _ = split
                    yield from self._apply("tensor", goal, [
                        self._goal(goal, delta=ld.add(payload, t.left), process=body.left),
                        self._goal(goal, delta=rd.add(channel, t.right), process=body.right),
                    ], depth)
        elif as_cut(p) is not None:
            x, ann, left, right = as_cut(p)
            for t in self._cut_types(x, ann, left, right):
                split = self._split(goal, {x}, free_names(left) - {x}, free_names(right) - {x})
                if split is not None:
                    ld, _, rd, _ = split
                    yield from self._apply("cut", goal, [
                        self._goal(goal, delta=ld.add(x, t), process=left),
                        self._goal(goal, delta=rd.add(x, dual(t)), process=right),
                    ], depth)
                if isinstance(right, Server) and right.channel == x and isinstance(t, Query):
                    yield from self._server_cut(goal, right, left, t.body, False, depth)
                if isinstance(left, Server) and left.channel == x and isinstance(t, Bang):
                    yield from self._server_cut(goal, left, right, dual(t.body), True, depth)
        elif isinstance(p, Par):
            yield from self._mix(goal, depth)
        elif isinstance(p, Inact):
            if self.config.mix and not len(d):
                yield Derivation("empty", goal)


def _prepared(j: Judgment) -> Judgment:
    process = unshadow(j.process, j.context_names())
    return j if process is j.process else j.with_(process=process)


def infer(j: Judgment, budget: Optional[InferenceBudget] = None,
          config: CheckerConfig = DEFAULT_CONFIG) -> Derivation:
    """First derivation of j found within the budget.

    Binders that clash with names in scope are renamed first, so the root of
    the result is alpha-equivalent to j (identical when nothing clashes).
    """
    budget = budget or InferenceBudget()
    goal = _prepared(j)
    search = ProofSearch(goal.system, budget, config, type_universe(goal, budget.universe))
    try:
        for d in search.prove(goal):
            logger.debug("derived %s after %d backtracks", goal, search.backtracks)
            return d
    except _Exhausted:
        logger.info("search budget exhausted for %s", goal)
        raise NotFound(f"search budget exhausted for {goal}", search.trace())
    if search.missing_annotation:
        raise AnnotationRequired(f"no derivation of {goal}; an unannotated restriction has no "
                                 f"candidate type in the universe", search.trace())
    raise NotFound(f"no derivation of {goal}", search.trace())


def _region_assignments(system: str, names: Sequence[str]):
    regions = ("gamma", "delta") if system == CLL else ("gamma", "delta", "right")
    for choice in itertools.product(regions, repeat=len(names)):
        if system == ILL and choice.count("right") != 1:
            continue
        yield choice


def candidate_judgments(process: Process, system: str, universe: Sequence[TypeExpr]) -> Iterator[Judgment]:
    """Judgments of `process` that place each free name in a region at a universe type."""
    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r}")
    names = sorted(free_names(process))
    if system == ILL:
        universe = tuple(t for t in universe if in_ill_grammar(t))
    for regions in _region_assignments(system, names):
        for types in itertools.product(universe, repeat=len(names)):
            parts = {"gamma": [], "delta": [], "right": []}
            for name, region, t in zip(names, regions, types):
                parts[region].append((name, t))
            try:
                yield _prepared(Judgment(system, Context(tuple(parts["gamma"])),
                                         Context(tuple(parts["delta"])), process,
                                         Context(tuple(parts["right"]))))
            except ValueError:
                continue


def infer_all(process: Process, system: str, budget: Optional[InferenceBudget] = None,
              config: CheckerConfig = DEFAULT_CONFIG) -> List[Tuple[Judgment, Derivation]]:
    """Every derivation of every judgment for `process` whose contexts assign
    the free names of the process to regions and to types of the universe.

    Distinct derivations of one judgment are all kept; only repeated
    (judgment, derivation) pairs are dropped.
    """
    budget = budget or InferenceBudget()
    universe = tuple(budget.universe)
    if system == ILL:
        universe = tuple(t for t in universe if in_ill_grammar(t))
    results = []
    seen = set()
    for goal in candidate_judgments(process, system, universe):
        search = ProofSearch(system, budget, config, type_universe(goal, universe))
        try:
            for d in search.prove(goal):
                if (goal, d) not in seen:
                    seen.add((goal, d))
                    results.append((goal, d))
        except _Exhausted:
            logger.info("budget exhausted while enumerating %s", goal)
    return results
