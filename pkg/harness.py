"""Derivation generators, the brute-force typability oracle and the property suites.

Generation runs forwards: a pool of axiom instances grows by applying rule
schemas to pool members, so every output is well typed by construction.
Cuts are closed against eta-expanded identities, whose shape follows the
cut type, or against pool members that already carry a matching name.
Everything random goes through one `random.Random` seeded from the config,
so equal configs give equal derivations.
"""

import itertools
import logging
import random
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from checker import DEFAULT_CONFIG, CheckerConfig, Derivation, check_derivation, rule_table, set_extension
from constants import (
    CLL, CYCLE_RULES, GEN_CUT_ATTEMPTS, GEN_LABELS, GEN_POOL_SIZE, GEN_ROUNDS_PER_DEPTH, ILL,
    ORACLE_HARD_CAP, STAR_RULES, SYSTEMS, ULL, ULLM,
)
from core import (
    BOT, Bang, Bot, Branch, CloseOut, Context, EMPTY, Forward, INACT, Input, Judgment, Lolli, ONE,
    One, Par, Plus, Process, Query, Select, Server, Tensor, TypeExpr, WaitIn, With, alpha_eq,
    as_cut, bound_send, children, context, copy_request, cut, dual, free_names, in_ill_grammar,
    par, substitute,
)
from dynamics import congruence_axioms, find_redex, harvest_types, run_closed, step
from errors import BudgetOverflow, NotFound, SessionForgeError
from inference import InferenceBudget, candidate_judgments, infer, infer_all
from syntax import (
    parse_derivation, parse_judgment, parse_process, parse_type, print_derivation,
    print_judgment, print_type,
)
from transform import (
    classical_judgment, eliminate_moves, eliminate_nonstar, embed_intuitionistic, flip,
    fragment_report, locality_diagnose, to_classical, to_intuitionistic, to_united,
    united_judgment,
)

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1

SUITES = (
    "duality_involution", "parse_print_roundtrip", "subject_congruence", "subject_reduction",
    "progress", "deadlock_freedom", "star_elim_roundtrip", "u_equals_c", "ill_fragment",
    "locality",
)

# Processes that the two-sided and classical systems type but the
# intuitionistic one does not, with the locality complaint each one raises.
WITNESSES = {
    "recv x(y). serv y(z). close z": ("NonLocalServer", "y"),
    "recv x(y). wait x. close y": ("NonLocalEmptySend", "y"),
}
WITNESS_UNIVERSE = (
    Lolli(Query(BOT), Query(BOT)),
    Tensor(Query(BOT), Bang(ONE)),
    Tensor(BOT, ONE),
)
ILL_WITNESS_UNIVERSE = (ONE, Bang(ONE), Tensor(ONE, ONE), Lolli(ONE, ONE))
ORACLE_UNIVERSE = (ONE, BOT, Tensor(ONE, ONE), par(ONE, BOT))


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_depth: int = 5
    type_depth: int = 2
    labels: Tuple[str, ...] = GEN_LABELS
    system: str = ULL
    mix: bool = False
    oracle_size: int = 1
    oracle_cap: int = ORACLE_HARD_CAP

    def __post_init__(self):
        if self.max_depth < 1 or self.type_depth < 1:
            raise ValueError("generator depths must be at least 1")
        if not self.labels:
            raise ValueError("the label alphabet must not be empty")
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}")
        object.__setattr__(self, "seed", self.seed & MASK64)
        object.__setattr__(self, "labels", tuple(sorted(set(self.labels))))

    @property
    def checker_config(self) -> CheckerConfig:
        return set_extension("mix" if self.mix else "none")


def case_seed(seed: int, index: int) -> int:
    """Seed of one property case; a failing case replays from this seed alone."""
    return (seed * 0x9E3779B97F4A7C15 + index + 1) & MASK64


def random_type(rng: random.Random, depth: int, labels: Sequence[str] = GEN_LABELS,
                ill: bool = False) -> TypeExpr:
    """A proposition of at most `depth` nested connectives; `ill` keeps to the intuitionistic grammar."""
    atoms = [ONE] if ill else [ONE, BOT]
    if depth <= 0 or rng.random() < 0.3:
        return rng.choice(atoms)
    kinds = ["tensor", "lolli", "plus", "with", "bang"] + ([] if ill else ["query"])
    kind = rng.choice(kinds)
    if kind == "tensor":
        return Tensor(random_type(rng, depth - 1, labels, ill), random_type(rng, depth - 1, labels, ill))
    if kind == "lolli":
        return Lolli(random_type(rng, depth - 1, labels, ill), random_type(rng, depth - 1, labels, ill))
    if kind == "bang":
        return Bang(random_type(rng, depth - 1, labels, ill))
    if kind == "query":
        return Query(random_type(rng, depth - 1, labels, ill))
    chosen = sorted(rng.sample(list(labels), rng.randint(1, len(labels))))
    branches = tuple((label, random_type(rng, depth - 1, labels, ill)) for label in chosen)
    return Plus(branches) if kind == "plus" else With(branches)


# ---------------------------------------------------------------------------
# Derivation surgery
# ---------------------------------------------------------------------------

def _weaken(d: Derivation, extra: Context) -> Derivation:
    """Add unrestricted assignments to every node."""
    if not len(extra):
        return d
    j = d.conclusion
    return Derivation(d.rule, j.with_(gamma=j.gamma.union(extra)),
                      tuple(_weaken(p, extra) for p in d.premises))


def _rename(d: Derivation, old: str, new: str) -> Derivation:
    """Rename a free name throughout; `new` must be fresh for d."""
    j = d.conclusion
    mapping = {old: new}
    conclusion = Judgment(j.system, j.gamma.rename(mapping), j.delta.rename(mapping),
                          substitute(j.process, new, old), j.right.rename(mapping))
    return Derivation(d.rule, conclusion, tuple(_rename(p, old, new) for p in d.premises))


def _share(d1: Derivation, d2: Derivation) -> Tuple[Derivation, Derivation]:
    g1, g2 = d1.conclusion.gamma, d2.conclusion.gamma
    return _weaken(d1, g2.without(g1.names())), _weaken(d2, g1.without(g2.names()))


def _cut_rule(first: str, second: str) -> str:
    side = {"right": "R", "delta": "L"}
    return f"cut{side[first]}{side[second]}"


def _ull(gamma: Context, delta: Context, process: Process, right: Context) -> Judgment:
    return Judgment(ULL, gamma, delta, process, right)


def _ill_ok(j: Judgment) -> bool:
    return len(j.right) == 1 and all(in_ill_grammar(t) for t in j.types())


class _Generator:
    """Forward construction of two-sided derivations from one seeded stream."""

    def __init__(self, cfg: GenConfig, ill: bool = False):
        self.cfg = cfg
        self.ill = ill
        self.rng = random.Random(cfg.seed)
        self.counter = itertools.count(1)

    def fresh(self, stem: str) -> str:
        return f"{stem}{next(self.counter)}"

    def type(self) -> TypeExpr:
        return random_type(self.rng, self.cfg.type_depth, self.cfg.labels, self.ill)

    def labels_with(self, label: str) -> List[str]:
        others = [l for l in self.cfg.labels if l != label and self.rng.random() < 0.5]
        return sorted([label] + others)

    # -- identities ---------------------------------------------------------

    def identity(self, t: TypeExpr, x: str, y: str, gamma: Context = EMPTY,
                 expand: Optional[bool] = None) -> Derivation:
        """gamma; x:t |- P :: y:t, eta-expanded along t when `expand`."""
        if expand is None:
            expand = self.rng.random() < 0.7
        if not expand:
            return Derivation("idR", _ull(gamma, context({x: t}), Forward(x, y), context({y: t})))
        sub = lambda a, p, q, g=gamma: self.identity(a, p, q, g)

        if isinstance(t, One):
            inner = Derivation("1R", _ull(gamma, EMPTY, CloseOut(y), context({y: ONE})))
            return Derivation("1L", _ull(gamma, context({x: ONE}), WaitIn(x, inner.conclusion.process),
                                         context({y: ONE})), (inner,))
        if isinstance(t, Bot):
            inner = Derivation("botL", _ull(gamma, context({x: BOT}), CloseOut(x), EMPTY))
            return Derivation("botR", _ull(gamma, context({x: BOT}), WaitIn(y, inner.conclusion.process),
                                           context({y: BOT})), (inner,))
        if isinstance(t, Tensor):
            x1, y1 = self.fresh("x"), self.fresh("y")
            left, right = sub(t.left, x1, y1), sub(t.right, x, y)
            send = bound_send(y, y1, left.conclusion.process, right.conclusion.process)
            tr = Derivation("tensorR", _ull(gamma, context({x1: t.left, x: t.right}), send,
                                            context({y: t})), (left, right))
            return Derivation("tensorL", _ull(gamma, context({x: t}), Input(x, x1, send), context({y: t})),
                              (tr,))
        if isinstance(t, Lolli):
            x1, y1 = self.fresh("x"), self.fresh("y")
            left, right = sub(t.left, y1, x1), sub(t.right, x, y)
            send = bound_send(x, x1, left.conclusion.process, right.conclusion.process)
            ll = Derivation("lolliL", _ull(gamma, context({y1: t.left, x: t}), send,
                                           context({y: t.right})), (left, right))
            return Derivation("lolliR", _ull(gamma, context({x: t}), Input(y, y1, send), context({y: t})),
                              (ll,))
        if isinstance(t, Plus):
            selects = []
            for label, a in t.branches:
                inner = sub(a, x, y)
                selects.append(Derivation("plusR", _ull(gamma, context({x: a}),
                                                        Select(y, label, inner.conclusion.process),
                                                        context({y: t})), (inner,)))
            arms = tuple((label, s.conclusion.process) for (label, _), s in zip(t.branches, selects))
            return Derivation("plusL", _ull(gamma, context({x: t}), Branch(x, arms), context({y: t})),
                              tuple(selects))
        if isinstance(t, With):
            selects = []
            for label, a in t.branches:
                inner = sub(a, x, y)
                selects.append(Derivation("withL", _ull(gamma, context({x: t}),
                                                        Select(x, label, inner.conclusion.process),
                                                        context({y: a})), (inner,)))
            arms = tuple((label, s.conclusion.process) for (label, _), s in zip(t.branches, selects))
            return Derivation("withR", _ull(gamma, context({x: t}), Branch(y, arms), context({y: t})),
                              tuple(selects))
        if isinstance(t, Bang):
            u, z, y1 = self.fresh("u"), self.fresh("x"), self.fresh("y")
            inner_gamma = gamma.add(u, t.body)
            inner = sub(t.body, z, y1, inner_gamma)
            request = Derivation("copyL", _ull(inner_gamma, EMPTY,
                                               copy_request(u, z, inner.conclusion.process),
                                               context({y1: t.body})), (inner,))
            server = Derivation("!R", _ull(inner_gamma, EMPTY,
                                           Server(y, y1, request.conclusion.process),
                                           context({y: t})), (request,))
            return Derivation("!L", _ull(gamma, context({x: t}),
                                         substitute(server.conclusion.process, x, u),
                                         context({y: t})), (server,))
        if isinstance(t, Query):
            u, z, x1 = self.fresh("u"), self.fresh("y"), self.fresh("x")
            inner_gamma = gamma.add(u, dual(t.body))
            inner = sub(t.body, x1, z, inner_gamma)
            request = Derivation("copyR", _ull(inner_gamma, context({x1: t.body}),
                                               copy_request(u, z, inner.conclusion.process), EMPTY),
                                 (inner,))
            server = Derivation("?L", _ull(inner_gamma, context({x: t}),
                                           Server(x, x1, request.conclusion.process), EMPTY),
                                (request,))
            return Derivation("?R", _ull(gamma, context({x: t}),
                                         substitute(server.conclusion.process, y, u),
                                         context({y: t})), (server,))
        raise TypeError(f"not a proposition: {t!r}")

    # -- axioms -------------------------------------------------------------

    def axiom(self, small: bool = False) -> Derivation:
        if self.ill:
            kinds = ["idR", "1R"]
        elif small:
            kinds = ["idR", "idL", "1R", "botL"]
        else:
            kinds = ["idR", "idL", "idRL", "idRR", "1R", "botL"] + (["empty"] if self.cfg.mix else [])
        kind = self.rng.choice(kinds)
        if kind == "1R":
            x = self.fresh("x")
            return Derivation("1R", _ull(EMPTY, EMPTY, CloseOut(x), context({x: ONE})))
        if kind == "botL":
            x = self.fresh("x")
            return Derivation("botL", _ull(EMPTY, context({x: BOT}), CloseOut(x), EMPTY))
        if kind == "empty":
            return Derivation("empty", _ull(EMPTY, EMPTY, INACT, EMPTY))
        a, b, t = self.fresh("x"), self.fresh("x"), self.type()
        fwd = Forward(a, b)
        placement = {
            "idR": (context({a: t}), context({b: t})),
            "idL": (context({a: t, b: dual(t)}), EMPTY),
            "idRL": (context({b: t}), context({a: t})),
            "idRR": (EMPTY, context({a: t, b: dual(t)})),
        }[kind]
        return Derivation(kind, _ull(EMPTY, placement[0], fwd, placement[1]))

    # -- unary rules --------------------------------------------------------

    def _pick(self, c: Context, n: int = 1):
        entries = list(c.entries)
        if len(entries) < n:
            return None
        return self.rng.sample(entries, n)

    def unary(self, d: Derivation) -> Optional[Derivation]:
        rules = ["1L", "tensorL", "lolliR", "plusR", "withL", "withR", "plusL", "copyL", "!L", "!R"]
        if not self.ill:
            rules += ["botR", "parR", "copyR", "?R", "?L"]
        rule = self.rng.choice(rules)
        j = d.conclusion
        p = j.process

        if rule in ("1L", "botR"):
            x = self.fresh("x")
            if rule == "1L":
                return Derivation(rule, j.with_(delta=j.delta.add(x, ONE), process=WaitIn(x, p)), (d,))
            return Derivation(rule, j.with_(right=j.right.add(x, BOT), process=WaitIn(x, p)), (d,))
        if rule == "tensorL":
            pair = self._pick(j.delta, 2)
            if pair is None:
                return None
            (y, a), (x, b) = pair
            delta = j.delta.without({x, y}).add(x, Tensor(a, b))
            return Derivation(rule, j.with_(delta=delta, process=Input(x, y, p)), (d,))
        if rule == "lolliR":
            left, right = self._pick(j.delta), self._pick(j.right)
            if left is None or right is None:
                return None
            (y, a), (x, b) = left[0], right[0]
            return Derivation(rule, j.with_(delta=j.delta.remove(y), right=j.right.remove(x).add(x, Lolli(a, b)),
                                            process=Input(x, y, p)), (d,))
        if rule == "parR":
            pair = self._pick(j.right, 2)
            if pair is None:
                return None
            (y, a), (x, b) = pair
            right = j.right.without({x, y}).add(x, par(a, b))
            return Derivation(rule, j.with_(right=right, process=Input(x, y, p)), (d,))
        if rule in ("plusR", "withL"):
            region = "right" if rule == "plusR" else "delta"
            picked = self._pick(getattr(j, region))
            if picked is None:
                return None
            x, a = picked[0]
            label = self.rng.choice(self.cfg.labels)
            branches = tuple((l, a if l == label else self.type()) for l in self.labels_with(label))
            t = Plus(branches) if rule == "plusR" else With(branches)
            changed = getattr(j, region).remove(x).add(x, t)
            return Derivation(rule, j.with_(process=Select(x, label, p), **{region: changed}), (d,))
        if rule in ("withR", "plusL"):
            region = "right" if rule == "withR" else "delta"
            picked = self._pick(getattr(j, region))
            if picked is None:
                return None
            x, a = picked[0]
            labels = self.labels_with(self.rng.choice(self.cfg.labels))
            branches = tuple((l, a) for l in labels)
            t = With(branches) if rule == "withR" else Plus(branches)
            changed = getattr(j, region).remove(x).add(x, t)
            arms = tuple((l, p) for l in labels)
            return Derivation(rule, j.with_(process=Branch(x, arms), **{region: changed}),
                              (d,) * len(labels))
        if rule == "copyL":
            picked = self._pick(j.delta)
            if picked is None:
                return None
            x, a = picked[0]
            u = self.fresh("u")
            premise = _weaken(d, context({u: a}))
            conclusion = premise.conclusion.with_(delta=j.delta.remove(x), process=copy_request(u, x, p))
            return Derivation(rule, conclusion, (premise,))
        if rule == "copyR":
            picked = self._pick(j.right)
            if picked is None:
                return None
            x, b = picked[0]
            u = self.fresh("u")
            premise = _weaken(d, context({u: dual(b)}))
            conclusion = premise.conclusion.with_(right=j.right.remove(x), process=copy_request(u, x, p))
            return Derivation(rule, conclusion, (premise,))
        if rule in ("!L", "?R"):
            picked = self._pick(j.gamma)
            if picked is None:
                return None
            u, a = picked[0]
            x = self.fresh("x")
            moved = j.with_(gamma=j.gamma.remove(u), process=substitute(p, x, u))
            if rule == "!L":
                return Derivation(rule, moved.with_(delta=j.delta.add(x, Bang(a))), (d,))
            return Derivation(rule, moved.with_(right=j.right.add(x, Query(dual(a)))), (d,))
        if rule == "!R":
            if len(j.delta) or len(j.right) != 1:
                return None
            (y, a), = j.right.entries
            x = self.fresh("x")
            return Derivation(rule, j.with_(right=context({x: Bang(a)}), process=Server(x, y, p)), (d,))
        if rule == "?L":
            if len(j.right) or len(j.delta) != 1:
                return None
            (y, a), = j.delta.entries
            x = self.fresh("x")
            return Derivation(rule, j.with_(delta=context({x: Query(a)}), process=Server(x, y, p)), (d,))
        return None

    # -- binary rules -------------------------------------------------------

    def binary(self, d1: Derivation, d2: Derivation) -> Optional[Derivation]:
        rules = ["tensorR", "lolliL"] + ([] if self.ill else ["parL"])
        if self.cfg.mix and not self.ill:
            rules.append("mix")
        rule = self.rng.choice(rules)
        d1, d2 = _share(d1, d2)
        j1, j2 = d1.conclusion, d2.conclusion
        p1, p2 = j1.process, j2.process
        if rule == "mix":
            return Derivation(rule, _ull(j1.gamma, j1.delta.union(j2.delta), Par(p1, p2),
                                         j1.right.union(j2.right)), (d1, d2))
        first = self._pick(j1.delta if rule == "parL" else j1.right)
        second = self._pick(j2.right if rule == "tensorR" else j2.delta)
        if first is None or second is None:
            return None
        (y, a), (x, b) = first[0], second[0]
        process = bound_send(x, y, p1, p2)
        if rule == "tensorR":
            return Derivation(rule, _ull(j1.gamma, j1.delta.union(j2.delta), process,
                                         j1.right.remove(y).union(j2.right.remove(x)).add(x, Tensor(a, b))),
                              (d1, d2))
        if rule == "lolliL":
            return Derivation(rule, _ull(j1.gamma, j1.delta.union(j2.delta.remove(x)).add(x, Lolli(a, b)),
                                         process, j1.right.remove(y).union(j2.right)), (d1, d2))
        return Derivation(rule, _ull(j1.gamma, j1.delta.remove(y).union(j2.delta.remove(x)).add(x, par(a, b)),
                                     process, j1.right.union(j2.right)), (d1, d2))

    # -- cuts ---------------------------------------------------------------

    def _linear_cut(self, first: Derivation, second: Derivation, x: str) -> Derivation:
        j1, j2 = first.conclusion, second.conclusion
        r1, r2 = j1.region_of(x), j2.region_of(x)
        a = getattr(j1, r1).get(x)
        annotation = a if r1 == "right" else dual(a)
        return Derivation(_cut_rule(r1, r2),
                          _ull(j1.gamma, j1.delta.remove(x).union(j2.delta.remove(x)),
                               cut(x, j1.process, j2.process, annotation),
                               j1.right.remove(x).union(j2.right.remove(x))),
                          (first, second))

    def cut_pair(self, d1: Derivation, d2: Derivation) -> Optional[Derivation]:
        """Cut two pool members on a pair of names whose types already fit."""
        options = []
        for r1 in ("right", "delta"):
            for x, a in getattr(d1.conclusion, r1).entries:
                for r2 in ("right", "delta"):
                    if self.ill and r1 == r2:
                        continue
                    wanted = a if r1 != r2 else dual(a)
                    for x2, b in getattr(d2.conclusion, r2).entries:
                        if b == wanted:
                            options.append((x, x2))
        if not options:
            return None
        x, x2 = self.rng.choice(options)
        d1, d2 = _share(d1, _rename(d2, x2, x))
        return self._linear_cut(d1, d2, x)

    def cut_partner(self, d: Derivation, limit: Optional[int] = None) -> Optional[Derivation]:
        """Cut one linear name of d against an identity of the matching type."""
        j = d.conclusion
        entries = [(x, "delta", a) for x, a in j.delta.entries] + [(x, "right", a) for x, a in j.right.entries]
        if not entries:
            return None
        x, region, a = self.rng.choice(entries)
        other = "right" if region == "delta" else "delta"
        partner_region = other if self.ill else self.rng.choice([other, region])
        b = a if partner_region != region else dual(a)
        w = self.fresh("w")

        def build(expand):
            if partner_region == "delta":
                return self.identity(b, x, w, j.gamma, expand)
            return self.identity(b, w, x, j.gamma, expand)

        partner = build(None)
        if limit is not None and partner.depth() >= limit:
            partner = build(False)
        if not self.ill and self.rng.random() < 0.3:
            partner = flip(partner, w)
        if self.rng.random() < 0.5:
            return self._linear_cut(d, partner, x)
        return self._linear_cut(partner, d, x)

    def server_cut(self, s: Derivation, c: Derivation) -> Optional[Tuple[Derivation, bool]]:
        """Cut a server built from s with a client; the flag says whether c was used."""
        js = s.conclusion
        if not len(js.delta) and len(js.right) == 1:
            (y, a), = js.right.entries
            server_right = True
        elif not self.ill and len(js.delta) == 1 and not len(js.right):
            (y, b), = js.delta.entries
            a, server_right = dual(b), False
        else:
            return None
        u = self.fresh("u")
        jc = c.conclusion
        matching = [x for x, t in jc.delta.entries if t == a]
        if matching:
            x = self.rng.choice(matching)
            premise = _weaken(c, context({u: a}))
            client = Derivation("copyL", premise.conclusion.with_(delta=jc.delta.remove(x),
                                                                   process=copy_request(u, x, jc.process)),
                                (premise,))
            used = True
        else:
            z, w = self.fresh("x"), self.fresh("w")
            inner = self.identity(a, z, w, context({u: a}), expand=False)
            client = Derivation("copyL", _ull(context({u: a}), EMPTY, copy_request(u, z, Forward(z, w)),
                                              context({w: a})), (inner,))
            used = False
        base = js.gamma.union(client.conclusion.gamma.remove(u).without(js.gamma.names()))
        s = _weaken(s, base.without(js.gamma.names()))
        client = _weaken(client, base.without(client.conclusion.gamma.names()))
        jc = client.conclusion
        server = Server(u, y, js.process)
        if self.rng.random() < 0.5:
            rule = "cut!L" if server_right else "cut?L"
            process, premises = cut(u, server, jc.process, Bang(a)), (s, client)
        else:
            rule = "cut!R" if server_right else "cut?R"
            process, premises = cut(u, jc.process, server, Query(dual(a))), (client, s)
        return Derivation(rule, _ull(base, jc.delta, process, jc.right), premises), used

    # -- the pool -----------------------------------------------------------

    def _acceptable(self, d: Optional[Derivation]) -> bool:
        if d is None or d.depth() > self.cfg.max_depth:
            return False
        if self.ill:
            return all(node.rule in STAR_RULES and _ill_ok(node.conclusion) for _, node in d.walk())
        return True

    def _grow(self, pool: List[Derivation]) -> List[Derivation]:
        kinds = ["unary", "unary", "unary", "binary", "binary", "pair", "partner", "server"]
        kind = self.rng.choice(kinds)
        first = self.rng.choice(pool)
        rest = [d for d in pool if d is not first]
        second = self.rng.choice(rest) if rest else None
        consumed, made = [first], None
        if kind == "unary":
            made = self.unary(first)
        elif kind == "partner":
            made = self.cut_partner(first, self.cfg.max_depth - 1)
        elif second is not None and kind == "binary":
            made, consumed = self.binary(first, second), [first, second]
        elif second is not None and kind == "pair":
            made, consumed = self.cut_pair(first, second), [first, second]
        elif second is not None and kind == "server":
            result = self.server_cut(first, second)
            if result is not None:
                made, used = result
                consumed = [first, second] if used else [first]
        if not self._acceptable(made):
            return pool
        return [d for d in pool if all(d is not c for c in consumed)] + [made]

    def derivation(self) -> Derivation:
        small = self.cfg.max_depth == 1
        pool = [self.axiom(small) for _ in range(GEN_POOL_SIZE)]
        if small:
            return pool[0]
        for _ in range(GEN_ROUNDS_PER_DEPTH * self.cfg.max_depth):
            pool = self._grow(pool)
            while len(pool) < 2:
                pool.append(self.axiom())
        return max(pool, key=lambda d: (d.depth(), d.size()))

    # -- closed programs ----------------------------------------------------

    def provide(self, t: TypeExpr, x: str, gamma: Context) -> Derivation:
        """gamma; . |- P :: x:t"""
        here = lambda process: _ull(gamma, EMPTY, process, context({x: t}))
        if isinstance(t, One):
            return Derivation("1R", here(CloseOut(x)))
        if isinstance(t, Tensor):
            y = self.fresh("y")
            left, right = self.provide(t.left, y, gamma), self.provide(t.right, x, gamma)
            return Derivation("tensorR", here(bound_send(x, y, left.conclusion.process,
                                                         right.conclusion.process)), (left, right))
        if isinstance(t, Lolli):
            y = self.fresh("y")
            inner = self.consume(t.left, y, self.provide(t.right, x, gamma))
            return Derivation("lolliR", here(Input(x, y, inner.conclusion.process)), (inner,))
        if isinstance(t, Plus):
            label = self.rng.choice(t.labels())
            inner = self.provide(t.branch(label), x, gamma)
            return Derivation("plusR", here(Select(x, label, inner.conclusion.process)), (inner,))
        if isinstance(t, With):
            arms = [self.provide(a, x, gamma) for _, a in t.branches]
            return Derivation("withR", here(Branch(x, tuple((label, arm.conclusion.process)
                                                            for (label, _), arm in zip(t.branches, arms)))),
                              tuple(arms))
        if isinstance(t, Bang):
            y = self.fresh("y")
            inner = self.provide(t.body, y, gamma)
            return Derivation("!R", here(Server(x, y, inner.conclusion.process)), (inner,))
        raise ValueError(f"no closed provider for {t}")

    def consume(self, t: TypeExpr, y: str, cont: Derivation) -> Derivation:
        """cont's judgment with y:t added on the left and used up."""
        j = cont.conclusion
        here = lambda process: j.with_(delta=j.delta.add(y, t), process=process)
        if isinstance(t, One):
            return Derivation("1L", here(WaitIn(y, j.process)), (cont,))
        if isinstance(t, Tensor):
            y1 = self.fresh("y")
            inner = self.consume(t.left, y1, self.consume(t.right, y, cont))
            return Derivation("tensorL", here(Input(y, y1, inner.conclusion.process)), (inner,))
        if isinstance(t, Lolli):
            y1 = self.fresh("y")
            argument = self.provide(t.left, y1, j.gamma)
            rest = self.consume(t.right, y, cont)
            return Derivation("lolliL", here(bound_send(y, y1, argument.conclusion.process,
                                                        rest.conclusion.process)), (argument, rest))
        if isinstance(t, Plus):
            arms = [self.consume(a, y, cont) for _, a in t.branches]
            return Derivation("plusL", here(Branch(y, tuple((label, arm.conclusion.process)
                                                           for (label, _), arm in zip(t.branches, arms)))),
                              tuple(arms))
        if isinstance(t, With):
            label = self.rng.choice(t.labels())
            inner = self.consume(t.branch(label), y, cont)
            return Derivation("withL", here(Select(y, label, inner.conclusion.process)), (inner,))
        if isinstance(t, Bang):
            request = self._request(t.body, cont)
            u = next(iter(request.conclusion.gamma.names() - j.gamma.names()))
            return Derivation("!L", here(substitute(request.conclusion.process, y, u)), (request,))
        raise ValueError(f"no closed consumer for {t}")

    def _request(self, a: TypeExpr, cont: Derivation) -> Derivation:
        """G, u:a; D |- send u(y). P :: L from cont's G; D |- _ :: L."""
        u, y = self.fresh("u"), self.fresh("y")
        weakened = _weaken(cont, context({u: a}))
        inner = self.consume(a, y, weakened)
        j = weakened.conclusion
        return Derivation("copyL", j.with_(process=copy_request(u, y, inner.conclusion.process)), (inner,))

    def closed_program(self, nesting: int) -> Derivation:
        """.; . |- P :: z:1 built from provider/consumer pairs."""
        if nesting > 0 and self.rng.random() < 0.6:
            cont = self.closed_program(nesting - 1)
        else:
            cont = Derivation("1R", _ull(EMPTY, EMPTY, CloseOut("z"), context({"z": ONE})))
        t = random_type(self.rng, self.cfg.type_depth, self.cfg.labels, ill=True)
        if isinstance(t, Bang) and self.rng.random() < 0.5:
            request = self._request(t.body, cont)
            u = next(iter(request.conclusion.gamma.names()))
            y = self.fresh("y")
            body = self.provide(t.body, y, EMPTY)
            process = cut(u, request.conclusion.process, Server(u, y, body.conclusion.process),
                          Query(dual(t.body)))
            return Derivation("cut!R", cont.conclusion.with_(process=process), (request, body))
        x = self.fresh("x")
        provider, consumer = self.provide(t, x, EMPTY), self.consume(t, x, cont)
        if self.rng.random() < 0.25:
            provider = flip(provider, x)
        if self.rng.random() < 0.25:
            consumer = flip(consumer, x)
        return self._linear_cut(provider, consumer, x)


def gen_derivation(cfg: GenConfig) -> Derivation:
    """A valid derivation of cfg.system, identical for identical configs."""
    gen = _Generator(cfg, ill=cfg.system == ILL)
    d = gen.derivation()
    logger.debug("generated %s derivation of depth %d (seed %d)", cfg.system, d.depth(), cfg.seed)
    if cfg.system == ULLM:
        return eliminate_nonstar(d, cfg.checker_config)
    if cfg.system == CLL:
        return to_classical(d, cfg.checker_config)
    if cfg.system == ILL:
        return to_intuitionistic(d)
    return d


def server_guarded(d: Derivation) -> bool:
    """Whether some cut puts its name under a server prefix on another channel.

    `new x (serv x(y). P | serv w(z). Q)` with x free in Q types through a
    silent !L, but no reduction rule reaches under the second server.
    """
    for _, node in d.walk():
        shape = as_cut(node.conclusion.process)
        if shape is None:
            continue
        x, _, left, right = shape
        for component in (left, right):
            if isinstance(component, Server) and component.channel != x and x in free_names(component):
                return True
    return False


def gen_cut_derivation(cfg: GenConfig) -> Derivation:
    """A two-sided derivation whose root process is a composition.

    Derivations with a server-guarded cut are regenerated from a derived seed.
    """
    for attempt in range(GEN_CUT_ATTEMPTS):
        seed = cfg.seed if attempt == 0 else case_seed(cfg.seed, attempt)
        gen = _Generator(replace(cfg, system=ULL, seed=seed))
        d = gen.derivation()
        if as_cut(d.conclusion.process) is None:
            d = gen.cut_partner(d)
        if d is not None and as_cut(d.conclusion.process) is not None and not server_guarded(d):
            return d
        logger.debug("regenerating cut derivation (attempt %d, seed %d)", attempt + 1, cfg.seed)
    return _Generator(replace(cfg, system=ULL)).closed_program(1)


def gen_closed_derivation(cfg: GenConfig) -> Derivation:
    """A derivation of .; . |- P :: z:1."""
    gen = _Generator(replace(cfg, system=ULL))
    return gen.closed_program(max(0, cfg.max_depth // 3))


# ---------------------------------------------------------------------------
# Exhaustive oracle
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _processes(size: int, scope: Tuple[str, ...], level: int, labels: Tuple[str, ...]) -> Tuple[Process, ...]:
    found = []
    if size == 1:
        found += [CloseOut(n) for n in scope]
        found += [Forward(a, b) for a in scope for b in scope if a != b]
        found.append(INACT)
        return tuple(found)
    b = f"b{level}"
    inner = scope + (b,)
    for n in scope:
        for body in _processes(size - 1, scope, level, labels):
            found.append(WaitIn(n, body))
            found += [Select(n, label, body) for label in labels]
            found.append(Branch(n, tuple((label, body) for label in labels)))
        for body in _processes(size - 1, inner, level + 1, labels):
            found += [Input(n, b, body), Server(n, b, body)]
            if not isinstance(body, Par):
                found.append(copy_request(n, b, body))
    for k in range(1, size - 1):
        for left in _processes(k, inner, level + 1, labels):
            for right in _processes(size - 1 - k, inner, level + 1, labels):
                found += [bound_send(n, b, left, right) for n in scope]
                found.append(cut(b, left, right))
        for left in _processes(k, scope, level, labels):
            for right in _processes(size - 1 - k, scope, level, labels):
                found.append(Par(left, right))
    return tuple(found)


def enumerate_processes(size_bound: int, free: Sequence[str] = ("x",),
                        labels: Sequence[str] = ("l",)) -> Iterable[Process]:
    """Every process of size at most size_bound over the given free names."""
    for size in range(1, size_bound + 1):
        yield from _processes(size, tuple(free), 1, tuple(labels))


def _dual_closed(universe: Iterable[TypeExpr]) -> Tuple[TypeExpr, ...]:
    found = []
    for t in universe:
        for s in (t, dual(t)):
            if s not in found:
                found.append(s)
    return tuple(found)


def exhaustive_oracle(size_bound: int, universe: Sequence[TypeExpr], system: str,
                      config: CheckerConfig = DEFAULT_CONFIG, cap: int = ORACLE_HARD_CAP,
                      free: Sequence[str] = ("x",)) -> Set[Tuple[Process, Judgment]]:
    """Every (process, judgment) within the bounds that inference can derive."""
    budget = InferenceBudget(universe=tuple(universe))
    typable = set()
    tried = 0
    for process in enumerate_processes(size_bound, free):
        for goal in candidate_judgments(process, system, universe):
            tried += 1
            if tried > cap:
                raise BudgetOverflow(f"oracle enumeration passed {cap} judgments")
            try:
                infer(goal, budget, config)
            except NotFound:
                continue
            typable.add((process, goal))
    logger.info("oracle: %d of %d %s judgments typable", len(typable), tried, system)
    return typable


def typable_processes(size_bound: int, universe: Sequence[TypeExpr], system: str,
                      config: CheckerConfig = DEFAULT_CONFIG, cap: int = ORACLE_HARD_CAP) -> FrozenSet[Process]:
    return frozenset(p for p, _ in exhaustive_oracle(size_bound, universe, system, config, cap))


# ---------------------------------------------------------------------------
# Property suites
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Failure:
    seed: int
    counterexample: str
    message: str

    def to_dict(self) -> dict:
        return {"seed": self.seed, "counterexample": self.counterexample, "message": self.message}


@dataclass
class PropertyReport:
    name: str
    cases: int
    failures: List[Failure] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "cases": self.cases,
            "failures": [f.to_dict() for f in self.failures],
            "wall_time": round(self.wall_time, 3),
        }


@dataclass(frozen=True)
class _Suite:
    generate: Callable[[GenConfig], object]
    check: Callable[[object, GenConfig], Optional[str]]
    shrink: Callable[[object], Sequence[object]]
    show: Callable[[object], str]


def _premises(d: Derivation) -> Sequence[Derivation]:
    return d.premises


def _show_derivation(d: Derivation) -> str:
    return print_judgment(d.conclusion)


def _budget(d: Derivation) -> InferenceBudget:
    return InferenceBudget(universe=harvest_types(d))


def _check_duality(t: TypeExpr, cfg: GenConfig) -> Optional[str]:
    if dual(dual(t)) != t:
        return f"dual is not an involution on {print_type(t)}"
    expected = {
        Tensor: lambda: isinstance(t, Tensor) and par(dual(t.left), dual(t.right)),
        Lolli: lambda: isinstance(t, Lolli) and Tensor(t.left, dual(t.right)),
        Plus: lambda: isinstance(t, Plus) and With(tuple((l, dual(a)) for l, a in t.branches)),
        With: lambda: isinstance(t, With) and Plus(tuple((l, dual(a)) for l, a in t.branches)),
        Bang: lambda: isinstance(t, Bang) and Query(dual(t.body)),
        Query: lambda: isinstance(t, Query) and Bang(dual(t.body)),
        One: lambda: BOT,
        Bot: lambda: ONE,
    }[type(t)]()
    if dual(t) != expected:
        return f"De Morgan law fails on {print_type(t)}"
    return None


def _check_roundtrip(d: Derivation, cfg: GenConfig) -> Optional[str]:
    j = d.conclusion
    for t in j.types():
        if parse_type(print_type(t)) != t:
            return f"type {print_type(t)} does not survive printing"
    if parse_judgment(print_judgment(j), j.system) != j:
        return "judgment does not survive printing"
    if parse_derivation(print_derivation(d)).derivation != d:
        return "derivation document does not survive printing"
    return None


def _retypes(d: Derivation, process: Process, cfg: GenConfig, what: str) -> Optional[str]:
    try:
        infer(d.conclusion.with_(process=process), _budget(d), cfg.checker_config)
    except NotFound as e:
        return f"{what} {process} lost the judgment: {e.message}"
    return None


def _check_congruence(d: Derivation, cfg: GenConfig) -> Optional[str]:
    for rewrite in congruence_axioms(d.conclusion.process):
        problem = _retypes(d, rewrite.process, cfg, f"{rewrite.axiom} image")
        if problem:
            return problem
    return None


def _check_reduction(d: Derivation, cfg: GenConfig) -> Optional[str]:
    for label, reduct in step(d.conclusion.process):
        problem = _retypes(d, reduct, cfg, f"{label.rule} reduct")
        if problem:
            return problem
    return None


def _check_progress(d: Derivation, cfg: GenConfig) -> Optional[str]:
    if as_cut(d.conclusion.process) is None:
        return None
    _, reduct = find_redex(d, cfg.checker_config)
    if alpha_eq(reduct, d.conclusion.process):
        return "redex search returned the process unchanged"
    return None


def _check_deadlock(d: Derivation, cfg: GenConfig) -> Optional[str]:
    final = run_closed(d, config=cfg.checker_config)
    if not alpha_eq(final, CloseOut("z")):
        return f"closed program stopped at {final}"
    return None


def _valid(d: Derivation, cfg: GenConfig, what: str) -> Optional[str]:
    violation = check_derivation(d, cfg.checker_config)
    return None if violation is None else f"{what} is invalid: {violation}"


def _check_star_elim(d: Derivation, cfg: GenConfig) -> Optional[str]:
    moved = eliminate_nonstar(d, cfg.checker_config)
    problem = _valid(moved, cfg, "starred derivation")
    if problem:
        return problem
    if moved.conclusion != d.conclusion.with_(system=ULLM):
        return "starred derivation changed the judgment"
    back = eliminate_moves(moved, cfg.checker_config)
    problem = _valid(back, cfg, "move-free derivation")
    if problem:
        return problem
    if back.conclusion != d.conclusion:
        return "move elimination changed the judgment"
    return None


def _check_u_equals_c(d: Derivation, cfg: GenConfig) -> Optional[str]:
    classical = to_classical(d, cfg.checker_config)
    problem = _valid(classical, cfg, "classical translation")
    if problem:
        return problem
    if classical.conclusion != classical_judgment(d.conclusion):
        return "classical translation has the wrong judgment"
    united = to_united(classical, cfg.checker_config)
    problem = _valid(united, cfg, "two-sided translation")
    if problem:
        return problem
    if united.conclusion != united_judgment(classical.conclusion):
        return "two-sided translation has the wrong judgment"
    return None


def _check_ill_fragment(d: Derivation, cfg: GenConfig) -> Optional[str]:
    report = fragment_report(embed_intuitionistic(d))
    if not report.ill_member:
        return f"embedded intuitionistic derivation left the fragment at {report.witness}"
    return None


def _check_locality(d: Derivation, cfg: GenConfig) -> Optional[str]:
    found = locality_diagnose(d.conclusion.process)
    if found:
        return f"intuitionistic process flagged: {found[0].message}"
    return None


def _types(cfg: GenConfig) -> TypeExpr:
    return random_type(random.Random(cfg.seed), cfg.type_depth, cfg.labels)


def _ull_case(cfg: GenConfig) -> Derivation:
    return gen_derivation(replace(cfg, system=ULL))


def _ill_case(cfg: GenConfig) -> Derivation:
    return gen_derivation(replace(cfg, system=ILL, mix=False))


_SUITES: Dict[str, _Suite] = {
    "duality_involution": _Suite(_types, _check_duality, children, print_type),
    "parse_print_roundtrip": _Suite(gen_derivation, _check_roundtrip, _premises, _show_derivation),
    "subject_congruence": _Suite(_ull_case, _check_congruence, _premises, _show_derivation),
    "subject_reduction": _Suite(_ull_case, _check_reduction, _premises, _show_derivation),
    "progress": _Suite(gen_cut_derivation, _check_progress, _premises, _show_derivation),
    "deadlock_freedom": _Suite(gen_closed_derivation, _check_deadlock, lambda d: (), _show_derivation),
    "star_elim_roundtrip": _Suite(_ull_case, _check_star_elim, _premises, _show_derivation),
    "u_equals_c": _Suite(_ull_case, _check_u_equals_c, _premises, _show_derivation),
    "ill_fragment": _Suite(_ill_case, _check_ill_fragment, _premises, _show_derivation),
    "locality": _Suite(_ill_case, _check_locality, _premises, _show_derivation),
}


def _verdict(suite: _Suite, subject, cfg: GenConfig) -> Optional[str]:
    try:
        return suite.check(subject, cfg)
    except (SessionForgeError, ValueError) as e:
        return f"{type(e).__name__}: {e}"


def _shrink(suite: _Suite, subject, cfg: GenConfig):
    """Greedily replace the counterexample by a smaller part that still fails."""
    current = subject
    improved = True
    while improved:
        improved = False
        for smaller in suite.shrink(current):
            if _verdict(suite, smaller, cfg) is not None:
                logger.info("shrunk counterexample to %s", suite.show(smaller))
                current, improved = smaller, True
                break
    return current


def _witness_failures(name: str, cfg: GenConfig) -> List[Failure]:
    """Fixed checks on the separating processes, run once per report."""
    failures = []
    for text, (kind, channel) in WITNESSES.items():
        process = parse_process(text)
        if name == "ill_fragment":
            universe = _dual_closed(WITNESS_UNIVERSE)
            for system in (ULL, CLL):
                if not infer_all(process, system, InferenceBudget(universe=universe)):
                    failures.append(Failure(cfg.seed, text, f"not typable in {system}"))
            if infer_all(process, ILL, InferenceBudget(universe=ILL_WITNESS_UNIVERSE)):
                failures.append(Failure(cfg.seed, text, "typable in the intuitionistic system"))
        elif name == "locality":
            found = [(d.kind, d.name) for d in locality_diagnose(process)]
            if found != [(kind, channel)]:
                failures.append(Failure(cfg.seed, text, f"expected {kind} on {channel}, found {found}"))
    return failures


def _oracle_failures(cfg: GenConfig) -> List[Failure]:
    universe = _dual_closed(ORACLE_UNIVERSE)
    united = typable_processes(cfg.oracle_size, universe, ULL, cfg.checker_config, cfg.oracle_cap)
    classical = typable_processes(cfg.oracle_size, universe, CLL, cfg.checker_config, cfg.oracle_cap)
    failures = []
    for process in sorted(united ^ classical, key=str):
        side = "two-sided" if process in united else "classical"
        failures.append(Failure(cfg.seed, str(process), f"typable only in the {side} system"))
    return failures


def run_property(name: str, cfg: GenConfig, cases: int) -> PropertyReport:
    """Run one suite over `cases` generated inputs; failures carry their case seed."""
    if name not in _SUITES:
        raise ValueError(f"unknown property suite {name!r}; choose from {', '.join(SUITES)}")
    if cases < 0:
        raise ValueError("the number of cases must be non-negative")
    suite = _SUITES[name]
    started = time.perf_counter()
    report = PropertyReport(name, cases)
    for index in range(cases):
        case = replace(cfg, seed=case_seed(cfg.seed, index))
        try:
            subject = suite.generate(case)
        except (SessionForgeError, ValueError) as e:
            report.failures.append(Failure(case.seed, "<generator>", f"{type(e).__name__}: {e}"))
            continue
        message = _verdict(suite, subject, case)
        logger.debug("%s case %d (seed %d): %s", name, index, case.seed, message or "ok")
        if message is not None:
            smallest = _shrink(suite, subject, case)
            report.failures.append(Failure(case.seed, suite.show(smallest),
                                           _verdict(suite, smallest, case) or message))
    report.failures += _witness_failures(name, cfg)
    if name == "u_equals_c" and cases:
        report.failures += _oracle_failures(cfg)
    report.wall_time = time.perf_counter() - started
    logger.info("%s: %d cases, %d failures", name, cases, len(report.failures))
    return report


def rule_coverage(cfg: GenConfig, samples: int) -> Dict[str, int]:
    """How often each rule of cfg.system occurs over `samples` generated derivations."""
    counts = {rule: 0 for rule in rule_table(cfg.system, cfg.checker_config) if rule not in CYCLE_RULES}
    for index in range(samples):
        d = gen_derivation(replace(cfg, seed=case_seed(cfg.seed, index)))
        for _, node in d.walk():
            counts[node.rule] = counts.get(node.rule, 0) + 1
    return counts


def coverage_holes(cfg: GenConfig, samples: int) -> List[str]:
    return sorted(rule for rule, n in rule_coverage(cfg, samples).items() if n == 0)
