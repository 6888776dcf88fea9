"""Propositions, processes, name hygiene, contexts and judgments.

Every value here is an immutable dataclass, so values can be hashed, shared
and compared structurally. `A par B` has no constructor of its own: it is
`Lolli(dual(A), B)`.
"""

import re
from dataclasses import dataclass, replace
from functools import lru_cache
from itertools import count
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Tuple, Union

from constants import CLL, ILL, SYSTEMS


# ---------------------------------------------------------------------------
# Propositions
# ---------------------------------------------------------------------------

class TypeExpr:
    """Base class of propositions."""

    def __str__(self):
        from syntax import print_type
        return print_type(self)


def _labelled(items, kind: str) -> tuple:
    """Normalise a label map to a tuple of pairs sorted by label."""
    pairs = list(items.items()) if isinstance(items, Mapping) else list(items)
    if not pairs:
        raise ValueError(f"{kind} needs at least one label")
    labels = [label for label, _ in pairs]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate label in {kind}")
    return tuple(sorted(pairs, key=lambda pair: pair[0]))


@dataclass(frozen=True)
class One(TypeExpr):
    pass


@dataclass(frozen=True)
class Bot(TypeExpr):
    pass


@dataclass(frozen=True)
class Tensor(TypeExpr):
    left: TypeExpr
    right: TypeExpr


@dataclass(frozen=True)
class Lolli(TypeExpr):
    left: TypeExpr
    right: TypeExpr


@dataclass(frozen=True)
class Plus(TypeExpr):
    branches: Tuple[Tuple[str, TypeExpr], ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", _labelled(self.branches, "internal choice"))

    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.branches)

    def branch(self, label: str) -> Optional[TypeExpr]:
        return dict(self.branches).get(label)


@dataclass(frozen=True)
class With(TypeExpr):
    branches: Tuple[Tuple[str, TypeExpr], ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", _labelled(self.branches, "external choice"))

    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.branches)

    def branch(self, label: str) -> Optional[TypeExpr]:
        return dict(self.branches).get(label)


@dataclass(frozen=True)
class Bang(TypeExpr):
    body: TypeExpr


@dataclass(frozen=True)
class Query(TypeExpr):
    body: TypeExpr


ONE = One()
BOT = Bot()


def par(left: TypeExpr, right: TypeExpr) -> TypeExpr:
    """A par B, which is sugar for (not A) -o B."""
    return Lolli(dual(left), right)


@lru_cache(maxsize=None)
def dual(t: TypeExpr) -> TypeExpr:
    if isinstance(t, One):
        return BOT
    if isinstance(t, Bot):
        return ONE
    if isinstance(t, Tensor):
        return Lolli(t.left, dual(t.right))
    if isinstance(t, Lolli):
        return Tensor(t.left, dual(t.right))
    if isinstance(t, Plus):
        return With(tuple((label, dual(a)) for label, a in t.branches))
    if isinstance(t, With):
        return Plus(tuple((label, dual(a)) for label, a in t.branches))
    if isinstance(t, Bang):
        return Query(dual(t.body))
    if isinstance(t, Query):
        return Bang(dual(t.body))
    raise TypeError(f"not a proposition: {t!r}")


def children(t: TypeExpr) -> Tuple[TypeExpr, ...]:
    if isinstance(t, (Tensor, Lolli)):
        return (t.left, t.right)
    if isinstance(t, (Plus, With)):
        return tuple(a for _, a in t.branches)
    if isinstance(t, (Bang, Query)):
        return (t.body,)
    return ()


def in_ill_grammar(t: TypeExpr) -> bool:
    if isinstance(t, (Bot, Query)):
        return False
    return all(in_ill_grammar(c) for c in children(t))


def subformulas(t: TypeExpr) -> FrozenSet[TypeExpr]:
    found = {t}
    for c in children(t):
        found |= subformulas(c)
    return frozenset(found)


def type_size(t: TypeExpr) -> int:
    return 1 + sum(type_size(c) for c in children(t))


# ---------------------------------------------------------------------------
# Processes
# ---------------------------------------------------------------------------

class Process:
    """Base class of process terms."""

    def __str__(self):
        from syntax import print_process
        return print_process(self)


@dataclass(frozen=True)
class Inact(Process):
    pass


@dataclass(frozen=True)
class Restrict(Process):
    name: str
    annotation: Optional[TypeExpr]
    body: Process


@dataclass(frozen=True)
class Par(Process):
    left: Process
    right: Process


@dataclass(frozen=True)
class Output(Process):
    """Free output; only ever appears directly under the restriction of its payload."""
    channel: str
    payload: str
    body: Process


@dataclass(frozen=True)
class Input(Process):
    channel: str
    binder: str
    body: Process


@dataclass(frozen=True)
class Select(Process):
    channel: str
    label: str
    body: Process


@dataclass(frozen=True)
class Branch(Process):
    channel: str
    arms: Tuple[Tuple[str, Process], ...]

    def __post_init__(self):
        object.__setattr__(self, "arms", _labelled(self.arms, "branching"))

    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.arms)

    def arm(self, label: str) -> Optional[Process]:
        return dict(self.arms).get(label)


@dataclass(frozen=True)
class Server(Process):
    channel: str
    binder: str
    body: Process


@dataclass(frozen=True)
class Forward(Process):
    left: str
    right: str


@dataclass(frozen=True)
class CloseOut(Process):
    channel: str


@dataclass(frozen=True)
class WaitIn(Process):
    channel: str
    body: Process


INACT = Inact()


def bound_send(channel: str, payload: str, left: Process, right: Process,
               annotation: Optional[TypeExpr] = None) -> Restrict:
    """new payload. channel<payload>.(left | right)"""
    return Restrict(payload, annotation, Output(channel, payload, Par(left, right)))


def copy_request(server: str, payload: str, body: Process) -> Restrict:
    """new payload. server<payload>.body, a request to a replicated server."""
    return Restrict(payload, None, Output(server, payload, body))


def cut(name: str, left: Process, right: Process,
        annotation: Optional[TypeExpr] = None) -> Restrict:
    return Restrict(name, annotation, Par(left, right))


def as_output(p: Process) -> Optional[Tuple[str, str, Process]]:
    """(channel, payload, continuation) when p is a send of a fresh name."""
    if (isinstance(p, Restrict) and isinstance(p.body, Output)
            and p.body.payload == p.name and p.body.channel != p.name):
        return p.body.channel, p.name, p.body.body
    return None


def as_bound_send(p: Process) -> Optional[Tuple[str, str, Process, Process]]:
    shape = as_output(p)
    if shape and isinstance(shape[2], Par):
        return shape[0], shape[1], shape[2].left, shape[2].right
    return None


def as_cut(p: Process) -> Optional[Tuple[str, Optional[TypeExpr], Process, Process]]:
    if isinstance(p, Restrict) and isinstance(p.body, Par):
        return p.name, p.annotation, p.body.left, p.body.right
    return None


@lru_cache(maxsize=65536)
def free_names(p: Process) -> FrozenSet[str]:
    if isinstance(p, Inact):
        return frozenset()
    if isinstance(p, Restrict):
        return free_names(p.body) - {p.name}
    if isinstance(p, Par):
        return free_names(p.left) | free_names(p.right)
    if isinstance(p, Output):
        return free_names(p.body) | {p.channel, p.payload}
    if isinstance(p, (Input, Server)):
        return (free_names(p.body) - {p.binder}) | {p.channel}
    if isinstance(p, Select):
        return free_names(p.body) | {p.channel}
    if isinstance(p, Branch):
        names = frozenset({p.channel})
        for _, arm in p.arms:
            names |= free_names(arm)
        return names
    if isinstance(p, Forward):
        return frozenset({p.left, p.right})
    if isinstance(p, CloseOut):
        return frozenset({p.channel})
    if isinstance(p, WaitIn):
        return free_names(p.body) | {p.channel}
    raise TypeError(f"not a process: {p!r}")


def process_children(p: Process) -> Tuple[Process, ...]:
    if isinstance(p, Par):
        return (p.left, p.right)
    if isinstance(p, Branch):
        return tuple(arm for _, arm in p.arms)
    if isinstance(p, (Restrict, Output, Input, Select, Server, WaitIn)):
        return (p.body,)
    return ()


def binder_of(p: Process) -> Optional[str]:
    if isinstance(p, Restrict):
        return p.name
    if isinstance(p, (Input, Server)):
        return p.binder
    return None


@lru_cache(maxsize=65536)
def bound_names(p: Process) -> FrozenSet[str]:
    names = frozenset()
    b = binder_of(p)
    if b is not None:
        names |= {b}
    for c in process_children(p):
        names |= bound_names(c)
    return names


def all_names(p: Process) -> FrozenSet[str]:
    return free_names(p) | bound_names(p)


def process_size(p: Process) -> int:
    """Number of prefixes and compositions; a bound send counts once."""
    shape = as_output(p)
    if shape:
        continuation = shape[2]
        if isinstance(continuation, Par):
            return 1 + process_size(continuation.left) + process_size(continuation.right)
        return 1 + process_size(continuation)
    if isinstance(p, Restrict) and isinstance(p.body, Par):
        return 1 + process_size(p.body.left) + process_size(p.body.right)
    return 1 + sum(process_size(c) for c in process_children(p))


_TRAILING_DIGITS = re.compile(r"\d+$")


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    """First of base1, base2, ... (trailing digits of base dropped) outside avoid."""
    avoid = set(avoid)
    stem = _TRAILING_DIGITS.sub("", base) or base
    for i in count(1):
        candidate = f"{stem}{i}"
        if candidate not in avoid:
            return candidate


def _with_body(p: Process, body: Process) -> Process:
    return replace(p, body=body)


def substitute(p: Process, new: str, old: str) -> Process:
    """p{new/old}, renaming binders that would capture `new`."""
    if new == old or old not in free_names(p):
        return p

    def name(n: str) -> str:
        return new if n == old else n

    if isinstance(p, Forward):
        return Forward(name(p.left), name(p.right))
    if isinstance(p, CloseOut):
        return CloseOut(name(p.channel))
    if isinstance(p, WaitIn):
        return WaitIn(name(p.channel), substitute(p.body, new, old))
    if isinstance(p, Select):
        return Select(name(p.channel), p.label, substitute(p.body, new, old))
    if isinstance(p, Branch):
        return Branch(name(p.channel),
                      tuple((label, substitute(arm, new, old)) for label, arm in p.arms))
    if isinstance(p, Par):
        return Par(substitute(p.left, new, old), substitute(p.right, new, old))
    if isinstance(p, Output):
        return Output(name(p.channel), name(p.payload), substitute(p.body, new, old))

    # binders: Restrict, Input, Server (old is free, so the binder differs from old)
    binder, body = binder_of(p), p.body
    if binder == new:
        renamed = fresh_name(binder, all_names(body) | {new, old})
        body = substitute(body, renamed, binder)
        binder = renamed
    body = substitute(body, new, old)
    if isinstance(p, Restrict):
        return Restrict(binder, p.annotation, body)
    if isinstance(p, Input):
        return Input(name(p.channel), binder, body)
    return Server(name(p.channel), binder, body)


def rename_binder(p: Process, new: str) -> Process:
    """Rename the binder at the top of p to `new`, which must be fresh for p."""
    old = binder_of(p)
    if old == new:
        return p
    body = substitute(p.body, new, old)
    if isinstance(p, Restrict):
        return Restrict(new, p.annotation, body)
    return replace(p, binder=new, body=body)


def alpha_eq(p: Process, q: Process) -> bool:
    return _alpha(p, q, {}, {})


def _same(a: str, b: str, left: Dict[str, str], right: Dict[str, str]) -> bool:
    if a in left or b in right:
        return left.get(a) == b and right.get(b) == a
    return a == b


def _alpha(p, q, left, right) -> bool:
    if type(p) is not type(q):
        return False
    if isinstance(p, Inact):
        return True
    if isinstance(p, Forward):
        return _same(p.left, q.left, left, right) and _same(p.right, q.right, left, right)
    if isinstance(p, CloseOut):
        return _same(p.channel, q.channel, left, right)
    if isinstance(p, Par):
        return _alpha(p.left, q.left, left, right) and _alpha(p.right, q.right, left, right)
    if isinstance(p, Output):
        return (_same(p.channel, q.channel, left, right)
                and _same(p.payload, q.payload, left, right)
                and _alpha(p.body, q.body, left, right))
    if isinstance(p, (WaitIn, Select)):
        if isinstance(p, Select) and p.label != q.label:
            return False
        return _same(p.channel, q.channel, left, right) and _alpha(p.body, q.body, left, right)
    if isinstance(p, Branch):
        if p.labels() != q.labels() or not _same(p.channel, q.channel, left, right):
            return False
        return all(_alpha(a, b, left, right) for (_, a), (_, b) in zip(p.arms, q.arms))
    if isinstance(p, Restrict):
        if p.annotation != q.annotation:
            return False
    elif not _same(p.channel, q.channel, left, right):
        return False
    inner_left = {**left, binder_of(p): binder_of(q)}
    inner_right = {**right, binder_of(q): binder_of(p)}
    return _alpha(p.body, q.body, inner_left, inner_right)


def normalize(p: Process, avoid: Iterable[str] = ()) -> Process:
    """Rename binders apart from each other, from the free names and from avoid."""
    used = set(free_names(p)) | set(avoid)
    return _normalize(p, used)


def _normalize(p: Process, used: set) -> Process:
    binder = binder_of(p)
    if binder is not None:
        if binder in used:
            p = rename_binder(p, fresh_name(binder, used | all_names(p)))
        used.add(binder_of(p))
        return _with_body(p, _normalize(p.body, used))
    if isinstance(p, Par):
        return Par(_normalize(p.left, used), _normalize(p.right, used))
    if isinstance(p, Branch):
        return Branch(p.channel, tuple((label, _normalize(arm, used)) for label, arm in p.arms))
    if isinstance(p, (Output, Select, WaitIn)):
        return _with_body(p, _normalize(p.body, used))
    return p


def unshadow(p: Process, avoid: Iterable[str] = ()) -> Process:
    """Rename only the binders that clash with a name already in scope.

    Sibling subterms may keep equal binders; p is returned unchanged (the same
    object) when nothing clashes.
    """
    return _unshadow(p, frozenset(free_names(p)) | frozenset(avoid))


def _unshadow(p: Process, scope: FrozenSet[str]) -> Process:
    binder = binder_of(p)
    if binder is not None:
        if binder in scope:
            p = rename_binder(p, fresh_name(binder, scope | all_names(p)))
        body = _unshadow(p.body, scope | {binder_of(p)})
        return p if body is p.body else _with_body(p, body)
    if isinstance(p, Par):
        left, right = _unshadow(p.left, scope), _unshadow(p.right, scope)
        return p if (left is p.left and right is p.right) else Par(left, right)
    if isinstance(p, Branch):
        arms = tuple((label, _unshadow(arm, scope)) for label, arm in p.arms)
        return p if all(a is b for (_, a), (_, b) in zip(arms, p.arms)) else Branch(p.channel, arms)
    if isinstance(p, (Output, Select, WaitIn)):
        body = _unshadow(p.body, scope)
        return p if body is p.body else _with_body(p, body)
    return p


def subterms(p: Process, position: Tuple[str, ...] = ()) -> Iterator[Tuple[Tuple[str, ...], Process]]:
    """Every subterm with its position, outermost first."""
    yield position, p
    if isinstance(p, Par):
        yield from subterms(p.left, position + ("left",))
        yield from subterms(p.right, position + ("right",))
    elif isinstance(p, Branch):
        for label, arm in p.arms:
            yield from subterms(arm, position + (f"arm:{label}",))
    elif process_children(p):
        yield from subterms(p.body, position + ("body",))


def replace_at(p: Process, position: Tuple[str, ...], new: Process) -> Process:
    if not position:
        return new
    step, rest = position[0], position[1:]
    if step == "left":
        return Par(replace_at(p.left, rest, new), p.right)
    if step == "right":
        return Par(p.left, replace_at(p.right, rest, new))
    if step.startswith("arm:"):
        label = step[4:]
        return Branch(p.channel, tuple(
            (l, replace_at(arm, rest, new) if l == label else arm) for l, arm in p.arms))
    return _with_body(p, replace_at(p.body, rest, new))


# ---------------------------------------------------------------------------
# Contexts and judgments
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Context:
    """Name-to-proposition assignments; equality ignores order."""
    entries: Tuple[Tuple[str, TypeExpr], ...] = ()

    def __post_init__(self):
        pairs = tuple(self.entries.items()) if isinstance(self.entries, Mapping) \
            else tuple(self.entries)
        names = [n for n, _ in pairs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate name in context: {names}")
        object.__setattr__(self, "entries", pairs)

    def __eq__(self, other):
        return isinstance(other, Context) and dict(self.entries) == dict(other.entries)

    def __hash__(self):
        return hash(frozenset(self.entries))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, name):
        return any(n == name for n, _ in self.entries)

    def __repr__(self):
        return f"Context({dict(self.entries)!r})"

    def names(self) -> FrozenSet[str]:
        return frozenset(n for n, _ in self.entries)

    def get(self, name: str) -> Optional[TypeExpr]:
        for n, t in self.entries:
            if n == name:
                return t
        return None

    def add(self, name: str, t: TypeExpr) -> "Context":
        return Context(self.entries + ((name, t),))

    def remove(self, name: str) -> "Context":
        return Context(tuple((n, t) for n, t in self.entries if n != name))

    def union(self, other: "Context") -> "Context":
        """Disjoint union; overlapping names raise ValueError."""
        return Context(self.entries + other.entries)

    def restrict(self, names: Iterable[str]) -> "Context":
        keep = set(names)
        return Context(tuple((n, t) for n, t in self.entries if n in keep))

    def without(self, names: Iterable[str]) -> "Context":
        drop = set(names)
        return Context(tuple((n, t) for n, t in self.entries if n not in drop))

    def dualized(self) -> "Context":
        return Context(tuple((n, dual(t)) for n, t in self.entries))

    def rename(self, mapping: Mapping[str, str]) -> "Context":
        return Context(tuple((mapping.get(n, n), t) for n, t in self.entries))

    def sorted(self) -> "Context":
        return Context(tuple(sorted(self.entries, key=lambda e: e[0])))


EMPTY = Context()


def context(pairs: Union[Mapping[str, TypeExpr], Iterable] = ()) -> Context:
    return Context(tuple(pairs.items()) if isinstance(pairs, Mapping) else tuple(pairs))


@dataclass(frozen=True)
class Judgment:
    """Sequent of one of the four systems.

    Two-sided systems use all three regions. The intuitionistic system keeps
    exactly one assignment in `right`. The classical system is one-sided:
    `P |-c gamma ; delta` with `right` empty.
    """
    system: str
    gamma: Context
    delta: Context
    process: Process
    right: Context = EMPTY

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}")
        regions = [self.gamma.names(), self.delta.names(), self.right.names()]
        for i, a in enumerate(regions):
            for b in regions[i + 1:]:
                if a & b:
                    raise ValueError(f"name {sorted(a & b)[0]} occurs in two regions")
        if self.system == ILL:
            if len(self.right) != 1:
                raise ValueError("intuitionistic judgment needs exactly one name on the right")
            for _, t in self.gamma.entries + self.delta.entries + self.right.entries:
                if not in_ill_grammar(t):
                    raise ValueError(f"{t} is not an intuitionistic proposition")
        if self.system == CLL and len(self.right):
            raise ValueError("classical judgments are one-sided")

    def __str__(self):
        from syntax import print_judgment
        return print_judgment(self)

    @property
    def linear_names(self) -> FrozenSet[str]:
        return self.delta.names() | self.right.names()

    def region_of(self, name: str) -> Optional[str]:
        if name in self.gamma:
            return "gamma"
        if name in self.delta:
            return "delta"
        if name in self.right:
            return "right"
        return None

    def context_names(self) -> FrozenSet[str]:
        return self.gamma.names() | self.linear_names

    def types(self) -> FrozenSet[TypeExpr]:
        return frozenset(t for _, t in self.gamma.entries + self.delta.entries + self.right.entries)

    def with_(self, **changes) -> "Judgment":
        return replace(self, **changes)
