"""Place/transition nets with optional weighted read arcs, and their
concurrent reachability graphs."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .algebra import ActionName, Multiset, Vector, action
from .errors import (
    IncompletePairing,
    InvalidNet,
    NotEnabled,
    StateBoundExceeded,
    StepBoundExceeded,
    UnknownAction,
)
from .sts import StepTransitionSystem

DEFAULT_MAX_STATES = 100_000
DEFAULT_MAX_STEP = 8


def marking_literal(m: Mapping) -> str:
    """Canonical state name for a marking, e.g. ``(p1^2 p3)``."""
    return Multiset(m).literal()


class PTNet:
    """A place/transition net, optionally with weighted read arcs.

    ``pre`` maps ``(place, action)`` to the weight of the arc from the place
    to the action and ``post`` maps ``(action, place)`` to the weight of the
    arc from the action to the place.  ``read`` maps ``(place, action)`` to
    the exact token count the place must hold for the action to fire; zero
    is a meaningful read value.  ``initial`` is one marking or a list of them.
    """

    def __init__(
        self,
        places: Iterable[str],
        actions: Iterable,
        pre: Mapping | None = None,
        post: Mapping | None = None,
        initial=None,
        read: Mapping | None = None,
    ):
        self.places: tuple[str, ...] = tuple(sorted(dict.fromkeys(places)))
        self.actions: tuple[ActionName, ...] = tuple(sorted({action(a) for a in actions}))
        place_set, action_set = set(self.places), set(self.actions)
        pre_d: dict[ActionName, dict[str, int]] = {a: {} for a in self.actions}
        post_d: dict[ActionName, dict[str, int]] = {a: {} for a in self.actions}
        read_d: dict[ActionName, dict[str, int]] = {a: {} for a in self.actions}

        def check(p, a, w, what):
            a = action(a)
            if p not in place_set:
                raise InvalidNet(f"{what} mentions undeclared place {p!r}")
            if a not in action_set:
                raise UnknownAction(f"{what} mentions undeclared action {a}")
            if not isinstance(w, int) or isinstance(w, bool) or w < 0:
                raise InvalidNet(f"{what} weight must be a non-negative integer, got {w!r}")
            return a

        for (p, a), w in (pre or {}).items():
            a = check(p, a, w, "pre arc")
            if w:
                pre_d[a][p] = pre_d[a].get(p, 0) + w
        for (a, p), w in (post or {}).items():
            a = check(p, a, w, "post arc")
            if w:
                post_d[a][p] = post_d[a].get(p, 0) + w
        for (p, a), w in (read or {}).items():
            a = check(p, a, w, "read arc")
            read_d[a][p] = w
        self._pre = {a: Multiset(d) for a, d in pre_d.items()}
        self._post = {a: Multiset(d) for a, d in post_d.items()}
        self._read = {a: dict(sorted(d.items())) for a, d in read_d.items() if d}
        for a in self.actions:
            if not self._pre[a] and a not in self._read:
                raise InvalidNet(f"action {a} has no input place")

        if initial is None:
            initial = [Multiset()]
        elif isinstance(initial, Mapping):
            initial = [initial]
        markings = []
        for m in initial:
            m = Multiset(m)
            unknown = m.support - place_set
            if unknown:
                raise InvalidNet(f"initial marking mentions undeclared places {sorted(unknown)}")
            markings.append(m)
        if not markings:
            raise InvalidNet("at least one initial marking is required")
        self.initial_markings: tuple[Multiset, ...] = tuple(markings)

    # structure -------------------------------------------------------------

    @classmethod
    def from_arcs(cls, places, actions, arcs, initial=None, read=None) -> "PTNet":
        """Build from ``(source, target, weight)`` triples; one end must be a place."""
        places = list(places)
        place_set = set(places)
        action_set = {action(a) for a in actions}
        pre, post = {}, {}
        for src, dst, w in arcs:
            if src in place_set and not isinstance(src, ActionName):
                a = action(dst)
                if a not in action_set:
                    raise UnknownAction(f"arc {src}->{dst} targets an undeclared action")
                pre[(src, a)] = pre.get((src, a), 0) + w
            elif dst in place_set and not isinstance(dst, ActionName):
                a = action(src)
                if a not in action_set:
                    raise UnknownAction(f"arc {src}->{dst} leaves an undeclared action")
                post[(a, dst)] = post.get((a, dst), 0) + w
            else:
                raise InvalidNet(f"arc {src}->{dst} does not connect a place and an action")
        read = {(p, action(a)): v for (p, a), v in (read or {}).items()}
        net_cls = PTRNet if read else cls
        return net_cls(places, action_set, pre, post, initial, read)

    @property
    def initial_marking(self) -> Multiset:
        return self.initial_markings[0]

    @property
    def has_read_arcs(self) -> bool:
        return bool(self._read)

    def pre(self, a) -> Multiset:
        return self._pre[self._known(a)]

    def post(self, a) -> Multiset:
        return self._post[self._known(a)]

    def eff(self, a) -> Vector:
        a = self._known(a)
        return self._post[a] - self._pre[a]

    def read(self, a) -> dict[str, int]:
        return dict(self._read.get(self._known(a), {}))

    def flow(self, src, dst) -> int:
        """Arc weight from ``src`` to ``dst`` (zero if absent)."""
        if not isinstance(src, ActionName) and src in self.places:
            return self._pre[self._known(dst)][src]
        return self._post[self._known(src)][dst]

    def arcs(self) -> list[tuple]:
        """All arcs as ``(source, target, weight)``, places-to-actions first."""
        out = []
        for a in self.actions:
            out.extend((p, a, w) for p, w in self._pre[a].items_sorted())
        for a in self.actions:
            out.extend((a, p, w) for p, w in self._post[a].items_sorted())
        return out

    def read_arcs(self) -> list[tuple[str, ActionName, int]]:
        return [(p, a, v) for a in self.actions for p, v in self._read.get(a, {}).items()]

    def _known(self, a) -> ActionName:
        a = action(a)
        if a not in self._pre:
            raise UnknownAction(f"{a} is not an action of this net")
        return a

    def _check_step(self, alpha: Multiset) -> None:
        for a in alpha.support:
            self._known(a)

    def __eq__(self, other):
        if not isinstance(other, PTNet):
            return NotImplemented
        return (
            self.places == other.places
            and self.actions == other.actions
            and self._pre == other._pre
            and self._post == other._post
            and self._read == other._read
            and self.initial_markings == other.initial_markings
        )

    def __hash__(self):
        return hash((self.places, self.actions, tuple(self.arcs())))

    def __repr__(self):
        kind = type(self).__name__
        return f"{kind}({len(self.places)} places, {len(self.actions)} actions, M0={self.initial_marking.literal()})"

    def _rebuild(self, *, places=None, actions=None, pre=None, post=None, initial=None, read=None) -> "PTNet":
        pre = self._pre_map() if pre is None else pre
        post = self._post_map() if post is None else post
        read = self._read_map() if read is None else read
        net_cls = PTRNet if read else PTNet
        return net_cls(
            self.places if places is None else places,
            self.actions if actions is None else actions,
            pre,
            post,
            self.initial_markings if initial is None else initial,
            read,
        )

    def _pre_map(self) -> dict:
        return {(p, a): w for a in self.actions for p, w in self._pre[a].items()}

    def _post_map(self) -> dict:
        return {(a, p): w for a in self.actions for p, w in self._post[a].items()}

    def _read_map(self) -> dict:
        return {(p, a): v for a, d in self._read.items() for p, v in d.items()}

    def with_initial(self, markings) -> "PTNet":
        if isinstance(markings, Mapping):
            markings = [markings]
        return self._rebuild(initial=list(markings))

    # behaviour -----------------------------------------------------------------

    def step_vectors(self, alpha) -> tuple[Multiset, Multiset, Vector]:
        alpha = Multiset(alpha)
        self._check_step(alpha)
        pre, post = Multiset(), Multiset()
        for a, n in alpha.items():
            pre = pre + self._pre[a] * n
            post = post + self._post[a] * n
        return pre, post, post - pre

    def enabled(self, m, alpha) -> bool:
        m, alpha = Multiset(m), Multiset(alpha)
        pre, _, _ = self.step_vectors(alpha)
        if not pre <= m:
            return False
        return all(self._reads_ok(m, a) for a in alpha.support)

    def _reads_ok(self, m: Multiset, a: ActionName) -> bool:
        return all(m[p] == v for p, v in self._read.get(a, {}).items())

    def fire(self, m, alpha) -> Multiset:
        m, alpha = Multiset(m), Multiset(alpha)
        if not self.enabled(m, alpha):
            raise NotEnabled(f"step {alpha.literal()} is not enabled at {m.literal()}")
        _, _, eff = self.step_vectors(alpha)
        return Multiset(m + eff)

    def enabled_steps(self, m, max_step_size: int = DEFAULT_MAX_STEP) -> set[Multiset]:
        """All non-empty enabled steps of size at most ``max_step_size``.

        Raises StepBoundExceeded when a step of the maximal size has an
        enabled one-action extension, i.e. when the bound cut behaviour off.
        """
        if max_step_size < 1:
            raise ValueError("max_step_size must be positive")
        m = Multiset(m)
        candidates = []
        for a in self.actions:
            if not self._reads_ok(m, a):
                continue
            pre = self._pre[a]
            cap = min((m[p] // w for p, w in pre.items()), default=max_step_size + 1)
            if cap > 0:
                candidates.append((a, pre, cap))
        found = self._knapsack(m, candidates, max_step_size + 1)
        steps = {s for s in found if s.size <= max_step_size}
        for s in found:
            if s.size > max_step_size:
                raise StepBoundExceeded(
                    f"at {m.literal()} an enabled step of size {s.size} exceeds the bound {max_step_size}"
                )
        return steps

    @staticmethod
    def _knapsack(m: Multiset, candidates, limit: int) -> set[Multiset]:
        out: set[Multiset] = set()
        remaining = dict(m.items())
        counts: dict[ActionName, int] = {}

        def go(i: int, size: int):
            if i == len(candidates):
                if size:
                    out.add(Multiset(counts))
                return
            a, pre, cap = candidates[i]
            go(i + 1, size)
            taken = 0
            while size + taken < limit and taken < cap:
                if any(remaining.get(p, 0) < w for p, w in pre.items()):
                    break
                for p, w in pre.items():
                    remaining[p] -= w
                taken += 1
                counts[a] = taken
                go(i + 1, size + taken)
            for p, w in pre.items():
                remaining[p] = remaining.get(p, 0) + w * taken
            counts.pop(a, None)

        go(0, 0)
        return out


class PTRNet(PTNet):
    """A PT-net carrying weighted read arcs (exact-count tests)."""


# -- concurrent reachability graph ----------------------------------------------


@dataclass
class CrgResult:
    sts: StepTransitionSystem
    marking_of: dict[str, Multiset] = field(default_factory=dict)
    limits_hit: str | None = None

    def state_of(self, m) -> str:
        return marking_literal(m)


def build_crg(
    net: PTNet,
    max_states: int = DEFAULT_MAX_STATES,
    max_step_size: int = DEFAULT_MAX_STEP,
    *,
    initial=None,
    strict: bool = True,
) -> CrgResult:
    """Breadth-first exploration of all reachable markings and enabled steps.

    ``initial`` overrides the net's initial markings.  With ``strict`` the
    limits raise; otherwise the truncated graph is returned with
    ``limits_hit`` set.
    """
    starts = net.initial_markings if initial is None else (
        [Multiset(initial)] if isinstance(initial, Mapping) else [Multiset(m) for m in initial]
    )
    marking_of: dict[str, Multiset] = {}
    transitions = []
    queue: deque[str] = deque()
    initials = []
    limits_hit = None
    for m in starts:
        name = marking_literal(m)
        initials.append(name)
        if name not in marking_of:
            marking_of[name] = m
            queue.append(name)
    while queue:
        name = queue.popleft()
        m = marking_of[name]
        try:
            steps = net.enabled_steps(m, max_step_size)
        except StepBoundExceeded:
            if strict:
                raise
            limits_hit = "step-size"
            steps = {s for s in net.enabled_steps(m, max_step_size + 1) if s.size <= max_step_size}
        for alpha in sorted(steps, key=lambda s: s.literal()):
            nxt = net.fire(m, alpha)
            nname = marking_literal(nxt)
            if nname not in marking_of:
                if len(marking_of) >= max_states:
                    if strict:
                        raise StateBoundExceeded(f"more than {max_states} reachable markings")
                    limits_hit = "states"
                    continue
                marking_of[nname] = nxt
                queue.append(nname)
            transitions.append((name, alpha, nname))
    names = sorted(marking_of, key=_state_order(marking_of, initials))
    sts = StepTransitionSystem(names, net.actions, transitions, initials, empty_loops=True)
    return CrgResult(sts, marking_of, limits_hit)


def _state_order(marking_of, initials):
    first = {n: i for i, n in enumerate(dict.fromkeys(initials))}

    def key(name):
        return (first.get(name, len(first)), marking_of[name].size, name)

    return key


# -- structural operations --------------------------------------------------------


def subnet(net: PTNet, keep) -> PTNet:
    """The subnet induced by an action subset; places and markings are kept."""
    keep = {action(a) for a in keep}
    unknown = keep - set(net.actions)
    if unknown:
        raise UnknownAction(f"undeclared actions {sorted(map(str, unknown))}")
    return net._rebuild(
        actions=keep,
        pre={k: w for k, w in net._pre_map().items() if k[1] in keep},
        post={k: w for k, w in net._post_map().items() if k[0] in keep},
        read={k: v for k, v in net._read_map().items() if k[1] in keep},
    )


def default_pairing(net: PTNet) -> dict[ActionName, set[ActionName]]:
    """Pair every forward action with the reverse-kind actions of the same base."""
    out: dict[ActionName, set[ActionName]] = {a: set() for a in net.actions if a.is_forward}
    for r in net.actions:
        if r.is_reverse and r.forward() in out:
            out[r.forward()].add(r)
    return out


@dataclass
class ReverseStructure:
    has_reverses: bool
    has_strict_reverses: bool
    has_split_reverses: bool
    per_action: dict[ActionName, dict[str, bool]]

    def to_json(self) -> dict:
        return {
            "hasReverses": self.has_reverses,
            "hasStrictReverses": self.has_strict_reverses,
            "hasSplitReverses": self.has_split_reverses,
            "perAction": {str(a): v for a, v in sorted(self.per_action.items())},
        }


def check_reverse_structure(net: PTNet, pairing: Mapping | None = None) -> ReverseStructure:
    """Classify the net by checking effect and arc equations per forward action."""
    forward = [a for a in net.actions if a.is_forward]
    if pairing is None:
        pairs = default_pairing(net)
    else:
        pairs = {action(a): {action(r) for r in rs} for a, rs in pairing.items()}
        missing = [a for a in forward if a not in pairs]
        if missing:
            raise IncompletePairing(f"no reverses paired with {sorted(map(str, missing))}")
    per_action = {}
    for a in forward:
        plain = [r for r in pairs.get(a, ()) if r.kind == "reverse"]
        indexed = [r for r in pairs.get(a, ()) if r.kind == "indexed"]
        neg = -net.eff(a)
        per_action[a] = {
            "reverse": any(net.eff(r) == neg for r in plain),
            "strict": any(net.pre(r) == net.post(a) and net.post(r) == net.pre(a) for r in plain),
            "split": any(net.eff(r) == neg for r in indexed),
        }
    return ReverseStructure(
        bool(forward) and all(v["reverse"] for v in per_action.values()),
        bool(forward) and all(v["strict"] for v in per_action.values()),
        bool(forward) and all(v["split"] for v in per_action.values()),
        per_action,
    )



def crg_of(net: PTNet, **limits) -> StepTransitionSystem:
    return build_crg(net, **limits).sts
