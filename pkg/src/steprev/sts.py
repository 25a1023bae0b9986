"""Step transition systems and their structural checks."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import networkx as nx

from .algebra import EMPTY, ActionName, Multiset, Vector, action, sub_multisets
from .errors import (
    CapExceeded,
    DisconnectedSystem,
    ForwardDeterminismViolated,
    InvalidSystem,
    UnknownAction,
    UnknownState,
)
from .lattice import hermite_normal_form, is_member, reduce_vector

AXIOMS = ("EL", "REA", "FD", "SEQ", "CE")
DEFAULT_SEQ_CAP = 16


class Transition(NamedTuple):
    source: str
    step: Multiset
    target: str

    def literal(self) -> str:
        return f"{self.source} -{self.step.literal()}-> {self.target}"


def _jsonable(value):
    if isinstance(value, Vector):
        return value.as_dict()
    if isinstance(value, ActionName):
        return str(value)
    if isinstance(value, Transition):
        return {"from": value.source, "step": value.step.as_dict(), "to": value.target}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


@dataclass
class Witness:
    """A concrete counterexample that can be re-checked in isolation."""

    kind: str
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, **{k: _jsonable(v) for k, v in sorted(self.detail.items())}}

    def __str__(self):
        inner = ", ".join(f"{k}={_jsonable(v)}" for k, v in sorted(self.detail.items()))
        return f"{self.kind}({inner})"


def _as_step(value) -> Multiset:
    if isinstance(value, Multiset):
        return value
    if isinstance(value, dict):
        return Multiset({action(k): v for k, v in value.items()})
    if isinstance(value, str):
        value = value.split() if value.strip() else []
    return Multiset.of(*(action(v) for v in value))


class StepTransitionSystem:
    """A finite step transition system with one or more initial states.

    States are strings.  Transitions are ``(source, step, target)`` triples
    and form a set; the empty-step loops are stored explicitly.
    """

    def __init__(
        self,
        states: Iterable[str],
        actions: Iterable,
        transitions: Iterable,
        initials,
        *,
        empty_loops: bool = False,
    ):
        self.states: tuple[str, ...] = tuple(dict.fromkeys(states))
        if not self.states:
            raise InvalidSystem("a step transition system needs at least one state")
        self.actions: tuple[ActionName, ...] = tuple(sorted({action(a) for a in actions}))
        if isinstance(initials, str):
            initials = [initials]
        self.initials: tuple[str, ...] = tuple(dict.fromkeys(initials))
        if not self.initials:
            raise InvalidSystem("at least one initial state is required")
        state_set = set(self.states)
        action_set = set(self.actions)
        for s in self.initials:
            if s not in state_set:
                raise UnknownState(f"initial state {s!r} is not declared")
        trans = set()
        for src, st, dst in transitions:
            st = _as_step(st)
            if src not in state_set:
                raise UnknownState(f"transition source {src!r} is not declared")
            if dst not in state_set:
                raise UnknownState(f"transition target {dst!r} is not declared")
            unknown = st.support - action_set
            if unknown:
                raise UnknownAction(f"step {st.literal()} uses undeclared {sorted(map(str, unknown))}")
            trans.add(Transition(src, st, dst))
        if empty_loops:
            trans.update(Transition(s, EMPTY, s) for s in self.states)
        self._order = {s: i for i, s in enumerate(self.states)}
        self.transitions: tuple[Transition, ...] = tuple(
            sorted(trans, key=lambda t: (self._order[t.source], t.step.literal(), self._order[t.target]))
        )
        self._out: dict[str, list[Transition]] = {s: [] for s in self.states}
        self._in: dict[str, list[Transition]] = {s: [] for s in self.states}
        self._succ: dict[tuple[str, Multiset], list[str]] = {}
        for t in self.transitions:
            self._out[t.source].append(t)
            self._in[t.target].append(t)
            self._succ.setdefault((t.source, t.step), []).append(t.target)

    # construction helpers -------------------------------------------------

    def replace(self, *, states=None, actions=None, transitions=None, initials=None) -> "StepTransitionSystem":
        return StepTransitionSystem(
            self.states if states is None else states,
            self.actions if actions is None else actions,
            self.transitions if transitions is None else transitions,
            self.initials if initials is None else initials,
        )

    def rename_states(self, mapping) -> "StepTransitionSystem":
        return StepTransitionSystem(
            [mapping[s] for s in self.states],
            self.actions,
            [(mapping[t.source], t.step, mapping[t.target]) for t in self.transitions],
            [mapping[s] for s in self.initials],
        )

    # queries --------------------------------------------------------------

    @property
    def initial(self) -> str:
        return self.initials[0]

    def order(self, s: str) -> int:
        return self._order[s]

    def __contains__(self, t) -> bool:
        src, st, dst = t
        return dst in self._succ.get((src, _as_step(st)), ())

    def __eq__(self, other):
        if not isinstance(other, StepTransitionSystem):
            return NotImplemented
        return (
            set(self.states) == set(other.states)
            and self.actions == other.actions
            and set(self.transitions) == set(other.transitions)
            and self.initials == other.initials
        )

    def __hash__(self):
        return hash((frozenset(self.states), self.actions, frozenset(self.transitions), self.initials))

    def __repr__(self):
        return (
            f"StepTransitionSystem({len(self.states)} states, {len(self.actions)} actions, "
            f"{len(self.transitions)} transitions, initials={list(self.initials)})"
        )

    def check_state(self, s: str) -> None:
        if s not in self._order:
            raise UnknownState(f"unknown state {s!r}")

    def out(self, s: str) -> list[Transition]:
        self.check_state(s)
        return self._out[s]

    def incoming(self, s: str) -> list[Transition]:
        self.check_state(s)
        return self._in[s]

    def successors(self, s: str, alpha) -> list[str]:
        return list(self._succ.get((s, _as_step(alpha)), ()))

    def steps_at(self, s: str) -> set[Multiset]:
        return {t.step for t in self.out(s)}

    def steps(self) -> set[Multiset]:
        return {t.step for t in self.transitions}

    def nonempty_transitions(self) -> list[Transition]:
        return [t for t in self.transitions if t.step]

    def is_set_system(self) -> bool:
        return all(t.step.is_set() for t in self.transitions)

    def max_step_size(self) -> int:
        return max((t.step.size for t in self.transitions), default=0)

    def forward_actions(self) -> tuple[ActionName, ...]:
        return tuple(a for a in self.actions if a.is_forward)

    def reachable_from(self, sources) -> list[str]:
        if isinstance(sources, str):
            sources = [sources]
        seen = dict.fromkeys(sources)
        queue = deque(seen)
        while queue:
            s = queue.popleft()
            for t in self._out[s]:
                if t.target not in seen:
                    seen[t.target] = None
                    queue.append(t.target)
        return list(seen)

    def pred(self, s: str) -> set[str]:
        """All states from which ``s`` is reachable."""
        self.check_state(s)
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for t in self._in[u]:
                if t.source not in seen:
                    seen.add(t.source)
                    queue.append(t.source)
        return seen

    def component(self, r: str) -> "StepTransitionSystem":
        """The single-initial system of the states reachable from ``r``."""
        self.check_state(r)
        keep = set(self.reachable_from(r))
        return StepTransitionSystem(
            [s for s in self.states if s in keep],
            self.actions,
            [t for t in self.transitions if t.source in keep],
            [r],
        )

    def components(self) -> dict[str, "StepTransitionSystem"]:
        return {r: self.component(r) for r in self.initials}


# -- successor ----------------------------------------------------------------


def successor(sts: StepTransitionSystem, s: str, alpha) -> str | None:
    """The unique state reached from ``s`` by ``alpha``, or None."""
    sts.check_state(s)
    targets = sts.successors(s, alpha)
    if len(targets) > 1:
        raise ForwardDeterminismViolated(
            f"state {s!r} has {len(targets)} targets for step {_as_step(alpha).literal()}"
        )
    return targets[0] if targets else None


# -- displacements and the cycle lattice ----------------------------------------


def _undirected_adjacency(sts: StepTransitionSystem):
    adj: dict[str, list[tuple[str, Multiset, int]]] = {s: [] for s in sts.states}
    for t in sts.transitions:
        adj[t.source].append((t.target, t.step, +1))
        adj[t.target].append((t.source, t.step, -1))
    return adj


def spanning_displacements(sts: StepTransitionSystem) -> dict[str, tuple[str, Vector]]:
    """Map every state to ``(root, delta)`` along a BFS spanning forest.

    Roots are taken from the initial states first, then from the remaining
    states in declaration order.
    """
    adj = _undirected_adjacency(sts)
    out: dict[str, tuple[str, Vector]] = {}
    roots = list(sts.initials) + list(sts.states)
    for root in roots:
        if root in out:
            continue
        out[root] = (root, Vector())
        queue = deque([root])
        while queue:
            u = queue.popleft()
            du = out[u][1]
            for v, st, sign in adj[u]:
                if v not in out:
                    out[v] = (root, du + st if sign > 0 else du - st)
                    queue.append(v)
    return out


def displacement(sts: StepTransitionSystem, s: str, base: str) -> Vector:
    """Signature of an undirected path from ``base`` to ``s``.

    Well defined modulo the cycle lattice; the representative is the one
    read off a BFS spanning tree rooted at ``base``.
    """
    sts.check_state(s)
    sts.check_state(base)
    adj = _undirected_adjacency(sts)
    delta = {base: Vector()}
    queue = deque([base])
    while queue:
        u = queue.popleft()
        if u == s:
            return delta[u]
        for v, st, sign in adj[u]:
            if v not in delta:
                delta[v] = delta[u] + st if sign > 0 else delta[u] - st
                queue.append(v)
    raise DisconnectedSystem(f"no undirected path from {base!r} to {s!r}")


class CycleLattice:
    """The integer lattice generated by cycle signatures, in HNF."""

    def __init__(self, alphabet: Iterable[ActionName], generators: Iterable[Vector] = ()):
        self.alphabet: tuple[ActionName, ...] = tuple(alphabet)
        self._index = {a: i for i, a in enumerate(self.alphabet)}
        self.basis: list[list[int]] = []
        for g in generators:
            self.add(g)

    def to_row(self, v: Vector) -> list[int]:
        row = [0] * len(self.alphabet)
        for k, c in v.items():
            if k not in self._index:
                raise UnknownAction(f"{k} is outside the lattice alphabet")
            row[self._index[k]] = c
        return row

    def to_vector(self, row) -> Vector:
        return Vector({a: c for a, c in zip(self.alphabet, row)})

    def add(self, v: Vector) -> bool:
        """Add a generator; return True if the lattice grew."""
        row = self.to_row(v)
        if not any(row) or is_member(self.basis, row):
            return False
        self.basis = hermite_normal_form(self.basis + [row], len(self.alphabet))
        return True

    def contains(self, v: Vector) -> bool:
        return is_member(self.basis, self.to_row(v))

    def residue(self, v: Vector) -> tuple[int, ...]:
        return tuple(reduce_vector(self.basis, self.to_row(v)))

    def vectors(self) -> list[Vector]:
        return [self.to_vector(r) for r in self.basis]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def same_lattice(self, other: "CycleLattice") -> bool:
        return all(other.contains(v) for v in self.vectors()) and all(
            self.contains(v) for v in other.vectors()
        )

    def __repr__(self):
        return f"CycleLattice(rank={self.rank}, basis={[v.as_dict() for v in self.vectors()]})"


def _lattice(sts: StepTransitionSystem, disp, alphabet=None) -> CycleLattice:
    lat = CycleLattice(alphabet if alphabet is not None else sts.actions)
    for t in sts.transitions:
        ds = disp[t.source][1]
        dr = disp[t.target][1]
        lat.add(ds + t.step - dr)
    return lat


def cycle_lattice(sts: StepTransitionSystem, alphabet=None) -> CycleLattice:
    """HNF basis of the lattice spanned by all cycle signatures of ``sts``."""
    disp = spanning_displacements(sts)
    rooted = set(sts.initials)
    orphans = [s for s in sts.states if disp[s][0] not in rooted]
    if orphans:
        raise DisconnectedSystem(f"states not connected to an initial state: {orphans[:5]}")
    return _lattice(sts, disp, alphabet)


# -- CEST validation ------------------------------------------------------------


@dataclass
class CestReport:
    verdicts: dict[str, Witness | None]
    is_set_system: bool
    max_step_size: int

    @property
    def ok(self) -> bool:
        return all(w is None for w in self.verdicts.values())

    def passed(self, axiom: str) -> bool:
        return self.verdicts[axiom] is None

    def failures(self) -> dict[str, Witness]:
        return {k: w for k, w in self.verdicts.items() if w is not None}

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "axioms": {
                k: ("pass" if w is None else {"fail": w.to_json()}) for k, w in self.verdicts.items()
            },
            "isSetSystem": self.is_set_system,
            "isStepFinite": True,
            "maxStepSize": self.max_step_size,
        }


def check_el(sts: StepTransitionSystem) -> Witness | None:
    for s in sts.states:
        targets = sts.successors(s, EMPTY)
        if s not in targets:
            return Witness("missing-empty-loop", {"state": s})
        for r in targets:
            if r != s:
                return Witness("empty-step-moves", {"transition": Transition(s, EMPTY, r)})
    return None


def check_rea(sts: StepTransitionSystem) -> Witness | None:
    reached = set(sts.reachable_from(sts.initials))
    for s in sts.states:
        if s not in reached:
            return Witness("unreachable-state", {"state": s})
    return None


def check_fd(sts: StepTransitionSystem) -> Witness | None:
    for (s, st), targets in sts._succ.items():
        if len(targets) > 1:
            return Witness("nondeterministic-step", {"source": s, "step": st, "targets": sorted(targets)})
    return None


def check_seq(sts: StepTransitionSystem, cap: int = DEFAULT_SEQ_CAP) -> Witness | None:
    """Every non-trivial split beta + (gamma - beta) of every step is realisable."""
    for t in sts.transitions:
        gamma = t.step
        if gamma.size < 2:
            continue
        if gamma.size > cap:
            raise CapExceeded(f"step {gamma.literal()} exceeds the SEQ cap {cap}")
        for beta in sub_multisets(gamma):
            if not beta or beta == gamma:
                continue
            rest = gamma - beta
            if not any(sts.successors(mid, rest) for mid in sts.successors(t.source, beta)):
                return Witness("not-sequentialisable", {"transition": t, "first": beta, "second": rest})
    return None


def check_ce(sts: StepTransitionSystem) -> Witness | None:
    """Displacements must be pairwise incongruent within each undirected component."""
    disp = spanning_displacements(sts)
    lat = _lattice(sts, disp)
    seen: dict[tuple, str] = {}
    for s in sts.states:
        root, d = disp[s]
        key = (root, lat.residue(d))
        if key in seen:
            r = seen[key]
            return Witness(
                "constant-effect",
                {"root": root, "states": [r, s], "difference": disp[r][1] - d},
            )
        seen[key] = s
    return None


def ce_witness_holds(sts: StepTransitionSystem, witness: Witness) -> bool:
    """Re-check a CE failure: two distinct states whose displacements are congruent."""
    r, s = witness.detail["states"]
    if r == s:
        return False
    root = witness.detail["root"]
    d = displacement(sts, r, root) - displacement(sts, s, root)
    disp = spanning_displacements(sts)
    return _lattice(sts, disp).contains(d)


def validate_cest(sts: StepTransitionSystem, seq_cap: int = DEFAULT_SEQ_CAP) -> CestReport:
    verdicts = {
        "EL": check_el(sts),
        "REA": check_rea(sts),
        "FD": check_fd(sts),
        "SEQ": check_seq(sts, seq_cap),
        "CE": check_ce(sts),
    }
    return CestReport(verdicts, sts.is_set_system(), sts.max_step_size())


# -- restrictions -----------------------------------------------------------------


def restrict(sts: StepTransitionSystem, mode) -> StepTransitionSystem:
    """Keep singleton/empty steps ('seq'), set steps ('set'), single-action
    steps ('spike'), or steps over a given action subset."""
    if mode == "seq":
        keep = [t for t in sts.transitions if t.step.size <= 1]
        return sts.replace(transitions=keep)
    if mode == "set":
        keep = [t for t in sts.transitions if t.step.is_set()]
        return sts.replace(transitions=keep)
    if mode == "spike":
        keep = [t for t in sts.transitions if t.step.is_spike()]
        return sts.replace(transitions=keep)
    if isinstance(mode, str):
        raise ValueError(f"unknown restriction mode {mode!r}")
    sub = {action(a) for a in mode}
    unknown = sub - set(sts.actions)
    if unknown:
        raise UnknownAction(f"undeclared actions {sorted(map(str, unknown))}")
    keep = [t for t in sts.transitions if t.step.support <= sub]
    return sts.replace(actions=sub, transitions=keep)


# -- home states --------------------------------------------------------------------


def _graph(sts: StepTransitionSystem) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(sts.states)
    g.add_edges_from((t.source, t.target) for t in sts.transitions)
    return g


def home_states(sts: StepTransitionSystem) -> set[str]:
    """States reachable from every state."""
    cond = nx.condensation(_graph(sts))
    sinks = [n for n in cond.nodes if cond.out_degree(n) == 0]
    if len(sinks) != 1:
        return set()
    return set(cond.nodes[sinks[0]]["members"])


def is_home_cover(sts: StepTransitionSystem, cover: Iterable[str]) -> bool:
    covered: set[str] = set()
    for r in cover:
        covered |= sts.pred(r)
    return covered == set(sts.states)


# -- inclusion and isomorphism -------------------------------------------------------


@dataclass
class Match:
    """Outcome of an inclusion or isomorphism check."""

    ok: bool
    psi: dict[str, str] = field(default_factory=dict)
    witness: Witness | None = None

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        out: dict = {"ok": self.ok}
        if self.ok:
            out["psi"] = dict(sorted(self.psi.items()))
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def _initial_pairs(a: StepTransitionSystem, b: StepTransitionSystem):
    if len(a.initials) != len(b.initials):
        return None
    return list(zip(a.initials, b.initials))


def check_inclusion(a: StepTransitionSystem, b: StepTransitionSystem, psi: dict | None = None) -> Match:
    """Find the bijection psi witnessing that ``a`` is included in ``b``.

    The map is forced by breadth-first matching from the initial states; if
    ``psi`` is given it is checked instead of constructed.
    """
    extra = set(a.actions) - set(b.actions)
    if extra:
        return Match(False, witness=Witness("alphabet-mismatch", {"missing": sorted(map(str, extra))}))
    if len(a.states) != len(b.states):
        return Match(
            False,
            witness=Witness("state-count-mismatch", {"left": len(a.states), "right": len(b.states)}),
        )
    pairs = _initial_pairs(a, b)
    if pairs is None:
        return Match(False, witness=Witness("initial-count-mismatch", {}))
    fixed = psi is not None
    mapping: dict[str, str] = dict(psi) if fixed else {}
    used: dict[str, str] = {v: k for k, v in mapping.items()} if fixed else {}
    for s, s2 in pairs:
        if mapping.setdefault(s, s2) != s2 or used.setdefault(s2, s) != s:
            return Match(False, witness=Witness("initial-mismatch", {"state": s, "image": s2}))
    queue = deque(s for s, _ in pairs)
    seen = set(queue)
    while queue:
        s = queue.popleft()
        img = mapping[s]
        for t in a.out(s):
            if t.target in mapping:
                if mapping[t.target] not in b.successors(img, t.step):
                    return Match(False, mapping, Witness("missing-image", {"transition": t, "image_source": img}))
            else:
                targets = b.successors(img, t.step)
                if not targets:
                    return Match(False, mapping, Witness("missing-image", {"transition": t, "image_source": img}))
                if len(targets) > 1:
                    return Match(False, mapping, Witness("ambiguous-image", {"transition": t, "targets": targets}))
                tgt = targets[0]
                if tgt in used:
                    return Match(
                        False, mapping, Witness("not-injective", {"states": [used[tgt], t.target], "image": tgt})
                    )
                mapping[t.target] = tgt
                used[tgt] = t.target
            if t.target not in seen:
                seen.add(t.target)
                queue.append(t.target)
    unmapped = [s for s in a.states if s not in mapping]
    if unmapped:
        return Match(False, mapping, Witness("unreached-state", {"state": unmapped[0]}))
    return Match(True, mapping)


def check_isomorphism(a: StepTransitionSystem, b: StepTransitionSystem, psi: dict | None = None) -> Match:
    """Inclusion in both directions under one bijection."""
    if set(a.actions) != set(b.actions):
        diff = set(a.actions) ^ set(b.actions)
        return Match(False, witness=Witness("alphabet-mismatch", {"difference": sorted(map(str, diff))}))
    m = check_inclusion(a, b, psi)
    if not m.ok:
        return m
    inverse = {v: k for k, v in m.psi.items()}
    for t in b.transitions:
        s, r = inverse.get(t.source), inverse.get(t.target)
        if s is None or r is None or r not in a.successors(s, t.step):
            return Match(False, m.psi, Witness("extra-transition", {"transition": t}))
    return m
