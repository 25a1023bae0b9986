"""Region-based synthesis of PT-nets from step transition systems.

A region is a candidate place: a token count at the root of every
undirected component plus an in-weight and out-weight per action.  The
marking of a state follows from its displacement, so every constraint is
linear in the region's variables and is solved exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .algebra import EMPTY, ActionName, Multiset, Vector, maximal_elements
from .errors import (
    CapExceeded,
    LimitExceeded,
    NoHomeState,
    NotAHomeCover,
    NotASetSystem,
    NotCest,
    VerificationFailed,
)
from .lp import OPTIMAL, check_certificate, farkas_certificate, scale_to_integers, solve_lp
from .petri import PTNet, build_crg, marking_literal
from .reversal import reverse, reverse_multi
from .sts import (
    StepTransitionSystem,
    _lattice,
    check_ce,
    check_isomorphism,
    home_states,
    is_home_cover,
    spanning_displacements,
    validate_cest,
)

DEFAULT_CANDIDATE_CAP = 100_000


def minimal_disabled_steps(
    sts: StepTransitionSystem, s: str, cap: int = DEFAULT_CANDIDATE_CAP
) -> list[Multiset]:
    """The minimal steps not enabled at ``s``.

    Enabled steps are closed under sub-multisets, so every minimal disabled
    step is an enabled step plus one action.
    """
    enabled = sts.steps_at(s) | {EMPTY}
    if len(enabled) * max(len(sts.actions), 1) > cap:
        raise CapExceeded(f"too many candidate disabled steps at {s!r}")
    candidates = set()
    for alpha in enabled:
        for t in sts.actions:
            beta = alpha + Multiset({t: 1})
            if beta not in enabled:
                candidates.add(beta)
    out = [
        b
        for b in candidates
        if all((b - Multiset({t: 1})) in enabled for t in b.support)
    ]
    return sorted(out, key=lambda b: (b.size, b.literal()))


@dataclass(frozen=True)
class SeparationInstance:
    """Either disable ``step`` at ``state`` or tell ``state`` and ``other`` apart."""

    kind: str
    state: str
    step: Multiset | None = None
    other: str | None = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "state": self.state}
        if self.step is not None:
            out["step"] = self.step.as_dict()
        if self.other is not None:
            out["other"] = self.other
        return out

    def __str__(self):
        if self.kind == "event-state":
            return f"disable {self.step.literal()} at {self.state}"
        return f"separate {self.state} from {self.other}"


@dataclass
class PlaceSolution:
    """An integer region, with the rational LP point it was scaled from."""

    base: dict[str, int]
    f_in: dict[ActionName, int]
    f_out: dict[ActionName, int]
    tokens: dict[str, int]
    rational: list[Fraction] = field(default_factory=list)
    scale: int = 1

    def key(self):
        return (
            tuple(sorted(self.tokens.items())),
            tuple(sorted(self.f_in.items())),
            tuple(sorted(self.f_out.items())),
        )


@dataclass
class Certificate:
    """Farkas multipliers proving that every LP branch of an instance is infeasible."""

    branches: list[list[tuple[str, Fraction]]]
    systems: list[tuple[list, list, list]] = field(default_factory=list, repr=False)

    def holds(self) -> bool:
        """Re-check every branch by substitution."""
        return bool(self.systems) and all(
            check_certificate(A, b, y) for (A, b, _), y in zip(self.systems, self._dense())
        )

    def _dense(self):
        out = []
        for (A, b, labels), branch in zip(self.systems, self.branches):
            weights = dict(branch)
            out.append([weights.get(label, Fraction(0)) for label in labels])
        return out

    def to_json(self) -> dict:
        return {
            "branches": [
                [{"constraint": label, "multiplier": str(y)} for label, y in branch]
                for branch in self.branches
            ]
        }


@dataclass
class SynthesisOutcome:
    solved: bool
    net: PTNet | None = None
    psi: dict[str, Multiset] = field(default_factory=dict)
    instance: SeparationInstance | None = None
    certificate: Certificate | None = None
    reason: str = ""

    def __bool__(self):
        return self.solved

    def to_json(self) -> dict:
        if self.solved:
            return {
                "solved": True,
                "places": len(self.net.places),
                "psi": {s: m.as_dict() for s, m in sorted(self.psi.items())},
            }
        out = {"solved": False, "reason": self.reason}
        if self.instance is not None:
            out["instance"] = self.instance.to_json()
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        return out


class RegionProblem:
    """The linear constraints shared by every region of a system."""

    def __init__(self, sts: StepTransitionSystem):
        self.sts = sts
        self.disp = spanning_displacements(sts)
        self.roots = list(dict.fromkeys(self.disp[s][0] for s in sts.states))
        self.lattice = _lattice(sts, self.disp)
        self.actions = list(sts.actions)
        nr, na = len(self.roots), len(self.actions)
        self.nvars = nr + 2 * na
        self._root_col = {r: i for i, r in enumerate(self.roots)}
        self._in_col = {t: nr + i for i, t in enumerate(self.actions)}
        self._out_col = {t: nr + na + i for i, t in enumerate(self.actions)}
        self.forms = {s: self.marking_form(s) for s in sts.states}
        self.rows, self.rhs, self.labels = self._base_rows()

    def effect_form(self, v: Vector) -> list[int]:
        row = [0] * self.nvars
        for t, c in v.items():
            row[self._out_col[t]] += c
            row[self._in_col[t]] -= c
        return row

    def marking_form(self, s: str) -> list[int]:
        root, d = self.disp[s]
        row = self.effect_form(d)
        row[self._root_col[root]] += 1
        return row

    def consume_form(self, alpha: Multiset) -> list[int]:
        row = [0] * self.nvars
        for t, c in alpha.items():
            row[self._in_col[t]] += c
        return row

    def _base_rows(self):
        rows, rhs, labels = [], [], []
        for i, g in enumerate(self.lattice.vectors()):
            form = self.effect_form(g)
            rows += [form, [-v for v in form]]
            rhs += [0, 0]
            labels += [f"cycle {g.literal()} <= 0", f"cycle {g.literal()} >= 0"]
        for s in self.sts.states:
            for alpha in maximal_elements(self.sts.steps_at(s) | {EMPTY}):
                consume = self.consume_form(alpha)
                rows.append([c - m for c, m in zip(consume, self.forms[s])])
                rhs.append(0)
                labels.append(f"enable {alpha.literal()} at {s}")
        return rows, rhs, labels

    def separation_row(self, inst: SeparationInstance, sign: int = 1) -> tuple[list[int], str]:
        if inst.kind == "event-state":
            consume = self.consume_form(inst.step)
            return [m - c for m, c in zip(self.forms[inst.state], consume)], str(inst)
        diff = [a - b for a, b in zip(self.forms[inst.state], self.forms[inst.other])]
        if sign > 0:
            return [-v for v in diff], f"{inst.state} above {inst.other}"
        return diff, f"{inst.state} below {inst.other}"

    def system(self, inst: SeparationInstance, sign: int = 1):
        row, label = self.separation_row(inst, sign)
        return self.rows + [row], self.rhs + [-1], self.labels + [label]

    def solve(self, inst: SeparationInstance) -> PlaceSolution | Certificate:
        """Find an integer region for the instance or prove none exists."""
        signs = (1,) if inst.kind == "event-state" else (1, -1)
        branches, systems = [], []
        for sign in signs:
            A, b, labels = self.system(inst, sign)
            res = solve_lp(A, b, [1] * self.nvars, maximize=False)
            if res.status == OPTIMAL:
                return self.to_solution(res.x)
            y = farkas_certificate(A, b)
            branches.append([(label, v) for label, v in zip(labels, y) if v])
            systems.append((A, b, labels))
        return Certificate(branches, systems)

    def to_solution(self, x: list[Fraction]) -> PlaceSolution:
        ints, factor = scale_to_integers(x)
        base = {r: ints[self._root_col[r]] for r in self.roots}
        f_in = {t: ints[self._in_col[t]] for t in self.actions}
        f_out = {t: ints[self._out_col[t]] for t in self.actions}
        tokens = {s: sum(a * v for a, v in zip(self.forms[s], ints)) for s in self.sts.states}
        return PlaceSolution(base, f_in, f_out, tokens, list(x), factor)

    def value(self, sol: PlaceSolution, s: str) -> int:
        return sol.tokens[s]

    def separates(self, sol: PlaceSolution, inst: SeparationInstance) -> bool:
        if inst.kind == "event-state":
            need = sum(c * sol.f_in[t] for t, c in inst.step.items())
            return sol.tokens[inst.state] < need
        return sol.tokens[inst.state] != sol.tokens[inst.other]


def solve_separation(sts: StepTransitionSystem, inst: SeparationInstance) -> PlaceSolution | Certificate:
    return RegionProblem(sts).solve(inst)


def event_state_instances(sts: StepTransitionSystem) -> list[SeparationInstance]:
    out = []
    for s in sts.states:
        for beta in minimal_disabled_steps(sts, s):
            out.append(SeparationInstance("event-state", s, step=beta))
    return out


def _component_states(sts: StepTransitionSystem) -> list[list[str]]:
    return [sorted(sts.reachable_from(r), key=sts.order) for r in sts.initials]


def _check_input(sts: StepTransitionSystem) -> None:
    report = validate_cest(sts)
    failures = {k: w for k, w in report.failures().items() if k != "CE"}
    for r in sts.initials:
        w = check_ce(sts.component(r))
        if w is not None:
            failures.setdefault("CE", w)
    if failures:
        raise NotCest(f"input is not a CEST-system: {failures}", report)


def synthesize(sts: StepTransitionSystem, *, verify: bool = True, place_prefix: str = "p") -> SynthesisOutcome:
    """Find a PT-net whose reachability graphs from psi(r) match each component.

    Returns an unsolvable outcome with the first failing separation
    instance and its infeasibility certificate otherwise.
    """
    _check_input(sts)
    problem = RegionProblem(sts)
    regions: list[PlaceSolution] = []

    def need(inst):
        if any(problem.separates(sol, inst) for sol in regions):
            return None
        result = problem.solve(inst)
        if isinstance(result, Certificate):
            return result
        regions.append(result)
        return None

    for inst in event_state_instances(sts):
        cert = need(inst)
        if cert is not None:
            return SynthesisOutcome(False, instance=inst, certificate=cert, reason="event-state separation is infeasible")

    for states in _component_states(sts):
        groups = [states]
        while groups:
            group = groups.pop(0)
            if len(group) < 2:
                continue
            inst = SeparationInstance("state-state", group[0], other=group[1])
            cert = need(inst)
            if cert is not None:
                return SynthesisOutcome(False, instance=inst, certificate=cert, reason="state-state separation is infeasible")
            split: dict[tuple, list[str]] = {}
            for s in group:
                split.setdefault(tuple(sol.tokens[s] for sol in regions), []).append(s)
            groups.extend(split.values())

    net, psi = assemble(sts, regions, place_prefix)
    if verify:
        verify_solution(sts, net, psi)
    return SynthesisOutcome(True, net, psi)


def assemble(sts: StepTransitionSystem, regions: Iterable[PlaceSolution], prefix: str = "p"):
    """Turn distinct regions into places; return the net and the marking map."""
    unique = list({sol.key(): sol for sol in regions}.values())
    names = [f"{prefix}{i + 1}" for i in range(len(unique))]
    pre, post = {}, {}
    for name, sol in zip(names, unique):
        for t, w in sol.f_in.items():
            if w:
                pre[(name, t)] = w
        for t, w in sol.f_out.items():
            if w:
                post[(t, name)] = w
    psi = {s: Multiset({n: sol.tokens[s] for n, sol in zip(names, unique)}) for s in sts.states}
    net = PTNet(names, sts.actions, pre, post, [psi[r] for r in sts.initials])
    return net, psi


def verify_solution(sts: StepTransitionSystem, net: PTNet, psi: dict[str, Multiset]) -> None:
    """Check every component against the net's reachability graph from psi(r)."""
    limit_states = len(sts.states) + 1
    limit_step = sts.max_step_size() + 1
    for r in sts.initials:
        comp = sts.component(r)
        try:
            crg = build_crg(net, limit_states, limit_step, initial=psi[r]).sts
        except LimitExceeded as exc:
            raise VerificationFailed(f"reachability graph from psi({r}) exceeds the system: {exc}") from exc
        expected = {s: marking_literal(psi[s]) for s in comp.states}
        match = check_isomorphism(comp, crg, expected)
        if not match.ok:
            raise VerificationFailed(f"component {r} is not reproduced", match.witness)


# -- decision procedures -------------------------------------------------------


def _cover(sts: StepTransitionSystem, home) -> list[str]:
    cover = [home] if isinstance(home, str) else list(home)
    for r in cover:
        sts.check_state(r)
    if not cover or not is_home_cover(sts, cover):
        raise NotAHomeCover(f"{cover} is not a home cover")
    return cover


def decide_mixed_reversibility(
    sts: StepTransitionSystem, home=None, *, verify: bool = True
) -> SynthesisOutcome:
    """Decide whether the mixed reverse is solvable by solving the system and
    its reversal over a home cover separately and combining the nets."""
    from .constructions import combine_reversal

    report = validate_cest(sts)
    if not report.ok:
        raise NotCest(f"input is not a CEST-system: {report.failures()}", report)
    cover = _cover(sts, sts.states if home is None else home)
    forward = synthesize(sts)
    if not forward.solved:
        forward.reason = "the forward system is unsolvable: " + forward.reason
        return forward
    backward = synthesize(reverse_multi(sts, cover), place_prefix="q")
    if not backward.solved:
        backward.reason = "the reversed system over the home cover is unsolvable: " + backward.reason
        return backward
    report = combine_reversal(forward.net, forward.psi, backward.net, backward.psi, sts, cover, verify=verify)
    return SynthesisOutcome(True, report.net, report.psi)


def decide_direct_reversibility_set(sts: StepTransitionSystem, *, verify: bool = True) -> SynthesisOutcome:
    """Decide solvability of the direct reverse of a set system with a home state."""
    from .constructions import mix2set_transform

    if not sts.is_set_system():
        raise NotASetSystem("the system has a step with a repeated action")
    homes = home_states(sts)
    if not homes:
        raise NoHomeState("the system has no home state")
    home = min(homes, key=sts.order)
    mixed = decide_mixed_reversibility(sts, [home], verify=verify)
    if not mixed.solved:
        return mixed
    _, k = is_step_finite(sts)
    report = mix2set_transform(mixed.net, mixed.psi, sts, k=k, verify=verify)
    return SynthesisOutcome(True, report.net, report.psi)


def is_step_finite(sts: StepTransitionSystem) -> tuple[bool, int]:
    """Finite systems are always step-finite; also report the largest step size."""
    return True, sts.max_step_size()


__all__ = [
    "minimal_disabled_steps",
    "SeparationInstance",
    "PlaceSolution",
    "Certificate",
    "SynthesisOutcome",
    "RegionProblem",
    "solve_separation",
    "synthesize",
    "decide_mixed_reversibility",
    "decide_direct_reversibility_set",
    "is_step_finite",
]
