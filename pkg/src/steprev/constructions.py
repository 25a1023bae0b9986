"""Net transformations that realise reversal, each checked against the
behaviour it is supposed to produce."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .algebra import ActionName, Multiset, maximal_elements
from .errors import (
    LimitExceeded,
    NotAReverseNet,
    NotASetSystem,
    NotCest,
    OverlappingSupports,
    PreconditionFailed,
    VerificationFailed,
)
from .petri import (
    DEFAULT_MAX_STATES,
    DEFAULT_MAX_STEP,
    PTNet,
    PTRNet,
    CrgResult,
    build_crg,
    check_reverse_structure,
    marking_literal,
    subnet,
)
from .reversal import SplitReverseCandidate, SplitReverseVerdict, reverse, reverse_multi, verify_split_reverse
from .sts import Match, StepTransitionSystem, Witness, check_inclusion, check_isomorphism, restrict


@dataclass
class TransformReport:
    """The output net of a transformation and the verdict of checking it."""

    net: PTNet
    expected: str
    ok: bool
    psi: dict[str, Multiset] = field(default_factory=dict)
    witness: Witness | None = None
    added_actions: int = 0
    added_places: int = 0
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok

    def require(self) -> "TransformReport":
        if not self.ok:
            raise VerificationFailed(f"output does not realise the {self.expected}", self.witness)
        return self

    def to_json(self) -> dict:
        out = {
            "ok": self.ok,
            "expected": self.expected,
            "addedActions": self.added_actions,
            "addedPlaces": self.added_places,
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        for k, v in sorted(self.details.items()):
            out[k] = v
        return out


def verify_against(
    net: PTNet, target: StepTransitionSystem, psi: Mapping[str, Multiset] | None = None, *, initial=None
) -> Match:
    """Is the reachability graph of ``net`` isomorphic to ``target`` (via ``psi``)?

    Exploration is capped just above the size of ``target`` so that a wrong
    net fails fast instead of exploring a large state space.
    """
    try:
        crg = build_crg(
            net,
            len(target.states) + 1,
            max(target.max_step_size(), 1) + 1,
            initial=initial,
        )
    except LimitExceeded as exc:
        return Match(False, witness=Witness("limit-exceeded", {"message": str(exc)}))
    expected = None if psi is None else {s: marking_literal(psi[s]) for s in target.states}
    return check_isomorphism(target, crg.sts, expected)


def derive_psi(net: PTNet, sts: StepTransitionSystem, clause: str = "input") -> dict[str, Multiset]:
    """The state map forced by matching each component of ``sts`` against the
    net started in the corresponding initial marking."""
    if len(net.initial_markings) != len(sts.initials):
        raise PreconditionFailed("one initial marking per initial state is required", clause)
    psi: dict[str, Multiset] = {}
    for r, m0 in zip(sts.initials, net.initial_markings):
        comp = sts.component(r)
        try:
            crg = build_crg(net, len(comp.states) + 1, max(comp.max_step_size(), 1) + 1, initial=m0)
        except LimitExceeded as exc:
            raise PreconditionFailed(f"net exploration exceeds the system: {exc}", clause) from exc
        match = check_isomorphism(comp, crg.sts)
        if not match.ok:
            raise PreconditionFailed(f"the net does not solve the component at {r}", clause, match.witness)
        for s, lit in match.psi.items():
            m = crg.marking_of[lit]
            if psi.setdefault(s, m) != m:
                raise PreconditionFailed(f"components disagree on the marking of {s}", clause)
    return psi


def _fresh(name: str, taken: set) -> str:
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def _maps(net: PTNet):
    return net._pre_map(), net._post_map(), net._read_map()


# -- mixed to set reversal ----------------------------------------------------------


def mix2set_transform(
    net: PTNet,
    psi: Mapping[str, Multiset] | None,
    sts: StepTransitionSystem,
    k: int | None = None,
    *,
    verify: bool = True,
) -> TransformReport:
    """Forbid steps that mix forward actions with reverses, and reverse spikes.

    For every forward ``a`` and reverse ``~b`` a place with ``k`` tokens gets
    a unit self-loop on ``a`` and a weight-``k`` self-loop on ``~b``.
    """
    mixed = reverse(sts, "mixed")
    if psi is None:
        psi = derive_psi(net, mixed)
    pre_check = verify_against(net, mixed, psi)
    if not pre_check.ok:
        raise PreconditionFailed("the net does not solve the mixed reverse", "input", pre_check.witness)
    if k is None:
        k = sts.max_step_size()
    if k < max(sts.max_step_size(), 1):
        raise PreconditionFailed(f"k={k} is below the largest step size", "k")
    pre, post, read = _maps(net)
    taken = set(net.places)
    added = []
    for a in sts.forward_actions():
        for b in sts.forward_actions():
            rb = b.reverse()
            p = _fresh(f"mx({a},{rb})", taken)
            added.append(p)
            pre[(p, a)] = post[(a, p)] = 1
            pre[(p, rb)] = post[(rb, p)] = k
    extra = Multiset({p: k for p in added})
    out = PTNet(list(net.places) + added, net.actions, pre, post, [m + extra for m in net.initial_markings])
    new_psi = {s: Multiset(m) + extra for s, m in psi.items()}
    report = TransformReport(out, "set reverse", True, new_psi, added_places=len(added), details={"k": k})
    if verify:
        match = verify_against(out, reverse(sts, "set"), new_psi)
        report.ok, report.witness = match.ok, match.witness
    return report


# -- combining a forward and a backward solution -----------------------------------------


def combine_reversal(
    forward: PTNet,
    forward_psi: Mapping[str, Multiset] | None,
    backward: PTNet,
    backward_psi: Mapping[str, Multiset] | None,
    sts: StepTransitionSystem,
    cover: Iterable[str] | None = None,
    *,
    verify: bool = True,
    check_inputs: bool = True,
) -> TransformReport:
    """Glue a net for the system and a net for its reversal into one net with
    strict reverses.

    ``backward`` is over the reverse actions and ``backward_psi`` must give a
    marking for every state.  Place collisions are resolved by renaming the
    backward net's places.  Missing state maps are derived by matching,
    taking the backward net's initial markings in cover order.
    """
    if forward_psi is None:
        forward_psi = derive_psi(forward, sts, "forward")
    if backward_psi is None:
        if cover is None:
            raise PreconditionFailed("a cover is needed to match the backward net", "backward")
        backward_psi = derive_psi(backward, reverse_multi(sts, cover), "backward")
        missing = [s for s in sts.states if s not in backward_psi]
        if missing:
            raise PreconditionFailed(f"cover leaves states without a marking: {missing[:5]}", "backward")
    if check_inputs:
        m = verify_against(forward, sts, forward_psi, initial=forward_psi[sts.initial])
        if not m.ok:
            raise PreconditionFailed("the forward net does not solve the system", "forward", m.witness)
        cover = list(sts.states if cover is None else cover)
        reversed_sts = reverse_multi(sts, cover)
        for r in cover:
            comp = reversed_sts.component(r)
            m = verify_against(backward, comp, backward_psi, initial=backward_psi[r])
            if not m.ok:
                raise PreconditionFailed(
                    f"the backward net does not solve the reversed component at {r}", "backward", m.witness
                )
    taken = set(forward.places)
    rename = {p: _fresh(p, taken) for p in backward.places}
    t_forward = sts.forward_actions()
    pre, post = {}, {}

    def add(d, key, w):
        if w:
            d[key] = d.get(key, 0) + w

    for a in t_forward:
        ra = a.reverse()
        for p, w in forward.pre(a).items():
            add(pre, (p, a), w)
            add(post, (ra, p), w)
        for p, w in forward.post(a).items():
            add(post, (a, p), w)
            add(pre, (p, ra), w)
        for p, w in backward.post(ra).items():
            add(pre, (rename[p], a), w)
            add(post, (ra, rename[p]), w)
        for p, w in backward.pre(ra).items():
            add(post, (a, rename[p]), w)
            add(pre, (rename[p], ra), w)

    def union(m1, m2):
        shared = set(m1.support) & {rename[p] for p in m2.support}
        if shared:
            raise OverlappingSupports(f"markings overlap on {sorted(shared)}")
        return Multiset(m1) + Multiset({rename[p]: v for p, v in m2.items()})

    psi = {s: union(forward_psi[s], backward_psi[s]) for s in sts.states}
    actions = list(t_forward) + [a.reverse() for a in t_forward]
    out = PTNet(list(forward.places) + list(rename.values()), actions, pre, post, psi[sts.initial])
    structure = check_reverse_structure(out)
    report = TransformReport(
        out,
        "mixed reverse",
        structure.has_strict_reverses or not t_forward,
        psi,
        added_actions=len(t_forward),
        added_places=len(backward.places),
        details={"strictReverses": structure.has_strict_reverses},
    )
    if not report.ok:
        report.witness = Witness("not-strict", {"perAction": structure.to_json()["perAction"]})
        return report
    if verify:
        match = verify_against(out, reverse(sts, "mixed"), psi)
        report.ok, report.witness = match.ok, match.witness
    return report


# -- arc normalisation and the copy-place lift ------------------------------------------


def _reverse_pairs(net: PTNet) -> list[tuple[ActionName, ActionName]]:
    forward = [a for a in net.actions if a.is_forward]
    pairs = [(a, a.reverse()) for a in forward if a.reverse() in net.actions]
    if not forward or len(pairs) != len(forward):
        raise NotAReverseNet("every forward action needs a plain reverse action")
    for a, ra in pairs:
        if net.eff(ra) != -net.eff(a):
            raise NotAReverseNet(f"{ra} does not cancel the effect of {a}")
    return pairs


def normalize_reverse_arcs(net: PTNet) -> PTNet:
    """Raise reverse-action arcs so that PRE(~a) >= POST(a) and POST(~a) >= PRE(a)."""
    pairs = _reverse_pairs(net)
    pre, post, read = _maps(net)
    for a, ra in pairs:
        for p in net.places:
            if net.flow(p, ra) < net.flow(a, p):
                pre[(p, ra)] = net.flow(a, p)
                post[(ra, p)] = net.flow(p, a)
    return net._rebuild(pre=pre, post=post, read=read)


def check_lift_preconditions(net: PTNet, sts: StepTransitionSystem) -> dict[str, Multiset]:
    """Check the three inclusion/isomorphism clauses and return the state map."""
    limits = (len(sts.states) + 1, max(sts.max_step_size(), 1) + 1)
    try:
        crg = build_crg(net, *limits).sts
        crg_forward = build_crg(subnet(net, sts.actions), *limits)
    except LimitExceeded as exc:
        raise PreconditionFailed(f"net exploration exceeds the system: {exc}", "limits") from exc
    try:
        spike_rev = reverse(restrict(sts, "spike"), "direct")
        mixed = reverse(sts, "mixed")
    except NotCest as exc:
        raise PreconditionFailed(str(exc), "cest") from exc
    m1 = check_inclusion(spike_rev, crg)
    if not m1.ok:
        raise PreconditionFailed("spike reverse is not included in the net's behaviour", "spike-reverse", m1.witness)
    m2 = check_inclusion(crg, mixed)
    if not m2.ok:
        raise PreconditionFailed("the net's behaviour exceeds the mixed reverse", "mixed-reverse", m2.witness)
    m3 = check_isomorphism(sts, crg_forward.sts)
    if not m3.ok:
        raise PreconditionFailed("the forward subnet does not solve the system", "forward-subnet", m3.witness)
    return {s: crg_forward.marking_of[m] for s, m in m3.psi.items()}


def lift_to_mixed(net: PTNet, sts: StepTransitionSystem, *, verify: bool = True) -> TransformReport:
    """Split reverse-action arcs onto copy places so the net solves the mixed reverse."""
    psi = check_lift_preconditions(net, sts)
    norm = normalize_reverse_arcs(net)
    pairs = _reverse_pairs(norm)
    pre, post, read = _maps(norm)
    taken = set(norm.places)
    copies: dict[str, list[str]] = {p: [] for p in norm.places}
    all_actions = list(norm.actions)
    for p in norm.places:
        for a, ra in pairs:
            if norm.flow(p, ra) <= norm.flow(a, p):
                continue
            q = _fresh(f"{p}_{a}", taken)
            copies[p].append(q)
            pre[(p, ra)] = norm.flow(a, p)
            post[(ra, p)] = norm.flow(p, a)
            pre[(q, ra)] = norm.flow(p, ra)
            post[(ra, q)] = norm.flow(ra, p)
            for u in all_actions:
                if u == ra:
                    continue
                e = norm.eff(u)[p]
                if e > 0:
                    post[(u, q)] = e
                elif e < 0:
                    pre[(q, u)] = -e

    def phi(m: Multiset) -> Multiset:
        d = dict(m.items())
        for p, qs in copies.items():
            for q in qs:
                if m[p]:
                    d[q] = m[p]
        return Multiset(d)

    added = [q for qs in copies.values() for q in qs]
    places = list(norm.places) + added
    out = PTNet(places, norm.actions, pre, post, [phi(m) for m in norm.initial_markings])
    new_psi = {s: phi(m) for s, m in psi.items()}
    report = TransformReport(
        out,
        "mixed reverse",
        True,
        new_psi,
        added_places=len(added),
        details={"copies": {p: qs for p, qs in sorted(copies.items()) if qs}},
    )
    if verify:
        match = verify_against(out, reverse(sts, "mixed"), new_psi)
        report.ok, report.witness = match.ok, match.witness
    return report


# -- direction mutexes ---------------------------------------------------------------------


def add_direction_mutexes(
    net: PTNet,
    psi: Mapping[str, Multiset] | None,
    sts: StepTransitionSystem,
    *,
    verify: bool = True,
    check_input: bool = True,
) -> TransformReport:
    """One-token places that keep forward actions and reverses out of one step."""
    if not sts.is_set_system():
        raise NotASetSystem("direction mutexes only realise the direct reverse of set systems")
    if psi is None:
        psi = derive_psi(net, reverse(sts, "mixed"))
    if check_input:
        m = verify_against(net, reverse(sts, "mixed"), psi)
        if not m.ok:
            raise PreconditionFailed("the net does not solve the mixed reverse", "input", m.witness)
    pre, post, read = _maps(net)
    taken = set(net.places)
    added = []
    for a in sts.forward_actions():
        for b in sts.forward_actions():
            rb = b.reverse()
            p = _fresh(f"mx({a},{rb})", taken)
            added.append(p)
            pre[(p, a)] = post[(a, p)] = 1
            pre[(p, rb)] = post[(rb, p)] = 1
    extra = Multiset({p: 1 for p in added})
    out = PTNet(list(net.places) + added, net.actions, pre, post, [m + extra for m in net.initial_markings])
    new_psi = {s: Multiset(m) + extra for s, m in psi.items()}
    report = TransformReport(out, "direct reverse", True, new_psi, added_places=len(added))
    if verify:
        match = verify_against(out, reverse(sts, "direct"), new_psi)
        report.ok, report.witness = match.ok, match.witness
    return report


# -- split reverses pinned by read arcs ---------------------------------------------------


def reverse_tag(alpha: Multiset, m: Multiset, i: int) -> str:
    return f"{alpha.literal()}@{m.literal()}#{i}"


def split_reverse_with_read_arcs(
    net: PTNet,
    max_states: int = DEFAULT_MAX_STATES,
    max_step_size: int = DEFAULT_MAX_STEP,
    *,
    verify: bool = True,
    seq_policy: str = "after-noidx",
) -> TransformReport:
    """Add indexed reverses for every maximal incoming step of every reachable
    marking, pinned to that marking by read arcs, plus mutex gadgets."""
    if len(net.initial_markings) != 1:
        raise PreconditionFailed("the construction needs exactly one initial marking", "initial")
    if net.has_read_arcs:
        raise PreconditionFailed("the input must be a plain PT-net", "read-arcs")
    crg = build_crg(net, max_states, max_step_size)
    sts = crg.sts
    n = max(sts.max_step_size(), 1)
    income: dict[str, set[Multiset]] = {s: set() for s in sts.states}
    for t in sts.nonempty_transitions():
        income[t.target].add(t.step)

    pre, post, read = _maps(net)
    taken = set(net.places)
    new_actions: list[ActionName] = []
    groups: dict[str, list[tuple[Multiset, list[ActionName]]]] = {}
    for s in sts.states:
        m = crg.marking_of[s]
        for alpha in sorted(maximal_elements(income[s]), key=lambda x: x.literal()):
            group = []
            for a, count in alpha.items_sorted():
                for i in range(1, count + 1):
                    x = a.reverse().indexed(reverse_tag(alpha, m, i))
                    group.append(x)
                    for p, w in net.post(a).items():
                        pre[(p, x)] = w
                    for p, w in net.pre(a).items():
                        post[(x, p)] = w
                    for p in net.places:
                        read[(p, x)] = m[p]
            groups.setdefault(s, []).append((alpha, group))
            new_actions.extend(group)

    gadgets: dict[str, list[str]] = {}
    initial_extra: dict[str, int] = {}
    forward = list(net.actions)
    for x in new_actions:
        for b in forward:
            p = _fresh(f"mx({x},{b})", taken)
            gadgets[p] = [str(x), str(b)]
            initial_extra[p] = n
            pre[(p, x)] = post[(x, p)] = n
            pre[(p, b)] = post[(b, p)] = 1
    for s, entries in groups.items():
        for i, (alpha, xs) in enumerate(entries):
            for beta, ys in entries[i + 1:]:
                for x in xs:
                    for y in ys:
                        p = _fresh(f"mx({x},{y})", taken)
                        gadgets[p] = [str(x), str(y)]
                        initial_extra[p] = 1
                        pre[(p, x)] = post[(x, p)] = 1
                        pre[(p, y)] = post[(y, p)] = 1

    extra = Multiset(initial_extra)
    places = list(net.places) + list(gadgets)
    out = PTRNet(places, forward + new_actions, pre, post, [net.initial_marking + extra], read)
    psi = {s: crg.marking_of[s] + extra for s in sts.states}
    report = TransformReport(
        out,
        "split reverse",
        True,
        psi,
        added_actions=len(new_actions),
        added_places=len(gadgets),
        details={"stepBound": n},
    )
    if verify:
        verdict = check_split_reverse_net(out, net, seq_policy, original_crg=crg)
        report.ok, report.witness = verdict.ok, verdict.witness
        report.details["splitReverse"] = verdict.to_json()
    return report


def check_split_reverse_net(
    candidate: PTNet,
    original: PTNet,
    seq_policy: str = "after-noidx",
    *,
    max_states: int = DEFAULT_MAX_STATES,
    max_step_size: int = DEFAULT_MAX_STEP,
    original_crg: CrgResult | None = None,
) -> SplitReverseVerdict:
    """Check a net with read arcs against the split reverse of ``original``'s
    reachability graph.

    Candidate markings are projected onto the original places; any extra
    places must stay in step with them so the projection is injective.
    """
    crg = original_crg or build_crg(original, max_states, max_step_size)
    sts = crg.sts
    n = max(sts.max_step_size(), 1)
    missing = sorted(set(original.places) - set(candidate.places))
    if missing:
        return _split_failure(seq_policy, Witness("missing-places", {"places": missing}))
    try:
        # a split reverse has exactly the original states and step sizes
        out_crg = build_crg(candidate, len(sts.states), n)
    except LimitExceeded as exc:
        return _split_failure(seq_policy, Witness("limit-exceeded", {"message": str(exc)}))
    state_map = {name: marking_literal(m.restrict(original.places)) for name, m in out_crg.marking_of.items()}
    if len(set(state_map.values())) != len(state_map):
        return _split_failure(seq_policy, Witness("projection-not-injective", {}))
    return verify_split_reverse(SplitReverseCandidate(out_crg.sts, seq_policy), sts, state_map)


def _split_failure(policy: str, witness: Witness) -> SplitReverseVerdict:
    return SplitReverseVerdict(False, policy, witness, None, None, seq_evaluated=False)
