import pytest

import nets
from oracles import brute_isomorphic
from steprev.algebra import Multiset, marking, noidx, step
from steprev.constructions import (
    add_direction_mutexes,
    check_lift_preconditions,
    check_split_reverse_net,
    combine_reversal,
    lift_to_mixed,
    mix2set_transform,
    normalize_reverse_arcs,
    split_reverse_with_read_arcs,
    verify_against,
)
from steprev.errors import NotAReverseNet, NotASetSystem, PreconditionFailed
from steprev.petri import PTNet, build_crg, check_reverse_structure, subnet
from steprev.reversal import noidx_system, reverse, reverse_multi
from steprev.sts import StepTransitionSystem as STS, check_isomorphism
from steprev.synthesis import decide_mixed_reversibility, synthesize


def mixes_directions(alpha):
    kinds = {a.is_forward for a in alpha}
    return len(kinds) > 1


def forward_system(net):
    return build_crg(subnet(net, [a for a in net.actions if a.is_forward])).sts


# -- lifting to the mixed reverse -----------------------------------------------------


@pytest.mark.parametrize("m,n", [(1, 1), (2, 3)])
def test_lift_solves_the_mixed_reverse(m, n):
    net = nets.guarded_pair_net(m, n)
    sigma = forward_system(net)
    check_lift_preconditions(net, sigma)
    report = lift_to_mixed(net, sigma)
    assert report.ok, report.witness
    assert report.details["copies"] == {"p7": ["p7_a", "p7_b"]}
    assert brute_isomorphic(reverse(sigma, "mixed"), build_crg(report.net).sts)
    assert not check_isomorphism(reverse(sigma, "mixed"), build_crg(net).sts).ok


def test_lift_keeps_copy_places_in_lockstep():
    net = nets.guarded_pair_net(2, 3)
    report = lift_to_mixed(net, forward_system(net))
    crg = build_crg(report.net)
    for m in crg.marking_of.values():
        for p, copies in report.details["copies"].items():
            assert len({m[p]} | {m[q] for q in copies}) == 1


def test_lift_reports_the_failing_clause():
    diamond = nets.diamond_system()
    serialised = PTNet.from_arcs(
        ["pa", "qa", "pb", "qb", "m"],
        ["a", "~a", "b", "~b"],
        [
            ("pa", "a", 1), ("a", "qa", 1), ("qa", "~a", 1), ("~a", "pa", 1),
            ("pb", "b", 1), ("b", "qb", 1), ("qb", "~b", 1), ("~b", "pb", 1),
            ("m", "a", 1), ("a", "m", 1), ("m", "b", 1), ("b", "m", 1),
        ],
        {"pa": 1, "pb": 1, "m": 1},
    )
    with pytest.raises(PreconditionFailed) as err:
        check_lift_preconditions(serialised, diamond)
    assert err.value.clause == "forward-subnet"
    with pytest.raises(PreconditionFailed) as err:
        lift_to_mixed(nets.guarded_pair_net(2, 3), forward_system(nets.guarded_pair_net(1, 1)))
    assert err.value.clause in {"limits", "spike-reverse", "mixed-reverse", "forward-subnet"}


# -- normalising reverse arcs ---------------------------------------------------------------


def test_normalize_is_idempotent_and_keeps_effects():
    net = nets.guarded_pair_net(1, 1)
    once = normalize_reverse_arcs(net)
    assert normalize_reverse_arcs(once) == once
    for a in net.actions:
        assert once.eff(a) == net.eff(a)
    assert once.flow("p7", "~a") == 1 and once.flow("~a", "p7") == 1


def test_normalize_raises_low_reverse_arcs():
    net = PTNet(
        ["p", "q", "r"],
        ["a", "~a"],
        {("q", "a"): 1, ("p", "a"): 2, ("r", "~a"): 1},
        {("a", "r"): 1, ("a", "p"): 2, ("~a", "q"): 1},
        {"p": 2, "q": 1},
    )
    out = normalize_reverse_arcs(net)
    assert out.flow("p", "~a") == 2 and out.flow("~a", "p") == 2
    assert out.pre("~a") >= out.post("a") and out.post("~a") >= out.pre("a")
    with pytest.raises(NotAReverseNet):
        normalize_reverse_arcs(nets.spike_net())


# -- mixed to set ----------------------------------------------------------------------------


def test_mix2set_on_the_lifted_pair():
    net = nets.guarded_pair_net(1, 1)
    sigma = forward_system(net)
    lifted = lift_to_mixed(net, sigma)
    report = mix2set_transform(lifted.net, lifted.psi, sigma)
    assert report.ok, report.witness
    labels = [t.step for t in build_crg(report.net).sts.nonempty_transitions()]
    assert not any(mixes_directions(alpha) for alpha in labels)
    assert report.net.flow("mx(a,~b)", "a") == 1
    slack = mix2set_transform(lifted.net, lifted.psi, sigma, k=report.details["k"] + 1)
    assert slack.ok
    # the state map can also be recovered by matching
    assert mix2set_transform(lifted.net, None, sigma).ok


def test_mix2set_rejects_a_net_that_is_not_mixed():
    net = nets.guarded_pair_net(1, 1)
    with pytest.raises(PreconditionFailed):
        mix2set_transform(net, None, forward_system(net))


# -- combining forward and backward nets --------------------------------------------------------


def test_combine_single_edge_pieces():
    sigma = nets.single_edge_system()
    forward = nets.single_edge_net()
    forward_psi = {"q0": marking("p1", "p2"), "q1": marking(p2=2)}
    back = synthesize(reverse_multi(sigma, ["q1"]), place_prefix="q")
    assert back.solved
    report = combine_reversal(forward, forward_psi, back.net, back.psi, sigma, ["q1"])
    assert report.ok
    # synthesis needs only one place for the single reverse edge
    assert len(report.net.places) == len(forward.places) + len(back.net.places) == 3
    two_place = PTNet.from_arcs(["r1", "r2"], ["~a"], [("r1", "~a", 1), ("~a", "r2", 1)], {"r1": 1})
    two_psi = {"q1": marking("r1"), "q0": marking("r2")}
    wider = combine_reversal(forward, forward_psi, two_place, two_psi, sigma, ["q1"])
    assert wider.ok and len(wider.net.places) == 4
    for out in (report, wider):
        assert check_reverse_structure(out.net).has_strict_reverses
        assert brute_isomorphic(reverse(sigma, "mixed"), build_crg(out.net).sts)
        assert check_isomorphism(sigma, build_crg(subnet(out.net, ["a"])).sts).ok


def test_naive_reversal_does_not_solve_the_reversed_system():
    sigma = nets.single_edge_system()
    target = reverse_multi(sigma, ["q1"]).component("q1")
    naive = nets.naive_reversed_single_edge_net()
    assert not verify_against(naive, target).ok
    with pytest.raises(PreconditionFailed):
        combine_reversal(nets.single_edge_net(), None, naive, None, sigma, ["q1"])


def test_combine_with_a_reversal_that_happens_to_work():
    sigma = nets.single_edge_system()
    forward = PTNet.from_arcs(["p1", "p2"], ["a"], [("p1", "a", 1), ("a", "p2", 1)], {"p1": 1})
    backward = PTNet.from_arcs(["p1", "p2"], ["~a"], [("p2", "~a", 1), ("~a", "p1", 1)], {"p2": 1})
    report = combine_reversal(forward, None, backward, None, sigma, ["q1"])
    assert report.ok
    assert sorted(report.net.places) == ["p1", "p1'", "p2", "p2'"]


# -- direction mutexes -----------------------------------------------------------------------


def test_mutexes_turn_a_mixed_solution_into_a_direct_one():
    diamond = nets.diamond_system()
    mixed = decide_mixed_reversibility(diamond, ["s3"])
    assert mixed.solved
    report = add_direction_mutexes(mixed.net, mixed.psi, diamond)
    assert report.ok
    assert report.added_places == 4
    crg = build_crg(report.net).sts
    assert not any(mixes_directions(t.step) for t in crg.transitions)
    assert brute_isomorphic(reverse(diamond, "direct"), crg)
    twice = add_direction_mutexes(report.net, report.psi, diamond, check_input=False)
    assert twice.ok
    assert check_isomorphism(crg, build_crg(twice.net).sts).ok


def test_mutexes_need_a_set_system():
    with pytest.raises(NotASetSystem):
        add_direction_mutexes(nets.spike_net(), None, nets.spike_system())


# -- split reverses with read arcs -------------------------------------------------------------


def test_split_reverse_of_the_interleaving_net():
    net = nets.split_net()
    report = split_reverse_with_read_arcs(net)
    assert report.ok, report.witness
    assert report.added_actions == 7 and report.added_places == 15
    verdict = report.details["splitReverse"]
    assert verdict["noidxSeq"] == "pass"
    assert verdict["strictSeq"] != "pass"
    crg = build_crg(report.net)
    m4 = report.psi[marking(p1=1, p2=5, p3=1, p4=1).literal()]
    joint = [t for t in crg.sts.out(m4.literal()) if t.step.size == 2 and all(a.is_reverse for a in t.step)]
    assert len(joint) == 1
    assert {str(a) for a in joint[0].step} == {"~a[(a b)@(p1 p2^5 p3 p4)#1]", "~b[(a b)@(p1 p2^5 p3 p4)#1]"}
    assert crg.marking_of[joint[0].target].restrict(net.places) == net.initial_marking


def test_split_reverse_properties():
    for net in (nets.split_net(), nets.spike_net()):
        report = split_reverse_with_read_arcs(net)
        assert report.ok
        forward = [a for a in report.net.actions if a.is_forward]
        assert check_isomorphism(build_crg(net).sts, build_crg(subnet(report.net, forward)).sts).ok
        crg = build_crg(report.net)
        groups = {}
        for a in report.net.actions:
            if a.is_reverse:
                tag = a.index.rsplit("#", 1)[0]
                groups[a] = tag
        for t in crg.sts.nonempty_transitions():
            assert not mixes_directions(t.step)
            tags = {groups[a] for a in t.step if a.is_reverse}
            assert len(tags) <= 1
            assert t.step.is_set() or all(a.is_forward for a in t.step)


def test_split_reverse_of_the_spike():
    net = nets.spike_net()
    report = split_reverse_with_read_arcs(net)
    assert report.ok
    names = {str(a) for a in report.net.actions}
    assert {"~a[(a^2)@(p2^2 p3^2)#1]", "~a[(a^2)@(p2^2 p3^2)#2]"} <= names
    crg = build_crg(report.net)
    projected = {s: m.restrict(net.places).literal() for s, m in crg.marking_of.items()}
    image = noidx_system(crg.sts.rename_states(projected))
    assert any(
        t.source == "(p2^2 p3^2)" and t.step == step(**{"~a": 2}) and t.target == "(p1^2 p3^2)"
        for t in image.transitions
    )


def test_split_reverse_net_checker():
    net = nets.split_net()
    report = split_reverse_with_read_arcs(net, verify=False)
    assert check_split_reverse_net(report.net, net).ok
    strict = check_split_reverse_net(report.net, net, "strict")
    assert not strict.ok and strict.witness.kind == "not-sequentialisable"
    plain = check_split_reverse_net(net, net)
    assert not plain.ok and plain.witness.kind == "missing-reverse"


def test_indexed_direct_reverse_is_not_solvable_without_read_arcs():
    split = nets.split_system()
    rev = reverse(split, "direct")

    def indexed(alpha):
        return Multiset({a.indexed("1") if a.is_reverse else a: c for a, c in alpha.items()})

    actions = {a.indexed("1") if a.is_reverse else a for a in rev.actions}
    cand = STS(rev.states, actions, [(t.source, indexed(t.step), t.target) for t in rev.transitions], rev.initials)
    assert noidx(Multiset({a: 1 for a in actions})) == Multiset({a: 1 for a in rev.actions})
    out = synthesize(cand)
    assert not out.solved
    assert out.certificate.holds()
