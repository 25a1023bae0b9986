import pytest

import nets
from oracles import undirected_signature_paths
from steprev.algebra import EMPTY, step
from steprev.errors import CapExceeded, DisconnectedSystem, ForwardDeterminismViolated, UnknownState
from steprev.reversal import reverse
from steprev.sts import (
    StepTransitionSystem as STS,
    ce_witness_holds,
    check_inclusion,
    check_isomorphism,
    check_seq,
    cycle_lattice,
    displacement,
    home_states,
    is_home_cover,
    restrict,
    successor,
    validate_cest,
)


def diamond_clash():
    return STS(
        ["s0", "s1", "s2", "s3"],
        ["a", "b"],
        [("s0", "a", "s1"), ("s0", "b", "s1"), ("s1", "a", "s2"), ("s1", "b", "s3")],
        "s0",
        empty_loops=True,
    )


def test_spike_system_is_cest():
    report = validate_cest(nets.spike_system())
    assert report.ok
    assert report.to_json()["axioms"] == {k: "pass" for k in ["EL", "REA", "FD", "SEQ", "CE"]}
    assert report.max_step_size == 2 and not report.is_set_system


def test_duplicate_step_breaks_determinism():
    sts = STS(["s0", "s1"], ["a"], [("s0", "a", "s0"), ("s0", "a", "s1")], "s0", empty_loops=True)
    witness = validate_cest(sts).failures()["FD"]
    assert witness.detail["source"] == "s0"
    assert witness.detail["step"] == step("a")
    assert witness.detail["targets"] == ["s0", "s1"]


def test_constant_effect_failure_agrees_with_path_enumeration():
    sts = diamond_clash()
    witness = validate_cest(sts).failures()["CE"]
    assert set(witness.detail["states"]) == {"s2", "s3"}
    assert ce_witness_holds(sts, witness)
    lattice = cycle_lattice(sts)
    assert lattice.contains(step("a") - step("b"))
    # oracle: two walks with equal signatures reach distinct states
    walks = undirected_signature_paths(sts, "s0", 3)
    assert walks["s2"] & walks["s3"]


def test_missing_empty_loops_and_unreachable_states():
    sts = STS(["s0", "s1", "s2"], ["a"], [("s0", "a", "s1")], "s0")
    failures = validate_cest(sts).failures()
    assert failures["EL"].kind == "missing-empty-loop"
    loops = STS(["s0", "s1", "s2"], ["a"], [("s0", "a", "s1")], "s0", empty_loops=True)
    assert validate_cest(loops).failures()["REA"].detail == {"state": "s2"}


def test_seq_failure_and_cap():
    sts = STS(["s0", "s1"], ["a", "b"], [("s0", ["a", "b"], "s1")], "s0", empty_loops=True)
    witness = check_seq(sts)
    assert witness.kind == "not-sequentialisable"
    big = STS(["s0", "s1"], ["a"], [("s0", {"a": 3}, "s1")], "s0", empty_loops=True)
    with pytest.raises(CapExceeded):
        check_seq(big, cap=2)


def test_cycle_lattice_examples():
    line = STS(["s0", "s1", "s2"], ["a", "b"], [("s0", "a", "s1"), ("s1", "b", "s2")], "s0", empty_loops=True)
    assert cycle_lattice(line).vectors() == []
    loop = STS(["s0"], ["a"], [("s0", "a", "s0")], "s0", empty_loops=True)
    assert cycle_lattice(loop).vectors() == [step("a")]
    assert cycle_lattice(nets.spike_system()).vectors() == []


def test_displacements():
    sigma = nets.spike_system()
    assert displacement(sigma, "v4", "v0") == step(a=2, b=2)
    assert displacement(sigma, "v3", "v3") == EMPTY
    cross = nets.one_cross_system()
    assert displacement(cross, "q6", "q2") == step(b=2, c=1, a=1)
    apart = STS(["x", "y"], ["a"], [], ["x", "y"], empty_loops=True)
    with pytest.raises(DisconnectedSystem):
        displacement(apart, "y", "x")


def test_successor():
    sigma = nets.spike_system()
    assert successor(sigma, "v0", step(a=2)) == "v2"
    assert successor(sigma, "v3", EMPTY) == "v3"
    assert successor(sigma, "v4", step("a")) is None
    bad = STS(["s0", "s1"], ["a"], [("s0", "a", "s0"), ("s0", "a", "s1")], "s0")
    with pytest.raises(ForwardDeterminismViolated):
        successor(bad, "s0", step("a"))
    with pytest.raises(UnknownState):
        successor(sigma, "nowhere", EMPTY)


def test_restrictions():
    sigma = nets.spike_system()
    seq = restrict(sigma, "seq")
    assert all(t.step.size <= 1 for t in seq.transitions)
    assert len(seq.nonempty_transitions()) == 4
    assert restrict(sigma, "spike") == sigma
    split = nets.split_system()
    assert restrict(split, "set") == split


def test_home_states():
    assert home_states(nets.single_edge_system()) == {"q1"}
    split = nets.split_system()
    assert home_states(split) == set()
    assert sorted(split.pred("v6")) == ["v1", "v2", "v3", "v5", "v6"]
    assert sorted(split.pred("v4")) == ["v1", "v2", "v3", "v4"]
    assert is_home_cover(split, ["v4", "v6"])
    assert is_home_cover(split, split.states)
    assert not is_home_cover(split, ["v6"])


def test_inclusion_and_isomorphism():
    split = nets.split_system()
    mixed = reverse(split, "mixed")
    match = check_inclusion(split, mixed)
    assert match.ok and match.psi == {s: s for s in split.states}
    assert check_inclusion(split, split).psi == {s: s for s in split.states}
    single = nets.single_edge_system()
    miss = check_inclusion(reverse(single, "direct"), single)
    assert not miss.ok and miss.witness.kind == "alphabet-mismatch"
    renamed = split.rename_states({s: s.upper() for s in split.states})
    iso = check_isomorphism(split, renamed)
    assert iso.ok and iso.psi["v4"] == "V4"
    assert not check_isomorphism(split, nets.spike_system()).ok


def test_inclusion_reports_missing_image_on_same_alphabet():
    single = nets.single_edge_system()
    rev = reverse(single, "direct")
    forward_only = single.replace(actions=rev.actions)
    miss = check_inclusion(rev, forward_only)
    assert not miss.ok and miss.witness.kind == "missing-image"


def test_components_of_multi_initial_system():
    cross = nets.one_cross_system()
    assert sorted(cross.component("q2").states) == ["q2", "q3", "q4", "q5", "q6"]
    assert validate_cest(cross).ok
