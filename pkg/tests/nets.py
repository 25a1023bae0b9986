"""Hand-transcribed systems and nets used across the test suite."""

from __future__ import annotations

import random

from steprev.petri import PTNet
from steprev.sts import StepTransitionSystem as STS


def one_cross_system():
    """q1 and q2 lead into a shared tail labelled c, a, b."""
    return STS(
        ["q1", "q2", "q3", "q4", "q5", "q6"],
        ["a", "b", "c"],
        [("q1", "a", "q3"), ("q2", "b", "q3"), ("q3", "c", "q4"), ("q4", "a", "q5"), ("q5", "b", "q6")],
        ["q1", "q2"],
        empty_loops=True,
    )


def one_cross_net():
    """A net solving both components; initial markings (p1 p4) and (p2^4 p4)."""
    return PTNet.from_arcs(
        ["p1", "p2", "p3", "p4"],
        ["a", "b", "c"],
        [
            ("p1", "a", 1), ("p2", "b", 3), ("p4", "c", 1),
            ("a", "p3", 1), ("b", "p3", 1), ("p3", "c", 1),
            ("c", "p1", 1), ("c", "p2", 1), ("a", "p2", 1),
        ],
        [{"p1": 1, "p4": 1}, {"p2": 4, "p4": 1}],
    )


def single_edge_system():
    return STS(["q0", "q1"], ["a"], [("q0", "a", "q1")], "q0", empty_loops=True)


def single_edge_net():
    return PTNet.from_arcs(["p1", "p2"], ["a"], [("p1", "a", 1), ("a", "p2", 1)], {"p1": 1, "p2": 1})


def naive_reversed_single_edge_net():
    """The single-edge net with its arcs flipped, started at the image of q1."""
    return PTNet.from_arcs(["p1", "p2"], ["~a"], [("p2", "~a", 1), ("~a", "p1", 1)], {"p2": 2})


def spike_system():
    return STS(
        ["v0", "v1", "v2", "v3", "v4"],
        ["a", "b"],
        [("v0", "a", "v1"), ("v1", "a", "v2"), ("v2", "b", "v3"), ("v3", "b", "v4"), ("v0", ["a", "a"], "v2")],
        "v0",
        empty_loops=True,
    )


def spike_net():
    return PTNet.from_arcs(
        ["p1", "p2", "p3"],
        ["a", "b"],
        [("p1", "a", 1), ("a", "p2", 1), ("p2", "b", 2), ("b", "p2", 2), ("p3", "b", 1)],
        {"p1": 2, "p3": 2},
    )


def spike_free_reverse_net():
    """A net solving the direct reverse of the spike system with the spike erased."""
    return PTNet.from_arcs(
        ["p1", "p2", "p3", "p4"],
        ["a", "~a", "b", "~b"],
        [
            ("p1", "a", 2), ("a", "p1", 1), ("a", "p2", 1),
            ("p2", "~a", 1), ("~a", "p1", 2), ("p1", "~a", 1), ("~a", "p3", 2), ("p3", "~a", 2),
            ("p2", "b", 2), ("b", "p2", 2), ("p3", "b", 1), ("b", "p4", 1),
            ("~b", "p2", 2), ("p2", "~b", 2), ("p4", "~b", 1), ("~b", "p3", 1),
        ],
        {"p1": 3, "p3": 2},
    )


def split_system():
    """Six states; the step (ab) from v1 and two interleavings, plus a and b tails."""
    return STS(
        ["v1", "v2", "v3", "v4", "v5", "v6"],
        ["a", "b"],
        [
            ("v1", "a", "v2"), ("v1", "b", "v3"), ("v1", ["a", "b"], "v4"), ("v2", "b", "v4"),
            ("v3", "a", "v4"), ("v2", "a", "v5"), ("v5", "a", "v6"), ("v3", "b", "v6"),
        ],
        "v1",
        empty_loops=True,
    )


def split_net():
    return PTNet.from_arcs(
        ["p1", "p2", "p3", "p4"],
        ["a", "b"],
        [
            ("p1", "a", 2), ("p1", "b", 3), ("a", "p2", 2), ("b", "p2", 3),
            ("p3", "a", 1), ("a", "p3", 1), ("p4", "b", 1), ("b", "p4", 1),
        ],
        {"p1": 6, "p3": 1, "p4": 1},
    )


def guarded_pair_net(m: int, n: int):
    """Two independent counters with reverses sharing a k-token side place."""
    k = max(m, n)
    return PTNet.from_arcs(
        ["p1", "p2", "p3", "p6", "p7"],
        ["a", "~a", "b", "~b"],
        [
            ("p1", "a", 1), ("a", "p3", 1), ("p3", "~a", 1), ("~a", "p1", 1),
            ("p2", "b", 1), ("b", "p6", 1), ("p6", "~b", 1), ("~b", "p2", 1),
            ("p7", "~a", 1), ("~a", "p7", 1), ("p7", "~b", 1), ("~b", "p7", 1),
        ],
        {"p1": m, "p2": n, "p7": k},
    )


def diamond_system():
    """s0 fires a, b or (ab); both interleavings meet at s3."""
    return STS(
        ["s0", "s1", "s2", "s3"],
        ["a", "b"],
        [("s0", "a", "s1"), ("s0", "b", "s2"), ("s0", ["a", "b"], "s3"), ("s1", "b", "s3"), ("s2", "a", "s3")],
        "s0",
        empty_loops=True,
    )


def random_net(rng: random.Random, max_places=4, max_actions=3, max_weight=3, max_tokens=3) -> PTNet:
    """A small random net; every action gets at least one input place."""
    places = [f"p{i}" for i in range(1, rng.randint(1, max_places) + 1)]
    actions = [chr(ord("a") + i) for i in range(rng.randint(1, max_actions))]
    arcs = []
    for a in actions:
        inputs = rng.sample(places, rng.randint(1, len(places)))
        for p in places:
            if p in inputs:
                arcs.append((p, a, rng.randint(1, max_weight)))
            if rng.random() < 0.5:
                arcs.append((a, p, rng.randint(1, max_weight)))
    initial = {p: rng.randint(0, max_tokens) for p in places}
    return PTNet.from_arcs(places, actions, arcs, initial)
