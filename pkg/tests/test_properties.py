import random

from hypothesis import given, settings
from hypothesis import strategies as st

import nets
from oracles import diamond_violations
from steprev.algebra import Multiset
from steprev.errors import LimitExceeded, NotEnabled
from steprev.petri import build_crg
from steprev.reversal import reverse
from steprev.sts import check_inclusion, validate_cest

seeds = st.integers(0, 10**6)


def bounded_crg(seed, cap=500):
    net = nets.random_net(random.Random(seed))
    try:
        return net, build_crg(net, max_states=cap)
    except LimitExceeded:
        return net, None


@settings(max_examples=80, deadline=None)
@given(seeds, st.lists(st.integers(0, 3), min_size=3, max_size=3), st.lists(st.integers(0, 4), min_size=4, max_size=4))
def test_firing_follows_the_marking_equation(seed, counts, tokens):
    net = nets.random_net(random.Random(seed))
    m = Multiset({p: c for p, c in zip(net.places, tokens) if c})
    alpha = Multiset({a: c for a, c in zip(net.actions, counts) if c})
    pre, post, eff = net.step_vectors(alpha)
    if net.enabled(m, alpha):
        after = net.fire(m, alpha)
        assert all(after[p] >= 0 for p in net.places)
        assert all(after[p] == m[p] + eff.get(p, 0) for p in net.places)
        assert pre <= m
    else:
        assert not pre <= m
        try:
            net.fire(m, alpha)
        except NotEnabled:
            pass
        else:
            raise AssertionError("fired a disabled step")


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_reachability_graphs_have_the_diamond_property(seed):
    _, crg = bounded_crg(seed)
    if crg is not None:
        assert diamond_violations(crg.sts) == []


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_reachability_graphs_are_cest_and_reverses_nest(seed):
    _, crg = bounded_crg(seed)
    if crg is None:
        return
    sigma = crg.sts
    assert validate_cest(sigma).ok
    chain = [sigma] + [reverse(sigma, mode) for mode in ("set", "direct", "mixed")]
    for smaller, larger in zip(chain, chain[1:]):
        assert check_inclusion(smaller, larger).ok
    for mode in ("set", "direct", "mixed"):
        assert validate_cest(reverse(sigma, mode)).ok


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_reachable_markings_are_distinct_and_nonnegative(seed):
    net, crg = bounded_crg(seed)
    if crg is None:
        return
    seen = set()
    for s, m in crg.marking_of.items():
        assert m.literal() == s and all(v >= 0 for v in m.values())
        seen.add(m)
    assert len(seen) == len(crg.sts.states)
    assert crg.sts.initials == (net.initial_marking.literal(),)
