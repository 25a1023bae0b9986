import random

import numpy as np

from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exact_member_full_rank
from steprev.lattice import hermite_normal_form, is_hnf, is_member, reduce_vector

rows = st.lists(st.lists(st.integers(-4, 4), min_size=4, max_size=4), min_size=0, max_size=3)


def test_hnf_of_small_examples():
    assert hermite_normal_form([[2, 0], [0, 3], [2, 3]]) == [[2, 0], [0, 3]]
    assert hermite_normal_form([[4, 6]]) == [[4, 6]]
    assert hermite_normal_form([[4, 6], [2, 3]]) == [[2, 3]]
    assert hermite_normal_form([], 3) == []


def test_membership_by_pivot_reduction():
    basis = hermite_normal_form([[2, 0, 1], [0, 3, 0]])
    assert is_member(basis, [2, 3, 1])
    assert not is_member(basis, [1, 0, 0])
    assert is_member(basis, [0, 0, 0])


@given(rows)
def test_hnf_shape(gens):
    basis = hermite_normal_form(gens, 4)
    assert is_hnf(basis)
    for g in gens:
        assert is_member(basis, g)
    independent = [g for g in gens if any(g)]
    if independent and np.linalg.matrix_rank(np.array(independent)) == len(independent):
        # the basis generates nothing outside the generators' lattice
        for b in basis:
            assert exact_member_full_rank(independent, b)


@settings(max_examples=60)
@given(rows, st.lists(st.integers(-3, 3), min_size=3, max_size=3), st.randoms(use_true_random=False))
def test_generator_permutation_gives_same_lattice(gens, coeffs, rnd):
    shuffled = list(gens)
    rnd.shuffle(shuffled)
    assert hermite_normal_form(gens, 4) == hermite_normal_form(shuffled, 4)
    v = [sum(c * g[j] for c, g in zip(coeffs, gens)) for j in range(4)]
    assert is_member(hermite_normal_form(shuffled, 4), v)


def test_residues_are_canonical():
    rng = random.Random(5)
    for _ in range(100):
        gens = [[rng.randint(-3, 3) for _ in range(4)] for _ in range(3)]
        basis = hermite_normal_form(gens, 4)
        v = [rng.randint(-6, 6) for _ in range(4)]
        coeffs = [rng.randint(-2, 2) for _ in gens]
        shift = [sum(c * g[j] for c, g in zip(coeffs, gens)) for j in range(4)]
        w = [x + y for x, y in zip(v, shift)]
        assert reduce_vector(basis, v) == reduce_vector(basis, w)


def test_full_rank_membership_matches_exact_oracle():
    rng = random.Random(11)
    checked = 0
    while checked < 150:
        gens = [[rng.randint(-3, 3) for _ in range(4)] for _ in range(3)]
        if len(hermite_normal_form(gens, 4)) < 3:
            continue
        basis = hermite_normal_form(gens, 4)
        for _ in range(5):
            v = [rng.randint(-5, 5) for _ in range(4)]
            assert is_member(basis, v) == exact_member_full_rank(gens, v)
        checked += 1
