import itertools
import math
from fractions import Fraction

import pytest

from flagcalc.errors import InputError
from flagcalc.flags import (Flag, TypeSigma, density_p, empirical_density, flag_basis, joint_density_p2, MonteCarlo,
                            q_normalizer)
from flagcalc.library import DIGRAPHS, EDGE, GRAPHS, K3, NON_EDGE, TRIANGLE_FREE, complete, cycle, graph, path
from flagcalc.models import induced_submodel

VERTEX = TypeSigma(graph(1))
EDGE_T = TypeSigma(EDGE)
EMPTY = TypeSigma.empty(GRAPHS)


def same_rooted(a, b, k):
    """Isomorphism fixing 1..k, by trying every permutation of the free vertices."""
    if a.n != b.n:
        return False
    free = range(k + 1, a.n + 1)
    return any(a.relabel(list(range(1, k + 1)) + list(p)) == b for p in itertools.permutations(free))


def brute_density(small, big):
    k = small.root_size
    hits = total = 0
    for s in itertools.combinations(range(k + 1, big.size + 1), small.size - k):
        total += 1
        hits += same_rooted(induced_submodel(big.model, tuple(range(1, k + 1)) + s), small.model, k)
    return Fraction(hits, total)


@pytest.mark.parametrize("sigma,counts", [(EMPTY, [1, 1, 2, 4, 11]), (VERTEX, [None, 1, 2, 6, 20, 90]),
                                          (EDGE_T, [None, None, 1, 4, 20, 120])])
def test_basis_sizes(sigma, counts):
    for level, c in enumerate(counts):
        if c is not None:
            assert len(flag_basis(GRAPHS, sigma, level)) == c


def test_digraph_and_triangle_free_bases():
    assert len(flag_basis(DIGRAPHS, TypeSigma.empty(DIGRAPHS), 3)) == 16
    assert len(flag_basis(TRIANGLE_FREE, TypeSigma.empty(TRIANGLE_FREE), 4)) == 7
    with pytest.raises(InputError):
        flag_basis(TRIANGLE_FREE, TypeSigma(K3), 4)


def test_basis_rejects_level_below_type():
    with pytest.raises(InputError):
        flag_basis(GRAPHS, EDGE_T, 1)


def test_named_densities():
    assert density_p(Flag(EDGE, 0), Flag(path(3), 0)) == Fraction(2, 3)
    assert density_p(Flag(EDGE, 0), Flag(K3, 0)) == 1
    assert density_p(Flag(NON_EDGE, 0), Flag(cycle(4), 0)) == Fraction(1, 3)
    assert density_p(Flag(K3, 0), Flag(complete(4), 0)) == 1


@pytest.mark.parametrize("sigma,m,big", [(EMPTY, 2, 4), (EMPTY, 3, 5), (VERTEX, 2, 4), (VERTEX, 3, 4),
                                         (EDGE_T, 3, 4)])
def test_density_matches_brute_force_and_sums_to_one(sigma, m, big):
    smalls = flag_basis(GRAPHS, sigma, m)
    for F in flag_basis(GRAPHS, sigma, big):
        vals = [density_p(f, F) for f in smalls]
        assert sum(vals) == 1
        for f, v in zip(smalls, vals):
            if F.size <= 4:
                assert v == brute_density(f, F)


def test_joint_density_examples():
    e = Flag(EDGE, 0)
    assert joint_density_p2(e, e, Flag(cycle(4), 0)) == Fraction(2, 3)
    assert joint_density_p2(e, e, Flag(complete(4), 0)) == 1
    assert joint_density_p2(e, Flag(NON_EDGE, 0), Flag(path(4), 0)) == Fraction(1, 6)


@pytest.mark.parametrize("sigma,m1,m2,big", [(EMPTY, 2, 2, 4), (VERTEX, 2, 3, 4), (EDGE_T, 3, 3, 4)])
def test_joint_marginals(sigma, m1, m2, big):
    b1, b2 = flag_basis(GRAPHS, sigma, m1), flag_basis(GRAPHS, sigma, m2)
    for F in flag_basis(GRAPHS, sigma, big):
        for f1 in b1:
            assert sum(joint_density_p2(f1, f2, F) for f2 in b2) == density_p(f1, F)


def test_joint_density_requires_room():
    with pytest.raises(InputError):
        joint_density_p2(Flag(K3, 0), Flag(K3, 0), Flag(complete(5), 0))


def test_q_normalizer():
    cherry_center = Flag(path(3).relabel([2, 1, 3]), 1)
    assert q_normalizer(cherry_center, 0) == Fraction(1, 3)
    assert q_normalizer(Flag(K3, 1), 0) == 1
    assert q_normalizer(Flag(EDGE, 2), 0) == 1
    assert q_normalizer(Flag(EDGE, 1), 0) == 1
    # number of injective root placements realizing the type, over falling factorial
    leaf = Flag(path(3), 1)
    assert q_normalizer(leaf, 0) == Fraction(2, 3)


def test_q_normalizer_brute_force():
    for F in flag_basis(GRAPHS, EDGE_T, 4):
        n, k = F.size, 2
        hits = sum(1 for theta in itertools.permutations(range(1, n + 1), k)
                   if same_rooted(F.model.relabel(list(theta) + [v for v in range(1, n + 1) if v not in theta]),
                                  F.model, k))
        assert q_normalizer(F, 0) == Fraction(hits, math.perm(n, k))


def test_flag_validation():
    with pytest.raises(InputError):
        Flag(EDGE, 3)
    assert Flag(path(3), 1).reroot(0).isomorphic(Flag(path(3), 0))
    assert Flag(path(3), 1).isomorphic(Flag(path(3).relabel([1, 3, 2]), 1))
    assert not Flag(path(3), 1).isomorphic(Flag(path(3).relabel([2, 1, 3]), 1))


def test_empirical_density_modes():
    host = cycle(6)
    f = Flag(EDGE, 0)
    assert empirical_density(f, host) == Fraction(6, 15)
    est = empirical_density(f, host, MonteCarlo(2000, seed=1))
    assert est.within(Fraction(6, 15))
    again = empirical_density(f, host, MonteCarlo(2000, seed=1))
    assert again.value == est.value
