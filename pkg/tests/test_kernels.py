import math
import random
from fractions import Fraction

import pytest

from flagcalc.algebra import from_flag, unit
from flagcalc.errors import ConditioningError, ConsistencyError, InputError
from flagcalc.flags import Flag, TypeSigma, flag_basis
from flagcalc.kernels import (RootedKernel, SampleSeed, StepKernel, condition_ensemble, ensemble_average, exact_hom,
                              kernel_panel, mc_hom, random_kernel, restrict_root, sample_model, validate_kernel)
from flagcalc.library import (DIGRAPHS, EDGE, GRAPHS, HYPERGRAPHS3, K3, NON_EDGE, TRIANGLE_FREE, complete, cycle,
                              digraph, graph, path, single_type_graph_kernel, two_type_graph_kernel)
from flagcalc.models import satisfies_theory

HALF = Fraction(1, 2)
VERTEX = TypeSigma(graph(1))


@pytest.mark.parametrize("p", [Fraction(0), Fraction(1, 3), HALF, Fraction(3, 4), Fraction(1)])
def test_single_type_densities(p):
    W = single_type_graph_kernel(p)
    assert exact_hom(W, Flag(EDGE, 0)) == p
    assert exact_hom(W, Flag(K3, 0)) == p ** 3
    assert exact_hom(W, Flag(path(3), 0)) == 3 * p * p * (1 - p)
    assert exact_hom(W, Flag(cycle(4), 0)) == 3 * p ** 4 * (1 - p) ** 2


def test_two_type_bipartite_kernel():
    W = two_type_graph_kernel()
    assert exact_hom(W, Flag(EDGE, 0)) == HALF
    assert exact_hom(W, Flag(K3, 0)) == 0
    assert exact_hom(W, Flag(cycle(4), 0)) == Fraction(3, 8)  # a 2-2 type split


def test_values_on_a_basis_sum_to_one():
    for W in kernel_panel(GRAPHS, 10, seed=3):
        assert sum(exact_hom(W, f) for f in flag_basis(GRAPHS, TypeSigma.empty(GRAPHS), 4)) == 1


def test_rooted_evaluation_and_ensemble():
    W = two_type_graph_kernel(alpha=(Fraction(1, 3), Fraction(2, 3)))
    ens = condition_ensemble(W, VERTEX)
    assert ens.Z == 1
    assert [w for w, _ in ens.members] == [Fraction(1, 3), Fraction(2, 3)]
    e1 = from_flag(Flag(EDGE, 1))
    assert exact_hom(ens.members[0][1], e1) == Fraction(2, 3)
    assert exact_hom(ens.members[1][1], e1) == Fraction(1, 3)
    assert ensemble_average(ens, e1) == Fraction(4, 9)
    edge_ens = condition_ensemble(W, TypeSigma(EDGE))
    assert edge_ens.Z == Fraction(4, 9)
    assert len(edge_ens.members) == 2


def test_conditioning_on_impossible_type():
    with pytest.raises(ConditioningError):
        condition_ensemble(two_type_graph_kernel(), TypeSigma(K3))
    with pytest.raises(ConditioningError):
        RootedKernel(single_type_graph_kernel(0), (0, 0), TypeSigma(EDGE))


def test_restrict_root():
    W = two_type_graph_kernel()
    R = RootedKernel(W, (0, 1), TypeSigma(EDGE))
    one = restrict_root(R, 1)
    assert one.root_types == (0,) and one.sigma.k == 1
    assert restrict_root(R, 0) is W
    assert restrict_root(R, 2) is R
    with pytest.raises(InputError):
        restrict_root(R, 3)


def test_validate_kernel_reports_problems():
    assert validate_kernel(single_type_graph_kernel(HALF)).valid
    bad_sum = StepKernel(GRAPHS, ("a",), (Fraction(1),), {2: {(0, 0): {(1,): HALF, (0,): Fraction(1, 3)}}})
    assert not validate_kernel(bad_sum).valid
    oriented = StepKernel(DIGRAPHS, ("a",), (Fraction(1),), {2: {(0, 0): {(1, 0): Fraction(1)}}})
    rep = validate_kernel(oriented)
    assert not rep.valid and any("equivar" in v for v in rep.violations)
    with pytest.raises(InputError):
        exact_hom(oriented, Flag(digraph(2, [(1, 2)]), 0))
    dense = single_type_graph_kernel(HALF, theory=TRIANGLE_FREE)
    assert not validate_kernel(dense).valid
    assert validate_kernel(two_type_graph_kernel(theory=TRIANGLE_FREE)).valid


def test_tournament_kernel_is_equivariant():
    W = StepKernel(DIGRAPHS, ("a",), (Fraction(1),), {2: {(0, 0): {(1, 0): HALF, (0, 1): HALF}}})
    assert validate_kernel(W).valid
    cyclic = Flag(digraph(3, [(1, 2), (2, 3), (3, 1)]), 0)
    transitive = Flag(digraph(3, [(1, 2), (2, 3), (1, 3)]), 0)
    assert exact_hom(W, cyclic) == Fraction(1, 4)
    assert exact_hom(W, transitive) == Fraction(3, 4)


def test_hypergraph_kernel():
    W = StepKernel(HYPERGRAPHS3, ("a",), (Fraction(1),), {3: {(0, 0, 0): {(1,): Fraction(1, 3), (0,): Fraction(2, 3)}}})
    basis = flag_basis(HYPERGRAPHS3, TypeSigma.empty(HYPERGRAPHS3), 4)
    vals = {len([c for c in f.model.colors.values() if c == (1,)]): exact_hom(W, f) for f in basis}
    assert vals == {i: Fraction(math.comb(4, i)) * Fraction(1, 3) ** i * Fraction(2, 3) ** (4 - i)
                    for i in range(5)}


def test_sampling_is_deterministic_and_respects_roots():
    W = two_type_graph_kernel()
    a = sample_model(W, 12, SampleSeed(5, 0))
    assert a == sample_model(W, 12, SampleSeed(5, 0))
    assert a != sample_model(W, 12, SampleSeed(5, 1)) or a != sample_model(W, 12, SampleSeed(6, 0))
    R = RootedKernel(W, (0, 0), TypeSigma(NON_EDGE))
    for s in range(5):
        m = sample_model(R, 8, SampleSeed(s, 0))
        assert not m.holds("E", 1, 2)
    assert satisfies_theory(sample_model(two_type_graph_kernel(theory=TRIANGLE_FREE), 20, SampleSeed(0, 0)))


def test_sampling_detects_theory_violation():
    W = single_type_graph_kernel(1, theory=TRIANGLE_FREE)
    with pytest.raises(ConsistencyError):
        sample_model(W, 5, SampleSeed(0, 0))


def test_mc_hom_converges():
    W = single_type_graph_kernel(HALF)
    est = mc_hom(W, Flag(K3, 0), 60, 300, SampleSeed(1, 0))
    assert est.within(Fraction(1, 8))
    full = mc_hom(W, Flag(EDGE, 0), 30, 50, SampleSeed(1, 0), None)
    assert full.within(HALF)
    rooted = RootedKernel(two_type_graph_kernel(), (0,), TypeSigma(graph(1)))
    assert mc_hom(rooted, Flag(EDGE, 1), 40, 100, SampleSeed(2, 0)).within(HALF)


def test_random_kernels_are_valid():
    rng = random.Random(0)
    for theory in (GRAPHS, DIGRAPHS, HYPERGRAPHS3):
        for t in (1, 2, 3):
            assert validate_kernel(random_kernel(theory, t, rng)).valid


def test_panel_is_deterministic():
    a = kernel_panel(GRAPHS, 8, seed=4)
    b = kernel_panel(GRAPHS, 8, seed=4)
    f = Flag(complete(3), 0)
    assert [exact_hom(x, f) for x in a] == [exact_hom(x, f) for x in b]
    assert exact_hom(a[0], Flag(EDGE, 0)) == HALF
