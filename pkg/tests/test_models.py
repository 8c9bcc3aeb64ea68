import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from flagcalc.errors import InputError, ResourceError
from flagcalc.library import (DIGRAPHS, GRAPHS, HYPERGRAPHS3, K3, TRIANGLE_FREE, complete, cycle, digraph, graph,
                              hypergraph, path)
from flagcalc.models import (Model, automorphism_count, canonical_form, enumerate_models, induced_submodel, isomorphic,
                             satisfies_theory, set_max_size)
from flagcalc import models as models_mod


def brute_classes(n, arity=2):
    """Orbits of edge sets under vertex permutations, counted directly."""
    pairs = list(itertools.combinations(range(n), arity))
    seen = set()
    classes = 0
    for mask in range(1 << len(pairs)):
        if mask in seen:
            continue
        classes += 1
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        for perm in itertools.permutations(range(n)):
            img = {tuple(sorted(perm[v] for v in e)) for e in edges}
            seen.add(sum(1 << i for i, pr in enumerate(pairs) if pr in img))
    return classes


@pytest.mark.parametrize("theory,counts", [
    (GRAPHS, [1, 1, 2, 4, 11, 34, 156]),
    (TRIANGLE_FREE, [1, 1, 2, 3, 7, 14]),
    (DIGRAPHS, [1, 1, 3, 16, 218]),
    (HYPERGRAPHS3, [1, 1, 1, 2, 5, 34]),
])
def test_enumeration_counts(theory, counts):
    assert [len(enumerate_models(theory, n)) for n in range(len(counts))] == counts


@pytest.mark.parametrize("n", range(1, 6))
def test_graph_counts_match_brute_force(n):
    assert len(enumerate_models(GRAPHS, n)) == brute_classes(n)


def test_three_graph_counts_match_brute_force():
    assert len(enumerate_models(HYPERGRAPHS3, 5)) == brute_classes(5, 3)


def test_enumerated_models_pairwise_nonisomorphic_and_canonical():
    reps = enumerate_models(GRAPHS, 5)
    assert len({c.encoding for c in reps}) == len(reps)
    for c in reps:
        assert canonical_form(c.model).model == c.model


@pytest.mark.parametrize("model,count", [(K3, 6), (path(3), 2), (cycle(4), 8), (complete(4), 24), (graph(4), 24),
                                         (path(4), 2)])
def test_automorphism_count(model, count):
    assert automorphism_count(model) == count


def test_automorphisms_fixing_prefix():
    assert automorphism_count(path(3), 1) == 1
    assert automorphism_count(cycle(4), 1) == 2


def random_graph(rng, n):
    return graph(n, [e for e in itertools.combinations(range(1, n + 1), 2) if rng.random() < 0.5])


def random_digraph(rng, n):
    return digraph(n, [(u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v and rng.random() < 0.4])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10**6))
def test_canonical_invariant_under_relabelling(n, seed):
    rng = random.Random(seed)
    for m in (random_graph(rng, n), random_digraph(rng, n)):
        order = list(range(1, n + 1))
        rng.shuffle(order)
        other = m.relabel(order)
        c1, c2 = canonical_form(m), canonical_form(other)
        assert c1.encoding == c2.encoding
        assert c1.model == c2.model
        assert canonical_form(c1.model).model == c1.model
        assert m.relabel(list(c1.witness)) == c1.model


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6))
def test_isomorphism_agrees_with_brute_force(n, seed):
    rng = random.Random(seed)
    a, b = random_graph(rng, n), random_graph(rng, n)
    brute = any(a.relabel(list(p)) == b for p in itertools.permutations(range(1, n + 1)))
    assert isomorphic(a, b) == brute


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 6), st.integers(0, 10**6))
def test_rooted_canonical_fixes_prefix(n, seed):
    rng = random.Random(seed)
    m = random_digraph(rng, n)
    free = list(range(3, n + 1))
    rng.shuffle(free)
    other = m.relabel([1, 2] + free)
    assert canonical_form(m, 2).encoding == canonical_form(other, 2).encoding
    assert canonical_form(m, 2).witness[:2] == (1, 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 7), st.integers(0, 10**6))
def test_restriction_composes(n, seed):
    rng = random.Random(seed)
    m = random_graph(rng, n)
    outer = sorted(rng.sample(range(1, n + 1), rng.randint(2, n)))
    inner = sorted(rng.sample(range(1, len(outer) + 1), rng.randint(1, len(outer))))
    assert induced_submodel(induced_submodel(m, outer), inner) == induced_submodel(m, [outer[i - 1] for i in inner])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10**6))
def test_theory_is_hereditary(n, seed):
    rng = random.Random(seed)
    m = random_graph(rng, n)
    if satisfies_theory(m, TRIANGLE_FREE):
        for r in range(1, n + 1):
            for s in itertools.combinations(range(1, n + 1), r):
                assert satisfies_theory(induced_submodel(m, s), TRIANGLE_FREE)


def test_triangle_free_membership():
    assert not satisfies_theory(K3, TRIANGLE_FREE)
    assert not satisfies_theory(complete(4), TRIANGLE_FREE)
    assert satisfies_theory(cycle(4), TRIANGLE_FREE)
    assert satisfies_theory(cycle(5), TRIANGLE_FREE)


def test_digraph_relabel_keeps_arc_direction():
    d = digraph(2, [(1, 2)])
    assert d.holds("A", 1, 2) and not d.holds("A", 2, 1)
    r = d.relabel([2, 1])
    assert r.holds("A", 2, 1) and not r.holds("A", 1, 2)
    assert not isomorphic(digraph(3, [(1, 2), (2, 3), (3, 1)]), digraph(3, [(1, 2), (2, 3), (1, 3)]))


def test_hypergraph_holds_is_symmetric():
    h = hypergraph(4, [(1, 2, 3)])
    assert h.holds("E", 3, 1, 2)
    assert not h.holds("E", 1, 2, 4)


def test_bad_models_rejected():
    with pytest.raises(InputError):
        Model(GRAPHS, 2, {(1, 2): (2,)})
    with pytest.raises(InputError):
        Model(GRAPHS, 2, {})
    with pytest.raises(InputError):
        Model(GRAPHS, 2, {(2, 1): (1,)})
    with pytest.raises(InputError):
        induced_submodel(K3, [0, 1])
    with pytest.raises(InputError):
        K3.relabel([1, 1, 2])


def test_size_cap():
    old = models_mod.MAX_SIZE
    try:
        set_max_size(4)
        with pytest.raises(ResourceError):
            enumerate_models(GRAPHS, 5)
        with pytest.raises(ResourceError):
            canonical_form(graph(5))
    finally:
        set_max_size(old)
