import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from conflow.corpus import mixed_cf
from conflow.flowdiff import (
    Tag,
    apply_tours,
    decompose_difference,
    difference_multiset,
    is_valid_tour,
    transfer_edges,
)
from conflow.instance import CFInstance, Edge, verify_solution
from conflow.oracle import solve_exact
from conflow.relaxation import solve_relaxation
from instances import TWIN_RELAXED, TWIN_TOUR, twin_cycles


def test_equal_flows_have_no_tours():
    assert decompose_difference(twin_cycles(), TWIN_TOUR, TWIN_TOUR).tours == []


def test_twin_cycles_single_tour():
    dec = decompose_difference(twin_cycles(), TWIN_RELAXED, TWIN_TOUR)
    assert len(dec.tours) == 1
    tour = dec.tours[0]
    assert sorted(tour.edges(Tag.FROM_S)) == [(2, 3), (4, 1)]
    assert sorted(tour.edges(Tag.FROM_R)) == [(2, 1), (4, 3)]
    assert tour.delta == 8


def test_reversed_cycle_is_one_tour():
    # the same three vertices walked in opposite directions, only vertex 1 in D
    edges = tuple(Edge(u, v, 1) for u in (1, 2, 3) for v in (1, 2, 3) if u != v)
    inst = CFInstance(3, edges, {1: 1})
    r = {(1, 2): 1, (2, 3): 1, (3, 1): 1}
    s = {(1, 3): 1, (3, 2): 1, (2, 1): 1}
    dec = decompose_difference(inst, r, s)
    assert len(dec.tours) == 1 and len(dec.tours[0].arcs) == 6


def test_transfer_nothing_is_identity():
    assert transfer_edges(twin_cycles(), TWIN_RELAXED, TWIN_TOUR, []) == TWIN_RELAXED


def test_transfer_one_cross_edge():
    f = transfer_edges(twin_cycles(), TWIN_RELAXED, TWIN_TOUR, [(2, 3)])
    assert f == TWIN_TOUR
    assert verify_solution(twin_cycles(), f).cost == 12


def test_transfer_shared_edges_is_identity():
    assert transfer_edges(twin_cycles(), TWIN_RELAXED, TWIN_TOUR, [(1, 2), (3, 4)]) == TWIN_RELAXED


def test_transfer_rejects_edge_outside_s():
    with pytest.raises(ValueError):
        transfer_edges(twin_cycles(), TWIN_RELAXED, TWIN_TOUR, [(2, 1)])


def _pair(seed):
    inst = mixed_cf(random.Random(seed))
    r = solve_relaxation(inst)
    s = solve_exact(inst)
    return inst, r, s


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_decomposition_properties(seed):
    inst, r, s = _pair(seed)
    if not s.feasible:
        return
    dec = decompose_difference(inst, r.flow, s.flow)
    assert dec.arc_multiset() == difference_multiset(r.flow, s.flow)
    for tour in dec.tours:
        assert is_valid_tour(inst, tour)
        assert tour.delta >= 0
        visits = Counter()
        for a in tour.arcs:
            visits[("in", a.end)] += 1
            visits[("out", a.start)] += 1
        assert max(visits.values()) <= 2
    assert apply_tours(r.flow, dec.tours) == {k: v for k, v in sorted(s.flow.items())}
    assert sum(t.delta for t in dec.tours) == s.cost - r.cost
