import random

import pytest
from hypothesis import given, settings, strategies as st

from conflow.corpus import mixed_cf
from conflow.instance import CFInstance, Edge
from conflow.oracle import solve_exact
from conflow.relaxation import solve_relaxation
from conflow.vc import (
    canonical,
    compute_vertex_cover,
    dp_sweep,
    gadget_instance,
    is_vertex_cover,
    solve_vc_fpt,
    subdivide_cover_edges,
)
from instances import complete, path_graph, star, triangle, twin_cycles


def test_covers():
    assert compute_vertex_cover(path_graph(3)).vertices == {2}
    assert len(compute_vertex_cover(complete(4)).vertices) == 3
    assert compute_vertex_cover(CFInstance(3, (), {})).vertices == frozenset()


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_cover_is_minimum(seed):
    inst = mixed_cf(random.Random(seed))
    cover = compute_vertex_cover(inst)
    assert cover.exact and is_vertex_cover(inst, cover.vertices)
    for v in cover.vertices:
        assert not is_vertex_cover(inst, cover.vertices - {v})


def test_subdivide_one_inside_edge():
    sub = subdivide_cover_edges(triangle(), [1, 2])
    assert sub.inst.n == 4 and sub.origin == {4: (1, 2)}
    assert is_vertex_cover(sub.inst, sub.cover)
    assert all(not (e.tail in (1, 2) and e.head in (1, 2)) for e in sub.inst.edges)


def test_subdivide_independent_cover_is_identity():
    sub = subdivide_cover_edges(star(), [2])
    assert sub.inst == star() and not sub.origin


def test_subdivide_full_cover_of_k3():
    sub = subdivide_cover_edges(complete(3), [1, 2, 3])
    assert len(sub.origin) == 6 and sub.inst.n == 9


def test_solve_examples():
    assert solve_vc_fpt(triangle(), [1, 2]).cost == 3
    assert solve_vc_fpt(twin_cycles(), [2, 4]).cost == 12
    assert solve_vc_fpt(star(), [2]).cost == 4


def test_rejects_non_cover():
    with pytest.raises(ValueError):
        solve_vc_fpt(triangle(), [1])


def test_sweep_without_cover_vertices():
    inst = CFInstance(2, (Edge(1, 2, 1), Edge(2, 1, 1)), {1: 1})
    assert dp_sweep(inst, [], {(1, 2): 1, (2, 1): 1}, 1) is None


def test_sweep_single_pair():
    inst = CFInstance(2, (Edge(1, 2, 4), Edge(2, 1, 7)), {1: 1, 2: 1})
    res = dp_sweep(inst, [1], {(1, 2): 1, (2, 1): 1}, 1)
    assert res.cost == 11 and res.flow == {(1, 2): 1, (2, 1): 1}


def test_sweep_twin_cycles_after_gadgets():
    sub = subdivide_cover_edges(twin_cycles(), [2, 4])
    g, _ = gadget_instance(sub.inst, sub.cover, (2, 4))
    res = dp_sweep(g, (2, 4), solve_relaxation(g).flow, 2)
    assert res.cost == solve_exact(twin_cycles()).cost


def test_canonical_partition():
    assert canonical([[3, 1], [2], []]) == ((1, 3), (2,))


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 100_000))
def test_matches_oracle(seed):
    inst = mixed_cf(random.Random(seed))
    want = solve_exact(inst)
    got = solve_vc_fpt(inst)
    assert (got.status, got.cost) == (want.status, want.cost)
