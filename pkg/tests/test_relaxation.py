import random

from hypothesis import given, settings, strategies as st

from conflow.corpus import mixed_cf
from conflow.instance import CFInstance, Edge, verify_solution
from conflow.oracle import solve_exact
from conflow.relaxation import build_mcf, solve_relaxation
from instances import TWIN_RELAXED, star, triangle, twin_cycles


def test_network_of_triangle():
    net = build_mcf(triangle())
    assert len(net.labels) == 6 and len(net.arcs) == 3
    for arc in net.arcs:
        u, v = arc.edge
        assert net.labels[arc.tail] == ("out", u) and net.labels[arc.head] == ("in", v)
    assert sum(net.supply.values()) == sum(net.requirement.values()) == 3


def test_network_without_demands_is_the_graph():
    inst = CFInstance(3, (Edge(1, 2, 4), Edge(2, 3, 1)), {})
    net = build_mcf(inst)
    assert net.labels == [("v", 1), ("v", 2), ("v", 3)]
    assert not net.supply and not net.requirement


def test_network_of_star():
    labels = set(build_mcf(star()).labels)
    assert labels == {("out", 1), ("in", 1), ("out", 3), ("in", 3), ("v", 2)}


def test_relaxed_triangle():
    res = solve_relaxation(triangle())
    assert res.feasible and res.cost == 3 and res.flow == {(1, 2): 1, (2, 3): 1, (3, 1): 1}


def test_relaxed_twin_cycles():
    res = solve_relaxation(twin_cycles())
    assert res.cost == 4 and res.flow == TWIN_RELAXED


def test_unreachable_demand_is_infeasible():
    inst = CFInstance(2, (Edge(1, 2, 1),), {1: 1})
    assert not solve_relaxation(inst).feasible


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_relaxation_is_a_lower_bound(seed):
    inst = mixed_cf(random.Random(seed))
    relaxed = solve_relaxation(inst)
    exact = solve_exact(inst)
    if exact.feasible:
        assert relaxed.feasible and relaxed.cost <= exact.cost
    if relaxed.feasible:
        rep = verify_solution(inst, relaxed.flow)
        assert rep.relaxed_ok and rep.cost == relaxed.cost
