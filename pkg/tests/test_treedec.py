import random

import pytest
from hypothesis import given, settings, strategies as st

from conflow.corpus import mixed_cf
from conflow.treedec import (
    DecompositionError,
    TreeDecomposition,
    graph_edges,
    heuristic_td,
    make_nice,
    parse_td,
    validate,
    write_td,
)
from instances import path_graph, triangle


def test_triangle_single_bag():
    td = heuristic_td(triangle())
    assert td.bags == [frozenset({1, 2, 3})] and td.width == 2


def test_path_bags():
    td = heuristic_td(path_graph(4))
    assert sorted(map(sorted, td.bags)) == [[1, 2], [2, 3], [3, 4]] and td.width == 1


def test_missing_edge_rejected():
    td = parse_td("s td 2 2 3\nb 1 1 2\nb 2 3\n1 2\n")
    with pytest.raises(DecompositionError, match="edge"):
        validate(td, 3, graph_edges(path_graph(3)))


def test_disconnected_occurrences_rejected():
    td = TreeDecomposition([frozenset({1, 2}), frozenset({2, 3}), frozenset({1, 3})], [(0, 1), (1, 2)], 0, 3)
    with pytest.raises(DecompositionError, match="vertex 1"):
        validate(td, 3, [])


@pytest.mark.parametrize(
    "text",
    ["b 1 1\n", "s td 1 1 1\nb 1 1 2\n", "s td 2 1 2\nb 1 1\nb 1 2\n", "s td 1 1 1\nb x\n", "s td 2 1 2\nb 1 1\nb 2 2\n1 3\n"],
)
def test_parse_rejects(text):
    with pytest.raises(DecompositionError):
        parse_td(text)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_heuristic_is_valid_and_round_trips(seed):
    inst = mixed_cf(random.Random(seed))
    td = heuristic_td(inst)
    validate(td, inst.n, graph_edges(inst))
    back = parse_td(write_td(td))
    assert back.bags == td.bags and back.edges == td.edges


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_nice_form(seed):
    inst = mixed_cf(random.Random(seed))
    nodes, root = make_nice(heuristic_td(inst), inst)
    assert nodes[root].bag == ()
    introduced = [e for node in nodes if node.kind == "edge" for e in [node.edge]]
    assert sorted(introduced) == sorted(e.key for e in inst.edges)
    for node in nodes:
        if node.kind == "join":
            a, b = node.children
            assert nodes[a].bag == nodes[b].bag == node.bag
        elif node.kind == "intro":
            assert set(nodes[node.children[0]].bag) | {node.vertex} == set(node.bag)
        elif node.kind == "forget":
            assert set(node.bag) | {node.vertex} == set(nodes[node.children[0]].bag)
