"""Eliminate non-demand vertices from an uncapacitated instance.

Each ordered pair of demand vertices becomes one MVTSP edge whose cost is the
cheapest path between them that does not pass through another demand vertex.
A solution of the MVTSP instance is lifted back by routing every traversal
along its recorded path.

A demand vertex can also leave and re-enter itself through non-demand
vertices only. Such return loops cannot be MVTSP edges (self-loops are not
allowed), so they are kept in the path table and `solve_via_reduction`
models each of them as a subdivided two-cycle.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Mapping

from conflow.instance import INF, CFInstance, Edge, Flow, MVTSPInstance, support_components


@dataclass(frozen=True)
class PathEntry:
    cost: int
    vertices: tuple[int, ...]


@dataclass
class PathTable:
    # MVTSP vertex i corresponds to original vertex labels[i - 1]
    labels: list[int]
    paths: dict[tuple[int, int], PathEntry] = field(default_factory=dict)

    def index(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.labels, start=1)}

    def loops(self) -> dict[int, PathEntry]:
        return {u: p for (u, v), p in self.paths.items() if u == v}

    def lines(self) -> list[str]:
        out = []
        for (u, v), p in sorted(self.paths.items()):
            seq = " ".join(map(str, p.vertices))
            out.append(f"pt {u} {v} {p.cost} {len(p.vertices)} {seq}")
        return out


def _shortest_paths(
    inst: CFInstance, source: int, blocked: set[int]
) -> dict[int, tuple[int, tuple[int, ...]]]:
    """Dijkstra from `source` on non-blocked vertices. Demand vertices other
    than the source are reached but never expanded. Labels compare by
    (cost, vertex sequence), which fixes ties deterministically.

    The returned map also holds a (cost, path) entry under key -source for the
    cheapest closed walk back into the source."""
    out = inst.out_edges()
    best: dict[int, tuple[int, tuple[int, ...]]] = {}
    heap: list[tuple[int, tuple[int, ...]]] = [(0, (source,))]
    while heap:
        cost, path = heapq.heappop(heap)
        v = path[-1]
        key = -source if v == source and len(path) > 1 else v
        if key in best:
            continue
        best[key] = (cost, path)
        if key != source and v in blocked:
            continue
        for e in out[v]:
            w = e.head
            if (-source if w == source else w) in best or (w != source and w in path):
                continue
            heapq.heappush(heap, (cost + e.cost, path + (w,)))
    del best[source]
    return best


def reduce_to_mvtsp(inst: CFInstance) -> tuple[MVTSPInstance, PathTable]:
    if any(e.cap != INF for e in inst.edges):
        raise ValueError("reduction requires unbounded capacities on every edge")
    if not inst.demand:
        raise ValueError("reduction requires at least one demand vertex")
    labels = sorted(inst.demand)
    table = PathTable(labels)
    index = table.index()
    blocked = set(labels)
    costs: dict[tuple[int, int], int] = {}
    for u in labels:
        for v, (cost, path) in _shortest_paths(inst, u, blocked).items():
            if v < 0:
                table.paths[(u, u)] = PathEntry(cost, path)
            elif v in blocked:
                table.paths[(u, v)] = PathEntry(cost, path)
                costs[(index[u], index[v])] = cost
    demand = {index[v]: inst.demand[v] for v in labels}
    return MVTSPInstance(len(labels), costs, demand), table


def lift_tour(
    m_sol: Mapping[tuple[int, int], int],
    table: PathTable,
    loops: Mapping[int, int] | None = None,
) -> Flow:
    """Route each MVTSP traversal along its recorded path. `loops` gives, per
    original demand vertex, how many return loops to add."""
    flow: Flow = {}

    def route(path: tuple[int, ...], mult: int) -> None:
        for a, b in zip(path, path[1:]):
            flow[(a, b)] = flow.get((a, b), 0) + mult

    for (i, j), mult in m_sol.items():
        if mult <= 0:
            continue
        key = (table.labels[i - 1], table.labels[j - 1])
        if key not in table.paths:
            raise ValueError(f"solution uses forbidden pair {(i, j)}")
        route(table.paths[key].vertices, mult)
    for u, mult in (loops or {}).items():
        if mult > 0:
            route(table.paths[(u, u)].vertices, mult)
    return dict(sorted(flow.items()))


def extract_eulerian(inst: CFInstance, flow: Mapping[tuple[int, int], int]) -> tuple[int, ...]:
    """Closed walk using every edge exactly flow(e) times (Hierholzer)."""
    remaining: dict[int, list[int]] = {}
    balance: dict[int, int] = {}
    for (u, v), mult in sorted(flow.items()):
        if inst.edge(u, v) is None:
            raise ValueError(f"flow on unknown edge {(u, v)}")
        if mult <= 0:
            continue
        remaining.setdefault(u, []).extend([v] * mult)
        balance[u] = balance.get(u, 0) + mult
        balance[v] = balance.get(v, 0) - mult
    if any(balance.values()):
        raise ValueError("flow is not balanced")
    if len(support_components(flow)) > 1:
        raise ValueError("flow support is disconnected")
    if not remaining:
        return ()
    for v in remaining:
        remaining[v].reverse()
    start = min(remaining)
    stack = [start]
    circuit = []
    while stack:
        v = stack[-1]
        if remaining.get(v):
            stack.append(remaining[v].pop())
        else:
            circuit.append(stack.pop())
    return tuple(reversed(circuit))


def loop_augmented(m: MVTSPInstance, table: PathTable) -> tuple[CFInstance, dict[int, int]]:
    """CF form of `m` where each return loop of the table becomes a fresh
    non-demand vertex on a two-cycle. Returns the instance and a map from the
    helper vertex to the MVTSP vertex it serves."""
    edges = [Edge(u, v, c) for (u, v), c in sorted(m.cost.items())]
    index = table.index()
    helpers: dict[int, int] = {}
    n = m.n
    for u, p in sorted(table.loops().items()):
        n += 1
        helpers[n] = index[u]
        edges.append(Edge(index[u], n, p.cost))
        edges.append(Edge(n, index[u], 0))
    return CFInstance(n, tuple(edges), dict(m.demand)), helpers


def solve_via_reduction(inst: CFInstance, solver: Callable[[CFInstance], object]) -> tuple[str, int, Flow]:
    """Reduce, solve the reduced instance with `solver`, and lift the result.

    `solver` returns an object with `feasible`, `cost` and `flow` attributes.
    Returns ("optimal" | "infeasible", cost, flow on the original instance)."""
    if all(d == 0 for d in inst.demand.values()):
        return "optimal", 0, {}
    m, table = reduce_to_mvtsp(inst)
    cf, helpers = loop_augmented(m, table)
    res = solver(cf)
    if not res.feasible:
        return "infeasible", 0, {}
    tours = {k: v for k, v in res.flow.items() if k[0] <= m.n and k[1] <= m.n}
    loops: dict[int, int] = {}
    for (a, b), mult in res.flow.items():
        if a in helpers:
            loops[table.labels[helpers[a] - 1]] = mult
    flow = lift_tour(tours, table, loops)
    return "optimal", inst.flow_cost(flow), flow
