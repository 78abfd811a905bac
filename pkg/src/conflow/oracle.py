"""Exhaustive exact solver for tiny instances.

Edges are assigned multiplicities in input order, smallest first. Partial
assignments are cut when some vertex can no longer meet its demand or balance
its in- and out-flow with the edges still unassigned, or when the partial cost
already reaches the best complete solution found so far.
"""

from __future__ import annotations

from typing import Callable, Mapping

from conflow.instance import INF, CFInstance, Flow, support_components
from conflow.result import BudgetExceeded, SolveResult, Status

OracleResult = SolveResult

DEFAULT_NODE_LIMIT = 20_000_000


def default_bounds(inst: CFInstance) -> list[int]:
    maxdem = max(inst.demand.values(), default=0)
    cap = maxdem * inst.n
    return [int(min(e.cap, cap)) for e in inst.edges]


def _bounds(inst: CFInstance, per_edge_bound) -> list[int]:
    if isinstance(per_edge_bound, int):
        return [int(min(e.cap, per_edge_bound)) for e in inst.edges]
    if per_edge_bound is not None:
        return [int(min(e.cap, per_edge_bound[e.key])) for e in inst.edges]
    return default_bounds(inst)


def _explore(
    inst: CFInstance,
    bounds: list[int],
    node_limit: int,
    prune: bool,
    accept: Callable[[list[int], int], float],
) -> int:
    """Depth-first search over multiplicity vectors. `accept` is called on
    every complete connected assignment and returns the cost bound that
    later branches must beat (INF to see everything). Returns the node count."""
    edges = inst.edges
    n = inst.n
    dem = [inst.demand.get(v, -1) for v in range(n + 1)]
    inflow = [0] * (n + 1)
    outflow = [0] * (n + 1)
    # capacity still available on unassigned edges, per vertex and side
    rem_in = [0] * (n + 1)
    rem_out = [0] * (n + 1)
    for e, b in zip(edges, bounds):
        rem_in[e.head] += b
        rem_out[e.tail] += b

    mult = [0] * len(edges)
    bound: float = INF
    nodes = 0
    cost = 0

    def vertex_ok(v: int) -> bool:
        i, o = inflow[v], outflow[v]
        ri, ro = rem_in[v], rem_out[v]
        if dem[v] >= 0:
            if i > dem[v] or o > dem[v] or i + ri < dem[v] or o + ro < dem[v]:
                return False
        return i + ri >= o and o + ro >= i

    def search(k: int) -> None:
        nonlocal nodes, cost, bound
        nodes += 1
        if nodes > node_limit:
            raise BudgetExceeded(f"oracle explored more than {node_limit} nodes")
        if k == len(edges):
            if all(inflow[v] == outflow[v] for v in range(1, n + 1)) and all(
                dem[v] < 0 or inflow[v] == dem[v] for v in range(1, n + 1)
            ):
                if cost < bound:
                    flow = {edges[t].key: m for t, m in enumerate(mult) if m}
                    if len(support_components(flow)) <= 1:
                        bound = accept(list(mult), cost)
            return
        e = edges[k]
        u, v = e.tail, e.head
        rem_out[u] -= bounds[k]
        rem_in[v] -= bounds[k]
        for m in range(bounds[k] + 1):
            if prune and cost + e.cost * m >= bound:
                break
            mult[k] = m
            outflow[u] += m
            inflow[v] += m
            cost += e.cost * m
            if not prune or (vertex_ok(u) and vertex_ok(v)):
                search(k + 1)
            outflow[u] -= m
            inflow[v] -= m
            cost -= e.cost * m
            if prune and dem[v] >= 0 and inflow[v] + m + 1 > dem[v]:
                break
            if prune and dem[u] >= 0 and outflow[u] + m + 1 > dem[u]:
                break
        mult[k] = 0
        rem_out[u] += bounds[k]
        rem_in[v] += bounds[k]

    search(0)
    return nodes


def solve_exact(
    inst: CFInstance,
    per_edge_bound: int | Mapping[tuple[int, int], int] | None = None,
    node_limit: int = DEFAULT_NODE_LIMIT,
    prune: bool = True,
) -> OracleResult:
    best: list = []

    def accept(mult: list[int], cost: int) -> float:
        best[:] = [mult, cost]
        return cost

    nodes = _explore(inst, _bounds(inst, per_edge_bound), node_limit, prune, accept)
    if not best:
        return OracleResult(Status.INFEASIBLE, 0, {}, nodes)
    flow = {inst.edges[k].key: m for k, m in enumerate(best[0]) if m}
    return OracleResult(Status.OPTIMAL, int(best[1]), dict(sorted(flow.items())), nodes)


def enumerate_solutions(
    inst: CFInstance,
    per_edge_bound: int | Mapping[tuple[int, int], int] | None = None,
    node_limit: int = DEFAULT_NODE_LIMIT,
) -> list[Flow]:
    """Every valid connected flow within the per-edge bounds, in search order."""
    found: list[Flow] = []

    def accept(mult: list[int], cost: int) -> float:
        found.append({inst.edges[k].key: m for k, m in enumerate(mult) if m})
        return INF

    _explore(inst, _bounds(inst, per_edge_bound), node_limit, True, accept)
    return found
