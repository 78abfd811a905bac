"""Connected Flow without the connectivity constraint, as a min-cost flow.

Every demand vertex d is split into a source d_out (supply dem(d)) that keeps
its out-arcs and a sink d_in (requirement dem(d)) that keeps its in-arcs.
Non-demand vertices stay as ordinary transshipment nodes. The network is solved
with successive shortest paths using Dijkstra on reduced costs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from conflow.instance import INF, CFInstance, Flow, checked
from conflow.result import Status


@dataclass
class McfArc:
    tail: int
    head: int
    cost: int
    cap: float
    edge: tuple[int, int]


@dataclass
class McfNetwork:
    labels: list[tuple[str, int]]
    arcs: list[McfArc]
    supply: dict[int, int] = field(default_factory=dict)
    requirement: dict[int, int] = field(default_factory=dict)

    def node(self, label: tuple[str, int]) -> int:
        return self.labels.index(label)


def build_mcf(inst: CFInstance) -> McfNetwork:
    labels: list[tuple[str, int]] = []
    head_node: dict[int, int] = {}
    tail_node: dict[int, int] = {}
    for v in inst.vertices:
        if v in inst.demand:
            tail_node[v] = len(labels)
            labels.append(("out", v))
            head_node[v] = len(labels)
            labels.append(("in", v))
        else:
            tail_node[v] = head_node[v] = len(labels)
            labels.append(("v", v))
    arcs = [McfArc(tail_node[e.tail], head_node[e.head], e.cost, e.cap, e.key) for e in inst.edges]
    net = McfNetwork(labels, arcs)
    for d, dem in sorted(inst.demand.items()):
        net.supply[tail_node[d]] = dem
        net.requirement[head_node[d]] = dem
    return net


@dataclass
class RelaxationResult:
    status: Status
    flow: Flow
    cost: int
    clamp: int = 0

    @property
    def feasible(self) -> bool:
        return self.status is Status.OPTIMAL


class _Residual:
    """Residual graph with paired forward/backward arcs."""

    def __init__(self, size: int):
        self.adj: list[list[int]] = [[] for _ in range(size)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[int] = []

    def add(self, u: int, v: int, cap: int, cost: int) -> int:
        idx = len(self.to)
        self.to += [v, u]
        self.cap += [cap, 0]
        self.cost += [cost, -cost]
        self.adj[u].append(idx)
        self.adj[v].append(idx + 1)
        return idx

    def min_cost_flow(self, s: int, t: int, want: int) -> tuple[int, int]:
        n = len(self.adj)
        potential = [0] * n
        sent = total = 0
        while sent < want:
            dist: list[float] = [INF] * n
            prev = [-1] * n
            dist[s] = 0
            heap = [(0, s)]
            while heap:
                d, u = heapq.heappop(heap)
                if d > dist[u]:
                    continue
                for a in self.adj[u]:
                    if self.cap[a] <= 0:
                        continue
                    v = self.to[a]
                    nd = d + self.cost[a] + potential[u] - potential[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        prev[v] = a
                        heapq.heappush(heap, (nd, v))
            if dist[t] == INF:
                break
            for v in range(n):
                if dist[v] < INF:
                    potential[v] += int(dist[v])
            push = want - sent
            v = t
            while v != s:
                a = prev[v]
                push = min(push, self.cap[a])
                v = self.to[a ^ 1]
            v = t
            while v != s:
                a = prev[v]
                self.cap[a] -= push
                self.cap[a ^ 1] += push
                total = checked(total + push * self.cost[a])
                v = self.to[a ^ 1]
            sent += push
        return sent, total


def solve_relaxation(inst: CFInstance) -> RelaxationResult:
    net = build_mcf(inst)
    want = sum(net.supply.values())
    clamp = checked(want * max(inst.n, 1))
    size = len(net.labels)
    source, sink = size, size + 1
    res = _Residual(size + 2)
    arc_ids = []
    for arc in net.arcs:
        cap = clamp if arc.cap == INF else min(int(arc.cap), clamp)
        arc_ids.append(res.add(arc.tail, arc.head, cap, arc.cost))
    for node, amount in net.supply.items():
        res.add(source, node, amount, 0)
    for node, amount in net.requirement.items():
        res.add(node, sink, amount, 0)
    sent, cost = res.min_cost_flow(source, sink, want)
    if sent < want:
        return RelaxationResult(Status.INFEASIBLE, {}, 0, clamp)
    flow: Flow = {}
    for arc, idx in zip(net.arcs, arc_ids):
        mult = res.cap[idx ^ 1]
        if mult > 0:
            flow[arc.edge] = mult
    return RelaxationResult(Status.OPTIMAL, dict(sorted(flow.items())), inst.flow_cost(flow), clamp)
