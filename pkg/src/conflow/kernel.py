"""Polynomial kernel for MVTSP parameterized by a vertex cover X.

Outline: take a relaxed optimum r, remove alternating cycles from its X->B
and B->X supports, and group independent vertices b by the unique pair
(x_i, x_j) with r(x_i, b) > 0 and r(b, x_j) > 0. Inside each group keep the
vertices that are cheapest to reroute toward every other cover vertex
(anchors) and merge the rest into a single vertex that is forced to carry
exactly the flow r gave them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from conflow.instance import Flow, MVTSPInstance, mvtsp_to_cf
from conflow.relaxation import solve_relaxation


class NotOptimal(ValueError):
    pass


def anchor_size(k: int) -> int:
    return 8 * k * k + 2


def size_bound(k: int) -> int:
    return 2 * k + k * k + 2 * k**3 * anchor_size(k)


@dataclass
class Classification:
    groups: dict[tuple[int, int], list[int]]
    other: list[int]  # Y
    idle: list[int]  # independent vertices with zero demand
    forward: set[tuple[int, int]]
    backward: set[tuple[int, int]]


@dataclass
class Contraction:
    i: int
    j: int
    vertex: int  # kernel id
    demand: int
    fixed_cost: int
    members: list[int]


@dataclass
class ContractionMap:
    labels: list[int | None]  # kernel id - 1 -> original id, None for merged vertices
    contractions: list[Contraction] = field(default_factory=list)
    relaxed: Flow = field(default_factory=dict)
    n_original: int = 0

    @property
    def fixed_cost(self) -> int:
        return sum(c.fixed_cost for c in self.contractions)

    def lines(self) -> list[str]:
        return [
            f"r {c.i} {c.j} {c.vertex} {c.demand} {c.fixed_cost} " + " ".join(map(str, c.members))
            for c in self.contractions
        ]


def _find_cycle(edges: set[tuple[int, int]]) -> list[tuple[int, int]] | None:
    """An undirected cycle in the simple bipartite graph `edges`, as the list
    of its edges in walk order, or None if the graph is a forest."""
    adj: dict[int, list[tuple[int, tuple[int, int]]]] = {}
    for e in sorted(edges):
        u, v = e
        adj.setdefault(u, []).append((v, e))
        adj.setdefault(v, []).append((u, e))
    seen: set[int] = set()
    for root in sorted(adj):
        if root in seen:
            continue
        parent: dict[int, tuple[int, tuple[int, int]] | None] = {root: None}
        depth = {root: 0}
        stack = [root]
        seen.add(root)
        while stack:
            u = stack.pop()
            for w, e in adj[u]:
                if parent[u] is not None and parent[u][1] == e:
                    continue
                if w in depth:
                    # close the cycle through the tree paths of u and w
                    left: list[tuple[int, int]] = []
                    right: list[tuple[int, int]] = []
                    a, b = u, w
                    while depth[a] > depth[b]:
                        left.append(parent[a][1])
                        a = parent[a][0]
                    while depth[b] > depth[a]:
                        right.append(parent[b][1])
                        b = parent[b][0]
                    while a != b:
                        left.append(parent[a][1])
                        a = parent[a][0]
                        right.append(parent[b][1])
                        b = parent[b][0]
                    return left[::-1] + [e] + right
                parent[w] = (u, e)
                depth[w] = depth[u] + 1
                seen.add(w)
                stack.append(w)
    return None


def _order_cycle(cycle_edges: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Order the edges of a cycle so consecutive edges share a vertex."""
    remaining = list(cycle_edges)
    ordered = [remaining.pop(0)]
    end = ordered[0][1]
    while remaining:
        for idx, e in enumerate(remaining):
            if end in e:
                ordered.append(remaining.pop(idx))
                end = e[0] if e[1] == end else e[1]
                break
        else:
            raise AssertionError("edges do not form a cycle")
    return ordered


def acyclify_relaxation(m: MVTSPInstance, cover: Sequence[int], r: Mapping[tuple[int, int], int]) -> Flow:
    """Remove alternating cycles from the cover-to-rest and rest-to-cover
    supports of r without changing its cost."""
    xs = set(cover)
    f = {k: v for k, v in r.items() if v > 0}
    while True:
        fwd = {e for e in f if e[0] in xs and e[1] not in xs}
        bwd = {e for e in f if e[0] not in xs and e[1] in xs}
        cycle = _find_cycle(fwd) or _find_cycle(bwd)
        if cycle is None:
            return dict(sorted(f.items()))
        cycle = _order_cycle(cycle)
        plus, minus = cycle[0::2], cycle[1::2]
        delta = sum(m.cost[e] for e in plus) - sum(m.cost[e] for e in minus)
        if delta != 0:
            raise NotOptimal(f"alternating cycle with cost change {delta}; r is not a relaxed optimum")
        step = min(f[e] for e in minus)
        for e in plus:
            f[e] += step
        for e in minus:
            f[e] -= step
            if f[e] == 0:
                del f[e]


def classify(m: MVTSPInstance, cover: Sequence[int], r: Mapping[tuple[int, int], int]) -> Classification:
    xs = sorted(cover)
    xset = set(xs)
    forward = {e for e, v in r.items() if v > 0 and e[0] in xset and e[1] not in xset}
    backward = {e for e, v in r.items() if v > 0 and e[0] not in xset and e[1] in xset}
    groups: dict[tuple[int, int], list[int]] = {}
    other: list[int] = []
    idle: list[int] = []
    for b in range(1, m.n + 1):
        if b in xset:
            continue
        if m.demand[b] == 0:
            idle.append(b)
            continue
        ins = [x for x in xs if (x, b) in forward]
        outs = [x for x in xs if (b, x) in backward]
        if len(ins) == 1 and len(outs) == 1:
            groups.setdefault((ins[0], outs[0]), []).append(b)
        else:
            other.append(b)
    return Classification(groups, other, idle, forward, backward)


def anchors(
    m: MVTSPInstance, cover: Sequence[int], group: list[int], i: int, j: int, size: int
) -> tuple[dict[int, list[int]], dict[int, list[int]]]:
    """Per cover vertex l: the `size` members of `group` for which moving the
    incoming edge from i to l (forward) or the outgoing edge from j to l
    (backward) is cheapest. Missing edges rank last; ties go to smaller ids."""
    far = float("inf")
    fwd: dict[int, list[int]] = {}
    bwd: dict[int, list[int]] = {}
    for l in sorted(cover):
        def gain_in(v: int) -> tuple[float, int]:
            return (m.cost.get((l, v), far) - m.cost[(i, v)], v)

        def gain_out(v: int) -> tuple[float, int]:
            return (m.cost.get((v, l), far) - m.cost[(v, j)], v)

        fwd[l] = sorted(group, key=gain_in)[:size]
        bwd[l] = sorted(group, key=gain_out)[:size]
    return fwd, bwd


def kernelize(
    m: MVTSPInstance, cover: Sequence[int], anchor: int | None = None
) -> tuple[MVTSPInstance, ContractionMap, Classification]:
    xs = sorted(cover)
    xset = set(xs)
    for u, v in m.cost:
        if u not in xset and v not in xset:
            raise ValueError(f"pair {(u, v)} is not covered")
    k = len(xs)
    size = anchor_size(k) if anchor is None else anchor
    relaxed = solve_relaxation(mvtsp_to_cf(m))
    if not relaxed.feasible:
        # nothing to normalize; the kernel is the instance itself
        labels: list[int | None] = list(range(1, m.n + 1))
        return m, ContractionMap(labels, [], {}, m.n), Classification({}, [], [], set(), set())
    r = acyclify_relaxation(m, xs, relaxed.flow)
    cls = classify(m, xs, r)

    removed: dict[tuple[int, int], list[int]] = {}
    for (i, j), group in sorted(cls.groups.items()):
        fwd, bwd = anchors(m, xs, group, i, j, size)
        keep = set().union(*fwd.values(), *bwd.values())
        rest = [v for v in group if v not in keep]
        # merging a single vertex saves nothing
        if len(rest) >= 2:
            removed[(i, j)] = rest
    gone = {v for rest in removed.values() for v in rest} | set(cls.idle)
    kept = [v for v in range(1, m.n + 1) if v not in gone]
    labels = list(kept)
    index = {v: t for t, v in enumerate(kept, start=1)}
    cost = {(index[u], index[v]): c for (u, v), c in m.cost.items() if u in index and v in index}
    demand = {index[v]: m.demand[v] for v in kept}
    cmap = ContractionMap(labels, [], r, m.n)
    for (i, j), rest in sorted(removed.items()):
        vid = len(labels) + 1
        labels.append(None)
        dem = sum(r.get((i, v), 0) for v in rest)
        fixed = sum(r.get((i, v), 0) * m.cost[(i, v)] + r.get((v, j), 0) * m.cost[(v, j)] for v in rest)
        cost[(index[i], vid)] = 0
        cost[(vid, index[j])] = 0
        demand[vid] = dem
        cmap.contractions.append(Contraction(i, j, vid, dem, fixed, rest))
    return MVTSPInstance(len(labels), cost, demand), cmap, cls


def lift_kernel_solution(ks: Mapping[tuple[int, int], int], cmap: ContractionMap, r: Mapping[tuple[int, int], int] | None = None) -> Flow:
    r = cmap.relaxed if r is None else r
    merged = {c.vertex: c for c in cmap.contractions}
    flow: Flow = {}
    for (a, b), mult in ks.items():
        if mult <= 0 or a in merged or b in merged:
            continue
        key = (cmap.labels[a - 1], cmap.labels[b - 1])
        flow[key] = flow.get(key, 0) + mult
    for c in cmap.contractions:
        idx_i = cmap.labels.index(c.i) + 1
        idx_j = cmap.labels.index(c.j) + 1
        if ks.get((idx_i, c.vertex), 0) != c.demand or ks.get((c.vertex, idx_j), 0) != c.demand:
            raise ValueError(f"kernel solution does not route demand {c.demand} through merged vertex {c.vertex}")
        for v in c.members:
            for key in ((c.i, v), (v, c.j)):
                if r.get(key, 0):
                    flow[key] = flow.get(key, 0) + r[key]
    return dict(sorted(flow.items()))
