"""Seeded random instance families used by the test-suite and `conflow stats`."""

from __future__ import annotations

import random

from conflow.instance import INF, CFInstance, Edge, MVTSPInstance


def random_cf(
    rng: random.Random,
    max_n: int = 6,
    max_edges: int = 10,
    max_dem: int = 2,
    caps: tuple = (1, 2, INF),
    max_cost: int = 9,
    demand_fraction: float = 0.6,
) -> CFInstance:
    n = rng.randint(1, max_n)
    pairs = [(u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v]
    rng.shuffle(pairs)
    m = rng.randint(0, min(max_edges, len(pairs)))
    edges = [Edge(u, v, rng.randint(0, max_cost), rng.choice(caps)) for u, v in sorted(pairs[:m])]
    demand = {v: rng.randint(0, max_dem) for v in range(1, n + 1) if rng.random() < demand_fraction}
    return CFInstance(n, tuple(edges), demand)


def planted_cf(
    rng: random.Random,
    max_n: int = 6,
    max_edges: int = 10,
    max_dem: int = 2,
    caps: tuple = (1, 2, INF),
    max_cost: int = 9,
    max_repeat: int = 1,
) -> CFInstance:
    """Random instance built around one or two planted cycles, so most
    draws are feasible. Demands are the planted in-flows (clipped to
    max_dem) on a random subset of vertices."""
    n = rng.randint(2, max_n)
    inflow = {v: 0 for v in range(1, n + 1)}
    chosen: dict[tuple[int, int], int] = {}
    for _ in range(rng.randint(1, 2)):
        length = rng.randint(2, n)
        cycle = rng.sample(range(1, n + 1), length)
        if len(chosen) + length > max_edges:
            break
        times = rng.randint(1, max_repeat)
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            chosen[(a, b)] = chosen.get((a, b), 0) + times
            inflow[b] += times
    others = [(u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v and (u, v) not in chosen]
    rng.shuffle(others)
    extra = rng.randint(0, max(0, min(max_edges - len(chosen), len(others))))
    edges = []
    for key in sorted(list(chosen) + others[:extra]):
        cap = rng.choice(caps)
        if key in chosen and cap != INF:
            cap = max(cap, chosen[key])
        edges.append(Edge(key[0], key[1], rng.randint(0, max_cost), cap))
    demand = {}
    for v in range(1, n + 1):
        if rng.random() < 0.7:
            demand[v] = min(inflow[v], max_dem)
    return CFInstance(n, tuple(edges), demand)


def mixed_cf(rng: random.Random, max_repeat: int = 1, **kw) -> CFInstance:
    if rng.random() < 0.8:
        return planted_cf(rng, max_repeat=max_repeat, **kw)
    return random_cf(rng, **kw)


def random_uncapacitated(rng: random.Random, max_n: int = 6, max_edges: int = 10, max_dem: int = 2) -> CFInstance:
    """Unbounded capacities with at least one vertex outside D."""
    while True:
        inst = random_cf(rng, max_n=max_n, max_edges=max_edges, max_dem=max_dem, caps=(INF,))
        if inst.n >= 2 and len(inst.demand) < inst.n and inst.demand:
            return inst


def random_mvtsp(rng: random.Random, n: int, max_dem: int = 2, max_cost: int = 9, density: float = 1.0) -> MVTSPInstance:
    cost = {
        (u, v): rng.randint(0, max_cost)
        for u in range(1, n + 1)
        for v in range(1, n + 1)
        if u != v and rng.random() < density
    }
    demand = {v: rng.randint(0, max_dem) for v in range(1, n + 1)}
    return MVTSPInstance(n, cost, demand)


def cover_mvtsp(rng: random.Random, n: int, k: int, max_dem: int = 2, max_cost: int = 9) -> MVTSPInstance:
    """MVTSP instance whose allowed pairs all touch the first k vertices, so
    {1..k} is a vertex cover. Pairs inside the cover are allowed too."""
    cost: dict[tuple[int, int], int] = {}
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            if u != v and (u <= k or v <= k):
                cost[(u, v)] = rng.randint(0, max_cost)
    demand = {v: rng.randint(1 if v > k else 0, max_dem) for v in range(1, n + 1)}
    return MVTSPInstance(n, cost, demand)


def planted_cover_mvtsp(
    rng: random.Random, n: int, k: int, max_visits: int = 2, max_cost: int = 9, density: float = 0.8
) -> MVTSPInstance:
    """Feasible MVTSP instance with vertex cover {1..k}: demands are the visit
    counts of a planted closed walk that alternates between the cover and the
    independent vertices (with an occasional step inside the cover)."""
    xs = list(range(1, k + 1))
    pairs = [(rng.choice(xs), b) for b in range(k + 1, n + 1) for _ in range(rng.randint(1, max_visits))]
    rng.shuffle(pairs)
    walk = [v for p in pairs for v in p]
    if k >= 2 and rng.random() < 0.5:
        walk.insert(0, rng.choice(xs))
    if not walk and k >= 2:
        walk = xs[:2]
    # a cover vertex repeated back to back is one visit, not a self-loop
    steps = [(a, b) for a, b in zip(walk, walk[1:] + walk[:1]) if a != b]
    used = set(steps)
    visits = {v: 0 for v in range(1, n + 1)}
    for _, b in steps:
        visits[b] += 1
    cost: dict[tuple[int, int], int] = {}
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            if u != v and (u <= k or v <= k) and ((u, v) in used or rng.random() < density):
                cost[(u, v)] = rng.randint(0, max_cost)
    return MVTSPInstance(n, cost, visits)


def cycle_rank(inst: CFInstance) -> int:
    """Cycle rank of the edge multigraph, antiparallel pairs counted twice."""
    pairs = [e.key for e in inst.edges]
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    merges = 0
    for u, v in pairs:
        a, b = find(u), find(v)
        if a != b:
            parent[a] = b
            merges += 1
    return len(pairs) - merges


def big_demand_cf(
    rng: random.Random, max_n: int = 4, max_mult: int = 10_000, extra: int = 2, demand_fraction: float = 0.8
) -> CFInstance:
    """Small instance with large demands: one or two planted cycles walked up
    to max_mult times each, plus a few extra edges. Capacities are unbounded or
    a random slack above the planted multiplicity."""
    n = rng.randint(2, max_n)
    chosen: dict[tuple[int, int], int] = {}
    inflow = {v: 0 for v in range(1, n + 1)}
    for _ in range(rng.randint(1, 2)):
        cycle = rng.sample(range(1, n + 1), rng.randint(2, n))
        times = rng.randint(1, max_mult)
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            chosen[(a, b)] = chosen.get((a, b), 0) + times
            inflow[b] += times
    others = [(u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v and (u, v) not in chosen]
    rng.shuffle(others)
    edges = []
    for key in sorted(list(chosen) + others[: rng.randint(0, extra)]):
        cap = INF if rng.random() < 0.6 else chosen.get(key, 0) + rng.randint(0, max_mult // 3 + 1)
        edges.append(Edge(key[0], key[1], rng.randint(0, 9), cap))
    demand = {v: inflow[v] for v in range(1, n + 1) if inflow[v] and rng.random() < demand_fraction}
    return CFInstance(n, tuple(edges), demand)
