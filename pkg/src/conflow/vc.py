"""Exact solver parameterized by a vertex cover of the underlying graph.

For every subset X' of the cover the solver guesses that exactly X' is
visited, attaches a unit "visit me" loop to each non-demand member of X',
and runs a dynamic program over the independent vertices one at a time. The
table tracks how the X' vertices are connected (a partition) and their in/out
degrees so far. Degrees are only tracked within 4k of the degrees of a relaxed
optimum, which is what keeps the table small.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
import threading
from typing import Callable, Iterator, Sequence

from conflow.instance import INF, CFInstance, Edge, Flow, verify_solution
from conflow.relaxation import solve_relaxation
from conflow.result import SolveResult, Status, infeasible

Partition = tuple[tuple[int, ...], ...]

# stands in for an unbounded capacity in integer bookkeeping
_BIG = 10**15


@dataclass(frozen=True)
class VertexCover:
    vertices: frozenset[int]
    exact: bool = True


def _undirected_edges(inst: CFInstance) -> list[tuple[int, int]]:
    return sorted({(min(e.tail, e.head), max(e.tail, e.head)) for e in inst.edges})


def is_vertex_cover(inst: CFInstance, cover: Sequence[int] | frozenset[int]) -> bool:
    cs = set(cover)
    return all(u in cs or v in cs for u, v in _undirected_edges(inst))


def compute_vertex_cover(inst: CFInstance, k_max: int = 12) -> VertexCover:
    """Minimum cover by bounded branching if one of size <= k_max exists,
    otherwise a maximal-matching 2-approximation."""
    edges = _undirected_edges(inst)

    def branch(remaining: list[tuple[int, int]], budget: int) -> frozenset[int] | None:
        if not remaining:
            return frozenset()
        if budget == 0:
            return None
        u, v = remaining[0]
        for pick in (u, v):
            sub = branch([e for e in remaining if pick not in e], budget - 1)
            if sub is not None:
                return sub | {pick}
        return None

    for k in range(k_max + 1):
        found = branch(edges, k)
        if found is not None:
            return VertexCover(found, True)
    matched: set[int] = set()
    for u, v in edges:
        if u not in matched and v not in matched:
            matched |= {u, v}
    return VertexCover(frozenset(matched), False)


@dataclass
class Subdivided:
    inst: CFInstance
    cover: tuple[int, ...]
    # subdivision vertex -> original edge it replaces
    origin: dict[int, tuple[int, int]] = field(default_factory=dict)

    def project(self, flow: Flow) -> Flow:
        out: Flow = {}
        for (u, v), m in flow.items():
            if u in self.origin:
                continue
            key = self.origin.get(v, (u, v))
            out[key] = out.get(key, 0) + m
        return dict(sorted(out.items()))


def subdivide_cover_edges(inst: CFInstance, cover: Sequence[int] | frozenset[int]) -> Subdivided:
    cs = set(cover)
    edges: list[Edge] = []
    origin: dict[int, tuple[int, int]] = {}
    n = inst.n
    for e in inst.edges:
        if e.tail in cs and e.head in cs:
            n += 1
            origin[n] = e.key
            edges.append(Edge(e.tail, n, e.cost, e.cap))
            edges.append(Edge(n, e.head, 0, e.cap))
        else:
            edges.append(e)
    return Subdivided(CFInstance(n, tuple(edges), inst.demand), tuple(sorted(cs)), origin)


def canonical(blocks: list[list[int]] | list[tuple[int, ...]]) -> Partition:
    return tuple(sorted(tuple(sorted(b)) for b in blocks if b))


def _vectors(caps: list[int], total: int | None, lo: list[int], hi: list[int]) -> Iterator[tuple[int, ...]]:
    """All integer vectors h with lo <= h <= min(hi, caps), optionally summing to `total`."""
    n = len(caps)
    upper = [min(c, h) for c, h in zip(caps, hi)]
    lower = [max(0, a) for a in lo]
    if any(a > b for a, b in zip(lower, upper)):
        return
    suffix_min = [0] * (n + 1)
    suffix_max = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_min[i] = suffix_min[i + 1] + lower[i]
        suffix_max[i] = suffix_max[i + 1] + upper[i]
    cur = [0] * n

    def rec(i: int, acc: int) -> Iterator[tuple[int, ...]]:
        if i == n:
            if total is None or acc == total:
                yield tuple(cur)
            return
        for val in range(lower[i], upper[i] + 1):
            if total is not None:
                rest = total - acc - val
                if rest < suffix_min[i + 1]:
                    break
                if rest > suffix_max[i + 1]:
                    continue
            cur[i] = val
            yield from rec(i + 1, acc + val)
        cur[i] = 0

    yield from rec(0, 0)


@dataclass
class SweepResult:
    cost: int
    flow: Flow
    states: int


def dp_sweep(
    inst: CFInstance,
    xs: Sequence[int],
    r: Flow,
    k: int,
    upper: Callable[[], float] = lambda: INF,
) -> SweepResult | None:
    """Cheapest flow on `inst` whose support joins all of `xs` into one
    component, restricted to degrees within 4k of the relaxed flow r.

    `xs` must be an independent vertex cover of `inst`. States costing more
    than upper() are dropped. Each layer is scanned in sorted key order and
    back-pointers only move on strict improvement, so the surviving entries
    and the reconstructed witness do not depend on the bound."""
    xs = tuple(sorted(xs))
    pos = {x: i for i, x in enumerate(xs)}
    kp = len(xs)
    bs = [v for v in inst.vertices if v not in pos]
    window = 4 * k
    dem = inst.demand

    # running sums of r over the prefix, the window centre
    r_out = [0] * kp
    r_in = [0] * kp
    zero = tuple([0] * kp)
    start = (canonical([[x] for x in xs]), zero, zero)
    table: dict = {start: 0}
    layers: list[dict] = []
    states = 1
    x_bound = [dem.get(x, INF) for x in xs]

    # capacity still available after the current prefix, per x and side
    cap_in_left = [0] * kp
    cap_out_left = [0] * kp
    for b in bs:
        for i, x in enumerate(xs):
            for e, side in ((inst.edge(b, x), cap_in_left), (inst.edge(x, b), cap_out_left)):
                if e is not None:
                    side[i] += _BIG if e.cap == INF else e.cap

    for b in bs:
        into_x = []  # (i, edge b->x_i)
        from_x = []  # (i, edge x_i->b)
        for i, x in enumerate(xs):
            e = inst.edge(b, x)
            if e is not None:
                into_x.append((i, e))
                r_in[i] += r.get(e.key, 0)
                cap_in_left[i] -= _BIG if e.cap == INF else e.cap
            e = inst.edge(x, b)
            if e is not None:
                from_x.append((i, e))
                r_out[i] += r.get(e.key, 0)
                cap_out_left[i] -= _BIG if e.cap == INF else e.cap
        new: dict = {}
        back: dict = {}
        need = dem.get(b)
        bound = upper()
        for pi, c_in, c_out in sorted(table):
            cost = table[(pi, c_in, c_out)]
            # h_in[t] goes on into_x[t] (raises c_in of that x), h_out on from_x
            lo_in = [r_in[i] - window - c_in[i] for i, _ in into_x]
            hi_in = [min(r_in[i] + window, x_bound[i]) - c_in[i] for i, _ in into_x]
            lo_out = [r_out[i] - window - c_out[i] for i, _ in from_x]
            hi_out = [min(r_out[i] + window, x_bound[i]) - c_out[i] for i, _ in from_x]
            # coordinates of x without an edge to b must already sit in the window
            ok = True
            touched_in = {i for i, _ in into_x}
            touched_out = {i for i, _ in from_x}
            for i in range(kp):
                if i not in touched_in and not (r_in[i] - window <= c_in[i] <= r_in[i] + window):
                    ok = False
                if i not in touched_out and not (r_out[i] - window <= c_out[i] <= r_out[i] + window):
                    ok = False
            if not ok:
                continue
            caps_in = [_BIG if e.cap == INF else e.cap for _, e in into_x]
            caps_out = [_BIG if e.cap == INF else e.cap for _, e in from_x]
            for h_out in _vectors(caps_out, need, lo_out, hi_out):
                total = sum(h_out)
                for h_in in _vectors(caps_in, total, lo_in, hi_in):
                    ci = list(c_in)
                    co = list(c_out)
                    add = 0
                    touched = set()
                    for (i, e), h in zip(into_x, h_in):
                        if h:
                            ci[i] += h
                            add += h * e.cost
                            touched.add(xs[i])
                    for (i, e), h in zip(from_x, h_out):
                        if h:
                            co[i] += h
                            add += h * e.cost
                            touched.add(xs[i])
                    if touched:
                        merged = [v for blk in pi if touched & set(blk) for v in blk]
                        rest = [blk for blk in pi if not touched & set(blk)]
                        npi = canonical(rest + [merged])
                    else:
                        npi = pi
                    val = cost + add
                    if val > bound or not _can_finish(ci, co, xs, dem, cap_in_left, cap_out_left):
                        continue
                    key = (npi, tuple(ci), tuple(co))
                    if key not in new or val < new[key]:
                        new[key] = val
                        back[key] = ((pi, c_in, c_out), b, h_in, h_out)
        layers.append((into_x, from_x, back))
        table = new
        states += len(table)
        if not table:
            return None

    best_key = None
    best_cost = None
    full = canonical([list(xs)])
    for key in sorted(table, key=lambda k: (table[k], k)):
        pi, c_in, c_out = key
        if pi != full or c_in != c_out:
            continue
        if any(x in dem and c_in[i] != dem[x] for i, x in enumerate(xs)):
            continue
        best_key, best_cost = key, table[key]
        break
    if best_key is None:
        return None

    flow: Flow = {}
    key = best_key
    for into_x, from_x, back in reversed(layers):
        prev, b, h_in, h_out = back[key]
        for (i, e), h in zip(into_x, h_in):
            if h:
                flow[e.key] = h
        for (i, e), h in zip(from_x, h_out):
            if h:
                flow[e.key] = h
        key = prev
    return SweepResult(best_cost, dict(sorted(flow.items())), states)


def _can_finish(ci: list[int], co: list[int], xs: Sequence[int], dem, cap_in_left, cap_out_left) -> bool:
    for i, x in enumerate(xs):
        if x in dem:
            if ci[i] + cap_in_left[i] < dem[x] or co[i] + cap_out_left[i] < dem[x]:
                return False
        elif ci[i] + cap_in_left[i] < co[i] or co[i] + cap_out_left[i] < ci[i]:
            return False
    return True


def gadget_instance(inst: CFInstance, cover: Sequence[int], chosen: Sequence[int]) -> tuple[CFInstance, dict[int, int]]:
    """Drop cover vertices outside `chosen` and give each non-demand chosen
    vertex x a private demand-1 vertex b_x on a unit zero-cost two-cycle.

    Vertex ids are kept; gadget vertices are numbered after inst.n. Returns the
    instance and the map b_x -> x."""
    dropped = set(cover) - set(chosen)
    edges = [e for e in inst.edges if e.tail not in dropped and e.head not in dropped]
    demand = {v: d for v, d in inst.demand.items() if v not in dropped}
    n = inst.n
    gadgets: dict[int, int] = {}
    for x in sorted(chosen):
        if x in inst.demand:
            continue
        n += 1
        gadgets[n] = x
        edges.append(Edge(x, n, 0, 1))
        edges.append(Edge(n, x, 0, 1))
        demand[n] = 1
    return CFInstance(n, tuple(edges), demand), gadgets


def _subsets(cover: tuple[int, ...]) -> list[tuple[int, ...]]:
    out = []
    for size in range(len(cover) + 1):
        out.extend(combinations(cover, size))
    return out


class _Incumbent:
    def __init__(self) -> None:
        self.value: float = INF
        self.lock = threading.Lock()

    def get(self) -> float:
        return self.value

    def offer(self, value: int) -> None:
        with self.lock:
            self.value = min(self.value, value)


def _solve_subset(
    sub: Subdivided, chosen: tuple[int, ...], k: int, incumbent: _Incumbent
) -> tuple[int, Flow, int] | None:
    inst = sub.inst
    if not chosen:
        if all(d == 0 for d in inst.demand.values()):
            incumbent.offer(0)
            return 0, {}, 0
        return None
    g, gadgets = gadget_instance(inst, sub.cover, chosen)
    # vertices removed with the dropped cover vertices become isolated; they
    # are harmless unless they carry demand, which the relaxation detects
    relaxed = solve_relaxation(g)
    if not relaxed.feasible:
        return None
    res = dp_sweep(g, chosen, relaxed.flow, k, incumbent.get)
    if res is None:
        return None
    incumbent.offer(res.cost)
    flow = {key: m for key, m in res.flow.items() if key[0] not in gadgets and key[1] not in gadgets}
    return res.cost, flow, res.states


def solve_vc_fpt(
    inst: CFInstance, cover: VertexCover | Sequence[int] | None = None, threads: int = 1
) -> SolveResult:
    if cover is None:
        cover = compute_vertex_cover(inst)
    verts = cover.vertices if isinstance(cover, VertexCover) else frozenset(cover)
    if not is_vertex_cover(inst, verts):
        raise ValueError("given set is not a vertex cover")
    sub = subdivide_cover_edges(inst, verts)
    k = len(verts)
    must = {x for x in sub.cover if inst.demand.get(x, 0) > 0}
    banned = {x for x in sub.cover if x in inst.demand and inst.demand[x] == 0}
    candidates = [c for c in _subsets(sub.cover) if must <= set(c) and not banned & set(c)]

    incumbent = _Incumbent()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda c: _solve_subset(sub, c, k, incumbent), candidates))
    else:
        outcomes = [_solve_subset(sub, c, k, incumbent) for c in candidates]

    best = None
    for chosen, out in zip(candidates, outcomes):
        if out is None:
            continue
        if best is None or out[0] < best[0]:
            best = (out[0], out[1], chosen)
    if best is None:
        return infeasible(subsets=len(candidates))
    flow = sub.project(best[1])
    rep = verify_solution(inst, flow)
    if not rep.ok or rep.cost != best[0]:
        raise AssertionError(f"vertex-cover DP produced an invalid witness: {rep}")
    return SolveResult(
        Status.OPTIMAL, best[0], flow, stats={"subsets": len(candidates), "chosen": best[2], "cover": sorted(verts)}
    )
