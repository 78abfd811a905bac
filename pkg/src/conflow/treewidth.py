"""Exact solver over a tree decomposition, plus demand-magnitude reduction.

Table keys at a nice-decomposition node are (partition of the bag, in-degrees,
out-degrees, sealed). The partition records which bag vertices are already
joined by the partial flow. `sealed` is set once a flow component has been
closed off by forgetting its last bag vertex; from then on nothing else may
carry flow.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from conflow.instance import INF, CFInstance, Edge, Flow, checked, support_components, verify_solution
from conflow.relaxation import solve_relaxation
from conflow.result import SolveResult, Status, infeasible
from conflow.treedec import NiceNode, TreeDecomposition, graph_edges, heuristic_td, make_nice, validate

Key = tuple[tuple[tuple[int, ...], ...], tuple[int, ...], tuple[int, ...], bool]


def _canon(blocks) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(tuple(sorted(b)) for b in blocks if b))


def degree_bounds(inst: CFInstance) -> dict[int, int]:
    """Per-vertex cap on in- and out-degree. Demand vertices are capped by
    their demand. A non-demand vertex is capped by the total demand: some
    optimum splits at demand visits into simple paths, each passing a
    non-demand vertex at most once. This never exceeds max-demand times n."""
    total = sum(inst.demand.values())
    return {v: inst.demand.get(v, total) for v in inst.vertices}


def _remaining_caps(nodes: list[NiceNode], inst: CFInstance) -> list[tuple[dict[int, int], dict[int, int]]]:
    """For every node, per vertex: capacity of edges NOT introduced inside its
    subtree, split into in-edges and out-edges."""
    big = 10**15
    tot_in: dict[int, int] = {v: 0 for v in inst.vertices}
    tot_out: dict[int, int] = {v: 0 for v in inst.vertices}
    for e in inst.edges:
        c = big if e.cap == INF else int(e.cap)
        tot_in[e.head] += c
        tot_out[e.tail] += c
    below: list[tuple[dict[int, int], dict[int, int]]] = []
    for node in nodes:
        got_in: dict[int, int] = {}
        got_out: dict[int, int] = {}
        for c in node.children:
            for src, dst in ((below[c][0], got_in), (below[c][1], got_out)):
                for v, x in src.items():
                    dst[v] = dst.get(v, 0) + x
        if node.kind == "edge":
            e = inst.edge(*node.edge)
            c = big if e.cap == INF else int(e.cap)
            got_out[e.tail] = got_out.get(e.tail, 0) + c
            got_in[e.head] = got_in.get(e.head, 0) + c
        below.append((got_in, got_out))
    return [
        ({v: tot_in[v] - gi.get(v, 0) for v in node.bag}, {v: tot_out[v] - go.get(v, 0) for v in node.bag})
        for node, (gi, go) in zip(nodes, below)
    ]


def solve_tw_dp(inst: CFInstance, td: TreeDecomposition | None = None) -> SolveResult:
    if td is None:
        td = heuristic_td(inst)
    validate(td, inst.n, graph_edges(inst))
    nodes, root = make_nice(td, inst)
    bound = degree_bounds(inst)
    dem = inst.demand
    left = _remaining_caps(nodes, inst)

    def viable(bag: tuple[int, ...], din: tuple[int, ...], dout: tuple[int, ...], rem) -> bool:
        rin, rout = rem
        for v, a, b in zip(bag, din, dout):
            if v in dem:
                if a + rin[v] < dem[v] or b + rout[v] < dem[v]:
                    return False
            elif a + rin[v] < b or b + rout[v] < a:
                return False
        return True

    tables: list[dict] = [None] * len(nodes)  # type: ignore[list-item]
    backs: list[dict] = [None] * len(nodes)  # type: ignore[list-item]
    total_states = 0
    for t, node in enumerate(nodes):
        table: dict = {}
        back: dict = {}

        def offer(key: Key, val: int, ptr) -> None:
            if key not in table or val < table[key]:
                table[key] = val
                back[key] = ptr

        bag = node.bag
        if node.kind == "leaf":
            offer(((), (), (), False), 0, None)
        elif node.kind == "intro":
            child = tables[node.children[0]]
            cbag = nodes[node.children[0]].bag
            i = bag.index(node.vertex)
            for key in sorted(child):
                pi, din, dout, sealed = key
                nkey = (_canon(pi + ((node.vertex,),)), din[:i] + (0,) + din[i:], dout[:i] + (0,) + dout[i:], sealed)
                if viable(bag, nkey[1], nkey[2], left[t]):
                    offer(nkey, child[key], key)
        elif node.kind == "forget":
            child = tables[node.children[0]]
            cbag = nodes[node.children[0]].bag
            v = node.vertex
            i = cbag.index(v)
            for key in sorted(child):
                pi, din, dout, sealed = key
                if din[i] != dout[i] or (v in dem and din[i] != dem[v]):
                    continue
                block = next(b for b in pi if v in b)
                rest = tuple(b for b in pi if v not in b)
                ndin, ndout = din[:i] + din[i + 1 :], dout[:i] + dout[i + 1 :]
                if len(block) == 1 and din[i] > 0:
                    # v's component is complete; nothing else may carry flow
                    if sealed or any(ndin) or any(ndout):
                        continue
                    nkey = (rest, ndin, ndout, True)
                else:
                    nkey = (_canon(rest + (tuple(x for x in block if x != v),)), ndin, ndout, sealed)
                offer(nkey, child[key], key)
        elif node.kind == "edge":
            child = tables[node.children[0]]
            e = inst.edge(*node.edge)
            iu, iv = bag.index(e.tail), bag.index(e.head)
            for key in sorted(child):
                pi, din, dout, sealed = key
                top = min(bound[e.tail] - dout[iu], bound[e.head] - din[iv])
                if e.cap != INF:
                    top = min(top, int(e.cap))
                if sealed:
                    top = 0
                for m in range(top + 1):
                    ndin = din[:iv] + (din[iv] + m,) + din[iv + 1 :]
                    ndout = dout[:iu] + (dout[iu] + m,) + dout[iu + 1 :]
                    if not viable(bag, ndin, ndout, left[t]):
                        continue
                    npi = pi
                    if m:
                        bu = next(b for b in pi if e.tail in b)
                        bv = next(b for b in pi if e.head in b)
                        if bu != bv:
                            npi = _canon(tuple(b for b in pi if b not in (bu, bv)) + (bu + bv,))
                    offer((npi, ndin, ndout, sealed), checked(child[key] + m * e.cost), (key, m))
        elif node.kind == "join":
            a, b = (tables[c] for c in node.children)
            for ka in sorted(a):
                for kb in sorted(b):
                    pa, ia, oa, sa = ka
                    pb, ib, ob, sb = kb
                    if sa and sb:
                        continue
                    if (sa and (any(ib) or any(ob))) or (sb and (any(ia) or any(oa))):
                        continue
                    din = tuple(x + y for x, y in zip(ia, ib))
                    dout = tuple(x + y for x, y in zip(oa, ob))
                    if any(x > bound[v] for v, x in zip(bag, din)) or any(x > bound[v] for v, x in zip(bag, dout)):
                        continue
                    if not viable(bag, din, dout, left[t]):
                        continue
                    offer((_join(pa, pb), din, dout, sa or sb), a[ka] + b[kb], (ka, kb))
        tables[t] = table
        backs[t] = back
        total_states += len(table)
        # children are no longer needed for value lookups, keep back-pointers only
        for c in node.children:
            tables[c] = {}

    final = tables[root]
    if not final:
        return infeasible(states=total_states, width=td.width)
    best_key = min(final, key=lambda k: (final[k], k))
    flow: Flow = {}
    stack = [(root, best_key)]
    while stack:
        t, key = stack.pop()
        node = nodes[t]
        ptr = backs[t][key]
        if node.kind == "leaf":
            continue
        if node.kind == "edge":
            ckey, m = ptr
            if m:
                flow[node.edge] = m
            stack.append((node.children[0], ckey))
        elif node.kind == "join":
            stack.append((node.children[0], ptr[0]))
            stack.append((node.children[1], ptr[1]))
        else:
            stack.append((node.children[0], ptr))
    flow = dict(sorted(flow.items()))
    rep = verify_solution(inst, flow)
    if not rep.ok or rep.cost != final[best_key]:
        raise AssertionError(f"tree-decomposition DP produced an invalid witness: {rep}")
    return SolveResult(Status.OPTIMAL, final[best_key], flow, total_states, {"states": total_states, "width": td.width})


def _join(pa, pb):
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for blocks in (pa, pb):
        for blk in blocks:
            for x in blk:
                parent.setdefault(x, x)
            for x in blk[1:]:
                ra, rb = find(blk[0]), find(x)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for x in parent:
        groups.setdefault(find(x), []).append(x)
    return _canon(groups.values())


# -- demand reduction -------------------------------------------------------


@dataclass
class DemandReductionCert:
    base_flow: Flow
    residual: CFInstance
    rounds: int


def _first_cycle(graph: Mapping[tuple[int, int], int]) -> list[tuple[int, int]] | None:
    """Directed cycle in the positive support of `graph`, found by depth-first
    search visiting smaller ids first; None if the support is acyclic."""
    succ: dict[int, list[int]] = {}
    for (u, v), m in sorted(graph.items()):
        if m > 0:
            succ.setdefault(u, []).append(v)
    state: dict[int, int] = {}  # 1 on the stack, 2 finished
    for root in sorted(succ):
        if root in state:
            continue
        path = [root]
        state[root] = 1
        iters = [iter(succ.get(root, []))]
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                state[path.pop()] = 2
                iters.pop()
            elif state.get(nxt) == 1:
                verts = path[path.index(nxt) :] + [nxt]
                return list(zip(verts, verts[1:]))
            elif nxt not in state:
                state[nxt] = 1
                path.append(nxt)
                iters.append(iter(succ.get(nxt, [])))
    return None


def _peel(r: Flow, n: int) -> Flow:
    """A maximal circulation f with f(e) <= max(r(e) - 2n - 1, 0), packed
    cycle by cycle. Removing cycles from r one unit at a time through
    over-full edges can drain f to zero even when such a circulation exists,
    so the cycles are packed under the targets instead."""
    slack = 2 * n + 1
    room = {e: m - slack for e, m in r.items() if m > slack}
    f: Flow = {}
    while True:
        cycle = _first_cycle(room)
        if cycle is None:
            return dict(sorted(f.items()))
        step = min(room[a] for a in cycle)
        for a in cycle:
            f[a] = f.get(a, 0) + step
            room[a] -= step


def reduce_demands(inst: CFInstance) -> DemandReductionCert:
    n = inst.n
    limit = 2 * n * n + n
    base: Flow = {}
    current = inst
    rounds = 0
    while any(d > limit for d in current.demand.values()):
        relaxed = solve_relaxation(current)
        if not relaxed.feasible:
            raise ValueError("relaxation is infeasible")
        f = _peel(relaxed.flow, n)
        if not f:
            raise AssertionError("no circulation fits under the peeling targets while demands are still large")
        rounds += 1
        for key, m in f.items():
            base[key] = base.get(key, 0) + m
        inflow: dict[int, int] = {}
        for (u, v), m in f.items():
            inflow[v] = inflow.get(v, 0) + m
        edges = tuple(
            Edge(e.tail, e.head, e.cost, e.cap if e.cap == INF else e.cap - f.get(e.key, 0)) for e in current.edges
        )
        demand = {v: d - inflow.get(v, 0) for v, d in current.demand.items()}
        current = CFInstance(n, edges, demand)
    return DemandReductionCert(dict(sorted(base.items())), current, rounds)


def compose(inst: CFInstance, cert: DemandReductionCert, residual_flow: Mapping[tuple[int, int], int]) -> Flow:
    """Residual solution plus base flow. Base components that the residual
    solution does not reach and that contain no demand vertex are dropped;
    they are circulations through non-demand vertices only."""
    total = dict(cert.base_flow)
    for key, m in residual_flow.items():
        total[key] = total.get(key, 0) + m
    comps = support_components(total)
    if len(comps) > 1:
        anchor = {v for key in residual_flow if residual_flow[key] > 0 for v in key}
        keep = [c for c in comps if c & anchor or c & set(inst.demand)]
        keep_vertices = set().union(*keep) if keep else set()
        total = {k: m for k, m in total.items() if k[0] in keep_vertices}
    return dict(sorted((k, m) for k, m in total.items() if m > 0))


def solve_with_reduction(inst: CFInstance, solver=None) -> SolveResult:
    """reduce_demands, solve the residual instance, and compose."""
    solver = solver or solve_tw_dp
    try:
        cert = reduce_demands(inst)
    except ValueError:
        return infeasible()
    res = solver(cert.residual)
    if not res.feasible:
        return res
    flow = compose(inst, cert, res.flow)
    rep = verify_solution(inst, flow)
    if not rep.ok:
        raise AssertionError(f"composed flow is invalid: {rep.first_violation}")
    return SolveResult(Status.OPTIMAL, rep.cost, flow, res.nodes_explored, {"rounds": cert.rounds})
