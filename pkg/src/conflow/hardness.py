"""Instance generators for two hardness constructions.

* Two vertex-disjoint paths in a digraph become a Connected Flow instance with
  two demand vertices (vertex splitting, unit capacities, zero costs).
* A 3-CNF formula becomes a symmetric zero-cost MVTSP instance: a grid of
  l/r vertices whose flow values encode groups of s variables, one scanner
  gadget per clause built from 2-label gadgets, and a path a_1..a_{m+1}
  threading the scanners together.

Both come with a witness constructor and a decoder.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from conflow.instance import INF, CFInstance, Edge, Flow, MVTSPInstance, ParseError, mvtsp_to_cf, verify_solution
from conflow.treedec import TreeDecomposition, validate

MAX_GROUP_SIZE = 40

# -- two vertex-disjoint paths ----------------------------------------------


@dataclass(frozen=True)
class DisjointPathsQuery:
    n: int
    arcs: tuple[tuple[int, int], ...]
    s1: int
    t1: int
    s2: int
    t2: int

    def __post_init__(self) -> None:
        terms = (self.s1, self.t1, self.s2, self.t2)
        if any(not 1 <= v <= self.n for v in terms):
            raise ValueError("terminal out of range")
        if len(set(terms)) != 4:
            raise ValueError("terminals must be pairwise distinct")
        for u, v in self.arcs:
            if not (1 <= u <= self.n and 1 <= v <= self.n) or u == v:
                raise ValueError(f"bad arc {(u, v)}")

    @property
    def terminals(self) -> tuple[int, int, int, int]:
        return (self.s1, self.t1, self.s2, self.t2)


@dataclass
class SplitLayout:
    """Vertex ids of the split instance: terminals s1, t1, s2, t2 are 1..4,
    every other vertex v gets an in-copy and an out-copy."""

    terminal_ids: dict[int, int]
    in_id: dict[int, int]
    out_id: dict[int, int]

    def original(self, vid: int) -> int:
        for table in (self.terminal_ids, self.in_id, self.out_id):
            for v, t in table.items():
                if t == vid:
                    return v
        raise KeyError(vid)


def parse_digraph(text: str | bytes) -> tuple[int, list[tuple[int, int]]]:
    """`p digraph <n> <m>` followed by `a <u> <v>` lines; `c` lines are comments."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    n = None
    arcs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tok = raw.split()
        if not tok or tok[0] == "c":
            continue
        try:
            if tok[0] == "p" and tok[1] == "digraph" and len(tok) == 4:
                n, declared = int(tok[2]), int(tok[3])
            elif tok[0] == "a" and len(tok) == 3 and n is not None:
                arcs.append((int(tok[1]), int(tok[2])))
            else:
                raise ParseError(lineno, f"unexpected line {raw!r}")
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(lineno, f"malformed line {raw!r}") from None
    if n is None:
        raise ParseError(0, "missing 'p digraph' header")
    if len(arcs) != declared:
        raise ParseError(0, f"header announces {declared} arcs, found {len(arcs)}")
    return n, arcs


def gen_disjoint_paths_instance(q: DisjointPathsQuery) -> tuple[CFInstance, SplitLayout]:
    terminal_ids = {q.s1: 1, q.t1: 2, q.s2: 3, q.t2: 4}
    inner = [v for v in range(1, q.n + 1) if v not in terminal_ids]
    in_id = {v: 5 + 2 * t for t, v in enumerate(inner)}
    out_id = {v: 6 + 2 * t for t, v in enumerate(inner)}
    keys: set[tuple[int, int]] = {(in_id[v], out_id[v]) for v in inner}
    sources = {q.s1: 1, q.s2: 3}
    sinks = {q.t1: 2, q.t2: 4}
    for u, v in q.arcs:
        if u in sources and v in in_id:
            keys.add((sources[u], in_id[v]))
        elif u in out_id and v in sinks:
            keys.add((out_id[u], sinks[v]))
        elif u in out_id and v in in_id:
            keys.add((out_id[u], in_id[v]))
        elif (u, v) in ((q.s1, q.t1), (q.s2, q.t2)):
            keys.add((sources[u], sinks[v]))
    keys |= {(2, 3), (4, 1)}
    edges = tuple(Edge(a, b, 0, 1) for a, b in sorted(keys))
    inst = CFInstance(4 + 2 * len(inner), edges, {1: 1, 3: 1})
    return inst, SplitLayout(terminal_ids, in_id, out_id)


def _check_path(q: DisjointPathsQuery, path: Sequence[int], s: int, t: int) -> None:
    arcs = set(q.arcs)
    if len(path) < 2 or path[0] != s or path[-1] != t:
        raise ValueError(f"path must run from {s} to {t}")
    if len(set(path)) != len(path):
        raise ValueError("path repeats a vertex")
    if any(v in q.terminals for v in path[1:-1]):
        raise ValueError("path passes through a terminal")
    for a, b in zip(path, path[1:]):
        if (a, b) not in arcs:
            raise ValueError(f"arc {(a, b)} is not in the graph")


def witness_flow_from_paths(
    q: DisjointPathsQuery, p1: Sequence[int], p2: Sequence[int], layout: SplitLayout | None = None
) -> Flow:
    _check_path(q, p1, q.s1, q.t1)
    _check_path(q, p2, q.s2, q.t2)
    if set(p1) & set(p2):
        raise ValueError("paths are not vertex-disjoint")
    layout = layout or gen_disjoint_paths_instance(q)[1]
    flow: Flow = {(2, 3): 1, (4, 1): 1}
    for path in (p1, p2):
        prev = layout.terminal_ids[path[0]]
        for v in path[1:-1]:
            flow[(prev, layout.in_id[v])] = 1
            flow[(layout.in_id[v], layout.out_id[v])] = 1
            prev = layout.out_id[v]
        flow[(prev, layout.terminal_ids[path[-1]])] = 1
    return dict(sorted(flow.items()))


def decode_disjoint_paths(
    inst: CFInstance, layout: SplitLayout, flow: Mapping[tuple[int, int], int]
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    rep = verify_solution(inst, flow)
    if not rep.ok:
        raise ValueError(f"flow is not a valid solution: {rep.first_violation}")
    succ = {u: v for (u, v), m in flow.items() if m > 0}

    def follow(start: int, stop: int) -> tuple[int, ...]:
        out = [layout.original(start)]
        cur = start
        while cur != stop:
            cur = succ[cur]
            v = layout.original(cur)
            if v != out[-1]:
                out.append(v)
        return tuple(out)

    return follow(1, 2), follow(3, 4)


# -- 3-CNF to MVTSP ---------------------------------------------------------


@dataclass(frozen=True)
class CnfFormula:
    n: int
    clauses: tuple[tuple[int, ...], ...]  # DIMACS literals: +v / -v

    def __post_init__(self) -> None:
        for c in self.clauses:
            if len(c) > 3:
                raise ValueError(f"clause {c} has more than three literals")
            if any(lit == 0 or abs(lit) > self.n for lit in c):
                raise ValueError(f"clause {c} names an unknown variable")

    def satisfied_by(self, chi: Mapping[int, bool]) -> bool:
        return all(any(chi[abs(lit)] == (lit > 0) for lit in c) for c in self.clauses)

    def models(self) -> list[dict[int, bool]]:
        out = []
        for bits in itertools.product((False, True), repeat=self.n):
            chi = {v: bits[v - 1] for v in range(1, self.n + 1)}
            if self.satisfied_by(chi):
                out.append(chi)
        return out


def parse_dimacs(text: str | bytes) -> CnfFormula:
    if isinstance(text, bytes):
        text = text.decode("ascii")
    header = None
    lits: list[int] = []
    clauses: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tok = raw.split()
        if not tok or tok[0] == "c":
            continue
        if tok[0] == "%":
            break
        if tok[0] == "p":
            if len(tok) != 4 or tok[1] != "cnf":
                raise ParseError(lineno, "expected 'p cnf <vars> <clauses>'")
            header = (int(tok[2]), int(tok[3]))
            continue
        if header is None:
            raise ParseError(lineno, "clause before header")
        for t in tok:
            try:
                lit = int(t)
            except ValueError:
                raise ParseError(lineno, f"bad literal {t!r}") from None
            if lit == 0:
                clauses.append(tuple(lits))
                lits = []
            else:
                lits.append(lit)
    if header is None:
        raise ParseError(0, "missing 'p cnf' header")
    if lits:
        clauses.append(tuple(lits))
    if len(clauses) != header[1]:
        raise ParseError(0, f"header announces {header[1]} clauses, found {len(clauses)}")
    try:
        return CnfFormula(header[0], tuple(clauses))
    except ValueError as exc:
        raise ParseError(0, str(exc)) from None


def write_dimacs(phi: CnfFormula) -> str:
    lines = [f"p cnf {phi.n} {len(phi.clauses)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in phi.clauses]
    return "\n".join(lines) + "\n"


# 2-label gadget: internal edges by position 1..9, ports v1/v7 (label 1) and v3/v9 (label 2)
GADGET_EDGES = ((1, 2), (2, 3), (1, 4), (4, 5), (4, 9), (5, 6), (3, 6), (6, 7), (7, 8), (8, 9))
# Hamiltonian paths through the gadget, one per label
LABEL1_ROUTE = (1, 2, 3, 6, 5, 4, 9, 8, 7)
LABEL2_ROUTE = (3, 2, 1, 4, 5, 6, 7, 8, 9)


@dataclass
class Scanner:
    clause: int
    groups: tuple[int, ...]  # distinct groups touched by the clause
    family: list[tuple[int, ...]]  # multiplicity per group, one tuple per member
    s_ids: list[int]
    # per member: list of (group, nine gadget vertex ids)
    paths: list[list[tuple[int, tuple[int, ...]]]]

    @property
    def units(self) -> int:
        return 2 + 2 * len(self.groups) + len(self.family) + sum(len(p) for p in self.paths)


@dataclass
class SatReductionMeta:
    s: int
    n_vars: int
    padded: int
    groups: int
    clauses: tuple[tuple[int, ...], ...]
    duplicated: bool
    l_ids: dict[tuple[int, int], int]
    r_ids: dict[tuple[int, int], int]
    a_ids: list[int]
    scanners: list[Scanner] = field(default_factory=list)
    n_vertices: int = 0

    def lines(self) -> list[str]:
        out = [
            "c layout of a 3-CNF to MVTSP instance",
            "c h <group-size> <variables> <dummy-variables> <groups> <clauses> <first-clause-duplicated> <vertices>",
            "c l|r <clause> <group> <id>; a <index> <id>; k <clause> <groups...>",
            "c s <clause> <index> <id>; m <clause> <member> <multiplicities...>",
            "c p <clause> <member> <position> <group> <v1..v9>",
            f"h {self.s} {self.n_vars} {self.padded - self.n_vars} {self.groups} {len(self.clauses)} "
            f"{int(self.duplicated)} {self.n_vertices}",
        ]
        for (i, j), vid in sorted(self.l_ids.items()):
            out.append(f"l {i} {j} {vid}")
            out.append(f"r {i} {j} {self.r_ids[(i, j)]}")
        out += [f"a {t} {vid}" for t, vid in enumerate(self.a_ids, start=1)]
        for sc in self.scanners:
            out.append(f"k {sc.clause} " + " ".join(map(str, sc.groups)))
            out += [f"s {sc.clause} {t} {vid}" for t, vid in enumerate(sc.s_ids, start=1)]
            for t, member in enumerate(sc.family, start=1):
                out.append(f"m {sc.clause} {t} " + " ".join(map(str, member)))
                for pos, (grp, ids) in enumerate(sc.paths[t - 1], start=1):
                    out.append(f"p {sc.clause} {t} {pos} {grp} " + " ".join(map(str, ids)))
        return out


def group_of(var: int, s: int) -> int:
    return (var - 1) // s + 1


def encode_group(chi: Mapping[int, bool], j: int, s: int) -> int:
    """q with q - 1 = sum of 2^(k-1) over the true variables k of group j."""
    return 1 + sum(1 << (k - 1) for k in range(1, s + 1) if chi.get((j - 1) * s + k, False))


def decode_group(q: int, j: int, s: int) -> dict[int, bool]:
    return {(j - 1) * s + k: bool((q - 1) >> (k - 1) & 1) for k in range(1, s + 1)}


def clause_family(clause: Sequence[int], s: int) -> tuple[tuple[int, ...], list[tuple[int, ...]]]:
    groups = tuple(sorted({group_of(abs(lit), s) for lit in clause}))
    family = []
    for qs in itertools.product(range(1, (1 << s) + 1), repeat=len(groups)):
        chi: dict[int, bool] = {}
        for j, q in zip(groups, qs):
            chi.update(decode_group(q, j, s))
        if any(chi[abs(lit)] == (lit > 0) for lit in clause):
            family.append(qs)
    return groups, family


def unit_bound(s: int) -> int:
    return 2 ** (3 * s + 3)


def _sat_graph(phi: CnfFormula, s: int) -> tuple[set[tuple[int, int]], dict[int, int], SatReductionMeta]:
    if not 1 <= s <= MAX_GROUP_SIZE:
        raise ValueError(f"group size must lie in 1..{MAX_GROUP_SIZE}")
    if not phi.clauses:
        raise ValueError("formula has no clauses")
    padded = -(-phi.n // s) * s
    g = padded // s
    clauses = phi.clauses
    # with one clause the wrap-around edge r_1j - l_1j would coincide with the scanned edge
    duplicated = len(clauses) == 1
    if duplicated:
        clauses = clauses * 2
    m = len(clauses)
    top = 1 << s
    l_ids = {(i, j): 1 + (i - 1) * 2 * g + 2 * (j - 1) for i in range(1, m + 1) for j in range(1, g + 1)}
    r_ids = {key: vid + 1 for key, vid in l_ids.items()}
    a_ids = [2 * m * g + t for t in range(1, m + 2)]
    meta = SatReductionMeta(s, phi.n, padded, g, clauses, duplicated, l_ids, r_ids, a_ids)
    demand = {vid: top for vid in list(l_ids.values()) + list(r_ids.values())}
    for j in range(1, g + 1):
        demand[l_ids[(1, j)]] = top + 1
    for vid in a_ids:
        demand[vid] = 1
    edges: set[tuple[int, int]] = set()

    def link(u: int, v: int) -> None:
        edges.add((min(u, v), max(u, v)))

    for j in range(1, g):
        link(l_ids[(1, j)], l_ids[(1, j + 1)])
    for i in range(1, m + 1):
        for j in range(1, g + 1):
            nxt = l_ids[(i + 1, j)] if i < m else l_ids[(1, j)]
            link(r_ids[(i, j)], nxt)
    link(l_ids[(1, 1)], a_ids[0])
    link(a_ids[-1], l_ids[(1, g)])

    next_id = a_ids[-1] + 1
    for i, clause in enumerate(clauses, start=1):
        groups, family = clause_family(clause, s)
        if not family:
            raise ValueError(f"clause {i} admits no satisfying tuple")
        s_ids = list(range(next_id, next_id + len(family)))
        next_id += len(family)
        paths: list[list[tuple[int, tuple[int, ...]]]] = []
        for member in family:
            path = []
            for j, q in zip(groups, member):
                for _ in range(q):
                    path.append((j, tuple(range(next_id, next_id + 9))))
                    next_id += 9
            paths.append(path)
        sc = Scanner(i, groups, family, s_ids, paths)
        if sc.units > unit_bound(s):
            raise AssertionError(f"clause {i}: {sc.units} gadget units exceed {unit_bound(s)}")
        meta.scanners.append(sc)
        for vid in s_ids:
            demand[vid] = 1
        a, b = a_ids[i - 1], a_ids[i]
        link(a, s_ids[0])
        link(s_ids[-1], b)
        last = len(family)
        for t, path in enumerate(paths, start=1):
            for j, ids in path:
                for x, y in GADGET_EDGES:
                    link(ids[x - 1], ids[y - 1])
                link(l_ids[(i, j)], ids[2])
                link(r_ids[(i, j)], ids[8])
                for vid in ids:
                    demand[vid] = 1
            for (_, left), (_, right) in zip(path, path[1:]):
                link(left[6], right[0])
            first_v1, last_v7 = path[0][1][0], path[-1][1][6]
            if t > 1:
                link(first_v1, s_ids[t - 2])
            link(first_v1, s_ids[t - 1])
            link(last_v7, s_ids[t - 1])
            if t < last:
                link(last_v7, s_ids[t])
        for j in range(1, g + 1):
            if j not in groups:
                link(l_ids[(i, j)], r_ids[(i, j)])
    meta.n_vertices = next_id - 1
    return edges, demand, meta


def gen_sat_instance(phi: CnfFormula, s: int) -> tuple[MVTSPInstance, SatReductionMeta]:
    edges, demand, meta = _sat_graph(phi, s)
    cost = {}
    for u, v in edges:
        cost[(u, v)] = 0
        cost[(v, u)] = 0
    return MVTSPInstance(meta.n_vertices, dict(sorted(cost.items())), demand), meta


def _euler_orientation(mult: Counter) -> Flow:
    """Orient an undirected multigraph with even degrees and connected support
    along a closed Euler walk (Hierholzer), starting at the smallest vertex."""
    adj: dict[int, Counter] = {}
    for (u, v), k in mult.items():
        if k:
            adj.setdefault(u, Counter())[v] += k
            adj.setdefault(v, Counter())[u] += k
    if not adj:
        return {}
    order = {u: sorted(nbrs) for u, nbrs in adj.items()}
    cursor = {u: 0 for u in adj}
    flow: Counter = Counter()
    start = min(adj)
    stack = [start]
    while stack:
        u = stack[-1]
        nbrs = order[u]
        while cursor[u] < len(nbrs) and adj[u][nbrs[cursor[u]]] == 0:
            cursor[u] += 1
        if cursor[u] == len(nbrs):
            stack.pop()
            if stack:
                flow[(stack[-1], u)] += 1
            continue
        v = nbrs[cursor[u]]
        adj[u][v] -= 1
        adj[v][u] -= 1
        stack.append(v)
    return dict(sorted(flow.items()))


def witness_tour_from_assignment(phi: CnfFormula, chi: Mapping[int, bool], meta: SatReductionMeta) -> Flow:
    if not phi.satisfied_by(chi):
        raise ValueError("assignment does not satisfy the formula")
    s, g, top = meta.s, meta.groups, 1 << meta.s
    m = len(meta.clauses)
    L, R, A = meta.l_ids, meta.r_ids, meta.a_ids
    q = {j: encode_group(chi, j, s) for j in range(1, g + 1)}
    c: Counter = Counter()

    def use(u: int, v: int, k: int = 1) -> None:
        c[(min(u, v), max(u, v))] += k

    for j in range(1, g):
        use(L[(1, j)], L[(1, j + 1)])
    use(L[(1, 1)], A[0])
    use(A[-1], L[(1, g)])
    for i in range(1, m + 1):
        for j in range(1, g + 1):
            nxt = L[(i + 1, j)] if i < m else L[(1, j)]
            use(R[(i, j)], nxt, 2 * top - q[j])
    for sc in meta.scanners:
        i = sc.clause
        chosen = sc.family.index(tuple(q[j] for j in sc.groups))
        for j in range(1, g + 1):
            if j not in sc.groups:
                use(L[(i, j)], R[(i, j)], q[j])
        # the skipped member's gadgets carry the scanned l-r edges
        for j, ids in sc.paths[chosen]:
            route = [L[(i, j)]] + [ids[p - 1] for p in LABEL2_ROUTE] + [R[(i, j)]]
            for a, b in zip(route, route[1:]):
                use(a, b)
        # a_i, s_1, (one member path), s_2, ..., s_l, a_{i+1}
        walk = [A[i - 1], sc.s_ids[0]]
        for t in range(1, len(sc.family)):
            member = t - 1 if t - 1 < chosen else t
            for pos, (_, ids) in enumerate(sc.paths[member]):
                walk += [ids[p - 1] for p in LABEL1_ROUTE]
            walk.append(sc.s_ids[t])
        walk.append(A[i])
        for a, b in zip(walk, walk[1:]):
            use(a, b)
    return _euler_orientation(c)


def decode_assignment(m_inst: MVTSPInstance, flow: Mapping[tuple[int, int], int], meta: SatReductionMeta) -> dict[int, bool]:
    rep = verify_solution(mvtsp_to_cf(m_inst), flow)
    if not rep.ok:
        raise ValueError(f"flow is not a valid tour: {rep.first_violation}")

    def both(u: int, v: int) -> int:
        return flow.get((u, v), 0) + flow.get((v, u), 0)

    first = meta.scanners[0]
    chi: dict[int, bool] = {}
    for j in range(1, meta.groups + 1):
        lj, rj = meta.l_ids[(1, j)], meta.r_ids[(1, j)]
        if j in first.groups:
            q = sum(both(lj, ids[2]) for path in first.paths for grp, ids in path if grp == j)
        else:
            q = both(lj, rj)
        if not 1 <= q <= 1 << meta.s:
            raise ValueError(f"group {j} carries {q} units, outside 1..{1 << meta.s}")
        chi.update(decode_group(q, j, meta.s))
    return {v: chi[v] for v in range(1, meta.n_vars + 1)}


def scanner_decomposition(meta: SatReductionMeta, sc: Scanner) -> list[frozenset[int]]:
    """Path decomposition of one scanner gadget with the scanned vertices in
    every bag; consecutive gadgets of a member path share a bag."""
    i = sc.clause
    X = {meta.l_ids[(i, j)] for j in sc.groups} | {meta.r_ids[(i, j)] for j in sc.groups}
    a, b = meta.a_ids[i - 1], meta.a_ids[i]
    l = len(sc.s_ids)
    bags = [frozenset(X | {a, sc.s_ids[0]})]
    for t, path in enumerate(sc.paths, start=1):
        near = {sc.s_ids[u - 1] for u in (t - 1, t, t + 1) if 1 <= u <= l}
        for pos, (_, ids) in enumerate(path):
            bag = X | near | set(ids)
            if pos + 1 < len(path):
                bag |= set(path[pos + 1][1])
            bags.append(frozenset(bag))
    bags.append(frozenset(X | {b, sc.s_ids[-1]}))
    return bags


def _path_td(bags: list[frozenset[int]], n: int) -> TreeDecomposition:
    return TreeDecomposition(bags, [(t, t + 1) for t in range(len(bags) - 1)], 0, n)


def sat_path_decomposition(meta: SatReductionMeta) -> TreeDecomposition:
    g = meta.groups
    m = len(meta.clauses)
    top_row = {meta.l_ids[(1, j)] for j in range(1, g + 1)}
    bags: list[frozenset[int]] = []
    for sc in meta.scanners:
        i = sc.clause
        row = {meta.l_ids[(i, j)] for j in range(1, g + 1)} | {meta.r_ids[(i, j)] for j in range(1, g + 1)}
        for w in scanner_decomposition(meta, sc):
            bags.append(frozenset(top_row | row | w))
        if i < m:
            sep = {meta.l_ids[(i + 1, j)] for j in range(1, g + 1)} | {meta.r_ids[(i, j)] for j in range(1, g + 1)}
            # a_{i+1} closes scanner i and opens scanner i+1
            bags.append(frozenset(top_row | sep | {meta.a_ids[i]}))
    return _path_td(bags, meta.n_vertices)


def check_decompositions(m_inst: MVTSPInstance, meta: SatReductionMeta) -> tuple[int, list[int]]:
    """Validate the whole-instance and per-scanner path decompositions.
    Returns (whole width, per-scanner widths)."""
    edges = sorted({(min(u, v), max(u, v)) for u, v in m_inst.cost})
    whole = sat_path_decomposition(meta)
    validate(whole, m_inst.n, edges)
    widths = []
    for sc in meta.scanners:
        bags = scanner_decomposition(meta, sc)
        verts = set().union(*bags)
        own = _scanner_vertices(sc)
        local = [(u, v) for u, v in edges if u in verts and v in verts and (u in own or v in own)]
        td = _path_td(bags, 0)
        _validate_subgraph(td, verts, local)
        widths.append(td.width)
    return whole.width, widths


def _scanner_vertices(sc: Scanner) -> set[int]:
    return set(sc.s_ids) | {x for path in sc.paths for _, ids in path for x in ids}


def _validate_subgraph(td: TreeDecomposition, verts: set[int], edges: Iterable[tuple[int, int]]) -> None:
    rename = {v: t for t, v in enumerate(sorted(verts), start=1)}
    local = TreeDecomposition([frozenset(rename[v] for v in b) for b in td.bags], td.edges, 0, len(rename))
    validate(local, len(rename), [(rename[u], rename[v]) for u, v in edges])


# -- 2-label gadget harness -------------------------------------------------

HARNESS_PORTS = {10: 1, 11: 7, 12: 3, 13: 9}  # harness vertex -> gadget port


def two_label_harness() -> CFInstance:
    """The gadget (vertices 1..9) with each port tied to one vertex of the
    4-cycle 10-11-12-13; every vertex has demand 1 and all costs are 0."""
    pairs = list(GADGET_EDGES) + list((h, p) for h, p in HARNESS_PORTS.items())
    pairs += [(10, 11), (11, 12), (12, 13), (10, 13)]
    keys = sorted({(u, v) for a, b in pairs for u, v in ((a, b), (b, a))})
    return CFInstance(13, tuple(Edge(u, v, 0, INF) for u, v in keys), {v: 1 for v in range(1, 14)})


def gadget_segments(flow: Mapping[tuple[int, int], int], inside: Iterable[int] = range(1, 10)) -> list[tuple[int, int]]:
    """Endpoints (entry, exit) of each maximal stretch a unit-demand tour
    spends inside `inside`."""
    inside = set(inside)
    succ = {u: v for (u, v), k in flow.items() if k > 0}
    start = min(succ)
    cycle = [start]
    while succ[cycle[-1]] != start:
        cycle.append(succ[cycle[-1]])
    # rotate so the cycle begins outside
    outside = [t for t, v in enumerate(cycle) if v not in inside]
    if not outside:
        return []
    cycle = cycle[outside[0]:] + cycle[: outside[0]]
    segs = []
    run: list[int] = []
    for v in cycle + [cycle[0]]:
        if v in inside:
            run.append(v)
        elif run:
            segs.append((run[0], run[-1]))
            run = []
    return segs
