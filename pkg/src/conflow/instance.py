"""Instance model, file formats and solution verification.

Vertices are the integers 1..n. A flow is a plain dict mapping an ordered
pair (tail, head) to a positive multiplicity; missing pairs carry zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

INF = math.inf
INT64_MAX = 2**63 - 1

Cap = Union[int, float]
Flow = dict[tuple[int, int], int]


class ParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def checked(value: int) -> int:
    """Raise instead of silently exceeding the signed 64-bit range."""
    if value > INT64_MAX or value < -INT64_MAX - 1:
        raise OverflowError(f"integer overflow: {value}")
    return value


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    cost: int
    cap: Cap = INF

    @property
    def key(self) -> tuple[int, int]:
        return (self.tail, self.head)


@dataclass(frozen=True, eq=False)
class CFInstance:
    n: int
    edges: tuple[Edge, ...]
    demand: Mapping[int, int]
    _index: dict[tuple[int, int], Edge] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("negative vertex count")
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "demand", dict(self.demand))
        index: dict[tuple[int, int], Edge] = {}
        for e in self.edges:
            if not (1 <= e.tail <= self.n and 1 <= e.head <= self.n):
                raise ValueError(f"edge {e.key} out of range")
            if e.tail == e.head:
                raise ValueError(f"self-loop at {e.tail}")
            if e.key in index:
                raise ValueError(f"parallel edge {e.key}")
            if e.cost < 0 or e.cap < 0:
                raise ValueError(f"negative cost or capacity on {e.key}")
            if e.cap != INF and not isinstance(e.cap, int):
                raise ValueError(f"capacity on {e.key} must be an integer or INF")
            index[e.key] = e
        for v, d in self.demand.items():
            if not 1 <= v <= self.n:
                raise ValueError(f"demand vertex {v} out of range")
            if d < 0:
                raise ValueError(f"negative demand at {v}")
        object.__setattr__(self, "_index", index)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CFInstance):
            return NotImplemented
        return (
            self.n == other.n
            and sorted(self.edges, key=lambda e: e.key) == sorted(other.edges, key=lambda e: e.key)
            and dict(self.demand) == dict(other.demand)
        )

    def edge(self, u: int, v: int) -> Edge | None:
        return self._index.get((u, v))

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def out_edges(self) -> dict[int, list[Edge]]:
        out: dict[int, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.tail].append(e)
        return out

    def in_edges(self) -> dict[int, list[Edge]]:
        inc: dict[int, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            inc[e.head].append(e)
        return inc

    def flow_cost(self, flow: Mapping[tuple[int, int], int]) -> int:
        total = 0
        for key, mult in flow.items():
            total = checked(total + checked(self._index[key].cost * mult))
        return total


@dataclass(frozen=True)
class MVTSPInstance:
    n: int
    cost: Mapping[tuple[int, int], int]
    demand: Mapping[int, int]

    def __post_init__(self) -> None:
        for (u, v), c in self.cost.items():
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise ValueError(f"pair {(u, v)} out of range")
            if c < 0:
                raise ValueError(f"negative cost on {(u, v)}")
        if set(self.demand) != set(range(1, self.n + 1)):
            raise ValueError("demand must be given for every vertex")
        if any(d < 0 for d in self.demand.values()):
            raise ValueError("negative demand")


@dataclass(frozen=True)
class VerificationReport:
    conservation_ok: bool
    demands_ok: bool
    capacities_ok: bool
    connected_ok: bool
    cost: int
    first_violation: str | None = None

    @property
    def ok(self) -> bool:
        return self.conservation_ok and self.demands_ok and self.capacities_ok and self.connected_ok

    @property
    def relaxed_ok(self) -> bool:
        return self.conservation_ok and self.demands_ok and self.capacities_ok


# -- parsing ---------------------------------------------------------------


def _lines(text: str | bytes) -> Iterable[tuple[int, list[str]]]:
    if isinstance(text, bytes):
        text = text.decode("ascii")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens or tokens[0] == "c":
            continue
        yield lineno, tokens


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise ParseError(lineno, f"bad {what} {tok!r}") from None
    if value < 0:
        raise ParseError(lineno, f"negative {what} {value}")
    return value


def _vertex(tok: str, n: int, lineno: int) -> int:
    v = _int(tok, lineno, "vertex")
    if not 1 <= v <= n:
        raise ParseError(lineno, f"vertex {v} out of range 1..{n}")
    return v


def parse_cf(text: str | bytes) -> CFInstance:
    header = None
    demand: dict[int, int] = {}
    edges: list[Edge] = []
    seen: set[tuple[int, int]] = set()
    n = m = d = 0
    for lineno, tok in _lines(text):
        kind = tok[0]
        if header is None:
            if kind != "p" or len(tok) != 5 or tok[1] != "cf":
                raise ParseError(lineno, "expected header 'p cf <n> <m> <d>'")
            n, m, d = (_int(t, lineno, "header field") for t in tok[2:])
            header = lineno
            continue
        if kind == "d":
            if len(tok) != 3:
                raise ParseError(lineno, "expected 'd <v> <dem>'")
            v = _vertex(tok[1], n, lineno)
            if v in demand:
                raise ParseError(lineno, f"duplicate demand for vertex {v}")
            demand[v] = _int(tok[2], lineno, "demand")
        elif kind == "e":
            if len(tok) != 5:
                raise ParseError(lineno, "expected 'e <u> <v> <cost> <cap>'")
            u = _vertex(tok[1], n, lineno)
            v = _vertex(tok[2], n, lineno)
            if u == v:
                raise ParseError(lineno, f"self-loop at vertex {u}")
            if (u, v) in seen:
                raise ParseError(lineno, f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            cost = _int(tok[3], lineno, "cost")
            cap: Cap = INF if tok[4] == "inf" else _int(tok[4], lineno, "capacity")
            edges.append(Edge(u, v, cost, cap))
        else:
            raise ParseError(lineno, f"unknown line type {kind!r}")
    if header is None:
        raise ParseError(0, "missing header")
    if len(edges) != m:
        raise ParseError(header, f"header announces {m} edges, found {len(edges)}")
    if len(demand) != d:
        raise ParseError(header, f"header announces {d} demand lines, found {len(demand)}")
    return CFInstance(n, tuple(edges), demand)


def parse_mvtsp(text: str | bytes) -> MVTSPInstance:
    header = None
    n = 0
    demand: dict[int, int] = {}
    cost: dict[tuple[int, int], int] = {}
    for lineno, tok in _lines(text):
        kind = tok[0]
        if header is None:
            if kind != "p" or len(tok) != 3 or tok[1] != "mvtsp":
                raise ParseError(lineno, "expected header 'p mvtsp <n>'")
            n = _int(tok[2], lineno, "vertex count")
            header = lineno
            continue
        if kind == "d":
            if len(tok) != 3:
                raise ParseError(lineno, "expected 'd <v> <dem>'")
            v = _vertex(tok[1], n, lineno)
            if v in demand:
                raise ParseError(lineno, f"duplicate demand for vertex {v}")
            demand[v] = _int(tok[2], lineno, "demand")
        elif kind == "e":
            if len(tok) != 4:
                raise ParseError(lineno, "expected 'e <u> <v> <cost>'")
            u = _vertex(tok[1], n, lineno)
            v = _vertex(tok[2], n, lineno)
            if u == v:
                raise ParseError(lineno, f"self-loop at vertex {u}")
            if (u, v) in cost:
                raise ParseError(lineno, f"duplicate cost entry ({u}, {v})")
            cost[(u, v)] = _int(tok[3], lineno, "cost")
        else:
            raise ParseError(lineno, f"unknown line type {kind!r}")
    if header is None:
        raise ParseError(0, "missing header")
    missing = [v for v in range(1, n + 1) if v not in demand]
    if missing:
        raise ParseError(header, f"missing demand line for vertex {missing[0]}")
    return MVTSPInstance(n, cost, demand)


def write_cf(inst: CFInstance) -> str:
    out = [f"p cf {inst.n} {len(inst.edges)} {len(inst.demand)}"]
    for v in sorted(inst.demand):
        out.append(f"d {v} {inst.demand[v]}")
    for e in inst.edges:
        cap = "inf" if e.cap == INF else str(e.cap)
        out.append(f"e {e.tail} {e.head} {e.cost} {cap}")
    return "\n".join(out) + "\n"


def write_mvtsp(m: MVTSPInstance) -> str:
    out = [f"p mvtsp {m.n}"]
    out += [f"d {v} {m.demand[v]}" for v in range(1, m.n + 1)]
    out += [f"e {u} {v} {c}" for (u, v), c in sorted(m.cost.items())]
    return "\n".join(out) + "\n"


def mvtsp_to_cf(m: MVTSPInstance) -> CFInstance:
    edges = tuple(Edge(u, v, c, INF) for (u, v), c in sorted(m.cost.items()))
    return CFInstance(m.n, edges, dict(m.demand))


def format_solution(cost: int, flow: Mapping[tuple[int, int], int], comments: Iterable[str] = ()) -> str:
    out = [f"c {c}" for c in comments]
    out.append(f"s {cost}")
    for (u, v), mult in sorted(flow.items()):
        if mult > 0:
            out.append(f"f {u} {v} {mult}")
    return "\n".join(out) + "\n"


def parse_solution(text: str | bytes) -> tuple[int | None, Flow]:
    """Returns (cost, flow); cost is None for an `s infeasible` line."""
    cost: int | None = None
    flow: Flow = {}
    seen_s = False
    for lineno, tok in _lines(text):
        if tok[0] == "s" and len(tok) == 2:
            if seen_s:
                raise ParseError(lineno, "duplicate 's' line")
            seen_s = True
            cost = None if tok[1] == "infeasible" else _int(tok[1], lineno, "cost")
        elif tok[0] == "f" and len(tok) == 4:
            key = (_int(tok[1], lineno, "vertex"), _int(tok[2], lineno, "vertex"))
            if key in flow:
                raise ParseError(lineno, f"duplicate flow line for {key}")
            flow[key] = _int(tok[3], lineno, "multiplicity")
        else:
            raise ParseError(lineno, "expected 's <cost>' or 'f <u> <v> <mult>'")
    if not seen_s:
        raise ParseError(0, "missing 's' line")
    return cost, flow


# -- verification ----------------------------------------------------------


def support_components(flow: Mapping[tuple[int, int], int]) -> list[set[int]]:
    """Weak components of the support, ignoring vertices without flow."""
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (u, v), mult in flow.items():
        if mult <= 0:
            continue
        parent.setdefault(u, u)
        parent.setdefault(v, v)
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups: dict[int, set[int]] = {}
    for x in parent:
        groups.setdefault(find(x), set()).add(x)
    return [groups[r] for r in sorted(groups)]


def strongly_connected(flow: Mapping[tuple[int, int], int]) -> bool:
    """Every support vertex reaches and is reached from one root."""
    succ: dict[int, list[int]] = {}
    pred: dict[int, list[int]] = {}
    for (u, v), mult in flow.items():
        if mult > 0:
            succ.setdefault(u, []).append(v)
            pred.setdefault(v, []).append(u)
            succ.setdefault(v, [])
            pred.setdefault(u, [])
    if not succ:
        return True
    root = min(succ)
    for adj in (succ, pred):
        seen = {root}
        stack = [root]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != len(succ):
            return False
    return True


def verify_solution(inst: CFInstance, flow: Mapping[tuple[int, int], int]) -> VerificationReport:
    violation: str | None = None

    def note(msg: str) -> None:
        nonlocal violation
        if violation is None:
            violation = msg

    for key, mult in flow.items():
        if inst.edge(*key) is None:
            raise ValueError(f"flow on unknown edge {key}")
        if mult < 0:
            raise ValueError(f"negative multiplicity on {key}")

    inflow = {v: 0 for v in inst.vertices}
    outflow = {v: 0 for v in inst.vertices}
    capacities_ok = True
    for (u, v), mult in sorted(flow.items()):
        outflow[u] = checked(outflow[u] + mult)
        inflow[v] = checked(inflow[v] + mult)
        if mult > inst.edge(u, v).cap:
            capacities_ok = False
            note(f"edge ({u}, {v}): capacity exceeded")

    conservation_ok = True
    demands_ok = True
    for v in inst.vertices:
        if inflow[v] != outflow[v]:
            conservation_ok = False
            note(f"vertex {v}: in-flow {inflow[v]} != out-flow {outflow[v]}")
        if v in inst.demand and inflow[v] != inst.demand[v]:
            demands_ok = False
            note(f"vertex {v}: in-flow {inflow[v]} != demand {inst.demand[v]}")

    connected_ok = len(support_components(flow)) <= 1
    if not connected_ok:
        note("support is disconnected")
    return VerificationReport(
        conservation_ok, demands_ok, capacities_ok, connected_ok, inst.flow_cost(flow), violation
    )


def clean(flow: Mapping[tuple[int, int], int]) -> Flow:
    """Drop zero entries."""
    return {k: v for k, v in sorted(flow.items()) if v > 0}
