"""Tree decompositions: PACE .td I/O, validation, a min-degree heuristic and
conversion to a nice decomposition with explicit edge-introduction nodes."""

from __future__ import annotations

from dataclasses import dataclass, field

from conflow.instance import CFInstance


class DecompositionError(ValueError):
    pass


@dataclass
class TreeDecomposition:
    bags: list[frozenset[int]]
    edges: list[tuple[int, int]]
    root: int = 0
    n: int = 0

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {i: [] for i in range(len(self.bags))}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return {i: sorted(v) for i, v in adj.items()}


def graph_edges(inst: CFInstance) -> list[tuple[int, int]]:
    return sorted({(min(e.tail, e.head), max(e.tail, e.head)) for e in inst.edges})


def validate(td: TreeDecomposition, n: int, edges: list[tuple[int, int]]) -> None:
    nb = len(td.bags)
    if nb == 0:
        if n:
            raise DecompositionError("no bags but the graph has vertices")
        return
    if len(td.edges) != nb - 1:
        raise DecompositionError(f"{nb} bags need {nb - 1} tree edges, got {len(td.edges)}")
    adj = td.adjacency()
    seen = {0}
    stack = [0]
    while stack:
        for j in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    if len(seen) != nb:
        raise DecompositionError("bag tree is not connected")
    holders: dict[int, set[int]] = {}
    for i, bag in enumerate(td.bags):
        for v in bag:
            holders.setdefault(v, set()).add(i)
    for v in range(1, n + 1):
        mine = holders.get(v)
        if not mine:
            raise DecompositionError(f"vertex {v} is in no bag")
        start = min(mine)
        reach = {start}
        stack = [start]
        while stack:
            for j in adj[stack.pop()]:
                if j in mine and j not in reach:
                    reach.add(j)
                    stack.append(j)
        if reach != mine:
            raise DecompositionError(f"bags containing vertex {v} are not connected")
    for u, v in edges:
        if not holders.get(u, set()) & holders.get(v, set()):
            raise DecompositionError(f"edge ({u}, {v}) is in no bag")


def parse_td(text: str | bytes) -> TreeDecomposition:
    if isinstance(text, bytes):
        text = text.decode("ascii")
    header = None
    bags: dict[int, frozenset[int]] = {}
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tok = raw.split()
        if not tok or tok[0] == "c":
            continue
        try:
            if tok[0] == "s":
                if tok[1] != "td" or len(tok) != 5:
                    raise DecompositionError(f"line {lineno}: bad header")
                header = tuple(int(t) for t in tok[2:])
            elif tok[0] == "b":
                bid = int(tok[1])
                if bid in bags:
                    raise DecompositionError(f"line {lineno}: duplicate bag {bid}")
                bags[bid] = frozenset(int(t) for t in tok[2:])
            else:
                if len(tok) != 2:
                    raise DecompositionError(f"line {lineno}: expected a tree edge")
                edges.append((int(tok[0]), int(tok[1])))
        except (ValueError, IndexError) as exc:
            if isinstance(exc, DecompositionError):
                raise
            raise DecompositionError(f"line {lineno}: malformed line {raw!r}") from None
    if header is None:
        raise DecompositionError("missing 's td' header")
    nb, width1, n = header
    if sorted(bags) != list(range(1, nb + 1)):
        raise DecompositionError("bag ids must be 1..num-bags")
    if any(len(b) > width1 for b in bags.values()):
        raise DecompositionError("a bag exceeds the announced width")
    for a, b in edges:
        if a not in bags or b not in bags:
            raise DecompositionError(f"tree edge ({a}, {b}) names an unknown bag")
    return TreeDecomposition(
        [bags[i] for i in range(1, nb + 1)], [(a - 1, b - 1) for a, b in edges], 0, n
    )


def write_td(td: TreeDecomposition) -> str:
    out = [f"s td {len(td.bags)} {td.width + 1} {td.n}"]
    for i, b in enumerate(td.bags, start=1):
        out.append(" ".join(["b", str(i)] + [str(v) for v in sorted(b)]))
    for a, b in td.edges:
        out.append(f"{a + 1} {b + 1}")
    return "\n".join(out) + "\n"


def _contract_subset_bags(bags: list[set[int]], edges: list[tuple[int, int]]) -> tuple[list[frozenset[int]], list[tuple[int, int]]]:
    alive = set(range(len(bags)))
    adj: dict[int, set[int]] = {i: set() for i in alive}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    changed = True
    while changed:
        changed = False
        for i in sorted(alive):
            for j in sorted(adj[i]):
                if bags[i] <= bags[j]:
                    for x in adj[i] - {j}:
                        adj[x].discard(i)
                        adj[x].add(j)
                        adj[j].add(x)
                    adj[j].discard(i)
                    del adj[i]
                    alive.discard(i)
                    changed = True
                    break
            if changed:
                break
    order = sorted(alive)
    rename = {old: new for new, old in enumerate(order)}
    new_edges = sorted({(min(rename[a], rename[b]), max(rename[a], rename[b])) for a in order for b in adj[a]})
    return [frozenset(bags[i]) for i in order], new_edges


def heuristic_td(inst: CFInstance) -> TreeDecomposition:
    """Min-degree elimination on the underlying undirected graph."""
    n = inst.n
    if n == 0:
        return TreeDecomposition([], [], 0, 0)
    nbrs: dict[int, set[int]] = {v: set() for v in range(1, n + 1)}
    for u, v in graph_edges(inst):
        nbrs[u].add(v)
        nbrs[v].add(u)
    order: list[int] = []
    bags: list[set[int]] = []
    remaining = set(nbrs)
    while remaining:
        v = min(remaining, key=lambda x: (len(nbrs[x]), x))
        bag = {v} | nbrs[v]
        for a in nbrs[v]:
            nbrs[a] |= nbrs[v] - {a}
            nbrs[a].discard(v)
        remaining.discard(v)
        order.append(v)
        bags.append(bag)
    position = {v: i for i, v in enumerate(order)}
    edges: list[tuple[int, int]] = []
    roots = []
    for i, v in enumerate(order):
        later = [position[u] for u in bags[i] if u != v]
        if later:
            edges.append((i, min(later)))
        else:
            roots.append(i)
    for r in roots[1:]:
        edges.append((roots[0], r))
    fbags, fedges = _contract_subset_bags(bags, edges)
    td = TreeDecomposition(fbags, fedges, 0, n)
    return td


# -- nice decompositions ----------------------------------------------------


@dataclass
class NiceNode:
    kind: str  # leaf | intro | forget | edge | join
    bag: tuple[int, ...]
    children: list[int] = field(default_factory=list)
    vertex: int = 0
    edge: tuple[int, int] = (0, 0)


def make_nice(td: TreeDecomposition, inst: CFInstance) -> tuple[list[NiceNode], int]:
    """Returns (nodes, root id). Children always precede their parents in the
    list, the root bag is empty, and every directed edge of `inst` is
    introduced exactly once, right below the forget node of whichever
    endpoint is forgotten first."""
    nodes: list[NiceNode] = []
    directed: dict[frozenset[int], list[tuple[int, int]]] = {}
    for e in inst.edges:
        directed.setdefault(frozenset(e.key), []).append(e.key)
    introduced: set[tuple[int, int]] = set()

    def add(node: NiceNode) -> int:
        nodes.append(node)
        return len(nodes) - 1

    def forget(child: int, v: int) -> int:
        bag = nodes[child].bag
        for u in bag:
            for key in sorted(directed.get(frozenset((u, v)), [])):
                if u != v and key not in introduced:
                    introduced.add(key)
                    child = add(NiceNode("edge", bag, [child], edge=key))
        return add(NiceNode("forget", tuple(x for x in bag if x != v), [child], vertex=v))

    def introduce(child: int, v: int) -> int:
        bag = tuple(sorted(nodes[child].bag + (v,)))
        return add(NiceNode("intro", bag, [child], vertex=v))

    def morph(child: int, target: tuple[int, ...]) -> int:
        for v in [x for x in nodes[child].bag if x not in target]:
            child = forget(child, v)
        for v in [x for x in target if x not in nodes[child].bag]:
            child = introduce(child, v)
        return child

    if not td.bags:
        return [NiceNode("leaf", ())], 0
    adj = td.adjacency()
    # iterative post-order over the bag tree
    parent = {td.root: -1}
    order = [td.root]
    for t in order:
        for c in adj[t]:
            if c not in parent:
                parent[c] = t
                order.append(c)
    built: dict[int, int] = {}
    for t in reversed(order):
        bag = tuple(sorted(td.bags[t]))
        kids = [c for c in adj[t] if parent.get(c) == t]
        branches = [morph(built[c], bag) for c in kids]
        if not branches:
            branches = [morph(add(NiceNode("leaf", ())), bag)]
        cur = branches[0]
        for other in branches[1:]:
            cur = add(NiceNode("join", bag, [cur, other]))
        built[t] = cur
    root = morph(built[td.root], ())
    missing = [e.key for e in inst.edges if e.key not in introduced]
    if missing:
        raise DecompositionError(f"edge {missing[0]} never introduced")
    return nodes, root
