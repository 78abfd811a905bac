"""Decompose the difference of two flows into alternating tours.

Given flows r and s on the same instance, every edge e with s(e) > r(e)
contributes s(e) - r(e) "forward" copies and every edge with r(e) > s(e)
contributes r(e) - s(e) "backward" copies. Walking a forward copy follows the
edge, walking a backward copy goes against it, so the copies form an Eulerian
digraph. A tour is a closed walk in that digraph which never passes through a
demand vertex using two copies of the same kind.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from conflow.instance import CFInstance, Flow, verify_solution


class Tag(Enum):
    FROM_S = "s"
    FROM_R = "r"


@dataclass(frozen=True)
class Step:
    edge: tuple[int, int]
    tag: Tag

    @property
    def start(self) -> int:
        return self.edge[0] if self.tag is Tag.FROM_S else self.edge[1]

    @property
    def end(self) -> int:
        return self.edge[1] if self.tag is Tag.FROM_S else self.edge[0]


@dataclass(frozen=True)
class SRTour:
    arcs: tuple[Step, ...]
    delta: int

    def edges(self, tag: Tag | None = None) -> list[tuple[int, int]]:
        return [a.edge for a in self.arcs if tag is None or a.tag is tag]


@dataclass
class DiffDecomposition:
    tours: list[SRTour]

    def arc_multiset(self) -> Counter:
        total: Counter = Counter()
        for t in self.tours:
            total.update((a.edge, a.tag) for a in t.arcs)
        return total

    def multiplicities(self) -> Counter:
        return Counter(t.arcs for t in self.tours)


def difference_multiset(r: Mapping[tuple[int, int], int], s: Mapping[tuple[int, int], int]) -> Counter:
    diff: Counter = Counter()
    for key in set(r) | set(s):
        d = s.get(key, 0) - r.get(key, 0)
        if d > 0:
            diff[(key, Tag.FROM_S)] = d
        elif d < 0:
            diff[(key, Tag.FROM_R)] = -d
    return diff


def _require_flow(inst: CFInstance, flow: Mapping[tuple[int, int], int], name: str) -> None:
    rep = verify_solution(inst, flow)
    if not rep.relaxed_ok:
        raise ValueError(f"{name} is not a valid flow: {rep.first_violation}")


def _canonical(steps: list[Step], order: dict[tuple[int, int], int]) -> tuple[Step, ...]:
    best = min(range(len(steps)), key=lambda i: (order[steps[i].edge], steps[i].tag.value, i))
    return tuple(steps[best:] + steps[:best])


def _split_minimal(steps: list[Step]) -> list[list[Step]]:
    """Split a closed walk until no vertex is entered twice by same-tag steps
    and no vertex is left twice by same-tag steps."""
    pending = [steps]
    done = []
    while pending:
        walk = pending.pop()
        n = len(walk)
        cut = None
        entered: dict[tuple[int, Tag], int] = {}
        left: dict[tuple[int, Tag], int] = {}
        for i in range(n):
            v = walk[i].end
            key_in = (v, walk[i].tag)
            key_out = (v, walk[(i + 1) % n].tag)
            if key_in in entered:
                cut = (entered[key_in], i)
                break
            if key_out in left:
                cut = (left[key_out], i)
                break
            entered[key_in] = i
            left[key_out] = i
        if cut is None:
            done.append(walk)
            continue
        i, j = cut
        # both visits sit at the same vertex; reconnect each in-step to the
        # other's successor, which keeps every transition's tag pattern
        pending.append(walk[i + 1 : j + 1])
        pending.append(walk[j + 1 :] + walk[: i + 1])
    return done


def decompose_difference(
    inst: CFInstance, r: Mapping[tuple[int, int], int], s: Mapping[tuple[int, int], int]
) -> DiffDecomposition:
    _require_flow(inst, r, "r")
    _require_flow(inst, s, "s")
    order = {e.key: idx for idx, e in enumerate(inst.edges)}
    diff = difference_multiset(r, s)

    steps: list[Step] = []
    for (edge, tag), mult in sorted(diff.items(), key=lambda kv: (order[kv[0][0]], kv[0][1].value)):
        steps += [Step(edge, tag)] * mult

    ins: dict[int, list[int]] = {}
    outs: dict[int, list[int]] = {}
    for idx, st in enumerate(steps):
        ins.setdefault(st.end, []).append(idx)
        outs.setdefault(st.start, []).append(idx)

    succ: dict[int, int] = {}
    for v in sorted(ins):
        pool_out = {tag: [i for i in outs[v] if steps[i].tag is tag] for tag in Tag}
        same_tag_later = []
        for i in ins[v]:
            other = Tag.FROM_R if steps[i].tag is Tag.FROM_S else Tag.FROM_S
            if pool_out[other]:
                succ[i] = pool_out[other].pop(0)
            else:
                same_tag_later.append(i)
        for i in same_tag_later:
            if v in inst.demand:
                raise AssertionError(f"unbalanced tags at demand vertex {v}")
            tag = steps[i].tag
            succ[i] = pool_out[tag].pop(0)

    used = [False] * len(steps)
    tours: list[SRTour] = []
    for start in range(len(steps)):
        if used[start]:
            continue
        walk = []
        i = start
        while not used[i]:
            used[i] = True
            walk.append(steps[i])
            i = succ[i]
        for piece in _split_minimal(walk):
            tours.append(_make_tour(inst, _canonical(piece, order)))
    tours.sort(key=lambda t: [(order[a.edge], a.tag.value) for a in t.arcs])
    return DiffDecomposition(tours)


def _make_tour(inst: CFInstance, arcs: tuple[Step, ...]) -> SRTour:
    delta = 0
    for a in arcs:
        c = inst.edge(*a.edge).cost
        delta += c if a.tag is Tag.FROM_S else -c
    return SRTour(arcs, delta)


def is_valid_tour(inst: CFInstance, tour: SRTour) -> bool:
    """Check closure, the demand-vertex rule and the two-in/two-out bound."""
    arcs = tour.arcs
    n = len(arcs)
    if n == 0:
        return False
    into: Counter = Counter()
    out_of: Counter = Counter()
    for i, a in enumerate(arcs):
        nxt = arcs[(i + 1) % n]
        if a.end != nxt.start:
            return False
        if a.tag is nxt.tag and a.end in inst.demand:
            return False
        into[a.edge[1]] += 1
        out_of[a.edge[0]] += 1
    return max(into.values()) <= 2 and max(out_of.values()) <= 2


def apply_tours(r: Mapping[tuple[int, int], int], tours: Iterable[SRTour]) -> Flow:
    f = dict(r)
    for t in tours:
        for a in t.arcs:
            f[a.edge] = f.get(a.edge, 0) + (1 if a.tag is Tag.FROM_S else -1)
    return {k: v for k, v in sorted(f.items()) if v != 0}


def transfer_edges(
    inst: CFInstance,
    r: Mapping[tuple[int, int], int],
    s: Mapping[tuple[int, int], int],
    required: Iterable[tuple[int, int]],
) -> Flow:
    """Move the edges in `required` (all used by s) into r without exceeding cost(s)."""
    required = sorted(set(required))
    for e in required:
        if s.get(e, 0) <= 0:
            raise ValueError(f"edge {e} is not in the support of s")
    decomposition = decompose_difference(inst, r, s)
    order = {e.key: idx for idx, e in enumerate(inst.edges)}
    chosen: dict[int, SRTour] = {}
    for e in required:
        if r.get(e, 0) > 0:
            continue
        candidates = [
            (t.delta, order[t.arcs[0].edge], idx)
            for idx, t in enumerate(decomposition.tours)
            if (e, Tag.FROM_S) in ((a.edge, a.tag) for a in t.arcs)
        ]
        _, _, idx = min(candidates)
        chosen[idx] = decomposition.tours[idx]
    return apply_tours(r, (chosen[i] for i in sorted(chosen)))
