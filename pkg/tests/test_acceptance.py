"""Acceptance suite: one test per criterion, summarized at the end of the run
as `criterion N: PASS|FAIL` lines."""

import itertools
import os
import random
import subprocess
import sys
from pathlib import Path

import pytest

from conflow.corpus import big_demand_cf, cycle_rank, mixed_cf, planted_cover_mvtsp, random_uncapacitated
from conflow.flowdiff import transfer_edges
from conflow.hardness import (
    CnfFormula,
    DisjointPathsQuery,
    check_decompositions,
    decode_assignment,
    decode_disjoint_paths,
    gadget_segments,
    gen_disjoint_paths_instance,
    gen_sat_instance,
    two_label_harness,
    unit_bound,
    witness_flow_from_paths,
    witness_tour_from_assignment,
)
from conflow.instance import mvtsp_to_cf, support_components, verify_solution, write_cf, write_mvtsp
from conflow.kernel import kernelize, lift_kernel_solution, size_bound
from conflow.oracle import enumerate_solutions, solve_exact
from conflow.reduction import solve_via_reduction
from conflow.relaxation import solve_relaxation
from conflow.treewidth import compose, reduce_demands, solve_tw_dp
from conflow.vc import compute_vertex_cover, solve_vc_fpt
from instances import disjoint_pair, two_vertex_cf

CORPUS_SIZE = 500


def corpus(size=CORPUS_SIZE, seed=2024):
    rng = random.Random(seed)
    return [mixed_cf(rng) for _ in range(size)]


def summary(record_property, text):
    record_property("detail", text)


@pytest.fixture(scope="module")
def solved():
    """Corpus instances with their exact optimum and relaxed optimum."""
    return [(inst, solve_exact(inst), solve_relaxation(inst)) for inst in corpus()]


@pytest.mark.criterion(1)
def test_cross_solver_exactness(solved, record_property):
    bad = []
    feasible = 0
    for idx, (inst, exact, _) in enumerate(solved):
        results = {"oracle": exact, "vc-fpt": solve_vc_fpt(inst), "tw-dp": solve_tw_dp(inst)}
        if len({(r.status, r.cost) for r in results.values()}) != 1:
            bad.append((idx, {k: (r.status.value, r.cost) for k, r in results.items()}))
        for name, r in results.items():
            if r.feasible:
                rep = verify_solution(inst, r.flow)
                if not rep.ok or rep.cost != r.cost:
                    bad.append((idx, name, rep))
        feasible += exact.feasible
    summary(record_property, f"{len(solved)} instances ({feasible} feasible), {len(bad)} disagreements")
    assert not bad, bad[:3]


@pytest.mark.criterion(2)
def test_relaxation_lower_bound(solved, record_property):
    bad = []
    tight = 0
    for idx, (inst, exact, relaxed) in enumerate(solved):
        if not exact.feasible:
            continue
        if not relaxed.feasible or relaxed.cost > exact.cost:
            bad.append((idx, "bound", relaxed.cost, exact.cost))
            continue
        equal = relaxed.cost == exact.cost
        # the connected optimum is a connected relaxed optimum exactly when costs agree
        exact_is_relaxed_opt = verify_solution(inst, exact.flow).relaxed_ok and exact.cost == relaxed.cost
        # a connected relaxed witness is a connected solution, forcing equality
        witness_connected = verify_solution(inst, relaxed.flow).ok
        if equal != exact_is_relaxed_opt or (witness_connected and not equal):
            bad.append((idx, "iff", relaxed.cost, exact.cost))
        tight += equal
    summary(record_property, f"{tight} tight instances, {len(bad)} violations")
    assert not bad, bad[:3]


def _spanning_tree(flow, rng):
    edges = sorted(k for k, m in flow.items() if m > 0)
    rng.shuffle(edges)
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            x = parent[x]
        return x

    tree = []
    for u, v in edges:
        a, b = find(u), find(v)
        if a != b:
            parent[a] = b
            tree.append((u, v))
    return tree


@pytest.mark.criterion(3)
def test_edge_transfer(solved, record_property):
    rng = random.Random(3)
    bad = []
    checked = 0
    for idx, (inst, exact, relaxed) in enumerate(solved):
        if not exact.feasible or not exact.flow:
            continue
        k = len(compute_vertex_cover(inst).vertices)
        for _ in range(3):
            tree = _spanning_tree(exact.flow, rng)[: 2 * k]
            f = transfer_edges(inst, relaxed.flow, exact.flow, tree)
            rep = verify_solution(inst, f)
            problems = []
            if any(f.get(e, 0) <= 0 for e in tree):
                problems.append("tree edge unused")
            if rep.cost > exact.cost:
                problems.append("cost")
            if not rep.relaxed_ok:
                problems.append("invalid flow")
            for v in inst.vertices:
                dev_in = sum(abs(relaxed.flow.get((u, v), 0) - f.get((u, v), 0)) for u in inst.vertices)
                dev_out = sum(abs(relaxed.flow.get((v, u), 0) - f.get((v, u), 0)) for u in inst.vertices)
                if max(dev_in, dev_out) > 2 * len(tree):
                    problems.append(f"deviation at {v}")
            if problems:
                bad.append((idx, tree, problems))
            checked += 1
    summary(record_property, f"{checked} (instance, tree) pairs, {len(bad)} violations")
    assert not bad, bad[:3]


KERNEL_SHAPES = ((1, 30, 100), (2, 12, 60), (3, 9, 40))


@pytest.mark.criterion(4)
def test_kernel(record_property):
    bad = []
    total = contracted = 0
    largest = {}
    for k, max_n, count in KERNEL_SHAPES:
        rng = random.Random(f"kernel-{k}")
        cover = list(range(1, k + 1))
        for _ in range(count):
            m = planted_cover_mvtsp(rng, rng.randint(k + 1, max_n), k)
            kernel, cmap, cls = kernelize(m, cover)
            original = solve_vc_fpt(mvtsp_to_cf(m), cover)
            reduced = solve_tw_dp(mvtsp_to_cf(kernel))
            total += 1
            contracted += bool(cmap.contractions)
            largest[k] = max(largest.get(k, 0), kernel.n)
            if not (original.feasible and reduced.feasible) or reduced.cost + cmap.fixed_cost != original.cost:
                bad.append((m, "optimum", original.cost, reduced.cost, cmap.fixed_cost))
                continue
            if kernel.n > size_bound(k) or len(cls.other) > k:
                bad.append((m, "size", kernel.n, len(cls.other)))
            lifted = lift_kernel_solution(reduced.flow, cmap)
            rep = verify_solution(mvtsp_to_cf(m), lifted)
            if not rep.ok or rep.cost != original.cost:
                bad.append((m, "lift", rep))
    summary(record_property, f"{total} instances, {contracted} contracted, max kernel sizes {largest}, {len(bad)} violations")
    assert total >= 200 and not bad, bad[:3]


# (max multiplicity of a planted cycle, cycle rank, instances, share of demand vertices)
DEMAND_TIERS = ((10_000, 1, 40, 1.0), (10_000, 1, 20, 0.8), (1000, 2, 25, 0.9), (120, 3, 15, 0.8), (60, 4, 10, 0.8))


def demand_corpus():
    yield two_vertex_cf(100)
    for mult, rank, count, share in DEMAND_TIERS:
        rng = random.Random(f"tier-{mult}-{rank}")
        made = 0
        while made < count:
            inst = big_demand_cf(rng, max_mult=mult, demand_fraction=share)
            if cycle_rank(inst) != rank or max(inst.demand.values(), default=0) <= 2 * inst.n**2 + inst.n:
                continue
            made += 1
            yield inst


@pytest.mark.criterion(5)
def test_demand_reduction(record_property):
    bad = []
    total = top = 0
    example = None
    for inst in demand_corpus():
        total += 1
        top = max(top, max(inst.demand.values()))
        limit = 2 * inst.n**2 + inst.n
        direct = solve_tw_dp(inst)
        cert = reduce_demands(inst)
        if cert.rounds < 1 or any(d > limit for d in cert.residual.demand.values()):
            bad.append((inst, "residual", cert.residual.demand))
            continue
        residual = solve_tw_dp(cert.residual)
        base_cost = inst.flow_cost(cert.base_flow)
        if residual.status != direct.status or (direct.feasible and residual.cost + base_cost != direct.cost):
            bad.append((inst, "optimum", direct.cost, residual.cost, base_cost))
            continue
        if direct.feasible and not verify_solution(inst, compose(inst, cert, residual.flow)).ok:
            bad.append((inst, "compose"))
        if example is None:
            example = (residual.cost, base_cost, direct.cost)
    summary(record_property, f"{total} instances, largest demand {top}, worked example {example}, {len(bad)} violations")
    assert example == (25, 475, 500)
    assert total >= 100 and not bad, bad[:3]


@pytest.mark.criterion(6)
def test_mvtsp_reduction(record_property):
    rng = random.Random(6)
    bad = []
    feasible = 0
    for idx in range(150):
        inst = random_uncapacitated(rng)
        want = solve_exact(inst)
        status, cost, flow = solve_via_reduction(inst, solve_tw_dp)
        if status != want.status.value or (want.feasible and cost != want.cost):
            bad.append((idx, status, cost, want.status.value, want.cost))
        elif want.feasible and not verify_solution(inst, flow).ok:
            bad.append((idx, "lifted flow invalid"))
        feasible += want.feasible
    summary(record_property, f"150 instances ({feasible} feasible), {len(bad)} mismatches")
    assert not bad, bad[:3]


def disjoint_path_queries():
    yield DisjointPathsQuery(6, ((1, 5), (5, 2), (3, 6), (6, 4)), 1, 2, 3, 4)
    yield DisjointPathsQuery(5, ((1, 5), (5, 2), (3, 5), (5, 4)), 1, 2, 3, 4)
    yield DisjointPathsQuery(4, ((1, 2), (3, 4)), 1, 2, 3, 4)
    rng = random.Random(7)
    for _ in range(80):
        n = rng.randint(4, 7)
        density = rng.uniform(0.3, 0.7)
        arcs = tuple(sorted((u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v and rng.random() < density))
        yield DisjointPathsQuery(n, arcs, *rng.sample(range(1, n + 1), 4))


@pytest.mark.criterion(7)
def test_disjoint_paths(record_property):
    bad = []
    total = yes = 0
    for q in disjoint_path_queries():
        total += 1
        inst, layout = gen_disjoint_paths_instance(q)
        truth = disjoint_pair(q)
        res = solve_exact(inst)
        if res.feasible != (truth is not None):
            bad.append((q, "feasibility", res.feasible))
            continue
        if truth is None:
            continue
        yes += 1
        flow = witness_flow_from_paths(q, *truth, layout)
        if not verify_solution(inst, flow).ok or decode_disjoint_paths(inst, layout, flow) != truth:
            bad.append((q, "round trip"))
        p1, p2 = decode_disjoint_paths(inst, layout, res.flow)
        try:
            witness_flow_from_paths(q, p1, p2, layout)
        except ValueError as exc:
            bad.append((q, "decoded paths", exc))
    summary(record_property, f"{total} queries ({yes} yes), {len(bad)} failures")
    assert total >= 50 and not bad, bad[:3]


def small_clauses(n):
    for size in (1, 2, 3):
        for vs in itertools.combinations(range(1, n + 1), size):
            for signs in itertools.product((1, -1), repeat=size):
                yield tuple(v * s for v, s in zip(vs, signs))


def small_formulas():
    for n in (1, 2, 3, 4):
        cs = list(small_clauses(n))
        for clauses in itertools.chain(((c,) for c in cs), itertools.combinations(cs, 2)):
            yield CnfFormula(n, clauses)


@pytest.mark.criterion(8)
def test_sat_reduction(record_property):
    bad = []
    formulas = witnesses = 0
    widest = 0
    for s in (1, 2):
        for idx, phi in enumerate(small_formulas()):
            models = phi.models()
            if not models:
                continue
            formulas += 1
            m, meta = gen_sat_instance(phi, s)
            cf = mvtsp_to_cf(m)
            # every model up to three variables, one rotating model at four
            chosen = models if phi.n <= 3 else [models[idx % len(models)]]
            for chi in chosen:
                witnesses += 1
                flow = witness_tour_from_assignment(phi, chi, meta)
                rep = verify_solution(cf, flow)
                if not rep.ok or rep.cost != 0:
                    bad.append((phi, s, chi, rep.first_violation))
                elif decode_assignment(m, flow, meta) != chi:
                    bad.append((phi, s, chi, "decode"))
            width, _ = check_decompositions(m, meta)
            widest = max(widest, width - 3 * meta.padded // s)
            if width > 3 * meta.padded / s + 21:
                bad.append((phi, s, "width", width))
            if any(sc.units > unit_bound(s) for sc in meta.scanners):
                bad.append((phi, s, "units"))
    summary(
        record_property,
        f"{formulas} (formula, s) pairs, {witnesses} witnesses, max width - 3n/s = {widest}, {len(bad)} failures",
    )
    assert not bad, bad[:3]


@pytest.mark.criterion(9)
def test_two_label_gadget(record_property):
    tours = enumerate_solutions(two_label_harness())
    segments = [tuple(gadget_segments(f)) for f in tours]
    allowed = {(1, 7), (7, 1), (3, 9), (9, 3)}
    stray = [s for s in segments if len(s) != 1 or s[0] not in allowed]
    labels = {frozenset(s[0]) for s in segments if len(s) == 1}
    summary(record_property, f"{len(tours)} valid tours, segments {sorted(set(segments))}")
    assert tours and not stray, stray
    assert labels == {frozenset({1, 7}), frozenset({3, 9})}


def _fingerprint(result):
    return (result.status, result.cost, tuple(sorted(result.flow.items())))


@pytest.mark.criterion(10)
def test_determinism(tmp_path, record_property):
    sample = corpus(40, seed=10)
    for inst in sample:
        assert _fingerprint(solve_exact(inst)) == _fingerprint(solve_exact(inst))
        assert _fingerprint(solve_tw_dp(inst)) == _fingerprint(solve_tw_dp(inst))
        single = _fingerprint(solve_vc_fpt(inst, threads=1))
        assert single == _fingerprint(solve_vc_fpt(inst, threads=4)) == _fingerprint(solve_vc_fpt(inst, threads=1))
    for make in (mixed_cf, random_uncapacitated, big_demand_cf):
        assert [make(random.Random(i)) for i in range(20)] == [make(random.Random(i)) for i in range(20)]

    files = {
        "twin.cf": write_cf(sample[0]),
        "big.cf": write_cf(next(demand_corpus())),
        "star.mvtsp": write_mvtsp(planted_cover_mvtsp(random.Random(1), 20, 1)),
        "g.txt": "p digraph 6 5\na 1 5\na 5 2\na 3 6\na 6 4\na 5 6\n",
        "f.cnf": "p cnf 4 2\n1 -2 3 0\n-1 4 0\n",
    }
    for name, text in files.items():
        (tmp_path / name).write_text(text)
    commands = [
        ["solve", "--algo", "oracle", "twin.cf"],
        ["solve", "--algo", "tw-dp", "twin.cf"],
        ["solve", "--algo", "vc-fpt", "--threads", "1", "twin.cf"],
        ["solve", "--algo", "vc-fpt", "--threads", "4", "twin.cf"],
        ["solve", "big.cf"],
        ["relax", "twin.cf"],
        ["kernelize", "star.mvtsp"],
        ["reduce", "mvtsp", "twin.cf"],
        ["gen", "disjoint-paths", "g.txt", "1", "2", "3", "4"],
        ["gen", "sat", "f.cnf", "--group-size", "2", "--meta", "/dev/stdout"],
        ["stats", "star.mvtsp"],
    ]
    outputs = {}
    for cmd in commands:
        runs = []
        for seed in ("0", "1", "4242"):
            env = dict(os.environ, PYTHONHASHSEED=seed)
            proc = subprocess.run(
                [sys.executable, "-m", "conflow.cli", *cmd], cwd=tmp_path, env=env, capture_output=True
            )
            runs.append((proc.returncode, proc.stdout))
        assert len(set(runs)) == 1, cmd
        outputs[" ".join(cmd)] = runs[0][1]
    vc1 = outputs["solve --algo vc-fpt --threads 1 twin.cf"].replace(b"threads 1", b"")
    vc4 = outputs["solve --algo vc-fpt --threads 4 twin.cf"].replace(b"threads 4", b"")
    assert vc1 == vc4
    summary(record_property, f"{len(sample)} instances x 3 solvers, {len(commands)} CLI commands x 3 hash seeds")
