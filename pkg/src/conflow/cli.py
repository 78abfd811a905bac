"""Command-line entry point: `conflow <command> ...`.

Exit codes: 0 success, 1 negative answer (infeasible instance, failed
verification), 2 usage or input error, 3 search budget exhausted.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from conflow.hardness import (
    DisjointPathsQuery,
    check_decompositions,
    gen_disjoint_paths_instance,
    gen_sat_instance,
    parse_digraph,
    parse_dimacs,
    sat_path_decomposition,
)
from conflow.instance import (
    INF,
    CFInstance,
    MVTSPInstance,
    ParseError,
    format_solution,
    mvtsp_to_cf,
    parse_cf,
    parse_mvtsp,
    parse_solution,
    verify_solution,
    write_cf,
    write_mvtsp,
)
from conflow.kernel import kernelize, size_bound
from conflow.oracle import DEFAULT_NODE_LIMIT, solve_exact
from conflow.reduction import reduce_to_mvtsp, solve_via_reduction
from conflow.relaxation import solve_relaxation
from conflow.result import BudgetExceeded, SolveResult, Status, infeasible
from conflow.treedec import DecompositionError, heuristic_td, parse_td, write_td
from conflow.treewidth import solve_tw_dp, solve_with_reduction
from conflow.vc import compute_vertex_cover, solve_vc_fpt

FORMATS = """\
file formats (lines starting with 'c' are comments everywhere):
  Connected Flow   p cf <n> <m> <d>; <d> lines 'd <v> <dem>'; <m> lines 'e <u> <v> <cost> <cap>'
                   with <cap> a nonnegative integer or 'inf'
  MVTSP            p mvtsp <n>; 'd <v> <dem>' for every vertex; 'e <u> <v> <cost>' per allowed pair
  solution         's <cost>' (or 's infeasible') then 'f <u> <v> <mult>' sorted by (u, v)
  tree decomp.     PACE: 's td <bags> <width+1> <n>', 'b <id> <vertices...>', then '<a> <b>' tree edges
  vertex cover     whitespace separated vertex ids
  digraph          p digraph <n> <m>; <m> lines 'a <u> <v>'
  CNF              DIMACS 'p cnf <vars> <clauses>', clauses terminated by 0
  kernel map       'r <i> <j> <merged-id> <demand> <fixed-cost> <members...>'
  path table       'pt <u> <v> <cost> <len> <v1..vlen>'

exit codes: 0 ok, 1 infeasible / verification failed, 2 usage or input error, 3 budget exhausted
"""


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _header(text: str) -> str:
    for line in text.splitlines():
        tok = line.split()
        if tok and tok[0] == "p" and len(tok) > 1:
            return tok[1]
    return ""


def load_instance(path: str) -> tuple[CFInstance, MVTSPInstance | None]:
    text = _read(path)
    if _header(text) == "mvtsp":
        m = parse_mvtsp(text)
        return mvtsp_to_cf(m), m
    return parse_cf(text), None


def load_cover(path: str) -> list[int]:
    vals = []
    for line in _read(path).splitlines():
        tok = line.split()
        if tok and tok[0] != "c":
            try:
                vals += [int(t) for t in tok]
            except ValueError:
                raise InputError(f"{path}: cover file must list vertex ids") from None
    return vals


def choose_algorithm(inst: CFInstance) -> str:
    maxdem = max(inst.demand.values(), default=0)
    if len(inst.edges) <= 8 and maxdem <= 2:
        return "oracle"
    unbounded = all(e.cap == INF for e in inst.edges)
    if unbounded and 0 < len(inst.demand) <= 6 and len(inst.demand) < inst.n:
        return "mvtsp"
    cover = compute_vertex_cover(inst, k_max=4)
    if cover.exact and len(cover.vertices) <= 4:
        return "vc-fpt"
    return "tw-dp"


def _tw(inst: CFInstance, td=None) -> SolveResult:
    bound = 2 * inst.n * inst.n + inst.n
    if td is None and any(d > bound for d in inst.demand.values()):
        return solve_with_reduction(inst)
    return solve_tw_dp(inst, td)


def solve(inst: CFInstance, algo: str, args) -> SolveResult:
    if algo == "oracle":
        return solve_exact(inst, node_limit=args.node_limit)
    if algo == "vc-fpt":
        cover = load_cover(args.cover) if args.cover else None
        return solve_vc_fpt(inst, cover, threads=args.threads)
    if algo == "tw-dp":
        td = parse_td(_read(args.td)) if args.td else None
        return _tw(inst, td)
    if algo == "mvtsp":
        if any(e.cap != INF for e in inst.edges):
            raise InputError("--algo mvtsp needs unbounded capacities")
        status, cost, flow = solve_via_reduction(inst, _tw)
        if status != "optimal":
            return infeasible()
        return SolveResult(Status.OPTIMAL, cost, flow)
    raise InputError(f"unknown algorithm {algo}")


def cmd_solve(args) -> int:
    inst, _ = load_instance(args.file)
    algo = args.algo if args.algo != "auto" else choose_algorithm(inst)
    res = solve(inst, algo, args)
    if not res.feasible:
        _emit(f"c algo {algo}\ns infeasible\n", args.out)
        return 1
    _emit(format_solution(res.cost, res.flow, [f"algo {algo}"]), args.out)
    return 0


def cmd_relax(args) -> int:
    inst, _ = load_instance(args.file)
    res = solve_relaxation(inst)
    if not res.feasible:
        _emit("c relaxed\ns infeasible\n", args.out)
        return 1
    _emit(format_solution(res.cost, res.flow, ["relaxed"]), args.out)
    return 0


def cmd_verify(args) -> int:
    inst, _ = load_instance(args.file)
    cost, flow = parse_solution(_read(args.solution))
    if cost is None:
        print("solution declares the instance infeasible; nothing to verify")
        return 1
    try:
        rep = verify_solution(inst, flow)
    except ValueError as exc:
        print(f"invalid: {exc}")
        return 1
    if not rep.ok:
        print(f"invalid: {rep.first_violation}")
        return 1
    if rep.cost != cost:
        print(f"invalid: declared cost {cost} but flow costs {rep.cost}")
        return 1
    print(f"valid cost {rep.cost}")
    return 0


def _as_mvtsp(inst: CFInstance, m: MVTSPInstance | None) -> MVTSPInstance:
    if m is not None:
        return m
    if any(e.cap != INF for e in inst.edges):
        raise InputError("kernelization needs unbounded capacities (an MVTSP instance)")
    if len(inst.demand) != inst.n:
        raise InputError("kernelization needs a demand on every vertex (an MVTSP instance)")
    return MVTSPInstance(inst.n, {e.key: e.cost for e in inst.edges}, dict(inst.demand))


def cmd_kernelize(args) -> int:
    inst, m = load_instance(args.file)
    m = _as_mvtsp(inst, m)
    cf = mvtsp_to_cf(m)
    cover = load_cover(args.cover) if args.cover else sorted(compute_vertex_cover(cf).vertices)
    km, cmap, cls = kernelize(m, cover)
    k = len(cover)
    _emit(write_mvtsp(km), args.out)
    if args.map:
        Path(args.map).write_text("\n".join(cmap.lines() + [f"c fixed {cmap.fixed_cost}"]) + "\n")
    msg = (
        f"c kernel vertices {km.n} (bound {size_bound(k)}) cover {k} "
        f"merged {len(cmap.contractions)} fixed-cost {cmap.fixed_cost}\n"
    )
    (sys.stderr if not args.out else sys.stdout).write(msg)
    return 0


def cmd_reduce(args) -> int:
    inst, _ = load_instance(args.file)
    m, table = reduce_to_mvtsp(inst)
    _emit(write_mvtsp(m), args.out)
    if args.table:
        Path(args.table).write_text("\n".join(table.lines()) + "\n")
    return 0


def cmd_gen_dp(args) -> int:
    n, arcs = parse_digraph(_read(args.graph))
    q = DisjointPathsQuery(n, tuple(arcs), args.s1, args.t1, args.s2, args.t2)
    inst, layout = gen_disjoint_paths_instance(q)
    _emit(write_cf(inst), args.out)
    if args.layout:
        lines = [f"t {v} {vid}" for v, vid in sorted(layout.terminal_ids.items())]
        lines += [f"i {v} {layout.in_id[v]} {layout.out_id[v]}" for v in sorted(layout.in_id)]
        Path(args.layout).write_text("\n".join(lines) + "\n")
    return 0


def cmd_gen_sat(args) -> int:
    phi = parse_dimacs(_read(args.cnf))
    m, meta = gen_sat_instance(phi, args.group_size)
    _emit(write_mvtsp(m), args.out)
    if args.meta:
        Path(args.meta).write_text("\n".join(meta.lines()) + "\n")
    if args.td:
        check_decompositions(m, meta)
        Path(args.td).write_text(write_td(sat_path_decomposition(meta)))
    return 0


def cmd_stats(args) -> int:
    inst, m = load_instance(args.file)
    cover = compute_vertex_cover(inst, k_max=12 if inst.n <= 60 else 0)
    td = heuristic_td(inst)
    relax = solve_relaxation(inst)
    finite = sum(1 for e in inst.edges if e.cap != INF)
    lines = [
        f"kind {'mvtsp' if m is not None else 'cf'}",
        f"n {inst.n}",
        f"m {len(inst.edges)}",
        f"demand-vertices {len(inst.demand)}",
        f"total-demand {sum(inst.demand.values())}",
        f"max-demand {max(inst.demand.values(), default=0)}",
        f"finite-capacity-edges {finite}",
        f"vertex-cover {len(cover.vertices)} {'exact' if cover.exact else 'approx'}",
        f"td-width {td.width}",
        f"relaxation {relax.cost if relax.feasible else 'infeasible'}",
    ]
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="conflow",
        description="Connected Flow and Many-Visits TSP toolkit.",
        epilog=FORMATS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve to optimality", epilog=FORMATS, formatter_class=argparse.RawDescriptionHelpFormatter)
    s.add_argument("file", help="instance (cf or mvtsp format)")
    s.add_argument("--algo", default="auto", choices=["auto", "oracle", "vc-fpt", "tw-dp", "mvtsp"])
    s.add_argument("--cover", help="vertex cover file for vc-fpt")
    s.add_argument("--td", help="PACE tree decomposition for tw-dp")
    s.add_argument("--threads", type=int, default=1, help="worker threads for vc-fpt (output is identical)")
    s.add_argument("--node-limit", type=int, default=DEFAULT_NODE_LIMIT, help="search budget for the oracle")
    s.add_argument("--out", help="write the solution here instead of stdout")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("relax", help="solve the relaxation without connectivity")
    r.add_argument("file")
    r.add_argument("--out")
    r.set_defaults(func=cmd_relax)

    v = sub.add_parser("verify", help="check a solution file against an instance")
    v.add_argument("file")
    v.add_argument("solution")
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("kernelize", help="vertex-cover kernel of an MVTSP instance")
    k.add_argument("file")
    k.add_argument("--cover", help="vertex cover file (default: computed)")
    k.add_argument("--out", help="kernel instance (default stdout)")
    k.add_argument("--map", help="contraction map file")
    k.set_defaults(func=cmd_kernelize)

    red = sub.add_parser("reduce", help="reductions between problems")
    red_sub = red.add_subparsers(dest="target", required=True)
    rm = red_sub.add_parser("mvtsp", help="uncapacitated Connected Flow to MVTSP on the demand vertices")
    rm.add_argument("file")
    rm.add_argument("--out")
    rm.add_argument("--table", help="path table file")
    rm.set_defaults(func=cmd_reduce)

    g = sub.add_parser("gen", help="hardness instance generators")
    g_sub = g.add_subparsers(dest="family", required=True)
    gd = g_sub.add_parser("disjoint-paths", help="two disjoint paths query to Connected Flow")
    gd.add_argument("graph")
    for name in ("s1", "t1", "s2", "t2"):
        gd.add_argument(name, type=int)
    gd.add_argument("--out")
    gd.add_argument("--layout", help="vertex id layout file")
    gd.set_defaults(func=cmd_gen_dp)
    gs = g_sub.add_parser("sat", help="3-CNF formula to MVTSP")
    gs.add_argument("cnf")
    gs.add_argument("--group-size", type=int, required=True)
    gs.add_argument("--out")
    gs.add_argument("--meta", help="vertex id layout file")
    gs.add_argument("--td", help="validated path decomposition (PACE format)")
    gs.set_defaults(func=cmd_gen_sat)

    st = sub.add_parser("stats", help="textual instance statistics")
    st.add_argument("file")
    st.set_defaults(func=cmd_stats)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 3
    except (InputError, ParseError, DecompositionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
