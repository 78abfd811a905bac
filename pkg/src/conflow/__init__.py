"""Exact solvers, reductions and generators for Connected Flow and Many-Visits TSP."""

from conflow.instance import (
    INF,
    CFInstance,
    Edge,
    MVTSPInstance,
    ParseError,
    VerificationReport,
    format_solution,
    mvtsp_to_cf,
    parse_cf,
    parse_mvtsp,
    parse_solution,
    verify_solution,
    write_cf,
    write_mvtsp,
)

__all__ = [
    "INF",
    "CFInstance",
    "Edge",
    "MVTSPInstance",
    "ParseError",
    "VerificationReport",
    "format_solution",
    "mvtsp_to_cf",
    "parse_cf",
    "parse_mvtsp",
    "parse_solution",
    "verify_solution",
    "write_cf",
    "write_mvtsp",
]
