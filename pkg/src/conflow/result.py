from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from conflow.instance import Flow


class Status(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass
class SolveResult:
    status: Status
    cost: int
    flow: Flow
    nodes_explored: int = 0
    stats: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status is Status.OPTIMAL


def infeasible(**stats) -> SolveResult:
    return SolveResult(Status.INFEASIBLE, 0, {}, stats=stats)


class BudgetExceeded(RuntimeError):
    pass
