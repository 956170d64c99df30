"""
EDF analysis for rtctimes

Exact EDF schedulability over the deadline set D:
- demand bound function and the normalized rows h(t) . C <= 1
- the if-and-only-if test (t = 0 stands for total utilization <= 1)
- extraction of the irredundant subset D_min
"""

import math
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from utils.lp_solver import eliminate_redundant
from utils.parser import render_rational
from utils.region_geometry import ConstraintRow, Polytope
from utils.task_model import TaskSet, hyperperiod, known_wcets

logger = logging.getLogger("rtctimes")


@dataclass(frozen=True)
class DeadlineSet:
    """Absolute deadlines up to H + max D, always with the sentinel 0."""
    instants: Tuple[Fraction, ...]
    horizon: Fraction
    hyperperiod: Fraction

    def __len__(self) -> int:
        return len(self.instants)

    @property
    def positive(self) -> Tuple[Fraction, ...]:
        return tuple(t for t in self.instants if t > 0)


@dataclass(frozen=True)
class EdfConstraint:
    coeffs: Tuple[Fraction, ...]
    instant: Fraction
    bound: Fraction = Fraction(1)

    def as_row(self) -> ConstraintRow:
        return ConstraintRow(coeffs=self.coeffs, bound=self.bound, label=f"t={render_rational(self.instant)}")


@dataclass
class EdfVerdict:
    schedulable: bool
    violated_instant: Optional[Fraction] = None
    min_slack: Optional[Fraction] = None
    min_slack_instant: Optional[Fraction] = None
    instants_checked: int = 0

    def __bool__(self) -> bool:
        return self.schedulable


@dataclass
class MinimalDeadlines:
    """D_min: the retained instants, their rows and the size of the full set."""
    instants: Tuple[Fraction, ...]
    rows: List[ConstraintRow] = field(default_factory=list)
    full_count: int = 0
    horizon: Fraction = Fraction(0)

    def __len__(self) -> int:
        return len(self.instants)


def _jobs_due(t: Fraction, period: Fraction, deadline: Fraction) -> int:
    # jobs of one task with release and deadline inside [0, t]
    return max(0, math.floor((t - deadline) / period) + 1)


def dbf(ts: TaskSet, c: Optional[Sequence[Fraction]], t: Fraction) -> Fraction:
    """Demand bound function: sum_i max(0, floor((t - D_i)/T_i) + 1) C_i."""
    vector = known_wcets(ts, c)
    t = Fraction(t)
    return sum(
        (_jobs_due(t, task.period, task.deadline) * wcet for task, wcet in zip(ts.tasks, vector)),
        Fraction(0),
    )


def deadline_set(ts: TaskSet) -> DeadlineSet:
    """Every j T_i + D_i <= H + max D (inclusive), merged, plus 0."""
    period_lcm = hyperperiod(ts)
    horizon = period_lcm + max(ts.deadlines)
    instants = {Fraction(0)}
    for task in ts.tasks:
        deadline = task.deadline
        while deadline <= horizon:
            instants.add(deadline)
            deadline += task.period
    logger.debug(f"Deadline set: {len(instants) - 1} positive instants up to {horizon}")
    return DeadlineSet(instants=tuple(sorted(instants)), horizon=horizon, hyperperiod=period_lcm)


def h_vector(ts: TaskSet, t: Fraction) -> EdfConstraint:
    """h(t) with h_i(0) = 1/T_i and h_i(t) = max(0, floor((t-D_i)/T_i)+1)/t otherwise."""
    t = Fraction(t)
    if t == 0:
        coeffs = tuple(1 / task.period for task in ts.tasks)
    else:
        coeffs = tuple(Fraction(_jobs_due(t, task.period, task.deadline), 1) / t for task in ts.tasks)
    return EdfConstraint(coeffs=coeffs, instant=t)


def edf_schedulable(ts: TaskSet, c: Optional[Sequence[Fraction]] = None) -> EdfVerdict:
    """
    Exact EDF test: h(t) . C <= 1 at every instant of the deadline set.

    On failure the earliest positive violated instant is reported, or 0 when
    only the utilization row fails. The minimum slack 1 - h(t) . C is
    reported either way.
    """
    vector = known_wcets(ts, c)
    instants = deadline_set(ts).instants
    verdict = EdfVerdict(schedulable=True, instants_checked=len(instants))
    utilization_violated = False

    for t in instants:
        row = h_vector(ts, t)
        slack = 1 - sum((a * x for a, x in zip(row.coeffs, vector)), Fraction(0))
        if verdict.min_slack is None or slack < verdict.min_slack:
            verdict.min_slack = slack
            verdict.min_slack_instant = t
        if slack < 0:
            verdict.schedulable = False
            if t == 0:
                utilization_violated = True
            elif verdict.violated_instant is None:
                verdict.violated_instant = t

    if utilization_violated and verdict.violated_instant is None:
        verdict.violated_instant = Fraction(0)
    logger.info(f"EDF verdict: {'schedulable' if verdict.schedulable else 'unschedulable'}"
                f" (min slack {verdict.min_slack} at t={verdict.min_slack_instant})")
    return verdict


def edf_rows(ts: TaskSet) -> List[ConstraintRow]:
    """The full row system, one row per member of the deadline set."""
    return [h_vector(ts, t).as_row() for t in deadline_set(ts).instants]


def edf_region(ts: TaskSet, minimal: bool = False) -> Polytope:
    rows = minimal_deadlines(ts).rows if minimal else edf_rows(ts)
    return Polytope(rows=tuple(rows), dimension=ts.n)


def minimal_deadlines(ts: TaskSet) -> MinimalDeadlines:
    """
    D_min with the rows that define the EDF region.

    Rows past the hyperperiod are implied by h(t-H) and h(0) and never reach
    the LP stage. Positive instants go first in ascending order and the
    sentinel last, so identical rows are credited to the earliest positive
    instant.
    """
    full = deadline_set(ts)
    period_lcm = full.hyperperiod

    by_label: Dict[str, Fraction] = {}
    candidates: List[ConstraintRow] = []
    for t in full.positive:
        if t > period_lcm:
            break
        row = h_vector(ts, t).as_row()
        by_label[row.label] = t
        candidates.append(row)
    sentinel = h_vector(ts, Fraction(0)).as_row()
    by_label[sentinel.label] = Fraction(0)
    candidates.append(sentinel)

    retained = eliminate_redundant(candidates)
    retained.sort(key=lambda row: by_label[row.label])
    instants = tuple(by_label[row.label] for row in retained)
    logger.info(f"|D| = {len(full)}, |D_min| = {len(instants)}: {[render_rational(t) for t in instants]}")
    return MinimalDeadlines(instants=instants, rows=retained, full_count=len(full), horizon=full.horizon)
