"""
Fixed Priority analysis for rtctimes

Exact FP schedulability through workload constraints k_i(t) . C <= t:
- schedulability point sets (Lehoczky's full set and the reduced recursive set)
- the if-and-only-if test for constrained deadlines
- the per-job extension for arbitrary deadlines with known execution times
- the FP region as an and/or system of rows
"""

import math
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

from typing_extensions import Literal

from utils.errors import DeadlineModelError, PriorityOrderError, TaskSetError
from utils.parser import render_rational
from utils.region_geometry import AndOrRegion, ConstraintRow
from utils.task_model import TaskSet, is_dm_ordered, known_wcets

logger = logging.getLogger("rtctimes")

PointSource = Literal["lehoczky", "reduced"]
POINT_SOURCES = ("lehoczky", "reduced")


@dataclass(frozen=True)
class SchedPointSet:
    task_index: int
    points: Tuple[Fraction, ...]
    provenance: str

    def __len__(self) -> int:
        return len(self.points)

    @property
    def positive(self) -> Tuple[Fraction, ...]:
        return tuple(t for t in self.points if t > 0)


@dataclass(frozen=True)
class FpConstraint:
    """k_i(t) . C <= t, or k_i(t, j) . C <= t for job j of task i."""
    coeffs: Tuple[Fraction, ...]
    bound: Fraction
    task_index: int
    point: Fraction
    job_index: Optional[int] = None

    def as_row(self) -> ConstraintRow:
        label = f"task{self.task_index}@t={render_rational(self.point)}"
        if self.job_index is not None:
            label += f",j={self.job_index}"
        return ConstraintRow(coeffs=self.coeffs, bound=self.bound, label=label)

    def slack(self, c: Sequence[Fraction]) -> Fraction:
        return self.bound - sum((a * x for a, x in zip(self.coeffs, c)), Fraction(0))


@dataclass
class TaskVerdict:
    """Outcome for one task: the witness point (or job) and its slack."""
    task_index: int
    schedulable: bool
    witness: Optional[Fraction] = None
    slack: Optional[Fraction] = None
    failing_job: Optional[int] = None
    jobs_checked: int = 1


@dataclass
class FpVerdict:
    schedulable: bool
    failing_task: Optional[int] = None
    tasks: List[TaskVerdict] = field(default_factory=list)
    point_source: str = "lehoczky"

    @property
    def witnesses(self) -> Dict[int, Fraction]:
        return {v.task_index: v.witness for v in self.tasks if v.witness is not None}

    def __bool__(self) -> bool:
        return self.schedulable


def _check_index(ts: TaskSet, i: int) -> None:
    if not 1 <= i <= ts.n:
        raise TaskSetError(f"Task index {i} out of range 1..{ts.n}")


def _check_source(point_source: str) -> None:
    if point_source not in POINT_SOURCES:
        raise TaskSetError(f"Unknown point source {point_source!r}")


def k_vector(ts: TaskSet, i: int, t: Fraction, j: Optional[int] = None) -> FpConstraint:
    """
    Row (ceil(t/T_1), ..., ceil(t/T_{i-1}), j+1, 0, ..., 0) with bound t.

    The default job index j=0 gives the constrained-deadline row k_i(t).
    """
    _check_index(ts, i)
    t = Fraction(t)
    if t < 0:
        raise TaskSetError(f"Schedulability point must be nonnegative, got {t}")
    own = Fraction((j or 0) + 1)
    coeffs = []
    for position, period in enumerate(ts.periods, start=1):
        if position < i:
            coeffs.append(Fraction(math.ceil(t / period)))
        elif position == i:
            coeffs.append(own)
        else:
            coeffs.append(Fraction(0))
    return FpConstraint(coeffs=tuple(coeffs), bound=t, task_index=i, point=t, job_index=j)


def lehoczky_points(ts: TaskSet, i: int, upto: Optional[Fraction] = None) -> SchedPointSet:
    """
    Release instants of higher-priority tasks up to D_i, plus D_i itself.

    Zero counts as a release instant whenever task i has higher-priority
    tasks. With `upto` the limit D_i is replaced (the arbitrary-deadline
    test asks for points up to j*T_i + D_i).
    """
    _check_index(ts, i)
    limit = ts.task(i).deadline if upto is None else Fraction(upto)
    points: Set[Fraction] = {limit}
    for period in ts.periods[:i - 1]:
        count = math.floor(limit / period)
        points.update(period * k for k in range(count + 1))
    return SchedPointSet(task_index=i, points=tuple(sorted(points)), provenance="lehoczky")


def _reduce(periods: Sequence[Fraction], level: int, t: Fraction, acc: Set[Fraction]) -> None:
    # P_0(t) = {t};  P_l(t) = P_{l-1}(floor(t/T_l) T_l)  U  P_{l-1}(t)
    if t <= 0:
        return
    if level == 0:
        acc.add(t)
        return
    period = periods[level - 1]
    _reduce(periods, level - 1, math.floor(t / period) * period, acc)
    _reduce(periods, level - 1, t, acc)


def reduced_points(ts: TaskSet, i: int, t: Optional[Fraction] = None) -> SchedPointSet:
    """P_{i-1}(t), t defaulting to D_i; only valid under deadline-monotonic order."""
    _check_index(ts, i)
    if not is_dm_ordered(ts, upto=i):
        raise PriorityOrderError(f"Reduced points need deadline-monotonic order over tasks 1..{i}")
    t = ts.task(i).deadline if t is None else Fraction(t)
    if t <= 0:
        raise TaskSetError(f"Reduced points need t > 0, got {t}")
    acc: Set[Fraction] = set()
    _reduce(ts.periods, i - 1, t, acc)
    return SchedPointSet(task_index=i, points=tuple(sorted(acc)), provenance="reduced")


def point_set(ts: TaskSet, i: int, point_source: PointSource = "lehoczky",
              upto: Optional[Fraction] = None) -> SchedPointSet:
    """Dispatch on the point source."""
    _check_source(point_source)
    if point_source == "reduced":
        return reduced_points(ts, i, upto)
    return lehoczky_points(ts, i, upto)


def _require_constrained(ts: TaskSet, operation: str) -> None:
    if ts.deadline_model != "constrained":
        raise DeadlineModelError(f"{operation} needs constrained deadlines; use the arbitrary-deadline test")


def fp_schedulable(ts: TaskSet, c: Optional[Sequence[Fraction]] = None,
                   point_source: PointSource = "lehoczky") -> FpVerdict:
    """
    Exact FP test for constrained deadlines.

    Each task needs one point t > 0 of its set with k_i(t) . C <= t; points
    are tried in increasing order and the first one found is the witness.
    """
    _require_constrained(ts, "fp_schedulable")
    vector = known_wcets(ts, c)
    verdict = FpVerdict(schedulable=True, point_source=point_source)

    for i in range(1, ts.n + 1):
        points = point_set(ts, i, point_source).positive
        task_verdict = TaskVerdict(task_index=i, schedulable=False)
        for t in points:
            slack = k_vector(ts, i, t).slack(vector)
            if slack >= 0:
                task_verdict.schedulable = True
                task_verdict.witness = t
                task_verdict.slack = slack
                break
        verdict.tasks.append(task_verdict)
        if not task_verdict.schedulable:
            verdict.schedulable = False
            verdict.failing_task = i
            logger.debug(f"Task {i} fails at every one of its {len(points)} points")
            break

    logger.info(f"FP ({point_source}) verdict: {'schedulable' if verdict.schedulable else 'unschedulable'}")
    return verdict


def busy_period(ts: TaskSet, c: Sequence[Fraction], i: int) -> Fraction:
    """
    Length of the synchronous level-i busy interval.

    Fixed point of L = sum_{l<=i} ceil(L/T_l) C_l from L = sum_{l<=i} C_l;
    the caller guarantees sum_{l<=i} U_l <= 1 so the iteration stops.
    """
    vector = known_wcets(ts, c)
    length = sum(vector[:i], Fraction(0))
    if length == 0:
        return length
    while True:
        demand = sum(
            (math.ceil(length / period) * wcet for period, wcet in zip(ts.periods[:i], vector[:i])),
            Fraction(0),
        )
        if demand == length:
            return length
        length = demand


def fp_schedulable_arbitrary(ts: TaskSet, c: Optional[Sequence[Fraction]] = None,
                             point_source: PointSource = "lehoczky") -> FpVerdict:
    """
    Exact FP test for arbitrary deadlines and known execution times.

    For every task the jobs released inside the level-i busy interval are
    checked one by one: job j needs a point t in (0, j T_i + D_i] with
    k_i(t, j) . C <= t. Total utilization above 1 is unschedulable outright.
    """
    vector = known_wcets(ts, c)
    verdict = FpVerdict(schedulable=True, point_source=point_source)

    utilization = Fraction(0)
    for i, (period, wcet) in enumerate(zip(ts.periods, vector), start=1):
        utilization += wcet / period
        if utilization > 1:
            logger.info(f"Utilization of tasks 1..{i} is {utilization} > 1: busy interval never ends")
            verdict.schedulable = False
            verdict.failing_task = i
            verdict.tasks.append(TaskVerdict(task_index=i, schedulable=False, jobs_checked=0))
            return verdict

    for i in range(1, ts.n + 1):
        task = ts.task(i)
        length = busy_period(ts, vector, i)
        last_job = max(0, math.ceil(length / task.period) - 1)
        task_verdict = TaskVerdict(task_index=i, schedulable=True, jobs_checked=last_job + 1)
        worst_slack: Optional[Fraction] = None
        for j in range(last_job + 1):
            limit = j * task.period + task.deadline
            found = None
            for t in point_set(ts, i, point_source, upto=limit).positive:
                slack = k_vector(ts, i, t, j).slack(vector)
                if slack >= 0:
                    found = (t, slack)
                    break
            if found is None:
                task_verdict.schedulable = False
                task_verdict.failing_job = j
                break
            if worst_slack is None or found[1] < worst_slack:
                worst_slack = found[1]
                task_verdict.witness = found[0]
                task_verdict.slack = found[1]
        verdict.tasks.append(task_verdict)
        logger.debug(f"Task {i}: busy interval {length}, {last_job + 1} job(s) checked")
        if not task_verdict.schedulable:
            verdict.schedulable = False
            verdict.failing_task = i
            break

    logger.info(f"FP arbitrary-deadline verdict: {'schedulable' if verdict.schedulable else 'unschedulable'}")
    return verdict


def fp_region(ts: TaskSet, point_source: PointSource = "lehoczky") -> AndOrRegion:
    """One group per task, one row per positive schedulability point; execution times ignored."""
    _require_constrained(ts, "fp_region")
    groups = []
    for i in range(1, ts.n + 1):
        points = point_set(ts, i, point_source).positive
        groups.append(tuple(k_vector(ts, i, t).as_row() for t in points))
    logger.debug(f"FP region ({point_source}): {[len(g) for g in groups]} rows per task")
    return AndOrRegion(groups=tuple(groups), dimension=ts.n)


def fp_check(ts: TaskSet, c: Optional[Sequence[Fraction]] = None,
             point_source: PointSource = "lehoczky") -> FpVerdict:
    """Pick the test matching the task set's deadline model."""
    if ts.deadline_model == "arbitrary":
        return fp_schedulable_arbitrary(ts, c, point_source)
    return fp_schedulable(ts, c, point_source)
