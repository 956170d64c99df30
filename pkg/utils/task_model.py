"""
Task model for rtctimes
Periodic tasks, task sets and execution-time vectors, all over exact rationals.
"""

import math
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from utils.errors import TaskSetError

logger = logging.getLogger("rtctimes")

DEADLINE_MODELS = ("constrained", "arbitrary")

# A candidate execution-time assignment C = [C_1, ..., C_n]
ExecVector = Tuple[Fraction, ...]


@dataclass(frozen=True)
class Task:
    """A periodic task: period T, relative deadline D, optional worst-case execution time C."""
    period: Fraction
    deadline: Fraction
    wcet: Optional[Fraction] = None

    @property
    def utilization(self) -> Fraction:
        """U = C/T, defined only when the execution time is known."""
        if self.wcet is None:
            raise TaskSetError("Utilization needs a known execution time")
        return self.wcet / self.period


@dataclass(frozen=True)
class TaskSet:
    """
    Tasks listed by decreasing fixed priority (index 1 is the highest).

    Priority is encoded purely by position; EDF ignores the order.
    """
    tasks: Tuple[Task, ...]
    deadline_model: str = "constrained"

    def __post_init__(self):
        if not self.tasks:
            raise TaskSetError("A task set needs at least one task")
        if self.deadline_model not in DEADLINE_MODELS:
            raise TaskSetError(f"Unknown deadline model {self.deadline_model!r}")

    @property
    def n(self) -> int:
        return len(self.tasks)

    @property
    def periods(self) -> Tuple[Fraction, ...]:
        return tuple(task.period for task in self.tasks)

    @property
    def deadlines(self) -> Tuple[Fraction, ...]:
        return tuple(task.deadline for task in self.tasks)

    @property
    def wcets(self) -> Tuple[Optional[Fraction], ...]:
        return tuple(task.wcet for task in self.tasks)

    def task(self, i: int) -> Task:
        """Task by 1-based priority index."""
        if not 1 <= i <= self.n:
            raise TaskSetError(f"Task index {i} out of range 1..{self.n}")
        return self.tasks[i - 1]

    def with_wcets(self, c: Sequence[Fraction]) -> "TaskSet":
        vector = exec_vector(self, c)
        return TaskSet(
            tasks=tuple(Task(t.period, t.deadline, w) for t, w in zip(self.tasks, vector)),
            deadline_model=self.deadline_model,
        )

    def with_deadline_model(self, deadline_model: str) -> "TaskSet":
        return TaskSet(tasks=self.tasks, deadline_model=deadline_model)


@dataclass
class ValidationReport:
    """Outcome of validate(): violations found plus the deadline-monotonic flag."""
    violations: List[str] = field(default_factory=list)
    dm_ordered: bool = True

    @property
    def valid(self) -> bool:
        return not self.violations


def exec_vector(ts: TaskSet, c: Sequence) -> ExecVector:
    """Check a candidate vector against ts and return it as a tuple of Fractions."""
    if len(c) != ts.n:
        raise TaskSetError(f"Execution-time vector has {len(c)} entries, task set has {ts.n} tasks")
    vector = tuple(Fraction(value) for value in c)
    if any(value < 0 for value in vector):
        raise TaskSetError(f"Negative execution time in {vector}")
    return vector


def known_wcets(ts: TaskSet, c: Optional[Sequence] = None) -> ExecVector:
    """The vector to analyze: c when given, otherwise the task set's own execution times."""
    if c is not None:
        return exec_vector(ts, c)
    missing = [i for i, w in enumerate(ts.wcets, start=1) if w is None]
    if missing:
        raise TaskSetError(f"Execution time missing for task(s) {missing}")
    return exec_vector(ts, ts.wcets)


def utilization_vector(ts: TaskSet, c: Sequence) -> List[Fraction]:
    """[C_1/T_1, ..., C_n/T_n], exact."""
    vector = exec_vector(ts, c)
    return [value / period for value, period in zip(vector, ts.periods)]


def total_utilization(ts: TaskSet, c: Sequence) -> Fraction:
    return sum(utilization_vector(ts, c), Fraction(0))


def hyperperiod(ts: TaskSet) -> Fraction:
    """
    Smallest positive H with H/T_i integral for every task.

    With T_i = p_i/q_i in lowest terms, H = lcm(p_1..p_n) / gcd(q_1..q_n).
    """
    numerators = [period.numerator for period in ts.periods]
    denominators = [period.denominator for period in ts.periods]
    return Fraction(math.lcm(*numerators), math.gcd(*denominators))


def is_dm_ordered(ts: TaskSet, upto: Optional[int] = None) -> bool:
    """True when D_1 <= D_2 <= ... holds over the first `upto` tasks (all by default)."""
    deadlines = ts.deadlines[:upto] if upto is not None else ts.deadlines
    return all(a <= b for a, b in zip(deadlines, deadlines[1:]))


def validate(ts: TaskSet) -> ValidationReport:
    """Report-style validation; never raises for content problems."""
    report = ValidationReport(dm_ordered=is_dm_ordered(ts))
    for i, task in enumerate(ts.tasks, start=1):
        if task.period <= 0:
            report.violations.append(f"task {i}: period must be positive (T={task.period})")
        if task.deadline <= 0:
            report.violations.append(f"task {i}: deadline must be positive (D={task.deadline})")
        if task.wcet is not None and task.wcet < 0:
            report.violations.append(f"task {i}: negative execution time (C={task.wcet})")
        if ts.deadline_model == "constrained" and task.deadline > task.period:
            report.violations.append(
                f"task {i}: D > T under the constrained deadline model (D={task.deadline}, T={task.period})")

    if report.violations:
        logger.info(f"Task set failed validation: {'; '.join(report.violations)}")
    return report
