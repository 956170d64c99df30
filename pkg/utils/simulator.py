"""
Schedule simulator for rtctimes

Discrete-event preemptive FP/EDF simulation of the synchronous release
pattern (every task releases at 0, T_i, 2 T_i, ...), with exact event times.
Used as the brute-force oracle for the analytic tests.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from typing_extensions import Literal

from utils.errors import HorizonError, TaskSetError
from utils.task_model import TaskSet, hyperperiod, known_wcets

logger = logging.getLogger("rtctimes")

Policy = Literal["fp", "edf"]
POLICIES = ("fp", "edf")


@dataclass
class Job:
    task_index: int
    job_index: int
    release: Fraction
    absolute_deadline: Fraction
    remaining: Fraction
    completion: Optional[Fraction] = None
    missed: bool = False


@dataclass(frozen=True)
class Segment:
    start: Fraction
    end: Fraction
    task_index: int
    job_index: int


@dataclass(frozen=True)
class MissReport:
    """First deadline miss. completion is None when the job was still running at the horizon."""
    task_index: int
    job_index: int
    deadline: Fraction
    completion: Optional[Fraction]
    reason: str = "deadline"


@dataclass
class Trace:
    policy: str
    horizon: Fraction
    segments: List[Segment] = field(default_factory=list)
    jobs: List[Job] = field(default_factory=list)
    first_miss: Optional[MissReport] = None

    @property
    def missed(self) -> bool:
        return self.first_miss is not None

    @property
    def unfinished(self) -> List[Job]:
        """Jobs still pending at the horizon."""
        return [job for job in self.jobs if job.completion is None]


def default_horizon(ts: TaskSet, policy: Policy) -> Fraction:
    """H for FP with constrained deadlines, H + max D otherwise."""
    if policy == "fp" and ts.deadline_model == "constrained":
        return hyperperiod(ts)
    return hyperperiod(ts) + max(ts.deadlines)


def _priority_key(policy: str, job: Job) -> Tuple:
    if policy == "edf":
        return job.absolute_deadline, job.task_index, job.job_index
    return job.task_index, job.job_index


class _Scheduler:
    """Holds the mutable state of one simulation run."""

    def __init__(self, ts: TaskSet, wcets: Sequence[Fraction], policy: str, horizon: Fraction):
        self.ts = ts
        self.wcets = wcets
        self.policy = policy
        self.horizon = horizon
        self.period_lcm = hyperperiod(ts)
        self.next_job = [0] * ts.n
        self.pending: List[Job] = []
        self.trace = Trace(policy=policy, horizon=horizon)

    def next_release(self) -> Optional[Fraction]:
        times = [j * period for j, period in zip(self.next_job, self.ts.periods)]
        times = [t for t in times if t <= self.horizon]
        return min(times) if times else None

    def release(self, now: Fraction) -> None:
        for position, task in enumerate(self.ts.tasks):
            j = self.next_job[position]
            if j * task.period == now and now <= self.horizon:
                job = Job(
                    task_index=position + 1,
                    job_index=j,
                    release=now,
                    absolute_deadline=now + task.deadline,
                    remaining=self.wcets[position],
                )
                self.pending.append(job)
                self.trace.jobs.append(job)
                self.next_job[position] += 1

    def top(self) -> Optional[Job]:
        if not self.pending:
            return None
        return min(self.pending, key=lambda job: _priority_key(self.policy, job))

    def settle(self, now: Fraction) -> None:
        # a finished job leaves only once it reaches the head of the queue
        top = self.top()
        while top is not None and top.remaining == 0:
            top.completion = now
            self.pending.remove(top)
            top = self.top()

    def record_miss(self, job: Job, reason: str) -> None:
        job.missed = True
        if self.trace.first_miss is None:
            self.trace.first_miss = MissReport(
                task_index=job.task_index,
                job_index=job.job_index,
                deadline=job.absolute_deadline,
                completion=None,
                reason=reason,
            )
            logger.debug(f"First miss: task {job.task_index} job {job.job_index} ({reason})")

    def check_deadlines(self, now: Fraction) -> None:
        late = [job for job in self.pending if not job.missed and job.absolute_deadline <= now]
        for job in sorted(late, key=lambda job: (job.absolute_deadline, job.task_index, job.job_index)):
            self.record_miss(job, "deadline")

    def check_backlog(self, now: Fraction) -> None:
        # work left from before H means total utilization above 1
        if now != self.period_lcm or self.horizon < self.period_lcm:
            return
        backlog = [job for job in self.pending if job.release < now and not job.missed]
        for job in sorted(backlog, key=lambda job: (job.absolute_deadline, job.task_index, job.job_index)):
            self.record_miss(job, "backlog")

    def next_event(self, now: Fraction, running: Optional[Job]) -> Fraction:
        candidates = [self.horizon]
        release = self.next_release()
        if release is not None:
            candidates.append(release)
        candidates.extend(job.absolute_deadline for job in self.pending
                          if not job.missed and job.absolute_deadline > now)
        if now < self.period_lcm:
            candidates.append(self.period_lcm)
        if running is not None:
            candidates.append(now + running.remaining)
        return min(t for t in candidates if t > now)

    def run_slice(self, job: Job, start: Fraction, end: Fraction) -> None:
        job.remaining -= end - start
        segments = self.trace.segments
        if segments and segments[-1].end == start and segments[-1].task_index == job.task_index \
                and segments[-1].job_index == job.job_index:
            last = segments.pop()
            start = last.start
        segments.append(Segment(start=start, end=end, task_index=job.task_index, job_index=job.job_index))

    def run(self) -> Trace:
        now = Fraction(0)
        while True:
            self.settle(now)
            self.check_deadlines(now)
            self.check_backlog(now)
            self.release(now)
            self.settle(now)
            if now >= self.horizon:
                break
            running = self.top()
            upcoming = self.next_event(now, running)
            if running is not None:
                self.run_slice(running, now, upcoming)
            now = upcoming
        self._fill_completions()
        return self.trace

    def _fill_completions(self) -> None:
        first = self.trace.first_miss
        if first is None:
            return
        for job in self.trace.jobs:
            if job.task_index == first.task_index and job.job_index == first.job_index:
                self.trace.first_miss = MissReport(
                    task_index=first.task_index,
                    job_index=first.job_index,
                    deadline=first.deadline,
                    completion=job.completion,
                    reason=first.reason,
                )


def simulate(ts: TaskSet, c: Optional[Sequence[Fraction]] = None, policy: Policy = "fp",
             horizon: Optional[Fraction] = None, horizon_cap: Optional[Fraction] = None) -> Trace:
    """
    Simulate [0, horizon] and report the first deadline miss.

    A job pending at its absolute deadline misses. When the horizon reaches
    the hyperperiod H, a job released before H and still pending at H is
    reported as an overload miss. Jobs still running at the horizon with a
    later deadline are left unfinished, not missed.
    """
    policy = policy.lower()
    if policy not in POLICIES:
        raise TaskSetError(f"Unknown scheduling policy {policy!r}")
    vector = known_wcets(ts, c)
    horizon = default_horizon(ts, policy) if horizon is None else Fraction(horizon)
    if horizon <= 0:
        raise HorizonError(f"Simulation horizon must be positive, got {horizon}")
    if horizon_cap is not None and horizon > horizon_cap:
        raise HorizonError(f"Horizon {horizon} exceeds the configured cap {horizon_cap}")

    trace = _Scheduler(ts, vector, policy, horizon).run()
    logger.info(f"Simulated {policy.upper()} over [0, {horizon}]: {len(trace.jobs)} jobs, "
                f"{'miss' if trace.missed else 'no miss'}")
    return trace


def response_times(trace: Trace) -> Dict[int, Optional[Fraction]]:
    """Worst observed completion - release per task; None when no job of the task finished."""
    worst: Dict[int, Optional[Fraction]] = {}
    for job in trace.jobs:
        worst.setdefault(job.task_index, None)
        if job.completion is None:
            continue
        response = job.completion - job.release
        if worst[job.task_index] is None or response > worst[job.task_index]:
            worst[job.task_index] = response
    return dict(sorted(worst.items()))
