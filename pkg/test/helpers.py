"""
Shared test helpers: task-set builders and the random instance generator
used by the randomized suites.
"""

import os
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from utils.task_model import Task, TaskSet

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")

# Full acceptance sizes only when asked for
FULL_SUITES = os.getenv("RTCTIMES_FULL_SUITES") == "1"

# Hyperperiod of any subset stays <= 60
PERIOD_POOL = [Fraction(p) for p in (2, 3, 4, 5, 6, 10, 12, 15)] + [Fraction(3, 2), Fraction(5, 2), Fraction(15, 2)]


def data_file(name: str) -> str:
    return os.path.join(DATA_DIR, name)


def make_task_set(periods: Sequence, deadlines: Sequence, wcets: Optional[Sequence] = None,
                  deadline_model: str = "constrained") -> TaskSet:
    wcets = wcets if wcets is not None else [None] * len(periods)
    tasks = tuple(
        Task(period=Fraction(t), deadline=Fraction(d), wcet=None if c is None else Fraction(c))
        for t, d, c in zip(periods, deadlines, wcets)
    )
    return TaskSet(tasks=tasks, deadline_model=deadline_model)


def uunifast(rng: np.random.Generator, n: int, total: float) -> List[float]:
    """Uniformly distributed utilizations summing to total."""
    utilizations = []
    remaining = total
    for i in range(1, n):
        following = remaining * rng.random() ** (1.0 / (n - i))
        utilizations.append(remaining - following)
        remaining = following
    utilizations.append(remaining)
    return utilizations


def random_task_set(rng: np.random.Generator, n: int, deadline_model: str = "constrained",
                    dm_order: bool = False, utilization: Optional[float] = None) -> TaskSet:
    """
    Random rational instance with small hyperperiod.

    Deadlines are multiples of T/4 (up to T when constrained, up to 2T
    otherwise); execution times are uunifast shares rounded to 1/8.
    """
    picks = rng.choice(len(PERIOD_POOL), size=n)
    periods = [PERIOD_POOL[k] for k in picks]
    top = 4 if deadline_model == "constrained" else 8
    deadlines = [t * Fraction(int(rng.integers(1, top + 1)), 4) for t in periods]
    total = utilization if utilization is not None else float(rng.uniform(0.3, 1.2))
    wcets = [Fraction(int(round(u * float(t) * 8)), 8) for u, t in zip(uunifast(rng, n, total), periods)]
    if dm_order:
        order = sorted(range(n), key=lambda k: deadlines[k])
        periods = [periods[k] for k in order]
        deadlines = [deadlines[k] for k in order]
        wcets = [wcets[k] for k in order]
    return make_task_set(periods, deadlines, wcets, deadline_model)


def random_probe(rng: np.random.Generator, n: int, scale: Fraction) -> tuple:
    """Rational probe vector with coordinates in [0, scale] on a 1/16 grid."""
    return tuple(Fraction(int(rng.integers(0, 16 * scale.numerator + 1)), 16 * scale.denominator) for _ in range(n))
