"""
Randomized |D_min| versus hyperperiod experiment for rtctimes

Samples integer task sets, computes |D| and |D_min| for each, and condenses
the cloud into an upper envelope over geometric hyperperiod buckets, a
density of |D_min| values and a fitted logarithmic constant.
"""

import math
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from utils.edf_analysis import minimal_deadlines
from utils.errors import ExperimentConfigError
from utils.task_model import Task, TaskSet, hyperperiod

logger = logging.getLogger("rtctimes")

DEADLINE_RULES = ("uniform_1_to_T", "equal_T")

# (instance id, periods, deadlines)
Instance = Tuple[int, Tuple[int, ...], Tuple[int, ...]]


@dataclass
class ExperimentConfig:
    task_count: int = 2
    period_lo: int = 2
    period_hi: int = 50
    deadline_rule: str = "uniform_1_to_T"
    sample_count: int = 1000
    seed: int = 0
    output_path: Optional[str] = None

    def validate(self) -> None:
        if self.task_count < 1:
            raise ExperimentConfigError(f"Task count must be at least 1, got {self.task_count}")
        if self.period_lo < 2:
            raise ExperimentConfigError(f"Lowest period must be at least 2, got {self.period_lo}")
        if self.period_lo > self.period_hi:
            raise ExperimentConfigError(f"Empty period range [{self.period_lo}, {self.period_hi}]")
        if self.sample_count < 1:
            raise ExperimentConfigError(f"Sample count must be at least 1, got {self.sample_count}")
        if self.deadline_rule not in DEADLINE_RULES:
            raise ExperimentConfigError(f"Unknown deadline rule {self.deadline_rule!r}")


@dataclass(frozen=True)
class ExperimentRecord:
    instance_id: int
    periods: Tuple[int, ...]
    deadlines: Tuple[int, ...]
    hyperperiod: int
    d_count: int
    dmin_count: int


@dataclass(frozen=True)
class EnvelopeBucket:
    """Records with 2^index <= H < 2^(index+1)."""
    index: int
    lower: int
    upper: int
    instances: int
    envelope: int
    prefix_max: int
    d_count_at_envelope: int


@dataclass
class ExperimentSummary:
    records: List[ExperimentRecord] = field(default_factory=list)
    buckets: List[EnvelopeBucket] = field(default_factory=list)
    density: List[Tuple[int, int, Fraction]] = field(default_factory=list)
    log_constant: float = 0.0
    largest_bucket_ratio: float = 0.0


def generate_instances(config: ExperimentConfig) -> List[Instance]:
    """
    Draw every instance up front from one seeded generator.

    Periods are uniform integers in [lo, hi]; deadlines are uniform integers
    in [1, T_i] or equal to T_i. Instances depend only on the seed.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    instances = []
    for instance_id in range(config.sample_count):
        periods = rng.integers(config.period_lo, config.period_hi + 1, size=config.task_count)
        if config.deadline_rule == "equal_T":
            deadlines = periods.copy()
        else:
            deadlines = rng.integers(1, periods + 1)
        instances.append((instance_id, tuple(int(p) for p in periods), tuple(int(d) for d in deadlines)))
    return instances


def evaluate_instance(instance: Instance) -> ExperimentRecord:
    instance_id, periods, deadlines = instance
    ts = TaskSet(tasks=tuple(Task(period=Fraction(p), deadline=Fraction(d)) for p, d in zip(periods, deadlines)))
    minimal = minimal_deadlines(ts)
    return ExperimentRecord(
        instance_id=instance_id,
        periods=periods,
        deadlines=deadlines,
        hyperperiod=int(hyperperiod(ts)),
        d_count=minimal.full_count,
        dmin_count=len(minimal),
    )


def bucket_index(h: int) -> int:
    """floor(log2 H), exact for integers."""
    return h.bit_length() - 1


def envelope(records: List[ExperimentRecord]) -> List[EnvelopeBucket]:
    """Max |D_min| per nonempty bucket, raw and as a running maximum."""
    grouped: Dict[int, List[ExperimentRecord]] = {}
    for record in records:
        grouped.setdefault(bucket_index(record.hyperperiod), []).append(record)

    buckets = []
    running = 0
    for index in sorted(grouped):
        members = grouped[index]
        top = max(members, key=lambda r: (r.dmin_count, -r.d_count))
        running = max(running, top.dmin_count)
        buckets.append(EnvelopeBucket(
            index=index,
            lower=2 ** index,
            upper=2 ** (index + 1),
            instances=len(members),
            envelope=top.dmin_count,
            prefix_max=running,
            d_count_at_envelope=top.d_count,
        ))
    return buckets


def density(records: List[ExperimentRecord]) -> List[Tuple[int, int, Fraction]]:
    """(|D_min|, instances, fraction of all instances), by increasing |D_min|."""
    counts: Dict[int, int] = {}
    for record in records:
        counts[record.dmin_count] = counts.get(record.dmin_count, 0) + 1
    total = len(records)
    return [(value, counts[value], Fraction(counts[value], total)) for value in sorted(counts)]


def log_constant(records: List[ExperimentRecord]) -> float:
    """Smallest c with |D_min| <= c log2(H) on every record."""
    return max((r.dmin_count / math.log2(r.hyperperiod) for r in records if r.hyperperiod > 1), default=0.0)


def summarize(records: List[ExperimentRecord]) -> ExperimentSummary:
    buckets = envelope(records)
    ratio = 0.0
    if buckets and buckets[-1].d_count_at_envelope:
        ratio = buckets[-1].envelope / buckets[-1].d_count_at_envelope
    return ExperimentSummary(
        records=records,
        buckets=buckets,
        density=density(records),
        log_constant=log_constant(records),
        largest_bucket_ratio=ratio,
    )


class ExperimentRunner:
    """Evaluates a configuration, in-process or on a process pool."""

    def __init__(self, config: ExperimentConfig, workers: int = 1):
        config.validate()
        self.config = config
        self.workers = max(1, workers)
        self.processed_count = 0
        self.start_time = None

    def run(self) -> ExperimentSummary:
        self.start_time = datetime.now()
        instances = generate_instances(self.config)
        logger.info(f"Experiment: {len(instances)} instances, n={self.config.task_count}, "
                    f"periods in [{self.config.period_lo}, {self.config.period_hi}], "
                    f"deadlines {self.config.deadline_rule}, seed {self.config.seed}, {self.workers} worker(s)")

        if self.workers == 1:
            records = [evaluate_instance(instance) for instance in instances]
        else:
            chunk = max(1, len(instances) // (self.workers * 8))
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                records = list(pool.map(evaluate_instance, instances, chunksize=chunk))
        records.sort(key=lambda r: r.instance_id)
        self.processed_count = len(records)

        summary = summarize(records)
        duration = datetime.now() - self.start_time
        logger.info(f"Total processed: {self.processed_count}")
        logger.info(f"Fitted constant c = {summary.log_constant:.4f}; "
                    f"largest-bucket ratio {summary.largest_bucket_ratio:.4f}")
        logger.info(f"Duration: {duration}")
        return summary
