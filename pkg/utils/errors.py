"""
Exception hierarchy for rtctimes.

Analysis functions raise these; the command-line front end maps every
RtcTimesError to exit status 2.
"""


class RtcTimesError(Exception):
    """Base class for every error raised by the analysis package."""


class TaskSetError(RtcTimesError):
    """Invalid task set, dimension mismatch or missing execution times."""


class TaskFileError(RtcTimesError):
    """Malformed task-set file or unparsable rational."""


class PriorityOrderError(RtcTimesError):
    """Reduced schedulability points requested on a non deadline-monotonic order."""


class DeadlineModelError(RtcTimesError):
    """Operation restricted to constrained deadlines called on an arbitrary-deadline set."""


class RegionError(RtcTimesError):
    """Unbounded or infeasible region, or unsupported dimension."""


class HorizonError(RtcTimesError):
    """Simulation horizon is non-positive or above the configured cap."""


class ExperimentConfigError(RtcTimesError):
    """Experiment configuration cannot be satisfied."""
