"""
Reward maximization for rtctimes

Linear rewards w . C over schedulable execution times:
- EDF: one LP over the D_min rows (or the full rows)
- FP: one LP per selection of a schedulability point per task, with pruning
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from utils.edf_analysis import edf_rows, minimal_deadlines
from utils.errors import TaskSetError
from utils.fp_analysis import PointSource, fp_region
from utils.lp_solver import LpOutcome, maximize
from utils.region_geometry import ConstraintRow
from utils.task_model import TaskSet

logger = logging.getLogger("rtctimes")

DEFAULT_SELECTION_LIMIT = 8


@dataclass
class FpOptimum:
    """Best LP outcome over all selections, with the chosen point per task."""
    outcome: LpOutcome
    selection: Dict[int, Fraction] = field(default_factory=dict)
    selections_solved: int = 0
    selections_pruned: int = 0


def _objective(ts: TaskSet, w: Sequence) -> List[Fraction]:
    if len(w) != ts.n:
        raise TaskSetError(f"Weight vector has {len(w)} entries, task set has {ts.n} tasks")
    return [Fraction(value) for value in w]


def max_reward_edf(ts: TaskSet, w: Sequence, minimal: bool = True) -> LpOutcome:
    """Maximize w . C over the EDF region."""
    objective = _objective(ts, w)
    rows = minimal_deadlines(ts).rows if minimal else edf_rows(ts)
    outcome = maximize(objective, rows)
    logger.info(f"EDF optimum over {len(rows)} rows: {outcome.status} {outcome.optimum}")
    return outcome


def _single_row_bound(objective: Sequence[Fraction], row: ConstraintRow) -> Optional[Fraction]:
    """Optimum over one row alone; None stands for +infinity."""
    outcome = maximize(objective, [row])
    return outcome.optimum if outcome.is_optimal else None


def max_reward_fp(ts: TaskSet, w: Sequence, point_source: PointSource = "lehoczky",
                  selection_limit: int = DEFAULT_SELECTION_LIMIT) -> FpOptimum:
    """
    Maximize w . C over the FP region.

    Each selection picks one row per task and is solved as a plain LP. A
    selection is skipped when the weakest single-row bound among its rows
    cannot beat the incumbent. Ties keep the first selection found.
    """
    objective = _objective(ts, w)
    if ts.n > selection_limit:
        logger.warning(f"{ts.n} tasks exceed the selection limit of {selection_limit}; enumeration may be slow")

    region = fp_region(ts, point_source)
    bounds = [[_single_row_bound(objective, row) for row in group] for group in region.groups]

    best: Optional[FpOptimum] = None
    solved = pruned = 0
    for picked in itertools.product(*(range(len(group)) for group in region.groups)):
        if best is not None:
            finite = [bounds[g][k] for g, k in enumerate(picked) if bounds[g][k] is not None]
            if finite and min(finite) <= best.outcome.optimum:
                pruned += 1
                continue
        rows = [group[k] for group, k in zip(region.groups, picked)]
        outcome = maximize(objective, rows)
        solved += 1
        if not outcome.is_optimal:
            continue
        if best is None or outcome.optimum > best.outcome.optimum:
            selection = {g + 1: rows[g].bound for g in range(len(rows))}
            best = FpOptimum(outcome=outcome, selection=selection)

    if best is None:
        # every selection unbounded
        return FpOptimum(outcome=LpOutcome(status="unbounded"), selections_solved=solved, selections_pruned=pruned)

    # report every row of the full region touched by the optimum
    best.outcome.binding_rows = [row.label for row in region.rows if row.evaluate(best.outcome.argmax) == row.bound]
    best.selections_solved = solved
    best.selections_pruned = pruned
    logger.info(f"FP optimum {best.outcome.optimum} at {best.outcome.argmax}; "
                f"{solved} selections solved, {pruned} pruned")
    return best
