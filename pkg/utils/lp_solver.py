"""
Exact linear programming for rtctimes

Dense two-phase simplex over Fractions with Bland's rule, plus the
redundancy-elimination engine that turns a full constraint system into its
irredundant subset.

Every problem has the form: maximize objective . x subject to rows, x >= 0.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from utils.errors import RegionError
from utils.region_geometry import ConstraintRow
from utils.task_model import ExecVector

logger = logging.getLogger("rtctimes")

LP_STATUSES = ("optimal", "infeasible", "unbounded")


@dataclass(frozen=True)
class LpProblem:
    """maximize objective . C subject to every row and C >= 0."""
    objective: Tuple[Fraction, ...]
    rows: Tuple[ConstraintRow, ...]

    def __post_init__(self):
        for row in self.rows:
            if row.dimension != len(self.objective):
                raise RegionError(
                    f"Row {row.label or row.coeffs} has dimension {row.dimension}, "
                    f"objective has {len(self.objective)}")

    @property
    def dimension(self) -> int:
        return len(self.objective)


@dataclass
class LpOutcome:
    status: str
    optimum: Optional[Fraction] = None
    argmax: Optional[ExecVector] = None
    binding_rows: List[str] = field(default_factory=list)
    pivots: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """
    Simplex tableau in canonical form: basis[r] is the column basic in row r.

    The reduced-cost row is carried along and updated on every pivot, so an
    iteration costs one elimination pass.
    """

    def __init__(self, matrix: List[List[Fraction]], rhs: List[Fraction], basis: List[int]):
        self.matrix = matrix
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0
        self.reduced: List[Fraction] = []
        self.value = Fraction(0)

    @property
    def width(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0

    def set_cost(self, cost: Sequence[Fraction]) -> None:
        self.reduced = list(cost)
        self.value = Fraction(0)
        for r, col in enumerate(self.basis):
            weight = cost[col]
            if weight == 0:
                continue
            row = self.matrix[r]
            self.reduced = [d - weight * a for d, a in zip(self.reduced, row)]
            self.value += weight * self.rhs[r]

    def pivot(self, r: int, col: int) -> None:
        row = self.matrix[r]
        pivot = row[col]
        if pivot != 1:
            row = [v / pivot for v in row]
            self.matrix[r] = row
            self.rhs[r] /= pivot
        for k, other in enumerate(self.matrix):
            factor = other[col]
            if k == r or factor == 0:
                continue
            self.matrix[k] = [a - factor * b for a, b in zip(other, row)]
            self.rhs[k] -= factor * self.rhs[r]
        factor = self.reduced[col]
        if factor != 0:
            self.reduced = [d - factor * b for d, b in zip(self.reduced, row)]
            self.value += factor * self.rhs[r]
        self.basis[r] = col
        self.pivots += 1

    def maximize(self, allowed: Sequence[bool]) -> str:
        """Run Bland-rule iterations until optimal or unbounded."""
        while True:
            entering = next(
                (j for j, d in enumerate(self.reduced) if allowed[j] and d > 0),
                None,
            )
            if entering is None:
                return "optimal"
            leaving = None
            best_ratio = None
            for r, row in enumerate(self.matrix):
                a = row[entering]
                if a <= 0:
                    continue
                ratio = self.rhs[r] / a
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[r] < self.basis[leaving])):
                    best_ratio = ratio
                    leaving = r
            if leaving is None:
                return "unbounded"
            self.pivot(leaving, entering)

    def drop_row(self, r: int) -> None:
        del self.matrix[r]
        del self.rhs[r]
        del self.basis[r]


def lp_solve(problem: LpProblem) -> LpOutcome:
    """
    Solve an LpProblem exactly.

    Rows with a negative bound start on an artificial variable; phase one
    drives those out, phase two optimizes the objective. The result is
    deterministic for a fixed input order.
    """
    n = problem.dimension
    m = len(problem.rows)
    slack_start = n
    artificial_start = n + m
    negative = [r for r, row in enumerate(problem.rows) if row.bound < 0]
    width = artificial_start + len(negative)

    matrix: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    basis: List[int] = []
    for r, row in enumerate(problem.rows):
        line = [Fraction(0)] * width
        if row.bound >= 0:
            for j, a in enumerate(row.coeffs):
                line[j] = Fraction(a)
            line[slack_start + r] = Fraction(1)
            rhs.append(Fraction(row.bound))
            basis.append(slack_start + r)
        else:
            for j, a in enumerate(row.coeffs):
                line[j] = -Fraction(a)
            line[slack_start + r] = Fraction(-1)
            artificial = artificial_start + negative.index(r)
            line[artificial] = Fraction(1)
            rhs.append(-Fraction(row.bound))
            basis.append(artificial)
        matrix.append(line)

    tableau = _Tableau(matrix, rhs, basis)
    everything = [True] * width

    if negative:
        tableau.set_cost([Fraction(-1) if j >= artificial_start else Fraction(0) for j in range(width)])
        tableau.maximize(everything)
        if tableau.value < 0:
            logger.debug(f"LP infeasible after phase one ({tableau.pivots} pivots)")
            return LpOutcome(status="infeasible", pivots=tableau.pivots)
        # artificial columns still basic sit at zero; pivot them out or drop their row
        r = 0
        while r < len(tableau.basis):
            if tableau.basis[r] >= artificial_start:
                col = next((j for j in range(artificial_start) if tableau.matrix[r][j] != 0), None)
                if col is None:
                    tableau.drop_row(r)
                    continue
                tableau.pivot(r, col)
            r += 1

    allowed = [j < artificial_start for j in range(width)]
    cost = [Fraction(problem.objective[j]) if j < n else Fraction(0) for j in range(width)]
    tableau.set_cost(cost)
    status = tableau.maximize(allowed)
    if status == "unbounded":
        logger.debug(f"LP unbounded ({tableau.pivots} pivots)")
        return LpOutcome(status="unbounded", pivots=tableau.pivots)

    values = [Fraction(0)] * n
    for r, col in enumerate(tableau.basis):
        if col < n:
            values[col] = tableau.rhs[r]
    argmax = tuple(values)
    optimum = sum((w * x for w, x in zip(problem.objective, argmax)), Fraction(0))
    binding = [row.label for row in problem.rows if row.evaluate(argmax) == row.bound]
    return LpOutcome(
        status="optimal",
        optimum=optimum,
        argmax=argmax,
        binding_rows=binding,
        pivots=tableau.pivots,
    )


def maximize(objective: Sequence[Fraction], rows: Sequence[ConstraintRow]) -> LpOutcome:
    """Shorthand for lp_solve(LpProblem(objective, rows))."""
    return lp_solve(LpProblem(objective=tuple(Fraction(w) for w in objective), rows=tuple(rows)))


def lp_feasible(rows: Sequence[ConstraintRow], dimension: int) -> bool:
    zero = tuple(Fraction(0) for _ in range(dimension))
    return maximize(zero, rows).status != "infeasible"


def open_cone_point(normals: Sequence[Sequence[Fraction]], dimension: int) -> Optional[ExecVector]:
    """
    A point x with a . x > 0 for every normal, or None when that open cone is empty.

    Solved as: x = y - 1 with 0 <= y <= 2, maximize e subject to a . x >= e, e <= 1.
    """
    width = dimension + 1
    rows = []
    for normal in normals:
        # -a . y + e <= -a . 1
        coeffs = tuple(-Fraction(a) for a in normal) + (Fraction(1),)
        rows.append(ConstraintRow(coeffs=coeffs, bound=-sum((Fraction(a) for a in normal), Fraction(0))))
    for k in range(dimension):
        unit = tuple(Fraction(1) if j == k else Fraction(0) for j in range(width))
        rows.append(ConstraintRow(coeffs=unit, bound=Fraction(2)))
    rows.append(ConstraintRow(coeffs=tuple(Fraction(0) for _ in range(dimension)) + (Fraction(1),), bound=Fraction(1)))
    objective = tuple(Fraction(0) for _ in range(dimension)) + (Fraction(1),)

    outcome = maximize(objective, rows)
    if not outcome.is_optimal or outcome.optimum <= 0:
        return None
    return tuple(y - 1 for y in outcome.argmax[:dimension])


# --- redundancy elimination ---

def _normalized_key(row: ConstraintRow) -> Optional[Tuple[Tuple[Fraction, ...], Fraction]]:
    """Scale-free identity of a half-space; None for rows that restrict nothing."""
    if row.bound != 0:
        scale = abs(row.bound)
    else:
        scale = max(abs(a) for a in row.coeffs)
    if scale == 0:
        return None
    if all(a == 0 for a in row.coeffs) and row.bound > 0:
        return None
    return tuple(a / scale for a in row.coeffs), row.bound / scale


def collapse_duplicates(rows: Sequence[ConstraintRow]) -> List[ConstraintRow]:
    """Keep the first row of every group of identical half-spaces, in input order."""
    seen: Dict[Tuple[Tuple[Fraction, ...], Fraction], ConstraintRow] = {}
    kept = []
    for row in rows:
        key = _normalized_key(row)
        if key is None or key in seen:
            continue
        seen[key] = row
        kept.append(row)
    return kept


def _dominates(strong: ConstraintRow, weak: ConstraintRow) -> bool:
    """strong implies weak on C >= 0 by a componentwise comparison of a/b."""
    if strong.bound <= 0 or weak.bound <= 0:
        return False
    return all(s / strong.bound >= w / weak.bound for s, w in zip(strong.coeffs, weak.coeffs))


def is_redundant(row: ConstraintRow, others: Sequence[ConstraintRow]) -> bool:
    """
    True when every C >= 0 satisfying `others` also satisfies `row`.

    An unbounded maximization means the row cuts the region: not redundant.
    """
    outcome = maximize(row.coeffs, others)
    if outcome.status == "infeasible":
        return True
    if outcome.status == "unbounded":
        return False
    return outcome.optimum <= row.bound


def eliminate_redundant(rows: Sequence[ConstraintRow]) -> List[ConstraintRow]:
    """
    Irredundant subset of rows defining the same region over C >= 0.

    Duplicates are collapsed first (the first occurrence wins), then a
    screening pass builds a small candidate set incrementally and a final
    pass re-tests each candidate against all the others. Weakly redundant
    rows are removed, so the outcome is exactly the facet-defining rows and
    does not depend on input order beyond duplicate crediting.
    """
    unique = collapse_duplicates(rows)
    logger.debug(f"Redundancy elimination: {len(rows)} rows, {len(unique)} after collapsing duplicates")

    screened: List[ConstraintRow] = []
    for row in unique:
        if any(_dominates(kept, row) for kept in screened):
            continue
        if is_redundant(row, screened):
            continue
        screened.append(row)

    retained = list(screened)
    for row in screened:
        others = [other for other in retained if other is not row]
        if is_redundant(row, others):
            retained.remove(row)

    logger.debug(f"Redundancy elimination kept {len(retained)} of {len(unique)} rows")
    return retained
