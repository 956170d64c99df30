"""
Region geometry for rtctimes

Schedulable execution-time regions as linear constraint systems:
- Polytope: a conjunction of rows (the EDF region)
- AndOrRegion: a conjunction, one group per task, of disjunctions of rows (the FP region)

All regions live in C >= 0. Membership is exact. Vertex enumeration is
combinatorial and restricted to n <= 3, which is enough to reproduce
two- and three-task pictures and to cross-check the optimizer.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from utils.errors import RegionError
from utils.task_model import ExecVector

logger = logging.getLogger("rtctimes")

MAX_VERTEX_DIMENSION = 3


@dataclass(frozen=True)
class ConstraintRow:
    """Half-space coeffs . C <= bound; label records where the row came from."""
    coeffs: Tuple[Fraction, ...]
    bound: Fraction
    label: str = ""

    @property
    def dimension(self) -> int:
        return len(self.coeffs)

    def evaluate(self, c: Sequence[Fraction]) -> Fraction:
        return sum((a * x for a, x in zip(self.coeffs, c)), Fraction(0))

    def holds(self, c: Sequence[Fraction]) -> bool:
        return self.evaluate(c) <= self.bound

    def slack(self, c: Sequence[Fraction]) -> Fraction:
        return self.bound - self.evaluate(c)


@dataclass(frozen=True)
class Polytope:
    """Conjunction of rows, with the implicit C >= 0."""
    rows: Tuple[ConstraintRow, ...]
    dimension: int

    def __post_init__(self):
        _check_rows(self.rows, self.dimension)


@dataclass(frozen=True)
class AndOrRegion:
    """For every group at least one row must hold, with the implicit C >= 0."""
    groups: Tuple[Tuple[ConstraintRow, ...], ...]
    dimension: int

    def __post_init__(self):
        for group in self.groups:
            if not group:
                raise RegionError("Every group of an and/or region needs at least one row")
            _check_rows(group, self.dimension)

    @property
    def rows(self) -> Tuple[ConstraintRow, ...]:
        return tuple(row for group in self.groups for row in group)


Region = Union[Polytope, AndOrRegion]


def _check_rows(rows: Sequence[ConstraintRow], dimension: int) -> None:
    for row in rows:
        if row.dimension != dimension:
            raise RegionError(f"Row {row.label or row.coeffs} has dimension {row.dimension}, expected {dimension}")


def _check_point(region: Region, c: Sequence[Fraction]) -> None:
    if len(c) != region.dimension:
        raise RegionError(f"Point has {len(c)} coordinates, region has dimension {region.dimension}")


def membership(region: Region, c: Sequence[Fraction]) -> bool:
    """Exact membership test, no tolerance."""
    _check_point(region, c)
    if any(x < 0 for x in c):
        return False
    if isinstance(region, Polytope):
        return all(row.holds(c) for row in region.rows)
    return all(any(row.holds(c) for row in group) for group in region.groups)


def selections(region: AndOrRegion) -> Iterator[Tuple[Tuple[int, ...], Polytope]]:
    """Every polytope obtained by picking one row per group, with the picked indices."""
    for picked in itertools.product(*(range(len(group)) for group in region.groups)):
        rows = tuple(group[k] for group, k in zip(region.groups, picked))
        yield picked, Polytope(rows=rows, dimension=region.dimension)


def dnf_membership(region: AndOrRegion, c: Sequence[Fraction]) -> bool:
    """Membership through the disjunctive expansion; equal to membership() by construction."""
    return any(membership(polytope, c) for _, polytope in selections(region))


# --- exact small linear algebra ---

def solve_square(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> Optional[Tuple[Fraction, ...]]:
    """Gauss-Jordan over the rationals; None when the system is singular."""
    size = len(matrix)
    work = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(size):
        pivot_row = next((r for r in range(col, size) if work[r][col] != 0), None)
        if pivot_row is None:
            return None
        work[col], work[pivot_row] = work[pivot_row], work[col]
        pivot = work[col][col]
        work[col] = [v / pivot for v in work[col]]
        for r in range(size):
            if r != col and work[r][col] != 0:
                factor = work[r][col]
                work[r] = [a - factor * b for a, b in zip(work[r], work[col])]
    return tuple(work[r][size] for r in range(size))


def matrix_rank(vectors: Sequence[Sequence[Fraction]]) -> int:
    rows = [list(map(Fraction, v)) for v in vectors]
    rank = 0
    width = len(rows[0]) if rows else 0
    for col in range(width):
        pivot_row = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot_row is None:
            continue
        rows[rank], rows[pivot_row] = rows[pivot_row], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                factor = rows[r][col] / rows[rank][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def _axis_rows(dimension: int) -> List[ConstraintRow]:
    """C_k >= 0 written as -C_k <= 0."""
    return [
        ConstraintRow(
            coeffs=tuple(Fraction(-1) if k == axis else Fraction(0) for k in range(dimension)),
            bound=Fraction(0),
            label=f"C{axis + 1}>=0",
        )
        for axis in range(dimension)
    ]


def _candidate_points(rows: Sequence[ConstraintRow], dimension: int) -> List[ExecVector]:
    """Intersections of every `dimension` hyperplanes drawn from rows and axis planes."""
    planes = list(rows) + _axis_rows(dimension)
    found: List[ExecVector] = []
    seen: Set[ExecVector] = set()
    for combo in itertools.combinations(planes, dimension):
        point = solve_square([row.coeffs for row in combo], [row.bound for row in combo])
        if point is not None and point not in seen:
            seen.add(point)
            found.append(point)
    return found


def _check_vertex_preconditions(rows: Sequence[ConstraintRow], dimension: int) -> None:
    if dimension > MAX_VERTEX_DIMENSION:
        raise RegionError(f"Vertex enumeration supports n <= {MAX_VERTEX_DIMENSION}, got n={dimension}")
    for axis in range(dimension):
        if not any(row.coeffs[axis] > 0 for row in rows):
            raise RegionError(f"Region is unbounded along C{axis + 1}")


def vertices(region: Polytope) -> List[ExecVector]:
    """Vertex set of a bounded polytope, sorted lexicographically."""
    _check_vertex_preconditions(region.rows, region.dimension)
    result = [p for p in _candidate_points(region.rows, region.dimension) if membership(region, p)]
    logger.debug(f"Polytope with {len(region.rows)} rows has {len(result)} vertices")
    return sorted(result)


def touching_rows(region: Region, points: Sequence[ExecVector]) -> List[str]:
    """Labels of rows that hold with equality at one of the points."""
    labels = []
    for row in region.rows:
        if any(row.evaluate(p) == row.bound for p in points):
            labels.append(row.label)
    return labels


# --- corners of a union of polytopes ---

def _normalize_normal(normal: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    lead = next(v for v in normal if v != 0)
    scale = abs(lead)
    return tuple(v / scale for v in normal)


def _hyperplane_key(normal: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    lead = next(v for v in normal if v != 0)
    return tuple(v / lead for v in normal)


def arrangement_cells(normals: Sequence[Sequence[Fraction]], dimension: int) -> List[Tuple[Tuple[int, ...], ExecVector]]:
    """
    Full-dimensional cells of the central arrangement {a . x = 0}.

    Each cell is returned as its sign vector and an interior point; cells are
    split one hyperplane at a time, each side checked with an exact LP.
    """
    from utils.lp_solver import open_cone_point

    cells: List[Tuple[Tuple[int, ...], ExecVector]] = [((), tuple(Fraction(0) for _ in range(dimension)))]
    for k in range(len(normals)):
        refined = []
        for signs, _ in cells:
            for side in (1, -1):
                oriented = [
                    tuple(s * v for v in normal)
                    for s, normal in zip(signs + (side,), normals[:k + 1])
                ]
                point = open_cone_point(oriented, dimension)
                if point is not None:
                    refined.append((signs + (side,), point))
        cells = refined
    return cells


def _local_cone_is_pointed(region: AndOrRegion, p: ExecVector) -> bool:
    """
    True when the region has a corner at p.

    Near p the region coincides with p + K, K a union of cones cut out by the
    hyperplanes active at p. p is a corner exactly when no direction d leaves
    K invariant, i.e. when the hyperplanes across which K's membership flips
    have normals of full rank.
    """
    dimension = region.dimension
    active_axes = [axis for axis in range(dimension) if p[axis] == 0]
    # groups with a strictly satisfied row impose nothing near p
    binding_groups = []
    for group in region.groups:
        if any(row.slack(p) > 0 for row in group):
            continue
        binding_groups.append([row.coeffs for row in group if row.slack(p) == 0 and any(row.coeffs)])

    planes: Dict[Tuple[Fraction, ...], Tuple[Fraction, ...]] = {}
    for axis in active_axes:
        normal = tuple(Fraction(1) if k == axis else Fraction(0) for k in range(dimension))
        planes.setdefault(_hyperplane_key(normal), normal)
    for options in binding_groups:
        for normal in options:
            planes.setdefault(_hyperplane_key(normal), _normalize_normal(normal))
    normals = list(planes.values())
    if len(normals) < dimension or matrix_rank(normals) < dimension:
        return False

    def inside(v: ExecVector) -> bool:
        if any(v[axis] < 0 for axis in active_axes):
            return False
        for options in binding_groups:
            if not any(sum(a * x for a, x in zip(normal, v)) <= 0 for normal in options):
                return False
        return True

    cells = arrangement_cells(normals, dimension)
    verdicts = {signs: inside(point) for signs, point in cells}
    essential = set()
    for signs, verdict in verdicts.items():
        for k in range(len(normals)):
            if k in essential:
                continue
            neighbour = signs[:k] + (-signs[k],) + signs[k + 1:]
            if neighbour in verdicts and verdicts[neighbour] != verdict:
                essential.add(k)
    if not essential:
        return False
    return matrix_rank([normals[k] for k in sorted(essential)]) == dimension


def andor_vertices(region: AndOrRegion) -> List[ExecVector]:
    """
    Corner set of an and/or region, sorted lexicographically.

    Candidates are intersections of any n hyperplanes among all rows and the
    axis planes; a candidate in the region is kept when the region has a
    corner there. This also finds reflex corners where two rows of the same
    group cross, which no single selection polytope has as a vertex.
    """
    _check_vertex_preconditions(region.rows, region.dimension)
    unique_rows = list({(row.coeffs, row.bound): row for row in region.rows}.values())
    result = [
        p for p in _candidate_points(unique_rows, region.dimension)
        if membership(region, p) and _local_cone_is_pointed(region, p)
    ]
    logger.debug(f"And/or region with {len(region.groups)} groups has {len(result)} corners")
    return sorted(result)


def is_feasible(region: Region) -> bool:
    """Whether the region contains at least one point."""
    zero = tuple(Fraction(0) for _ in range(region.dimension))
    if membership(region, zero):
        return True
    from utils.lp_solver import lp_feasible

    if isinstance(region, Polytope):
        return lp_feasible(region.rows, region.dimension)
    return any(lp_feasible(polytope.rows, region.dimension) for _, polytope in selections(region))
