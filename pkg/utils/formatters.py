"""
Formatter utilities for rtctimes
Provides consistent report text, CSV dumps and SVG figures across commands.
"""

import csv
import io
import math
import logging
from contextlib import contextmanager
from fractions import Fraction
from typing import IO, TYPE_CHECKING, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from utils.errors import RegionError
from utils.parser import render_rational
from utils.region_geometry import AndOrRegion, ConstraintRow, Polytope, Region, andor_vertices, is_feasible, vertices

if TYPE_CHECKING:
    from utils.edf_analysis import EdfVerdict, MinimalDeadlines
    from utils.experiment import EnvelopeBucket, ExperimentRecord, ExperimentSummary
    from utils.fp_analysis import FpVerdict, SchedPointSet
    from utils.lp_solver import LpOutcome
    from utils.optimizer import FpOptimum
    from utils.simulator import Trace

logger = logging.getLogger("rtctimes")

Sink = Union[str, IO[str]]

# Reproducible SVG output: fixed element ids, no timestamp
plt.rcParams["svg.hashsalt"] = "rtctimes"
SVG_METADATA = {"Date": None}


@contextmanager
def _open_sink(sink: Sink) -> Iterator[IO[str]]:
    if isinstance(sink, str):
        with open(sink, "w", encoding="utf-8", newline="") as f:
            yield f
    else:
        yield sink


def format_vector(c: Sequence[Fraction]) -> str:
    return "(" + ", ".join(render_rational(x) for x in c) + ")"


def format_instants(instants: Sequence[Fraction]) -> str:
    return " ".join(render_rational(t) for t in instants)


def format_row(row: ConstraintRow) -> str:
    """Human form of a row, e.g. "2 C1 + C2 <= 5"."""
    terms = []
    for k, a in enumerate(row.coeffs, start=1):
        if a == 0:
            continue
        factor = "" if a == 1 else f"{render_rational(a)} "
        terms.append(f"{factor}C{k}")
    lhs = " + ".join(terms) if terms else "0"
    return f"{lhs} <= {render_rational(row.bound)}"


# --- verdict reports ---

def format_fp_verdict(verdict: "FpVerdict") -> str:
    lines = []
    if verdict.schedulable:
        lines.append(f"✅ Schedulable under FP ({verdict.point_source} points)")
    else:
        lines.append(f"❌ Unschedulable under FP: task {verdict.failing_task} fails")
    for task in verdict.tasks:
        if task.schedulable and task.witness is not None:
            lines.append(f"  task {task.task_index}: witness t={render_rational(task.witness)}, "
                         f"slack {render_rational(task.slack)}")
        elif task.schedulable:
            lines.append(f"  task {task.task_index}: no demand")
        elif task.failing_job is not None:
            lines.append(f"  task {task.task_index}: job {task.failing_job} misses "
                         f"({task.jobs_checked} job(s) in the busy interval)")
        else:
            lines.append(f"  task {task.task_index}: no point satisfies its constraint")
    return "\n".join(lines)


def format_edf_verdict(verdict: "EdfVerdict") -> str:
    lines = []
    if verdict.schedulable:
        lines.append("✅ Schedulable under EDF")
    elif verdict.violated_instant == 0:
        lines.append("❌ Unschedulable under EDF: total utilization exceeds 1")
    else:
        lines.append(f"❌ Unschedulable under EDF: demand exceeds supply at t={render_rational(verdict.violated_instant)}")
    lines.append(f"  {verdict.instants_checked} instants checked, minimum slack "
                 f"{render_rational(verdict.min_slack)} at t={render_rational(verdict.min_slack_instant)}")
    return "\n".join(lines)


def format_points_report(lehoczky: Sequence["SchedPointSet"], reduced: Optional[Sequence["SchedPointSet"]]) -> str:
    """Side-by-side sizes of the full and reduced point sets per task."""
    lines = []
    for k, full in enumerate(lehoczky):
        lines.append(f"task {full.task_index}: |S| = {len(full)}  {format_instants(full.points)}")
        if reduced is not None:
            small = reduced[k]
            lines.append(f"task {small.task_index}: |P| = {len(small)}  {format_instants(small.points)}")
    if reduced is None:
        lines.append("Reduced points skipped: priorities are not deadline-monotonic")
    return "\n".join(lines)


def format_minimal(minimal: "MinimalDeadlines") -> str:
    lines = [format_instants(minimal.instants)]
    lines.append(f"  |D| = {minimal.full_count}, |D_min| = {len(minimal)}")
    for row in minimal.rows:
        lines.append(f"  {row.label}: {format_row(row)}")
    return "\n".join(lines)


def format_lp_outcome(outcome: "LpOutcome") -> str:
    if outcome.status != "optimal":
        return f"❌ LP {outcome.status}"
    lines = [f"✅ Optimum {render_rational(outcome.optimum)} at C = {format_vector(outcome.argmax)}"]
    if outcome.binding_rows:
        lines.append(f"  binding rows: {', '.join(outcome.binding_rows)}")
    return "\n".join(lines)


def format_fp_optimum(optimum: "FpOptimum") -> str:
    lines = [format_lp_outcome(optimum.outcome)]
    if optimum.selection:
        picked = ", ".join(f"task{i}@t={render_rational(t)}" for i, t in optimum.selection.items())
        lines.append(f"  selection: {picked}")
    lines.append(f"  {optimum.selections_solved} selections solved, {optimum.selections_pruned} pruned")
    return "\n".join(lines)


def format_simulation(trace: "Trace", worst: Dict[int, Optional[Fraction]]) -> str:
    lines = []
    miss = trace.first_miss
    if miss is None:
        lines.append(f"✅ No deadline miss in [0, {render_rational(trace.horizon)}] under {trace.policy.upper()}")
    else:
        finished = "unfinished" if miss.completion is None else f"completed at {render_rational(miss.completion)}"
        cause = " (backlog at the hyperperiod)" if miss.reason == "backlog" else ""
        lines.append(f"❌ Task {miss.task_index} job {miss.job_index} misses its deadline "
                     f"{render_rational(miss.deadline)}, {finished}{cause}")
    lines.append("task  worst response")
    for task_index, response in worst.items():
        shown = "-" if response is None else render_rational(response)
        lines.append(f"{task_index:>4}  {shown}")
    unfinished = trace.unfinished
    if unfinished:
        lines.append(f"  {len(unfinished)} job(s) still pending at the horizon")
    return "\n".join(lines)


# --- CSV dumps ---

def write_constraint_csv(rows: Sequence[ConstraintRow], sink: Sink) -> None:
    """Header label,c1,...,cn,bound; rationals rendered p/q."""
    dimension = rows[0].dimension if rows else 0
    with _open_sink(sink) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["label"] + [f"c{k}" for k in range(1, dimension + 1)] + ["bound"])
        for row in rows:
            writer.writerow([row.label] + [render_rational(a) for a in row.coeffs] + [render_rational(row.bound)])


def write_trace_csv(trace: "Trace", sink: Sink) -> None:
    with _open_sink(sink) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["start", "end", "task", "job"])
        for segment in trace.segments:
            writer.writerow([render_rational(segment.start), render_rational(segment.end),
                             segment.task_index, segment.job_index])


def write_experiment_csv(records: Sequence["ExperimentRecord"], sink: Sink) -> None:
    with _open_sink(sink) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["id", "periods", "deadlines", "H", "D_count", "Dmin_count"])
        for record in records:
            writer.writerow([
                record.instance_id,
                ";".join(str(p) for p in record.periods),
                ";".join(str(d) for d in record.deadlines),
                record.hyperperiod,
                record.d_count,
                record.dmin_count,
            ])


def write_envelope_csv(buckets: Sequence["EnvelopeBucket"], sink: Sink) -> None:
    with _open_sink(sink) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["bucket", "H_lo", "H_hi", "instances", "envelope", "envelope_prefix_max", "D_count_at_envelope"])
        for bucket in buckets:
            writer.writerow([bucket.index, bucket.lower, bucket.upper, bucket.instances,
                             bucket.envelope, bucket.prefix_max, bucket.d_count_at_envelope])


def write_density_csv(density: Sequence[Tuple[int, int, Fraction]], sink: Sink) -> None:
    with _open_sink(sink) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["Dmin_count", "instances", "fraction"])
        for count, instances, fraction in density:
            writer.writerow([count, instances, f"{float(fraction):.6f}"])


def rows_to_csv_text(rows: Sequence[ConstraintRow]) -> str:
    buffer = io.StringIO()
    write_constraint_csv(rows, buffer)
    return buffer.getvalue()


# --- SVG figures ---

def region_corners(region: Region) -> List[Tuple[Fraction, ...]]:
    if isinstance(region, AndOrRegion):
        return andor_vertices(region)
    return vertices(region)


def polygon_order(corners: Sequence[Tuple[Fraction, ...]]) -> List[Tuple[Fraction, Fraction]]:
    """
    Corners as (C2, C1) plot points, walked counterclockwise from the C2 axis.

    The regions contain the origin and are closed downward, so sorting by
    angle around the origin yields a simple polygon.
    """
    points = [(c[1], c[0]) for c in corners]
    origin = [p for p in points if p == (0, 0)]
    others = [p for p in points if p != (0, 0)]
    others.sort(key=lambda p: (math.atan2(p[1], p[0]), p[0] ** 2 + p[1] ** 2))
    return origin + others


def write_region_svg(region: Region, sink: Sink, title: str = "") -> None:
    """Filled region polygon with C2 horizontal and C1 vertical."""
    if region.dimension != 2:
        raise RegionError(f"SVG output needs a two-task region, got n={region.dimension}")
    if not is_feasible(region):
        raise RegionError("Region is infeasible")
    outline = polygon_order(region_corners(region))

    fig, ax = plt.subplots(figsize=(4, 4))
    xs = [float(p[0]) for p in outline]
    ys = [float(p[1]) for p in outline]
    ax.fill(xs, ys, color="cyan", alpha=0.6, edgecolor="black", linewidth=1)
    ax.set_xlabel("$C_2$")
    ax.set_ylabel("$C_1$")
    ax.set_xlim(0, max(xs) * 1.1 or 1)
    ax.set_ylim(0, max(ys) * 1.1 or 1)
    if title:
        ax.set_title(title)
    with _open_sink(sink) as f:
        fig.savefig(f, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.debug(f"Region polygon with {len(outline)} corners written")


def write_scatter_svg(records: Sequence["ExperimentRecord"], buckets: Sequence["EnvelopeBucket"],
                      sink: Sink, title: str = "") -> None:
    """|D_min| against H on a log axis, with the prefix-max envelope overlaid."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter([r.hyperperiod for r in records], [r.dmin_count for r in records], s=4, color="tab:blue", alpha=0.4)
    if buckets:
        edges = [b.upper for b in buckets]
        ax.step(edges, [b.prefix_max for b in buckets], where="pre", color="tab:red", label="envelope")
        ax.legend(loc="upper left")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("hyperperiod H")
    ax.set_ylabel("$|D_{min}|$")
    if title:
        ax.set_title(title)
    with _open_sink(sink) as f:
        fig.savefig(f, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
