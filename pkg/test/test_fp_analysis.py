from fractions import Fraction

import numpy as np
import pytest

from utils.errors import DeadlineModelError, PriorityOrderError, TaskSetError
from utils.fp_analysis import (
    busy_period, fp_check, fp_region, fp_schedulable, fp_schedulable_arbitrary, k_vector, lehoczky_points,
    point_set, reduced_points
)
from utils.region_geometry import membership
from test.helpers import make_task_set, random_task_set


# --- Tests for k_vector ---

def test_k_vector_second_task(two_task_fp_set):
    row = k_vector(two_task_fp_set, 2, 5)
    assert row.coeffs == (2, 1)
    assert row.bound == 5
    assert k_vector(two_task_fp_set, 2, 4).coeffs == (1, 1)


def test_k_vector_highest_priority_has_no_interference(three_task_rm_set):
    row = k_vector(three_task_rm_set, 1, Fraction(7, 2))
    assert row.coeffs == (1, 0, 0)
    assert row.bound == Fraction(7, 2)


def test_k_vector_job_index_scales_own_coefficient(three_task_arbitrary_set):
    row = k_vector(three_task_arbitrary_set, 2, 9, j=1)
    assert row.coeffs == (5, 2, 0)
    assert row.job_index == 1
    assert row.as_row().label == "task2@t=9,j=1"


def test_k_vector_rejects_bad_index(two_task_fp_set):
    with pytest.raises(TaskSetError):
        k_vector(two_task_fp_set, 3, 1)
    with pytest.raises(TaskSetError):
        k_vector(two_task_fp_set, 0, 1)


# --- Tests for point sets ---

def test_lehoczky_points_three_task_example(three_task_rm_set):
    points = lehoczky_points(three_task_rm_set, 3)
    assert points.points == (0, 3, 6, 8, 9, 12, 15, 16, 18, 19)
    assert len(points) == 10
    assert points.provenance == "lehoczky"


def test_lehoczky_points_small_cases(three_task_rm_set, two_task_fp_set):
    assert lehoczky_points(three_task_rm_set, 1).points == (3,)
    assert lehoczky_points(two_task_fp_set, 2).points == (0, 4, 5)


def test_reduced_points_three_task_example(three_task_rm_set):
    points = reduced_points(three_task_rm_set, 3)
    assert points.points == (15, 16, 18, 19)
    assert points.provenance == "reduced"


def test_reduced_points_small_cases(two_task_fp_set, three_task_rm_set):
    assert reduced_points(two_task_fp_set, 2).points == (4, 5)
    assert reduced_points(three_task_rm_set, 1, 3).points == (3,)


def test_reduced_points_refuse_non_dm_order():
    ts = make_task_set([4, 10], [4, 2])
    with pytest.raises(PriorityOrderError):
        reduced_points(ts, 2)
    # the full set is always available
    assert lehoczky_points(ts, 2).points == (0, 2)


def test_point_sets_need_no_execution_times(three_task_rm_set):
    assert three_task_rm_set.wcets == (None, None, None)
    assert len(point_set(three_task_rm_set, 3, "reduced")) == 4


def test_reduced_points_structure_on_random_dm_sets():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n = int(rng.integers(1, 5))
        ts = random_task_set(rng, n, dm_order=True)
        for i in range(1, n + 1):
            reduced = reduced_points(ts, i)
            deadline = ts.task(i).deadline
            assert len(reduced) <= 2 ** (i - 1)
            assert deadline in reduced.points
            for t in reduced.points:
                assert 0 < t <= deadline
                assert t == deadline or any((t / period).denominator == 1 for period in ts.periods[:i - 1])


# --- Tests for fp_schedulable ---

def test_fp_schedulable_two_task_example(two_task_fp_set):
    verdict = fp_schedulable(two_task_fp_set)
    assert verdict.schedulable
    assert verdict.witnesses == {1: 3, 2: 4}
    assert verdict.tasks[1].slack == 0


def test_fp_schedulable_reports_failing_task(two_task_fp_set):
    verdict = fp_schedulable(two_task_fp_set, [Fraction(5, 2), 2])
    assert not verdict.schedulable
    assert verdict.failing_task == 2
    assert not verdict


def test_fp_schedulable_zero_demand(two_task_fp_set):
    assert fp_schedulable(two_task_fp_set, [0, 0], "reduced").schedulable


def test_fp_schedulable_refuses_arbitrary_deadlines(three_task_arbitrary_set):
    with pytest.raises(DeadlineModelError):
        fp_schedulable(three_task_arbitrary_set)
    with pytest.raises(DeadlineModelError):
        fp_region(three_task_arbitrary_set)


def test_point_sources_agree_on_random_dm_sets():
    rng = np.random.default_rng(5)
    for _ in range(150):
        ts = random_task_set(rng, int(rng.integers(1, 5)), dm_order=True)
        assert fp_schedulable(ts, point_source="lehoczky").schedulable == \
            fp_schedulable(ts, point_source="reduced").schedulable


def test_fp_schedulable_is_monotone():
    rng = np.random.default_rng(8)
    for _ in range(80):
        ts = random_task_set(rng, int(rng.integers(2, 4)))
        if not fp_schedulable(ts).schedulable:
            continue
        shrunk = [c * Fraction(int(rng.integers(0, 5)), 4) for c in ts.wcets]
        assert fp_schedulable(ts, shrunk).schedulable


# --- Tests for the arbitrary-deadline test ---

def test_busy_period_fixed_point(three_task_arbitrary_set):
    # level 3 starts at 5/2 and settles at 3
    assert busy_period(three_task_arbitrary_set, [Fraction(1, 2), 1, 1], 1) == Fraction(1, 2)
    assert busy_period(three_task_arbitrary_set, [Fraction(1, 2), 1, 1], 3) == 3
    assert busy_period(three_task_arbitrary_set, [0, 0, 0], 3) == 0


def test_fp_schedulable_arbitrary_example(three_task_arbitrary_set):
    verdict = fp_schedulable_arbitrary(three_task_arbitrary_set)
    assert verdict.schedulable
    assert [task.jobs_checked for task in verdict.tasks] == [1, 1, 1]


def test_fp_schedulable_arbitrary_overload():
    ts = make_task_set([2, 3], [4, 6], [1, 2], deadline_model="arbitrary")
    verdict = fp_schedulable_arbitrary(ts)
    assert not verdict.schedulable
    assert verdict.failing_task == 2


def test_fp_schedulable_arbitrary_zero_demand(three_task_arbitrary_set):
    verdict = fp_schedulable_arbitrary(three_task_arbitrary_set, [0, 0, 0])
    assert verdict.schedulable
    assert all(task.jobs_checked == 1 for task in verdict.tasks)


def test_fp_schedulable_arbitrary_checks_several_jobs():
    # full utilization: the level-2 busy interval is [0, 6), three jobs of tau_2
    ts = make_task_set([3, 2], [3, 4], [1, "4/3"], deadline_model="arbitrary")
    assert busy_period(ts, ts.wcets, 2) == 6
    verdict = fp_schedulable_arbitrary(ts)
    assert verdict.tasks[1].jobs_checked == 3
    assert verdict.schedulable


def test_arbitrary_test_matches_constrained_test():
    rng = np.random.default_rng(21)
    for _ in range(120):
        ts = random_task_set(rng, int(rng.integers(1, 5)), utilization=float(rng.uniform(0.3, 1.0)))
        relaxed = ts.with_deadline_model("arbitrary")
        assert fp_schedulable(ts).schedulable == fp_schedulable_arbitrary(relaxed).schedulable


def test_fp_check_dispatches_on_model(two_task_fp_set, three_task_arbitrary_set):
    assert fp_check(two_task_fp_set).schedulable
    assert fp_check(three_task_arbitrary_set).schedulable


# --- Tests for fp_region ---

def test_fp_region_two_task_example(two_task_fp_set):
    region = fp_region(two_task_fp_set, "reduced")
    assert [len(group) for group in region.groups] == [1, 2]
    assert region.groups[0][0].coeffs == (1, 0)
    assert region.groups[0][0].bound == 3
    assert {(row.coeffs, row.bound) for row in region.groups[1]} == {((1, 1), 4), ((2, 1), 5)}


def test_fp_region_single_task():
    region = fp_region(make_task_set([10], [7]))
    assert len(region.rows) == 1
    assert region.rows[0].coeffs == (1,)
    assert region.rows[0].bound == 7


def test_fp_region_three_task_reduced(three_task_rm_set):
    region = fp_region(three_task_rm_set, "reduced")
    assert [row.bound for row in region.groups[2]] == [15, 16, 18, 19]


def test_fp_region_membership_matches_test():
    rng = np.random.default_rng(3)
    for _ in range(80):
        ts = random_task_set(rng, int(rng.integers(1, 4)))
        region = fp_region(ts)
        assert membership(region, ts.wcets) == fp_schedulable(ts).schedulable
