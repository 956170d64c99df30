import pytest

from test.helpers import make_task_set


@pytest.fixture
def three_task_rm_set():
    """Three tasks, T=(3,8,100), D=(3,8,19); execution times left unknown."""
    return make_task_set([3, 8, 100], [3, 8, 19])


@pytest.fixture
def two_task_fp_set():
    return make_task_set([4, 100], [3, 5], [1, 3])


@pytest.fixture
def two_task_edf_set():
    return make_task_set([4, 5], [3, 5], [1, 3])


@pytest.fixture
def three_task_arbitrary_set():
    return make_task_set([2, 5, 7], [3, 5, 6], ["1/2", 1, 1], deadline_model="arbitrary")
