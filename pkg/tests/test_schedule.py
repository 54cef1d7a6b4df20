"""Blur schedule boundaries and reporting windows."""

import pytest
from hypothesis import given, strategies as st

from fergrid.errors import RangeError
from fergrid.schedule import BlurSchedule

DEFAULT = BlurSchedule()


def test_default_shape():
    assert DEFAULT.t_learn == 1000
    assert DEFAULT.t_block == 200
    assert DEFAULT.sigma_sequence == (0, 1, 2, 3, 4)
    assert DEFAULT.total_ticks == 2000


def test_sigma_at_boundaries():
    assert DEFAULT.sigma_at(0) == 0
    assert DEFAULT.sigma_at(999) == 0
    assert DEFAULT.sigma_at(1000) == 0  # first eval block re-tests clean inputs
    assert DEFAULT.sigma_at(1199) == 0
    assert DEFAULT.sigma_at(1200) == 1
    assert DEFAULT.sigma_at(1399) == 1
    assert DEFAULT.sigma_at(1400) == 2
    assert DEFAULT.sigma_at(1800) == 4
    assert DEFAULT.sigma_at(1999) == 4


def test_out_of_range_ticks():
    with pytest.raises(RangeError):
        DEFAULT.sigma_at(-1)
    with pytest.raises(RangeError):
        DEFAULT.sigma_at(2000)
    with pytest.raises(RangeError):
        DEFAULT.block_of(2000)


def test_windows_partition_the_run():
    windows = DEFAULT.windows()
    assert windows[0].start == 0
    assert windows[-1].end == DEFAULT.total_ticks
    for prev, cur in zip(windows, windows[1:]):
        assert prev.end == cur.start
    assert [w.index for w in windows] == list(range(len(windows)))


def test_default_window_layout():
    windows = DEFAULT.windows()
    learn = [w for w in windows if w.phase == "learn"]
    evals = [w for w in windows if w.phase == "eval"]
    assert len(learn) == 5 and len(evals) == 5
    assert all(w.sigma == 0 and w.eval_index is None for w in learn)
    assert [w.sigma for w in evals] == [0, 1, 2, 3, 4]
    assert [w.eval_index for w in evals] == [1, 2, 3, 4, 5]
    assert evals[0].start == 1000


def test_truncated_last_learning_window():
    sched = BlurSchedule(t_learn=10, t_block=4, sigma_sequence=(0, 2))
    spans = [(w.start, w.end) for w in sched.windows() if w.phase == "learn"]
    assert spans == [(0, 4), (4, 8), (8, 10)]
    assert sched.sigma_at(9) == 0
    assert sched.sigma_at(10) == 0
    assert sched.sigma_at(14) == 2


def test_no_learning_phase():
    sched = BlurSchedule(t_learn=0, t_block=5, sigma_sequence=(1, 3))
    windows = sched.windows()
    assert all(w.phase == "eval" for w in windows)
    assert sched.sigma_at(0) == 1
    assert sched.sigma_at(5) == 3


def test_invalid_parameters():
    with pytest.raises(ValueError):
        BlurSchedule(t_block=0)
    with pytest.raises(ValueError):
        BlurSchedule(t_learn=-1)
    with pytest.raises(ValueError):
        BlurSchedule(sigma_sequence=())
    with pytest.raises(ValueError):
        BlurSchedule(sigma_sequence=(2, 1))
    with pytest.raises(ValueError):
        BlurSchedule(sigma_sequence=(1, 1, 2))


@given(st.integers(0, 40), st.integers(1, 9),
       st.lists(st.integers(0, 20), min_size=1, max_size=5, unique=True),
       st.data())
def test_block_of_agrees_with_sigma_at(t_learn, t_block, levels, data):
    sched = BlurSchedule(t_learn, t_block, tuple(sorted(levels)))
    t = data.draw(st.integers(0, sched.total_ticks - 1))
    block = sched.block_of(t)
    assert block.start <= t < block.end
    if block.phase == "learn":
        assert sched.sigma_at(t) == 0
    else:
        assert sched.sigma_at(t) == block.sigma
