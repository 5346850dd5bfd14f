import math

import pytest

from billiard_homotopy.chains import BC_BOUND
from billiard_homotopy.entropy import (
    count_classes,
    entropy_window,
    estimate,
    free_subgroup_growth,
)
from billiard_homotopy.group import enumerate_ball


def test_window_values():
    lo, hi = entropy_window()
    assert lo == pytest.approx(0.185777512, abs=1e-9)
    assert hi == pytest.approx(3.370415245, abs=1e-9)


def test_short_times_count_only_identity():
    assert count_classes(0.5, 3).n_T == 1
    with pytest.raises(ValueError):
        count_classes(0, 3)


def test_large_time_exhausts_capped_ball():
    # b and c generate a free subgroup: ball of radius 2 has 1 + 4 + 12 elements
    row = count_classes(10 * BC_BOUND, 2, "bBcC")
    assert row.n_T == enumerate_ball(2, "bBcC").ball_counts[-1] == 17
    assert row.cap_reached


def test_counts_monotone_in_time_and_cap():
    Ts = [1, 2, 3, 4, 6, 8]
    small = estimate(Ts, 3)
    big = estimate(Ts, 4)
    assert small.counts == sorted(small.counts)
    assert all(b >= s for s, b in zip(small.counts, big.counts))


def test_estimate_inside_window():
    rep = estimate([1, 2, 3, 4, 5, 6, 8, 10], 4)
    assert 0 < rep.slope <= rep.upper
    assert rep.rate == pytest.approx(math.log(rep.counts[-1]) / 10)
    assert set(rep.as_dict()) >= {"T", "n_T", "slope", "rate", "cap_reached"}


def test_free_subgroup_spheres():
    rep = free_subgroup_growth(6)
    assert rep.sphere_counts == [1, 4, 12, 36, 108, 324, 972]
    assert rep.ball_counts[3] == 53
    assert rep.collisions == 0
    with pytest.raises(ValueError):
        free_subgroup_growth(9)
