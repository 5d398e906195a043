import math

import numpy as np

from nemsent.features import first_nonzero_time, match_points, sudden_death_count, zero_runs, zero_set


def test_onset_and_deaths():
    t = np.arange(10.0)
    x = np.array([0, 0, 0.1, 0.2, 0, 0, 0.3, 0, 0.1, 0])
    assert first_nonzero_time(t, x) == 2.0
    assert zero_runs(x) == [(0, 1), (4, 5), (7, 7), (9, 9)]
    assert sudden_death_count(x) == 2
    assert first_nonzero_time(t, np.zeros(10)) is None


def test_touch_points_are_located_between_samples():
    t = np.linspace(0, 10, 401)
    x = np.sin(1.3 * t + 0.2) ** 2 * 0.5  # concurrence |sin| touches zero
    zs = zero_set(t, x, t_min=t[1])
    expected = [(k * math.pi - 0.2) / 1.3 for k in range(1, 5)]
    ok, worst = match_points(zs.touches, expected, 1e-3)
    assert ok, worst
    assert zs.intervals == []


def test_smooth_nonzero_minimum_is_not_a_touch():
    t = np.linspace(0, 10, 401)
    x = (0.05 + np.sin(t) ** 2) ** 2
    assert zero_set(t, x).touches == []


def test_match_points():
    assert match_points([1.0, 2.0], [1.01, 1.99], 0.02)[0]
    assert not match_points([1.0], [1.0, 3.0], 0.02)[0]
    assert not match_points([], [1.0], 0.02)[0]
