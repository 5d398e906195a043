"""Structural features of sampled tangle curves: onset, sudden deaths, zero sets.

A tangle computed from a clamped concurrence is exactly zero over whole
intervals (sudden death).  A curve that only touches zero is V-shaped in the
concurrence sqrt(tangle); such touches are located by fitting a V through
the three samples around a local minimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ZERO_TOL = 1e-10
TOUCH_TOL = 2e-3


def first_nonzero_time(t, tangle, tol: float = ZERO_TOL) -> float | None:
    """Earliest grid time with tangle > tol, or None if it never leaves zero."""
    t, x = np.asarray(t), np.asarray(tangle)
    idx = np.nonzero(x > tol)[0]
    return float(t[idx[0]]) if idx.size else None


def zero_runs(tangle, tol: float = ZERO_TOL) -> list[tuple[int, int]]:
    """Maximal index runs [i, j] with tangle <= tol."""
    z = np.asarray(tangle) <= tol
    runs, start = [], None
    for i, flag in enumerate(z):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(z) - 1))
    return runs


def sudden_death_count(tangle, tol: float = ZERO_TOL) -> int:
    """Number of zero runs entered from a nonzero value and left again to a nonzero value."""
    n = len(tangle)
    return sum(1 for i, j in zero_runs(tangle, tol) if i > 0 and j < n - 1)


@dataclass
class ZeroSet:
    step: float
    intervals: list[tuple[float, float]] = field(default_factory=list)
    touches: list[float] = field(default_factory=list)

    def all_points(self) -> np.ndarray:
        pts = list(self.touches)
        for a, b in self.intervals:
            pts += [a, b]
        return np.sort(np.asarray(pts, dtype=float))


def zero_set(t, tangle, tol: float = ZERO_TOL, touch_tol: float = TOUCH_TOL, t_min: float = 0.0) -> ZeroSet:
    """Zero intervals and isolated touch points of a sampled tangle at times >= t_min."""
    t, x = np.asarray(t, dtype=float), np.asarray(tangle, dtype=float)
    dt = float(t[1] - t[0])
    out = ZeroSet(step=dt)
    for i, j in zero_runs(x, tol):
        if t[j] >= t_min:
            out.intervals.append((float(t[i]), float(t[j])))
    c = np.sqrt(np.clip(x, 0.0, None))
    for i in range(1, len(c) - 1):
        if t[i] < t_min or x[i] <= tol:
            continue
        if not (c[i] <= c[i - 1] and c[i] <= c[i + 1]):
            continue
        # V through three samples: steeper side fixes the slope
        left, right = c[i - 1] - c[i], c[i + 1] - c[i]
        s = max(left, right) / dt
        if s <= 0:
            continue
        shift = 0.5 * (left - right) / s  # vertex offset from t[i], toward the lower neighbour
        vertex = c[i] - s * abs(shift)
        if vertex <= touch_tol:
            out.touches.append(float(t[i] + shift))
    return out


def match_points(a, b, tol: float) -> tuple[bool, float]:
    """True when every point of a has a partner in b within tol and vice versa; also the worst gap."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.size == 0 and b.size == 0:
        return True, 0.0
    if a.size == 0 or b.size == 0:
        return False, float("inf")
    gap_ab = np.max(np.min(np.abs(a[:, None] - b[None, :]), axis=1))
    gap_ba = np.max(np.min(np.abs(b[:, None] - a[None, :]), axis=1))
    worst = float(max(gap_ab, gap_ba))
    return worst <= tol, worst
