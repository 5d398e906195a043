"""Schroedinger-picture integration of the master equation.

Two independent propagators are provided: an adaptive Dormand-Prince 4(5)
integrator acting on the density matrix directly (``direct``), and the
matrix exponential of the vectorized generator (``exponential``).
Physicality is monitored at every grid point and never repaired.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.linalg

from . import linalg
from .linalg import CompositeSpace
from .model import CollapseSet, ModelParams, build_collapse_set, hamiltonian

log = logging.getLogger(__name__)

TRACE_ABORT = 1e-6
MIN_EIG_ABORT = -1e-5
DEFAULT_ATOL = 1e-9
DEFAULT_FIRST_STEP = 1e-3
DEFAULT_MAX_DIM = 64


class PhysicalityError(RuntimeError):
    """Raised when an evolved state drifts outside the set of density matrices."""


@dataclass
class DensityMatrix:
    matrix: np.ndarray
    space: CompositeSpace

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (self.space.total, self.space.total):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match space dimension {self.space.total}"
            )

    def diagnostics(self) -> dict[str, float]:
        return state_diagnostics(self.matrix)

    def validate(self, trace_tol: float = 1e-8, herm_tol: float = 1e-9, eig_tol: float = 1e-8) -> None:
        d = self.diagnostics()
        if d["herm_defect"] > herm_tol:
            raise ValueError(f"density matrix not Hermitian (defect {d['herm_defect']:.3e})")
        if d["trace_dev"] > trace_tol:
            raise ValueError(f"density matrix trace deviates from 1 by {d['trace_dev']:.3e}")
        if d["min_eig"] < -eig_tol:
            raise ValueError(f"density matrix has negative eigenvalue {d['min_eig']:.3e}")


def state_diagnostics(rho: np.ndarray) -> dict[str, float]:
    herm = linalg.hermiticity_defect(rho)
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    return {
        "trace_dev": float(abs(np.trace(rho) - 1.0)),
        "herm_defect": herm,
        "min_eig": float(w[0]),
    }


@dataclass
class Trajectory:
    times: np.ndarray
    observables: dict[str, np.ndarray] = field(default_factory=dict)
    states: np.ndarray | None = None
    trace_dev: np.ndarray | None = None
    herm_defect: np.ndarray | None = None
    min_eig: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")


class MasterEquation:
    """Generator rho -> -i[H, rho] + sum_k rate_k (A_k rho B_k^dag - 1/2 {B_k^dag A_k, rho}).

    The anticommutator parts are folded into a non-Hermitian H_eff.  When every
    jump operator has at most one nonzero per row (true for sigma_pm and a),
    the sandwich terms are applied as a weighted gather of rho entries instead of
    full matrix products.
    """

    def __init__(self, h: np.ndarray, collapse: CollapseSet):
        self.h = np.asarray(h, dtype=complex)
        self.dim = self.h.shape[0]
        self.terms = [t for t in collapse.terms if t.rate != 0.0]
        k = np.zeros_like(self.h)
        for t in self.terms:
            if t.a.shape != self.h.shape or t.b.shape != self.h.shape:
                raise ValueError(f"collapse operator shape {t.a.shape} does not match H {self.h.shape}")
            k += t.rate * (t.b.conj().T @ t.a)
        self.h_eff = self.h - 0.5j * k
        self.h_eff_dag = self.h_eff.conj().T.copy()
        self._sandwich = _MonomialSandwich.build(self.terms)

    @classmethod
    def from_params(cls, p: ModelParams) -> "MasterEquation":
        return cls(hamiltonian(p), build_collapse_set(p))

    def _add_sandwiches(self, out: np.ndarray, rho: np.ndarray) -> np.ndarray:
        if self._sandwich is not None:
            return self._sandwich.apply(rho, out)
        for t in self.terms:
            out += t.rate * (t.a @ rho @ t.b.conj().T)
        return out

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        if rho.shape != self.h.shape:
            raise ValueError(f"rho shape {rho.shape} does not match H {self.h.shape}")
        return self._add_sandwiches(-1j * (self.h_eff @ rho - rho @ self.h_eff_dag), rho)

    def rhs_hermitian(self, rho: np.ndarray) -> np.ndarray:
        """rhs for Hermitian rho, using rho H_eff^dag = (H_eff rho)^dag to save one product."""
        x = self.h_eff @ rho
        return self._add_sandwiches(-1j * (x - x.conj().T), rho)

    def generator(self) -> np.ndarray:
        """dim^2 x dim^2 matrix acting on row-major vec(rho)."""
        eye = np.eye(self.dim)
        g = -1j * (np.kron(self.h_eff, eye) - np.kron(eye, self.h_eff.conj()))
        for t in self.terms:
            g += t.rate * np.kron(t.a, t.b.conj())
        return g


def _row_monomial(m: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """(cols, vals) with m[r, cols[r]] = vals[r], or None if some row has two nonzeros."""
    nz = m != 0
    if np.any(nz.sum(axis=1) > 1):
        return None
    cols = np.argmax(nz, axis=1)
    return cols, m[np.arange(m.shape[0]), cols]


class _MonomialSandwich:
    """sum rate A rho B^dag for jump operators with at most one nonzero per row.

    Entry (r, c) of A rho B^dag is a_r conj(b_c) rho[i_r, j_c], so the whole
    sum is a weighted gather of rho.  Only nonzero weights are kept, sorted by
    target entry so the contributions reduce in one pass.
    """

    def __init__(self, source: np.ndarray, weight: np.ndarray, target: np.ndarray, dim: int):
        order = np.argsort(target, kind="stable")
        self.source, self.weight, target = source[order], weight[order], target[order]
        self.starts = np.r_[0, np.flatnonzero(np.diff(target)) + 1]
        self.target = target[self.starts]
        self.dim = dim

    @classmethod
    def build(cls, terms) -> "_MonomialSandwich | None":
        if not terms:
            return None
        dim = terms[0].a.shape[0]
        source, weight, target = [], [], []
        for t in terms:
            ma, mb = _row_monomial(t.a), _row_monomial(t.b)
            if ma is None or mb is None:
                return None
            w = t.rate * np.outer(ma[1], mb[1].conj())
            r, c = np.nonzero(w)
            source.append(ma[0][r] * dim + mb[0][c])
            weight.append(w[r, c])
            target.append(r * dim + c)
        if not sum(len(w) for w in weight):
            return None
        return cls(np.concatenate(source), np.concatenate(weight), np.concatenate(target), dim)

    def apply(self, rho: np.ndarray, out: np.ndarray) -> np.ndarray:
        flat = out.reshape(-1)
        flat[self.target] += np.add.reduceat(self.weight * rho.reshape(-1)[self.source], self.starts)
        return out


def rhs(rho: np.ndarray, h: np.ndarray, collapse: CollapseSet) -> np.ndarray:
    """d rho / dt for the given Hamiltonian and dissipator description."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != np.shape(h):
        raise ValueError(f"rho shape {rho.shape} does not match H {np.shape(h)}")
    return MasterEquation(h, collapse).rhs(rho)


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    rhs_evals: int = 0


def integrate_dp45(
    f: Callable[[np.ndarray], np.ndarray],
    y0: np.ndarray,
    times: np.ndarray,
    on_point: Callable[[int, np.ndarray], None],
    atol: float = DEFAULT_ATOL,
    rtol: float = 0.0,
    first_step: float = DEFAULT_FIRST_STEP,
    fixed_step: float | None = None,
    max_steps: int = 10_000_000,
) -> StepStats:
    """Integrate the autonomous system y' = f(y) through the grid ``times``.

    Steps are clipped so every grid point is hit exactly; the proposed step
    size is carried across grid points.  The error norm is the max over
    components of |err| / (atol + rtol |y|).  With ``fixed_step`` the 5th-order
    solution is propagated without error control.
    """
    stats = StepStats()
    y = np.array(y0, dtype=complex)
    t = float(times[0])
    on_point(0, y)
    h = float(fixed_step or first_step)
    # stage derivatives stacked as rows; each stage combination is one product
    ks = np.empty((7,) + y.shape, dtype=complex)
    kflat = ks.reshape(7, -1)
    ks[0] = f(y)
    stats.rhs_evals += 1
    for idx in range(1, len(times)):
        t_target = float(times[idx])
        while t < t_target:
            if stats.accepted + stats.rejected > max_steps:
                raise RuntimeError(f"step limit {max_steps} exceeded at t={t}")
            clipped = t + h >= t_target - 1e-14 * max(1.0, abs(t_target))
            step = t_target - t if clipped else h
            for s in range(1, 7):
                ys = y + ((step * _A[s, :s]) @ kflat[:s]).reshape(y.shape)
                ks[s] = f(ys)
            stats.rhs_evals += 6
            y_new = ys  # FSAL: stage 7 is evaluated at the 5th-order solution
            if fixed_step is not None:
                err = 0.0
            else:
                e = ((step * _E) @ kflat).reshape(y.shape)
                scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
                err = float(np.max(np.abs(e) / scale))
            if err <= 1.0:
                t = t_target if clipped else t + step
                y = y_new
                ks[0] = ks[6]
                stats.accepted += 1
                if fixed_step is None:
                    factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                    # a clipped step says nothing about the proposed size unless it failed
                    if not clipped or step >= h:
                        h = h * factor
                    else:
                        h = max(h, step * factor)
            else:
                stats.rejected += 1
                h = step * max(0.2, 0.9 * err ** -0.2)
        on_point(idx, y)
    return stats


def evolve(
    rho0,
    p: ModelParams,
    times,
    method: str = "direct",
    *,
    atol: float = DEFAULT_ATOL,
    rtol: float = 0.0,
    first_step: float = DEFAULT_FIRST_STEP,
    fixed_step: float | None = None,
    observe: Callable[[np.ndarray], Mapping[str, float]] | None = None,
    store_states: bool = False,
    abort: bool = True,
    max_dim: int = DEFAULT_MAX_DIM,
    equation: MasterEquation | None = None,
) -> Trajectory:
    """Evolve ``rho0`` over ``times`` (in units of 1/omega, i.e. omega*t with omega=1).

    ``observe`` maps each grid state to a dict of scalar observables.  With
    ``abort`` a trace deviation above 1e-6 or an eigenvalue below -1e-5 raises
    :class:`PhysicalityError`; otherwise the defects are only recorded.
    """
    rho0 = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or times[0] != 0.0:
        raise ValueError("time grid must be one-dimensional and start at 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    eq = equation if equation is not None else MasterEquation.from_params(p)
    if rho0.shape != eq.h.shape:
        raise ValueError(f"initial state shape {rho0.shape} does not match model dimension {eq.dim}")
    # model time is physical time; the grid is omega*t
    scale = 1.0 / p.omega

    n = times.size
    trace_dev = np.empty(n)
    herm = np.empty(n)
    min_eig = np.empty(n)
    states = np.empty((n,) + rho0.shape, dtype=complex) if store_states else None
    obs: dict[str, list[float]] = {}

    def on_point(idx: int, rho: np.ndarray) -> None:
        d = state_diagnostics(rho)
        trace_dev[idx], herm[idx], min_eig[idx] = d["trace_dev"], d["herm_defect"], d["min_eig"]
        if abort and (d["trace_dev"] > TRACE_ABORT or d["min_eig"] < MIN_EIG_ABORT):
            raise PhysicalityError(
                f"unphysical state at omega*t={times[idx]:.6g}: trace deviation {d['trace_dev']:.3e}, "
                f"min eigenvalue {d['min_eig']:.3e} (raise n_max or tighten the integrator tolerance)"
            )
        if states is not None:
            states[idx] = rho
        if observe is not None:
            for key, value in observe(rho).items():
                obs.setdefault(key, []).append(value)

    meta: dict = {"method": method}
    if method == "direct":
        stats = integrate_dp45(
            eq.rhs_hermitian,
            rho0,
            times * scale,
            on_point,
            atol=atol,
            rtol=rtol,
            first_step=first_step,
            fixed_step=fixed_step,
        )
        meta.update(accepted=stats.accepted, rejected=stats.rejected, rhs_evals=stats.rhs_evals)
    elif method == "exponential":
        if eq.dim > max_dim:
            raise ValueError(
                f"exponential method refused: dimension {eq.dim} exceeds the bound {max_dim} "
                f"(generator would be {eq.dim ** 2}x{eq.dim ** 2}); use method='direct'"
            )
        propagate_exponential(eq, rho0, times * scale, on_point)
    else:
        raise ValueError(f"unknown method {method!r}")

    traj = Trajectory(
        times=times,
        observables={k: np.asarray(v) for k, v in obs.items()},
        states=states,
        trace_dev=trace_dev,
        herm_defect=herm,
        min_eig=min_eig,
        meta=meta,
    )
    return traj


def propagator(generator: np.ndarray, dt: float) -> np.ndarray:
    return scipy.linalg.expm(generator * dt)


def propagate_exponential(
    eq: MasterEquation,
    rho0: np.ndarray,
    times: np.ndarray,
    on_point: Callable[[int, np.ndarray], None],
) -> None:
    g = eq.generator()
    cache: dict[float, np.ndarray] = {}
    v = rho0.ravel().copy()
    on_point(0, rho0)
    for idx in range(1, len(times)):
        dt = float(times[idx] - times[idx - 1])
        key = round(dt, 12)
        if key not in cache:
            cache[key] = propagator(g, dt)
        v = cache[key] @ v
        on_point(idx, v.reshape(rho0.shape))


@dataclass
class PhysicalityReport:
    max_trace_dev: float
    max_herm_defect: float
    min_eig: float
    cutoff_converged: bool | None = None
    cutoff_delta: float | None = None

    def ok(self, trace_tol: float = 1e-8, herm_tol: float = 1e-9, eig_tol: float = 1e-8) -> bool:
        return (
            self.max_trace_dev <= trace_tol
            and self.max_herm_defect <= herm_tol
            and self.min_eig >= -eig_tol
        )

    def lines(self) -> list[str]:
        out = [
            f"max_trace_dev={self.max_trace_dev:.3e}",
            f"max_herm_defect={self.max_herm_defect:.3e}",
            f"min_eig={self.min_eig:.3e}",
        ]
        if self.cutoff_converged is None:
            out.append("cutoff_converged=unchecked")
        else:
            out.append(f"cutoff_converged={self.cutoff_converged}")
            out.append(f"cutoff_delta={self.cutoff_delta:.3e}")
        return out


def physicality_report(traj: Trajectory) -> PhysicalityReport:
    return PhysicalityReport(
        max_trace_dev=float(np.max(traj.trace_dev)),
        max_herm_defect=float(np.max(traj.herm_defect)),
        min_eig=float(np.min(traj.min_eig)),
        cutoff_converged=traj.meta.get("cutoff_converged"),
        cutoff_delta=traj.meta.get("cutoff_delta"),
    )
