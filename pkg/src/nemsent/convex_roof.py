"""Convex-roof I-tangle by minimization over pure-state ensemble decompositions.

Every decomposition of rho = sum_k w_k w_k^dag (w_k = sqrt(lambda_k) v_k, the
subnormalized eigenvectors) into m pure states is psi_i = sum_k U_ik w_k for
an m x r isometry U.  The objective

    2 sum_i p_i (1 - Tr[rho_a(i)^2]) = 2 sum_i (|psi_i|^2 - Tr[(M_i M_i^dag)^2] / |psi_i|^2),

with M_i the d_a x d_b reshaping of psi_i, is minimized over the Stiefel
manifold with a Polak-Ribiere conjugate gradient and QR retraction.  The
returned value is the best local minimum found, an upper bound on the roof.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .entanglement import linear_entropy_tangle

RANK_TOL = 1e-12


@dataclass(frozen=True)
class RoofOptions:
    restarts: int = 8
    extra_states: int = 2
    max_iter: int = 2000
    window: int = 50
    improvement_tol: float = 1e-6
    grad_tol: float = 1e-10
    seed: int = 20100314


@dataclass
class RoofResult:
    value: float
    per_start: list[float] = field(default_factory=list)
    iterations: list[int] = field(default_factory=list)
    converged: list[bool] = field(default_factory=list)
    rank: int = 0
    ensemble_size: int = 0
    label: str = "approximate upper bound"

    @property
    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(np.asarray(self.per_start))


def _objective(u: np.ndarray, w: np.ndarray, dims: tuple[int, int], grad: bool = True):
    psi = u @ w.T  # rows are the unnormalized ensemble members
    m = psi.reshape(-1, dims[0], dims[1])
    n = np.einsum("ix,ix->i", psi.conj(), psi).real
    red = m @ m.conj().transpose(0, 2, 1)
    purity = np.einsum("iab,iab->i", red.conj(), red).real
    live = n > 1e-300
    safe_n = np.where(live, n, 1.0)
    f = 2.0 * float(np.sum(np.where(live, n - purity / safe_n, 0.0)))
    if not grad:
        return f
    # d f / d conj(psi_i) = 2 [psi_i - 2 M M^dag M / n + (P / n^2) psi_i]
    mmm = (red @ m).reshape(psi.shape)
    g_psi = 2.0 * (psi - 2.0 * mmm / safe_n[:, None] + (purity / safe_n ** 2)[:, None] * psi)
    g_psi[~live] = 0.0
    return f, 2.0 * (g_psi @ w.conj())


def _project(u: np.ndarray, g: np.ndarray) -> np.ndarray:
    s = u.conj().T @ g
    return g - u @ ((s + s.conj().T) / 2)


def _retract(x: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(x)
    d = np.diagonal(r)
    phase = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * phase


def _inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.real(np.vdot(a, b)))


def _minimize(u, w, dims, opt: RoofOptions) -> tuple[float, int, bool]:
    f, g = _objective(u, w, dims)
    grad = _project(u, g)
    direction = -grad
    history = [f]
    step = 1.0
    for it in range(1, opt.max_iter + 1):
        gnorm2 = _inner(grad, grad)
        if gnorm2 < opt.grad_tol ** 2:
            return f, it, True
        slope = _inner(grad, direction)
        if slope >= 0:
            direction, slope = -grad, -gnorm2
        t = step
        while True:
            cand = _retract(u + t * direction)
            fc = _objective(cand, w, dims, grad=False)
            if fc <= f + 1e-4 * t * slope or t < 1e-14:
                break
            t *= 0.5
        if fc > f:
            return f, it, True
        u_new = cand
        f_new, g_new = _objective(u_new, w, dims)
        grad_new = _project(u_new, g_new)
        transported = _project(u_new, direction)
        old = _project(u_new, grad)
        beta = max(0.0, _inner(grad_new, grad_new - old) / max(gnorm2, 1e-300))
        direction = -grad_new + beta * transported
        u, f, grad = u_new, f_new, grad_new
        step = min(4.0 * t, 1e3)
        history.append(f)
        if len(history) > opt.window and history[-opt.window - 1] - f < opt.improvement_tol:
            return f, it, True
    return f, opt.max_iter, False


def _random_isometry(rng: np.random.Generator, m: int, r: int) -> np.ndarray:
    z = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
    return _retract(z)


def i_tangle_convex_roof(rho: np.ndarray, dims: tuple[int, int], opt: RoofOptions | None = None) -> RoofResult:
    """Upper bound on 2 min sum_i p_i (1 - Tr rho_a(i)^2) over pure-state decompositions."""
    opt = opt or RoofOptions()
    rho = np.asarray(rho, dtype=complex)
    da, db = int(dims[0]), int(dims[1])
    if rho.shape != (da * db, da * db):
        raise ValueError(f"rho has shape {rho.shape}, dims {dims} give {da * db}")
    if min(da, db) > 4:
        raise ValueError("convex-roof optimization supports a side of dimension <= 4")
    lam, vec = np.linalg.eigh((rho + rho.conj().T) / 2)
    keep = lam > RANK_TOL * max(1.0, lam.max())
    lam, vec = lam[keep], vec[:, keep]
    r = int(lam.size)
    if r == 0:
        raise ValueError("rho has no positive eigenvalues")
    if r == 1:
        value = linear_entropy_tangle(vec[:, 0], (da, db))
        return RoofResult(value=value, per_start=[value], iterations=[0], converged=[True], rank=1, ensemble_size=1)
    w = vec * np.sqrt(lam / lam.sum())
    m = max(r, min(r * r, r + opt.extra_states))
    seeds = np.random.SeedSequence(opt.seed).spawn(max(0, opt.restarts - 1))
    starts = [np.eye(m, r, dtype=complex)]
    starts += [_random_isometry(np.random.default_rng(s), m, r) for s in seeds]
    result = RoofResult(value=np.inf, rank=r, ensemble_size=m)
    for u0 in starts[: max(1, opt.restarts)]:
        f, iters, ok = _minimize(u0, w, (da, db), opt)
        result.per_start.append(f)
        result.iterations.append(iters)
        result.converged.append(ok)
    result.value = float(max(0.0, min(result.per_start)))
    return result
