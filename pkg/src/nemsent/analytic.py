"""Closed-form references for a single qubit on a lossy resonator.

``eq4_tangle`` is the published closed-form tangle evaluated literally (its
peak value at zero loss is 3, outside the [0, 1] range of a tangle, so only
its zero structure is used for comparisons).  ``single_excitation_oracle``
solves the rotating-wave dynamics restricted to span{|g',0>, |e',0>, |g',1>}
with its own 3x3 equations, independent of the generic evolution code.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp

from .entanglement import tangle_two_qubit
from .evolution import Trajectory
from .model import ModelParams


def eq4_tangle(omega_t, kappa_over_omega: float):
    """max[0, sin(2 wt) {2 cosh(kt) + cosh(3kt) - 2 sinh(kt) - sinh(3kt)}], kt = (kappa/omega) wt."""
    if kappa_over_omega < 0:
        raise ValueError("kappa/omega must be >= 0")
    wt = np.asarray(omega_t, dtype=float)
    if np.any(wt < 0):
        raise ValueError("omega*t must be >= 0")
    kt = kappa_over_omega * wt
    # cosh(x) - sinh(x) = exp(-x); written this way it cannot overflow
    envelope = 2.0 * np.exp(-kt) + np.exp(-3.0 * kt)
    out = np.maximum(0.0, np.sin(2.0 * wt) * envelope)
    return float(out) if out.ndim == 0 else out


def _dressed_states(v_gate: float, e_j: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Upper and lower eigenvectors of V sigma_z - E_J sigma_x / 2 in the (e, g) basis, and the splitting."""
    half = math.sqrt(v_gate ** 2 + 0.25 * e_j ** 2)
    if e_j == 0.0:
        e, g = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        return (e, g, 2 * half) if v_gate >= 0 else (g, e, 2 * half)
    # (V - E) x - (E_J / 2) y = 0 for eigenvalue E
    upper = np.array([1.0, 2.0 * (v_gate - half) / e_j])
    lower = np.array([1.0, 2.0 * (v_gate + half) / e_j])
    return upper / np.linalg.norm(upper), lower / np.linalg.norm(lower), 2 * half


def oracle_coupling(p: ModelParams) -> float:
    """Signed transverse coupling omega <e'|sigma_z|g'>."""
    upper, lower, _ = _dressed_states(p.v_gate, p.e_j)
    return float(p.omega * (upper[0] * lower[0] - upper[1] * lower[1]))


def _check_oracle_params(p: ModelParams) -> None:
    if p.n_qubits != 1:
        raise ValueError("the single-excitation oracle needs exactly one qubit")
    for name in ("chi", "gamma", "gamma_cross", "n_bar"):
        if getattr(p, name) != 0.0:
            raise ValueError(f"the single-excitation oracle needs {name} = 0")


def single_excitation_oracle(p: ModelParams, omega_t, rtol: float = 1e-12, atol: float = 1e-12) -> Trajectory:
    """Qubit-resonator tangle and populations for rho(0) = |e,0><e,0| under the RWA.

    Basis: 0 = |g',0>, 1 = |e',0>, 2 = |g',1> (primes denote dressed qubit
    states).  The resonator damping enters as 2 kappa D[|g',0><g',1|].
    """
    _check_oracle_params(p)
    times = np.asarray(omega_t, dtype=float)
    upper, lower, split = _dressed_states(p.v_gate, p.e_j)
    g = oracle_coupling(p)
    energies = np.array([-split / 2, split / 2, p.nu - split / 2])
    if p.resonator_ordering == "antinormal":
        energies = energies + p.nu
    h = np.diag(energies).astype(complex)
    h[1, 2] = h[2, 1] = g
    k = 2.0 * p.kappa

    def deriv(_t, y):
        r = y.reshape(3, 3)
        d = -1j * (h @ r - r @ h)
        # jump |0><2|: population 2 -> 0, coherences with 2 damp at k/2
        d[0, 0] += k * r[2, 2]
        d[2, :] -= 0.5 * k * r[2, :]
        d[:, 2] -= 0.5 * k * r[:, 2]
        return d.ravel()

    # bare |e> = <e'|e> |e'> + <g'|e> |g'>
    c_up, c_low = upper[0], lower[0]
    psi0 = np.array([c_low, c_up, 0.0], dtype=complex)
    rho0 = np.outer(psi0, psi0.conj())
    scale = 1.0 / p.omega
    sol = solve_ivp(
        deriv, (0.0, times[-1] * scale), rho0.ravel(), method="DOP853",
        t_eval=times * scale, rtol=rtol, atol=atol,
    )
    if not sol.success:
        raise RuntimeError(f"oracle integration failed: {sol.message}")
    states = sol.y.T.reshape(-1, 3, 3)

    # embed into resonator {0,1} x dressed qubit {e', g'}: |0e'>, |0g'>, |1e'>, |1g'>
    place = [1, 0, 3]
    tangles = np.empty(len(times))
    for n, r in enumerate(states):
        four = np.zeros((4, 4), dtype=complex)
        four[np.ix_(place, place)] = r
        four = (four + four.conj().T) / 2
        tangles[n] = tangle_two_qubit(four / np.trace(four).real)
    return Trajectory(
        times=times,
        observables={
            "tangle_qr": tangles,
            "p_g0": states[:, 0, 0].real,
            "p_e0": states[:, 1, 1].real,
            "p_g1": states[:, 2, 2].real,
        },
        meta={"g_eff": abs(g), "splitting": split},
    )
