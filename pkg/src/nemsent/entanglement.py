"""Entanglement measures: Wootters concurrence, two-qubit tangle, entropy, reductions."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import numpy as np

from . import linalg
from .linalg import SIGMA_Y, CompositeSpace, partial_trace

DM_TOL = 1e-8
LEAKAGE_BOUND = 0.05
_SYSY = np.kron(SIGMA_Y, SIGMA_Y)


def _check_density(rho: np.ndarray, dim: int | None = None, tol: float = DM_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square density matrix, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(f"expected a {dim}x{dim} density matrix, got {rho.shape}")
    if linalg.hermiticity_defect(rho) > tol:
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density matrix trace is {tr.real:.6g}, expected 1")
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if w[0] < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {w[0]:.3e}")
    return (rho + rho.conj().T) / 2


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """(sigma_y x sigma_y) rho* (sigma_y x sigma_y), conjugation in the computational basis."""
    return _SYSY @ np.conj(rho) @ _SYSY


def wootters_lambdas(rho: np.ndarray) -> np.ndarray:
    """Descending square roots of the eigenvalues of rho rho~.

    With rho = W W^dag (W = V sqrt(mu)), rho rho~ is similar to tau^dag tau for
    the symmetric tau = W^T (sigma_y x sigma_y) W, so the lambdas are the
    singular values of tau.  This avoids square roots of eigenvalues that are
    zero up to roundoff, which would otherwise leave errors of order 1e-9 on
    rank-deficient states.
    """
    mu, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = v * np.sqrt(np.clip(mu, 0.0, None))
    tau = w.T @ _SYSY @ w
    return np.linalg.svd(tau, compute_uv=False)


def concurrence(rho: np.ndarray) -> float:
    rho = _check_density(rho, 4)
    lam = wootters_lambdas(rho)
    return float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))


def tangle_two_qubit(rho: np.ndarray) -> float:
    return concurrence(rho) ** 2


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits; zero eigenvalues contribute nothing."""
    rho = _check_density(rho)
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-15]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def linear_entropy_tangle(psi: np.ndarray, dims: tuple[int, int]) -> float:
    """2 (1 - Tr rho_a^2) for a pure bipartite state vector."""
    m = np.asarray(psi, dtype=complex).reshape(dims)
    m = m / np.linalg.norm(m)
    rho_a = m @ m.conj().T
    return float(2.0 * (1.0 - np.real(np.trace(rho_a @ rho_a))))


@dataclass(frozen=True)
class Reduced:
    rho: np.ndarray
    leakage: float
    flagged: bool


def effective_two_level_reduce(
    rho: np.ndarray,
    space: CompositeSpace,
    qubit: int = 0,
    leakage_bound: float = LEAKAGE_BOUND,
) -> Reduced:
    """Restrict a qubit-resonator state to phonon numbers {0, 1}.

    The qubit ``qubit`` and the resonator are kept (every other qubit is
    traced out), the resonator is projected onto span{|0>, |1>}, and the
    result is renormalized.  Output basis order: |0,e>, |0,g>, |1,e>, |1,g>.
    ``leakage`` is the weight outside the subspace.
    """
    if qubit not in space.qubits:
        raise ValueError(f"subsystem {qubit} is not a qubit of {space.dims}")
    pair = partial_trace(rho, space, [qubit, space.resonator])
    n_res = space.dims[space.resonator]
    # reorder to resonator x qubit
    t = pair.reshape(2, n_res, 2, n_res).transpose(1, 0, 3, 2)
    block = t[:2, :, :2, :].reshape(4, 4)
    kept = float(np.real(np.trace(block)))
    leakage = max(0.0, 1.0 - kept)
    if kept <= 1e-12:
        raise ValueError("state lies entirely outside the {|0>, |1>} phonon subspace (leakage 1)")
    return Reduced(rho=block / kept, leakage=leakage, flagged=leakage > leakage_bound)


def qubit_resonator_tangle(rho: np.ndarray, space: CompositeSpace, qubit: int = 0) -> tuple[float, float]:
    """Tangle of qubit ``qubit`` with the two-level-reduced resonator, plus the leakage."""
    red = effective_two_level_reduce(rho, space, qubit)
    return tangle_two_qubit(red.rho), red.leakage


def pairwise_tangles(rho: np.ndarray, space: CompositeSpace) -> dict[tuple[int, int], float]:
    """Two-qubit tangle for every unordered qubit pair (indices from 0)."""
    qs = space.qubits
    if len(qs) < 2:
        raise ValueError("pairwise tangles need at least two qubits")
    return {(i, j): tangle_two_qubit(partial_trace(rho, space, [i, j])) for i, j in combinations(qs, 2)}


def subsystem_entropy(rho: np.ndarray, space: CompositeSpace, keep: Iterable[int]) -> float:
    return von_neumann_entropy(partial_trace(rho, space, keep))
