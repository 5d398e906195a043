"""Dense complex-matrix kernel: tensor products, embeddings, partial traces, spectra.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  The
composite Hilbert space is always ordered qubit 1, ..., qubit N, resonator;
:class:`CompositeSpace` is the only place that ordering lives.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-9
PSD_CLAMP_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
# qubit basis order is (e, g): sigma_z|e> = +|e>, sigma_z|g> = -|g>
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
KET_E = np.array([1, 0], dtype=complex)
KET_G = np.array([0, 1], dtype=complex)


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered subsystem dimensions: ``n_qubits`` factors of 2, then the resonator."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("a composite space needs at least one factor")
        if any(d < 2 for d in dims):
            raise ValueError(f"every subsystem dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def qubits_and_resonator(cls, n_qubits: int, n_max: int) -> "CompositeSpace":
        return cls((2,) * n_qubits + (n_max + 1,))

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_factors(self) -> int:
        return len(self.dims)

    @property
    def resonator(self) -> int:
        """Index of the resonator factor (always last)."""
        return len(self.dims) - 1

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(range(len(self.dims) - 1))

    def sub(self, keep: Iterable[int]) -> "CompositeSpace":
        return CompositeSpace(tuple(self.dims[k] for k in sorted(set(keep))))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(kron, ops)


def embed(op: np.ndarray, site: int, space: CompositeSpace) -> np.ndarray:
    """Place ``op`` on factor ``site`` with identities on every other factor."""
    op = np.asarray(op, dtype=complex)
    if not 0 <= site < space.n_factors:
        raise IndexError(f"site {site} out of range for {space.n_factors} factors")
    expected = space.dims[site]
    if op.shape != (expected, expected):
        raise ValueError(
            f"operator shape {op.shape} does not match subsystem {site} (expected dim {expected})"
        )
    left = int(np.prod(space.dims[:site], dtype=int))
    right = int(np.prod(space.dims[site + 1:], dtype=int))
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def partial_trace(rho: np.ndarray, space: CompositeSpace, keep: Iterable[int]) -> np.ndarray:
    """Reduced matrix on the factors in ``keep``, kept in their original relative order."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("partial_trace needs a non-empty keep set")
    if any(k < 0 or k >= space.n_factors for k in keep):
        raise IndexError(f"keep indices {keep} out of range for {space.n_factors} factors")
    rho = np.asarray(rho)
    if rho.shape != (space.total, space.total):
        raise ValueError(f"rho has shape {rho.shape}, space total dimension is {space.total}")
    n = space.n_factors
    traced = [k for k in range(n) if k not in keep]
    t = rho.reshape(space.dims + space.dims)
    # trace pairs from the highest index down so earlier axis numbers stay valid
    for k in sorted(traced, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + m)
    d = int(np.prod([space.dims[k] for k in keep]))
    return t.reshape(d, d)


def hermiticity_defect(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def _require_hermitian(m: np.ndarray, tol: float) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    defect = hermiticity_defect(m)
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian: max |m - m^dagger| = {defect:.3e} > {tol:.1e}")
    return m


def hermitian_eigs(m: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and the matching eigenvector columns."""
    m = _require_hermitian(m, tol)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return w[::-1], v[:, ::-1]


def psd_sqrt(m: np.ndarray, clamp_tol: float = PSD_CLAMP_TOL, return_clamp: bool = False):
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-clamp_tol, 0)`` are set to zero; anything more negative
    is rejected.  With ``return_clamp=True`` the largest clamped magnitude is
    returned alongside the root.
    """
    w, v = hermitian_eigs(m)
    if w.size and w[-1] < -clamp_tol:
        raise ValueError(f"matrix is not positive semidefinite: eigenvalue {w[-1]:.3e}")
    clamped = float(max(0.0, -w.min())) if w.size else 0.0
    s = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    s = (s + s.conj().T) / 2
    return (s, clamped) if return_clamp else s


def general_eigenvalues(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return np.linalg.eigvals(m)


def allclose(a: np.ndarray, b: np.ndarray, atol: float) -> bool:
    """Elementwise comparison with an explicit absolute tolerance only."""
    return bool(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0) <= atol)


def dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())
