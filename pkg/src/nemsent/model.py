"""Hamiltonian and dissipator construction for N charge qubits on a nanomechanical resonator.

All parameters are angular frequencies (energies divided by hbar).  Time is
reported as the dimensionless product ``omega * t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .linalg import SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Z, CompositeSpace, embed

ELECTRON_CHARGE = 1.602176634e-19  # C
HBAR = 1.054571817e-34  # J s


@dataclass(frozen=True)
class ModelParams:
    n_qubits: int = 1
    nu: float = 10.0
    omega: float = 1.0
    v_gate: float = 1.0
    e_j: float = 10.0
    chi: float = 0.0
    kappa: float = 0.0
    gamma: float = 0.0
    gamma_cross: float = 0.0
    n_bar: float = 0.0
    n_max: int = 10
    rwa: bool = False
    # "normal" uses nu a^dag a; "antinormal" uses nu (a^dag a + 1), the
    # untruncated value of nu a a^dag.  The two differ by a constant.
    resonator_ordering: str = "normal"

    def __post_init__(self):
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 1:
            raise ValueError(f"n_qubits must be a positive integer, got {self.n_qubits}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max}")
        for name in ("kappa", "gamma", "gamma_cross", "n_bar"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        for name in ("nu", "omega", "v_gate", "e_j", "chi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.resonator_ordering not in ("normal", "antinormal"):
            raise ValueError(f"unknown resonator ordering {self.resonator_ordering!r}")

    @property
    def space(self) -> CompositeSpace:
        return CompositeSpace.qubits_and_resonator(self.n_qubits, self.n_max)

    @property
    def decay_matrix(self) -> np.ndarray:
        """gamma_ij: ``gamma`` on the diagonal, ``gamma_cross`` off it."""
        n = self.n_qubits
        g = np.full((n, n), float(self.gamma_cross))
        np.fill_diagonal(g, float(self.gamma))
        return g

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DeviceParams:
    """Lumped circuit values in SI units (farads, rad/s)."""

    c_j: float
    c_g: float
    c_f: float
    nu: float
    e_charge: float = ELECTRON_CHARGE

    def __post_init__(self):
        for name in ("c_j", "c_g", "c_f"):
            if not getattr(self, name) > 0:
                raise ValueError(f"capacitance {name} must be > 0, got {getattr(self, name)}")
        if not self.nu > 0:
            raise ValueError(f"resonator frequency must be > 0, got {self.nu}")


def effective_coupling(d: DeviceParams, hbar: float = HBAR) -> float:
    """Resonator-qubit coupling e C_J / (2 (C_g + C_J)) * sqrt(nu / (2 hbar C_F)) in rad/s."""
    prefactor = d.e_charge * d.c_j / (2.0 * (d.c_g + d.c_j))
    return prefactor * math.sqrt(d.nu / (2.0 * hbar * d.c_f))


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)


@dataclass(frozen=True)
class Operators:
    """Embedded single-site operators on the full composite space."""

    space: CompositeSpace
    a: np.ndarray
    sx: tuple[np.ndarray, ...]
    sz: tuple[np.ndarray, ...]
    sp: tuple[np.ndarray, ...]
    sm: tuple[np.ndarray, ...]

    @property
    def n(self) -> np.ndarray:
        return self.a.conj().T @ self.a


def operators(p: ModelParams) -> Operators:
    space = p.space
    r = space.resonator
    qs = space.qubits
    return Operators(
        space=space,
        a=embed(annihilation(p.n_max), r, space),
        sx=tuple(embed(SIGMA_X, j, space) for j in qs),
        sz=tuple(embed(SIGMA_Z, j, space) for j in qs),
        sp=tuple(embed(SIGMA_PLUS, j, space) for j in qs),
        sm=tuple(embed(SIGMA_MINUS, j, space) for j in qs),
    )


def build_hamiltonian(p: ModelParams) -> np.ndarray:
    """Full (non-RWA) Hamiltonian on the truncated composite space.

    The qubit-qubit term sums over ordered pairs i != j, so each unordered
    pair carries 2 chi sigma_x sigma_x.
    """
    ops = operators(p)
    a, ad = ops.a, ops.a.conj().T
    h = p.nu * (ad @ a)
    if p.resonator_ordering == "antinormal":
        h = h + p.nu * np.eye(ops.space.total)
    for i in range(p.n_qubits):
        for j in range(p.n_qubits):
            if i != j:
                h = h + p.chi * (ops.sx[i] @ ops.sx[j])
    x = a + ad
    for j in range(p.n_qubits):
        h = h + p.v_gate * ops.sz[j] - 0.5 * p.e_j * ops.sx[j] + p.omega * (x @ ops.sz[j])
    return (h + h.conj().T) / 2


def qubit_hamiltonian(p: ModelParams) -> np.ndarray:
    """Single-qubit part V sigma_z - E_J sigma_x / 2."""
    return p.v_gate * SIGMA_Z - 0.5 * p.e_j * SIGMA_X


def dressed_splitting(p: ModelParams) -> float:
    return math.sqrt((2.0 * p.v_gate) ** 2 + p.e_j ** 2)


def dressed_basis(p: ModelParams) -> np.ndarray:
    """Columns: upper dressed state |e'>, lower dressed state |g'> in the bare (e, g) basis.

    Falls back to the bare basis when the qubit Hamiltonian vanishes.
    """
    if dressed_splitting(p) == 0.0:
        return np.eye(2, dtype=complex)
    _, v = linalg.hermitian_eigs(qubit_hamiltonian(p))
    # fix phases so the largest component of each column is real positive
    for k in range(2):
        idx = np.argmax(np.abs(v[:, k]))
        v[:, k] *= np.exp(-1j * np.angle(v[idx, k]))
    return v


def rwa_coupling(p: ModelParams) -> float:
    """Transverse part of omega sigma_z in the dressed basis, |<e'|sigma_z|g'>| omega."""
    r = dressed_basis(p)
    return float(abs(r[:, 0].conj() @ SIGMA_Z @ r[:, 1]) * p.omega)


def dressed_frame(p: ModelParams) -> np.ndarray:
    """Unitary mapping dressed-product coordinates to bare coordinates."""
    r = dressed_basis(p)
    return linalg.kron_all([r] * p.n_qubits + [np.eye(p.n_max + 1)])


def excitation_numbers(p: ModelParams) -> np.ndarray:
    """Total excitation number of each dressed-product basis state (phonons + upper dressed qubits)."""
    per_qubit = np.array([1, 0])
    phonons = np.arange(p.n_max + 1)
    total = np.zeros(1, dtype=int)
    for _ in range(p.n_qubits):
        total = np.add.outer(total, per_qubit).ravel()
    return np.add.outer(total, phonons).ravel()


def excitation_operator(p: ModelParams) -> np.ndarray:
    u = dressed_frame(p)
    return (u * excitation_numbers(p)) @ u.conj().T


def build_hamiltonian_rwa(p: ModelParams) -> np.ndarray:
    """Excitation-conserving part of the Hamiltonian.

    The full Hamiltonian is written in the basis where every qubit is
    diagonal (splitting sqrt((2V)^2 + E_J^2)); matrix elements between
    different total-excitation sectors are dropped.  For the coupling term
    this removes the longitudinal part and the counter-rotating transverse
    terms, leaving g_eff (a^dag S_- + a S_+) with g_eff = rwa_coupling(p).
    """
    u = dressed_frame(p)
    h = u.conj().T @ build_hamiltonian(p) @ u
    n_exc = excitation_numbers(p)
    h = np.where(n_exc[:, None] == n_exc[None, :], h, 0.0)
    h = u @ h @ u.conj().T
    return (h + h.conj().T) / 2


def hamiltonian(p: ModelParams) -> np.ndarray:
    return build_hamiltonian_rwa(p) if p.rwa else build_hamiltonian(p)


@dataclass(frozen=True)
class LocalOp:
    """A single-site operator: ``matrix`` acting on factor ``site``."""

    site: int
    matrix: np.ndarray


@dataclass(frozen=True)
class DissipatorTerm:
    """rate * (A rho B^dag - 1/2 {B^dag A, rho}).

    ``a`` and ``b`` are the embedded operators; ``a_local``/``b_local`` record
    the same operators as single-site factors.
    """

    rate: float
    a: np.ndarray
    b: np.ndarray
    label: str
    a_local: LocalOp | None = None
    b_local: LocalOp | None = None


@dataclass(frozen=True)
class CollapseSet:
    terms: tuple[DissipatorTerm, ...] = field(default_factory=tuple)
    space: CompositeSpace | None = None

    def labels(self) -> list[str]:
        return [t.label for t in self.terms]

    def find(self, label: str) -> DissipatorTerm:
        for t in self.terms:
            if t.label == label:
                return t
        raise KeyError(label)

    def jump_operators(self, tol: float = 0.0) -> list[tuple[float, np.ndarray]]:
        """Diagonal (Lindblad) form: list of (rate, L) such that the terms equal sum rate D[L].

        The coefficient matrix over the distinct operators is diagonalized;
        channels with |rate| <= tol are dropped.
        """
        ops: list[np.ndarray] = []
        keys: dict[int, int] = {}

        def index(op):
            k = id(op)
            if k not in keys:
                keys[k] = len(ops)
                ops.append(op)
            return keys[k]

        pairs = [(index(t.a), index(t.b), t.rate) for t in self.terms if t.rate != 0.0]
        if not pairs:
            return []
        c = np.zeros((len(ops), len(ops)))
        for i, j, rate in pairs:
            c[i, j] += rate
        c = (c + c.T) / 2
        w, v = np.linalg.eigh(c)
        out = []
        for k in range(len(w)):
            if abs(w[k]) > tol:
                op = sum(v[m, k] * ops[m] for m in range(len(ops)) if v[m, k] != 0.0)
                out.append((float(w[k]), op))
        return out


def build_collapse_set(p: ModelParams) -> CollapseSet:
    """Non-unitary terms of the master equation.

    Resonator: 2 kappa D[a] (zero-temperature phonon bath).  Qubits:
    gamma_ij (1 + n_bar) for the downward pair (sigma_-^(i), sigma_-^(j)) and
    gamma_ij n_bar for the upward pair (sigma_+^(i), sigma_+^(j)).
    """
    ops = operators(p)
    res = ops.space.resonator
    terms = []
    if p.kappa > 0:
        a_loc = LocalOp(res, annihilation(p.n_max))
        terms.append(DissipatorTerm(2.0 * p.kappa, ops.a, ops.a, "resonator", a_loc, a_loc))
    g = p.decay_matrix
    sm_loc = [LocalOp(j, SIGMA_MINUS) for j in range(p.n_qubits)]
    sp_loc = [LocalOp(j, SIGMA_PLUS) for j in range(p.n_qubits)]
    for i in range(p.n_qubits):
        for j in range(p.n_qubits):
            if g[i, j] == 0.0:
                continue
            down = g[i, j] * (1.0 + p.n_bar)
            terms.append(
                DissipatorTerm(down, ops.sm[i], ops.sm[j], f"down_{i + 1}{j + 1}", sm_loc[i], sm_loc[j])
            )
            if p.n_bar > 0:
                up = g[i, j] * p.n_bar
                terms.append(
                    DissipatorTerm(up, ops.sp[i], ops.sp[j], f"up_{i + 1}{j + 1}", sp_loc[i], sp_loc[j])
                )
    return CollapseSet(tuple(terms), ops.space)


def interaction_picture_transform(rho: np.ndarray, h: np.ndarray, t: float) -> np.ndarray:
    """exp(i H t) rho exp(-i H t), computed through the eigendecomposition of H."""
    w, v = linalg.hermitian_eigs(h)
    u = (v * np.exp(1j * w * t)) @ v.conj().T
    return u @ np.asarray(rho, dtype=complex) @ u.conj().T
