"""Quantum states with enforced physicality, plus distance/correlation measures.

States are validated on construction and never repaired: a matrix whose
smallest eigenvalue is below ``-STRUCTURAL_TOL`` is rejected outright, since
clipping would hide exactly the negativity this package is meant to expose.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DimensionError, DomainError
from .qmath import (
    STRUCTURAL_TOL,
    Keep,
    as_matrix,
    hermitian_eigen,
    hermiticity_deviation,
    partial_trace,
    tensor,
    trace_norm,
)

__all__ = [
    "DensityMatrix",
    "BipartiteState",
    "PureStateVector",
    "pure_density",
    "product_state",
    "bell_phi_plus",
    "werner_family",
    "reduce_system",
    "reduce_environment",
    "trace_distance",
    "correlation_norm",
    "purity",
    "BLOCH_STATES",
    "bloch_state",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "density matrix")
        dev = hermiticity_deviation(m)
        if dev > STRUCTURAL_TOL:
            raise ContractViolation(f"density matrix is not Hermitian (deviation {dev:.3e})")
        tr = np.trace(m)
        if abs(tr - 1) > STRUCTURAL_TOL:
            raise ContractViolation(f"density matrix trace is {tr.real:.12g}, expected 1")
        lam_min = hermitian_eigen(m).eigenvalues[0]
        if lam_min < -STRUCTURAL_TOL:
            raise ContractViolation(
                f"density matrix is not positive semidefinite (min eigenvalue {lam_min:.3e})"
            )
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Joint system (left factor) and environment (right factor) state."""

    dim_s: int
    dim_e: int
    joint: DensityMatrix

    def __post_init__(self):
        if not isinstance(self.joint, DensityMatrix):
            object.__setattr__(self, "joint", DensityMatrix(self.joint))
        if self.dim_s < 1 or self.dim_e < 1:
            raise DimensionError("subsystem dimensions must be positive")
        if self.joint.dim != self.dim_s * self.dim_e:
            raise DimensionError(
                f"joint dimension {self.joint.dim} != {self.dim_s} * {self.dim_e}"
            )

    @property
    def matrix(self) -> np.ndarray:
        return self.joint.matrix


@dataclass(frozen=True, eq=False)
class PureStateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise ContractViolation("state vector must be non-empty and finite")
        norm = np.linalg.norm(v)
        if abs(norm - 1) > STRUCTURAL_TOL:
            raise ContractViolation(f"state vector has norm {norm:.12g}, expected 1")
        object.__setattr__(self, "amplitudes", _frozen(v))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def normalized(cls, amplitudes) -> "PureStateVector":
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(v / np.linalg.norm(v))


_S = 1 / np.sqrt(2)
BLOCH_STATES = {
    "z+": (1, 0),
    "z-": (0, 1),
    "x+": (_S, _S),
    "x-": (_S, -_S),
    "y+": (_S, 1j * _S),
    "y-": (_S, -1j * _S),
}


def bloch_state(name: str) -> PureStateVector:
    """Single-qubit Pauli eigenstate, e.g. ``"x+"`` for (|0> + |1>)/sqrt(2)."""
    try:
        return PureStateVector(BLOCH_STATES[name])
    except KeyError:
        raise DomainError(f"unknown qubit state {name!r}; expected one of {sorted(BLOCH_STATES)}") from None


def pure_density(v: PureStateVector) -> DensityMatrix:
    if not isinstance(v, PureStateVector):
        v = PureStateVector(v)
    a = v.amplitudes
    return DensityMatrix(np.outer(a, a.conj()))


def product_state(s: DensityMatrix, e: DensityMatrix) -> BipartiteState:
    return BipartiteState(s.dim, e.dim, DensityMatrix(tensor(s.matrix, e.matrix)))


def bell_phi_plus() -> BipartiteState:
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = _S
    return BipartiteState(2, 2, pure_density(PureStateVector(psi)))


def werner_family(p: float) -> BipartiteState:
    """``p |Phi+><Phi+| + (1 - p) I/4``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"werner parameter p={p} outside [0, 1]")
    joint = p * bell_phi_plus().matrix + (1 - p) * np.eye(4) / 4
    return BipartiteState(2, 2, DensityMatrix(joint))


def reduce_system(s: BipartiteState) -> DensityMatrix:
    return DensityMatrix(partial_trace(s.matrix, s.dim_s, s.dim_e, Keep.SYSTEM))


def reduce_environment(s: BipartiteState) -> DensityMatrix:
    return DensityMatrix(partial_trace(s.matrix, s.dim_s, s.dim_e, Keep.ENVIRONMENT))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"cannot compare states of shapes {a.shape} and {b.shape}")
    return 0.5 * trace_norm(a - b)


def correlation_norm(s: BipartiteState) -> float:
    """Frobenius norm of ``joint - rho_S (x) rho_E``; zero iff the state is a product."""
    prod = tensor(reduce_system(s).matrix, reduce_environment(s).matrix)
    return float(np.linalg.norm(s.matrix - prod))


def purity(rho: DensityMatrix) -> float:
    m = np.asarray(rho)
    return float(np.real(np.trace(m @ m)))
