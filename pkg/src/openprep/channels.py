"""Quantum operations in Kraus, superoperator and Choi form.

Vectorization is column stacking throughout: ``vec(A)`` stacks the columns of
``A``, so ``vec(A rho B^dagger) = (conj(B) (x) A) vec(rho)``. A Kraus channel
``{K}`` therefore has superoperator ``sum_K conj(K) (x) K``.

The Choi matrix puts the input copy on the left factor:
``C = sum_ij E_ij (x) Lambda(E_ij)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ContractViolation, DimensionError
from .qmath import (
    CP_TOL,
    STRUCTURAL_TOL,
    Keep,
    as_matrix,
    dagger,
    hermitian_eigen,
    hermiticity_deviation,
    is_unitary,
    partial_trace,
)

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def vec(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim, order="F")


def matrix_unit(dim: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((dim, dim), dtype=complex)
    e[i, j] = 1
    return e


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Completely positive, trace non-increasing map ``rho -> sum K rho K^dagger``."""

    operators: tuple

    def __post_init__(self):
        ops = tuple(as_matrix(k, "Kraus operator") for k in self.operators)
        if not ops:
            raise ContractViolation("a Kraus channel needs at least one operator")
        dim = ops[0].shape[0]
        if any(k.shape != (dim, dim) for k in ops):
            raise DimensionError("Kraus operators must all have the same dimension")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "operators", ops)
        top = hermitian_eigen(self.effect()).eigenvalues[-1]
        if top > 1 + STRUCTURAL_TOL:
            raise ContractViolation(
                f"Kraus operators increase trace (largest eigenvalue of sum K^dag K is {top:.12g})"
            )

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def effect(self) -> np.ndarray:
        """``sum K^dagger K``; the identity for trace-preserving channels."""
        return sum(dagger(k) @ k for k in self.operators)

    def tp_deviation(self) -> float:
        return float(np.max(np.abs(self.effect() - np.eye(self.dim))))

    def is_trace_preserving(self, atol: float = STRUCTURAL_TOL) -> bool:
        return self.tp_deviation() <= atol

    def __call__(self, rho) -> np.ndarray:
        return apply_kraus(self, rho)


def unitary_channel(u) -> KrausChannel:
    u = as_matrix(u, "unitary")
    if not is_unitary(u):
        raise ContractViolation("operator is not unitary")
    return KrausChannel((u,))


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim, dtype=complex),))


def depolarizing_channel(p: float) -> KrausChannel:
    """Single-qubit depolarizing channel; ``p = 1`` maps every state to I/2."""
    return KrausChannel((
        np.sqrt(1 - 3 * p / 4) * PAULI["I"],
        np.sqrt(p / 4) * PAULI["X"],
        np.sqrt(p / 4) * PAULI["Y"],
        np.sqrt(p / 4) * PAULI["Z"],
    ))


def apply_kraus(c: KrausChannel, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (c.dim, c.dim):
        raise DimensionError(f"channel acts on dimension {c.dim}, got operator of shape {rho.shape}")
    return sum(k @ rho @ dagger(k) for k in c.operators)


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """Linear map on ``dim x dim`` operators as a ``dim^2 x dim^2`` matrix on ``vec``."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "superoperator")
        if m.shape[0] != self.dim**2:
            raise DimensionError(f"superoperator for dim {self.dim} must be {self.dim**2} square")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        # Hermiticity preservation is equivalent to a Hermitian Choi matrix.
        dev = hermiticity_deviation(_choi_array(self))
        if dev > STRUCTURAL_TOL * max(1.0, float(np.max(np.abs(m)))):
            raise ContractViolation(f"map does not preserve Hermiticity (deviation {dev:.3e})")

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise DimensionError(f"superoperator acts on dimension {self.dim}, got {rho.shape}")
        return unvec(self.matrix @ vec(rho), self.dim)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "Choi matrix")
        if m.shape[0] != self.dim**2:
            raise DimensionError(f"Choi matrix for dim {self.dim} must be {self.dim**2} square")
        dev = hermiticity_deviation(m)
        if dev > STRUCTURAL_TOL * max(1.0, float(np.max(np.abs(m)))):
            raise ContractViolation(f"Choi matrix is not Hermitian (deviation {dev:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


class CPDiagnosis(NamedTuple):
    min_eigenvalue: float
    is_cp: bool
    tp_deviation: float


def superop_from_action(apply: Callable[[np.ndarray], np.ndarray], dim: int) -> SuperOperator:
    """Tabulate a (presumed linear) operator map on the matrix-unit basis."""
    cols = []
    for k in range(dim * dim):
        basis = np.zeros(dim * dim, dtype=complex)
        basis[k] = 1
        cols.append(vec(np.asarray(apply(unvec(basis, dim)), dtype=complex)))
    return SuperOperator(dim, np.column_stack(cols))


def superop_from_kraus(c: KrausChannel) -> SuperOperator:
    return SuperOperator(c.dim, sum(np.kron(k.conj(), k) for k in c.operators))


def _choi_array(s: SuperOperator) -> np.ndarray:
    d = s.dim
    c = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            out = unvec(s.matrix @ vec(matrix_unit(d, i, j)), d)
            c += np.kron(matrix_unit(d, i, j), out)
    return c


def choi_from_superop(s: SuperOperator) -> ChoiMatrix:
    return ChoiMatrix(s.dim, _choi_array(s))


def cp_diagnosis(c: ChoiMatrix, cp_tol: float = CP_TOL) -> CPDiagnosis:
    """Smallest Choi eigenvalue, the CP verdict, and distance from trace preservation.

    ``tp_deviation`` is the Frobenius distance of ``Tr_out C`` from the identity.
    """
    # Choi matrices may carry ~1e-15 asymmetry; the constructor already bounded it.
    m = 0.5 * (c.matrix + dagger(c.matrix))
    lam_min = float(hermitian_eigen(m).eigenvalues[0])
    reduced = partial_trace(m, c.dim, c.dim, Keep.SYSTEM)
    tp_dev = float(np.linalg.norm(reduced - np.eye(c.dim)))
    return CPDiagnosis(lam_min, lam_min >= -cp_tol, tp_dev)


def compose_kraus(first: KrausChannel, then: KrausChannel) -> KrausChannel:
    """Channel applying ``first`` and then ``then``."""
    if first.dim != then.dim:
        raise DimensionError("cannot compose channels of different dimension")
    return KrausChannel(tuple(b @ a for b in then.operators for a in first.operators))
