"""Dense complex linear algebra kernel.

Every operator in the package is a square ``complex128`` numpy array. Joint
system/environment operators put the system on the LEFT tensor factor, so the
flattened index of ``|s>|e>`` is ``s * dim_e + e``.

Hermitian eigendecomposition (``numpy.linalg.eigh``) is the only spectral
backend: PSD checks, trace distances and unitary exponentials all go through
:func:`hermitian_eigen`.
"""
from __future__ import annotations

from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import ContractViolation, DimensionError

# Structural checks: Hermiticity, unit trace, PSD, unitarity, idempotence.
STRUCTURAL_TOL = 1e-10
# Minimum Choi eigenvalue still counted as completely positive.
CP_TOL = 1e-9
# Preparations below this success probability are rejected.
PROBABILITY_TOL = 1e-12
# Operator-Schmidt singular values above this count toward the Schmidt rank.
FACTORIZATION_TOL = 1e-8
# Smallest acceptable singular value of a tomography input set.
BASIS_RANK_TOL = 1e-8


class Keep(str, Enum):
    SYSTEM = "system"
    ENVIRONMENT = "environment"


class HermitianEigenSystem(NamedTuple):
    eigenvalues: np.ndarray  # real, ascending
    eigenvectors: np.ndarray  # orthonormal columns, same order


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a square, finite complex128 array (always a fresh copy)."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractViolation(f"{name} has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conjugate(np.transpose(m))


def hermiticity_deviation(m: np.ndarray) -> float:
    """Largest entrywise deviation of ``m`` from its conjugate transpose."""
    return float(np.max(np.abs(m - dagger(m))))


def is_hermitian(m: np.ndarray, atol: float = STRUCTURAL_TOL) -> bool:
    return hermiticity_deviation(m) <= atol


def is_unitary(u: np.ndarray, atol: float = STRUCTURAL_TOL) -> bool:
    u = np.asarray(u)
    return bool(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))) <= atol)


def tensor(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the left (outer) factor."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def partial_trace(m, dim_s: int, dim_e: int, keep: Keep | str = Keep.SYSTEM) -> np.ndarray:
    """Trace out one factor of a ``(dim_s*dim_e)``-dimensional joint operator.

    ``keep=Keep.SYSTEM`` returns ``sum_k m[(i,k),(j,k)]``; ``Keep.ENVIRONMENT``
    sums over the system index instead.
    """
    m = as_matrix(m)
    keep = Keep(keep)
    if dim_s < 1 or dim_e < 1 or m.shape[0] != dim_s * dim_e:
        raise DimensionError(
            f"operator of dimension {m.shape[0]} cannot be split as {dim_s} x {dim_e}"
        )
    t = m.reshape(dim_s, dim_e, dim_s, dim_e)
    if keep is Keep.SYSTEM:
        return np.einsum("ikjk->ij", t)
    return np.einsum("kikj->ij", t)


def hermitian_eigen(m, atol: float = STRUCTURAL_TOL) -> HermitianEigenSystem:
    m = as_matrix(m)
    dev = hermiticity_deviation(m)
    if dev > atol:
        raise ContractViolation(f"matrix is not Hermitian (deviation {dev:.3e})")
    # eigh only reads one triangle; symmetrize so tiny asymmetries do not bias it.
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    return HermitianEigenSystem(w, v)


def matrix_exponential_unitary(h, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h``, built from its eigensystem."""
    w, v = hermitian_eigen(h)
    return (v * np.exp(-1j * w * t)) @ dagger(v)


def psd_sqrt_abs(m) -> np.ndarray:
    """Matrix absolute value ``|m| = sqrt(m^dagger m)`` for Hermitian ``m``."""
    w, v = hermitian_eigen(m)
    return (v * np.abs(w)) @ dagger(v)


def trace_norm(m) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(hermitian_eigen(m).eigenvalues)))
