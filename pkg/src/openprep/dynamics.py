"""Closed joint evolution of system and environment."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DimensionError
from .qmath import (
    FACTORIZATION_TOL,
    STRUCTURAL_TOL,
    as_matrix,
    dagger,
    is_unitary,
    matrix_exponential_unitary,
)
from .states import BipartiteState, DensityMatrix, reduce_system

# Two-qubit gates; the system qubit is the left factor (and the CNOT control).
GATES = {
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
    "ISWAP": np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class JointDynamics:
    """A joint unitary, given directly or as ``exp(-i H t)``."""

    unitary: np.ndarray
    hamiltonian: np.ndarray | None = None
    duration: float | None = None

    def __post_init__(self):
        u = as_matrix(self.unitary, "unitary")
        if not is_unitary(u, STRUCTURAL_TOL):
            dev = float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))))
            raise ContractViolation(f"dynamics is not unitary (max |U^dag U - I| = {dev:.3e})")
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)

    @classmethod
    def from_hamiltonian(cls, h, duration: float) -> "JointDynamics":
        h = as_matrix(h, "hamiltonian")
        return cls(matrix_exponential_unitary(h, duration), h, float(duration))

    @classmethod
    def gate(cls, name: str) -> "JointDynamics":
        return cls(GATES[name.upper()])

    @classmethod
    def factorized(cls, u_s, u_e) -> "JointDynamics":
        return cls(np.kron(as_matrix(u_s), as_matrix(u_e)))

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]


def evolve(state: BipartiteState, d: JointDynamics) -> BipartiteState:
    if d.dim != state.dim_s * state.dim_e:
        raise DimensionError(f"dynamics of dimension {d.dim} cannot act on a {state.dim_s}x{state.dim_e} state")
    u = d.unitary
    return BipartiteState(state.dim_s, state.dim_e, DensityMatrix(u @ state.matrix @ dagger(u)))


def system_output(state: BipartiteState, d: JointDynamics) -> DensityMatrix:
    return reduce_system(evolve(state, d))


def _realign(u: np.ndarray, dim_s: int, dim_e: int) -> np.ndarray:
    # R[(i,j),(k,l)] = U[(i,k),(j,l)], so U = A (x) B  <=>  R = vec(A) vec(B)^T
    t = u.reshape(dim_s, dim_e, dim_s, dim_e).transpose(0, 2, 1, 3)
    return t.reshape(dim_s * dim_s, dim_e * dim_e)


def operator_schmidt_coefficients(u, dim_s: int, dim_e: int) -> np.ndarray:
    u = as_matrix(u)
    if u.shape[0] != dim_s * dim_e:
        raise DimensionError(f"operator of dimension {u.shape[0]} cannot be split as {dim_s} x {dim_e}")
    return np.linalg.svd(_realign(u, dim_s, dim_e), compute_uv=False)


def is_factorized(d: JointDynamics, dim_s: int, dim_e: int, atol: float = FACTORIZATION_TOL) -> bool:
    """True iff the joint unitary is ``U_s (x) U_e`` (operator Schmidt rank one)."""
    if d.dim != dim_s * dim_e:
        raise DimensionError(f"dynamics of dimension {d.dim} cannot be split as {dim_s} x {dim_e}")
    r = _realign(d.unitary, dim_s, dim_e)
    left, s, right = np.linalg.svd(r)
    if np.count_nonzero(s > atol) != 1:
        return False
    a = np.sqrt(s[0]) * left[:, 0].reshape(dim_s, dim_s)
    b = np.sqrt(s[0]) * right[0, :].reshape(dim_e, dim_e)
    return bool(np.max(np.abs(np.kron(a, b) - d.unitary)) <= atol)
