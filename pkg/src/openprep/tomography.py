"""Prepare -> evolve -> observe pipeline and linear-inversion process tomography.

Reconstruction is exact linear inversion on noiseless simulated data. No
positivity constraint is imposed, so a negative Choi eigenvalue in the result
comes from the preparation physics and not from a fitting step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import SuperOperator, choi_from_superop, cp_diagnosis, vec
from .dynamics import JointDynamics, evolve
from .errors import ContractViolation, DegenerateBasisError, DimensionError
from .preparations import PreparationProcedure
from .qmath import BASIS_RANK_TOL, CP_TOL, PROBABILITY_TOL, STRUCTURAL_TOL, as_matrix, hermiticity_deviation
from .states import DensityMatrix, BipartiteState, bloch_state, pure_density, reduce_environment, reduce_system


def _basis_singular_values(states: Sequence[DensityMatrix]) -> np.ndarray:
    x = np.column_stack([vec(s.matrix) for s in states])
    return np.linalg.svd(x, compute_uv=False)


def _check_spanning(states: Sequence[DensityMatrix], tol: float = BASIS_RANK_TOL):
    d = states[0].dim
    if len(states) < d * d:
        raise DegenerateBasisError(f"{len(states)} inputs cannot span the {d * d}-dimensional operator space")
    sv = _basis_singular_values(states)
    if sv[d * d - 1] <= tol:
        raise DegenerateBasisError(f"tomography inputs are linearly dependent (singular value {sv[d * d - 1]:.3e})")


@dataclass(frozen=True, eq=False)
class TomographyBasis:
    inputs: tuple

    def __post_init__(self):
        states = tuple(s if isinstance(s, DensityMatrix) else DensityMatrix(s) for s in self.inputs)
        if not states:
            raise DegenerateBasisError("empty tomography basis")
        if len({s.dim for s in states}) != 1:
            raise DimensionError("tomography inputs have mixed dimensions")
        _check_spanning(states)
        object.__setattr__(self, "inputs", states)

    @property
    def dim(self) -> int:
        return self.inputs[0].dim

    def __len__(self):
        return len(self.inputs)

    @classmethod
    def qubit_standard(cls) -> "TomographyBasis":
        """``{|z,+>, |z,->, |x,+>, |y,+>}``."""
        return cls(tuple(pure_density(bloch_state(n)) for n in ("z+", "z-", "x+", "y+")))


@dataclass(frozen=True, eq=False)
class Observable:
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = as_matrix(self.matrix, "observable")
        if hermiticity_deviation(m) > STRUCTURAL_TOL:
            raise ContractViolation(f"observable {self.name!r} is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def expectation(self, rho: DensityMatrix) -> float:
        value = np.trace(self.matrix @ rho.matrix)
        # Hermitian times Hermitian PSD has a real trace; anything else is a bug upstream.
        assert abs(value.imag) <= 1e-12, value
        return float(value.real)


@dataclass(frozen=True, eq=False)
class ExperimentRecord:
    input_label: int
    input_state: DensityMatrix
    output_state: DensityMatrix
    probability: float
    environment: DensityMatrix
    expectations: tuple = field(default=())


@dataclass(frozen=True, eq=False)
class ProcessDiagnosis:
    process: SuperOperator
    choi_min_eigenvalue: float
    is_cp: bool
    tp_deviation: float
    linearity_residual: float


def run_pipeline(
    rho_se: BipartiteState,
    proc: PreparationProcedure,
    d: JointDynamics,
    basis: TomographyBasis | None = None,
    observables: Sequence[Observable] = (),
    min_probability: float = PROBABILITY_TOL,
) -> list[ExperimentRecord]:
    """Prepare each input, evolve jointly, discard the environment, record.

    When ``basis`` is given the procedure must prepare exactly those inputs
    in the same order.
    """
    inputs = proc.inputs()
    if basis is not None:
        if len(basis) != len(inputs):
            raise DimensionError(f"procedure prepares {len(inputs)} inputs, basis has {len(basis)}")
        for m, (got, want) in enumerate(zip(inputs, basis.inputs)):
            if got.dim != want.dim or np.max(np.abs(got.matrix - want.matrix)) > STRUCTURAL_TOL:
                raise ContractViolation(f"procedure input {m} differs from basis input {m}")
    records = []
    for m in range(len(proc)):
        outcome = proc.prepare(rho_se, m, min_probability)
        output = reduce_system(evolve(outcome.prepared, d))
        records.append(ExperimentRecord(
            input_label=m,
            input_state=inputs[m],
            output_state=output,
            probability=outcome.probability,
            environment=reduce_environment(outcome.prepared),
            expectations=tuple(o.expectation(output) for o in observables),
        ))
    return records


def reconstruct_process(records: Sequence[ExperimentRecord]) -> SuperOperator:
    """Least-squares linear map taking every recorded input to its output.

    With exactly ``d^2`` spanning inputs the solution is the unique linear
    extension; with more it is the least-squares fit and the mismatch shows
    up in :func:`linearity_residual`.
    """
    if not records:
        raise DegenerateBasisError("no records to reconstruct from")
    inputs = [r.input_state for r in records]
    _check_spanning(inputs)
    x = np.column_stack([vec(r.input_state.matrix) for r in records])
    y = np.column_stack([vec(r.output_state.matrix) for r in records])
    # S x = y  <=>  x^T S^T = y^T
    st, *_ = np.linalg.lstsq(x.T, y.T, rcond=None)
    return SuperOperator(inputs[0].dim, st.T)


def linearity_residual(process: SuperOperator, records: Sequence[ExperimentRecord]) -> float:
    """``max_m ||Lambda(P_m) - output_m||_F``."""
    return max(float(np.linalg.norm(process(r.input_state.matrix) - r.output_state.matrix)) for r in records)


def diagnose(
    process: SuperOperator,
    records: Sequence[ExperimentRecord],
    cp_tol: float = CP_TOL,
) -> ProcessDiagnosis:
    cp = cp_diagnosis(choi_from_superop(process), cp_tol)
    return ProcessDiagnosis(
        process=process,
        choi_min_eigenvalue=cp.min_eigenvalue,
        is_cp=cp.is_cp,
        tp_deviation=cp.tp_deviation,
        linearity_residual=linearity_residual(process, records),
    )
