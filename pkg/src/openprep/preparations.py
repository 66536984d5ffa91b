"""Preparation procedures acting on joint system/environment states.

Three procedures are supported:

* :class:`Projective` -- project the system onto a rank-1 ``P_m`` and
  renormalize. Pre-existing correlations leave an ``m``-dependent
  environment behind.
* :class:`Stochastic` -- pin the system to ``|Phi>`` (discarding it), then
  rotate with a local trace-preserving ``Omega_m``. The environment is the
  same reduced state for every ``m``.
* :class:`MultiPin` -- a distinct pin per input, each with its own direct
  environment action ``Q_m``.

All procedures act on the system factor only, except ``Q_m`` in MultiPin.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .channels import KrausChannel, apply_kraus, identity_channel, unitary_channel
from .errors import ContractViolation, DimensionError, DomainError, ImpossiblePreparationError
from .qmath import PROBABILITY_TOL, STRUCTURAL_TOL, dagger, tensor
from .states import (
    BipartiteState,
    DensityMatrix,
    PureStateVector,
    pure_density,
    reduce_environment,
    trace_distance,
)


@dataclass(frozen=True, eq=False)
class PreparationOutcome:
    prepared: BipartiteState
    probability: float
    input_label: int

    def __post_init__(self):
        p = float(self.probability)
        if not PROBABILITY_TOL < p <= 1 + STRUCTURAL_TOL:
            raise DomainError(f"preparation probability {p} outside (0, 1]")
        object.__setattr__(self, "probability", min(p, 1.0))


def _as_projector(p) -> DensityMatrix:
    if isinstance(p, PureStateVector):
        return pure_density(p)
    if not isinstance(p, DensityMatrix):
        p = DensityMatrix(p)
    m = p.matrix
    # Unit trace plus idempotence forces rank 1.
    if np.max(np.abs(m @ m - m)) > STRUCTURAL_TOL:
        raise ContractViolation("projective preparation needs a rank-1 projector (P^2 = P, Tr P = 1)")
    return p


def _require_tp(c: KrausChannel, what: str):
    if not c.is_trace_preserving():
        raise ContractViolation(
            f"{what} must be trace-preserving (max |sum K^dag K - I| = {c.tp_deviation():.3e})"
        )


def prepare_projective(
    rho_se: BipartiteState,
    p_m: DensityMatrix | PureStateVector,
    input_label: int = 0,
    min_probability: float = PROBABILITY_TOL,
) -> PreparationOutcome:
    """Filter the system through ``P_m``; the outcome keeps ``a_m = Tr[(P_m (x) I) rho]``."""
    p = _as_projector(p_m)
    if p.dim != rho_se.dim_s:
        raise DimensionError(f"projector dimension {p.dim} != system dimension {rho_se.dim_s}")
    big = tensor(p.matrix, np.eye(rho_se.dim_e))
    filtered = big @ rho_se.matrix @ big
    a = float(np.real(np.trace(filtered)))
    if a <= min_probability:
        raise ImpossiblePreparationError(
            f"projective preparation of input {input_label} has probability {a:.3e}",
            input_label=input_label,
            probability=a,
        )
    prepared = BipartiteState(rho_se.dim_s, rho_se.dim_e, DensityMatrix(filtered / a))
    return PreparationOutcome(prepared, a, input_label)


def prepare_pin(rho_se: BipartiteState, phi: PureStateVector, input_label: int = 0) -> PreparationOutcome:
    """Replace the system by ``|Phi><Phi|`` and keep the environment marginal."""
    if phi.dim != rho_se.dim_s:
        raise DimensionError(f"pin state dimension {phi.dim} != system dimension {rho_se.dim_s}")
    joint = tensor(pure_density(phi).matrix, reduce_environment(rho_se).matrix)
    return PreparationOutcome(BipartiteState(rho_se.dim_s, rho_se.dim_e, DensityMatrix(joint)), 1.0, input_label)


def prepare_stochastic(
    rho_se: BipartiteState,
    phi: PureStateVector,
    omega_m: KrausChannel,
    input_label: int = 0,
) -> PreparationOutcome:
    _require_tp(omega_m, "local operation")
    if omega_m.dim != rho_se.dim_s:
        raise DimensionError(f"local operation dimension {omega_m.dim} != system dimension {rho_se.dim_s}")
    pinned = prepare_pin(rho_se, phi, input_label).prepared
    # Omega_m (x) I on a product only touches the system factor.
    sys_state = apply_kraus(omega_m, pure_density(phi).matrix)
    joint = tensor(sys_state, reduce_environment(pinned).matrix)
    return PreparationOutcome(BipartiteState(rho_se.dim_s, rho_se.dim_e, DensityMatrix(joint)), 1.0, input_label)


def prepare_multipin(
    rho_se: BipartiteState,
    pin_m: PureStateVector,
    q_m: KrausChannel,
    input_label: int = 0,
) -> PreparationOutcome:
    """``|Phi_m><Phi_m| (x) Q_m(rho_E)``: a pin map that also acts on the environment."""
    if q_m.dim != rho_se.dim_e:
        raise DimensionError(f"environment action dimension {q_m.dim} != environment dimension {rho_se.dim_e}")
    _require_tp(q_m, "environment action")
    if pin_m.dim != rho_se.dim_s:
        raise DimensionError(f"pin state dimension {pin_m.dim} != system dimension {rho_se.dim_s}")
    env = apply_kraus(q_m, reduce_environment(rho_se).matrix)
    joint = tensor(pure_density(pin_m).matrix, env)
    return PreparationOutcome(BipartiteState(rho_se.dim_s, rho_se.dim_e, DensityMatrix(joint)), 1.0, input_label)


def environment_dependence(outcomes: Sequence[PreparationOutcome]) -> float:
    """Largest pairwise trace distance between post-preparation environment states."""
    if len(outcomes) < 2:
        raise DomainError("environment dependence needs at least two outcomes")
    envs = [reduce_environment(o.prepared) for o in outcomes]
    if len({e.dim for e in envs}) != 1:
        raise DimensionError("outcomes have different environment dimensions")
    return max(trace_distance(a, b) for a, b in itertools.combinations(envs, 2))


def rotation_between(phi: PureStateVector, target: PureStateVector) -> np.ndarray:
    """Some unitary ``U`` with ``U|phi> = |target>`` (up to global phase it is exact)."""
    if phi.dim != target.dim:
        raise DimensionError("states live in different dimensions")

    def completed(v):
        q, _ = np.linalg.qr(np.column_stack([v, np.eye(v.size)]))
        q = q[:, : v.size]
        # qr returns the first column only up to a phase
        q[:, 0] *= np.vdot(q[:, 0], v)
        return q

    return completed(target.amplitudes) @ dagger(completed(phi.amplitudes))


# --------------------------------------------------------------------------
# Procedure families: one preparation per input label m.
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Projective:
    projectors: tuple

    kind = "projective"

    def __post_init__(self):
        object.__setattr__(self, "projectors", tuple(_as_projector(p) for p in self.projectors))

    def __len__(self):
        return len(self.projectors)

    def inputs(self) -> list[DensityMatrix]:
        return list(self.projectors)

    def prepare(self, rho_se: BipartiteState, m: int, min_probability: float = PROBABILITY_TOL):
        return prepare_projective(rho_se, self.projectors[m], m, min_probability)


@dataclass(frozen=True, eq=False)
class Stochastic:
    """Pin to ``pin_target`` then apply ``rotations[m]``.

    When ``targets`` is given, each rotation is checked to take the pinned
    state to the declared input ``targets[m]``.
    """

    pin_target: PureStateVector
    rotations: tuple
    targets: tuple | None = None

    kind = "stochastic"

    def __post_init__(self):
        rots = tuple(r if isinstance(r, KrausChannel) else unitary_channel(r) for r in self.rotations)
        for m, r in enumerate(rots):
            _require_tp(r, f"rotation {m}")
            if r.dim != self.pin_target.dim:
                raise DimensionError(f"rotation {m} has dimension {r.dim}, pin state {self.pin_target.dim}")
        object.__setattr__(self, "rotations", rots)
        if self.targets is not None:
            targets = tuple(t if isinstance(t, DensityMatrix) else pure_density(t) for t in self.targets)
            if len(targets) != len(rots):
                raise DimensionError("need exactly one declared input per rotation")
            for m, (r, t) in enumerate(zip(rots, targets)):
                got = apply_kraus(r, pure_density(self.pin_target).matrix)
                err = float(np.max(np.abs(got - t.matrix)))
                if err > STRUCTURAL_TOL:
                    raise ContractViolation(
                        f"rotation {m} does not take the pinned state to the declared input (error {err:.3e})"
                    )
            object.__setattr__(self, "targets", targets)

    def __len__(self):
        return len(self.rotations)

    def inputs(self) -> list[DensityMatrix]:
        phi = pure_density(self.pin_target).matrix
        return [DensityMatrix(apply_kraus(r, phi)) for r in self.rotations]

    def prepare(self, rho_se: BipartiteState, m: int, min_probability: float = PROBABILITY_TOL):
        return prepare_stochastic(rho_se, self.pin_target, self.rotations[m], m)


@dataclass(frozen=True, eq=False)
class MultiPin:
    """``pins[m] = (Phi_m, Q_m)``; ``Q_m`` may be ``None`` for the identity."""

    pins: tuple

    kind = "multipin"

    def __post_init__(self):
        pins = []
        for phi, q in self.pins:
            if not isinstance(phi, PureStateVector):
                phi = PureStateVector(phi)
            if q is not None and not isinstance(q, KrausChannel):
                q = unitary_channel(q)
            pins.append((phi, q))
        object.__setattr__(self, "pins", tuple(pins))

    def __len__(self):
        return len(self.pins)

    def inputs(self) -> list[DensityMatrix]:
        return [pure_density(phi) for phi, _ in self.pins]

    def prepare(self, rho_se: BipartiteState, m: int, min_probability: float = PROBABILITY_TOL):
        phi, q = self.pins[m]
        if q is None:
            q = identity_channel(rho_se.dim_e)
        return prepare_multipin(rho_se, phi, q, m)


PreparationProcedure = Union[Projective, Stochastic, MultiPin]


def prepare_all(
    rho_se: BipartiteState,
    procedure: PreparationProcedure,
    min_probability: float = PROBABILITY_TOL,
) -> list[PreparationOutcome]:
    return [procedure.prepare(rho_se, m, min_probability) for m in range(len(procedure))]
