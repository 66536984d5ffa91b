"""Seeded random states, unitaries and channels for property sweeps."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .channels import KrausChannel
from .qmath import dagger
from .states import BipartiteState, DensityMatrix, PureStateVector, product_state


def ginibre(dim: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((dim, cols)) + 1j * rng.standard_normal((dim, cols))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Hilbert-Schmidt (rank = dim) or induced-measure random state."""
    g = ginibre(dim, rank or dim, rng)
    rho = g @ dagger(g)
    return DensityMatrix(rho / np.trace(rho).real)


def random_pure(dim: int, rng: np.random.Generator) -> PureStateVector:
    return PureStateVector.normalized(ginibre(dim, 1, rng)[:, 0])


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = ginibre(dim, dim, rng)
    return 0.5 * (g + dagger(g))


def random_bipartite(dim_s: int, dim_e: int, rng: np.random.Generator, rank: int | None = None) -> BipartiteState:
    """Generic (hence correlated) joint state."""
    return BipartiteState(dim_s, dim_e, random_density(dim_s * dim_e, rng, rank))


def random_product(dim_s: int, dim_e: int, rng: np.random.Generator) -> BipartiteState:
    return product_state(random_density(dim_s, rng), random_density(dim_e, rng))


def random_kraus_channel(dim: int, n_ops: int, rng: np.random.Generator) -> KrausChannel:
    """Trace-preserving channel from an isometry ``V: d -> d * n_ops``."""
    v = unitary_group.rvs(dim * n_ops, random_state=rng)[:, :dim]
    return KrausChannel(tuple(v[k * dim:(k + 1) * dim] for k in range(n_ops)))
