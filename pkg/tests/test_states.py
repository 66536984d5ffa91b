import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from openprep import sampling
from openprep.errors import ContractViolation, DimensionError, DomainError
from openprep.qmath import hermitian_eigen, tensor
from openprep.states import (
    BipartiteState,
    DensityMatrix,
    PureStateVector,
    bell_phi_plus,
    bloch_state,
    correlation_norm,
    product_state,
    pure_density,
    purity,
    reduce_environment,
    reduce_system,
    trace_distance,
    werner_family,
)
from oracles import bell_plus_matrix, ptrace_loops


def assert_physical(rho):
    m = np.asarray(rho)
    assert np.max(np.abs(m - m.conj().T)) <= 1e-10
    assert abs(np.trace(m) - 1) <= 1e-10
    assert np.linalg.eigvalsh(m)[0] >= -1e-10


# -- invariants -------------------------------------------------------------


def test_density_rejects_unphysical():
    with pytest.raises(ContractViolation, match="trace"):
        DensityMatrix(np.eye(2))
    with pytest.raises(ContractViolation, match="Hermitian"):
        DensityMatrix([[0.5, 0.1], [0.3, 0.5]])
    with pytest.raises(ContractViolation, match="positive"):
        DensityMatrix(np.diag([1.5, -0.5]))


def test_density_is_immutable():
    rho = DensityMatrix(np.eye(2) / 2)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1


def test_density_never_repairs_small_negativity():
    # Just beyond tolerance must be rejected, not clipped.
    with pytest.raises(ContractViolation):
        DensityMatrix(np.diag([1 + 1e-9, -1e-9]))
    DensityMatrix(np.diag([1 + 1e-11, -1e-11]))


def test_bipartite_dimension_check():
    with pytest.raises(DimensionError):
        BipartiteState(2, 3, DensityMatrix(np.eye(4) / 4))


def test_pure_vector_requires_unit_norm():
    with pytest.raises(ContractViolation):
        PureStateVector([1, 1])
    assert PureStateVector.normalized([1, 1]).dim == 2


# -- pure_density -----------------------------------------------------------


def test_pure_density_basis_state():
    np.testing.assert_allclose(pure_density(PureStateVector([1, 0])).matrix, np.diag([1, 0]))


def test_pure_density_x_plus_all_half():
    np.testing.assert_allclose(pure_density(bloch_state("x+")).matrix, np.full((2, 2), 0.5), atol=1e-15)


def test_pure_density_idempotent(rng):
    for dim in (2, 3, 5):
        m = pure_density(sampling.random_pure(dim, rng)).matrix
        np.testing.assert_allclose(m @ m, m, atol=1e-12)


def test_pure_density_rejects_unnormalized():
    with pytest.raises(ContractViolation):
        pure_density(np.array([1.0, 1.0]))


def test_bloch_state_names():
    for name, (x, y, z) in {"x+": (1, 0, 0), "x-": (-1, 0, 0), "y+": (0, 1, 0),
                            "y-": (0, -1, 0), "z+": (0, 0, 1), "z-": (0, 0, -1)}.items():
        m = pure_density(bloch_state(name)).matrix
        expected = 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])
        np.testing.assert_allclose(m, expected, atol=1e-15)
    with pytest.raises(DomainError):
        bloch_state("w+")


# -- constructors -----------------------------------------------------------


def test_product_state_diagonal():
    s = product_state(DensityMatrix(np.eye(2) / 2), pure_density(bloch_state("z+")))
    np.testing.assert_allclose(s.matrix, np.diag([0.5, 0, 0.5, 0]))


def test_product_state_factorizes(rng):
    s, e = sampling.random_density(2, rng), sampling.random_density(2, rng)
    joint = product_state(s, e)
    np.testing.assert_allclose(reduce_system(joint).matrix, s.matrix, atol=1e-12)
    np.testing.assert_allclose(reduce_environment(joint).matrix, e.matrix, atol=1e-12)
    assert correlation_norm(joint) < 1e-12


def test_bell_state():
    b = bell_phi_plus()
    np.testing.assert_allclose(reduce_environment(b).matrix, np.eye(2) / 2, atol=1e-12)
    np.testing.assert_allclose(reduce_system(b).matrix, np.eye(2) / 2, atol=1e-12)
    assert b.matrix[0, 3] == pytest.approx(0.5)
    assert purity(b.joint) == pytest.approx(1, abs=1e-12)


def test_werner_endpoints():
    np.testing.assert_allclose(werner_family(0).matrix, np.eye(4) / 4)
    np.testing.assert_allclose(werner_family(1).matrix, bell_phi_plus().matrix)


def test_werner_half_min_eigenvalue():
    # p + (1-p)/4 once, (1-p)/4 three times
    lam = np.linalg.eigvalsh(werner_family(0.5).matrix)
    assert lam[0] == pytest.approx(1 / 8, abs=1e-12)


@pytest.mark.parametrize("p", [-0.1, 1.5])
def test_werner_out_of_range(p):
    with pytest.raises(DomainError):
        werner_family(p)


def test_every_constructor_is_physical(rng):
    states = [bell_phi_plus(), werner_family(0.3), sampling.random_bipartite(2, 3, rng),
              product_state(sampling.random_density(3, rng), sampling.random_density(2, rng))]
    for s in states:
        assert_physical(s.joint)
        assert_physical(reduce_system(s))
        assert_physical(reduce_environment(s))


def test_reductions_share_partial_trace_vectors(rng):
    s = sampling.random_bipartite(2, 2, rng)
    np.testing.assert_allclose(reduce_system(s).matrix, ptrace_loops(s.matrix, 2, 2, "system"), atol=1e-13)
    np.testing.assert_allclose(reduce_environment(s).matrix, ptrace_loops(s.matrix, 2, 2, "environment"), atol=1e-13)


# -- trace distance ---------------------------------------------------------


def test_trace_distance_identity(rng):
    rho = sampling.random_density(3, rng)
    assert trace_distance(rho, rho) == pytest.approx(0, abs=1e-15)


def test_trace_distance_orthogonal():
    d = trace_distance(pure_density(bloch_state("z+")), pure_density(bloch_state("z-")))
    assert d == pytest.approx(1, abs=1e-12)


def test_trace_distance_z_vs_x():
    a, b = pure_density(bloch_state("z+")), pure_density(bloch_state("x+"))
    # oracle: difference matrix has eigenvalues +-1/sqrt(2)
    lam = hermitian_eigen(a.matrix - b.matrix).eigenvalues
    np.testing.assert_allclose(lam, [-1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-12)
    assert trace_distance(a, b) == pytest.approx(0.70710678, abs=1e-8)
    assert abs(trace_distance(a, b) - 1 / np.sqrt(2)) < 1e-10


def test_trace_distance_dimension_mismatch():
    with pytest.raises(DimensionError):
        trace_distance(DensityMatrix(np.eye(2) / 2), DensityMatrix(np.eye(3) / 3))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_trace_distance_metric_properties(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (sampling.random_density(3, rng) for _ in range(3))
    dab, dbc, dac = trace_distance(a, b), trace_distance(b, c), trace_distance(a, c)
    assert 0 <= dab <= 1 + 1e-12
    assert dab == pytest.approx(trace_distance(b, a), abs=1e-14)
    assert dac <= dab + dbc + 1e-9


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_trace_distance_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    a, b = sampling.random_density(4, rng), sampling.random_density(4, rng)
    u = sampling.random_unitary(4, rng)
    ua = DensityMatrix(u @ a.matrix @ u.conj().T)
    ub = DensityMatrix(u @ b.matrix @ u.conj().T)
    assert abs(trace_distance(ua, ub) - trace_distance(a, b)) < 1e-10


# -- correlation norm -------------------------------------------------------


def test_correlation_norm_bell():
    # oracle: |Phi+><Phi+| - I/4 has eigenvalues 3/4, -1/4 (x3)
    direct = np.linalg.norm(bell_plus_matrix() - np.eye(4) / 4)
    assert direct == pytest.approx(np.sqrt(3) / 2, abs=1e-12)
    assert correlation_norm(bell_phi_plus()) == pytest.approx(np.sqrt(3) / 2, abs=1e-10)


def test_correlation_norm_werner_monotone():
    values = [correlation_norm(werner_family(p)) for p in (0, 0.25, 0.5, 0.75, 1)]
    assert values[0] < 1e-15
    assert all(a < b for a, b in zip(values, values[1:]))


def test_zero_correlation_means_product(rng):
    for _ in range(20):
        s = sampling.random_product(2, 2, rng)
        assert correlation_norm(s) < 1e-12
        prod = DensityMatrix(tensor(reduce_system(s).matrix, reduce_environment(s).matrix))
        assert trace_distance(s.joint, prod) < 1e-9
