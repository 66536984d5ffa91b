import numpy as np
import pytest

from openprep import sampling
from openprep.channels import (
    PAULI,
    ChoiMatrix,
    KrausChannel,
    SuperOperator,
    apply_kraus,
    choi_from_superop,
    compose_kraus,
    cp_diagnosis,
    depolarizing_channel,
    identity_channel,
    superop_from_action,
    superop_from_kraus,
    unitary_channel,
    unvec,
    vec,
)
from openprep.errors import ContractViolation, DimensionError
from oracles import bell_plus_matrix, choi_loops

X, Y, Z = PAULI["X"], PAULI["Y"], PAULI["Z"]


def test_vec_is_column_stacking():
    a = np.array([[1, 2], [3, 4]])
    np.testing.assert_array_equal(vec(a), [1, 3, 2, 4])
    np.testing.assert_array_equal(unvec(vec(a)), a)


def test_vec_sandwich_identity(rng):
    a, b, r = (sampling.ginibre(3, 3, rng) for _ in range(3))
    np.testing.assert_allclose(vec(a @ r @ b.conj().T), np.kron(b.conj(), a) @ vec(r), atol=1e-12)


# -- Kraus ------------------------------------------------------------------


def test_kraus_rejects_trace_increasing():
    with pytest.raises(ContractViolation):
        KrausChannel((np.eye(2), np.eye(2)))


def test_kraus_rejects_mixed_dims():
    with pytest.raises(DimensionError):
        KrausChannel((np.eye(2), np.eye(3) * 0.1))


def test_apply_identity(rng):
    rho = sampling.random_density(3, rng).matrix
    np.testing.assert_allclose(apply_kraus(identity_channel(3), rho), rho)


def test_apply_projector_halves_mixed():
    out = apply_kraus(KrausChannel((np.diag([1, 0]),)), np.eye(2) / 2)
    np.testing.assert_allclose(out, np.diag([0.5, 0]))
    assert np.trace(out) == pytest.approx(0.5)


def test_depolarizing_full():
    out = apply_kraus(depolarizing_channel(1.0), np.diag([1, 0]))
    # oracle: (1/4)(rho + X rho X + Y rho Y + Z rho Z) summed by hand
    rho = np.diag([1, 0]).astype(complex)
    direct = (rho + X @ rho @ X + Y @ rho @ Y + Z @ rho @ Z) / 4
    np.testing.assert_allclose(direct, np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(out, np.eye(2) / 2, atol=1e-12)


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply_kraus(identity_channel(2), np.eye(3))


def test_apply_never_increases_trace(rng):
    for _ in range(20):
        ops = [sampling.ginibre(2, 2, rng) for _ in range(3)]
        scale = np.sqrt(np.linalg.eigvalsh(sum(k.conj().T @ k for k in ops))[-1]) * 1.1
        ch = KrausChannel(tuple(k / scale for k in ops))
        rho = sampling.random_density(2, rng).matrix
        assert np.trace(apply_kraus(ch, rho)).real <= 1 + 1e-12


def test_compose_kraus(rng):
    a, b = sampling.random_kraus_channel(2, 2, rng), sampling.random_kraus_channel(2, 3, rng)
    rho = sampling.random_density(2, rng).matrix
    np.testing.assert_allclose(apply_kraus(compose_kraus(a, b), rho), b(a(rho)), atol=1e-12)


# -- superoperators ---------------------------------------------------------


def test_superop_identity():
    np.testing.assert_allclose(superop_from_action(lambda r: r, 2).matrix, np.eye(4))


def test_superop_x_conjugation_against_basis_oracle():
    s = superop_from_action(lambda r: X @ r @ X, 2)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2))
            e[i, j] = 1
            np.testing.assert_allclose(s(e), X @ e @ X, atol=1e-15)
    # a permutation: every row/column holds one unit-modulus entry
    assert np.all(np.sum(np.abs(s.matrix) > 0.5, axis=0) == 1)
    assert np.all(np.sum(np.abs(s.matrix) > 0.5, axis=1) == 1)


def test_superop_of_kraus_matches_vectorization_identity(rng):
    ch = sampling.random_kraus_channel(2, 3, rng)
    s = superop_from_action(ch, 2)
    expected = sum(np.kron(k.conj(), k) for k in ch.operators)
    np.testing.assert_allclose(s.matrix, expected, atol=1e-12)
    np.testing.assert_allclose(superop_from_kraus(ch).matrix, expected, atol=1e-12)


def test_superop_round_trip(rng):
    for _ in range(10):
        ch = sampling.random_kraus_channel(3, 2, rng)
        s = superop_from_action(ch, 3)
        h = sampling.random_hermitian(3, rng)
        np.testing.assert_allclose(s(h), apply_kraus(ch, h), atol=1e-10)


def test_superop_hermiticity_preservation_enforced():
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1j  # maps E_00 to i E_00
    with pytest.raises(ContractViolation):
        SuperOperator(2, m)


def test_superop_applied_to_hermitian_is_hermitian(rng):
    s = superop_from_kraus(sampling.random_kraus_channel(2, 2, rng))
    out = s(sampling.random_hermitian(2, rng))
    assert np.max(np.abs(out - out.conj().T)) <= 1e-10


# -- Choi -------------------------------------------------------------------


def test_choi_identity_is_bell():
    c = choi_from_superop(superop_from_action(lambda r: r, 2))
    np.testing.assert_allclose(c.matrix, 2 * bell_plus_matrix(), atol=1e-15)


def test_choi_completely_depolarizing():
    c = choi_from_superop(superop_from_action(lambda r: np.trace(r) * np.eye(2) / 2, 2))
    np.testing.assert_allclose(c.matrix, np.eye(4) / 2, atol=1e-15)


def test_choi_matches_loop_oracle(rng):
    s = superop_from_kraus(sampling.random_kraus_channel(2, 2, rng))
    np.testing.assert_allclose(choi_from_superop(s).matrix, choi_loops(s.matrix, 2), atol=1e-13)


def test_choi_unitary_rank_one(rng):
    for d in (2, 3):
        u = sampling.random_unitary(d, rng)
        c = choi_from_superop(superop_from_kraus(unitary_channel(u)))
        lam = np.linalg.eigvalsh(c.matrix)
        assert lam[-1] == pytest.approx(d, abs=1e-10)
        assert np.max(np.abs(lam[:-1])) < 1e-10


def test_choi_cptp_over_d_is_density(rng):
    from openprep.states import DensityMatrix

    c = choi_from_superop(superop_from_kraus(sampling.random_kraus_channel(3, 2, rng)))
    DensityMatrix(c.matrix / 3)


def test_choi_rejects_non_hermitian():
    with pytest.raises(ContractViolation):
        ChoiMatrix(2, np.triu(np.ones((4, 4))))


# -- CP diagnosis -----------------------------------------------------------


def test_cp_identity():
    d = cp_diagnosis(choi_from_superop(superop_from_action(lambda r: r, 2)))
    assert d.min_eigenvalue == pytest.approx(0, abs=1e-10)
    assert d.is_cp
    assert d.tp_deviation == pytest.approx(0, abs=1e-10)


def test_cp_transpose_map():
    c = choi_from_superop(superop_from_action(lambda r: r.T, 2))
    swap = np.eye(4)[[0, 2, 1, 3]]
    np.testing.assert_allclose(c.matrix, swap)
    np.testing.assert_allclose(np.linalg.eigvalsh(swap), [-1, 1, 1, 1], atol=1e-15)
    d = cp_diagnosis(c)
    assert d.min_eigenvalue == pytest.approx(-1, abs=1e-10)
    assert not d.is_cp
    assert d.tp_deviation < 1e-12


def test_cp_threshold_boundary():
    c = ChoiMatrix(1, np.array([[-5e-10]]))
    assert cp_diagnosis(c).is_cp
    assert not cp_diagnosis(ChoiMatrix(1, np.array([[-2e-9]]))).is_cp
    assert not cp_diagnosis(ChoiMatrix(1, np.array([[-5e-10]])), cp_tol=1e-10).is_cp


def test_random_kraus_channels_are_cp():
    rng = np.random.default_rng(99)
    for _ in range(100):
        ch = sampling.random_kraus_channel(2, int(rng.integers(1, 5)), rng)
        d = cp_diagnosis(choi_from_superop(superop_from_kraus(ch)))
        assert d.is_cp


def test_tp_deviation_tracks_kraus_completeness(rng):
    tp = sampling.random_kraus_channel(2, 2, rng)
    assert cp_diagnosis(choi_from_superop(superop_from_kraus(tp))).tp_deviation < 1e-10
    assert tp.tp_deviation() < 1e-10
    lossy = KrausChannel(tuple(0.9 * k for k in tp.operators))
    assert lossy.tp_deviation() > 1e-10
    assert cp_diagnosis(choi_from_superop(superop_from_kraus(lossy))).tp_deviation > 1e-10
