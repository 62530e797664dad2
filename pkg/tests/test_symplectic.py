import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussk.errors import BranchError, DimensionError, InvariantError, NotSymplecticError
from gaussk.symplectic import (
    block_rotation,
    check_symplectic,
    direct_sum,
    group_commutator,
    hs_norm,
    is_symplectic,
    log_orthogonal_symplectic,
    log_positive_symplectic,
    omega,
    op_norm,
    orth_block_diagonalize,
    orthosymplectic_to_unitary,
    polar_decompose,
    principal_split,
    random_orthogonal_near_identity,
    random_orthogonal_symplectic,
    random_positive_near_identity,
    random_positive_symplectic,
    random_symplectic,
    random_symplectic_near_identity,
    random_unitary,
    rotation,
    squeezer,
    symplectic_inverse,
    unitary_to_orthosymplectic,
    williamson_positive,
)

seeds = st.integers(0, 2**32 - 1)
modes = st.integers(1, 3)


def test_omega_small_cases():
    assert np.array_equal(omega(1), [[0, 1], [-1, 0]])
    assert np.array_equal(omega(2), [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
    assert np.allclose(omega(3) @ omega(3), -np.eye(6))
    with pytest.raises(DimensionError):
        omega(0)


def test_is_symplectic_examples():
    assert is_symplectic(np.eye(2), 1e-12)
    assert is_symplectic(np.diag([2, 0.5]), 1e-12)
    assert not is_symplectic(np.diag([2.0, 2.0]), 1e-6)
    with pytest.raises(NotSymplecticError):
        check_symplectic(np.diag([2.0, 2.0]))
    with pytest.raises(DimensionError):
        check_symplectic(np.eye(3))


def test_inverse_examples():
    assert np.allclose(symplectic_inverse(np.eye(4)), np.eye(4))
    assert np.allclose(symplectic_inverse(np.diag([2, 0.5])), np.diag([0.5, 2]))


@settings(max_examples=50, deadline=None)
@given(seeds, modes)
def test_inverse_residual(seed, m):
    S = random_symplectic(m, np.random.default_rng(seed))
    assert op_norm(S @ symplectic_inverse(S) - np.eye(2 * m)) <= 1e-10 * max(1, op_norm(S)) ** 2


def test_commutator_trivial_cases():
    rng = np.random.default_rng(0)
    A = random_symplectic(2, rng)
    I = np.eye(4)
    assert np.allclose(group_commutator(A, I), I)
    assert np.allclose(group_commutator(A, A), I)
    assert np.allclose(group_commutator(squeezer(0.3), squeezer(-0.7)), np.eye(2))


def test_norms():
    assert op_norm(np.eye(2)) == pytest.approx(1)
    assert hs_norm(np.eye(2)) == pytest.approx(math.sqrt(2))
    assert op_norm(np.diag([2, 0.5])) == pytest.approx(2)
    rng = np.random.default_rng(3)
    for _ in range(100):
        M = rng.normal(size=(4, 4))
        assert hs_norm(M) >= op_norm(M) - 1e-12


def test_polar_examples():
    O, P = polar_decompose(np.eye(2))
    assert np.allclose(O, np.eye(2)) and np.allclose(P, np.eye(2))
    R = block_rotation([0.4, -1.3])
    O, P = polar_decompose(R)
    assert np.allclose(P, np.eye(4), atol=1e-12)
    assert np.allclose(O, R)


@settings(max_examples=50, deadline=None)
@given(seeds, modes, st.floats(1e-4, 0.3))
def test_polar_factors_near_identity(seed, m, eps):
    S = random_symplectic_near_identity(m, np.random.default_rng(seed), eps)
    O, P = polar_decompose(S)
    I = np.eye(2 * m)
    dist = op_norm(S - I)
    assert op_norm(O - I) <= 3 * dist + 1e-12
    assert op_norm(P - I) <= 3 * dist + 1e-12
    assert np.allclose(O @ P, S, atol=1e-12)
    assert np.allclose(O @ O.T, I, atol=1e-12)
    assert is_symplectic(O, 1e-10) and is_symplectic(P, 1e-10)
    assert np.all(np.linalg.eigvalsh(P) > 0)


@settings(max_examples=50, deadline=None)
@given(seeds, modes)
def test_polar_reconstructs(seed, m):
    S = random_symplectic(m, np.random.default_rng(seed))
    O, P = polar_decompose(S)
    assert op_norm(O @ P - S) <= 1e-10 * op_norm(S)


def test_orth_block_examples():
    K, th = orth_block_diagonalize(np.eye(4))
    assert np.allclose(th, 0)
    K, th = orth_block_diagonalize(rotation(0.7))
    assert abs(abs(th[0]) - 0.7) < 1e-12
    assert np.allclose(K @ block_rotation(th) @ K.T, rotation(0.7))
    with pytest.raises(InvariantError):
        orth_block_diagonalize(squeezer(0.1))


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 4))
def test_orth_block_reconstruction(seed, m):
    O = random_orthogonal_symplectic(m, np.random.default_rng(seed))
    form = orth_block_diagonalize(O)
    assert np.max(np.abs(form.reconstruct() - O)) <= 1e-9
    K = form.conjugator
    assert np.allclose(K @ K.T, np.eye(2 * m), atol=1e-10) and is_symplectic(K, 1e-10)
    assert np.all(np.abs(form.angles) <= math.pi + 1e-12)


def test_williamson_examples():
    K, lam = williamson_positive(np.eye(4))
    assert np.allclose(lam, 1)
    K, lam = williamson_positive(np.diag([3, 1 / 3]))
    assert np.allclose(lam, [3])
    K, lam = williamson_positive(np.diag([1 / 3, 3]))
    assert np.allclose(lam, [3])
    with pytest.raises(InvariantError):
        williamson_positive(rotation(0.3))


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 4))
def test_williamson_reconstruction(seed, m):
    P = random_positive_symplectic(m, np.random.default_rng(seed))
    form = williamson_positive(P)
    assert np.max(np.abs(form.reconstruct() - P)) <= 1e-9 * op_norm(P)
    assert np.all(form.lambdas >= 1 - 1e-12)
    assert np.all(np.diff(form.lambdas) <= 1e-12)
    assert np.linalg.det(P) == pytest.approx(1, abs=1e-8)


def test_williamson_degenerate_identity_block():
    # one stretched mode, one identity mode
    rng = np.random.default_rng(5)
    K = random_orthogonal_symplectic(2, rng)
    P = K @ np.diag([2, 0.5, 1, 1]) @ K.T
    form = williamson_positive(0.5 * (P + P.T))
    assert np.allclose(form.lambdas, [2, 1])
    assert np.max(np.abs(form.reconstruct() - P)) < 1e-9


def test_logs():
    assert np.allclose(log_positive_symplectic(np.eye(2)), 0)
    assert np.allclose(log_positive_symplectic(np.diag([math.e, 1 / math.e])), np.diag([1, -1]))
    assert np.allclose(log_orthogonal_symplectic(np.eye(4)), 0)
    L = log_orthogonal_symplectic(rotation(0.5))
    assert np.allclose(L, -L.T)
    import scipy.linalg

    assert np.allclose(scipy.linalg.expm(L), rotation(0.5))
    with pytest.raises(BranchError):
        log_orthogonal_symplectic(-np.eye(2))


def test_principal_split_handles_pi():
    H, R = principal_split(-np.eye(2))
    assert np.allclose(H @ R, -np.eye(2))
    log_orthogonal_symplectic(H)


@settings(max_examples=50, deadline=None)
@given(seeds, modes, st.floats(1e-3, 0.5))
def test_log_positive_hs_bound(seed, m, eps):
    P = random_positive_near_identity(m, np.random.default_rng(seed), eps)
    I = np.eye(2 * m)
    assert hs_norm(log_positive_symplectic(P)) <= op_norm(P) * hs_norm(P - I) + 1e-12


def test_unitary_orthosymplectic_roundtrip():
    rng = np.random.default_rng(1)
    U = random_unitary(3, rng)
    O = unitary_to_orthosymplectic(U)
    assert np.allclose(O @ O.T, np.eye(6)) and is_symplectic(O)
    assert np.allclose(orthosymplectic_to_unitary(O), U)


@settings(max_examples=30, deadline=None)
@given(seeds, modes, st.floats(1e-3, 0.5), st.booleans())
def test_near_identity_samplers(seed, m, eps, exact):
    rng = np.random.default_rng(seed)
    I = np.eye(2 * m)
    for X in (
        random_orthogonal_near_identity(m, rng, eps, exact),
        random_positive_near_identity(m, rng, eps, exact),
        random_symplectic_near_identity(m, rng, eps, exact),
    ):
        assert is_symplectic(X, 1e-10)
        d = op_norm(X - I)
        assert d <= eps * (1 + 1e-9)
        if exact:
            assert d == pytest.approx(eps, rel=1e-8)


def test_direct_sum_and_block_rotation():
    assert np.allclose(block_rotation([0.1, 0.2]), direct_sum([rotation(0.1), rotation(0.2)]))
