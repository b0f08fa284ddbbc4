import numpy as np
import numpy.testing as npt
import pytest

from covmin import ComplexSpectrum, InvalidInput, SingularMatrix
from covmin.errors import RankDeficient
from covmin.linalg import gen_eig, principal_angles, ridge_inverse, sym_eig, thin_svd


def test_sym_eig_identity_and_diag():
    pairs = sym_eig(np.eye(3))
    npt.assert_allclose(pairs.values, np.ones(3))

    pairs = sym_eig(np.diag([3.0, 1.0, 2.0]))
    npt.assert_allclose(pairs.values, [3.0, 2.0, 1.0])
    # vectors are the matching coordinate axes
    npt.assert_allclose(np.abs(pairs.vectors), np.eye(3)[:, [0, 2, 1]], atol=1e-14)


def test_sym_eig_reconstruction():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((5, 5))
    S = A + A.T
    pairs = sym_eig(S)
    R = pairs.vectors @ np.diag(pairs.values) @ pairs.vectors.T
    npt.assert_allclose(R, S, atol=1e-10)
    assert np.all(np.diff(pairs.values) <= 1e-12)


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(InvalidInput):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(InvalidInput):
        sym_eig(np.ones((2, 3)))


def test_gen_eig_simple_pencils():
    pairs = gen_eig(2.0 * np.eye(3), np.eye(3), 1)
    assert pairs.values[0] == pytest.approx(2.0, abs=1e-12)

    pairs = gen_eig(np.diag([5.0, 1.0]), np.eye(2), 1)
    assert pairs.values[0] == pytest.approx(5.0, abs=1e-12)
    npt.assert_allclose(np.abs(pairs.vectors[:, 0]), [1.0, 0.0], atol=1e-12)


def test_gen_eig_residuals_scaled():
    rng = np.random.default_rng(1)
    A0 = rng.standard_normal((8, 8))
    B0 = rng.standard_normal((8, 8))
    A = A0 @ A0.T
    B = B0 @ B0.T + 8 * np.eye(8)
    pairs = gen_eig(A, B, 4)
    for k in range(4):
        v = pairs.vectors[:, k]
        lam = pairs.values[k]
        r = np.linalg.norm(A @ v - lam * B @ v)
        bound = 1e-8 * (np.linalg.norm(A, "fro") + abs(lam) * np.linalg.norm(B, "fro"))
        assert r <= bound


def test_gen_eig_left_multiplication_invariance():
    # multiplying both operators on the left by an invertible P leaves the
    # spectrum alone (the default ridge is small enough not to disturb it)
    rng = np.random.default_rng(2)
    A0 = rng.standard_normal((6, 6))
    A = A0 @ A0.T
    B0 = rng.standard_normal((6, 6))
    B = B0 @ B0.T + 6 * np.eye(6)
    P = rng.standard_normal((6, 6)) + 6 * np.eye(6)
    w1 = gen_eig(A, B, 3).values
    w2 = gen_eig(P @ A, P @ B, 3).values
    npt.assert_allclose(w1, w2, rtol=1e-8)


def test_gen_eig_explicit_ridge():
    pairs = gen_eig(np.eye(2), np.zeros((2, 2)), 2, ridge=0.5)
    npt.assert_allclose(pairs.values, [2.0, 2.0], atol=1e-12)


def test_gen_eig_errors():
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    with pytest.raises(ComplexSpectrum):
        gen_eig(rot, np.eye(2), 2)
    with pytest.raises(InvalidInput):
        gen_eig(np.eye(2), np.eye(3), 1)
    with pytest.raises(InvalidInput):
        gen_eig(np.eye(2), np.eye(2), 0)
    nan = np.full((2, 2), np.nan)
    with pytest.raises(SingularMatrix):
        gen_eig(nan, np.eye(2), 1)


def test_thin_svd():
    C = np.vstack([np.eye(3), np.zeros((2, 3))])
    U, s, V = thin_svd(C)
    npt.assert_allclose(s, np.ones(3))
    assert U.shape == (5, 3) and V.shape == (3, 3)

    u = np.arange(1.0, 7.0)[:, None]
    v = np.array([[1.0, -2.0]])
    s = thin_svd(u @ v)[1]
    assert s[0] > 1e-8 and np.all(s[1:] < 1e-10)

    rng = np.random.default_rng(3)
    C = rng.standard_normal((6, 3))
    U, s, V = thin_svd(C)
    npt.assert_allclose(U @ np.diag(s) @ V.T, C, atol=1e-10)
    assert np.all(np.diff(s) <= 0)

    with pytest.raises(InvalidInput):
        thin_svd(rng.standard_normal((3, 6)))


def test_ridge_inverse():
    npt.assert_allclose(ridge_inverse(np.eye(3), 0.0), np.eye(3), atol=1e-14)
    npt.assert_allclose(ridge_inverse(np.diag([2.0, 4.0]), 0.0),
                        np.diag([0.5, 0.25]), atol=1e-14)
    rng = np.random.default_rng(4)
    A = rng.standard_normal((4, 4))
    W = A @ A.T + np.eye(4)
    inv = ridge_inverse(W, 1e-10)
    assert np.linalg.norm(W @ inv - np.eye(4), "fro") <= 1e-6


def test_principal_angles():
    e1 = np.array([[1.0], [0.0]])
    e2 = np.array([[0.0], [1.0]])
    diag = np.array([[1.0], [1.0]])
    I2 = np.eye(2)
    npt.assert_allclose(principal_angles(e1, e1, I2), [0.0], atol=1e-12)
    npt.assert_allclose(principal_angles(e1, e2, I2), [np.pi / 2], atol=1e-12)
    npt.assert_allclose(principal_angles(diag, e1, I2), [np.pi / 4], atol=1e-12)

    with pytest.raises(RankDeficient):
        principal_angles(np.zeros((2, 1)), e1, I2)
    with pytest.raises(InvalidInput):
        principal_angles(e1, np.ones((3, 1)), I2)
