from __future__ import annotations

import numpy as np
import pytest

from mtlflow.linalg import FactorizationError, matmul, matvec, solve_spd


def residual_norm(a: np.ndarray, x: np.ndarray, b: np.ndarray) -> float:
    """Relative infinity-norm residual, checked through matvec itself."""
    return float(np.abs(matvec(a, x) - b).max() / max(1.0, np.abs(b).max()))


def test_matmul_identity() -> None:
    rng = np.random.default_rng(7)
    m = rng.normal(size=(3, 3))
    assert np.array_equal(matmul(np.eye(3), m), m)


def test_matmul_zero_annihilates() -> None:
    rng = np.random.default_rng(8)
    m = rng.normal(size=(4, 2))
    out = matmul(np.zeros((3, 4)), m)
    assert out.shape == (3, 2)
    assert np.all(out == 0.0)


def test_matmul_hand_product() -> None:
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[5.0], [6.0]])
    # 1*5 + 2*6 = 17, 3*5 + 4*6 = 39
    assert np.array_equal(matmul(a, b), np.array([[17.0], [39.0]]))


def test_matmul_dimension_mismatch() -> None:
    with pytest.raises(ValueError):
        matmul(np.zeros((2, 3)), np.zeros((2, 3)))


def test_matmul_associative_on_seeded_triples() -> None:
    rng = np.random.default_rng(42)
    for _ in range(20):
        a = rng.normal(size=(5, 4))
        b = rng.normal(size=(4, 6))
        c = rng.normal(size=(6, 3))
        left = matmul(matmul(a, b), c)
        right = matmul(a, matmul(b, c))
        scale = max(1.0, np.abs(left).max())
        assert np.abs(left - right).max() / scale < 1e-9


def test_matvec_identity() -> None:
    v = np.array([1.5, -2.0, 3.25])
    assert np.array_equal(matvec(np.eye(3), v), v)


def test_matvec_zero_vector() -> None:
    rng = np.random.default_rng(9)
    a = rng.normal(size=(4, 5))
    assert np.all(matvec(a, np.zeros(5)) == 0.0)


def test_matvec_hand_product() -> None:
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(matvec(a, np.array([5.0, 6.0])), np.array([17.0, 39.0]))


def test_matvec_dimension_mismatch() -> None:
    with pytest.raises(ValueError):
        matvec(np.zeros((2, 3)), np.zeros(2))


def test_solve_identity() -> None:
    b = np.array([3.0, -1.0, 0.5])
    assert np.allclose(solve_spd(np.eye(3), b), b, atol=0.0)


def test_solve_diagonal() -> None:
    a = np.diag([2.0, 4.0])
    x = solve_spd(a, np.array([2.0, 4.0]))
    assert np.allclose(x, [1.0, 1.0], atol=0.0)


@pytest.mark.parametrize("dim", [2, 5, 16, 64, 256])
def test_solve_random_spd_residual(dim: int) -> None:
    rng = np.random.default_rng(dim)
    m = rng.normal(size=(dim, dim))
    a = m.T @ m + np.eye(dim)
    b = rng.normal(size=dim)
    x = solve_spd(a, b)
    assert residual_norm(a, x, b) <= 1e-8


def test_solve_rejects_non_square() -> None:
    with pytest.raises(ValueError):
        solve_spd(np.zeros((2, 3)), np.zeros(2))


def test_solve_rejects_asymmetric() -> None:
    a = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError, match="symmetric"):
        solve_spd(a, np.ones(2))


def test_solve_rejects_mismatched_rhs() -> None:
    with pytest.raises(ValueError):
        solve_spd(np.eye(3), np.ones(2))


def test_solve_non_positive_definite_raises_factorization_error() -> None:
    a = np.diag([1.0, -1.0])
    with pytest.raises(FactorizationError):
        solve_spd(a, np.ones(2))


@pytest.mark.parametrize("mu", [1e-12, 1e-6, 1.0, 1e6])
@pytest.mark.parametrize("shape", [(20, 8), (8, 8), (4, 8)])
def test_damped_gram_always_factorizable(mu: float, shape: tuple[int, int]) -> None:
    # J^T J + mu I is positive definite for any finite J and mu > 0,
    # including rank-deficient J (fewer rows than columns).
    rng = np.random.default_rng(hash(shape) % 2**32)
    j = rng.normal(size=shape)
    gram = j.T @ j + mu * np.eye(shape[1])
    b = rng.normal(size=shape[1])
    x = solve_spd(gram, b)
    assert np.isfinite(x).all()


def test_solve_rejects_non_finite_entries() -> None:
    a = np.eye(2)
    a[0, 0] = np.inf
    with pytest.raises(ValueError, match="finite"):
        solve_spd(a, np.ones(2))
