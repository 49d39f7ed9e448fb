import numpy as np
import pytest
from hypothesis import given, settings, seed
from hypothesis import strategies as st

from numerics_core import (
    Check,
    NotHermitianError,
    NotPSDError,
    Tolerance,
    as_matrix,
    commutator,
    companion_roots,
    hermitian_eig,
    numerical_radius,
    operator_norm,
    psd_sqrt,
    random_unitary,
)


def test_tolerance_bound():
    tol = Tolerance(1e-10, 1e-8)
    assert tol.bound(0) == 1e-10
    assert tol.bound(100) == pytest.approx(1e-10 + 1e-6)
    with pytest.raises(ValueError):
        Tolerance(-1.0, 0.0)


def test_check_constructors():
    assert Check.at_most("x", 1.0, 2.0) == Check("x", 1.0, True)
    assert not Check.positive("y", 0.0).passed
    assert Check.non_negative("z", -1e-12, 1e-9).passed


def test_as_matrix_validates_and_freezes():
    m = as_matrix([[1, 2], [3, 4]])
    assert m.dtype == complex
    assert not m.flags.writeable
    with pytest.raises(ValueError):
        as_matrix([1, 2, 3])
    with pytest.raises(ValueError):
        as_matrix(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        as_matrix([[1, np.nan]])


def test_operator_norm_diagonal():
    assert operator_norm(np.diag([3, -4j])) == pytest.approx(4.0)
    assert operator_norm(np.zeros((3, 3))) == 0.0


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError) as exc:
        hermitian_eig([[0, 1], [0, 0]])
    assert exc.value.asymmetry == pytest.approx(1.0)


def test_hermitian_eig_reconstructs():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    h = a + a.conj().T
    values, vectors = hermitian_eig(h)
    assert np.all(np.diff(values) >= 0)
    assert np.allclose(vectors @ np.diag(values) @ vectors.conj().T, h, atol=1e-12)


def test_psd_sqrt_squares_back():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    psd = a @ a.conj().T
    root = psd_sqrt(psd)
    assert np.allclose(root @ root, psd, atol=1e-8 * operator_norm(psd))
    assert np.allclose(root, root.conj().T)


def test_psd_sqrt_clamps_and_rejects():
    root = psd_sqrt(np.diag([4.0, -1e-12]))
    assert np.allclose(root, np.diag([2.0, 0.0]))
    with pytest.raises(NotPSDError) as exc:
        psd_sqrt(np.diag([1.0, -1.0]))
    assert exc.value.eigenvalue == pytest.approx(-1.0)


def test_companion_roots_triple_root():
    roots = companion_roots([-3, 3, -1])
    assert np.allclose(roots, 1.0, atol=1e-4)


def test_companion_roots_conjugate_pair():
    roots = sorted(companion_roots([0, 1]), key=lambda z: z.imag)
    assert np.allclose(roots, [-1j, 1j])
    with pytest.raises(ValueError):
        companion_roots([])


def test_numerical_radius_examples():
    assert numerical_radius(np.diag([1, 2j])) == pytest.approx(2.0)
    assert numerical_radius([[0, 1], [0, 0]]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        numerical_radius(np.eye(2), angles=8)


def test_commutator_of_diagonals_vanishes():
    a = np.diag([1, 2, 3])
    b = np.diag([4j, 5, 6])
    assert not np.any(commutator(a, b))


@seed(11)
@settings(deadline=None, max_examples=50)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=6))
def test_numerical_radius_bounds(rng_seed, dim):
    rng = np.random.default_rng(rng_seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    w = numerical_radius(a)
    spectral = np.max(np.abs(np.linalg.eigvals(a)))
    assert w <= operator_norm(a) + 1e-12
    assert w >= spectral * np.cos(np.pi / 720) - 1e-12


@seed(12)
@settings(deadline=None, max_examples=30)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=8))
def test_random_unitary_is_unitary(rng_seed, dim):
    u = random_unitary(np.random.default_rng(rng_seed), dim)
    assert np.allclose(u.conj().T @ u, np.eye(dim), atol=1e-12)


def gaussian(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


@seed(13)
@settings(deadline=None, max_examples=40)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=32))
def test_psd_sqrt_on_random_psd_matrices(rng_seed, dim):
    rng = np.random.default_rng(rng_seed)
    rank = int(rng.integers(1, dim + 1))
    a = gaussian(rng, dim, rank)
    psd = a @ a.conj().T
    root = psd_sqrt(psd)
    scale = operator_norm(psd)
    assert np.allclose(root, root.conj().T)
    assert np.allclose(root @ root, psd, atol=1e-8 * scale)
    assert np.linalg.eigvalsh(root)[0] >= -1e-7 * np.sqrt(scale)


@seed(14)
@settings(deadline=None, max_examples=60)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=8))
def test_companion_roots_rebuild_the_coefficients(rng_seed, degree):
    rng = np.random.default_rng(rng_seed)
    radius = 1.5 * np.sqrt(rng.uniform(0, 1, degree))
    roots = radius * np.exp(2j * np.pi * rng.uniform(0, 1, degree))
    monic = np.poly(roots)
    found = companion_roots(monic[1:])
    assert found.shape == (degree,)
    rebuilt = np.poly(found)
    assert np.max(np.abs(rebuilt - monic)) <= 1e-7 * max(1.0, np.max(np.abs(monic)))


@seed(15)
@settings(deadline=None, max_examples=50)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=12))
def test_operator_norm_is_submultiplicative(rng_seed, dim):
    rng = np.random.default_rng(rng_seed)
    a, b = gaussian(rng, dim, dim), gaussian(rng, dim, dim)
    na, nb = operator_norm(a), operator_norm(b)
    assert operator_norm(a @ b) <= na * nb * (1 + 1e-12)
    assert operator_norm(a + b) <= (na + nb) * (1 + 1e-12)
    largest = np.sqrt(np.linalg.eigvalsh(a.conj().T @ a)[-1])
    assert na == pytest.approx(largest, rel=1e-10)


@seed(16)
@settings(deadline=None, max_examples=50)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=8))
def test_numerical_radius_between_half_norm_and_norm(rng_seed, dim):
    rng = np.random.default_rng(rng_seed)
    a = gaussian(rng, dim, dim)
    w = numerical_radius(a)
    norm = operator_norm(a)
    assert w <= norm * (1 + 1e-12)
    assert w >= 0.5 * norm * np.cos(np.pi / 720) - 1e-12
    herm = a + a.conj().T
    assert numerical_radius(herm) == pytest.approx(operator_norm(herm), rel=1e-12)
