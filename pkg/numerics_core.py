"""Dense complex linear algebra kernels.

Every operator in the package is a two dimensional ``numpy`` array of dtype
``complex128``.  :func:`as_matrix` is the single gatekeeper that turns user
input into such an array: it copies, rejects empty or non-finite data and
marks the result read-only so values stay immutable after construction.

The comparisons made throughout the package are expressed as :class:`Check`
records carrying a *margin*.  A positive margin means the condition holds
with room to spare, a negative one measures by how much it failed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple
import logging

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)


class NotHermitianError(ValueError):
    """Raised when a matrix expected to be Hermitian is not, within tolerance."""

    def __init__(self, asymmetry: float, bound: float):
        super().__init__(
            f"matrix is not Hermitian: ||A - A*|| = {asymmetry:.3e} exceeds {bound:.3e}"
        )
        self.asymmetry = asymmetry
        self.bound = bound


class NotPSDError(ValueError):
    """Raised when a Hermitian matrix has an eigenvalue below ``-abs_eps``."""

    def __init__(self, eigenvalue: float, abs_eps: float):
        super().__init__(
            f"matrix is not PSD: eigenvalue {eigenvalue:.3e} is below -{abs_eps:.1e}"
        )
        self.eigenvalue = eigenvalue


@dataclass(frozen=True)
class Tolerance:
    """Absolute and relative slack used by every numerical comparison."""

    abs_eps: float = 1e-10
    rel_eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.abs_eps < 0 or self.rel_eps < 0:
            raise ValueError("tolerances must be non-negative")

    def bound(self, scale: float) -> float:
        """Return ``abs_eps + rel_eps * scale``."""

        return self.abs_eps + self.rel_eps * scale

    def to_dict(self) -> Dict[str, float]:
        return {"abs_eps": self.abs_eps, "rel_eps": self.rel_eps}


DEFAULT_TOLERANCE = Tolerance()


@dataclass(frozen=True)
class Check:
    """A named condition together with its margin and verdict."""

    name: str
    margin: float
    passed: bool

    @classmethod
    def at_most(cls, name: str, value: float, bound: float) -> "Check":
        """``value <= bound``; the margin is ``bound - value``."""

        return cls(name, float(bound - value), bool(value <= bound))

    @classmethod
    def positive(cls, name: str, margin: float) -> "Check":
        """Strict inequality ``margin > 0``."""

        return cls(name, float(margin), bool(margin > 0))

    @classmethod
    def non_negative(cls, name: str, margin: float, slack: float = 0.0) -> "Check":
        """``margin >= -slack``."""

        return cls(name, float(margin), bool(margin >= -slack))

    def prefixed(self, prefix: str) -> "Check":
        return Check(prefix + self.name, self.margin, self.passed)

    def to_dict(self) -> Dict[str, object]:
        return {"name": self.name, "margin": self.margin, "passed": self.passed}


def as_matrix(value, name: str = "matrix") -> np.ndarray:
    """Return ``value`` as a read-only, finite, non-empty complex matrix."""

    arr = np.array(value, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    arr.setflags(write=False)
    return arr


def _require_square(mat: np.ndarray, name: str) -> None:
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be square, got shape {mat.shape}")


def adjoint(mat: np.ndarray) -> np.ndarray:
    return mat.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``AB - BA``."""

    return a @ b - b @ a


def operator_norm(mat) -> float:
    """Largest singular value of ``mat``."""

    mat = as_matrix(mat)
    return float(scipy.linalg.svdvals(mat)[0])


def hermitian_eig(mat, tol: Tolerance = DEFAULT_TOLERANCE) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a Hermitian matrix.

    Returns the eigenvalues in ascending order together with a unitary matrix
    whose columns are the matching eigenvectors.  The input is symmetrized
    after the asymmetry ``||A - A*||`` has been checked against
    ``tol.bound(||A||)``.
    """

    mat = as_matrix(mat)
    _require_square(mat, "Hermitian input")
    asymmetry = operator_norm(mat - adjoint(mat))
    bound = tol.bound(operator_norm(mat))
    if asymmetry > bound:
        raise NotHermitianError(asymmetry, bound)
    herm = (mat + adjoint(mat)) / 2
    values, vectors = scipy.linalg.eigh(herm)
    return values, vectors


def psd_sqrt(mat, tol: Tolerance = DEFAULT_TOLERANCE, floor: float = 0.0) -> np.ndarray:
    """Return the Hermitian positive square root of a PSD matrix.

    Eigenvalues in ``[-abs_eps, 0]`` are clamped to zero; anything lower
    raises :class:`NotPSDError`.  Eigenvalues not exceeding ``floor`` are also
    treated as zero, which lets callers discard round-off before the square
    root magnifies it.
    """

    values, vectors = hermitian_eig(mat, tol)
    if values[0] < -tol.abs_eps:
        raise NotPSDError(float(values[0]), tol.abs_eps)
    values = np.where(values > floor, values, 0.0)
    root = (vectors * np.sqrt(values)) @ adjoint(vectors)
    return (root + adjoint(root)) / 2


def companion_roots(coeffs: Sequence[complex] | np.ndarray) -> np.ndarray:
    """Roots of ``z**n + c[0] z**(n-1) + ... + c[n-1]`` with multiplicity.

    ``coeffs`` lists the ``n`` lower coefficients in descending powers.  The
    roots are the eigenvalues of the companion matrix.
    """

    lower = np.asarray(coeffs, dtype=complex).ravel()
    if lower.size == 0:
        raise ValueError("a degree 0 polynomial has no roots")
    if not np.all(np.isfinite(lower)):
        raise ValueError("polynomial coefficients must be finite")
    degree = lower.size
    companion = np.zeros((degree, degree), dtype=complex)
    companion[0, :] = -lower
    companion[1:, :-1] = np.eye(degree - 1)
    roots = scipy.linalg.eigvals(companion)

    monic = np.concatenate(([1.0 + 0j], lower))
    residual = float(np.max(np.abs(np.polyval(monic, roots))))
    bound = 1e-8 * (1.0 + float(np.max(np.abs(lower)))) ** degree
    if residual > bound:
        logger.warning(
            "companion root residual %.3e exceeds %.3e for degree %d", residual, bound, degree
        )
    return roots


def numerical_radius(mat, angles: int = 720) -> float:
    """Sampled numerical radius of a square matrix.

    Evaluates ``max_theta lambda_max((e^{i theta} A + e^{-i theta} A*) / 2)``
    on ``angles`` equally spaced angles.  Each sample is attained by some unit
    vector, so the result is a lower bound that converges from below as the
    grid is refined.
    """

    mat = as_matrix(mat)
    _require_square(mat, "numerical radius input")
    if angles < 16:
        raise ValueError("numerical_radius needs at least 16 angles")
    phases = np.exp(2j * np.pi * np.arange(angles) / angles)
    adj = adjoint(mat)
    best = -np.inf
    # chunk so the Hermitian stack stays small for larger matrices
    step = max(1, 2**20 // (mat.shape[0] ** 2))
    for start in range(0, angles, step):
        ph = phases[start : start + step, None, None]
        herm = (ph * mat + ph.conj() * adj) / 2
        top = np.linalg.eigvalsh(herm)[:, -1]
        best = max(best, float(np.max(top)))
    return max(best, 0.0)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""

    gauss = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(gauss)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def complex_pair(value: complex) -> list:
    """JSON friendly ``[re, im]`` pair."""

    value = complex(value)
    return [value.real, value.imag]
