"""Commuting matrix tuples ``(S_1, ..., S_{n-1}, P)``.

The module certifies tuples as unitary or isometric members of the class
attached to the symmetrized polydisc, checks the operator pencils ``Phi_i``
on a grid of the closed disc and samples the von Neumann inequality with
random polynomials.  Sampling can refute the contraction property but never
prove it, and every report produced here says so where it matters.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, combinations_with_replacement
from math import comb
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize

from config.settings import DEFAULT_SEED
from numerics_core import (
    DEFAULT_TOLERANCE,
    Check,
    NotHermitianError,
    Tolerance,
    adjoint,
    as_matrix,
    commutator,
    complex_pair,
    operator_norm,
)
from polynomials import (
    MonomialBasis,
    Polynomial,
    common_basis,
    elementary_symmetric,
    random_polynomials,
)
from scalar_geometry import (
    DEFAULT_BAND,
    GammaPoint,
    alpha_grid,
    in_distinguished_boundary,
    pencil_weight,
)

logger = logging.getLogger(__name__)


class NonCommutingError(ValueError):
    """The tuple does not commute within tolerance."""


class SingularPencilError(ValueError):
    def __init__(self, index: int, beta: complex):
        super().__init__(f"C(n, {index}) - beta S_{index} is singular at beta = {beta}")
        self.index = index
        self.beta = beta


class CertKind(str, Enum):
    GAMMA_UNITARY = "GammaUnitary"
    GAMMA_ISOMETRY = "GammaIsometry"
    GAMMA_CONTRACTION_CONSISTENT = "GammaContractionConsistent"
    VIOLATION = "Violation"


def _matrix_to_dict(mat: np.ndarray) -> Dict[str, list]:
    return {"re": mat.real.tolist(), "im": mat.imag.tolist()}


def _matrix_from_dict(data: Mapping, name: str) -> np.ndarray:
    try:
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{name}: expected an object with 're' and 'im' arrays") from exc
    if re.shape != im.shape:
        raise ValueError(f"{name}: 're' and 'im' shapes differ")
    return as_matrix(re + 1j * im, name)


@dataclass(frozen=True, eq=False)
class OperatorTuple:
    S: Tuple[np.ndarray, ...]
    P: np.ndarray
    commute_residual: float
    commuting: bool

    @classmethod
    def from_matrices(
        cls,
        S: Sequence,
        P,
        tol: Tolerance = DEFAULT_TOLERANCE,
    ) -> "OperatorTuple":
        """Validate the matrices and record the commutation residual.

        A tuple whose largest pairwise commutator exceeds
        ``abs_eps * max(1, max norm)`` is kept but flagged non-commuting.
        """

        if len(S) < 1:
            raise ValueError("a tuple needs at least one S matrix (n >= 2)")
        mats = tuple(as_matrix(m, f"S{k + 1}") for k, m in enumerate(S))
        p = as_matrix(P, "P")
        members = (*mats, p)
        dim = p.shape[0]
        for k, m in enumerate(members):
            if m.shape != (dim, dim):
                raise ValueError(
                    f"member {k + 1} has shape {m.shape}; every member must be {dim}x{dim}"
                )
        residual = max(
            (operator_norm(commutator(a, b)) for a, b in combinations(members, 2)),
            default=0.0,
        )
        scale = max(1.0, max(operator_norm(m) for m in members))
        commuting = residual <= tol.abs_eps * scale
        if not commuting:
            logger.warning("tuple does not commute: residual %.3e", residual)
        return cls(mats, p, float(residual), bool(commuting))

    @classmethod
    def from_point(cls, pt: GammaPoint) -> "OperatorTuple":
        """The ``1 x 1`` tuple at a scalar point."""

        return cls.from_matrices([[[v]] for v in pt.s], [[pt.p]])

    @classmethod
    def zero(cls, n: int, dim: int) -> "OperatorTuple":
        zero = np.zeros((dim, dim))
        return cls.from_matrices([zero] * (n - 1), zero)

    @classmethod
    def from_dict(cls, data: Mapping, tol: Tolerance = DEFAULT_TOLERANCE) -> "OperatorTuple":
        if "S" not in data or "P" not in data:
            raise ValueError("tuple JSON needs 'S' and 'P'")
        S = [_matrix_from_dict(m, f"S{k + 1}") for k, m in enumerate(data["S"])]
        t = cls.from_matrices(S, _matrix_from_dict(data["P"], "P"), tol)
        if "n" in data and int(data["n"]) != t.n:
            raise ValueError(f"declared n = {data['n']} but {t.n - 1} S matrices given")
        if "dim" in data and int(data["dim"]) != t.dim:
            raise ValueError(f"declared dim = {data['dim']} but matrices are {t.dim}x{t.dim}")
        return t

    @property
    def n(self) -> int:
        return len(self.S) + 1

    @property
    def dim(self) -> int:
        return self.P.shape[0]

    @property
    def members(self) -> Tuple[np.ndarray, ...]:
        return (*self.S, self.P)

    def si(self, i: int) -> np.ndarray:
        return self.S[i - 1]

    def max_norm(self) -> float:
        return max(operator_norm(m) for m in self.members)

    def scaled(self, alpha: complex) -> "OperatorTuple":
        """``(alpha S_1, alpha**2 S_2, ..., alpha**n P)``."""

        S = [alpha ** (k + 1) * m for k, m in enumerate(self.S)]
        return OperatorTuple.from_matrices(S, alpha**self.n * self.P)

    def require_commuting(self) -> None:
        if not self.commuting:
            raise NonCommutingError(
                f"tuple does not commute (residual {self.commute_residual:.3e})"
            )

    def to_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "dim": self.dim,
            "S": [_matrix_to_dict(m) for m in self.S],
            "P": _matrix_to_dict(self.P),
            "commute_residual": self.commute_residual,
            "commuting": self.commuting,
        }


@dataclass(frozen=True, eq=False)
class JointSpectrum:
    points: Tuple[Tuple[complex, ...], ...]
    residuals: Tuple[float, ...]
    basis: np.ndarray
    triangular_residual: float

    def gamma_points(self) -> List[GammaPoint]:
        return [GammaPoint.from_coordinates(p) for p in self.points]

    def spectral_radii(self) -> List[float]:
        """Spectral radius of each tuple member, read off the joint spectrum."""

        arr = np.abs(np.array(self.points))
        return [float(v) for v in arr.max(axis=0)]

    def to_dict(self) -> Dict[str, object]:
        return {
            "points": [[complex_pair(v) for v in p] for p in self.points],
            "residuals": list(self.residuals),
            "triangular_residual": self.triangular_residual,
        }


@dataclass(frozen=True)
class CertReport:
    kind: CertKind
    checks: Tuple[Check, ...]
    witness: Optional[Dict[str, object]] = None
    notes: Tuple[str, ...] = ()
    details: Dict[str, object] = field(default_factory=dict)
    tolerance_used: Tolerance = DEFAULT_TOLERANCE

    def __post_init__(self) -> None:
        if self.kind is CertKind.VIOLATION and self.witness is None:
            raise ValueError("a violation report needs a witness")

    @property
    def passed(self) -> bool:
        return self.kind is not CertKind.VIOLATION

    def failed_checks(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, object]:
        return {
            "kind": self.kind.value,
            "checks": [c.to_dict() for c in self.checks],
            "witness": self.witness,
            "notes": list(self.notes),
            "details": self.details,
            "tolerance": self.tolerance_used.to_dict(),
        }


def _certify(
    ok_kind: CertKind,
    checks: List[Check],
    tol: Tolerance,
    notes: Sequence[str] = (),
    details: Optional[Dict[str, object]] = None,
) -> CertReport:
    failed = [c for c in checks if not c.passed]
    if not failed:
        return CertReport(ok_kind, tuple(checks), None, tuple(notes), details or {}, tol)
    first = failed[0]
    witness = {"check": first.name, "margin": first.margin}
    return CertReport(CertKind.VIOLATION, tuple(checks), witness, tuple(notes), details or {}, tol)


def _check_index(i: int, n: int) -> None:
    if not 1 <= i <= n - 1:
        raise ValueError(f"index {i} outside 1..{n - 1}")


class _PencilTerms:
    """Alpha independent products entering ``Phi_i``."""

    def __init__(self, t: OperatorTuple, i: int):
        _check_index(i, t.n)
        self.n = t.n
        self.i = i
        self.weight = pencil_weight(t.n, i)
        self.si = t.si(i)
        self.sni = t.si(t.n - i)
        self.pp = adjoint(t.P) @ t.P
        self.aa = adjoint(self.si) @ self.si
        self.bb = adjoint(self.sni) @ self.sni
        self.cross = adjoint(self.sni) @ t.P
        self.eye = np.eye(t.dim)

    def stack(self, alphas: np.ndarray) -> np.ndarray:
        n, i, c = self.n, self.i, self.weight
        a = alphas[:, None, None]
        ai: np.ndarray
        ani: np.ndarray
        an: np.ndarray
        ai, ani, an = a**i, a ** (n - i), a**n
        linear = ai * self.si - np.conj(ani) * an * self.cross
        return (
            c**2 * (self.eye - np.abs(an) ** 2 * self.pp)
            + np.abs(ai) ** 2 * self.aa
            - np.abs(ani) ** 2 * self.bb
            - c * linear
            - c * np.conj(np.swapaxes(linear, -1, -2))
        )


def phi_operator(i: int, t: OperatorTuple, alpha: complex) -> np.ndarray:
    """Operator pencil ``Phi_i`` at ``(alpha S_1, ..., alpha**n P)``.

    The result is Hermitian by construction; the residual is verified and the
    matrix symmetrized before it is returned.
    """

    if abs(alpha) > 1 + 1e-12:
        raise ValueError("alpha must lie in the closed unit disc")
    phi = _PencilTerms(t, i).stack(np.array([complex(alpha)]))[0]
    asymmetry = operator_norm(phi - adjoint(phi))
    bound = 1e-12 * max(1.0, operator_norm(phi))
    if asymmetry > bound:
        raise NotHermitianError(asymmetry, bound)
    return (phi + adjoint(phi)) / 2


def pencil_positivity(
    t: OperatorTuple,
    radii: int = 32,
    angles: int = 64,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> CertReport:
    """Smallest eigenvalue of every ``Phi_i`` over an alpha grid of the disc.

    The witness of a failure is the grid point with the most negative
    eigenvalue.
    """

    t.require_commuting()
    grid = alpha_grid(radii, angles)
    checks = []
    worst: Optional[Tuple[float, int, complex]] = None
    chunk = max(1, 2**20 // t.dim**2)
    slack = tol.abs_eps * max(1.0, t.max_norm()) ** 2
    for i in range(1, t.n):
        terms = _PencilTerms(t, i)
        lowest = np.inf
        where = 0j
        for start in range(0, grid.size, chunk):
            block = grid[start : start + chunk]
            mins = np.linalg.eigvalsh(terms.stack(block))[:, 0]
            # ties within round-off resolve to the earliest grid point
            floor = mins.min() + 1e-12 * max(1.0, abs(mins.min()))
            k = int(np.argmax(mins <= floor))
            if mins[k] < lowest - 1e-12 * max(1.0, abs(mins[k])):
                lowest, where = float(mins[k]), complex(block[k])
        checks.append(Check.non_negative(f"lambda_min(phi[{i}])", lowest, slack))
        if worst is None or lowest < worst[0]:
            worst = (lowest, i, where)
        logger.debug("pencil %d: min eigenvalue %.6g at alpha=%s", i, lowest, where)

    notes = (
        "pencil positivity is necessary, not sufficient, for the contraction property",
    )
    details: Dict[str, object] = {"radii": radii, "angles": angles}
    report = _certify(CertKind.GAMMA_CONTRACTION_CONSISTENT, checks, tol, notes, details)
    if report.kind is CertKind.VIOLATION and worst is not None:
        witness = {"i": worst[1], "alpha": complex_pair(worst[2]), "lambda_min": worst[0]}
        report = CertReport(report.kind, report.checks, witness, notes, details, tol)
    return report


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def _common_eigenvector(
    mats: Sequence[np.ndarray], rng: np.random.Generator, scale: float, attempts: int = 8
) -> np.ndarray:
    """A unit vector that is an eigenvector of every matrix in ``mats``.

    A random combination of the matrices is split along one of its
    eigenvalue clusters; the corresponding (approximate) kernel is invariant
    for the whole commuting family, so the search recurses into it.
    """

    m = mats[0].shape[0]
    if m == 1:
        return np.ones(1, dtype=complex)
    scalar = all(
        np.linalg.norm(a - np.trace(a) / m * np.eye(m), 2) <= 1e-12 * scale for a in mats
    )
    if scalar:
        return np.eye(m, dtype=complex)[:, 0]
    for _ in range(attempts):
        coeffs = rng.standard_normal(len(mats)) + 1j * rng.standard_normal(len(mats))
        combo = sum(c * a for c, a in zip(coeffs, mats))
        lnorm = max(1.0, float(np.linalg.norm(combo, 2)))
        eigs = scipy.linalg.eigvals(combo)
        cluster = eigs[np.abs(eigs - eigs[0]) <= 1e-5 * lnorm]
        lam = np.mean(cluster)
        _, sv, vh = scipy.linalg.svd(combo - lam * np.eye(m))
        k = max(1, int(np.sum(sv <= 1e-8 * lnorm)))
        if k == m:
            continue
        kernel = adjoint(vh[-k:])
        if k == 1:
            return _unit(kernel[:, 0])
        sub = [adjoint(kernel) @ a @ kernel for a in mats]
        return _unit(kernel @ _common_eigenvector(sub, rng, scale, attempts))
    raise NonCommutingError("could not separate a common eigenvector")


def joint_eigenvalues(
    t: OperatorTuple, seed: int = DEFAULT_SEED, tol: Tolerance = DEFAULT_TOLERANCE
) -> JointSpectrum:
    """Joint eigenvalues by simultaneous unitary triangularization.

    Common eigenvectors are peeled off one at a time; the remaining space is
    the orthogonal complement, on which the compressed tuple still commutes
    (it is the quotient by a joint invariant subspace).
    """

    t.require_commuting()
    rng = np.random.default_rng(seed)
    scale = max(1.0, t.max_norm())
    current = [np.array(m) for m in t.members]
    frame = np.eye(t.dim, dtype=complex)
    columns = []
    points = []
    residuals = []
    while True:
        v = _common_eigenvector(current, rng, scale)
        lam = tuple(complex(np.vdot(v, a @ v)) for a in current)
        residual = max(float(np.linalg.norm(a @ v - l * v)) for a, l in zip(current, lam))
        points.append(lam)
        residuals.append(residual)
        columns.append(frame @ v)
        if current[0].shape[0] == 1:
            break
        complement = scipy.linalg.null_space(v.conj()[None, :])
        frame = frame @ complement
        current = [adjoint(complement) @ a @ complement for a in current]

    basis = np.column_stack(columns)
    tri = max(
        float(np.linalg.norm(np.tril(adjoint(basis) @ m @ basis, -1), 2)) for m in t.members
    )
    bound = 1e-8 * scale
    if max(residuals) > bound or tri > bound:
        raise NonCommutingError(
            f"triangularization failed: residual {max(residuals):.3e}, "
            f"lower part {tri:.3e}, bound {bound:.3e}"
        )
    return JointSpectrum(tuple(points), tuple(residuals), basis, tri)


def spectral_radii(t: OperatorTuple, seed: int = DEFAULT_SEED) -> List[float]:
    return joint_eigenvalues(t, seed).spectral_radii()


def gamma_unitary_check(
    t: OperatorTuple,
    tol: Tolerance = DEFAULT_TOLERANCE,
    band: float = DEFAULT_BAND,
    seed: int = DEFAULT_SEED,
) -> CertReport:
    """Normal members, unitary ``P``, ``S_i = S_{n-i}* P`` and a joint
    spectrum on the distinguished boundary."""

    t.require_commuting()
    n = t.n
    bound = tol.bound(max(1.0, t.max_norm()) ** 2)
    eye = np.eye(t.dim)
    names = [f"S{k}" for k in range(1, n)] + ["P"]
    checks = [
        Check.at_most(f"normal[{name}]", operator_norm(commutator(adjoint(m), m)), bound)
        for name, m in zip(names, t.members)
    ]
    checks.append(Check.at_most("P*P = I", operator_norm(adjoint(t.P) @ t.P - eye), bound))
    checks.append(Check.at_most("PP* = I", operator_norm(t.P @ adjoint(t.P) - eye), bound))
    for i in range(1, n):
        residual = operator_norm(t.si(i) - adjoint(t.si(n - i)) @ t.P)
        checks.append(Check.at_most(f"S[{i}] = S[{n - i}]* P", residual, bound))

    details: Dict[str, object] = {}
    try:
        spectrum = joint_eigenvalues(t, seed)
    except NonCommutingError as exc:
        # non-normal tuples can defeat the triangularization tolerance
        checks.append(Check("joint spectrum in distinguished boundary", -np.inf, False))
        details["spectrum_error"] = str(exc)
    else:
        reports = [in_distinguished_boundary(p, tol=tol, band=band) for p in spectrum.gamma_points()]
        margin = min(min(c.margin for c in r.conditions) for r in reports)
        on_boundary = all(r.member for r in reports)
        checks.append(Check("joint spectrum in distinguished boundary", margin, bool(on_boundary)))
        details["joint_spectrum"] = spectrum.to_dict()
    return _certify(CertKind.GAMMA_UNITARY, checks, tol, details=details)


def _isometry_pencil(t: OperatorTuple, i: int, betas: np.ndarray) -> float:
    """``max_beta ||M(beta)* M(beta) - I||`` for
    ``M(beta) = (c beta P - S_{n-i}) (c - beta S_i)^{-1}``, ``c = C(n, i)``."""

    n, dim = t.n, t.dim
    c = pencil_weight(n, i)
    eye = np.eye(dim)
    b = betas[:, None, None]
    left = c * b * t.P - t.si(n - i)
    right = c * eye - b * t.si(i)
    # M = left @ inv(right)  <=>  right^T M^T = left^T
    try:
        mt = np.linalg.solve(np.swapaxes(right, -1, -2), np.swapaxes(left, -1, -2))
    except np.linalg.LinAlgError:
        for beta, r in zip(betas, right):
            if np.linalg.matrix_rank(r) < dim:
                raise SingularPencilError(i, complex(beta)) from None
        raise
    m = np.swapaxes(mt, -1, -2)
    gram = np.conj(np.swapaxes(m, -1, -2)) @ m - eye
    return float(np.max(np.linalg.norm(gram, 2, axis=(1, 2))))


def gamma_isometry_check(
    t: OperatorTuple,
    tol: Tolerance = DEFAULT_TOLERANCE,
    beta_grid: int = 256,
    seed: int = DEFAULT_SEED,
) -> CertReport:
    """Isometric ``P``, ``S_i = S_{n-i}* P`` and the isometry pencils.

    The pencil ``M(beta)`` is only formed when every ``r(S_i) < C(n, i)``; the
    identity ``Phi_i(beta S_1, ..., beta**n P) = 0`` is always evaluated on
    the same grid of the circle.
    """

    t.require_commuting()
    n = t.n
    scale = max(1.0, t.max_norm())
    bound = tol.bound(scale**2)
    eye = np.eye(t.dim)
    checks = [Check.at_most("P*P = I", operator_norm(adjoint(t.P) @ t.P - eye), bound)]
    for i in range(1, n):
        residual = operator_norm(t.si(i) - adjoint(t.si(n - i)) @ t.P)
        checks.append(Check.at_most(f"S[{i}] = S[{n - i}]* P", residual, bound))

    betas = np.exp(2j * np.pi * np.arange(beta_grid) / beta_grid)
    notes = []
    details: Dict[str, object] = {"beta_grid": beta_grid}
    try:
        radii: Optional[List[float]] = spectral_radii(t, seed)
    except NonCommutingError as exc:
        radii = None
        details["spectrum_error"] = str(exc)
        notes.append("joint spectrum unavailable; isometry pencil skipped")
    details["spectral_radii"] = radii
    if radii is not None:
        if all(r < pencil_weight(n, k) for k, r in enumerate(radii[:-1], start=1)):
            for i in range(1, n):
                value = _isometry_pencil(t, i, betas)
                checks.append(Check.at_most(f"M[{i}] isometry", value, tol.rel_eps))
        else:
            notes.append("some r(S_i) >= C(n, i); isometry pencil skipped")

    phi_bound = tol.bound(max(pencil_weight(n, i) for i in range(1, n)) ** 2)
    for i in range(1, n):
        stack = _PencilTerms(t, i).stack(betas)
        value = float(np.max(np.linalg.norm(stack, 2, axis=(1, 2))))
        checks.append(Check.at_most(f"phi[{i}](beta) = 0", value, phi_bound))

    return _certify(CertKind.GAMMA_ISOMETRY, checks, tol, notes, details)


def torus_lattice(
    n: int, grid: int, max_points: int, rng: np.random.Generator
) -> Tuple[np.ndarray, str]:
    """Index tuples of the ``grid**n`` torus lattice worth evaluating.

    Functions of the symmetric coordinates are invariant under permuting the
    torus variables, so only sorted index tuples are needed.  When even those
    exceed ``max_points`` a uniform sample is drawn instead.
    """

    reduced = comb(grid + n - 1, n)
    if reduced <= max_points:
        idx = np.array(list(combinations_with_replacement(range(grid), n)), dtype=np.int64)
        return idx, "symmetric"
    logger.warning(
        "torus lattice has %d symmetric points; sampling %d of them", reduced, max_points
    )
    return rng.integers(0, grid, size=(max_points, n)), "sampled"


def lattice_error_factor(n: int, degree: int, torus_grid: int) -> Optional[float]:
    """Lower bound for ``lattice sup / true sup`` of ``|f o pi_n|`` on the torus.

    ``f o pi_n`` has degree at most ``degree`` in every torus variable.  On
    the segment from a maximizer to its nearest lattice point ``|f|**2`` is
    an exponential sum of type at most ``h = n * pi * degree / torus_grid``
    with a critical point at the maximizer, and Bernstein's inequality gives
    ``lattice**2 >= (1 - h**2 / 2) * sup**2``.  ``None`` once ``h**2 >= 2``.
    """

    h = n * np.pi * degree / torus_grid
    if h * h >= 2:
        return None
    return float(np.sqrt(1 - h * h / 2))


def _torus_modulus(basis: MonomialBasis, coeffs: np.ndarray, theta: np.ndarray) -> float:
    z = np.exp(1j * np.asarray(theta, dtype=float))[None, :]
    return float(np.abs(basis.evaluate_scalars(elementary_symmetric(z)) @ coeffs)[0])


def refine_torus_sup(
    basis: MonomialBasis, coeffs: np.ndarray, theta0: np.ndarray, step: float
) -> float:
    """Local maximum of ``|f o pi_n|`` reached from the angles ``theta0``."""

    theta0 = np.asarray(theta0, dtype=float)
    start = _torus_modulus(basis, coeffs, theta0)
    simplex = theta0 + step * np.vstack([np.zeros(len(theta0)), np.eye(len(theta0))])
    result = scipy.optimize.minimize(
        lambda theta: -_torus_modulus(basis, coeffs, theta),
        theta0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": 1e-11,
            "fatol": 1e-14 * max(1.0, start),
            "maxiter": 600 * len(theta0),
        },
    )
    return max(start, float(-result.fun))


def von_neumann_sample(
    t: OperatorTuple,
    degree: int = 3,
    trials: int = 100,
    torus_grid: int = 24,
    seed: int = DEFAULT_SEED,
    *,
    polynomials: Optional[Sequence[Polynomial]] = None,
    rel_slack: float = 1e-9,
    abs_slack: float = 1e-10,
    max_torus_points: int = 200_000,
    chunk: int = 4096,
) -> CertReport:
    """Compare ``||f(T)||`` with the sup of ``|f|`` sampled on the torus image.

    The sup over the closed set is attained on the distinguished boundary,
    the image of the torus under symmetrization, so sampling the torus
    lattice gives a lower estimate of it.  A trial stops as soon as the
    running estimate dominates the operator norm.  Trials that outlast the
    whole lattice are refined by local maximization from their best lattice
    point and then compared with the ceiling
    ``lattice sup / lattice_error_factor``, which bounds the true sup.  Only
    a norm above that ceiling is a violation; without a ceiling (coarse grid
    or sampled lattice) the refined sup decides.
    """

    t.require_commuting()
    n = t.n
    if polynomials is None:
        if degree < 1:
            raise ValueError("degree must be at least 1")
        polynomials = random_polynomials(n, degree, trials, seed)
    polys = list(polynomials)
    basis, coeffs = common_basis(polys)
    if basis.nvars != n:
        raise ValueError(f"polynomials use {basis.nvars} variables, tuple has {n}")

    def exceeds(norms: np.ndarray, reference: np.ndarray) -> np.ndarray:
        return norms > reference * (1 + rel_slack) + abs_slack

    stack = basis.evaluate_operators(list(t.members))
    op_norms = np.empty(len(polys))
    for start in range(0, len(polys), 128):
        values = np.tensordot(coeffs[start : start + 128], stack, axes=1)
        op_norms[start : start + 128] = np.linalg.norm(values, 2, axis=(1, 2))

    rng = np.random.default_rng(seed)
    lattice, mode = torus_lattice(n, torus_grid, max_torus_points, rng)
    lattice = lattice[rng.permutation(len(lattice))]
    sup = np.zeros(len(polys))
    best: np.ndarray = np.zeros((len(polys), n), dtype=np.int64)
    active = np.arange(len(polys))
    evaluated = 0
    for start in range(0, len(lattice), chunk):
        idx = lattice[start : start + chunk]
        table = basis.evaluate_scalars(elementary_symmetric(np.exp(2j * np.pi * idx / torus_grid)))
        values = np.abs(table @ coeffs[active].T)
        top = values.argmax(axis=0)
        peak = values[top, np.arange(len(active))]
        improved = peak > sup[active]
        sup[active[improved]] = peak[improved]
        best[active[improved]] = idx[top[improved]]
        evaluated += len(idx)
        active = active[exceeds(op_norms[active], sup[active])]
        if active.size == 0:
            break
    logger.debug(
        "von Neumann sampling: %d trials, %d of %d lattice points (%s)",
        len(polys),
        evaluated,
        len(lattice),
        mode,
    )

    lattice_sup = sup.copy()
    for k in active:
        theta = 2 * np.pi * best[k] / torus_grid
        sup[k] = max(sup[k], refine_torus_sup(basis, coeffs[k], theta, np.pi / torus_grid))
    refined = int(active.size)
    active = active[exceeds(op_norms[active], sup[active])]

    factor = lattice_error_factor(n, basis.degree, torus_grid) if mode == "symmetric" else None
    ceiling = sup if factor is None else np.maximum(sup, lattice_sup / factor)
    violating = active[exceeds(op_norms[active], ceiling[active])]
    unresolved = int(active.size - violating.size)
    if unresolved:
        logger.info(
            "%d trials exceed the sampled sup but stay under the lattice error ceiling",
            unresolved,
        )

    margins = ceiling * (1 + rel_slack) + abs_slack - op_norms
    checks = [Check.non_negative("sup ceiling dominates ||f(T)||", float(margins.min()))]
    notes = ["sampling can refute the contraction property, never prove it"]
    if factor is None:
        notes.append("no lattice error ceiling at this grid; violations rest on the refined sup")
    details = {
        "trials": len(polys),
        "degree": basis.degree,
        "torus_grid": torus_grid,
        "lattice": mode,
        "lattice_points": int(len(lattice)),
        "points_evaluated": evaluated,
        "lattice_error_factor": factor,
        "refined": refined,
        "unresolved": unresolved,
        "violations": int(violating.size),
        "seed": seed,
    }
    tol = Tolerance(abs_slack, rel_slack)
    if violating.size == 0:
        return CertReport(
            CertKind.GAMMA_CONTRACTION_CONSISTENT, tuple(checks), None, tuple(notes), details, tol
        )
    worst = int(violating[np.argmax(op_norms[violating] - ceiling[violating])])
    witness = {
        "trial": worst,
        "polynomial": polys[worst].to_dict(),
        "operator_norm": float(op_norms[worst]),
        "sampled_sup": float(sup[worst]),
        "sup_ceiling": float(ceiling[worst]),
    }
    return CertReport(CertKind.VIOLATION, tuple(checks), witness, tuple(notes), details, tol)
