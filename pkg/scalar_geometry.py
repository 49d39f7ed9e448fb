"""Point level geometry of the symmetrized polydisc.

A point of the symmetrized polydisc in ``n`` variables is stored as
``(s_1, ..., s_{n-1}, p)``.  The coefficient convention used everywhere is

    z**n - s_1 z**(n-1) + s_2 z**(n-2) - ... + (-1)**n p = prod(z - z_i)

so ``s_i`` is the ``i``-th elementary symmetric function of the roots and
``p`` their product.

Membership of the open set, the closed set and its distinguished boundary is
decided by recursive tests that drop the dimension by one at every level.
The pencil inequalities at index ``i`` are weighted by ``C(n, i)``, which is
``n`` for ``n <= 3``; with the plain weight ``n`` interior points such as the
image of ``(r, r, r, 0)`` for ``r**2 > 2/3`` would fail them.
The polynomial roots act as an independent oracle; every report carries both
answers and flags disagreement instead of silently picking one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from numerics_core import (
    DEFAULT_TOLERANCE,
    Check,
    Tolerance,
    companion_roots,
    complex_pair,
)
from polynomials import elementary_symmetric

logger = logging.getLogger(__name__)

DEFAULT_BAND = 1e-9
# roots closer than this (relative) are merged before reading off moduli
CLUSTER_RADIUS = 1e-4


class Verdict(str, Enum):
    INTERIOR_G = "InteriorG"
    BOUNDARY_GAMMA_B = "BoundaryGamma_b"
    GAMMA_NOT_INTERIOR = "GammaNotInterior"
    OUTSIDE = "Outside"
    INCONCLUSIVE = "Inconclusive"


CLOSED_VERDICTS = frozenset(
    {Verdict.INTERIOR_G, Verdict.BOUNDARY_GAMMA_B, Verdict.GAMMA_NOT_INTERIOR}
)


@dataclass(frozen=True)
class GammaPoint:
    """Coordinates ``(s_1, ..., s_{n-1}, p)``.

    Construction implies nothing about membership.  Size one points (``p``
    alone) are allowed because the recursive tests bottom out at the disc.
    """

    s: Tuple[complex, ...]
    p: complex

    def __post_init__(self) -> None:
        s = tuple(complex(v) for v in self.s)
        p = complex(self.p)
        if not all(np.isfinite(v) for v in (*s, p)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_coordinates(cls, coords: Sequence[complex] | np.ndarray) -> "GammaPoint":
        coords = list(coords)
        if not coords:
            raise ValueError("a point needs at least one coordinate")
        return cls(tuple(coords[:-1]), coords[-1])

    @classmethod
    def origin(cls, n: int) -> "GammaPoint":
        return cls((0j,) * (n - 1), 0j)

    @property
    def n(self) -> int:
        return len(self.s) + 1

    def coordinates(self) -> Tuple[complex, ...]:
        return (*self.s, self.p)

    def si(self, i: int) -> complex:
        """``s_i`` for ``1 <= i <= n-1``."""

        return self.s[i - 1]

    def as_array(self) -> np.ndarray:
        return np.array(self.coordinates(), dtype=complex)

    def to_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "s": [complex_pair(v) for v in self.s],
            "p": complex_pair(self.p),
        }


@dataclass(frozen=True)
class QRPoints:
    q: Optional[GammaPoint]
    r: GammaPoint
    q_defined: bool


@dataclass(frozen=True)
class RootOracle:
    max_modulus: float
    roots: Tuple[complex, ...]

    def verdict(self, band: float = DEFAULT_BAND) -> Verdict:
        if self.max_modulus < 1 - band:
            return Verdict.INTERIOR_G
        if self.max_modulus > 1 + band:
            return Verdict.OUTSIDE
        moduli = np.abs(np.array(self.roots))
        if np.all(np.abs(moduli - 1) <= band):
            return Verdict.BOUNDARY_GAMMA_B
        return Verdict.GAMMA_NOT_INTERIOR


@dataclass(frozen=True)
class MembershipReport:
    query: str
    point: GammaPoint
    verdict: Verdict
    member: Optional[bool]
    conditions: Tuple[Check, ...]
    oracle_max_root_modulus: float
    oracle_roots: Tuple[complex, ...]
    oracle_verdict: Verdict
    oracle_disagreement: bool
    band: float
    tolerance_used: Tolerance = DEFAULT_TOLERANCE
    grid_conditions: Tuple[Check, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.conditions:
            raise ValueError("a membership report needs at least one condition")

    def to_dict(self) -> Dict[str, object]:
        return {
            "query": self.query,
            "point": self.point.to_dict(),
            "verdict": self.verdict.value,
            "member": self.member,
            "conditions": [c.to_dict() for c in self.conditions],
            "grid_conditions": [c.to_dict() for c in self.grid_conditions],
            "oracle": {
                "max_root_modulus": self.oracle_max_root_modulus,
                "roots": [complex_pair(r) for r in self.oracle_roots],
                "verdict": self.oracle_verdict.value,
            },
            "oracle_disagreement": self.oracle_disagreement,
            "band": self.band,
            "tolerance": self.tolerance_used.to_dict(),
        }


def symmetrize(z: Sequence[complex]) -> GammaPoint:
    """Map ``(z_1, ..., z_n)`` to its symmetric coordinates.

    The input is sorted by ``(real, imag)`` first so every permutation of
    ``z`` produces bit-identical output.
    """

    arr = np.asarray(z, dtype=complex).ravel()
    if arr.size < 2:
        raise ValueError("symmetrize needs at least two variables")
    if not np.all(np.isfinite(arr)):
        raise ValueError("symmetrize input must be finite")
    arr = arr[np.lexsort((arr.imag, arr.real))]
    return GammaPoint.from_coordinates(elementary_symmetric(arr))


def characteristic_coefficients(pt: GammaPoint) -> np.ndarray:
    """Lower coefficients of ``z**n - s_1 z**(n-1) + ... + (-1)**n p``."""

    signs = np.array([(-1) ** k for k in range(1, pt.n + 1)], dtype=float)
    return signs * pt.as_array()


def _merge_clusters(roots: np.ndarray, radius: float = CLUSTER_RADIUS) -> np.ndarray:
    """Replace nearby roots by their centroid, keeping multiplicity."""

    groups: List[List[int]] = []
    for idx, root in enumerate(roots):
        for group in groups:
            if any(abs(root - roots[j]) <= radius * (1 + abs(root)) for j in group):
                group.append(idx)
                break
        else:
            groups.append([idx])
    merged = roots.copy()
    for group in groups:
        if len(group) > 1:
            merged[group] = np.mean(roots[group])
    return merged


def root_oracle(pt: GammaPoint) -> RootOracle:
    roots = companion_roots(characteristic_coefficients(pt))
    roots = _merge_clusters(roots)
    return RootOracle(float(np.max(np.abs(roots))), tuple(complex(r) for r in roots))


def _check_index(i: int, n: int) -> None:
    if not 1 <= i <= n - 1:
        raise ValueError(f"index {i} outside 1..{n - 1}")


def _check_alpha(alpha) -> None:
    if np.any(np.abs(alpha) > 1 + 1e-12):
        raise ValueError("alpha must lie in the closed unit disc")


def pencil_weight(n: int, i: int) -> int:
    """``C(n, i)``: the bound of ``|s_i|`` over the closed set.

    Equals ``n`` only for ``n <= 3``; with the literal ``n`` in the pencils,
    interior points such as ``pi(r, r, r, 0)`` fail for ``n >= 4``.
    """

    return comb(n, i)


def phi_scalar_grid(i: int, pt: GammaPoint, alphas) -> np.ndarray:
    """Vectorized :func:`phi_scalar` over an array of ``alpha`` values."""

    n = pt.n
    _check_index(i, n)
    c = pencil_weight(n, i)
    a = np.asarray(alphas, dtype=complex)
    _check_alpha(a)
    si = a**i * pt.si(i)
    sni = a ** (n - i) * pt.si(n - i)
    pa = a**n * pt.p
    cross = si - np.conj(sni) * pa
    value = (
        c**2 * (1 - np.abs(pa) ** 2)
        + np.abs(si) ** 2
        - np.abs(sni) ** 2
        - c * cross
        - c * np.conj(cross)
    )
    scale = np.maximum(1.0, np.abs(value))
    if np.any(np.abs(value.imag) > 1e-12 * scale):
        raise ArithmeticError("scalar pencil produced a non-real value")
    return value.real


def phi_scalar(i: int, pt: GammaPoint, alpha: complex) -> float:
    """Scalar pencil ``Phi_i`` at ``(alpha s_1, ..., alpha**n p)``."""

    return float(phi_scalar_grid(i, pt, np.array([alpha]))[0])


def pencil_gap_grid(i: int, pt: GammaPoint, alphas) -> np.ndarray:
    """``|c - a**i s_i| - |c a**n p - a**(n-i) s_{n-i}|`` over ``alphas``,
    ``c = C(n, i)``."""

    n = pt.n
    _check_index(i, n)
    c = pencil_weight(n, i)
    a = np.asarray(alphas, dtype=complex)
    _check_alpha(a)
    return np.abs(c - a**i * pt.si(i)) - np.abs(
        c * a**n * pt.p - a ** (n - i) * pt.si(n - i)
    )


def alpha_grid(radii: int = 32, angles: int = 64) -> np.ndarray:
    """Radial by angular grid of the closed disc, excluding the centre.

    Radii are ``k / radii`` for ``k = 1..radii`` so the unit circle is always
    sampled.
    """

    if radii < 2 or angles < 16:
        raise ValueError("alpha grid needs at least 2 radii and 16 angles")
    r = np.arange(1, radii + 1) / radii
    theta = 2 * np.pi * np.arange(angles) / angles
    return (r[:, None] * np.exp(1j * theta)[None, :]).ravel()


def pencil_conditions(pt: GammaPoint, grid) -> List[Check]:
    """Grid versions of the pencil characterizations of the open set.

    One positivity check for ``Phi_i`` and one for the matching gap per
    index; both are strict since they describe the open set.
    """

    checks = []
    for i in range(1, pt.n):
        checks.append(Check.positive(f"phi[{i}] > 0", float(np.min(phi_scalar_grid(i, pt, grid)))))
        checks.append(Check.positive(f"gap[{i}] > 0", float(np.min(pencil_gap_grid(i, pt, grid)))))
    return checks


def qr_points(pt: GammaPoint, band: float = DEFAULT_BAND) -> QRPoints:
    n = pt.n
    if n < 2:
        raise ValueError("Q and R need a point with at least two coordinates")
    p = pt.p
    denom = 1 - abs(p) ** 2
    r = GammaPoint.from_coordinates([(n - i) / n * pt.si(i) for i in range(1, n)])
    if abs(denom) <= band:
        return QRPoints(None, r, False)
    q = GammaPoint.from_coordinates(
        [(pt.si(i) - np.conj(pt.si(n - i)) * p) / denom for i in range(1, n)]
    )
    return QRPoints(q, r, True)


def _cross_sum(pt: GammaPoint, i: int) -> float:
    n = pt.n
    si, sni, p = pt.si(i), pt.si(n - i), pt.p
    return abs(si - np.conj(sni) * p) + abs(sni - np.conj(si) * p)


def _open_test(pt: GammaPoint, band: float, prefix: str = "") -> Tuple[bool, List[Check]]:
    n = pt.n
    if n == 1:
        check = Check.positive(f"{prefix}|p| < 1", 1 - abs(pt.p))
        return check.passed, [check]
    rhs = 1 - abs(pt.p) ** 2
    checks = [
        Check.positive(f"{prefix}open[{i}]", pencil_weight(n, i) * rhs - _cross_sum(pt, i))
        for i in range(1, n)
    ]
    if not all(c.passed for c in checks):
        return False, checks
    qr = qr_points(pt, band)
    if qr.q is None:
        checks.append(Check(f"{prefix}Q defined", abs(1 - abs(pt.p) ** 2) - band, False))
        return False, checks
    ok, sub = _open_test(qr.q, band, prefix + "Q.")
    return ok, checks + sub


def _closed_test(pt: GammaPoint, band: float, prefix: str = "") -> Tuple[bool, List[Check]]:
    n = pt.n
    if n == 1:
        check = Check.non_negative(f"{prefix}|p| <= 1", 1 - abs(pt.p), band)
        return check.passed, [check]
    rhs = 1 - abs(pt.p) ** 2
    checks = [
        Check.non_negative(
            f"{prefix}closed[{i}]", pencil_weight(n, i) * rhs - _cross_sum(pt, i), band
        )
        for i in range(1, n)
    ]
    if not all(c.passed for c in checks):
        return False, checks
    qr = qr_points(pt, band)
    if qr.q is None:
        ok, sub = _closed_test(qr.r, band, prefix + "R.")
    else:
        ok, sub = _closed_test(qr.q, band, prefix + "Q.")
    return ok, checks + sub


def _boundary_test(
    pt: GammaPoint, band: float, tol: Tolerance, prefix: str = ""
) -> Tuple[bool, List[Check]]:
    n = pt.n
    unimodular = Check.non_negative(f"{prefix}|p| = 1", band - abs(abs(pt.p) - 1))
    if n == 1:
        return unimodular.passed, [unimodular]
    checks = [unimodular]
    scale = 1 + float(np.max(np.abs(pt.as_array())))
    for i in range(1, n):
        residual = abs(pt.si(i) - np.conj(pt.si(n - i)) * pt.p)
        checks.append(
            Check.at_most(f"{prefix}s[{i}] = conj(s[{n - i}]) p", residual, tol.abs_eps * scale)
        )
    ok, sub = _closed_test(qr_points(pt, band).r, band, prefix + "R.")
    checks.extend(sub)
    return ok and all(c.passed for c in checks), checks


class _Ladder:
    """Lazily evaluated theorem tests shared by the three membership queries."""

    def __init__(self, pt: GammaPoint, band: float, tol: Tolerance):
        self.pt = pt
        self.band = band
        self.tol = tol

    @cached_property
    def open(self) -> Tuple[bool, List[Check]]:
        return _open_test(self.pt, self.band)

    @cached_property
    def closed(self) -> Tuple[bool, List[Check]]:
        return _closed_test(self.pt, self.band)

    @cached_property
    def boundary(self) -> Tuple[bool, List[Check]]:
        return _boundary_test(self.pt, self.band, self.tol)

    def verdict(self) -> Verdict:
        if self.open[0]:
            return Verdict.INTERIOR_G
        if not self.closed[0]:
            return Verdict.OUTSIDE
        if self.boundary[0]:
            return Verdict.BOUNDARY_GAMMA_B
        return Verdict.GAMMA_NOT_INTERIOR


def classify(
    pt: GammaPoint, *, tol: Tolerance = DEFAULT_TOLERANCE, band: float = DEFAULT_BAND
) -> Verdict:
    """Reconciled verdict of the theorem tests and the root oracle."""

    verdict, _ = _reconcile(pt, _Ladder(pt, band, tol).verdict(), root_oracle(pt), band)
    return verdict


def _reconcile(
    pt: GammaPoint, theorem: Verdict, oracle: RootOracle, band: float
) -> Tuple[Verdict, bool]:
    """Combine the theorem verdict with the oracle.

    Inside the band only boundary verdicts from the theorem tests are
    trusted; outside it the two must agree.
    """

    if abs(oracle.max_modulus - 1) <= band:
        if theorem in (Verdict.BOUNDARY_GAMMA_B, Verdict.GAMMA_NOT_INTERIOR):
            return theorem, False
        return Verdict.INCONCLUSIVE, False
    expected = oracle.verdict(band)
    if theorem == expected:
        return theorem, False
    logger.warning(
        "theorem verdict %s disagrees with root oracle %s (max modulus %.12g) at %s",
        theorem.value,
        expected.value,
        oracle.max_modulus,
        pt.coordinates(),
    )
    return Verdict.INCONCLUSIVE, True


def _membership(
    query: str,
    pt: GammaPoint,
    tol: Tolerance,
    band: float,
    grid,
) -> MembershipReport:
    ladder = _Ladder(pt, band, tol)
    theorem = ladder.verdict()
    oracle = root_oracle(pt)
    verdict, disagreement = _reconcile(pt, theorem, oracle, band)

    if query == "open_g":
        conditions = ladder.open[1]
        member = None if verdict is Verdict.INCONCLUSIVE else verdict is Verdict.INTERIOR_G
    elif query == "closed_gamma":
        conditions = ladder.closed[1]
        member = None if verdict is Verdict.INCONCLUSIVE else verdict in CLOSED_VERDICTS
    else:
        conditions = ladder.boundary[1]
        member = None if verdict is Verdict.INCONCLUSIVE else verdict is Verdict.BOUNDARY_GAMMA_B

    grid_conditions: Tuple[Check, ...] = ()
    if grid is not None and pt.n >= 2:
        grid_conditions = tuple(pencil_conditions(pt, grid))

    logger.debug("%s %s -> %s", query, pt.coordinates(), verdict.value)
    return MembershipReport(
        query=query,
        point=pt,
        verdict=verdict,
        member=member,
        conditions=tuple(conditions),
        oracle_max_root_modulus=oracle.max_modulus,
        oracle_roots=oracle.roots,
        oracle_verdict=oracle.verdict(band),
        oracle_disagreement=disagreement,
        band=band,
        tolerance_used=tol,
        grid_conditions=grid_conditions,
    )


def in_open_g(
    pt: GammaPoint,
    *,
    tol: Tolerance = DEFAULT_TOLERANCE,
    band: float = DEFAULT_BAND,
    grid=None,
) -> MembershipReport:
    """Membership of the open symmetrized polydisc.

    Strict inequalities at every level, recursing on ``Q`` down to the open
    unit disc.  ``grid`` optionally adds the pencil conditions sampled on an
    :func:`alpha_grid`; they are reported but do not change the verdict.
    """

    return _membership("open_g", pt, tol, band, grid)


def in_closed_gamma(
    pt: GammaPoint,
    *,
    tol: Tolerance = DEFAULT_TOLERANCE,
    band: float = DEFAULT_BAND,
    grid=None,
) -> MembershipReport:
    """Membership of the closed symmetrized polydisc.

    Non-strict inequalities; when ``|p| = 1`` within the band the recursion
    continues on ``R`` instead of the undefined ``Q``.
    """

    return _membership("closed_gamma", pt, tol, band, grid)


def in_distinguished_boundary(
    pt: GammaPoint,
    *,
    tol: Tolerance = DEFAULT_TOLERANCE,
    band: float = DEFAULT_BAND,
    grid=None,
) -> MembershipReport:
    """Membership of the distinguished boundary.

    ``|p| = 1``, ``s_i = conj(s_{n-i}) p`` for every ``i`` and ``R`` in the
    closed set one dimension down.
    """

    return _membership("distinguished_boundary", pt, tol, band, grid)


MEMBERSHIP_QUERIES = {
    "open_g": in_open_g,
    "closed_gamma": in_closed_gamma,
    "distinguished_boundary": in_distinguished_boundary,
}


def rotation_orbit(pt: GammaPoint, omega: complex) -> GammaPoint:
    omega = complex(omega)
    if abs(abs(omega) - 1) > 1e-12:
        raise ValueError("omega must be unimodular")
    s = tuple(omega ** (k + 1) * v for k, v in enumerate(pt.s))
    return GammaPoint(s, omega**pt.n * pt.p)


def embed(pt: GammaPoint) -> GammaPoint:
    """``(s_1, ..., s_{n-2}, p) -> (s_1, ..., s_{n-2}, p, 0)``."""

    return GammaPoint(pt.s + (pt.p,), 0j)


def lemma_s_bound(pt: GammaPoint, tol: Tolerance = DEFAULT_TOLERANCE) -> Tuple[bool, float]:
    """``|s| <= 1 + |p|`` for points of the closed set in two variables."""

    if pt.n != 2:
        raise ValueError("the s bound applies to two-variable points only")
    margin = 1 + abs(pt.p) - abs(pt.s[0])
    return margin >= -tol.abs_eps, float(margin)
