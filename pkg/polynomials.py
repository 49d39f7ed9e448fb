"""Multivariate polynomials in the coordinates of a tuple.

Monomials are ordered by total degree and every monomial of positive degree
records a *parent* one degree lower together with the variable that extends
it.  Evaluating the whole basis therefore costs one multiplication per
monomial, both for scalar points and for commuting matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from numerics_core import complex_pair

Exponent = Tuple[int, ...]


def elementary_symmetric(values) -> np.ndarray:
    """Elementary symmetric functions ``e_1..e_n`` along the last axis.

    Leading axes are treated as a batch, so an ``(m, n)`` array of points
    yields an ``(m, n)`` array of symmetric functions.
    """

    z = np.asarray(values, dtype=complex)
    n = z.shape[-1]
    # e[k] holds e_k of the prefix processed so far; e[0] == 1
    e = np.zeros(z.shape[:-1] + (n + 1,), dtype=complex)
    e[..., 0] = 1.0
    for j in range(n):
        zj = z[..., j : j + 1]
        e[..., 1 : j + 2] = e[..., 1 : j + 2] + zj * e[..., 0 : j + 1]
    return e[..., 1:]


@dataclass(frozen=True)
class MonomialBasis:
    nvars: int
    degree: int
    exponents: Tuple[Exponent, ...]
    parents: Tuple[Tuple[int, int], ...]

    @classmethod
    def build(cls, nvars: int, degree: int) -> "MonomialBasis":
        if nvars < 1:
            raise ValueError("a polynomial needs at least one variable")
        if degree < 0:
            raise ValueError("degree must be non-negative")
        exponents: List[Exponent] = []
        parents: List[Tuple[int, int]] = []
        lookup: Dict[Tuple[int, ...], int] = {}
        for total in range(degree + 1):
            for combo in combinations_with_replacement(range(nvars), total):
                counts = [0] * nvars
                for var in combo:
                    counts[var] += 1
                lookup[combo] = len(exponents)
                exponents.append(tuple(counts))
                if combo:
                    parents.append((lookup[combo[:-1]], combo[-1]))
                else:
                    parents.append((-1, -1))
        return cls(nvars, degree, tuple(exponents), tuple(parents))

    def __len__(self) -> int:
        return len(self.exponents)

    def index(self, exponent: Sequence[int]) -> int:
        try:
            return self.exponents.index(tuple(exponent))
        except ValueError:
            raise KeyError(f"exponent {tuple(exponent)} is not in the basis") from None

    def evaluate_scalars(self, points) -> np.ndarray:
        """Return the ``(m, K)`` table of every monomial at ``m`` points."""

        pts = np.asarray(points, dtype=complex)
        if pts.ndim != 2 or pts.shape[1] != self.nvars:
            raise ValueError(f"points must have shape (m, {self.nvars})")
        table = np.empty((pts.shape[0], len(self)), dtype=complex)
        table[:, 0] = 1.0
        for k in range(1, len(self)):
            parent, var = self.parents[k]
            table[:, k] = table[:, parent] * pts[:, var]
        return table

    def evaluate_operators(self, mats: Sequence[np.ndarray]) -> np.ndarray:
        """Return the ``(K, d, d)`` stack of every monomial in commuting ``mats``."""

        if len(mats) != self.nvars:
            raise ValueError(f"expected {self.nvars} matrices, got {len(mats)}")
        dim = mats[0].shape[0]
        stack = np.empty((len(self), dim, dim), dtype=complex)
        stack[0] = np.eye(dim)
        for k in range(1, len(self)):
            parent, var = self.parents[k]
            stack[k] = stack[parent] @ mats[var]
        return stack


@dataclass(frozen=True, eq=False)
class Polynomial:
    basis: MonomialBasis
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=complex).ravel()
        if coeffs.shape != (len(self.basis),):
            raise ValueError("coefficient vector does not match the monomial basis")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("polynomial coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_terms(cls, nvars: int, terms: Mapping[Exponent, complex]) -> "Polynomial":
        degree = max((sum(exp) for exp in terms), default=0)
        basis = MonomialBasis.build(nvars, degree)
        coeffs: np.ndarray = np.zeros(len(basis), dtype=complex)
        for exp, value in terms.items():
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} has the wrong number of variables")
            coeffs[basis.index(exp)] += value
        return cls(basis, coeffs)

    @classmethod
    def from_dict(cls, data: Mapping) -> "Polynomial":
        nvars = int(data["nvars"])
        terms: Dict[Exponent, complex] = {}
        for term in data["terms"]:
            re, im = term["coeff"]
            exp = tuple(int(e) for e in term["exponent"])
            terms[exp] = terms.get(exp, 0j) + complex(re, im)
        return cls.from_terms(nvars, terms)

    @property
    def nvars(self) -> int:
        return self.basis.nvars

    def promote(self, basis: MonomialBasis) -> "Polynomial":
        """Re-express the polynomial over a larger basis."""

        if basis.nvars != self.nvars or basis.degree < self.basis.degree:
            raise ValueError("target basis cannot hold this polynomial")
        if basis.degree == self.basis.degree:
            return self
        coeffs: np.ndarray = np.zeros(len(basis), dtype=complex)
        coeffs[: len(self.basis)] = self.coeffs
        return Polynomial(basis, coeffs)

    def at_points(self, points) -> np.ndarray:
        return self.basis.evaluate_scalars(points) @ self.coeffs

    def at_operators(self, mats: Sequence[np.ndarray]) -> np.ndarray:
        stack = self.basis.evaluate_operators(mats)
        return np.tensordot(self.coeffs, stack, axes=1)

    def to_dict(self) -> Dict[str, object]:
        terms = [
            {"exponent": list(exp), "coeff": complex_pair(c)}
            for exp, c in zip(self.basis.exponents, self.coeffs)
            if c != 0
        ]
        return {"nvars": self.nvars, "degree": self.basis.degree, "terms": terms}


def common_basis(polys: Iterable[Polynomial]) -> Tuple[MonomialBasis, np.ndarray]:
    """Promote ``polys`` to one basis and stack their coefficients row-wise."""

    polys = list(polys)
    if not polys:
        raise ValueError("at least one polynomial is required")
    nvars = polys[0].nvars
    if any(p.nvars != nvars for p in polys):
        raise ValueError("polynomials use different numbers of variables")
    basis = MonomialBasis.build(nvars, max(p.basis.degree for p in polys))
    return basis, np.stack([p.promote(basis).coeffs for p in polys])


def random_polynomials(nvars: int, degree: int, trials: int, seed: int) -> List[Polynomial]:
    """Draw ``trials`` polynomials with complex Gaussian coefficients.

    Every trial gets its own child of ``SeedSequence(seed)`` so a single
    witness can be regenerated from the seed and its trial index.
    """

    if trials < 1:
        raise ValueError("trials must be at least 1")
    basis = MonomialBasis.build(nvars, degree)
    polys = []
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        size = len(basis)
        coeffs = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2)
        polys.append(Polynomial(basis, coeffs))
    return polys
