"""Truncated model of a contraction for the symmetrized polydisc whose
fundamental operators are not almost normal.

The ambient space is four copies of ``l2_N(E)`` with ``E = C^2``; block
``k`` occupies coordinates ``[2Nk, 2N(k+1))`` and inside a block coordinate
``2j + e`` is component ``e`` of ``c_j``.  Blocks 0 and 1 form the first copy
of ``H1`` and blocks 2 and 3 the second.

    S1 = X in block (2, 2)
    S2 = 0
    P  = V in block (2, 1) and I in block (3, 0)

``V`` is the shift truncated at depth ``N``.  It loses isometry only on the
last coordinate pair of block 1 (the *edge*), which ``D_P`` then sees as
part of its range.  ``X`` never touches the edge, so every identity checked
on the interior holds exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.settings import DEFAULT_SEED
from fundamental_ops import FundamentalTuple, almost_normal_check, defect, solve_fundamental
from numerics_core import DEFAULT_TOLERANCE, Check, Tolerance, adjoint, commutator, operator_norm
from operator_tuples import CertReport, OperatorTuple, von_neumann_sample
from polynomials import Polynomial, common_basis, random_polynomials

logger = logging.getLogger(__name__)

DEFAULT_ETA = 0.25
DEFAULT_DEPTH = 8


class StructureMismatchError(ValueError):
    """A block equation of the construction does not hold exactly."""


@dataclass(frozen=True)
class BlockLayout:
    depth: int

    @property
    def block_size(self) -> int:
        return 2 * self.depth

    @property
    def dim(self) -> int:
        return 8 * self.depth

    def block(self, k: int) -> slice:
        if not 0 <= k <= 3:
            raise IndexError("block index must be 0..3")
        size = self.block_size
        return slice(k * size, (k + 1) * size)

    @property
    def first_half(self) -> np.ndarray:
        """Coordinates of ``H1 + {0}``."""

        return np.arange(0, 2 * self.block_size)

    @property
    def second_half(self) -> np.ndarray:
        """Coordinates of ``{0} + H1``."""

        return np.arange(2 * self.block_size, 4 * self.block_size)

    @property
    def edge(self) -> np.ndarray:
        """The ``c_{N-1}`` pair of block 1, where the truncated shift is not isometric."""

        start = self.block_size + 2 * (self.depth - 1)
        return np.arange(start, start + 2)

    @property
    def interior_kernel(self) -> np.ndarray:
        return np.setdiff1d(self.first_half, self.edge)

    def describe(self) -> Dict[str, object]:
        return {
            "depth": self.depth,
            "dim": self.dim,
            "blocks": [[self.block(k).start, self.block(k).stop] for k in range(4)],
            "H1+0": [0, 2 * self.block_size],
            "0+H1": [2 * self.block_size, 4 * self.block_size],
            "edge": self.edge.tolist(),
        }


@dataclass(frozen=True, eq=False)
class TruncatedModel:
    n: int
    depth: int
    eta: float
    tuple: OperatorTuple
    layout: BlockLayout
    X: np.ndarray
    V: np.ndarray
    core: Tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)

    @property
    def case(self) -> str:
        return "A" if self.n == 3 else "B"

    def describe(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "depth": self.depth,
            "eta": self.eta,
            "case": self.case,
            "layout": self.layout.describe(),
        }


def shift_operator(depth: int) -> np.ndarray:
    """Shift ``(c_0, c_1, ...) -> (0, c_0, c_1, ...)`` on ``l2_N(C^2)``."""

    v = np.zeros((2 * depth, 2 * depth))
    for k in range(depth - 1):
        v[2 * (k + 1) : 2 * (k + 2), 2 * k : 2 * k + 2] = np.eye(2)
    return v


def x_operator(depth: int, eta: float) -> np.ndarray:
    """``(c_0, c_1, ...) -> (X1 c_0, 0, ...)`` with ``X1 = [[0, eta], [0, 0]]``."""

    x = np.zeros((2 * depth, 2 * depth))
    x[0, 1] = eta
    return x


def _validate(depth: int, eta: float) -> None:
    if depth < 2:
        raise ValueError("truncation depth must be at least 2")
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")


def _core_triple(layout: BlockLayout, x: np.ndarray, v: np.ndarray):
    dim = layout.dim
    s1 = np.zeros((dim, dim))
    s2 = np.zeros((dim, dim))
    p = np.zeros((dim, dim))
    b = layout.block
    s1[b(2), b(2)] = x
    p[b(2), b(1)] = v
    p[b(3), b(0)] = np.eye(layout.block_size)
    return s1, s2, p


def _exact_products(x: np.ndarray, v: np.ndarray, core) -> Dict[str, float]:
    s1, s2, p = core
    named = {"S1": s1, "S2": s2, "P": p}
    products = {"X^2": x @ x, "XV": x @ v}
    for a, b in [("S1", "S2"), ("S1", "P"), ("S2", "P")]:
        products[f"{a}{b}"] = named[a] @ named[b]
        products[f"{b}{a}"] = named[b] @ named[a]
    return {k: float(np.max(np.abs(m))) for k, m in products.items()}


def _build(n: int, depth: int, eta: float) -> TruncatedModel:
    _validate(depth, eta)
    layout = BlockLayout(depth)
    x = x_operator(depth, eta)
    v = shift_operator(depth)
    core = _core_triple(layout, x, v)
    bad = {k: r for k, r in _exact_products(x, v, core).items() if r != 0.0}
    if bad:
        raise StructureMismatchError(f"block products are not exactly zero: {bad}")
    s1, s2, p = core
    if n == 3:
        members: List[np.ndarray] = [s1, s2]
        last = p
    else:
        zero = np.zeros_like(p)
        members = [s1, s2, p] + [zero] * (n - 4)
        last = zero
    t = OperatorTuple.from_matrices(members, last)
    logger.debug("built case %s model: n=%d depth=%d eta=%g", "A" if n == 3 else "B", n, depth, eta)
    return TruncatedModel(n, depth, eta, t, layout, x, v, core)


def build_case_a(depth: int = DEFAULT_DEPTH, eta: float = DEFAULT_ETA) -> TruncatedModel:
    """The three-variable model ``(S1, S2, P)``."""

    return _build(3, depth, eta)


def build_case_b(n: int, depth: int = DEFAULT_DEPTH, eta: float = DEFAULT_ETA) -> TruncatedModel:
    """``(S1, S2, P, 0, ..., 0)`` with last coordinate ``0``, for ``n >= 4``."""

    if n < 4:
        raise ValueError("case B needs n >= 4")
    return _build(n, depth, eta)


def build_model(n: int, depth: int = DEFAULT_DEPTH, eta: float = DEFAULT_ETA) -> TruncatedModel:
    if n < 3:
        raise ValueError("the construction needs n >= 3")
    return build_case_a(depth, eta) if n == 3 else build_case_b(n, depth, eta)


def linear_collapse_check(
    m: TruncatedModel,
    trials: int = 500,
    degree: int = 6,
    seed: int = DEFAULT_SEED,
    polynomials: Optional[List[Polynomial]] = None,
) -> float:
    """Largest ``||f(S1, S2, P) - (a0 I + a1 S1 + a3 P)||`` over the trials.

    Every product of two members of the core triple vanishes, so only the
    constant and linear terms survive and the residual is exactly zero.
    """

    polys = polynomials if polynomials is not None else random_polynomials(3, degree, trials, seed)
    basis, coeffs = common_basis(polys)
    s1, s2, p = m.core
    stack = basis.evaluate_operators([s1, s2, p])
    eye = np.eye(m.layout.dim)
    i0 = basis.index((0, 0, 0))
    i1 = basis.index((1, 0, 0)) if basis.degree >= 1 else None
    i3 = basis.index((0, 0, 1)) if basis.degree >= 1 else None
    worst = 0.0
    for row in coeffs:
        value = np.tensordot(row, stack, axes=1)
        linear = row[i0] * eye
        if i1 is not None and i3 is not None:
            linear = linear + row[i1] * s1 + row[i3] * p
        diff = value - linear
        if np.any(diff != 0):
            worst = max(worst, operator_norm(diff))
    return worst


@dataclass(frozen=True, eq=False)
class ObstructionReport:
    model: TruncatedModel
    hypothesis_checks: Tuple[Check, ...]
    edge_checks: Tuple[Check, ...]
    fot: FundamentalTuple
    fot_checks: Tuple[Check, ...]
    almost_normal: bool
    defect_norms: Tuple[float, ...]
    expected_defect: float
    contraction_evidence: CertReport
    linear_collapse_residual: float
    structural: Dict[str, float]
    tolerance_used: Tolerance = DEFAULT_TOLERANCE

    @property
    def headline_defect(self) -> float:
        return self.defect_norms[0]

    @property
    def obstruction_confirmed(self) -> bool:
        return (
            not self.almost_normal
            and all(c.passed for c in self.hypothesis_checks)
            and all(c.passed for c in self.fot_checks)
            and self.contraction_evidence.passed
            and self.linear_collapse_residual <= self.tolerance_used.abs_eps
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "model": self.model.describe(),
            "hypothesis_checks": [c.to_dict() for c in self.hypothesis_checks],
            "edge_checks": [c.to_dict() for c in self.edge_checks],
            "fundamental": {
                "rank": self.fot.rank,
                "residuals": list(self.fot.residuals),
                "checks": [c.to_dict() for c in self.fot_checks],
            },
            "almost_normal": self.almost_normal,
            "defect_norms": list(self.defect_norms),
            "headline_defect": self.headline_defect,
            "expected_defect": self.expected_defect,
            "contraction_evidence": self.contraction_evidence.to_dict(),
            "linear_collapse_residual": self.linear_collapse_residual,
            "structural": self.structural,
            "obstruction_confirmed": self.obstruction_confirmed,
            "tolerance": self.tolerance_used.to_dict(),
        }


def _hypotheses(m: TruncatedModel, tol: Tolerance) -> Tuple[List[Check], List[Check]]:
    _, _, p = m.core
    ds = defect(p, tol)
    d = ds.D_P
    proj = ds.projector
    eye = np.eye(m.layout.dim)
    lay = m.layout
    bound = tol.abs_eps
    outside = eye - proj
    hyps = [
        Check.at_most("Ker(D_P) contains H1+0 (interior)", operator_norm(d[:, lay.interior_kernel]), bound),
        Check.at_most(
            "D_P is the identity on 0+H1",
            operator_norm(d[:, lay.second_half] - eye[:, lay.second_half]),
            bound,
        ),
        Check.at_most("D_P is a projection", operator_norm(d @ d - d), bound),
        Check.at_most("P(D_P) = 0", operator_norm(p @ proj), bound),
        Check.at_most("P Ker(D_P) in D_P", operator_norm(outside @ p @ outside), bound),
    ]
    edge = [
        Check.at_most(
            "edge lies in D_P", operator_norm(d[:, lay.edge] - eye[:, lay.edge]), bound
        ),
        Check(
            "defect rank = dim(0+H1) + edge",
            float(ds.rank - (lay.second_half.size + lay.edge.size)),
            ds.rank == lay.second_half.size + lay.edge.size,
        ),
    ]
    return hyps, edge


def _fot_checks(m: TruncatedModel, ft: FundamentalTuple) -> List[Check]:
    bound = 1e-12
    lay = m.layout
    if m.n == 3:
        s1, _, _ = m.core
        lifted = ft.lift(1)
        return [
            Check.at_most("F[1] = S1 on D_P", operator_norm(lifted - s1), bound),
            Check.at_most(
                "F[1] interior block = X",
                operator_norm(lifted[lay.block(2), lay.block(2)] - m.X),
                bound,
            ),
            Check.at_most("F[2] = 0", float(np.max(np.abs(ft.lift(2)))), 0.0),
        ]
    return [
        Check.at_most(f"A[{i}] = T[{i}]", operator_norm(ft.lift(i) - m.tuple.si(i)), bound)
        for i in range(1, m.n)
    ]


def expected_defect(m: TruncatedModel) -> float:
    """Expected norm of the ``(1, n-1)`` almost-normality defect."""

    if m.n == 4:
        s1, _, p = m.core
        return operator_norm(commutator(adjoint(s1), s1) - commutator(adjoint(p), p))
    return m.eta**2


def verify_obstruction(
    m: TruncatedModel,
    vn_trials: int = 1000,
    vn_degree: int = 6,
    torus_grid: int = 48,
    seed: int = DEFAULT_SEED,
    *,
    collapse_trials: int = 500,
    max_torus_points: int = 200_000,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> ObstructionReport:
    """Check every hypothesis of the obstruction and collect the evidence.

    Raises :class:`StructureMismatchError` when one of the exact block
    products is not zero; every other shortfall is reported through the
    returned checks and ``obstruction_confirmed``.
    """

    structural = _exact_products(m.X, m.V, m.core)
    bad = [k for k, r in structural.items() if r != 0.0]
    if bad:
        raise StructureMismatchError(f"block equations fail: {', '.join(bad)}")

    hyps, edge = _hypotheses(m, tol)
    ft = solve_fundamental(m.tuple, tol)
    fot_checks = _fot_checks(m, ft)
    almost_normal, defects = almost_normal_check(ft, tol)
    expected = expected_defect(m)
    fot_checks.append(
        Check.at_most("headline defect matches", abs(defects[0] - expected), 1e-12)
    )
    evidence = von_neumann_sample(
        m.tuple,
        degree=vn_degree,
        trials=vn_trials,
        torus_grid=torus_grid,
        seed=seed,
        max_torus_points=max_torus_points,
    )
    collapse = linear_collapse_check(m, collapse_trials, vn_degree, seed)
    report = ObstructionReport(
        model=m,
        hypothesis_checks=tuple(hyps),
        edge_checks=tuple(edge),
        fot=ft,
        fot_checks=tuple(fot_checks),
        almost_normal=almost_normal,
        defect_norms=tuple(defects),
        expected_defect=expected,
        contraction_evidence=evidence,
        linear_collapse_residual=collapse,
        structural=structural,
        tolerance_used=tol,
    )
    if not report.obstruction_confirmed:
        logger.warning("obstruction not confirmed for n=%d depth=%d", m.n, m.depth)
    return report


def cf_two_by_two(b0: complex, b1: complex) -> float:
    """Norm of ``[[b0, 0], [b1, b0]]``: the least sup norm on the disc of
    ``b0 + b1 z + r(z)`` over tails ``r`` of degree two and higher."""

    return operator_norm(np.array([[b0, 0], [b1, b0]], dtype=complex))


def cf_lower_bound_check(
    b0: complex,
    b1: complex,
    trials: int = 2000,
    degree: int = 6,
    torus_grid: int = 1024,
    seed: int = DEFAULT_SEED,
    include_zero_tail: bool = True,
) -> float:
    """Smallest ``max_grid |b0 + b1 z + r(z)| - cf_two_by_two(b0, b1)``.

    Tails ``r`` have random complex coefficients on ``z**2 .. z**degree``
    scaled by a random factor in ``[0, 1)``; trial 0 uses ``r = 0`` when
    ``include_zero_tail`` is set.  Sampling can only approach the infimum
    from above, so the result should not drop below grid round-off.
    """

    if torus_grid < 4:
        raise ValueError("torus_grid must be at least 4")
    rng = np.random.default_rng(seed)
    z = np.exp(2j * np.pi * np.arange(torus_grid) / torus_grid)
    base = b0 + b1 * z
    target = cf_two_by_two(b0, b1)
    powers = np.arange(2, degree + 1)
    tails: np.ndarray = np.zeros((len(powers), trials), dtype=complex)
    if powers.size:
        gauss = rng.standard_normal((len(powers), trials)) + 1j * rng.standard_normal(
            (len(powers), trials)
        )
        tails = gauss / np.sqrt(2) * rng.random(trials)
    if include_zero_tail:
        tails[:, 0] = 0
    values = base[:, None] + (z[:, None] ** powers[None, :]) @ tails
    sups = np.abs(values).max(axis=0)
    return float(sups.min() - target)


def case_of(a0: complex, a1: complex) -> str:
    return "case-1" if abs(a0) <= abs(a1) else "case-2"


def comparison_norms(
    a0: complex, a1: complex, a3: complex, eta: float = DEFAULT_ETA
) -> Tuple[float, float]:
    """Norms of the two comparison matrices bounding ``||f(S1, S2, P)||``.

    The first is ``[[|a0|, 0], [|a3|, |a0| + eta |a1|]]``.  The second is
    ``[[|a0|, 0], [|a1| + |a3|, |a0|]]`` when ``|a0| <= |a1|`` and
    ``[[|a0|, 0], [|a0| + |a3|, |a0|]]`` otherwise.
    """

    r0, r1, r3 = abs(a0), abs(a1), abs(a3)
    first = operator_norm(np.array([[r0, 0], [r3, r0 + eta * r1]]))
    lower = r1 if case_of(a0, a1) == "case-1" else r0
    second = operator_norm(np.array([[r0, 0], [lower + r3, r0]]))
    return first, second
