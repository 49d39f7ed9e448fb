"""Defect spaces and the fundamental operator tuple.

For a commuting tuple with contractive ``P`` the operators ``F_i`` acting on
the defect space of ``P`` are the unique solutions of

    S_i - S_{n-i}* P = D_P F_i D_P.

They are stored in an orthonormal basis of the defect space, so ``F_i`` is
``rank x rank`` and :meth:`FundamentalTuple.lift` maps it back to the
ambient space.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from numerics_core import (
    DEFAULT_TOLERANCE,
    Tolerance,
    adjoint,
    as_matrix,
    commutator,
    hermitian_eig,
    numerical_radius,
    operator_norm,
    psd_sqrt,
)
from operator_tuples import OperatorTuple
from scalar_geometry import pencil_weight

logger = logging.getLogger(__name__)

RANK_TOL = 1e-9


class NotContractionError(ValueError):
    def __init__(self, norm: float):
        super().__init__(f"P is not a contraction: ||P|| = {norm:.12g}")
        self.norm = norm


class InconsistentDefectError(ValueError):
    """``S_i - S_{n-i}* P`` is not supported on the defect space."""

    def __init__(self, index: int, residual: float, bound: float):
        super().__init__(
            f"equation {index} is inconsistent: residual {residual:.3e} "
            f"outside the defect space exceeds {bound:.3e}"
        )
        self.index = index
        self.residual = residual


@dataclass(frozen=True, eq=False)
class DefectSpace:
    D_P: np.ndarray
    basis: np.ndarray
    rank: int

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ adjoint(self.basis)

    def compressed(self) -> np.ndarray:
        """``D_P`` written in the defect basis."""

        return adjoint(self.basis) @ self.D_P @ self.basis


def defect(
    P, tol: Tolerance = DEFAULT_TOLERANCE, rank_tol: float = RANK_TOL
) -> DefectSpace:
    """``D_P = (I - P*P)^{1/2}`` with an orthonormal basis of its range.

    Eigenvalues of ``I - P*P`` below ``abs_eps`` are zeroed before the square
    root so round-off on the unitary part of ``P`` does not inflate the rank.
    """

    P = as_matrix(P, "P")
    norm = operator_norm(P)
    if norm > 1 + tol.abs_eps:
        raise NotContractionError(norm)
    gram = np.eye(P.shape[0]) - adjoint(P) @ P
    # ||P|| <= 1 + abs_eps only bounds the spectrum of I - P*P below by -3 abs_eps
    slack = Tolerance(3 * tol.abs_eps, tol.rel_eps)
    d_p = psd_sqrt((gram + adjoint(gram)) / 2, slack, floor=tol.abs_eps)
    values, vectors = hermitian_eig(d_p, tol)
    keep = values > rank_tol
    basis = vectors[:, keep]
    return DefectSpace(d_p, basis, int(keep.sum()))


@dataclass(frozen=True, eq=False)
class FundamentalTuple:
    F: Tuple[np.ndarray, ...]
    defect: DefectSpace
    residuals: Tuple[float, ...]
    radius_margins: Tuple[float, ...] = ()

    @property
    def n(self) -> int:
        return len(self.F) + 1

    @property
    def rank(self) -> int:
        return self.defect.rank

    def fi(self, i: int) -> np.ndarray:
        return self.F[i - 1]

    def lift(self, i: int) -> np.ndarray:
        """Ambient operator ``B F_i B*``."""

        basis = self.defect.basis
        return basis @ self.fi(i) @ adjoint(basis)

    def to_dict(self) -> Dict[str, object]:
        return {
            "rank": self.rank,
            "basis": {"re": self.defect.basis.real.tolist(), "im": self.defect.basis.imag.tolist()},
            "F": [{"re": f.real.tolist(), "im": f.imag.tolist()} for f in self.F],
            "residuals": list(self.residuals),
            "radius_margins": list(self.radius_margins),
        }


def _validated_basis(ds: DefectSpace, basis) -> DefectSpace:
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim != 2 or basis.shape != ds.basis.shape:
        raise ValueError(f"basis must have shape {ds.basis.shape}")
    if ds.rank and np.linalg.norm(adjoint(basis) @ basis - np.eye(ds.rank), 2) > 1e-10:
        raise ValueError("basis columns are not orthonormal")
    if ds.rank and np.linalg.norm(basis @ adjoint(basis) - ds.projector, 2) > 1e-8:
        raise ValueError("basis does not span the defect space")
    return DefectSpace(ds.D_P, basis, ds.rank)


def solve_fundamental(
    t: OperatorTuple,
    tol: Tolerance = DEFAULT_TOLERANCE,
    rank_tol: float = RANK_TOL,
    *,
    basis=None,
    z_grid: Optional[int] = None,
    angles: int = 720,
) -> FundamentalTuple:
    """Solve ``S_i - S_{n-i}* P = D_P F_i D_P`` for every ``i``.

    The equation is compressed to the defect basis and solved by two least
    squares passes.  Right-hand sides with a component outside the defect
    space raise :class:`InconsistentDefectError`; such a tuple cannot be a
    contraction for the symmetrized polydisc.
    """

    t.require_commuting()
    ds = defect(t.P, tol, rank_tol)
    if basis is not None:
        ds = _validated_basis(ds, basis)
    n = t.n
    scale = max(1.0, t.max_norm())
    bound = tol.bound(scale)
    b = ds.basis
    proj = ds.projector
    dc = ds.compressed()

    solutions: List[np.ndarray] = []
    residuals: List[float] = []
    for i in range(1, n):
        rhs = t.si(i) - adjoint(t.si(n - i)) @ t.P
        outside = operator_norm(rhs - proj @ rhs @ proj)
        if outside > bound:
            raise InconsistentDefectError(i, outside, bound)
        if ds.rank == 0:
            solutions.append(np.zeros((0, 0), dtype=complex))
            residuals.append(operator_norm(rhs))
            continue
        compressed = adjoint(b) @ rhs @ b
        # dc G dc = compressed, solved as dc Y = compressed then G dc = Y
        y = scipy.linalg.lstsq(dc, compressed)[0]
        g = adjoint(scipy.linalg.lstsq(adjoint(dc), adjoint(y))[0])
        lifted = b @ g @ adjoint(b)
        residual = operator_norm(rhs - ds.D_P @ lifted @ ds.D_P)
        if residual > bound:
            raise InconsistentDefectError(i, residual, bound)
        solutions.append(g)
        residuals.append(residual)
        logger.debug("F_%d solved on rank %d defect space, residual %.3e", i, ds.rank, residual)

    ft = FundamentalTuple(tuple(solutions), ds, tuple(residuals))
    if z_grid is not None:
        margins = radius_margins(ft, n, z_grid, angles)
        ft = FundamentalTuple(ft.F, ds, ft.residuals, tuple(margins))
    return ft


def radius_margins(
    ft: FundamentalTuple, n: Optional[int] = None, z_grid: int = 64, angles: int = 720
) -> List[float]:
    """``C(n, i) - max_z w(F_i + z F_{n-i})`` for each ``i`` over ``z_grid`` circle points.

    The weight is ``n`` itself for ``n <= 3``.
    """

    n = ft.n if n is None else n
    if z_grid < 4:
        raise ValueError("z_grid must be at least 4")
    if ft.rank == 0:
        return [float(pencil_weight(n, i)) for i in range(1, ft.n)]
    zs = np.exp(2j * np.pi * np.arange(z_grid) / z_grid)
    margins = []
    for i in range(1, ft.n):
        fi, fni = ft.fi(i), ft.fi(ft.n - i)
        radius = max(numerical_radius(fi + z * fni, angles) for z in zs)
        margins.append(pencil_weight(n, i) - radius)
    return margins


def radius_bound_check(
    ft: FundamentalTuple,
    n: Optional[int] = None,
    z_grid: int = 64,
    angles: int = 720,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> Tuple[bool, float]:
    return _bound_verdict(radius_margins(ft, n, z_grid, angles), tol)


def _bound_verdict(margins: Sequence[float], tol: Tolerance) -> Tuple[bool, float]:
    worst = float(min(margins))
    return worst >= -tol.abs_eps, worst


def almost_normal_check(
    ft: FundamentalTuple, tol: Tolerance = DEFAULT_TOLERANCE
) -> Tuple[bool, List[float]]:
    """Compare ``[F_i*, F_i]`` with ``[F_{n-i}*, F_{n-i}]`` for each pair.

    Pairs run over ``i = 1 .. (n-1)//2``; for ``n = 2`` there is nothing to
    compare and the tuple counts as almost normal.
    """

    n = ft.n
    if ft.rank == 0:
        return True, [0.0] * ((n - 1) // 2)
    scale = max(1.0, max(operator_norm(f) for f in ft.F))
    norms = []
    for i in range(1, (n - 1) // 2 + 1):
        fi, fni = ft.fi(i), ft.fi(n - i)
        diff = commutator(adjoint(fi), fi) - commutator(adjoint(fni), fni)
        norms.append(operator_norm(diff))
    return all(v <= tol.bound(scale**2) for v in norms), norms


def fundamental_report(
    t: OperatorTuple,
    tol: Tolerance = DEFAULT_TOLERANCE,
    z_grid: int = 64,
    angles: int = 720,
) -> Dict[str, object]:
    ft = solve_fundamental(t, tol, z_grid=z_grid, angles=angles)
    passed, worst = _bound_verdict(ft.radius_margins, tol)
    almost_normal, defects = almost_normal_check(ft, tol)
    return {
        "n": t.n,
        "dim": t.dim,
        "fundamental": ft.to_dict(),
        "radius_bound": {"passed": passed, "worst_margin": worst, "z_grid": z_grid},
        "almost_normal": almost_normal,
        "defect_norms": defects,
        "tolerance": tol.to_dict(),
    }
