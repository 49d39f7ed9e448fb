import numpy as np
import pytest

import fundamental_ops
from counterexample import build_case_a, build_case_b
from fundamental_ops import (
    InconsistentDefectError,
    NotContractionError,
    almost_normal_check,
    defect,
    fundamental_report,
    radius_bound_check,
    solve_fundamental,
)
from numerics_core import random_unitary
from operator_tuples import OperatorTuple
from polynomials import elementary_symmetric
from scalar_geometry import qr_points, symmetrize


def disc_rows(rng, dim, n, radius):
    r = radius * np.sqrt(rng.uniform(0, 1, (dim, n)))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, (dim, n)))


def diagonal_candidate(rng, dim, n, radius=0.9):
    """Symmetrization of commuting diagonal strict contractions, rotated by a unitary."""

    w = random_unitary(rng, dim)
    e = elementary_symmetric(disc_rows(rng, dim, n, radius))
    mats = [w @ np.diag(e[:, k]) @ w.conj().T for k in range(n)]
    return OperatorTuple.from_matrices(mats[:-1], mats[-1])


def test_defect_of_unitary_is_trivial():
    u = random_unitary(np.random.default_rng(2), 4)
    ds = defect(u)
    assert ds.rank == 0
    assert ds.basis.shape == (4, 0)


def test_defect_of_zero_is_identity():
    ds = defect(np.zeros((3, 3)))
    assert ds.rank == 3
    assert np.allclose(ds.D_P, np.eye(3))


def test_defect_rejects_non_contraction():
    with pytest.raises(NotContractionError) as exc:
        defect(1.1 * np.eye(2))
    assert exc.value.norm == pytest.approx(1.1)


def test_scalar_fundamental_operators_are_q_coordinates():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(2, 6))
        z = disc_rows(rng, 1, n, 0.95)[0]
        pt = symmetrize(z)
        ft = solve_fundamental(OperatorTuple.from_point(pt))
        q = qr_points(pt).q
        for i in range(1, n):
            assert abs(ft.fi(i)[0, 0] - q.si(i)) < 1e-12


def test_zero_p_gives_f_equal_s():
    rng = np.random.default_rng(9)
    s1 = np.diag(rng.standard_normal(4) + 1j * rng.standard_normal(4))
    s2 = np.diag(rng.standard_normal(4))
    t = OperatorTuple.from_matrices([s1, s2], np.zeros((4, 4)))
    ft = solve_fundamental(t)
    assert ft.rank == 4
    assert np.allclose(ft.lift(1), s1, atol=1e-12)
    assert np.allclose(ft.lift(2), s2, atol=1e-12)


def test_counterexample_fundamental_operators():
    model = build_case_a(depth=2)
    ft = solve_fundamental(model.tuple)
    assert ft.rank == 4 * 2 + 2
    assert np.allclose(ft.lift(1), model.core[0], atol=1e-12)
    assert not np.any(ft.fi(2))


def test_inconsistent_right_hand_side():
    t = OperatorTuple.from_matrices([np.diag([0.5j, 0.3])], np.diag([1.0, 0.0]))
    with pytest.raises(InconsistentDefectError) as exc:
        solve_fundamental(t)
    assert exc.value.index == 1
    assert exc.value.residual == pytest.approx(1.0)


def test_trivial_defect_with_nonzero_right_hand_side():
    t = OperatorTuple.from_matrices([0.5 * np.eye(2)], np.diag([1.0, -1.0]))
    with pytest.raises(InconsistentDefectError):
        solve_fundamental(t)


def test_solution_does_not_depend_on_basis():
    rng = np.random.default_rng(11)
    t = diagonal_candidate(rng, 5, 3)
    first = solve_fundamental(t)
    rotated = first.defect.basis @ random_unitary(rng, first.rank)
    second = solve_fundamental(t, basis=rotated)
    for i in (1, 2):
        assert np.allclose(first.lift(i), second.lift(i), atol=1e-8)
        assert np.allclose(
            np.linalg.svd(first.fi(i), compute_uv=False),
            np.linalg.svd(second.fi(i), compute_uv=False),
            atol=1e-8,
        )


def test_foreign_basis_is_rejected():
    t = diagonal_candidate(np.random.default_rng(12), 3, 2)
    with pytest.raises(ValueError):
        solve_fundamental(t, basis=np.zeros((3, 3)))


def test_residuals_on_random_candidates():
    rng = np.random.default_rng(13)
    for _ in range(500):
        n = int(rng.integers(2, 5))
        t = diagonal_candidate(rng, int(rng.integers(1, 6)), n)
        ft = solve_fundamental(t)
        assert max(ft.residuals) <= 1e-8 * max(1.0, t.max_norm())


def test_radius_bound_on_random_candidates():
    rng = np.random.default_rng(14)
    for _ in range(200):
        n = int(rng.integers(2, 5))
        t = diagonal_candidate(rng, int(rng.integers(1, 5)), n, radius=rng.uniform(0.1, 0.95))
        passed, worst = radius_bound_check(solve_fundamental(t), z_grid=16, angles=64)
        assert passed, worst
        assert worst >= -1e-6


def test_radius_bound_of_counterexample():
    ft = solve_fundamental(build_case_a(depth=2).tuple)
    passed, worst = radius_bound_check(ft, z_grid=16)
    assert passed
    assert worst == pytest.approx(3 - 0.125, abs=1e-9)


def test_normal_candidates_are_almost_normal():
    rng = np.random.default_rng(15)
    for _ in range(20):
        t = diagonal_candidate(rng, 4, 5)
        almost_normal, norms = almost_normal_check(solve_fundamental(t))
        assert almost_normal, norms
        assert len(norms) == 2


def test_counterexample_is_not_almost_normal():
    almost_normal, norms = almost_normal_check(solve_fundamental(build_case_a(depth=2).tuple))
    assert not almost_normal
    assert norms[0] == pytest.approx(1 / 16, abs=1e-12)


def test_case_b_defect_matches_commutator_difference():
    model = build_case_b(4, depth=2)
    ft = solve_fundamental(model.tuple)
    s1, _, p = model.core
    _, norms = almost_normal_check(ft)
    expected = np.linalg.norm(
        (s1.conj().T @ s1 - s1 @ s1.conj().T) - (p.conj().T @ p - p @ p.conj().T), 2
    )
    assert norms[0] == pytest.approx(expected, abs=1e-12)
    assert np.allclose(ft.lift(3), p, atol=1e-12)


def test_fundamental_report_shape():
    report = fundamental_report(build_case_a(depth=2).tuple, z_grid=8)
    assert report["n"] == 3
    assert report["radius_bound"]["passed"]
    assert report["almost_normal"] is False
    assert report["fundamental"]["rank"] == 10


def test_fundamental_report_sweeps_the_radius_grid_once(monkeypatch):
    calls = []
    original = fundamental_ops.radius_margins

    def counting(*args, **kwargs):
        calls.append(args)
        return original(*args, **kwargs)

    monkeypatch.setattr(fundamental_ops, "radius_margins", counting)
    t = build_case_a(depth=2).tuple
    report = fundamental_report(t, z_grid=8)
    assert len(calls) == 1
    ft = solve_fundamental(t, z_grid=8)
    assert report["radius_bound"]["worst_margin"] == pytest.approx(min(ft.radius_margins))
    assert report["fundamental"]["radius_margins"] == pytest.approx(list(ft.radius_margins))
