import numpy as np
import pytest

from counterexample import (
    BlockLayout,
    build_case_a,
    build_case_b,
    build_model,
    case_of,
    cf_lower_bound_check,
    cf_two_by_two,
    comparison_norms,
    expected_defect,
    linear_collapse_check,
    shift_operator,
    verify_obstruction,
    x_operator,
)
from numerics_core import operator_norm
from operator_tuples import CertKind, von_neumann_sample
from polynomials import Polynomial

GOLDEN = (1 + np.sqrt(5)) / 2


def test_layout_blocks_and_edge():
    lay = BlockLayout(3)
    assert lay.dim == 24
    assert lay.block(2) == slice(12, 18)
    assert lay.edge.tolist() == [10, 11]
    assert lay.second_half.size == 12
    assert lay.interior_kernel.size == 10
    with pytest.raises(IndexError):
        lay.block(4)


def test_shift_and_x_operators():
    v = shift_operator(3)
    assert np.array_equal(v.T @ v, np.diag([1, 1, 1, 1, 0, 0]))
    x = x_operator(3, 0.25)
    assert not np.any(x @ x)
    assert not np.any(x @ v)
    assert operator_norm(x) == pytest.approx(0.25)
    assert operator_norm(x.T @ x - x @ x.T) > 0


def test_case_a_members():
    model = build_case_a(depth=4)
    t = model.tuple
    assert (t.n, t.dim) == (3, 32)
    assert not np.any(t.si(2))
    assert operator_norm(t.si(1)) == pytest.approx(0.25)
    assert operator_norm(t.P) == pytest.approx(1.0)
    assert t.commute_residual == 0.0
    assert model.case == "A"


def test_core_products_vanish_exactly():
    s1, s2, p = build_case_a(depth=5).core
    for a in (s1, s2, p):
        for b in (s1, s2, p):
            if a is not b:
                assert not np.any(a @ b)


def test_case_b_members():
    model = build_case_b(5, depth=2)
    t = model.tuple
    assert t.n == 5
    assert np.array_equal(t.si(3), model.core[2])
    assert not np.any(t.si(4))
    assert not np.any(t.P)
    assert model.case == "B"
    with pytest.raises(ValueError):
        build_case_b(3)


def test_builder_validation():
    with pytest.raises(ValueError):
        build_model(2)
    with pytest.raises(ValueError):
        build_case_a(depth=1)
    with pytest.raises(ValueError):
        build_case_a(eta=0.0)
    with pytest.raises(ValueError):
        build_case_a(eta=1.5)


def test_expected_defect():
    assert expected_defect(build_case_a(depth=2)) == pytest.approx(1 / 16)
    assert expected_defect(build_case_b(5, depth=2)) == pytest.approx(1 / 16)


def test_linear_collapse_examples():
    model = build_case_a(depth=3)
    product = Polynomial.from_terms(3, {(1, 1, 0): 1})
    square = Polynomial.from_terms(3, {(0, 0, 2): 1})
    assert linear_collapse_check(model, polynomials=[product, square]) == 0.0
    assert linear_collapse_check(model, trials=500, degree=6, seed=3) == 0.0


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("depth", [2, 8])
def test_obstruction_is_confirmed(n, depth):
    model = build_model(n, depth)
    report = verify_obstruction(model, vn_trials=1000, vn_degree=6, torus_grid=48, seed=42)
    assert all(c.passed for c in report.hypothesis_checks), report.hypothesis_checks
    assert all(c.passed for c in report.edge_checks), report.edge_checks
    assert all(c.passed for c in report.fot_checks), report.fot_checks
    assert report.almost_normal is False
    assert report.headline_defect == pytest.approx(report.expected_defect, abs=1e-12)
    assert report.contraction_evidence.kind is CertKind.GAMMA_CONTRACTION_CONSISTENT
    assert report.linear_collapse_residual == 0.0
    assert report.obstruction_confirmed
    if n != 4:
        assert report.headline_defect == pytest.approx(1 / 16, abs=1e-12)


@pytest.mark.parametrize("n", [3, 5])
@pytest.mark.parametrize("depth", [2, 4, 8, 16])
@pytest.mark.parametrize("eta", [0.125, 0.25, 0.5])
def test_obstruction_persists_across_depth_and_eta(n, depth, eta):
    model = build_model(n, depth, eta)
    report = verify_obstruction(
        model, vn_trials=1, vn_degree=2, torus_grid=16, collapse_trials=50, seed=1
    )
    assert all(c.passed for c in report.hypothesis_checks), report.hypothesis_checks
    assert all(c.passed for c in report.edge_checks), report.edge_checks
    assert all(c.passed for c in report.fot_checks), report.fot_checks
    assert report.almost_normal is False
    assert report.headline_defect == pytest.approx(eta**2, abs=1e-12)
    assert report.linear_collapse_residual == 0.0


@pytest.mark.parametrize("depth", [2, 8])
def test_case_b_fundamental_operators_are_the_padded_tuple(depth):
    model = build_case_b(5, depth=depth)
    ft = verify_obstruction(model, vn_trials=1, vn_degree=2, collapse_trials=10).fot
    t = model.tuple
    assert ft.n == 5
    assert not np.any(ft.lift(4))
    for i in (1, 2, 3):
        assert operator_norm(ft.lift(i) - t.si(i)) <= 1e-12
    assert operator_norm(ft.lift(1) - model.core[0]) <= 1e-12
    assert operator_norm(ft.lift(3) - model.core[2]) <= 1e-12


@pytest.mark.parametrize("n", [3, 4])
def test_contraction_evidence_survives_finer_torus_grids(n):
    model = build_model(n, depth=2)
    reports = [
        von_neumann_sample(model.tuple, degree=6, trials=200, torus_grid=g, seed=5)
        for g in (48, 96)
    ]
    for report in reports:
        assert report.kind is CertKind.GAMMA_CONTRACTION_CONSISTENT
        assert report.details["violations"] == 0


def test_obstruction_report_is_json_ready():
    data = verify_obstruction(build_case_a(depth=2), vn_trials=20).to_dict()
    assert data["model"]["case"] == "A"
    assert data["obstruction_confirmed"] is True
    assert data["fundamental"]["rank"] == 10
    assert set(data["structural"]) >= {"X^2", "XV", "S1P", "PS1"}


def test_cf_two_by_two_examples():
    assert cf_two_by_two(1, 1) == pytest.approx(GOLDEN, abs=1e-12)
    assert cf_two_by_two(0, 1) == pytest.approx(1.0)
    assert cf_two_by_two(1, 0) == pytest.approx(1.0)


def test_cf_lower_bound_is_respected():
    assert cf_lower_bound_check(1, 1, trials=2000, degree=6, torus_grid=1024) >= -1e-6
    assert abs(cf_lower_bound_check(0, 1, trials=200)) < 1e-12
    assert abs(cf_lower_bound_check(1, 0, trials=200)) < 1e-12
    with pytest.raises(ValueError):
        cf_lower_bound_check(1, 1, torus_grid=2)


def test_case_of():
    assert case_of(0.1, 0.5) == "case-1"
    assert case_of(0.5, 0.5) == "case-1"
    assert case_of(0.6, 0.5) == "case-2"


@pytest.mark.parametrize("regime", ["case-1", "case-2"])
def test_comparison_norms_are_ordered(regime):
    rng = np.random.default_rng(7 if regime == "case-1" else 8)
    seen = 0
    while seen < 10_000:
        a0, a1, a3 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        if case_of(a0, a1) != regime:
            continue
        first, second = comparison_norms(a0, a1, a3, eta=0.25)
        assert first <= second + 1e-12
        seen += 1
