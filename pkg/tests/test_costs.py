import numpy as np
import pytest

from vaxalloc import CostFunction, check_assumption1, cost_eval, total_cost
from vaxalloc.costs import combinatorial_transform_constants, cost_derivatives, trace_objective_constants


def test_reciprocal_endpoints():
    f = CostFunction("reciprocal", 0.05, 0.2, 3.0)
    assert cost_eval(f, 0.2) == 0.0
    assert cost_eval(f, 0.05) == pytest.approx(3.0, abs=1e-12)


def test_reciprocal_published_curve_point():
    f = CostFunction("reciprocal", 1.75e-3, 8.66e-3, 1.0)
    assert cost_eval(f, 3e-3) == pytest.approx(0.4778, abs=1e-4)


def test_affine_midpoint():
    f = CostFunction("affine", 0.05, 0.2, 2.0)
    assert cost_eval(f, 0.125) == pytest.approx(1.0, abs=1e-12)


def test_domain_error_outside_bounds():
    f = CostFunction("reciprocal", 0.05, 0.2, 1.0)
    with pytest.raises(ValueError):
        cost_eval(f, 0.3)
    with pytest.raises(ValueError):
        cost_eval(f, 0.04)


def test_degenerate_bounds_rejected():
    with pytest.raises(ValueError):
        CostFunction("reciprocal", 0.1, 0.1, 1.0)
    with pytest.raises(ValueError):
        CostFunction("affine", 0.3, 0.2, 1.0)


def test_unknown_form_and_negative_cost_rejected():
    with pytest.raises(ValueError):
        CostFunction("tabulated", 0.1, 0.2, 1.0)
    with pytest.raises(ValueError):
        CostFunction("affine", 0.1, 0.2, -1.0)


def test_assumption1_reciprocal_passes():
    # O(1) rate scale keeps the finite-difference residual clean
    f = CostFunction("reciprocal", 0.5, 2.0, 1.0)
    passed, worst, _ = check_assumption1(f)
    assert passed
    assert worst >= -1e-6


def test_assumption1_affine_fails():
    # f'' = 0 while f' < 0, so the curvature bound -(2/beta) f' is positive
    f = CostFunction("affine", 0.5, 2.0, 1.0)
    passed, worst, where = check_assumption1(f)
    assert not passed
    fp, fpp = cost_derivatives(f, where)
    assert worst == pytest.approx(fpp + (2.0 / where) * fp, rel=1e-3)


def test_assumption1_needs_enough_grid_points():
    f = CostFunction("reciprocal", 0.5, 2.0, 1.0)
    with pytest.raises(ValueError):
        check_assumption1(f, grid_points=4)


def test_monotone_decreasing_both_forms():
    for form in ("reciprocal", "affine"):
        f = CostFunction(form, 0.05, 0.2, 1.5)
        grid = np.linspace(0.05, 0.2, 1000)
        vals = [cost_eval(f, b) for b in grid]
        assert all(a > b for a, b in zip(vals, vals[1:]))


def test_total_cost_endpoints():
    fs = [CostFunction("reciprocal", 0.05, 0.2, t) for t in (1.0, 2.0, 0.5)]
    assert total_cost(fs, [0.2, 0.2, 0.2]) == 0.0
    assert total_cost(fs, [0.05, 0.05, 0.05]) == pytest.approx(3.5, abs=1e-12)


def test_total_cost_matches_trace_identity():
    rng = np.random.default_rng(8)
    fs = [CostFunction("reciprocal", 0.05, 0.2, 2.0) for _ in range(6)]
    a, b = trace_objective_constants(fs)
    for _ in range(25):
        betas = rng.uniform(0.05, 0.2, 6)
        gammas = 1.0 / betas
        assert total_cost(fs, betas) == pytest.approx(a * gammas.sum() - b, abs=1e-10)


def test_trace_constants_require_homogeneous_reciprocal():
    fs = [CostFunction("reciprocal", 0.05, 0.2, 1.0), CostFunction("reciprocal", 0.05, 0.2, 2.0)]
    with pytest.raises(ValueError):
        trace_objective_constants(fs)
    with pytest.raises(ValueError):
        trace_objective_constants([CostFunction("affine", 0.05, 0.2, 1.0)])


def test_combinatorial_transform_identity_at_endpoints():
    rng = np.random.default_rng(12)
    fs = [CostFunction("affine", 0.05, 0.2, float(t)) for t in rng.uniform(0.5, 3.0, 8)]
    a_c, b_c = combinatorial_transform_constants(fs)
    assert a_c < 0
    for _ in range(20):
        mask = rng.random(8) < 0.5
        betas = np.where(mask, 0.05, 0.2)
        direct = total_cost(fs, betas)
        cb = float(sum(f.t_max * b for f, b in zip(fs, betas)))
        assert direct == pytest.approx(a_c * cb - b_c, abs=1e-10)


def test_gamma_substitution_convexity_for_reciprocal():
    # the composed map gamma -> f(1/gamma) must be convex when the curvature
    # condition holds; finite-difference second derivative on a grid
    f = CostFunction("reciprocal", 0.5, 2.0, 1.0)
    gammas = np.linspace(1.0 / 2.0, 1.0 / 0.5, 200)[1:-1]
    h = 1e-4
    for g in gammas:
        fdd = (
            cost_eval(f, 1.0 / (g + h)) - 2 * cost_eval(f, 1.0 / g) + cost_eval(f, 1.0 / (g - h))
        ) / h**2
        assert fdd >= -1e-6


def test_gamma_substitution_concave_for_affine():
    f = CostFunction("affine", 0.5, 2.0, 1.0)
    g = 1.0
    h = 1e-4
    fdd = (
        cost_eval(f, 1.0 / (g + h)) - 2 * cost_eval(f, 1.0 / g) + cost_eval(f, 1.0 / (g - h))
    ) / h**2
    assert fdd < 0
