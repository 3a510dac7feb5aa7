import itertools

import numpy as np
import pytest

from vaxalloc import (
    EpidemicInstance,
    Graph,
    estimate_decay_rate,
    simulate_meanfield,
    solve_fractional,
    solve_trace_sdp,
    verify_allocation,
)
from vaxalloc.fractional import CutBudgetError

from conftest import ba_graph, random_instance
from oracles import brute_grid_optimum, grid_search_optimum, node_cost_vectorized


def p2_instance():
    g = Graph.from_edges(2, [(0, 1)])
    return EpidemicInstance.build(g, 0.1, 0.05, 0.2, eps=0.0, cost_form="reciprocal", t_max=1.0)


def test_isolated_node_needs_no_vaccination():
    g = Graph.from_edges(1, [])
    inst = EpidemicInstance.build(g, 0.3, 0.02, 0.1, eps=0.05, cost_form="reciprocal", t_max=2.0)
    alloc = solve_fractional(inst)
    assert alloc.beta[0] == pytest.approx(0.1, rel=1e-12)
    assert alloc.total_cost == pytest.approx(0.0, abs=1e-12)


def test_p2_symmetric_closed_form():
    # constraint reduces to delta^2 gamma1 gamma2 >= 1: optimum gamma = (10, 10)
    alloc = solve_fractional(p2_instance())
    assert np.max(np.abs(alloc.gamma - 10.0)) <= 1e-3
    assert alloc.margin >= -1e-6


def test_p2_grid_oracle_agreement():
    inst = p2_instance()
    alloc = solve_fractional(inst)
    grid = grid_search_optimum(inst, resolution=200)
    assert abs(alloc.total_cost - grid) <= 0.01 * grid
    # oracle cross-check against plain eigenvalue enumeration
    assert grid_search_optimum(inst, resolution=41) == pytest.approx(
        brute_grid_optimum(inst, 41), abs=1e-12
    )


def test_p2_trace_specialization():
    inst = p2_instance()
    tr = solve_trace_sdp(inst)
    assert float(tr.gamma.sum()) == pytest.approx(20.0, abs=2e-3)
    frac = solve_fractional(inst)
    assert tr.total_cost == pytest.approx(frac.total_cost, abs=1e-6)


def test_trace_requires_homogeneous_delta(k3):
    inst = EpidemicInstance.build(
        k3, [0.3, 0.31, 0.3], 0.02, 0.1, cost_form="reciprocal", t_max=1.0
    )
    with pytest.raises(ValueError, match="homogeneous"):
        solve_trace_sdp(inst)


def test_k3_matches_grid(k3):
    inst = EpidemicInstance.build(k3, 0.3, 0.02, 0.12, eps=0.0, cost_form="reciprocal", t_max=1.0)
    alloc = solve_fractional(inst)
    grid = grid_search_optimum(inst, resolution=200)
    assert abs(alloc.total_cost - grid) <= 0.01 * grid
    assert alloc.margin >= -1e-6


def test_already_stable_instance_costs_nothing(k3):
    inst = EpidemicInstance.build(k3, 0.5, 0.02, 0.1, eps=0.0, cost_form="reciprocal", t_max=1.0)
    tr = solve_trace_sdp(inst)
    assert np.allclose(tr.beta, 0.1, rtol=1e-12)
    assert tr.total_cost == pytest.approx(0.0, abs=1e-9)


def test_box_bounds_respected_exactly():
    rng = np.random.default_rng(21)
    for _ in range(10):
        inst = random_instance(rng, int(rng.integers(2, 7)), cost_form="reciprocal")
        alloc = solve_fractional(inst)
        assert np.all(alloc.gamma >= inst.gamma_lo - 1e-12)
        assert np.all(alloc.gamma <= inst.gamma_hi + 1e-12)
        assert alloc.margin >= -1e-6


def test_objective_monotone_in_eps():
    rng = np.random.default_rng(33)
    for _ in range(8):
        n = int(rng.integers(2, 7))
        inst0 = random_instance(rng, n, eps_frac=0.0, cost_form="reciprocal")
        inst1 = EpidemicInstance.build(
            inst0.graph,
            inst0.delta,
            inst0.beta_lo,
            inst0.beta_hi,
            eps=0.25 * float(inst0.delta.min()),
            cost_form="reciprocal",
            t_max=1.0,
        )
        c0 = solve_fractional(inst0).total_cost
        c1 = solve_fractional(inst1).total_cost
        assert c1 >= c0 - 1e-6 * (1 + abs(c0))


def test_lower_bound_is_sound():
    rng = np.random.default_rng(41)
    for _ in range(6):
        inst = random_instance(rng, int(rng.integers(2, 5)), cost_form="reciprocal")
        alloc = solve_fractional(inst)
        assert alloc.lower_bound <= alloc.total_cost + 1e-6 * (1 + abs(alloc.total_cost))
        grid = grid_search_optimum(inst, resolution=120)
        # the relaxation can never claim more than the true optimum
        assert alloc.lower_bound <= grid + 1e-6 * (1 + abs(grid))


def test_affine_costs_lower_bound_discrete():
    from vaxalloc.combinatorial import exhaustive_optimum

    rng = np.random.default_rng(55)
    for _ in range(6):
        inst = random_instance(rng, int(rng.integers(2, 7)), cost_form="affine")
        frac = solve_fractional(inst)
        ex = exhaustive_optimum(inst)
        assert frac.total_cost <= ex.total_cost + 1e-6 * (1 + abs(ex.total_cost))
        assert frac.margin >= -1e-6


def test_verify_allocation_roundtrip():
    inst = p2_instance()
    alloc = solve_fractional(inst)
    report = verify_allocation(inst, alloc)
    assert report["feasible"]
    assert report["margin"] == pytest.approx(alloc.margin, abs=1e-12)
    assert report["cost"] == pytest.approx(alloc.total_cost, abs=1e-9)


def test_verify_detects_infeasible_natural_rates():
    inst = p2_instance()

    class Candidate:
        beta = inst.beta_hi

    report = verify_allocation(inst, Candidate())
    assert not report["feasible"]
    assert report["cost"] == pytest.approx(0.0, abs=1e-12)


def test_verify_detects_active_constraint_perturbation():
    inst = p2_instance()
    alloc = solve_fractional(inst)

    class Candidate:
        gamma = alloc.gamma.copy()
        gamma[0] *= 1 - 1e-3
        beta = 1.0 / gamma

    report = verify_allocation(inst, Candidate())
    assert not report["feasible"]


def test_simulation_closure():
    rng = np.random.default_rng(61)
    inst = random_instance(rng, 6, eps_frac=0.3, cost_form="reciprocal")
    alloc = solve_fractional(inst)
    rates = inst.rates_at(alloc.beta)
    from vaxalloc import lambda_max_effective

    lam = lambda_max_effective(inst.graph, rates)
    assert lam <= -inst.eps + 1e-6
    traj = simulate_meanfield(inst.graph, rates, np.full(6, 0.5), min(30.0 / inst.eps, 300.0))
    assert estimate_decay_rate(traj) >= 0.95 * inst.eps


def test_cut_budget_error_carries_incumbent():
    inst = p2_instance()
    with pytest.raises(CutBudgetError) as err:
        solve_fractional(inst, max_cuts=0)
    incumbent = err.value.incumbent
    assert incumbent is not None
    assert incumbent.margin >= -1e-6
    assert err.value.violation > 0


def test_large_instance_uses_warm_start_and_certifies_gap():
    g = ba_graph(60, 3, 2)
    from vaxalloc.spectral import adjacency_lambda_max

    delta = 0.1
    beta_hi = 1.8 * delta / adjacency_lambda_max(g)
    inst = EpidemicInstance.build(g, delta, 0.2 * beta_hi, beta_hi, cost_form="reciprocal", t_max=1.0)
    alloc = solve_fractional(inst)
    assert alloc.margin >= -1e-6
    assert alloc.total_cost - alloc.lower_bound <= 1e-6 * (1 + abs(alloc.total_cost))
    rng = np.random.default_rng(4)
    from vaxalloc.fractional import _restore_feasible

    for _ in range(5):
        gamma = inst.gamma_lo + rng.random(60) * (inst.gamma_hi - inst.gamma_lo)
        feasible_gamma = _restore_feasible(inst, gamma)
        cost = sum(
            float(node_cost_vectorized(inst, np.array([feasible_gamma[i]]), i)[0])
            for i in range(60)
        )
        assert cost >= alloc.lower_bound - 1e-9


def test_solver_deterministic():
    inst = p2_instance()
    a = solve_fractional(inst)
    b = solve_fractional(inst)
    assert np.array_equal(a.gamma, b.gamma)
    assert a.total_cost == b.total_cost
