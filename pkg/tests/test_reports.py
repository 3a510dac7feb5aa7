import numpy as np
import pytest

from vaxalloc import EpidemicInstance, Graph, greedy_reverse, solve_fractional
from vaxalloc.costs import CostFunction
from vaxalloc.reports import (
    centrality_cumulative_rows,
    cost_curve_csv,
    cost_vs_degree_csv,
    degree_fraction_rows,
    protocol_sweep,
    summary_csv,
)


def test_cost_curve_endpoints_published_parameters():
    f = CostFunction("reciprocal", 1.75e-3, 8.66e-3, 1.0)
    lines = cost_curve_csv(f).strip().splitlines()
    assert lines[0] == "beta,cost"
    first = [float(x) for x in lines[1].split(",")]
    last = [float(x) for x in lines[-1].split(",")]
    assert first == pytest.approx([1.75e-3, 1.0], abs=1e-12)
    assert last == pytest.approx([8.66e-3, 0.0], abs=1e-12)


def test_cost_vs_degree_rows(star5):
    inst = EpidemicInstance.build(star5, 0.1, 0.02, 0.08, cost_form="reciprocal", t_max=1.0)
    alloc = solve_fractional(inst)
    lines = cost_vs_degree_csv(inst, alloc).strip().splitlines()
    assert lines[0] == "cost,degree"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 5
    assert int(rows[0][1]) == 4  # hub degree
    assert all(int(r[1]) == 1 for r in rows[1:])


def test_star_reverse_greedy_degree_profile(star5):
    # reverse greedy on a star should keep only the hub vaccinated
    beta_hi = 1.5 * 0.1 / 2.0  # lambda1(star5) = 2
    inst = EpidemicInstance.build(star5, 0.1, 0.2 * beta_hi, beta_hi, cost_form=None)
    alloc = greedy_reverse(inst)
    assert alloc.vaccinated == (0,)
    rows = degree_fraction_rows(star5, alloc)
    by_degree = {deg: frac for deg, frac, _ in rows}
    assert by_degree[4] == 1.0
    assert by_degree[1] == 0.0


def test_centrality_cumulative_starts_at_top(star5):
    beta_hi = 1.5 * 0.1 / 2.0
    inst = EpidemicInstance.build(star5, 0.1, 0.2 * beta_hi, beta_hi, cost_form=None)
    alloc = greedy_reverse(inst)
    rows = centrality_cumulative_rows(star5, alloc)
    assert rows[0][0] == 1
    assert rows[0][1] == 1.0  # the hub has the top centrality and is vaccinated
    fracs = [r[1] for r in rows]
    assert all(0.0 <= f <= 1.0 for f in fracs)


def test_summary_csv_layout():
    text = summary_csv([("greedy", 1.2, 2.5, 0.01, 2.6)])
    lines = text.strip().splitlines()
    assert lines[0] == "method,multiplier,objective_cb,margin,dual_bound"
    assert lines[1].startswith("greedy,1.2,2.5,")


def test_protocol_sweep_small_network(tmp_path):
    g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)])
    rows = protocol_sweep(
        graph=g,
        delta=0.1,
        eps=0.0,
        multipliers=[1.3, 2.0],
        vaccine_effect=0.2,
        cost_form="reciprocal",
        cost_t_max=1.0,
        dual_iters=300,
        out_dir=str(tmp_path),
        include_fractional=True,
    )
    methods = {r[0] for r in rows}
    assert methods == {"greedy", "reverse-greedy", "degree", "centrality"}
    assert len(rows) == 8
    for _, _, objective, margin, dual_bound in rows:
        assert margin >= -1e-6
        assert objective <= dual_bound + 1e-9
    for mult in ("1.3", "2"):
        for stem in (
            f"fig1_cost_curve_m{mult}.csv",
            f"fig2_cost_vs_degree_m{mult}.csv",
            f"fig3_degree_fraction_m{mult}.csv",
            f"fig4_centrality_cumulative_m{mult}.csv",
            f"certificate_m{mult}.json",
            f"result_fractional_m{mult}.json",
        ):
            assert (tmp_path / stem).exists(), stem
