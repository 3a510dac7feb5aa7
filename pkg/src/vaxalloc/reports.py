"""Plot-ready CSV bundles: cost curves, cost-vs-degree, per-degree and
per-centrality vaccination profiles, and the method-comparison summary."""

from __future__ import annotations

import os

import numpy as np

from .combinatorial import DiscreteAllocation, greedy_forward, greedy_reverse, threshold_baseline
from .costs import CostFunction, cost_eval
from .fractional import FractionalAllocation
from .graph import Graph, eigenvector_centrality
from .instance import EpidemicInstance


def _csv(header: str, rows) -> str:
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def cost_curve_csv(f: CostFunction, points: int = 201) -> str:
    """Sampled cost function, endpoints exact; columns carry both axes."""
    betas = np.linspace(f.beta_lo, f.beta_hi, points)
    rows = [(float(b), cost_eval(f, float(b))) for b in betas]
    return _csv("beta,cost", rows)


def cost_vs_degree_csv(inst: EpidemicInstance, alloc: FractionalAllocation) -> str:
    """One row per node: optimal vaccination spend against node degree."""
    if inst.costs is None:
        raise ValueError("cost-vs-degree report needs cost functions")
    degrees = inst.graph.degrees
    rows = [
        (cost_eval(inst.costs[i], float(alloc.beta[i])), int(degrees[i]))
        for i in range(inst.n)
    ]
    return _csv("cost,degree", rows)


def degree_fraction_rows(graph: Graph, alloc: DiscreteAllocation):
    """Fraction of nodes of each degree vaccinated by the allocation."""
    degrees = graph.degrees
    vaccinated = set(alloc.vaccinated)
    rows = []
    for deg in sorted(set(int(d) for d in degrees)):
        nodes = [i for i in range(graph.n) if degrees[i] == deg]
        frac = sum(1 for i in nodes if i in vaccinated) / len(nodes)
        rows.append((deg, frac, alloc.method))
    return rows


def degree_fraction_csv(graph: Graph, allocs) -> str:
    rows = []
    for alloc in allocs:
        rows.extend(degree_fraction_rows(graph, alloc))
    return _csv("degree,fraction_vaccinated,method", rows)


def centrality_cumulative_rows(graph: Graph, alloc: DiscreteAllocation):
    """Cumulative vaccinated fraction among the top-k centrality nodes.

    Rank 1 is the highest-centrality node; ties rank the lower index first.
    """
    centrality = eigenvector_centrality(graph)
    order = sorted(range(graph.n), key=lambda i: (-centrality[i], i))
    vaccinated = set(alloc.vaccinated)
    rows = []
    covered = 0
    for rank, node in enumerate(order, start=1):
        if node in vaccinated:
            covered += 1
        rows.append((rank, covered / rank, alloc.method))
    return rows


def centrality_cumulative_csv(graph: Graph, allocs) -> str:
    rows = []
    for alloc in allocs:
        rows.extend(centrality_cumulative_rows(graph, alloc))
    return _csv("centrality_rank,cumulative_fraction,method", rows)


def summary_csv(entries) -> str:
    """Method-comparison table: one row per (method, multiplier) pair.

    Each entry is (method, multiplier, objective_cb, margin, dual_bound).
    """
    return _csv("method,multiplier,objective_cb,margin,dual_bound", entries)


def sweep_instance(
    graph: Graph,
    delta: float,
    eps: float,
    multiplier: float,
    vaccine_effect: float,
    cost_form: str | None,
    cost_t_max,
) -> EpidemicInstance:
    """Instance for one point of the multiplier sweep: beta_hi = m * beta_c."""
    from .spectral import critical_beta

    beta_hi = multiplier * critical_beta(graph, delta)
    return EpidemicInstance.build(
        graph,
        delta,
        vaccine_effect * beta_hi,
        beta_hi,
        eps=eps,
        cost_form=cost_form,
        t_max=cost_t_max,
    )


def run_discrete_methods(inst: EpidemicInstance) -> dict[str, DiscreteAllocation]:
    """The four combinatorial methods on one instance, keyed by method name."""
    return {
        "greedy": greedy_forward(inst),
        "reverse-greedy": greedy_reverse(inst),
        "degree": threshold_baseline(inst, "degree"),
        "centrality": threshold_baseline(inst, "centrality"),
    }


def protocol_sweep(
    graph: Graph,
    delta: float,
    eps: float,
    multipliers,
    vaccine_effect: float,
    cost_form: str | None,
    cost_t_max,
    dual_iters: int,
    out_dir: str | None = None,
    include_fractional: bool = True,
):
    """Run every method across the multiplier sweep; emit figure bundles.

    Returns the summary rows (method, multiplier, objective_cb, margin,
    dual_bound). When out_dir is given, writes per-multiplier CSV bundles
    and result JSON files there.
    """
    from . import files
    from .dual import solve_dual
    from .fractional import solve_fractional, verify_allocation

    summary_rows = []
    for mult in multipliers:
        inst = sweep_instance(graph, delta, eps, mult, vaccine_effect, cost_form, cost_t_max)
        tag = f"{mult:g}"
        allocs = run_discrete_methods(inst)
        cert = solve_dual(inst, iters=dual_iters)
        for method, alloc in allocs.items():
            summary_rows.append(
                (method, float(mult), alloc.objective_cb, alloc.margin, cert.value)
            )
        if out_dir is not None:
            for method, alloc in allocs.items():
                files.write_result(
                    files.discrete_result(alloc, verify_allocation(inst, alloc)),
                    os.path.join(out_dir, f"result_{method}_m{tag}.json"),
                )
            best = max(allocs.values(), key=lambda a: a.objective_cb)
            files.write_result(
                files.certificate_result(cert, inst, gap=cert.value - best.objective_cb),
                os.path.join(out_dir, f"certificate_m{tag}.json"),
            )
            with open(
                os.path.join(out_dir, f"fig3_degree_fraction_m{tag}.csv"),
                "w",
                encoding="utf-8",
                newline="\n",
            ) as fh:
                fh.write(degree_fraction_csv(graph, allocs.values()))
            with open(
                os.path.join(out_dir, f"fig4_centrality_cumulative_m{tag}.csv"),
                "w",
                encoding="utf-8",
                newline="\n",
            ) as fh:
                fh.write(centrality_cumulative_csv(graph, allocs.values()))
            if inst.costs is not None:
                with open(
                    os.path.join(out_dir, f"fig1_cost_curve_m{tag}.csv"),
                    "w",
                    encoding="utf-8",
                    newline="\n",
                ) as fh:
                    fh.write(cost_curve_csv(inst.costs[0]))
            if include_fractional and inst.costs is not None:
                frac = solve_fractional(inst)
                files.write_result(
                    files.fractional_result(frac, verify_allocation(inst, frac)),
                    os.path.join(out_dir, f"result_fractional_m{tag}.json"),
                )
                with open(
                    os.path.join(out_dir, f"fig2_cost_vs_degree_m{tag}.csv"),
                    "w",
                    encoding="utf-8",
                    newline="\n",
                ) as fh:
                    fh.write(cost_vs_degree_csv(inst, frac))
    return summary_rows
