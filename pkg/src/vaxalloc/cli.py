"""Command-line interface: analyze, allocate, certify, simulate, report.

Exit codes: 0 success, 2 infeasible instance (the decay target is
unreachable even at full vaccination), 1 usage or IO errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import files, reports
from .combinatorial import exhaustive_optimum, greedy_forward, greedy_reverse, threshold_baseline
from .dual import certificate_gap, solve_dual
from .dynamics import simulate_exact_markov, simulate_linear_bound, simulate_meanfield
from .fractional import solve_fractional, verify_allocation
from .graph import EdgeListError, load_edge_list
from .instance import InfeasibleInstanceError
from .spectral import adjacency_lambda_max, critical_beta

ALLOCATE_MODES = ("fractional", "greedy", "reverse-greedy", "degree", "centrality", "exhaustive")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="vaxalloc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analyze", help="graph spectrum and degree summary")
    p_an.add_argument("--graph", required=True)
    p_an.add_argument("--delta", type=float, default=0.1)
    p_an.add_argument("--out")

    p_al = sub.add_parser("allocate", help="solve one allocation problem")
    p_al.add_argument("--params", required=True)
    p_al.add_argument("--mode", required=True, choices=ALLOCATE_MODES)
    p_al.add_argument("--out", required=True)
    p_al.add_argument("--eps", type=float, default=None, help="override the params eps")
    p_al.add_argument("--tol", type=float, default=1e-6)

    p_ce = sub.add_parser("certify", help="dual upper bound for an allocation")
    p_ce.add_argument("--params", required=True)
    p_ce.add_argument("--allocation", required=True)
    p_ce.add_argument("--out", required=True)
    p_ce.add_argument("--iters", type=int, default=2000)
    p_ce.add_argument("--eps", type=float, default=None)
    p_ce.add_argument("--export-z", dest="export_z")

    p_si = sub.add_parser("simulate", help="integrate or sample the epidemic")
    p_si.add_argument("--params", required=True)
    p_si.add_argument("--allocation", help="apply this allocation's rates")
    p_si.add_argument("--mode", choices=("meanfield", "linear", "gillespie"), default="meanfield")
    p_si.add_argument("--t-end", type=float, default=50.0)
    p_si.add_argument("--dt", type=float, default=None)
    p_si.add_argument("--p0", type=float, default=0.5, help="uniform initial infection probability")
    p_si.add_argument("--trials", type=int, default=2000)
    p_si.add_argument("--seed", type=int, default=None, help="override the params seed")
    p_si.add_argument("--eps", type=float, default=None)
    p_si.add_argument("--out", required=True)

    p_re = sub.add_parser("report", help="multiplier sweep with figure bundles")
    p_re.add_argument("--params", required=True)
    p_re.add_argument("--multipliers", default="1.2,1.8,2.4")
    p_re.add_argument("--out-dir", required=True)
    p_re.add_argument("--dual-iters", type=int, default=2000)
    p_re.add_argument("--eps", type=float, default=None)
    p_re.add_argument("--skip-fractional", action="store_true")
    return parser


def _load(args):
    spec = files.load_instance_spec(args.params)
    if getattr(args, "eps", None) is not None:
        spec = files.InstanceSpec(
            graph_path=spec.graph_path,
            delta=spec.delta,
            beta_bar_multiplier=spec.beta_bar_multiplier,
            beta_bar=spec.beta_bar,
            vaccine_effect=spec.vaccine_effect,
            eps=args.eps,
            cost_form=spec.cost_form,
            cost_t_max=spec.cost_t_max,
            seed=spec.seed,
        )
    return spec, spec.resolve(os.path.dirname(os.path.abspath(args.params)))


def _cmd_analyze(args) -> int:
    graph = load_edge_list(args.graph)
    lam1 = adjacency_lambda_max(graph)
    degrees = graph.degrees
    payload = {
        "n": graph.n,
        "m": graph.m,
        "lambda1": float(lam1),
        "beta_c": float(critical_beta(graph, args.delta)) if graph.m else None,
        "delta": args.delta,
        "degrees": {
            "min": int(degrees.min()),
            "max": int(degrees.max()),
            "mean": float(degrees.mean()),
        },
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_allocate(args) -> int:
    _, (graph, inst) = _load(args)
    if args.mode == "fractional":
        alloc = solve_fractional(inst, tol=args.tol)
        payload = files.fractional_result(alloc, verify_allocation(inst, alloc))
    else:
        if args.mode == "greedy":
            alloc = greedy_forward(inst)
        elif args.mode == "reverse-greedy":
            alloc = greedy_reverse(inst)
        elif args.mode == "degree":
            alloc = threshold_baseline(inst, "degree")
        elif args.mode == "centrality":
            alloc = threshold_baseline(inst, "centrality")
        else:
            alloc = exhaustive_optimum(inst)
        payload = files.discrete_result(alloc, verify_allocation(inst, alloc))
    files.write_result(payload, args.out)
    return 0


def _cmd_certify(args) -> int:
    _, (graph, inst) = _load(args)
    alloc = files.load_allocation_file(args.allocation, inst)
    cert = solve_dual(inst, iters=args.iters)
    payload = files.certificate_result(cert, inst, gap=certificate_gap(alloc, cert))
    files.write_result(payload, args.out)
    if args.export_z:
        with open(args.export_z, "w", encoding="utf-8", newline="\n") as fh:
            for row in cert.z:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
    return 0


def _cmd_simulate(args) -> int:
    spec, (graph, inst) = _load(args)
    if args.allocation:
        alloc = files.load_allocation_file(args.allocation, inst)
        beta = alloc.beta
    else:
        beta = inst.beta_hi
    rates = inst.rates_at(beta)
    if args.mode == "gillespie":
        seed = spec.seed if args.seed is None else args.seed
        x0 = (np.full(graph.n, args.p0) >= 0.5).astype(int)
        est = simulate_exact_markov(graph, rates, x0, args.t_end, args.trials, seed)
        header = "t," + ",".join(f"p_{i}" for i in range(graph.n))
        lines = [header]
        for t, row in zip(est.times, est.marginals):
            lines.append(",".join([repr(float(t))] + [repr(float(x)) for x in row]))
        text = "\n".join(lines) + "\n"
    else:
        p0 = np.full(graph.n, args.p0)
        sim = simulate_meanfield if args.mode == "meanfield" else simulate_linear_bound
        traj = sim(graph, rates, p0, args.t_end, args.dt)
        text = traj.to_csv()
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return 0


def _cmd_report(args) -> int:
    spec, (graph, inst_base) = _load(args)
    multipliers = [float(tok) for tok in args.multipliers.split(",") if tok]
    if not multipliers:
        raise files.SchemaError("--multipliers", "need at least one multiplier")
    os.makedirs(args.out_dir, exist_ok=True)
    delta = np.asarray(spec.delta, dtype=float)
    if delta.ndim != 0 and np.ptp(delta) > 0:
        raise files.SchemaError("$.delta", "the multiplier sweep needs a scalar curing rate")
    delta_value = float(delta) if delta.ndim == 0 else float(delta.flat[0])
    summary_rows = reports.protocol_sweep(
        graph=graph,
        delta=delta_value,
        eps=spec.eps,
        multipliers=multipliers,
        vaccine_effect=spec.vaccine_effect,
        cost_form=spec.cost_form,
        cost_t_max=spec.cost_t_max,
        dual_iters=args.dual_iters,
        out_dir=args.out_dir,
        include_fractional=not args.skip_fractional,
    )
    with open(os.path.join(args.out_dir, "summary.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(reports.summary_csv(summary_rows))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "analyze": _cmd_analyze,
        "allocate": _cmd_allocate,
        "certify": _cmd_certify,
        "simulate": _cmd_simulate,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except InfeasibleInstanceError as exc:
        sys.stderr.write(f"infeasible instance: {exc}\n")
        return 2
    except (files.SchemaError, EdgeListError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
