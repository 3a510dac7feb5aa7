"""Parameter files, result files, and their schemas.

The instance parameter file is JSON:

    {
      "graph_path": "network.edges",
      "delta": 0.1,                    # scalar or per-node list
      "beta_bar_multiplier": 1.8,      # beta_hi = multiplier * beta_c, or
      "beta_bar": [...],               #   an explicit scalar/list instead
      "vaccine_effect": 0.2,           # beta_lo = effect * beta_hi
      "eps": 0.0,
      "cost": {"form": "reciprocal", "t_max": 1.0},   # or null
      "seed": 1
    }

Result files are JSON objects matching each solver's export schema, plus a
"verification" stanza with an independently recomputed margin and cost.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .combinatorial import DiscreteAllocation, beta_for_set
from .dual import DualCertificate, threshold_fixings
from .fractional import FractionalAllocation
from .graph import Graph, load_edge_list
from .instance import EpidemicInstance
from .spectral import critical_beta


class SchemaError(ValueError):
    """A parameter or result file is missing or mistypes a field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.field_path = path


@dataclass(frozen=True)
class InstanceSpec:
    """Declarative instance description, resolved against a graph on load."""

    graph_path: str
    delta: float | list
    beta_bar_multiplier: float | None
    beta_bar: float | list | None
    vaccine_effect: float
    eps: float
    cost_form: str | None
    cost_t_max: float | list
    seed: int

    def resolve(self, base_dir: str = ".") -> tuple[Graph, EpidemicInstance]:
        path = self.graph_path
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        graph = load_edge_list(path)
        n = graph.n
        delta = np.asarray(self.delta, dtype=float)
        if delta.ndim == 0:
            delta = np.full(n, float(delta))
        if self.beta_bar_multiplier is not None:
            if np.ptp(delta) > 0:
                raise SchemaError(
                    "beta_bar_multiplier", "multiplier form needs a scalar curing rate"
                )
            beta_hi = np.full(n, self.beta_bar_multiplier * critical_beta(graph, float(delta[0])))
        else:
            beta_hi = np.asarray(self.beta_bar, dtype=float)
            if beta_hi.ndim == 0:
                beta_hi = np.full(n, float(beta_hi))
        beta_lo = self.vaccine_effect * beta_hi
        inst = EpidemicInstance.build(
            graph,
            delta,
            beta_lo,
            beta_hi,
            eps=self.eps,
            cost_form=self.cost_form,
            t_max=self.cost_t_max,
        )
        return graph, inst


def _require(obj: dict, key: str, kinds, path: str):
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing required field")
    value = obj[key]
    if not isinstance(value, kinds):
        raise SchemaError(f"{path}.{key}", f"expected {kinds}, got {type(value).__name__}")
    return value


def load_instance_spec(path) -> InstanceSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise SchemaError("$", "params file must hold a JSON object")
    graph_path = _require(raw, "graph_path", str, "$")
    delta = _require(raw, "delta", (int, float, list), "$")
    multiplier = raw.get("beta_bar_multiplier")
    beta_bar = raw.get("beta_bar")
    if (multiplier is None) == (beta_bar is None):
        raise SchemaError("$.beta_bar_multiplier", "give exactly one of beta_bar_multiplier, beta_bar")
    if multiplier is not None and (not isinstance(multiplier, (int, float)) or multiplier <= 0):
        raise SchemaError("$.beta_bar_multiplier", "must be a positive number")
    vaccine_effect = raw.get("vaccine_effect", 0.2)
    if not isinstance(vaccine_effect, (int, float)) or not (0 < vaccine_effect < 1):
        raise SchemaError("$.vaccine_effect", "must be a number in (0, 1)")
    eps = raw.get("eps", 0.0)
    if not isinstance(eps, (int, float)) or eps < 0:
        raise SchemaError("$.eps", "must be a nonnegative number")
    cost = raw.get("cost")
    cost_form = None
    cost_t_max = 1.0
    if cost is not None:
        if not isinstance(cost, dict):
            raise SchemaError("$.cost", "must be an object or null")
        cost_form = _require(cost, "form", str, "$.cost")
        cost_t_max = cost.get("t_max", 1.0)
        if not isinstance(cost_t_max, (int, float, list)):
            raise SchemaError("$.cost.t_max", "must be a number or list")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise SchemaError("$.seed", "must be an integer")
    return InstanceSpec(
        graph_path=graph_path,
        delta=delta,
        beta_bar_multiplier=multiplier,
        beta_bar=beta_bar,
        vaccine_effect=float(vaccine_effect),
        eps=float(eps),
        cost_form=cost_form,
        cost_t_max=cost_t_max,
        seed=seed,
    )


def _dump_json(payload: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def fractional_result(alloc: FractionalAllocation, verification: dict | None = None) -> dict:
    payload = {
        "gamma": [float(x) for x in alloc.gamma],
        "beta": [float(x) for x in alloc.beta],
        "total_cost": float(alloc.total_cost),
        "margin": float(alloc.margin),
        "cuts": int(alloc.cuts),
    }
    if verification is not None:
        payload["verification"] = verification
    return payload


def discrete_result(alloc: DiscreteAllocation, verification: dict | None = None) -> dict:
    payload = {
        "method": alloc.method,
        "vaccinated": [int(i) for i in alloc.vaccinated],
        "objective_cb": float(alloc.objective_cb),
        "total_cost": float(alloc.total_cost),
        "margin": float(alloc.margin),
        "order": [int(i) for i in alloc.order],
    }
    if verification is not None:
        payload["verification"] = verification
    return payload


def certificate_result(
    cert: DualCertificate, inst: EpidemicInstance, gap: float | None = None
) -> dict:
    labels = threshold_fixings(cert, inst)
    return {
        "value": float(cert.value),
        "gap": None if gap is None else float(gap),
        "iterations": int(cert.iterations),
        "eps": float(cert.eps),
        "fixings": {str(i): labels[i] for i in range(inst.n)},
    }


def write_result(payload: dict, path) -> None:
    _dump_json(payload, path)


def load_allocation_file(path, inst: EpidemicInstance) -> DiscreteAllocation:
    """Read a discrete-allocation result file back into an allocation.

    The margin and objective are recomputed from the instance, never trusted
    from the file.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise SchemaError("$", "allocation file must hold a JSON object")
    vaccinated = _require(raw, "vaccinated", list, "$")
    for k, item in enumerate(vaccinated):
        if not isinstance(item, int) or item < 0 or item >= inst.n:
            raise SchemaError(f"$.vaccinated[{k}]", f"expected a node index in 0..{inst.n - 1}")
    method = raw.get("method", "file")
    if not isinstance(method, str):
        raise SchemaError("$.method", "expected a string")
    beta = beta_for_set(inst, vaccinated)
    prices = inst.prices()
    from .spectral import stability_margin

    margin = stability_margin(inst.graph, inst.rates_at(beta), inst.eps)
    return DiscreteAllocation(
        vaccinated=tuple(sorted(int(i) for i in vaccinated)),
        beta=beta,
        objective_cb=float(prices @ beta),
        total_cost=float(prices[list(vaccinated)].sum()) if vaccinated else 0.0,
        margin=float(margin),
        method=method,
        order=tuple(int(i) for i in raw.get("order", [])),
    )
