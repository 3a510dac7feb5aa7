"""All-or-nothing vaccination: greedy heuristics, centrality baselines, exhaustive oracle.

A discrete allocation fixes each node at beta_lo (vaccinated) or beta_hi
(unvaccinated). Minimizing total vaccination cost is equivalent to maximizing
the objective c^T b = sum_i c_i beta_i, which all methods here report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import EpidemicInstance
from .spectral import FEASIBILITY_SLACK, lambda_max_effective, stability_margin

EXHAUSTIVE_NODE_LIMIT = 16


@dataclass(frozen=True)
class DiscreteAllocation:
    """Vaccinated set with its objective, cost, spectral margin, and provenance."""

    vaccinated: tuple[int, ...]
    beta: np.ndarray
    objective_cb: float
    total_cost: float
    margin: float
    method: str
    order: tuple[int, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.margin >= -1e-6


def beta_for_set(inst: EpidemicInstance, vaccinated) -> np.ndarray:
    beta = inst.beta_hi.copy()
    idx = list(vaccinated)
    beta[idx] = inst.beta_lo[idx]
    return beta


def _allocation(inst: EpidemicInstance, vaccinated, method: str, order=()) -> DiscreteAllocation:
    vaccinated = tuple(sorted(int(i) for i in vaccinated))
    beta = beta_for_set(inst, vaccinated)
    prices = inst.prices()
    objective = float(prices @ beta)
    cost = float(prices[list(vaccinated)].sum()) if vaccinated else 0.0
    margin = stability_margin(inst.graph, inst.rates_at(beta), inst.eps)
    return DiscreteAllocation(
        vaccinated=vaccinated,
        beta=beta,
        objective_cb=objective,
        total_cost=cost,
        margin=margin,
        method=method,
        order=tuple(int(i) for i in order),
    )


def _lambda_for_set(inst: EpidemicInstance, vaccinated) -> float:
    return lambda_max_effective(inst.graph, inst.rates_at(beta_for_set(inst, vaccinated)))


def _set_is_stable(inst: EpidemicInstance, vaccinated) -> bool:
    beta = beta_for_set(inst, vaccinated)
    return inst.margin_at(beta) >= -FEASIBILITY_SLACK


def marginal_benefit(i: int, vaccinated: set | frozenset, inst: EpidemicInstance) -> float:
    """Eigenvalue drop per unit cost from adding node i to the vaccinated set.

    Both eigenvalues are recomputed in full; the spreading matrix's
    eigenvectors shift with the vaccinated set, so perturbation shortcuts
    would misrank candidates.
    """
    if i in vaccinated:
        raise ValueError(f"node {i} already vaccinated")
    price = float(inst.prices()[i])
    if price <= 0:
        raise ValueError(f"node {i} has nonpositive vaccination price {price}")
    before = _lambda_for_set(inst, vaccinated)
    after = _lambda_for_set(inst, set(vaccinated) | {i})
    return (before - after) / price


def greedy_forward(inst: EpidemicInstance) -> DiscreteAllocation:
    """Add the best benefit-per-cost node until the decay target is met.

    Ties break toward the lowest node index. Feasibility by saturation
    guarantees termination no later than the full vaccination set.
    """
    n = inst.n
    prices = inst.prices()
    chosen: list[int] = []
    member = np.zeros(n, dtype=bool)
    while True:
        current = _lambda_for_set(inst, chosen)
        if current <= -inst.eps + FEASIBILITY_SLACK:
            break
        best_i = -1
        best_gain = -np.inf
        for i in range(n):
            if member[i]:
                continue
            after = _lambda_for_set(inst, chosen + [i])
            gain = (current - after) / prices[i]
            if gain > best_gain + 1e-15:
                best_gain = gain
                best_i = i
        chosen.append(best_i)
        member[best_i] = True
    return _allocation(inst, chosen, "greedy", order=chosen)


def greedy_reverse(inst: EpidemicInstance) -> DiscreteAllocation:
    """Start fully vaccinated, drop the least-valuable node while staying feasible.

    Each step removes the member whose vaccination buys the smallest
    eigenvalue drop per unit cost; the walk stops just before the first
    removal that would violate the decay target and returns the last
    feasible set. Ties break toward the lowest node index.
    """
    n = inst.n
    prices = inst.prices()
    current_set = list(range(n))
    removed_order: list[int] = []
    while current_set:
        lam_full = _lambda_for_set(inst, current_set)
        worst_j = -1
        worst_benefit = np.inf
        lam_without_worst = None
        for j in current_set:
            rest = [k for k in current_set if k != j]
            lam_without = _lambda_for_set(inst, rest)
            benefit = (lam_without - lam_full) / prices[j]
            if benefit < worst_benefit - 1e-15:
                worst_benefit = benefit
                worst_j = j
                lam_without_worst = lam_without
        if lam_without_worst > -inst.eps + FEASIBILITY_SLACK:
            break
        current_set = [k for k in current_set if k != worst_j]
        removed_order.append(worst_j)
    return _allocation(inst, current_set, "reverse-greedy", order=removed_order)


def threshold_baseline(inst: EpidemicInstance, ranking: str) -> DiscreteAllocation:
    """Vaccinate nodes in decreasing rank order until the decay target holds.

    ranking is "degree" or "centrality" (dominant adjacency eigenvector).
    Returns the minimal feasible prefix; ties rank the lower index first.
    """
    from .graph import eigenvector_centrality

    if ranking == "degree":
        scores = inst.graph.degrees.astype(float)
    elif ranking == "centrality":
        scores = eigenvector_centrality(inst.graph)
    else:
        raise ValueError(f"unknown ranking {ranking!r}; expected 'degree' or 'centrality'")
    order = sorted(range(inst.n), key=lambda i: (-scores[i], i))
    for k in range(inst.n + 1):
        prefix = order[:k]
        if _set_is_stable(inst, prefix):
            return _allocation(inst, prefix, ranking, order=prefix)
    raise AssertionError("saturated set must be feasible by construction")


def exhaustive_optimum(inst: EpidemicInstance) -> DiscreteAllocation:
    """Maximize c^T b over all feasible vaccination sets by enumeration.

    Guarded at n <= 16. Among equal objectives the earliest subset in mask
    order (smallest bitmask integer) wins, which keeps reruns identical.
    """
    n = inst.n
    if n > EXHAUSTIVE_NODE_LIMIT:
        raise ValueError(f"exhaustive search limited to n <= {EXHAUSTIVE_NODE_LIMIT}, got {n}")
    prices = inst.prices()
    best_mask = None
    best_obj = -np.inf
    for mask in range(1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        beta = beta_for_set(inst, members)
        obj = float(prices @ beta)
        if obj <= best_obj:
            continue
        if inst.margin_at(beta) >= -FEASIBILITY_SLACK:
            best_obj = obj
            best_mask = mask
    members = [i for i in range(n) if best_mask >> i & 1]
    return _allocation(inst, members, "exhaustive")
