"""Problem instances: graph, rate bounds, decay target, and vaccination costs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .costs import CostFunction
from .graph import Graph
from .spectral import FEASIBILITY_SLACK, RateMatrices, stability_margin


class InfeasibleInstanceError(ValueError):
    """No allocation can meet the decay target even at full saturation."""


def _as_node_vector(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must be a scalar or length-{n} vector")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EpidemicInstance:
    """An allocation problem: push lambda_1(B*A - D) to at most -eps.

    beta_hi holds the natural (unvaccinated) infection rates, beta_lo the
    fully vaccinated ones. Construction verifies feasibility by saturation:
    the all-beta_lo profile must already meet the decay target, otherwise no
    allocation can and the instance is rejected.
    """

    graph: Graph
    delta: np.ndarray
    beta_lo: np.ndarray
    beta_hi: np.ndarray
    eps: float = 0.0
    costs: tuple[CostFunction, ...] | None = field(default=None)

    def __post_init__(self):
        n = self.graph.n
        delta = _as_node_vector(self.delta, n, "delta")
        beta_lo = _as_node_vector(self.beta_lo, n, "beta_lo")
        beta_hi = _as_node_vector(self.beta_hi, n, "beta_hi")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "beta_lo", beta_lo)
        object.__setattr__(self, "beta_hi", beta_hi)
        if np.any(delta <= 0):
            raise ValueError(f"delta must be positive; node {int(np.argmin(delta))} violates")
        if np.any(beta_lo <= 0):
            raise ValueError(f"beta_lo must be positive; node {int(np.argmin(beta_lo))} violates")
        if np.any(beta_lo > beta_hi):
            node = int(np.argmax(beta_lo - beta_hi))
            raise ValueError(f"beta_lo must not exceed beta_hi; node {node} violates")
        if not (0 <= self.eps < float(np.min(delta))):
            node = int(np.argmin(delta))
            raise ValueError(
                f"eps={self.eps} must lie in [0, min delta); node {node} has delta={delta[node]}"
            )
        if self.costs is not None:
            if len(self.costs) != n:
                raise ValueError(f"{len(self.costs)} cost functions for {n} nodes")
            for i, f in enumerate(self.costs):
                if abs(f.beta_lo - beta_lo[i]) > 1e-12 * beta_hi[i] or abs(
                    f.beta_hi - beta_hi[i]
                ) > 1e-12 * beta_hi[i]:
                    raise ValueError(f"cost bounds disagree with rate bounds at node {i}")
            object.__setattr__(self, "costs", tuple(self.costs))
        margin = stability_margin(self.graph, self.saturated_rates(), self.eps)
        if margin < -FEASIBILITY_SLACK:
            raise InfeasibleInstanceError(
                f"even full vaccination misses the decay target: margin {margin:.3e} < 0"
            )

    @staticmethod
    def build(
        graph: Graph,
        delta,
        beta_lo,
        beta_hi,
        eps: float = 0.0,
        cost_form: str | None = "reciprocal",
        t_max=1.0,
    ) -> "EpidemicInstance":
        """Construct an instance with per-node costs of a single form.

        cost_form None leaves costs unset (unit vaccination prices). Nodes
        with beta_lo == beta_hi are only allowed without cost functions.
        """
        n = graph.n
        beta_lo = _as_node_vector(beta_lo, n, "beta_lo")
        beta_hi = _as_node_vector(beta_hi, n, "beta_hi")
        costs = None
        if cost_form is not None:
            t_max = _as_node_vector(t_max, n, "t_max")
            costs = tuple(
                CostFunction(cost_form, float(beta_lo[i]), float(beta_hi[i]), float(t_max[i]))
                for i in range(n)
            )
        return EpidemicInstance(graph, delta, beta_lo, beta_hi, eps, costs)

    @property
    def n(self) -> int:
        return self.graph.n

    def rates_at(self, beta) -> RateMatrices:
        return RateMatrices(np.asarray(beta, dtype=float), self.delta)

    def saturated_rates(self) -> RateMatrices:
        return RateMatrices(self.beta_lo, self.delta)

    def natural_rates(self) -> RateMatrices:
        return RateMatrices(self.beta_hi, self.delta)

    def margin_at(self, beta) -> float:
        """lambda_min((D - eps*I) diag(1/beta) - A) for a candidate profile."""
        return stability_margin(self.graph, self.rates_at(beta), self.eps)

    def prices(self) -> np.ndarray:
        """Full-vaccination price per node; defaults to 1 when costs are unset."""
        if self.costs is None:
            return np.ones(self.n)
        return np.array([f.t_max for f in self.costs])

    @property
    def gamma_lo(self) -> np.ndarray:
        return 1.0 / self.beta_hi

    @property
    def gamma_hi(self) -> np.ndarray:
        return 1.0 / self.beta_lo
