"""Per-node vaccination cost functions.

Two concrete forms ship:

* ``reciprocal``: t_max * (beta^-1 - beta_hi^-1) / (beta_lo^-1 - beta_hi^-1),
  the equality case of the curvature condition f'' >= -(2/beta) f' that makes
  the gamma-substituted program convex.
* ``affine``: c * (beta - beta_hi) / (beta_lo - beta_hi), used by the
  all-or-nothing allocation where only the endpoint values matter.

Both are zero at beta_hi (no vaccination) and reach their maximum t_max at
beta_lo (full vaccination), decreasing in between.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FORMS = ("reciprocal", "affine")


@dataclass(frozen=True)
class CostFunction:
    form: str
    beta_lo: float
    beta_hi: float
    t_max: float

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown cost form {self.form!r}; expected one of {FORMS}")
        if not (0 < self.beta_lo < self.beta_hi):
            raise ValueError(
                f"need 0 < beta_lo < beta_hi, got beta_lo={self.beta_lo}, beta_hi={self.beta_hi}"
            )
        if self.t_max < 0:
            raise ValueError(f"maximum cost must be nonnegative, got {self.t_max}")

    def __call__(self, beta: float) -> float:
        return cost_eval(self, beta)


def cost_eval(f: CostFunction, beta: float) -> float:
    """Cost of holding the infection rate at ``beta``; domain [beta_lo, beta_hi]."""
    tol = 1e-12 * f.beta_hi
    if beta < f.beta_lo - tol or beta > f.beta_hi + tol:
        raise ValueError(f"beta={beta} outside [{f.beta_lo}, {f.beta_hi}]")
    beta = min(max(beta, f.beta_lo), f.beta_hi)
    if f.form == "reciprocal":
        return f.t_max * (1.0 / beta - 1.0 / f.beta_hi) / (1.0 / f.beta_lo - 1.0 / f.beta_hi)
    return f.t_max * (beta - f.beta_hi) / (f.beta_lo - f.beta_hi)


def cost_derivatives(f: CostFunction, beta: float) -> tuple[float, float]:
    """Analytic (f', f'') for the built-in forms."""
    if f.form == "reciprocal":
        scale = f.t_max / (1.0 / f.beta_lo - 1.0 / f.beta_hi)
        return -scale / beta**2, 2.0 * scale / beta**3
    slope = f.t_max / (f.beta_lo - f.beta_hi)
    return slope, 0.0


def check_assumption1(f: CostFunction, grid_points: int = 64) -> tuple[bool, float, float]:
    """Check f''(beta) >= -(2/beta) f'(beta) on a uniform grid.

    Derivatives come from central finite differences with step
    (beta_hi - beta_lo) / 1e4. Returns (passed, worst_residual, worst_beta)
    where the residual is f'' + (2/beta) f' (negative means violation) and
    the pass tolerance is 1e-6 absolute.
    """
    if grid_points < 8:
        raise ValueError("need at least 8 grid points")
    h = (f.beta_hi - f.beta_lo) / 1e4
    grid = np.linspace(f.beta_lo + h, f.beta_hi - h, grid_points)
    worst_res = np.inf
    worst_beta = grid[0]
    for beta in grid:
        fp = (cost_eval(f, beta + h) - cost_eval(f, beta - h)) / (2 * h)
        fpp = (cost_eval(f, beta + h) - 2 * cost_eval(f, beta) + cost_eval(f, beta - h)) / h**2
        res = fpp + (2.0 / beta) * fp
        if res < worst_res:
            worst_res = res
            worst_beta = beta
    return worst_res >= -1e-6, float(worst_res), float(worst_beta)


def total_cost(fs, betas) -> float:
    """Sum of per-node costs at the given rate vector."""
    betas = np.asarray(betas, dtype=float)
    if len(fs) != betas.shape[0]:
        raise ValueError(f"{len(fs)} cost functions but {betas.shape[0]} rates")
    return float(sum(cost_eval(f, b) for f, b in zip(fs, betas)))


def trace_objective_constants(fs) -> tuple[float, float]:
    """Constants (a, b) with sum_i f_i(beta_i) = a * sum_i gamma_i - b.

    Requires every cost to be reciprocal with identical bounds and identical
    maximum cost, the case where minimizing total cost reduces to minimizing
    the trace of Gamma = diag(1/beta_i).
    """
    first = fs[0]
    for f in fs:
        if f.form != "reciprocal":
            raise ValueError("trace reduction needs reciprocal costs")
        if (f.beta_lo, f.beta_hi, f.t_max) != (first.beta_lo, first.beta_hi, first.t_max):
            raise ValueError("trace reduction needs homogeneous cost parameters")
    a = first.t_max / (1.0 / first.beta_lo - 1.0 / first.beta_hi)
    b = a * len(fs) / first.beta_hi
    return a, b


def combinatorial_transform_constants(fs) -> tuple[float, float]:
    """Constants (a_C, b_C) with sum_i f_i(beta_i) = a_C * sum_i c_i beta_i - b_C.

    Valid when the vaccination interval width beta_lo - beta_hi is the same
    for every node; c_i is the full-vaccination cost t_max. a_C is negative,
    so minimizing total cost maximizes c^T b.
    """
    width = fs[0].beta_lo - fs[0].beta_hi
    for f in fs:
        if abs((f.beta_lo - f.beta_hi) - width) > 1e-15 * abs(width):
            raise ValueError("affine transform needs a homogeneous interval width")
    a_c = 1.0 / width
    b_c = a_c * sum(f.t_max * f.beta_hi for f in fs)
    return a_c, b_c
