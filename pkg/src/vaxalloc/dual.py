"""Lagrangian-dual upper bound on the all-or-nothing vaccination objective.

For any PSD matrix Z, relaxing the semidefinite stability constraint gives a
per-node decoupled maximization whose value

    q(Z) = sum_i u_i - trace(A Z),
    u_i  = max(c_i beta_hi_i + ((delta_i - eps)/beta_hi_i) Z_ii,
               c_i beta_lo_i + ((delta_i - eps)/beta_lo_i) Z_ii)

upper-bounds the best achievable c^T b (weak duality). Minimizing q over the
PSD cone by projected subgradient descent tightens the bound; every iterate
is itself a valid bound, so the running minimum is sound regardless of how
far the descent got.

The epigraph multipliers here carry (delta_i - eps) so the dual matches the
primal constraint (D - eps*I) B^{-1} - A >= 0 for any decay target; with
eps = 0 the coefficients reduce to delta_i / beta_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .combinatorial import DiscreteAllocation
from .instance import EpidemicInstance
from .spectral import psd_project, symmetric_extreme_eigenvalue

DEFAULT_ITERS = 2000
FIXING_FORCE_HI = "force_hi"
FIXING_FORCE_LO = "force_lo"
FIXING_UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class DualCertificate:
    """Best dual bound found, with the PSD matrix and epigraph values behind it."""

    z: np.ndarray
    u: np.ndarray
    value: float
    iterations: int
    eps: float

    def fixings(self, inst: EpidemicInstance, slack: float | None = None) -> list[str]:
        return threshold_fixings(self, inst, slack)


def _check_psd(z: np.ndarray, n: int, tol: float = 1e-8) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (n, n):
        raise ValueError(f"Z must be {n}x{n}")
    if np.max(np.abs(z - z.T)) > 1e-9 * max(1.0, float(np.max(np.abs(z)))):
        raise ValueError("Z must be symmetric")
    if symmetric_extreme_eigenvalue(z, "min") < -tol:
        raise ValueError("Z must be positive semidefinite")
    return z


def _branch_values(inst: EpidemicInstance, z_diag: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = inst.prices()
    d_eff = inst.delta - inst.eps
    hi_branch = c * inst.beta_hi + (d_eff / inst.beta_hi) * z_diag
    lo_branch = c * inst.beta_lo + (d_eff / inst.beta_lo) * z_diag
    return hi_branch, lo_branch


def dual_value(z: np.ndarray, inst: EpidemicInstance) -> tuple[float, np.ndarray]:
    """Dual objective and epigraph vector u at a PSD matrix Z.

    Any PSD Z yields a valid upper bound on the combinatorial optimum.
    """
    z = _check_psd(z, inst.n)
    hi_branch, lo_branch = _branch_values(inst, np.diag(z))
    u = np.maximum(hi_branch, lo_branch)
    value = float(u.sum() - np.trace(inst.graph.adjacency @ z))
    return value, u


def _subgradient(inst: EpidemicInstance, z_diag: np.ndarray) -> np.ndarray:
    """Subgradient of the dual objective in Z; ties take the beta_hi branch."""
    hi_branch, lo_branch = _branch_values(inst, z_diag)
    beta_star = np.where(hi_branch >= lo_branch, inst.beta_hi, inst.beta_lo)
    return np.diag((inst.delta - inst.eps) / beta_star) - inst.graph.adjacency


def solve_dual(
    inst: EpidemicInstance,
    iters: int = DEFAULT_ITERS,
    step0: float | None = None,
    warm_start_threshold: bool = False,
) -> DualCertificate:
    """Projected subgradient descent on the dual over the PSD cone.

    Steps shrink as step0 / sqrt(k); each iterate is projected back onto the
    cone and evaluated, and the certificate keeps the minimum value seen.
    Progress need not be monotone per-iterate; the reported bound is.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    n = inst.n
    a = inst.graph.adjacency
    if warm_start_threshold:
        z = np.diag(fixing_thresholds(inst))
    else:
        z = np.zeros((n, n))
    best_value, best_u = dual_value(z, inst)
    best_z = z.copy()
    if step0 is None:
        a_norm = float(np.linalg.norm(a))
        if a_norm == 0:
            a_norm = 1.0
        step0 = best_u.sum() / (n * a_norm)
    for k in range(1, iters):
        grad = _subgradient(inst, np.diag(z))
        z = psd_project(z - (step0 / np.sqrt(k)) * grad)
        hi_branch, lo_branch = _branch_values(inst, np.diag(z))
        u = np.maximum(hi_branch, lo_branch)
        value = float(u.sum() - np.trace(a @ z))
        if value < best_value:
            best_value = value
            best_u = u
            best_z = z.copy()
    return DualCertificate(z=best_z, u=best_u, value=best_value, iterations=iters, eps=inst.eps)


def fixing_thresholds(inst: EpidemicInstance) -> np.ndarray:
    """Per-node Z_ii value where the two epigraph branches meet."""
    c = inst.prices()
    return c * inst.beta_hi * inst.beta_lo / (inst.delta - inst.eps)


def threshold_fixings(
    cert: DualCertificate, inst: EpidemicInstance, slack: float | None = None
) -> list[str]:
    """Read primal actions off the dual diagonal where it is decisive.

    Z_ii below the branch threshold forces beta_hi (leave unvaccinated),
    above forces beta_lo (vaccinate); within slack of the threshold the
    node is undetermined. Decisiveness is exact only at a dual optimum;
    subgradient output approximates one, so treat labels as advisory.
    """
    thresholds = fixing_thresholds(inst)
    z_diag = np.diag(cert.z)
    labels = []
    for i in range(inst.n):
        node_slack = 1e-6 * thresholds[i] if slack is None else slack
        if z_diag[i] < thresholds[i] - node_slack:
            labels.append(FIXING_FORCE_HI)
        elif z_diag[i] > thresholds[i] + node_slack:
            labels.append(FIXING_FORCE_LO)
        else:
            labels.append(FIXING_UNDETERMINED)
    return labels


def certificate_gap(alloc: DiscreteAllocation, cert: DualCertificate) -> float:
    """Distance from the allocation's objective to the dual bound.

    Nonnegative for every feasible allocation by weak duality; the true
    optimality gap is at most this number.
    """
    return cert.value - alloc.objective_cb
