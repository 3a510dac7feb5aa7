"""Forward simulation of networked SIS dynamics.

Three views of the same outbreak: the nonlinear mean-field ODEs, the linear
system that upper-bounds them trajectory-wise, and exact continuous-time
Monte Carlo on the full state space for small networks.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .spectral import RateMatrices

MARKOV_NODE_LIMIT = 20
DEFAULT_SAMPLE_POINTS = 64


@dataclass(frozen=True)
class Trajectory:
    """Time grid and per-time per-node infection probabilities."""

    times: np.ndarray
    states: np.ndarray  # shape (len(times), n)

    def __post_init__(self):
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("times and states disagree in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self) -> str:
        n = self.states.shape[1]
        header = "t," + ",".join(f"p_{i}" for i in range(n))
        lines = [header]
        for t, row in zip(self.times, self.states):
            lines.append(",".join([repr(float(t))] + [repr(float(x)) for x in row]))
        return "\n".join(lines) + "\n"


def default_step(g: Graph, rates: RateMatrices) -> float:
    """Step small against the fastest rate: 0.01 / max(max beta_i d_i, max delta_i)."""
    scale = max(float(np.max(rates.beta * g.degrees)), float(np.max(rates.delta)))
    return 0.01 / scale


def _time_grid(t_end: float, dt: float) -> np.ndarray:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < dt:
        raise ValueError("t_end must be at least dt")
    n_full = int(math.floor(t_end / dt + 1e-12))
    times = dt * np.arange(n_full + 1)
    if times[-1] < t_end - 1e-12 * t_end:
        times = np.append(times, t_end)
    return times


def _integrate_rk4(deriv, p0: np.ndarray, times: np.ndarray, clamp: bool) -> np.ndarray:
    states = np.empty((times.shape[0], p0.shape[0]))
    states[0] = p0
    p = p0.copy()
    for k in range(1, times.shape[0]):
        h = times[k] - times[k - 1]
        k1 = deriv(p)
        k2 = deriv(p + 0.5 * h * k1)
        k3 = deriv(p + 0.5 * h * k2)
        k4 = deriv(p + h * k3)
        p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if clamp:
            np.clip(p, 0.0, 1.0, out=p)
        states[k] = p
    return states


def _check_p0(p0, n: int) -> np.ndarray:
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (n,):
        raise ValueError(f"p0 must have length {n}")
    if np.any(p0 < 0) or np.any(p0 > 1):
        raise ValueError("p0 must lie in [0, 1] per node")
    return p0


def simulate_meanfield(
    g: Graph, rates: RateMatrices, p0, t_end: float, dt: float | None = None
) -> Trajectory:
    """Fixed-step RK4 on dp_i/dt = (1 - p_i) beta_i sum_j a_ij p_j - delta_i p_i.

    States are clamped to [0, 1] after every step.
    """
    p0 = _check_p0(p0, g.n)
    if dt is None:
        dt = default_step(g, rates)
    a = g.adjacency
    beta = rates.beta
    delta = rates.delta

    def deriv(p):
        return (1.0 - p) * beta * (a @ p) - delta * p

    times = _time_grid(t_end, dt)
    return Trajectory(times, _integrate_rk4(deriv, p0, times, clamp=True))


def simulate_linear_bound(
    g: Graph, rates: RateMatrices, p0, t_end: float, dt: float | None = None
) -> Trajectory:
    """Fixed-step RK4 on the linear dominating system dp/dt = (B A - D) p.

    Intentionally unclamped; values may exceed 1.
    """
    p0 = _check_p0(p0, g.n)
    if dt is None:
        dt = default_step(g, rates)
    a = g.adjacency
    beta = rates.beta
    delta = rates.delta

    def deriv(p):
        return beta * (a @ p) - delta * p

    times = _time_grid(t_end, dt)
    return Trajectory(times, _integrate_rk4(deriv, p0, times, clamp=False))


def estimate_decay_rate(traj: Trajectory, window_fraction: float = 0.5) -> float:
    """Least-squares slope of -log ||p(t)||_inf on the trailing window.

    Returns +inf when the norm hits zero anywhere in the window (decay faster
    than any exponential the grid can resolve).
    """
    if not (0 < window_fraction <= 1):
        raise ValueError("window_fraction must lie in (0, 1]")
    norms = np.max(np.abs(traj.states), axis=1)
    start = int(math.floor(norms.shape[0] * (1 - window_fraction)))
    start = min(start, norms.shape[0] - 2)
    window = norms[start:]
    times = traj.times[start:]
    if np.any(window <= 0):
        return math.inf
    slope = np.polyfit(times, -np.log(window), 1)[0]
    return float(slope)


@dataclass(frozen=True)
class MarkovEstimate:
    """Monte Carlo marginals of the exact SIS Markov process."""

    times: np.ndarray
    marginals: np.ndarray  # shape (len(times), n): mean infection indicator
    stderr: np.ndarray  # same shape: standard error of each marginal
    trials: int


def simulate_exact_markov(
    g: Graph,
    rates: RateMatrices,
    x0,
    t_end: float,
    trials: int,
    seed: int,
    sample_points: int = DEFAULT_SAMPLE_POINTS,
) -> MarkovEstimate:
    """Event-driven simulation of the exact 2^n-state SIS Markov process.

    A susceptible node gets infected at rate beta_i times its number of
    infected neighbors; an infected node recovers at rate delta_i. Marginals
    are averaged over independent trials, each driven by its own stream
    seeded as seed + trial index, so results are reproducible and the guard
    n <= 20 keeps this honest to its validation role.
    """
    n = g.n
    if n > MARKOV_NODE_LIMIT:
        raise ValueError(f"exact simulation limited to n <= {MARKOV_NODE_LIMIT}, got {n}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    x0 = np.asarray(x0)
    if x0.shape != (n,) or not np.all((x0 == 0) | (x0 == 1)):
        raise ValueError("x0 must be a binary vector of length n")
    if sample_points < 2:
        raise ValueError("need at least 2 sample points")

    sample_times = np.linspace(0.0, t_end, sample_points)
    neigh = [list(nb) for nb in g.neighbors]
    beta = [float(b) for b in rates.beta]
    delta = [float(d) for d in rates.delta]
    counts = np.zeros((sample_points, n))

    for trial in range(trials):
        rng = random.Random(seed + trial)
        infected = [bool(v) for v in x0]
        # rate[i]: recovery rate if infected, infection pressure if susceptible
        rate = [0.0] * n
        for i in range(n):
            if infected[i]:
                rate[i] = delta[i]
            else:
                rate[i] = beta[i] * sum(infected[j] for j in neigh[i])
        total = sum(rate)
        t = 0.0
        k = 0
        while k < sample_points:
            if total <= 1e-300:
                # absorbed (disease-free): remaining samples all read the frozen state
                break
            dt = rng.expovariate(total)
            t_next = t + dt
            while k < sample_points and sample_times[k] <= t_next:
                for i in range(n):
                    if infected[i]:
                        counts[k, i] += 1.0
                k += 1
            if k >= sample_points:
                break
            t = t_next
            # pick the event node proportionally to its rate
            target = rng.random() * total
            acc = 0.0
            node = n - 1
            for i in range(n):
                acc += rate[i]
                if target < acc:
                    node = i
                    break
            if infected[node]:
                infected[node] = False
                total -= rate[node]
                rate[node] = beta[node] * sum(infected[j] for j in neigh[node])
                total += rate[node]
                for j in neigh[node]:
                    if not infected[j]:
                        total -= beta[j]
                        rate[j] -= beta[j]
            else:
                infected[node] = True
                total -= rate[node]
                rate[node] = delta[node]
                total += rate[node]
                for j in neigh[node]:
                    if not infected[j]:
                        rate[j] += beta[j]
                        total += beta[j]
            total = max(total, 0.0)
        # frozen tail after absorption
        while k < sample_points:
            for i in range(n):
                if infected[i]:
                    counts[k, i] += 1.0
            k += 1

    marginals = counts / trials
    stderr = np.sqrt(marginals * (1.0 - marginals) / trials)
    return MarkovEstimate(sample_times, marginals, stderr, trials)
