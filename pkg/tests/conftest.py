import os

import numpy as np
import pytest

from vaxalloc import EpidemicInstance, Graph

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")

# frozen parameters of the 247-node preferential-attachment substitute network
SUBSTITUTE_N = 247
SUBSTITUTE_M = 4
SUBSTITUTE_SEED = 1


def ba_edges(n: int, m: int, seed: int):
    """Deterministic preferential-attachment edge list.

    Seed star over the first m+1 nodes, then each new node attaches to m
    distinct existing nodes drawn proportionally to degree.
    """
    rng = np.random.default_rng(seed)
    edges = []
    repeated = []
    for v in range(1, m + 1):
        edges.append((0, v))
        repeated.extend([0, v])
    for u in range(m + 1, n):
        chosen = set()
        while len(chosen) < m:
            chosen.add(int(repeated[rng.integers(len(repeated))]))
        for v in sorted(chosen):
            edges.append((v, u))
            repeated.extend([u, v])
    return edges


def ba_graph(n: int, m: int, seed: int) -> Graph:
    return Graph.from_edges(n, ba_edges(n, m, seed))


def random_connected_graph(rng: np.random.Generator, n: int, extra_edge_prob: float = 0.3) -> Graph:
    """Random spanning tree plus extra edges; always connected."""
    edges = []
    for v in range(1, n):
        edges.append((int(rng.integers(v)), v))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < extra_edge_prob:
                edges.append((u, v))
    return Graph.from_edges(n, edges)


def random_instance(
    rng: np.random.Generator,
    n: int,
    eps_frac: float = 0.0,
    cost_form: str | None = "affine",
    multiplier_range=(1.2, 2.6),
) -> EpidemicInstance:
    """Random protocol-style instance, always feasible by saturation."""
    from vaxalloc.spectral import adjacency_lambda_max

    graph = random_connected_graph(rng, n)
    delta = float(rng.uniform(0.1, 1.0))
    lam1 = adjacency_lambda_max(graph)
    mult = float(rng.uniform(*multiplier_range))
    beta_hi = mult * delta / lam1
    beta_lo = 0.2 * beta_hi
    eps = eps_frac * delta
    return EpidemicInstance.build(
        graph, delta, beta_lo, beta_hi, eps=eps, cost_form=cost_form, t_max=1.0
    )


@pytest.fixture(scope="session")
def substitute_graph() -> Graph:
    from vaxalloc import load_edge_list

    path = os.path.join(FIXTURE_DIR, "substitute_247.edges")
    return load_edge_list(path)


@pytest.fixture
def p2() -> Graph:
    return Graph.from_edges(2, [(0, 1)])


@pytest.fixture
def p3() -> Graph:
    return Graph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def k3() -> Graph:
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def star5() -> Graph:
    return Graph.from_edges(5, [(0, i) for i in range(1, 5)])
