"""
Synthetic grid generators.
Ring, star, tree, path and complete topologies with optional seeded susceptance jitter.
"""

from typing import Any, Dict, Optional

import networkx as nx
import numpy as np

from gridplace.utils.exceptions import InvalidParameterError

TOPOLOGIES = ("ring", "star", "tree", "path", "complete")


def topology(kind: str, n: int, rng: np.random.Generator) -> nx.Graph:
    """Graph on nodes 0..n-1 of the requested kind."""
    if n < 2:
        raise InvalidParameterError("n", f"synthetic grids need at least two buses, got {n}")
    if kind == "ring":
        return nx.cycle_graph(n) if n > 2 else nx.path_graph(n)
    if kind == "star":
        return nx.star_graph(n - 1)
    if kind == "path":
        return nx.path_graph(n)
    if kind == "complete":
        return nx.complete_graph(n)
    if kind == "tree":
        graph = nx.Graph()
        graph.add_node(0)
        for node in range(1, n):
            graph.add_edge(int(rng.integers(0, node)), node)
        return graph
    raise InvalidParameterError("kind", f"expected one of {TOPOLOGIES}, got '{kind}'")


def make_grid(
    kind: str,
    n: int,
    susceptance: float = 1.0,
    jitter: float = 0.0,
    seed: int = 0,
    inertia: float = 1.0,
    damping: Optional[float] = None,
    power: float = 0.0,
) -> Dict[str, Any]:
    """
    Grid document for a synthetic network.

    Args:
        kind: ring, star, tree, path or complete
        n: Number of buses
        susceptance: Nominal line susceptance
        jitter: Relative uniform susceptance jitter, lifts symmetric degeneracies
        seed: Seed of the numpy generator
        inertia: Inertia of every bus
        damping: Damping of every bus, inertia * min(1, sqrt(lambda_2)) by default so that
            every mode of the flat-angle Laplacian is underdamped
        power: Amplitude of alternating injections, rebalanced to sum to zero

    Returns:
        Dictionary in the grid JSON layout, every bus a generator
    """
    rng = np.random.default_rng(seed)
    graph = topology(kind, n, rng)

    injections = power * (-1.0) ** np.arange(n)
    injections -= injections.mean()

    lines = []
    for source, target in sorted(graph.edges()):
        factor = 1.0 + jitter * rng.uniform(-1.0, 1.0) if jitter else 1.0
        graph[source][target]["susceptance"] = susceptance * factor
        lines.append({"from": str(source + 1), "to": str(target + 1), "susceptance": susceptance * factor})

    if damping is None:
        damping = inertia * default_damping_ratio(graph)

    return {
        "base_mva": 100.0,
        "buses": [
            {
                "id": str(i + 1),
                "power": float(injections[i]),
                "inertia": inertia,
                "damping": damping,
                "is_generator": True,
            }
            for i in range(n)
        ],
        "lines": lines,
    }


def default_damping_ratio(graph: nx.Graph) -> float:
    """min(1, sqrt(lambda_2)): keeps 4 lambda_2 - gamma^2 >= 3 lambda_2 on the flat-angle Laplacian."""
    connectivity = float(nx.laplacian_spectrum(graph, weight="susceptance")[1])
    return min(1.0, float(np.sqrt(connectivity)))
