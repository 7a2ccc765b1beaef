"""Independent ground truth: exhaustive minimization, Viterbi on chains,
minorant certification, shortest-path counting.

Everything here is deliberately written against the definitions, not against
the solver code paths it is used to check.
"""
from __future__ import annotations

import numpy as np

from .model import pairwise_costs, unary_costs

ENUMERATION_GUARD = 10_000_000


class StateSpaceTooLarge(ValueError):
    pass


class MinorantHypothesisError(ValueError):
    """The block is not in a state where the minorant check applies."""


def energy_table(model, phi=None, nodes=None, edges=None):
    """Dense tensor of energies over all labelings of ``nodes``.

    Restricting ``nodes``/``edges`` evaluates the energy of a subgraph.
    Axis i of the result enumerates the labels of nodes[i]; C-order
    flattening therefore lists labelings lexicographically.
    """
    nodes = list(range(model.n_nodes)) if nodes is None else list(nodes)
    edges = model.edges if edges is None else edges
    shape = tuple(model.labels[u] for u in nodes)
    if float(np.prod([float(s) for s in shape])) > ENUMERATION_GUARD:
        raise StateSpaceTooLarge(f"{shape} exceeds the enumeration guard")
    axis = {u: i for i, u in enumerate(nodes)}
    for (u, v) in edges:
        if u not in axis or v not in axis:
            raise ValueError(f"edge ({u},{v}) leaves the node set")
    return _add_pairwise(model, phi, nodes, edges, axis, shape)


def _add_pairwise(model, phi, nodes, edges, axis, shape):
    table = np.zeros(shape)
    for u in nodes:
        view = [None] * len(nodes)
        view[axis[u]] = slice(None)
        table = table + unary_costs(model, phi, u)[tuple(view)]
    for (u, v) in edges:
        t = pairwise_costs(model, phi, u, v)
        view = [None] * len(nodes)
        view[axis[u]] = slice(None)
        view[axis[v]] = slice(None)
        if axis[u] > axis[v]:
            t = t.T
        table = table + t[tuple(view)]
    return table


def brute_force_min(model, phi=None, nodes=None, edges=None):
    """Exact minimum energy and its lexicographically smallest argmin."""
    nodes = list(range(model.n_nodes)) if nodes is None else list(nodes)
    table = energy_table(model, phi, nodes, edges)
    flat = int(np.argmin(table))
    y = np.unravel_index(flat, table.shape)
    return float(table.min()), np.array(y, dtype=np.int64)


def chain_min(model, nodes, phi=None):
    """Viterbi minimum of the energy restricted to a chain of nodes."""
    nodes = list(nodes)
    best = unary_costs(model, phi, nodes[0]).copy()
    for a, b in zip(nodes, nodes[1:]):
        t = pairwise_costs(model, phi, a, b)
        best = (best[:, None] + t).min(axis=0) + unary_costs(model, phi, b)
    return float(best.min())


def block_dual(model, phi, block):
    """Dual restricted to a block: node minima plus edge minima."""
    total = sum(unary_costs(model, phi, u).min() for u in block.nodes)
    total += sum(pairwise_costs(model, phi, u, v).min() for (u, v) in block.edges)
    return float(total)


def check_minorant(model, block, phi, tol=1e-9):
    """Certify that the node costs form a tight modular lower bound on the block.

    Requires the block to be a tree whose edge minima sum to zero (the state
    every block-optimal update leaves behind); raises
    :class:`MinorantHypothesisError` otherwise.  Verifies by enumeration that
    g(y) = sum_u theta^phi_u(y_u) never exceeds the block energy and shares
    its minimum.
    """
    if block.kind not in ("edge", "chain", "tree"):
        raise ValueError("unknown block kind")
    if len(block.edges) != len(block.nodes) - 1:
        raise ValueError("minorant checks apply to tree blocks only")
    edge_min_sum = sum(pairwise_costs(model, phi, u, v).min()
                       for (u, v) in block.edges)
    if abs(edge_min_sum) > tol:
        raise MinorantHypothesisError(
            f"block edge minima sum to {edge_min_sum}, not 0")
    nodes = list(block.nodes)
    axis = {u: i for i, u in enumerate(nodes)}
    shape = tuple(model.labels[u] for u in nodes)
    full = _add_pairwise(model, phi, nodes, block.edges, axis, shape)
    g = np.zeros(shape)
    for u in nodes:
        view = [None] * len(nodes)
        view[axis[u]] = slice(None)
        g = g + unary_costs(model, phi, u)[tuple(view)]
    if np.any(g > full + tol):
        return False
    return abs(g.min() - full.min()) <= tol


def check_maximal_minorant(model, block, phi, tol=1e-9):
    """True iff every block edge has zero row and column minima (within tol)."""
    for (u, v) in block.edges:
        t = pairwise_costs(model, phi, u, v)
        if np.abs(t.min(axis=0)).max() > tol or np.abs(t.min(axis=1)).max() > tol:
            return False
    return True


def count_shortest_paths(adjacency, src, dst):
    """Number of distinct shortest paths src -> dst; 0 when disconnected.

    ``adjacency`` maps node -> iterable of neighbors (or is a sequence
    indexed by node).
    """
    if src == dst:
        return 1
    from collections import deque
    dist = {src: 0}
    count = {src: 1}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if dst in dist and dist[u] >= dist[dst]:
            continue
        for v in adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                count[v] = 0
                queue.append(v)
            if dist[v] == dist[u] + 1:
                count[v] += count[u]
    return count.get(dst, 0)
