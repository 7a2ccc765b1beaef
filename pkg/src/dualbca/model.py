"""Pairwise discrete energy model, reparametrizations and the constrained dual.

The energy of a labeling y is the sum of unary costs theta_u(y_u) and
pairwise costs theta_uv(y_u, y_v).  A reparametrization phi assigns one real
vector per directed edge incidence (u,v); it shifts costs between nodes and
edges without changing any labeling's energy.  All solver state lives in phi:
reparametrized costs are always computed on the fly from (theta, phi).
"""
from __future__ import annotations

import numpy as np

# Absolute tolerance shared by all zero / feasibility tests in the package.
FEAS_TOL = 1e-9

# Finite stand-in for forbidden assignments.  Never use true infinity: it
# poisons the min/sum arithmetic of message passing.
COST_CAP = 1e12


class GraphicalModel:
    """Immutable graph with unary and pairwise cost tables.

    Nodes are ``0..n-1``; node ``u`` has ``labels[u]`` labels.  Edges are
    unordered pairs stored canonically as ``(u, v)`` with ``u < v``.  All
    costs must be finite and non-negative (shift your input if needed; the
    non-negativity is what keeps the constrained dual well defined).
    """

    def __init__(self, labels, edges, unary, pairwise, grid_shape=None):
        self.labels = tuple(int(k) for k in labels)
        self.n_nodes = len(self.labels)
        if any(k <= 0 for k in self.labels):
            raise ValueError("every node needs at least one label")

        canon = []
        for (u, v) in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise ValueError(f"edge ({u},{v}) has an endpoint out of range")
            canon.append((u, v) if u < v else (v, u))
        if len(set(canon)) != len(canon):
            raise ValueError("duplicate edge")
        self.edges = tuple(canon)
        self.n_edges = len(self.edges)

        if len(unary) != self.n_nodes or len(pairwise) != self.n_edges:
            raise ValueError("cost table count does not match nodes/edges")
        self.unary = tuple(np.ascontiguousarray(t, dtype=np.float64) for t in unary)
        self.pairwise = tuple(np.ascontiguousarray(t, dtype=np.float64) for t in pairwise)
        for u, t in enumerate(self.unary):
            if t.shape != (self.labels[u],):
                raise ValueError(f"unary table of node {u} has shape {t.shape}")
        for e, (u, v) in enumerate(self.edges):
            if self.pairwise[e].shape != (self.labels[u], self.labels[v]):
                raise ValueError(f"pairwise table of edge ({u},{v}) has shape "
                                 f"{self.pairwise[e].shape}")
        for t in self.unary + self.pairwise:
            if not np.all(np.isfinite(t)):
                raise ValueError("costs must be finite (use COST_CAP for forbidden pairs)")
            if np.any(t < 0):
                raise ValueError("costs must be non-negative (pre-shift your input)")

        self._edge_id = {}
        adj = [[] for _ in range(self.n_nodes)]
        for e, (u, v) in enumerate(self.edges):
            self._edge_id[(u, v)] = e
            self._edge_id[(v, u)] = e
            adj[u].append(v)
            adj[v].append(u)
        self.adjacency = tuple(tuple(sorted(a)) for a in adj)

        # Optional (height, width) hint set by the grid generators; lets
        # solvers pick row/column chain covers.
        self.grid_shape = tuple(grid_shape) if grid_shape is not None else None

    def neighbors(self, u):
        return self.adjacency[u]

    def has_edge(self, u, v):
        return (u, v) in self._edge_id

    def edge_id(self, u, v):
        try:
            return self._edge_id[(u, v)]
        except KeyError:
            raise ValueError(f"({u},{v}) is not an edge of the model") from None

    def pairwise_table(self, u, v):
        """Pairwise cost table oriented as (labels of u, labels of v)."""
        e = self.edge_id(u, v)
        t = self.pairwise[e]
        return t if self.edges[e][0] == u else t.T

    def state_count(self):
        n = 1.0
        for k in self.labels:
            n *= k
        return n


class Reparametrization:
    """Dual vector phi: one value per (directed incidence, label) triple.

    ``phi[u, v]`` is the vector ``phi_{u,v}`` over the labels of ``u``,
    defined for every edge ``uv`` of the model.  Arrays are mutable and owned
    by exactly one solver run at a time.
    """

    def __init__(self, model: GraphicalModel):
        self.model = model
        self._vals = {}
        for (u, v) in model.edges:
            self._vals[(u, v)] = np.zeros(model.labels[u])
            self._vals[(v, u)] = np.zeros(model.labels[v])

    def __getitem__(self, uv):
        return self._vals[uv]

    def __setitem__(self, uv, value):
        tgt = self._vals[uv]
        tgt[:] = value

    def copy(self):
        out = Reparametrization.__new__(Reparametrization)
        out.model = self.model
        out._vals = {k: v.copy() for k, v in self._vals.items()}
        return out

    def is_zero(self):
        return all(np.all(v == 0) for v in self._vals.values())


def unary_costs(model, phi, u):
    """Reparametrized unary vector theta^phi_u = theta_u - sum_v phi_{u,v}."""
    out = model.unary[u].copy()
    if phi is not None:
        for v in model.neighbors(u):
            out -= phi[u, v]
    return out


def pairwise_costs(model, phi, u, v):
    """Reparametrized pairwise table theta^phi_uv oriented as (Y_u, Y_v).

    Always evaluated in canonical edge orientation so the two query
    directions are transposes of each other bit-exactly.
    """
    a, b = model.edges[model.edge_id(u, v)]
    out = model.pairwise_table(a, b).copy()
    if phi is not None:
        out += phi[a, b][:, None]
        out += phi[b, a][None, :]
    return out if a == u else out.T


def reparametrized_unary(model, phi, u, s):
    if not (0 <= u < model.n_nodes):
        raise ValueError(f"node {u} out of range")
    if not (0 <= s < model.labels[u]):
        raise ValueError(f"label {s} out of range for node {u}")
    return float(unary_costs(model, phi, u)[s])


def reparametrized_pairwise(model, phi, u, v, s, t):
    model.edge_id(u, v)
    if not (0 <= s < model.labels[u] and 0 <= t < model.labels[v]):
        raise ValueError(f"labels ({s},{t}) out of range for edge ({u},{v})")
    return float(pairwise_costs(model, phi, u, v)[s, t])


def check_labeling(model, y):
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (model.n_nodes,):
        raise ValueError("labeling must assign one label per node")
    for u, s in enumerate(y):
        if not (0 <= s < model.labels[u]):
            raise ValueError(f"label {s} out of range for node {u}")
    return y


def energy(model, y, phi=None):
    """Energy of labeling ``y`` under theta (phi=None) or theta^phi.

    The two agree for every y: the phi contributions telescope out.
    """
    y = check_labeling(model, y)
    total = 0.0
    for u in range(model.n_nodes):
        total += unary_costs(model, phi, u)[y[u]]
    for (u, v) in model.edges:
        total += pairwise_costs(model, phi, u, v)[y[u], y[v]]
    return float(total)


def dual_value(model, phi):
    """Lower bound D(phi): sum of node-wise and edge-wise minima of theta^phi."""
    total = 0.0
    for u in range(model.n_nodes):
        total += unary_costs(model, phi, u).min()
    for (u, v) in model.edges:
        total += pairwise_costs(model, phi, u, v).min()
    return float(total)


def check_feasible(model, phi, tol=FEAS_TOL):
    """True iff every reparametrized cost is >= -tol (constrained dual)."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    for u in range(model.n_nodes):
        if unary_costs(model, phi, u).min() < -tol:
            return False
    for (u, v) in model.edges:
        if pairwise_costs(model, phi, u, v).min() < -tol:
            return False
    return True


def primal_round(model, phi):
    """Independent per-node rounding: y_u = argmin theta^phi_u, lowest index wins."""
    return np.array([int(np.argmin(unary_costs(model, phi, u)))
                     for u in range(model.n_nodes)], dtype=np.int64)
