"""Full iterative solvers with message accounting and convergence traces.

All methods update one shared dual vector phi; they differ only in which
blocks they sweep and which update they apply per block:

==========  =====================================================
msd, cmp    node-adjacent aggregate/distribute, isotropic weights
trws        ordered forward/backward sweeps, anisotropic weights
mplp        edge sweep with the half-split edge update
mplppp      edge sweep with the handshake update
dmm         hierarchical minorant on a fixed chain cover
tbca        tree-BCA on static or dynamic spanning trees
tbcapp      tbca plus the maximality correction
spam        hierarchical minorant on strictly-shortest-path chains
==========  =====================================================
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import blocks as blk
from . import covers
from .model import (Reparametrization, dual_value, energy, primal_round,
                    unary_costs)
from .updates import MessageCounter, node_aggregate, node_distribute, \
    push_min_into, weights_for, WeightScheme

METHODS = ("msd", "cmp", "trws", "mplp", "mplppp", "dmm", "tbca", "tbcapp",
           "spam")


@dataclass
class SolverConfig:
    method: str
    max_passes: int = 1000
    max_messages: int = None
    max_seconds: float = None
    tol: float = 1e-9
    seed: int = 0
    tree_mode: str = "static"        # tbca/tbcapp only: static | dynamic
    node_order: list = None          # None = input order
    cover: str = "auto"              # dmm/tbca/spam: auto | mmc | rows_columns | ssp
    convergence_window: int = 5

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.tree_mode not in ("static", "dynamic"):
            raise ValueError(f"unknown tree_mode {self.tree_mode!r}")
        if self.max_passes is None and self.max_messages is None \
                and self.max_seconds is None:
            raise ValueError("at least one stopping criterion must be set")


@dataclass(frozen=True)
class TraceRecord:
    pass_index: int
    messages: int
    dual: float
    primal_energy: float
    wall_seconds: float


def normalize_messages(raw, instance_edges, dataset_mean_edges):
    """Scale a raw message count by mean(|E|) / |E| for cross-instance plots."""
    if instance_edges <= 0:
        return float(raw)
    return raw * dataset_mean_edges / instance_edges


def _node_order(model, config):
    if config.node_order is None:
        return list(range(model.n_nodes))
    order = list(config.node_order)
    if sorted(order) != list(range(model.n_nodes)):
        raise ValueError("node_order must be a permutation of the node indices")
    return order


def _chain_cover(model, config):
    kind = config.cover
    if kind == "auto":
        if config.method == "spam":
            kind = "ssp"
        elif config.method == "dmm":
            kind = "rows_columns" if model.grid_shape is not None else "mmc"
        else:
            kind = "mmc"
    if kind == "mmc":
        schedule = covers.compute_mmc_cover(model, _node_order(model, config))
    elif kind == "rows_columns":
        schedule = covers.rows_columns_cover(model)
    elif kind == "ssp":
        schedule = covers.compute_ssp_cover(model, config.seed)
    else:
        raise ValueError(f"unknown cover {kind!r}")
    # Sweep blocks in canonical order and orientation each pass (extraction
    # order and chain direction are artifacts of the cover construction, not
    # part of its contract).
    blocks = []
    for b in schedule.blocks:
        if b.kind in ("edge", "chain") and b.nodes[0] > b.nodes[-1]:
            b = blk.chain_block(model, b.nodes[::-1])
        blocks.append(b)
    blocks.sort(key=lambda b: b.nodes)
    return covers.BlockSchedule(schedule.origin, blocks)


def _trws_sweep(model, phi, order, counter):
    """One directed TRWS sweep: |E| messages, one per edge in sweep direction.

    At each node the current excess is already fully aggregated (earlier
    neighbors were pushed this sweep, later neighbors by the previous
    opposite sweep), so one distribution plus one min-marginal push per
    outgoing edge realizes the aggregate/distribute node update at a single
    message per edge.
    """
    pos = [0] * model.n_nodes
    for i, u in enumerate(order):
        pos[u] = i
    for u in order:
        later = [v for v in model.neighbors(u) if pos[v] > pos[u]]
        if not later:
            continue
        n_in = len(model.neighbors(u)) - len(later)
        w = 1.0 / max(n_in, len(later))
        excess = unary_costs(model, phi, u)
        for v in later:
            phi[u, v] += w * excess
            push_min_into(model, phi, u, v, counter)


class _Run:
    """One solver run: owns phi, the counter and the schedule."""

    def __init__(self, model, config):
        self.model = model
        self.config = config
        self.phi = Reparametrization(model)
        self.counter = MessageCounter()
        self.order = _node_order(model, config)
        m = config.method
        self.schedule = None
        if m in ("dmm", "spam"):
            self.schedule = _chain_cover(model, config)
        elif m in ("tbca", "tbcapp"):
            if config.cover != "auto":
                self.schedule = _chain_cover(model, config)
            elif config.tree_mode == "static":
                self.schedule = covers.compute_static_trees(model)
        if m in ("msd", "cmp"):
            self.scheme = WeightScheme(m)

    def do_pass(self):
        model, phi, counter = self.model, self.phi, self.counter
        m = self.config.method
        if m in ("msd", "cmp"):
            for u in range(model.n_nodes):
                node_aggregate(model, phi, u, counter)
                node_distribute(model, phi, u,
                                weights_for(self.scheme, model, u))
        elif m == "trws":
            _trws_sweep(model, phi, self.order, counter)
            _trws_sweep(model, phi, self.order[::-1], counter)
        elif m == "mplp":
            from .updates import mplp_update
            for (u, v) in model.edges:
                mplp_update(model, phi, u, v, counter)
        elif m == "mplppp":
            from .updates import handshake_update
            for (u, v) in model.edges:
                handshake_update(model, phi, u, v, counter)
        elif m in ("dmm", "spam"):
            for chain in self.schedule.blocks:
                blk.hm_chain(model, phi, chain, counter)
        elif m in ("tbca", "tbcapp"):
            plus = (m == "tbcapp")
            if self.schedule is not None:
                for b in self.schedule.blocks:
                    if b.kind == "tree":
                        blk.tbca_tree(model, phi, b, counter, plus=plus)
                    elif plus:
                        blk.tbca_pp_chain(model, phi, b, counter)
                    else:
                        blk.tbca_chain(model, phi, b, counter)
            elif model.n_edges > 0:
                y = primal_round(model, phi)
                for tree in covers.compute_dynamic_forest(model, phi, y):
                    blk.tbca_tree(model, phi, tree, counter, plus=plus)


def run(model, config):
    """Run a solver; returns (phi, labeling, trace records).

    The trace starts with a pass-0 record of the initial state and gains one
    record per completed pass.  Runs are deterministic given the seed; the
    wall_seconds field is the only non-reproducible quantity.
    """
    if model.n_nodes == 0:
        raise ValueError("model has no nodes")
    state = _Run(model, config)
    t0 = time.perf_counter()

    def record(k):
        y = primal_round(model, state.phi)
        return TraceRecord(k, state.counter.total, dual_value(model, state.phi),
                           energy(model, y), time.perf_counter() - t0)

    trace = [record(0)]
    k = 0
    while True:
        if config.max_passes is not None and k >= config.max_passes:
            break
        if config.max_messages is not None and \
                state.counter.total >= config.max_messages:
            break
        if config.max_seconds is not None and \
                time.perf_counter() - t0 >= config.max_seconds:
            break
        w = config.convergence_window
        if len(trace) > w:
            recent = [r.dual for r in trace[-(w + 1):]]
            scale = max(1.0, abs(recent[-1]))
            if (recent[-1] - recent[0]) / scale < config.tol:
                break
        k += 1
        state.do_pass()
        trace.append(record(k))
    y = primal_round(model, state.phi)
    return state.phi, y, trace
