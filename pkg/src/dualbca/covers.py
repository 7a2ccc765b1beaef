"""Constructing collections of blocks for the solvers to iterate over.

Three static families (maximal monotonic chains, strictly-shortest-path
chains, greedily re-weighted spanning trees) plus gap-scored dynamic trees.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blocks import Block, chain_block, tree_block
from .model import unary_costs, pairwise_costs

try:
    from numba import njit
except ImportError:          # pragma: no cover - numba is a declared dependency
    njit = None


@dataclass(frozen=True)
class BlockSchedule:
    origin: str              # mmc | ssp | static_trees | dynamic_trees | all_edges | rows_columns
    blocks: tuple
    coverage: frozenset = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        cov = frozenset(e for b in self.blocks for e in b.edges)
        object.__setattr__(self, "coverage", cov)


def compute_mmc_cover(model, order=None):
    """Edge-disjoint maximal monotonic chains covering all edges.

    Greedily grows a chain from the smallest node (in ``order``) that still
    has an uncovered edge to a larger neighbor, always stepping to the
    smallest larger neighbor, until no extension exists; repeats until all
    edges are covered.
    """
    n = model.n_nodes
    order = list(range(n)) if order is None else list(order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the node indices")
    pos = [0] * n
    for i, u in enumerate(order):
        pos[u] = i
    # Ad[u]: uncovered neighbors later than u in the order, smallest first.
    ad = [sorted((v for v in model.neighbors(u) if pos[v] > pos[u]),
                 key=lambda v: pos[v]) for u in range(n)]
    chains = []
    for start in sorted(range(n), key=lambda u: pos[u]):
        while ad[start]:
            chain = [start]
            tail = start
            while ad[tail]:
                nxt = ad[tail].pop(0)
                chain.append(nxt)
                tail = nxt
            chains.append(chain_block(model, chain))
    return BlockSchedule("mmc", chains)


def rows_columns_cover(model):
    """Row and column chains of a grid model (requires grid_shape)."""
    if model.grid_shape is None:
        raise ValueError("model carries no grid shape")
    h, w = model.grid_shape
    chains = []
    for r in range(h):
        if w > 1:
            chains.append(chain_block(model, [r * w + c for c in range(w)]))
    for c in range(w):
        if h > 1:
            chains.append(chain_block(model, [r * w + c for r in range(h)]))
    return BlockSchedule("rows_columns", chains)


def all_edges_cover(model):
    return BlockSchedule(
        "all_edges", [chain_block(model, e) for e in model.edges])


if njit is not None:
    @njit(cache=True)
    def _bfs_dist_count(indptr, indices, src, n):
        dist = np.full(n, -1, dtype=np.int64)
        count = np.zeros(n, dtype=np.int64)
        queue = np.empty(n, dtype=np.int64)
        dist[src] = 0
        count[src] = 1
        queue[0] = src
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if dist[v] < 0:
                    dist[v] = du + 1
                    queue[tail] = v
                    tail += 1
                if dist[v] == du + 1:
                    c = count[v] + count[u]
                    count[v] = c if c < 2 else 2   # only ==1 matters
        return dist, count
else:                          # pragma: no cover
    def _bfs_dist_count(indptr, indices, src, n):
        from collections import deque
        dist = np.full(n, -1, dtype=np.int64)
        count = np.zeros(n, dtype=np.int64)
        dist[src] = 0
        count[src] = 1
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in indices[indptr[u]:indptr[u + 1]]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
                if dist[v] == dist[u] + 1:
                    count[v] = min(count[v] + count[u], 2)
        return dist, count


def _csr(n, src, dst):
    """Directed CSR adjacency from parallel endpoint arrays."""
    order = np.argsort(src, kind="stable")
    src = src[order]
    dst = dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst.astype(np.int64)


def count_shortest_paths_arrays(indptr, indices, n, src, dst):
    dist, count = _bfs_dist_count(indptr, indices, src, n)
    return int(count[dst]) if dist[dst] >= 0 else 0


def compute_ssp_cover(model, seed=0):
    """Partition of the edges into strictly-shortest-path chains.

    Repeatedly picks a random start vertex with uncovered incident edges,
    finds the most distant vertex reached by a unique shortest path in the
    residual (uncovered) graph, extracts that path as a chain and removes
    its edges.  A chain additionally may not be longer than the start-to-end
    distance in the full graph: if a direct shorter connection exists the
    detour is not treated as a shortest path.  In complete graphs this
    reduces to single-edge blocks.
    """
    n = model.n_nodes
    if model.n_edges == 0:
        return BlockSchedule("ssp", [])
    rng = np.random.default_rng(seed)
    e_u = np.array([u for u, _ in model.edges], dtype=np.int64)
    e_v = np.array([v for _, v in model.edges], dtype=np.int64)
    full_src = np.concatenate([e_u, e_v])
    full_dst = np.concatenate([e_v, e_u])
    full_indptr, full_indices = _csr(n, full_src, full_dst)

    alive = np.ones(model.n_edges, dtype=bool)
    degree = np.zeros(n, dtype=np.int64)
    np.add.at(degree, e_u, 1)
    np.add.at(degree, e_v, 1)
    chains = []
    while alive.any():
        src_arr = np.concatenate([e_u[alive], e_v[alive]])
        dst_arr = np.concatenate([e_v[alive], e_u[alive]])
        indptr, indices = _csr(n, src_arr, dst_arr)
        candidates = np.flatnonzero(degree > 0)
        start = int(rng.choice(candidates))
        dist, count = _bfs_dist_count(indptr, indices, start, n)
        dist_full, _ = _bfs_dist_count(full_indptr, full_indices, start, n)
        strict = (dist >= 1) & (count == 1) & (dist == dist_full)
        ends = np.flatnonzero(strict)
        end = int(ends[np.argmax(dist[ends])])  # argmax returns lowest index on ties
        # Trace the unique shortest path back from the end.
        path = [end]
        node = end
        while node != start:
            for w in indices[indptr[node]:indptr[node + 1]]:
                if dist[w] == dist[node] - 1 and count[w] == 1:
                    node = int(w)
                    break
            path.append(node)
        path.reverse()
        for a, b in zip(path, path[1:]):
            e = model.edge_id(a, b)
            alive[e] = False
            degree[a] -= 1
            degree[b] -= 1
        chains.append(chain_block(model, path))
    return BlockSchedule("ssp", chains)


def _kruskal(n, edges, keys):
    """Spanning forest minimizing the per-edge sort keys; returns edge indices."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    picked = []
    for e in sorted(range(len(edges)), key=lambda e: keys[e]):
        u, v = edges[e]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            picked.append(e)
    return picked


def _forest_blocks(model, edge_ids):
    """Split a Kruskal forest into one tree block per connected component."""
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edge_ids:
        u, v = model.edges[e]
        parent[find(u)] = find(v)
    groups = {}
    for e in edge_ids:
        groups.setdefault(find(model.edges[e][0]), []).append(e)
    return [tree_block(model, [model.edges[e] for e in grp])
            for _, grp in sorted(groups.items())]


def compute_static_trees(model):
    """Spanning trees re-weighted by inclusion counts until all edges covered.

    On a disconnected graph each round yields one tree per component.
    """
    if model.n_edges == 0:
        return BlockSchedule("static_trees", [])
    times_used = [0] * model.n_edges
    trees = []
    while min(times_used) == 0:
        picked = _kruskal(model.n_nodes, model.edges,
                          [(times_used[e], e) for e in range(model.n_edges)])
        for e in picked:
            times_used[e] += 1
        trees.extend(_forest_blocks(model, picked))
    return BlockSchedule("static_trees", trees)


def gap_scores(model, phi, y):
    """Local primal-dual gaps: per-node and per-edge excess of y over the minima."""
    node_gap = np.array([
        unary_costs(model, phi, u)[y[u]] - unary_costs(model, phi, u).min()
        for u in range(model.n_nodes)])
    edge_gap = np.array([
        pairwise_costs(model, phi, u, v)[y[u], y[v]]
        - pairwise_costs(model, phi, u, v).min()
        for (u, v) in model.edges])
    return node_gap, edge_gap


def compute_dynamic_forest(model, phi, y):
    """Maximum-gap spanning trees, one per connected component.

    Edge weight = edge gap + both endpoint node gaps; ties by edge index.
    """
    node_gap, edge_gap = gap_scores(model, phi, y)
    weight = [edge_gap[e] + node_gap[u] + node_gap[v]
              for e, (u, v) in enumerate(model.edges)]
    picked = _kruskal(model.n_nodes, model.edges,
                      [(-weight[e], e) for e in range(model.n_edges)])
    return _forest_blocks(model, picked)


def compute_dynamic_tree(model, phi, y):
    """Maximum-gap spanning tree of a connected model graph."""
    forest = compute_dynamic_forest(model, phi, y)
    if len(forest) != 1:
        raise ValueError("model graph is disconnected, use compute_dynamic_forest")
    return forest[0]


def tree_gap_score(model, phi, y, tree: Block):
    """Total gap of a spanning tree under the dynamic-tree edge weights."""
    node_gap, edge_gap = gap_scores(model, phi, y)
    return float(sum(edge_gap[model.edge_id(u, v)] + node_gap[u] + node_gap[v]
                     for (u, v) in tree.edges))
