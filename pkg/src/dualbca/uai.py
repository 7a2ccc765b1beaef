"""Reading and writing pairwise models in the UAI MARKOV text format.

Grammar accepted (whitespace and newlines are interchangeable):

    MARKOV
    <n_vars>
    <cardinality of each var>
    <n_factors>
    <scope lines: size followed by the variable indices>
    <for each factor: n_entries followed by the entries in row-major order>

Only unary and pairwise factors are supported.  Table entries are read as
costs verbatim, or as probabilities (costs = -log p) when requested; tables
with a negative minimum are shifted up to zero and the total shift reported.
"""
from __future__ import annotations

import math

import numpy as np

from .model import COST_CAP, GraphicalModel


class ModelFormatError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class _Tokens:
    def __init__(self, text):
        self.items = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            for tok in line.split():
                self.items.append((tok, lineno))
        self.pos = 0
        self.last_line = 1

    def next(self, what):
        if self.pos >= len(self.items):
            raise ModelFormatError(f"unexpected end of file, expected {what}",
                                   self.last_line)
        tok, line = self.items[self.pos]
        self.pos += 1
        self.last_line = line
        return tok, line

    def next_int(self, what):
        tok, line = self.next(what)
        try:
            return int(tok)
        except ValueError:
            raise ModelFormatError(f"expected {what}, got {tok!r}", line) from None

    def next_float(self, what):
        tok, line = self.next(what)
        try:
            return float(tok)
        except ValueError:
            raise ModelFormatError(f"expected {what}, got {tok!r}", line) from None

    def exhausted(self):
        return self.pos >= len(self.items)


def parse_uai(path, probabilities=False):
    """Parse a UAI MARKOV file; returns (model, total_shift).

    ``total_shift`` is the constant added to the energy by the per-table
    zero-shifts; add it back to compare duals against unshifted inputs.
    """
    with open(path) as f:
        toks = _Tokens(f.read())
    kind, line = toks.next("network type")
    if kind.upper() != "MARKOV":
        raise ModelFormatError(f"expected MARKOV network, got {kind!r}", line)
    n_vars = toks.next_int("variable count")
    labels = [toks.next_int("cardinality") for _ in range(n_vars)]
    n_factors = toks.next_int("factor count")
    scopes = []
    for _ in range(n_factors):
        size = toks.next_int("scope size")
        scope = [toks.next_int("variable index") for _ in range(size)]
        line = toks.last_line
        if size not in (1, 2):
            raise ModelFormatError(
                f"only unary and pairwise factors are supported, got arity {size}",
                line)
        for v in scope:
            if not 0 <= v < n_vars:
                raise ModelFormatError(f"variable index {v} out of range", line)
        if size == 2 and scope[0] == scope[1]:
            raise ModelFormatError(f"self-loop factor on variable {scope[0]}", line)
        scopes.append(scope)

    unary = [None] * n_vars
    edges, pairwise = [], []
    edge_seen = set()
    total_shift = 0.0
    for scope in scopes:
        n_entries = toks.next_int("table size")
        expected = math.prod(labels[v] for v in scope)
        if n_entries != expected:
            raise ModelFormatError(
                f"factor over {scope} declares {n_entries} entries, needs {expected}",
                toks.last_line)
        entries = np.array([toks.next_float("table entry")
                            for _ in range(n_entries)])
        line = toks.last_line
        if probabilities:
            if np.any(entries < 0):
                raise ModelFormatError("negative probability entry", line)
            with np.errstate(divide="ignore"):
                entries = -np.log(entries)
            entries = np.minimum(entries, COST_CAP)
        if not np.all(np.isfinite(entries)):
            raise ModelFormatError("non-finite table entry", line)
        lo = entries.min()
        if lo < 0:
            entries = entries - lo
            total_shift += lo
        if len(scope) == 1:
            u = scope[0]
            if unary[u] is not None:
                raise ModelFormatError(f"duplicate unary factor on variable {u}",
                                       line)
            unary[u] = entries
        else:
            u, v = scope
            key = (min(u, v), max(u, v))
            if key in edge_seen:
                raise ModelFormatError(f"duplicate edge factor on {key}", line)
            edge_seen.add(key)
            table = entries.reshape(labels[u], labels[v])
            if u > v:
                table = table.T
            edges.append(key)
            pairwise.append(table)
    if not toks.exhausted():
        tok, line = toks.next("")
        raise ModelFormatError(f"trailing content {tok!r}", line)
    for u in range(n_vars):
        if unary[u] is None:
            unary[u] = np.zeros(labels[u])
    return GraphicalModel(labels, edges, unary, pairwise), float(total_shift)


def write_uai(model, path):
    """Write a model as a UAI MARKOV cost file, round-trip exact."""
    out = ["MARKOV", str(model.n_nodes),
           " ".join(str(k) for k in model.labels),
           str(model.n_nodes + model.n_edges)]
    for u in range(model.n_nodes):
        out.append(f"1 {u}")
    for (u, v) in model.edges:
        out.append(f"2 {u} {v}")
    for u in range(model.n_nodes):
        out.append("")
        out.append(str(model.labels[u]))
        out.append(" ".join(repr(float(x)) for x in model.unary[u]))
    for e in range(model.n_edges):
        t = model.pairwise[e]
        out.append("")
        out.append(str(t.size))
        out.append(" ".join(repr(float(x)) for x in t.ravel()))
    with open(path, "w") as f:
        f.write("\n".join(out) + "\n")
