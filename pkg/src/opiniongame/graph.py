"""Weighted opinion graphs, their Laplacians, structural predicates and JSON documents.

A :class:`Graph` stores total weight per ordered pair.  Node ``i`` is influenced
by its out-neighbours: an edge ``(i, j, w)`` means ``i`` pays attention to ``j``
with weight ``w``.  Undirected graphs store each edge once with ``src < dst`` and
are expanded to both orientations whenever matrices are built.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .errors import GraphError, UnsupportedError

EDGE_EXPANSION_MAX_N = 24


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Opinion-game instance: weighted graph plus internal opinions.

    ``node_weights`` defaults to all ones.  ``fixed`` lists non-strategic nodes
    whose opinion is pinned to their entry in ``opinions``; when it is non-empty
    and no node weights are given, free nodes carry no internal opinion term.
    """

    n: int
    edges: tuple = ()
    opinions: np.ndarray = None
    directed: bool = True
    node_weights: np.ndarray | None = None
    fixed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        n = self.n
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise GraphError(f"node count must be a positive integer, got {n!r}")
        object.__setattr__(self, "n", int(n))

        merged: dict[tuple[int, int], float] = {}
        for e in self.edges:
            try:
                src, dst, w = e
            except (TypeError, ValueError):
                raise GraphError(f"edge must be (src, dst, weight), got {e!r}") from None
            if not all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in (src, dst)):
                raise GraphError(f"edge endpoints must be integers, got {e!r}")
            src, dst, w = int(src), int(dst), float(w)
            if not (0 <= src < n and 0 <= dst < n):
                raise GraphError(f"edge ({src}, {dst}) has an index out of range for n={n}")
            if src == dst:
                raise GraphError(f"self-loop at node {src}")
            if not math.isfinite(w) or w <= 0:
                raise GraphError(f"edge ({src}, {dst}) weight must be positive and finite, got {w}")
            if not self.directed and src > dst:
                src, dst = dst, src
            merged[(src, dst)] = merged.get((src, dst), 0.0) + w
        object.__setattr__(
            self, "edges", tuple((i, j, merged[(i, j)]) for i, j in sorted(merged))
        )

        if self.opinions is None:
            raise GraphError("opinions are required")
        s = np.asarray(self.opinions, dtype=float)
        if s.shape != (n,):
            raise GraphError(f"opinions must have length n={n}, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise GraphError("opinions must be finite")
        object.__setattr__(self, "opinions", _frozen(s))

        if self.node_weights is not None:
            nw = np.asarray(self.node_weights, dtype=float)
            if nw.shape != (n,):
                raise GraphError(f"node_weights must have length n={n}, got shape {nw.shape}")
            if not np.all(np.isfinite(nw)) or np.any(nw < 0):
                raise GraphError("node_weights must be finite and nonnegative")
            object.__setattr__(self, "node_weights", _frozen(nw))

        fixed = frozenset(int(i) for i in (self.fixed or ()))
        if any(not 0 <= i < n for i in fixed):
            raise GraphError(f"fixed node index out of range for n={n}")
        object.__setattr__(self, "fixed", fixed)

    @cached_property
    def weights(self) -> np.ndarray:
        """Dense ``W[i, j]`` = weight node ``i`` puts on ``j`` (symmetric if undirected)."""
        W = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            W[i, j] += w
            if not self.directed:
                W[j, i] += w
        W.setflags(write=False)
        return W

    @property
    def effective_node_weights(self) -> np.ndarray:
        if self.node_weights is not None:
            return np.array(self.node_weights)
        w = np.ones(self.n)
        if self.fixed:
            w[:] = 0.0
        return w

    @property
    def free_nodes(self) -> np.ndarray:
        return np.array([i for i in range(self.n) if i not in self.fixed], dtype=int)

    @property
    def is_base_model(self) -> bool:
        """Uniform unit node weights and no fixed nodes."""
        return not self.fixed and (self.node_weights is None or bool(np.all(self.node_weights == 1.0)))

    def replace(self, **changes) -> "Graph":
        kw = dict(
            n=self.n,
            edges=self.edges,
            opinions=self.opinions,
            directed=self.directed,
            node_weights=self.node_weights,
            fixed=self.fixed,
        )
        kw.update(changes)
        return Graph(**kw)

    def with_opinions(self, s) -> "Graph":
        return self.replace(opinions=s)

    def scaled(self, alpha: float) -> "Graph":
        if not alpha > 0:
            raise GraphError(f"scale factor must be positive, got {alpha}")
        return self.replace(edges=tuple((i, j, alpha * w) for i, j, w in self.edges))

    def to_directed(self) -> "Graph":
        """Bidirected expansion of an undirected graph (identity on directed graphs)."""
        if self.directed:
            return self
        edges = [(i, j, w) for i, j, w in self.edges] + [(j, i, w) for i, j, w in self.edges]
        return self.replace(edges=tuple(edges), directed=True)

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, {kind}, edges={len(self.edges)})"


@dataclass(frozen=True, eq=False)
class LaplacianPair:
    L: np.ndarray  # L_ii = out-weight of i, L_ij = -w_ij
    A: np.ndarray  # A_ij = -(w_ij + w_ji), rows sum to zero


def build_graph(doc: dict) -> Graph:
    """Validate a parsed graph document and return a :class:`Graph`."""
    if not isinstance(doc, dict):
        raise GraphError("graph document must be an object")
    for key in ("n", "edges", "opinions"):
        if key not in doc:
            raise GraphError(f"graph document is missing {key!r}")
    unknown = set(doc) - {"directed", "n", "edges", "opinions", "node_weights", "fixed"}
    if unknown:
        raise GraphError(f"unknown fields in graph document: {sorted(unknown)}")
    directed = doc.get("directed", True)
    if not isinstance(directed, bool):
        raise GraphError("'directed' must be a boolean")
    if not isinstance(doc["edges"], list):
        raise GraphError("'edges' must be an array")
    edges = []
    for e in doc["edges"]:
        if not isinstance(e, dict) or not {"src", "dst", "weight"} <= set(e):
            raise GraphError(f"edge entries need src, dst and weight: {e!r}")
        w = e["weight"]
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise GraphError(f"edge weight must be a number: {e!r}")
        edges.append((e["src"], e["dst"], w))
    for key in ("opinions", "node_weights"):
        val = doc.get(key)
        if val is None:
            continue
        if not isinstance(val, list) or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in val):
            raise GraphError(f"{key!r} must be an array of numbers")
    fixed = doc.get("fixed") or []
    if not isinstance(fixed, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in fixed):
        raise GraphError("'fixed' must be an array of node indices")
    return Graph(
        n=doc["n"],
        edges=tuple(edges),
        opinions=doc["opinions"],
        directed=directed,
        node_weights=doc.get("node_weights"),
        fixed=frozenset(fixed),
    )


def graph_to_doc(g: Graph) -> dict:
    doc = {
        "directed": g.directed,
        "n": g.n,
        "edges": [{"src": i, "dst": j, "weight": w} for i, j, w in g.edges],
        "opinions": [float(v) for v in g.opinions],
    }
    if g.node_weights is not None:
        doc["node_weights"] = [float(v) for v in g.node_weights]
    if g.fixed:
        doc["fixed"] = sorted(g.fixed)
    return doc


def read_graph(text: str) -> Graph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"malformed graph document: {exc}") from None
    return build_graph(doc)


def write_graph(g: Graph, indent: int | None = 2) -> str:
    return json.dumps(graph_to_doc(g), indent=indent)


def laplacians(g: Graph) -> LaplacianPair:
    """Out-degree Laplacian ``L`` and the Laplacian ``A`` of the symmetrised weights ``W + W^T``.

    ``A = L + L^T`` holds exactly when the graph is Eulerian.
    """
    cached = g.__dict__.get("_laplacians")
    if cached is not None:
        return cached
    W = g.weights
    L = np.diag(W.sum(axis=1)) - W
    S = W + W.T
    A = np.diag(S.sum(axis=1)) - S
    L.setflags(write=False)
    A.setflags(write=False)
    pair = LaplacianPair(L=L, A=A)
    g.__dict__["_laplacians"] = pair
    return pair


def symmetrized_weights(g: Graph) -> np.ndarray:
    """Weights of the undirected support graph: ``w_ij + w_ji`` (or ``w_ij`` if undirected)."""
    W = g.weights
    return W if not g.directed else W + W.T


def max_degree(g: Graph) -> float:
    W = g.weights
    if g.n == 0 or not g.edges:
        return 0.0
    if not g.directed:
        return float(W.sum(axis=1).max())
    return float(max(W.sum(axis=1).max(), W.sum(axis=0).max()))


def is_eulerian(g: Graph, tol: float = 1e-12) -> bool:
    if not g.directed:
        return True
    W = g.weights
    scale = max(1.0, float(W.sum(axis=1).max(initial=0.0)))
    return bool(np.all(np.abs(W.sum(axis=1) - W.sum(axis=0)) <= tol * scale))


def is_asymmetric(g: Graph) -> bool:
    if not g.directed:
        return not g.edges
    present = {(i, j) for i, j, _ in g.edges}
    return not any((j, i) in present for i, j in present)


def connected_components(g: Graph) -> list[list[int]]:
    """Components of the symmetrised support graph, each sorted, ordered by smallest node."""
    S = symmetrized_weights(g)
    _, labels = _cc(csr_matrix(S > 0), directed=False)
    groups: dict[int, list[int]] = {}
    for node, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(node)
    return sorted(groups.values(), key=lambda c: c[0])


def edge_expansion(g: Graph) -> float:
    """Exact edge expansion of the symmetrised graph by subset enumeration.

    Minimises boundary weight / ``|S|`` over nonempty ``S`` with
    ``|S| <= ceil(n/2)``.
    """
    n = g.n
    if n > EDGE_EXPANSION_MAX_N:
        raise UnsupportedError(f"edge expansion enumeration limited to n <= {EDGE_EXPANSION_MAX_N}")
    if n < 2:
        raise UnsupportedError("edge expansion needs at least two nodes")
    if len(connected_components(g)) > 1:
        raise UnsupportedError("edge expansion requires a connected symmetrised graph")
    S = symmetrized_weights(g)
    best = math.inf
    nodes = range(n)
    for size in range(1, (n + 1) // 2 + 1):
        for subset in itertools.combinations(nodes, size):
            mask = np.zeros(n, dtype=bool)
            mask[list(subset)] = True
            boundary = S[np.ix_(mask, ~mask)].sum()
            best = min(best, boundary / size)
    return float(best)


def add_edge_weight(g: Graph, i: int, j: int, rho: float) -> Graph:
    """Return a copy of ``g`` with weight ``rho`` added to edge ``(i, j)``."""
    if i == j:
        raise GraphError("cannot add a self-loop")
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise GraphError(f"node index out of range for n={g.n}")
    if not rho > 0 or not math.isfinite(rho):
        raise GraphError(f"added weight must be positive and finite, got {rho}")
    return g.replace(edges=g.edges + ((i, j, float(rho)),))


def add_edges(g: Graph, edges: Iterable[Sequence]) -> Graph:
    extra = tuple((int(i), int(j), float(w)) for i, j, w in edges)
    return g.replace(edges=g.edges + extra)
