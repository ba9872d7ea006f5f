"""Nash equilibria, social optima and social cost of the opinion game.

Every solver handles the base game and the two extensions uniformly:

* node weights ``w``: node ``i`` pays ``w_i (z_i - s_i)^2`` for leaving its
  internal opinion (``w_i = 0`` means it has none);
* fixed nodes: their opinion is pinned to ``s_j``, they are non-strategic and
  their own cost is not counted.

With ``F`` the free nodes and ``B`` the fixed ones, the Nash equilibrium solves
``(L[F,F] + d(w_F)) y_F = d(w_F) s_F + W[F,B] s_B`` and the optimum solves the
same system with ``L[F,F]`` replaced by the symmetrised free-free Laplacian
plus the weight each free node sends to ``B``.  In the base game these reduce
to ``(L + I) y = s`` and ``(A + I) x = s``.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import GraphError, UnderdeterminedError
from .graph import Graph, laplacians
from .linalg import relative_residual, solve_linear

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    opinions: np.ndarray
    social_cost: float
    residual: float
    iterations: int = 0
    converged: bool = True


@dataclass(frozen=True, eq=False)
class FixedReduction:
    graph: Graph
    offset: float
    free_nodes: np.ndarray


def _clamped(g: Graph, z) -> np.ndarray:
    z = np.array(z, dtype=float)
    if z.shape != (g.n,):
        raise GraphError(f"opinion vector must have length {g.n}")
    if g.fixed:
        idx = sorted(g.fixed)
        z[idx] = g.opinions[idx]
    return z


def node_costs(g: Graph, z, s=None) -> np.ndarray:
    """Per-node cost ``w_i (z_i - s_i)^2 + sum_j w_ij (z_i - z_j)^2``; zero for fixed nodes."""
    s = g.opinions if s is None else np.asarray(s, dtype=float)
    z = _clamped(g, z)
    w = g.effective_node_weights
    W = g.weights
    diff = z[:, None] - z[None, :]
    costs = w * (z - s) ** 2 + (W * diff**2).sum(axis=1)
    if g.fixed:
        costs[sorted(g.fixed)] = 0.0
    return costs


def node_cost(g: Graph, z, i: int) -> float:
    return float(node_costs(g, z)[i])


def social_cost(g: Graph, z, s=None) -> float:
    return float(node_costs(g, z, s).sum())


def _reaches_anchor(g: Graph, along_out_edges: bool) -> np.ndarray:
    """Mask of free nodes connected to an anchor (positive node weight or a fixed neighbour)."""
    W = g.weights
    free = np.ones(g.n, dtype=bool)
    free[list(g.fixed)] = False
    w = g.effective_node_weights
    anchored = free & ((w > 0) | (W[:, ~free].sum(axis=1) > 0))
    # edge i -> j means i listens to j; i is anchored if some j it listens to is
    adj = W > 0 if along_out_edges else (W + W.T) > 0
    ok = anchored.copy()
    queue = deque(np.flatnonzero(anchored))
    while queue:
        j = queue.popleft()
        for i in np.flatnonzero(adj[:, j] & free & ~ok):
            ok[i] = True
            queue.append(i)
    return ok | ~free


def _check_anchored(g: Graph, along_out_edges: bool, what: str):
    if g.is_base_model:
        return
    ok = _reaches_anchor(g, along_out_edges)
    if not ok.all():
        bad = [int(i) for i in np.flatnonzero(~ok)]
        raise UnderdeterminedError(
            f"{what} is not unique: nodes {bad} have zero node weight and no path to an anchored node",
            component=bad,
        )


def _rhs(g: Graph, F, B, s) -> np.ndarray:
    w = g.effective_node_weights
    W = g.weights
    return w[F] * s[F] + W[np.ix_(F, B)] @ s[B]


def nash_system(g: Graph):
    """Matrix and right-hand side of the free-node Nash equations."""
    F = g.free_nodes
    B = np.array(sorted(g.fixed), dtype=int)
    L = laplacians(g).L
    M = L[np.ix_(F, F)] + np.diag(g.effective_node_weights[F])
    return M, _rhs(g, F, B, g.opinions), F


def opt_system(g: Graph):
    """Matrix and right-hand side of the free-node optimality conditions."""
    F = g.free_nodes
    B = np.array(sorted(g.fixed), dtype=int)
    if not g.fixed:
        M = laplacians(g).A + np.diag(g.effective_node_weights)
        return M, _rhs(g, F, B, g.opinions), F
    W = g.weights
    WFF = W[np.ix_(F, F)]
    S = WFF + WFF.T
    M = np.diag(S.sum(axis=1)) - S
    M += np.diag(g.effective_node_weights[F] + W[np.ix_(F, B)].sum(axis=1))
    return M, _rhs(g, F, B, g.opinions), F


def _solve(g: Graph, M, b, F) -> EquilibriumResult:
    yF = solve_linear(M, b)
    z = np.array(g.opinions, dtype=float)
    z[F] = yF
    return EquilibriumResult(
        opinions=z,
        social_cost=social_cost(g, z),
        residual=relative_residual(M, yF, b),
    )


def nash_direct(g: Graph) -> EquilibriumResult:
    """Nash equilibrium by a direct solve of ``(L + I) y = s`` (and extensions)."""
    _check_anchored(g, along_out_edges=True, what="Nash equilibrium")
    return _solve(g, *nash_system(g))


def social_opt(g: Graph) -> EquilibriumResult:
    """Social optimum ``x = (A + I)^{-1} s`` (and extensions)."""
    _check_anchored(g, along_out_edges=False, what="social optimum")
    return _solve(g, *opt_system(g))


def nash_node_weighted(g: Graph) -> EquilibriumResult:
    if g.node_weights is None:
        raise GraphError("graph has no node weights")
    return nash_direct(g)


def opt_node_weighted(g: Graph) -> EquilibriumResult:
    if g.node_weights is None:
        raise GraphError("graph has no node weights")
    return social_opt(g)


def nash_iterative(g: Graph, tol: float = DEFAULT_TOL, max_iter: int | None = None) -> EquilibriumResult:
    """Repeated synchronous averaging from ``z = s`` until the largest step is ``<= tol``.

    Each free node moves to the weighted average of its internal opinion and
    its out-neighbours' current opinions.  When ``max_iter`` is exhausted the
    last iterate is returned with ``converged=False``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = 100 * g.n + 1000
    _check_anchored(g, along_out_edges=True, what="Nash equilibrium")
    W = g.weights
    w = g.effective_node_weights
    s = np.array(g.opinions, dtype=float)
    free = np.ones(g.n, dtype=bool)
    free[list(g.fixed)] = False
    denom = w + W.sum(axis=1)
    denom[~free] = 1.0
    z = s.copy()
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        z_new = np.where(free, (w * s + W @ z) / denom, s)
        step = np.abs(z_new - z).max(initial=0.0)
        z = z_new
        if step <= tol:
            converged = True
            break
    if not converged:
        log.warning("averaging did not converge in %d iterations", max_iter)
    M, b, F = nash_system(g)
    return EquilibriumResult(
        opinions=z,
        social_cost=social_cost(g, z),
        residual=relative_residual(M, z[F], b),
        iterations=it,
        converged=converged,
    )


def reduce_fixed_opinions(g: Graph) -> FixedReduction:
    """Fold fixed neighbours into node weights and internal opinions of the free nodes.

    Each free node gets ``w_i`` = total weight it places on fixed nodes (plus
    any node weight it already had) and ``s_i`` = the matching weighted average
    (0 if it has none).  The costs of the two instances differ by ``offset``
    for every opinion vector.
    """
    if not g.fixed:
        raise GraphError("graph has no fixed nodes")
    F = g.free_nodes
    B = np.array(sorted(g.fixed), dtype=int)
    W = g.weights
    s = np.asarray(g.opinions)
    w0 = g.effective_node_weights[F]
    WFB = W[np.ix_(F, B)]
    total = w0 + WFB.sum(axis=1)
    pull = w0 * s[F] + WFB @ s[B]
    new_s = np.divide(pull, total, out=np.zeros_like(pull), where=total > 0)
    offset = float(np.sum(w0 * s[F] ** 2 + WFB @ (s[B] ** 2) - total * new_s**2))

    index = {int(old): new for new, old in enumerate(F)}
    edges = tuple(
        (index[i], index[j], w) for i, j, w in g.edges if i in index and j in index
    )
    reduced = Graph(
        n=len(F),
        edges=edges,
        opinions=new_s,
        directed=g.directed,
        node_weights=total,
    )
    return FixedReduction(graph=reduced, offset=max(offset, 0.0), free_nodes=F)
