"""Network design: adding edge weight to lower the equilibrium social cost.

Added edges are directed: adding weight ``rho`` to ``(i, j)`` makes ``i`` listen
more to ``j`` and changes the Laplacian by ``rho e_i (e_i - e_j)^T``.  Undirected
inputs are handled through their bidirected expansion.  The equilibrium then
moves along the influence vector ``v_i = (L + I)^{-1} e_i``:
``y' = y - phi v_i`` with ``phi = rho (y_i - y_j) / (1 + rho (v_ii - v_ij))``,
and the new social cost is the quadratic ``alpha phi^2 - 2 beta phi + c(y)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import nash_direct, node_costs, social_cost, social_opt
from .errors import GraphError, NumericalError, UnsupportedError
from .graph import Graph, add_edge_weight, add_edges, laplacians
from .linalg import solve_linear
from .poa import poa

RHO_CAP = 1e6
BRUTE_FORCE_MAX_CANDIDATES = 20
SATURATION_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class InfluenceVector:
    source: int
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class EdgePlan:
    i: int
    j: int
    rho_star: float  # math.inf when saturated
    saturated: bool
    rho_apply: float  # finite weight to actually add (rho_cap surrogate when saturated)
    phi_star: float
    phi_max: float
    alpha_ij: float
    beta_ij: float
    gamma_ij: float
    predicted_cost: float
    baseline_cost: float

    def cost_at_phi(self, phi: float) -> float:
        return self.alpha_ij * phi**2 - 2.0 * self.beta_ij * phi + self.baseline_cost


@dataclass(frozen=True, eq=False)
class DesignStep:
    plan: EdgePlan
    applied_rho: float
    cost_before: float
    cost_after: float


@dataclass(frozen=True, eq=False)
class BidirectCertificate:
    nash_cost_new: float
    opt_cost_old: float
    ratio: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.ratio <= self.bound + 1e-9


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    edges: tuple
    cost: float
    baseline_cost: float
    evaluated: int


@dataclass(frozen=True, eq=False)
class ImprovementCheck:
    ratio: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.ratio <= self.bound + 1e-9


def _base_directed(g: Graph) -> Graph:
    if not g.is_base_model:
        raise UnsupportedError("network design assumes unit node weights and no fixed nodes")
    return g.to_directed()


def _check_pair(g: Graph, i: int, j: int):
    if i == j:
        raise GraphError("edge endpoints must differ")
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise GraphError(f"node index out of range for n={g.n}")


def influence_matrix(g: Graph) -> np.ndarray:
    """Columns are the influence vectors ``v_i = (L + I)^{-1} e_i``."""
    g = _base_directed(g)
    L = laplacians(g).L
    return solve_linear(L + np.eye(g.n), np.eye(g.n))


def influence_vector(g: Graph, i: int, sep: float = 1e-12) -> InfluenceVector:
    """Equilibrium response to the opinion vector ``e_i``; entries in [0, 1], maximal at ``i``."""
    g = _base_directed(g)
    if not 0 <= i < g.n:
        raise GraphError(f"node index out of range for n={g.n}")
    e = np.zeros(g.n)
    e[i] = 1.0
    v = solve_linear(laplacians(g).L + np.eye(g.n), e)
    if v.min(initial=0.0) < -sep or v.max() > 1.0 + sep:
        raise NumericalError("influence vector left [0, 1]")
    others = np.delete(v, i)
    if others.size and others.max() > v[i] - sep:
        raise NumericalError(f"influence vector of node {i} is not uniquely maximal at {i}")
    return InfluenceVector(source=i, values=v)


def rank_one_nash(g: Graph, i: int, j: int, rho: float) -> np.ndarray:
    """Equilibrium after adding weight ``rho`` to ``(i, j)``, by Sherman-Morrison."""
    _check_pair(g, i, j)
    g = _base_directed(g)
    y = nash_direct(g).opinions
    v = influence_vector(g, i).values
    phi = rho * (y[i] - y[j]) / (1.0 + rho * (v[i] - v[j]))
    return y - phi * v


def _plan_terms(g: Graph, i: int, j: int):
    A = laplacians(g).A
    y = nash_direct(g).opinions
    v = influence_vector(g, i).values
    residual = A @ y + y - g.opinions
    d = y[i] - y[j]
    delta = v[i] - v[j]
    alpha = float(v @ (A @ v) + v @ v - delta)
    beta = float(v @ residual - 0.5 * d)
    return y, v, d, delta, alpha, beta


def optimal_edge_weight(g: Graph, i: int, j: int, rho_cap: float = RHO_CAP) -> EdgePlan:
    """Best weight to add to ``(i, j)``: minimise the cost quadratic over ``phi`` in ``[0, phi_max]``.

    ``phi_max`` is the limit ``rho -> inf`` (``i`` and ``j`` agree).  A plan at
    that limit is marked saturated and carries ``rho_cap`` as its weight to apply.
    """
    _check_pair(g, i, j)
    g = _base_directed(g)
    y, v, d, delta, alpha, beta = _plan_terms(g, i, j)
    baseline = social_cost(g, y)
    gamma = d * d - 2.0 * d * float(v @ (laplacians(g).A @ y + y - g.opinions))

    def q(phi):
        return alpha * phi * phi - 2.0 * beta * phi + baseline

    if abs(d) <= 1e-14 * max(1.0, float(np.abs(y).max())):
        return EdgePlan(i, j, 0.0, False, 0.0, 0.0, 0.0, alpha, beta, 0.0, baseline, baseline)

    phi_max = d / delta
    lo, hi = min(0.0, phi_max), max(0.0, phi_max)
    candidates = [0.0]
    if alpha > 0:
        stat = beta / alpha
        if lo < stat < hi:
            candidates.append(stat)
    candidates.append(phi_max)
    phi_star, best = 0.0, q(0.0)
    for phi in candidates[1:]:
        val = q(phi)
        if val < best:
            phi_star, best = phi, val

    saturated = abs(phi_star - phi_max) <= SATURATION_RTOL * abs(phi_max)
    if saturated:
        rho_star, rho_apply = math.inf, rho_cap
    else:
        rho_star = phi_star / (d - phi_star * delta)
        rho_apply = rho_star
    return EdgePlan(
        i=i,
        j=j,
        rho_star=rho_star,
        saturated=saturated,
        rho_apply=rho_apply,
        phi_star=phi_star,
        phi_max=phi_max,
        alpha_ij=alpha,
        beta_ij=beta,
        gamma_ij=gamma,
        predicted_cost=best,
        baseline_cost=baseline,
    )


def phi_of_rho(y, v, i: int, j: int, rho: float) -> float:
    return rho * (y[i] - y[j]) / (1.0 + rho * (v[i] - v[j]))


def edge_gradient(g: Graph, i: int, j: int) -> float:
    """Derivative of the equilibrium social cost in the weight of ``(i, j)`` at zero added weight."""
    _check_pair(g, i, j)
    g = _base_directed(g)
    y = nash_direct(g).opinions
    v = influence_vector(g, i).values
    r = laplacians(g).A @ y + y - g.opinions
    d = y[i] - y[j]
    return float(d * d - 2.0 * d * (v @ r))


def all_gradients(g: Graph) -> np.ndarray:
    """``gamma[i, j]`` for every ordered pair (diagonal is zero)."""
    g = _base_directed(g)
    y = nash_direct(g).opinions
    V = influence_matrix(g)
    r = laplacians(g).A @ y + y - g.opinions
    proj = V.T @ r  # proj[i] = v_i . r
    D = y[:, None] - y[None, :]
    G = D * D - 2.0 * D * proj[:, None]
    np.fill_diagonal(G, 0.0)
    return G


def steepest_descent_design(
    g: Graph,
    budget: int,
    step_weight: float = 1.0,
    candidates=None,
    rho_cap: float = RHO_CAP,
) -> tuple[Graph, list[DesignStep]]:
    """Greedy edge additions along the most negative gradient component.

    Each step adds the optimal weight for the chosen edge, capped at
    ``step_weight``; stops early once no candidate has a negative gradient.
    """
    if step_weight <= 0:
        raise ValueError("step_weight must be positive")
    g = _base_directed(g)
    if candidates is None:
        candidates = [(i, j) for i in range(g.n) for j in range(g.n) if i != j]
    candidates = sorted({(int(i), int(j)) for i, j in candidates})
    for i, j in candidates:
        _check_pair(g, i, j)
    log: list[DesignStep] = []
    if not candidates:
        return g, log
    rows = np.array([c[0] for c in candidates])
    cols = np.array([c[1] for c in candidates])
    for _ in range(max(budget, 0)):
        G = all_gradients(g)[rows, cols]
        k = int(np.argmin(G))  # first minimum = lexicographic tie-break
        if G[k] >= -1e-12:
            break
        i, j = candidates[k]
        plan = optimal_edge_weight(g, i, j, rho_cap=rho_cap)
        rho = min(plan.rho_apply, step_weight)
        if rho <= 0:
            break
        before = plan.baseline_cost
        g = add_edge_weight(g, i, j, rho)
        after = nash_direct(g).social_cost
        log.append(DesignStep(plan=plan, applied_rho=rho, cost_before=before, cost_after=after))
    return g, log


def bidirect_approx(g: Graph, weighted: bool = False) -> tuple[Graph, BidirectCertificate]:
    """Add reverse copies of edges and certify the new equilibrium against the old optimum.

    Unweighted variant: add ``(j, i)`` only where missing (ratio <= 9/4).
    Weighted variant: add a reverse copy of every edge (ratio <= 2).
    """
    opt_old = social_opt(g).social_cost
    if not g.directed:
        new = g
        bound = 9.0 / 8.0
    else:
        present = {(i, j) for i, j, _ in g.edges}
        if weighted:
            extra = [(j, i, w) for i, j, w in g.edges]
            bound = 2.0
        else:
            extra = [(j, i, w) for i, j, w in g.edges if (j, i) not in present]
            bound = 9.0 / 4.0
        new = add_edges(g, extra)
        W = new.weights
        if np.array_equal(W, W.T):
            und = [(i, j, W[i, j]) for i in range(g.n) for j in range(i + 1, g.n) if W[i, j] > 0]
            new = new.replace(edges=tuple(und), directed=False)
    nash_new = nash_direct(new).social_cost
    if opt_old <= 1e-14 * max(1.0, float(np.dot(g.opinions, g.opinions))):
        ratio = 1.0
    else:
        ratio = nash_new / opt_old
    return new, BidirectCertificate(nash_cost_new=nash_new, opt_cost_old=opt_old, ratio=ratio, bound=bound)


def restricted_cost(g: Graph, z, exclude=None) -> float:
    """Social cost, optionally leaving out the costs of the nodes in ``exclude``."""
    c = node_costs(g, z)
    if exclude:
        c = c.copy()
        c[list(exclude)] = 0.0
    return float(c.sum())


def brute_force_design(
    g: Graph,
    candidates,
    k: int,
    unit_weight: float = 1.0,
    exclude=None,
    tol: float = 1e-12,
) -> BruteForceResult:
    """Exhaustive search over candidate edge subsets of size at most ``k``.

    Minimises the equilibrium social cost, ignoring the costs of the nodes in
    ``exclude``.  Among equal costs (within ``tol``) the lexicographically
    first subset wins.
    """
    candidates = sorted({(int(i), int(j)) for i, j in candidates})
    if len(candidates) > BRUTE_FORCE_MAX_CANDIDATES:
        raise UnsupportedError(
            f"brute force limited to {BRUTE_FORCE_MAX_CANDIDATES} candidate edges, got {len(candidates)}"
        )
    for i, j in candidates:
        _check_pair(g, i, j)
    exclude = None if exclude is None else [exclude] if isinstance(exclude, (int, np.integer)) else list(exclude)
    baseline = restricted_cost(g, nash_direct(g).opinions, exclude)
    best_edges, best_cost, evaluated = (), baseline, 1
    for size in range(1, max(k, 0) + 1):
        for subset in itertools.combinations(candidates, size):
            h = add_edges(g, [(i, j, unit_weight) for i, j in subset])
            c = restricted_cost(h, nash_direct(h).opinions, exclude)
            evaluated += 1
            if c < best_cost - tol:
                best_edges, best_cost = subset, c
    return BruteForceResult(edges=best_edges, cost=best_cost, baseline_cost=baseline, evaluated=evaluated)


def improvement_bound_check(g: Graph, g_prime: Graph) -> ImprovementCheck:
    """Equilibrium-cost improvement from ``g`` to a supergraph ``g_prime``, against ``PoA(g)``."""
    if g.n != g_prime.n or not np.array_equal(g.opinions, g_prime.opinions):
        raise GraphError("graphs must share nodes and internal opinions")
    if np.any(g_prime.to_directed().weights < g.to_directed().weights - 1e-12):
        raise GraphError("edge sets are not nested")
    before = nash_direct(g).social_cost
    after = nash_direct(g_prime).social_cost
    bound = poa(g).poa
    if after <= 1e-14 * max(1.0, float(np.dot(g.opinions, g.opinions))):
        ratio = 1.0
    else:
        ratio = before / after
    return ImprovementCheck(ratio=ratio, bound=bound)
