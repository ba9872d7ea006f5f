"""Price of anarchy: for a given opinion vector, worst case over opinion vectors,
and the spectral bounds for undirected, Eulerian and expander graphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .equilibrium import nash_direct, node_costs, social_cost, social_opt
from .errors import NumericalError, UnsupportedError
from .graph import Graph, connected_components, is_eulerian, laplacians, max_degree
from .linalg import gen_eigen_max, fix_sign, solve_linear, sym_eigen

ZERO_EIG_TOL = 1e-9
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PoAReport:
    poa: float
    nash_cost: float | None = None
    opt_cost: float | None = None
    worst_s: np.ndarray | None = None
    extremal_eigenvalue: float | None = None
    per_component: list = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class CostMatrices:
    B: np.ndarray
    C: np.ndarray
    P: np.ndarray


def _ratio(nash: float, opt: float, scale: float) -> float:
    # Both costs vanish only for opinions constant on every component; the game is then optimal.
    if opt <= 1e-14 * max(scale, 1.0):
        return 1.0
    return nash / opt


def poa(g: Graph, s=None) -> PoAReport:
    """Ratio of equilibrium to optimal social cost for the opinions ``s`` (default ``g.opinions``)."""
    if s is not None:
        g = g.with_opinions(s)
    y = nash_direct(g).opinions
    x = social_opt(g).opinions
    scale = float(np.dot(g.opinions, g.opinions))
    total_nash = social_cost(g, y)
    total_opt = social_cost(g, x)
    cy, cx = node_costs(g, y), node_costs(g, x)
    per = []
    for comp in connected_components(g):
        nc, oc = float(cy[comp].sum()), float(cx[comp].sum())
        per.append((comp, _ratio(nc, oc, scale)))
    return PoAReport(
        poa=_ratio(total_nash, total_opt, scale),
        nash_cost=total_nash,
        opt_cost=total_opt,
        per_component=per,
    )


def phi_curve(lam: float) -> float:
    """Equilibrium/optimum cost ratio along an eigenvector of ``A`` with eigenvalue ``lam``."""
    if lam < 0:
        raise ValueError("eigenvalue must be nonnegative")
    return (lam + 4.0) * (lam + 1.0) / (lam + 2.0) ** 2


def _require_undirected(g: Graph):
    if g.directed:
        raise UnsupportedError("analysis requires an undirected graph")


def _scaled_A(g: Graph):
    """``A`` in variables scaled by ``sqrt(w)`` so that node weights become 1."""
    A = np.array(laplacians(g).A)
    if g.node_weights is None:
        return A, None
    w = np.asarray(g.node_weights)
    if np.any(w <= 0):
        raise UnsupportedError("worst-case scaling needs strictly positive node weights")
    r = 1.0 / np.sqrt(w)
    return A * r[:, None] * r[None, :], r


def undirected_worst(g: Graph) -> PoAReport:
    """Worst-case PoA of an undirected graph: max of ``phi`` over nonzero eigenvalues of ``A``.

    The maximising eigenvector (scaled back through the node weights, if any)
    is a worst-case opinion vector.
    """
    _require_undirected(g)
    if g.fixed:
        raise UnsupportedError("worst-case analysis is not defined for fixed-opinion instances")
    A, r = _scaled_A(g)
    best, best_lam, best_vec = 1.0, None, None
    per = []
    for comp in connected_components(g):
        if len(comp) < 2:
            per.append((comp, 1.0))
            continue
        dec = sym_eigen(A[np.ix_(comp, comp)])
        lam = dec.eigenvalues
        tol = ZERO_EIG_TOL * max(1.0, abs(lam[-1]))
        cand = [(phi_curve(max(l, 0.0)), k) for k, l in enumerate(lam) if l > tol]
        if not cand:
            per.append((comp, 1.0))
            continue
        # first eigenvalue attaining the max (ascending order)
        ratio, k = max(cand, key=lambda t: (t[0], -t[1]))
        per.append((comp, ratio))
        if ratio > best or best_vec is None:
            v = np.zeros(g.n)
            v[comp] = dec.eigenvectors[:, k]
            lam_k = lam[k]
            v /= math.sqrt(lam_k / (1.0 + lam_k))  # unit optimal cost
            best, best_lam, best_vec = ratio, float(lam_k), v
    worst = None
    if best_vec is not None:
        worst = best_vec if r is None else best_vec * r
        worst = fix_sign(worst)
    return PoAReport(poa=best, worst_s=worst, extremal_eigenvalue=best_lam, per_component=per)


def scale_to_tight(g: Graph, which_eigenvalue: int) -> float:
    """Weight scale making eigenvalue ``which_eigenvalue`` (ascending) of ``A`` equal to 2."""
    _require_undirected(g)
    lam = sym_eigen(laplacians(g).A).eigenvalues
    if not 0 <= which_eigenvalue < len(lam):
        raise IndexError(f"eigenvalue index {which_eigenvalue} out of range")
    l = lam[which_eigenvalue]
    if l <= ZERO_EIG_TOL * max(1.0, abs(lam[-1])):
        raise ValueError("cannot scale a zero eigenvalue to 2")
    return 2.0 / float(l)


def mean_zero_basis(m: int) -> np.ndarray:
    """``m x (m-1)`` basis of mean-zero vectors: ``P[j, j] = 1``, ``P[j+1, j] = -1``."""
    P = np.zeros((m, max(m - 1, 0)))
    for j in range(m - 1):
        P[j, j] = 1.0
        P[j + 1, j] = -1.0
    return P


def _symmetrize(M: np.ndarray, name: str) -> np.ndarray:
    asym = np.abs(M - M.T).max(initial=0.0)
    if asym > SYMMETRY_TOL * max(1.0, np.abs(M).max(initial=0.0)):
        raise NumericalError(f"{name} is not symmetric (asymmetry {asym:.2e})")
    return 0.5 * (M + M.T)


def _require_base(g: Graph):
    if not g.is_base_model:
        raise UnsupportedError("analysis assumes unit node weights and no fixed nodes")


def cost_matrices(g: Graph) -> CostMatrices:
    """``B``, ``C`` with ``c(opt) = s^T B s`` and ``c(nash) = s^T C s``, plus the mean-zero basis."""
    _require_base(g)
    pair = laplacians(g)
    n = g.n
    I = np.eye(n)
    B = I - solve_linear(pair.A + I, I)
    Linv = solve_linear(pair.L + I, I)
    D = Linv - I
    C = D.T @ D + Linv.T @ pair.A @ Linv
    return CostMatrices(
        B=_symmetrize(B, "B"),
        C=_symmetrize(C, "C"),
        P=mean_zero_basis(n),
    )


def directed_worst(g: Graph) -> PoAReport:
    """Worst-case PoA as the largest generalised eigenvalue of ``(P^T C P, P^T B P)``.

    Runs per connected component of the symmetrised graph, where ``P^T B P`` is
    positive definite; the reported opinion vector is mean-zero with unit
    optimal cost.
    """
    _require_base(g)
    mats = cost_matrices(g)
    best, best_vec = 1.0, None
    per = []
    for comp in connected_components(g):
        m = len(comp)
        if m < 2:
            per.append((comp, 1.0))
            continue
        idx = np.ix_(comp, comp)
        P = mean_zero_basis(m)
        Bbar = P.T @ mats.B[idx] @ P
        Cbar = P.T @ mats.C[idx] @ P
        lam, xhat = gen_eigen_max(Cbar, Bbar)
        per.append((comp, lam))
        if best_vec is None or lam > best:
            v = np.zeros(g.n)
            v[comp] = P @ xhat
            best, best_vec = lam, v
    if best_vec is None:
        return PoAReport(poa=1.0, per_component=per)
    return PoAReport(poa=best, worst_s=fix_sign(best_vec), extremal_eigenvalue=best, per_component=per)


def worst_case(g: Graph) -> PoAReport:
    return directed_worst(g) if g.directed else undirected_worst(g)


def _require_eulerian(g: Graph):
    if not is_eulerian(g):
        raise UnsupportedError("graph is not Eulerian")


def eulerian_M(g: Graph, tol: float = 1e-8) -> np.ndarray:
    """``M = (I - C)^{-1} - I``, checked against ``A + L L^T``; returns the latter."""
    _require_eulerian(g)
    _require_base(g)
    pair = laplacians(g)
    n = g.n
    I = np.eye(n)
    C = cost_matrices(g).C
    M_schur = solve_linear(I - C, I) - I
    M = pair.A + pair.L @ pair.L.T
    err = np.abs(M_schur - M).max(initial=0.0)
    if err > tol * max(1.0, np.abs(M).max(initial=0.0)):
        raise NumericalError(f"(I-C)^-1 - I differs from A + LL^T by {err:.3e}")
    return M


def min_g(g: Graph, rtol: float = 1e-9) -> tuple[float, np.ndarray]:
    """Minimise ``z^T M z + |z - s|^2`` with ``M = (I - C)^{-1} - I``.

    The minimum equals the equilibrium social cost; the equality is checked.
    """
    _require_base(g)
    n = g.n
    I = np.eye(n)
    C = cost_matrices(g).C
    M = solve_linear(I - C, I) - I
    M = 0.5 * (M + M.T)
    s = np.asarray(g.opinions)
    z = solve_linear(M + I, s)
    value = float(z @ M @ z + np.sum((z - s) ** 2))
    nash = nash_direct(g).social_cost
    if abs(value - nash) > rtol * max(nash, 1e-300) and abs(value - nash) > 1e-14:
        raise NumericalError(f"min g = {value!r} differs from equilibrium cost {nash!r}")
    return value, z


def lambda2(g: Graph, comp=None) -> float:
    """Second-smallest eigenvalue of ``A`` (restricted to ``comp`` when given)."""
    A = laplacians(g).A
    if comp is not None:
        A = A[np.ix_(comp, comp)]
    lam = sym_eigen(A).eigenvalues
    if len(lam) < 2:
        raise UnsupportedError("lambda_2 needs at least two nodes")
    return float(lam[1])


def eulerian_beta(g: Graph, check_bound: bool = True) -> float:
    """Smallest ``beta`` with ``z^T L L^T z <= (beta - 1) z^T A z``, plus one.

    Computed per component as ``1 + lambda_max(P^T L L^T P, P^T A P)``.  For
    unit weights ``beta <= 1 + max degree`` is asserted.
    """
    _require_eulerian(g)
    pair = laplacians(g)
    LLt = pair.L @ pair.L.T
    beta = 1.0
    for comp in connected_components(g):
        m = len(comp)
        if m < 2:
            continue
        P = mean_zero_basis(m)
        idx = np.ix_(comp, comp)
        lam, _ = gen_eigen_max(P.T @ LLt[idx] @ P, P.T @ pair.A[idx] @ P)
        beta = max(beta, 1.0 + lam)
    if check_bound and g.edges and all(w == 1.0 for _, _, w in g.edges):
        bound = max_degree(g) + 1.0
        if beta > bound + 1e-9:
            raise NumericalError(f"beta={beta} exceeds max degree + 1 = {bound}")
    return beta


def poa_bound_from_beta(beta: float, lambda2: float) -> float:
    if lambda2 <= 0:
        raise ValueError("lambda_2 must be positive (connected symmetrised graph)")
    if beta < 1:
        raise ValueError("beta must be at least 1")
    return (beta + beta * lambda2) / (1.0 + beta * lambda2)


def expander_bound(delta: float, alpha: float) -> float:
    if alpha <= 0:
        raise ValueError("edge expansion must be positive")
    if delta < 1:
        raise ValueError("max degree must be at least 1")
    return 2.0 * delta * (1.0 + delta) / alpha**2


def tree_nash_cost(k: int, depth: int) -> tuple[float, list[float]]:
    """Equilibrium cost of the in-directed ``2^k``-ary tree with root opinion 1.

    Layer ``i`` holds opinion ``2^-i`` and each of its ``2^{ik}`` nodes pays
    ``2 * 2^{-2i}``.  For ``k > 2`` the geometric sum has the closed form
    ``2^{k-1} (n^{(k-2)/k} - 1) / (2^{k-2} - 1)`` with ``n = 2^{k * depth}``.
    """
    if k < 1 or depth < 0:
        raise ValueError("need k >= 1 and depth >= 0")
    layers = [2.0**-i for i in range(depth + 1)]
    if depth == 0:
        return 0.0, layers
    if k > 2:
        n = 2.0 ** (k * depth)
        cost = 2.0 ** (k - 1) * (n ** ((k - 2) / k) - 1.0) / (2.0 ** (k - 2) - 1.0)
    else:
        cost = sum(2.0 ** (i * k) * 2.0 ** (1 - 2 * i) for i in range(1, depth + 1))
    return cost, layers
