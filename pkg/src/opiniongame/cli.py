"""Command-line interface: ``opiniongame <command> GRAPH [options]``.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 analysis not
supported for the instance.
"""

from __future__ import annotations

import functools
import sys
import time

import click
import numpy as np

from . import design, equilibrium, generators
from .poa import (
    directed_worst,
    eulerian_beta,
    expander_bound,
    lambda2,
    poa_bound_from_beta,
    undirected_worst,
)
from .poa import poa as poa_report
from .errors import GraphError, NumericalError, UnsupportedError
from .graph import (
    Graph,
    connected_components,
    edge_expansion,
    graph_to_doc,
    is_eulerian,
    max_degree,
    read_graph,
    write_graph,
)
from .linalg import EIGEN_RTOL, SOLVE_RTOL
from .report import render_json, render_tsv

EXIT_INPUT, EXIT_NUMERIC, EXIT_UNSUPPORTED = 2, 3, 4
DEFAULT_TOL = 1e-12


class Settings:
    def __init__(self, tol, seed, fmt):
        self.tol = DEFAULT_TOL if tol is None else tol
        self.seed = seed
        self.fmt = fmt


def _guarded(fn):
    """Map library exceptions onto the exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except UnsupportedError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_UNSUPPORTED)
        except (GraphError, ValueError, IndexError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_INPUT)
        except (NumericalError, np.linalg.LinAlgError, ArithmeticError) as e:
            click.echo(f"numerical failure: {e}", err=True)
            sys.exit(EXIT_NUMERIC)

    return wrapper


def _load(path: str) -> Graph:
    if path == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise GraphError(f"cannot read {path}: {e.strerror}") from None
    return read_graph(text)


def _digest(g: Graph) -> dict:
    return {"n": g.n, "edges": len(g.edges), "directed": g.directed}


def _emit(ctx: click.Context, command: str, g: Graph | None, result: dict, t0: float):
    st: Settings = ctx.obj
    report = {
        "command": command,
        "input": _digest(g) if g is not None else None,
        "result": result,
        "tolerance": {"tol": st.tol, "solve_rtol": SOLVE_RTOL, "eigen_rtol": EIGEN_RTOL},
        "elapsed_s": round(time.perf_counter() - t0, 6),
    }
    click.echo(render_tsv(report) if st.fmt == "tsv" else render_json(report))


def _components(per) -> list[dict]:
    return [{"nodes": list(nodes), "poa": r} for nodes, r in per]


def _plan_dict(p: design.EdgePlan) -> dict:
    return {
        "i": p.i,
        "j": p.j,
        "rho_star": None if p.saturated else p.rho_star,
        "saturated": p.saturated,
        "rho_apply": p.rho_apply,
        "phi_star": p.phi_star,
        "phi_max": p.phi_max,
        "alpha_ij": p.alpha_ij,
        "beta_ij": p.beta_ij,
        "gamma_ij": p.gamma_ij,
        "predicted_cost": p.predicted_cost,
        "baseline_cost": p.baseline_cost,
    }


def _pairs(text: str | None):
    """Parse ``"0:1,2:3"`` into ``[(0, 1), (2, 3)]``."""
    if not text:
        return []
    out = []
    for tok in text.split(","):
        a, sep, b = tok.strip().partition(":")
        if not sep:
            raise GraphError(f"edge {tok!r} must look like src:dst")
        out.append((int(a), int(b)))
    return out


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


graph_arg = click.argument("graph", type=str)


@click.group()
@click.option("--tol", type=float, default=None, help="Iterative / identity-check tolerance (default 1e-12).")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for random generators.")
@click.option("--format", "fmt", type=click.Choice(["json", "tsv"]), default="json", show_default=True)
@click.version_option(package_name="opiniongame")
@click.pass_context
def main(ctx, tol, seed, fmt):
    """Equilibria, price of anarchy and network design for the opinion-formation game.

    GRAPH arguments are graph documents (JSON); use '-' for standard input.
    """
    if tol is not None and not tol > 0:
        raise click.BadParameter("must be positive", param_hint="--tol")
    ctx.obj = Settings(tol, seed, fmt)


@main.command()
@graph_arg
@click.option("--method", type=click.Choice(["direct", "iterative"]), default="direct", show_default=True)
@click.option("--max-iter", type=int, default=None, help="Iteration cap for --method iterative.")
@click.pass_context
@_guarded
def nash(ctx, graph, method, max_iter):
    """Nash equilibrium opinions and their social cost."""
    t0 = time.perf_counter()
    g = _load(graph)
    if method == "direct":
        res = equilibrium.nash_direct(g)
    else:
        res = equilibrium.nash_iterative(g, tol=ctx.obj.tol, max_iter=max_iter)
    _emit(
        ctx,
        "nash",
        g,
        {
            "method": method,
            "opinions": res.opinions,
            "social_cost": res.social_cost,
            "residual": res.residual,
            "iterations": res.iterations,
            "converged": res.converged,
        },
        t0,
    )
    if not res.converged:
        click.echo("numerical failure: iteration limit reached before convergence", err=True)
        sys.exit(EXIT_NUMERIC)


@main.command()
@graph_arg
@click.pass_context
@_guarded
def opt(ctx, graph):
    """Socially optimal opinions and their cost."""
    t0 = time.perf_counter()
    g = _load(graph)
    res = equilibrium.social_opt(g)
    _emit(ctx, "opt", g, {"opinions": res.opinions, "social_cost": res.social_cost, "residual": res.residual}, t0)


@main.command()
@graph_arg
@click.pass_context
@_guarded
def poa(ctx, graph):
    """Price of anarchy for the graph's own internal opinions."""
    t0 = time.perf_counter()
    g = _load(graph)
    rep = poa_report(g)
    _emit(
        ctx,
        "poa",
        g,
        {
            "poa": rep.poa,
            "nash_cost": rep.nash_cost,
            "opt_cost": rep.opt_cost,
            "per_component": _components(rep.per_component),
        },
        t0,
    )


@main.command()
@graph_arg
@click.option(
    "--method",
    type=click.Choice(["auto", "directed", "undirected"]),
    default="auto",
    show_default=True,
    help="'undirected' uses the eigenvalue curve, 'directed' the generalised eigenproblem.",
)
@click.pass_context
@_guarded
def worst(ctx, graph, method):
    """Worst-case price of anarchy over internal opinions, with a maximising vector."""
    t0 = time.perf_counter()
    g = _load(graph)
    if method == "auto":
        method = "directed" if g.directed else "undirected"
    rep = directed_worst(g) if method == "directed" else undirected_worst(g)
    _emit(
        ctx,
        "worst",
        g,
        {
            "method": method,
            "poa": rep.poa,
            "worst_s": rep.worst_s,
            "extremal_eigenvalue": rep.extremal_eigenvalue,
            "per_component": _components(rep.per_component),
        },
        t0,
    )


@main.command()
@graph_arg
@click.pass_context
@_guarded
def bounds(ctx, graph):
    """Eulerian beta, the PoA bound it implies, and the expander bound."""
    t0 = time.perf_counter()
    g = _load(graph)
    if not g.is_base_model:
        raise UnsupportedError("bounds are defined for the base game only")
    if not is_eulerian(g):
        raise UnsupportedError("graph is not Eulerian")
    if g.n < 2 or len(connected_components(g)) != 1:
        raise UnsupportedError("bounds need a connected graph with at least two nodes")
    beta = eulerian_beta(g)
    lam2 = lambda2(g)
    delta = max_degree(g)
    try:
        alpha = edge_expansion(g)
    except UnsupportedError:
        alpha = None
    exp_bound = expander_bound(delta, alpha) if alpha and delta >= 1 else None
    worst_rep = directed_worst(g.to_directed())
    _emit(
        ctx,
        "bounds",
        g,
        {
            "beta": beta,
            "lambda2": lam2,
            "beta_bound": poa_bound_from_beta(beta, lam2),
            "max_degree": delta,
            "edge_expansion": alpha,
            "expander_bound": exp_bound,
            "worst_poa": worst_rep.poa,
        },
        t0,
    )


@main.group(name="design")
def design_group():
    """Edge-addition analysis and design heuristics."""


@design_group.command(name="edge")
@graph_arg
@click.option("--from", "src", type=int, required=True, help="Node that gains the out-edge.")
@click.option("--to", "dst", type=int, required=True, help="Node it starts listening to.")
@click.option("--rho-cap", type=float, default=design.RHO_CAP, show_default=True)
@click.pass_context
@_guarded
def design_edge(ctx, graph, src, dst, rho_cap):
    """Optimal weight to add on a single directed edge."""
    t0 = time.perf_counter()
    g = _load(graph)
    plan = design.optimal_edge_weight(g, src, dst, rho_cap=rho_cap)
    _emit(ctx, "design edge", g, {"plan": _plan_dict(plan)}, t0)


@design_group.command(name="greedy")
@graph_arg
@click.option("--budget", type=int, default=1, show_default=True, help="Maximum number of additions.")
@click.option("--cap", type=float, default=1.0, show_default=True, help="Largest weight added per step.")
@click.option("--candidates", type=str, default=None, help="Candidate edges as 'i:j,...' (default all pairs).")
@click.option("--rho-cap", type=float, default=design.RHO_CAP, show_default=True)
@click.pass_context
@_guarded
def design_greedy(ctx, graph, budget, cap, candidates, rho_cap):
    """Steepest-descent edge additions."""
    t0 = time.perf_counter()
    g = _load(graph)
    if budget < 0:
        raise GraphError("budget must be nonnegative")
    initial = equilibrium.nash_direct(g).social_cost
    cand = _pairs(candidates) or None
    final, log = design.steepest_descent_design(g, budget, step_weight=cap, candidates=cand, rho_cap=rho_cap)
    steps = [
        {
            "i": s.plan.i,
            "j": s.plan.j,
            "gamma_ij": s.plan.gamma_ij,
            "applied_rho": s.applied_rho,
            "cost_before": s.cost_before,
            "cost_after": s.cost_after,
        }
        for s in log
    ]
    final_cost = log[-1].cost_after if log else initial
    _emit(
        ctx,
        "design greedy",
        g,
        {"initial_cost": initial, "final_cost": final_cost, "steps": steps, "graph": graph_to_doc(final)},
        t0,
    )


@design_group.command(name="bidirect")
@graph_arg
@click.option("--weighted", is_flag=True, help="Add a reverse copy of every edge (bound 2 instead of 9/4).")
@click.pass_context
@_guarded
def design_bidirect(ctx, graph, weighted):
    """Add reverse edges and certify the new equilibrium against the old optimum."""
    t0 = time.perf_counter()
    g = _load(graph)
    new, cert = design.bidirect_approx(g, weighted=weighted)
    _emit(
        ctx,
        "design bidirect",
        g,
        {
            "nash_cost_new": cert.nash_cost_new,
            "opt_cost_old": cert.opt_cost_old,
            "ratio": cert.ratio,
            "bound": cert.bound,
            "holds": cert.holds,
            "graph": graph_to_doc(new),
        },
        t0,
    )


@design_group.command(name="brute")
@graph_arg
@click.option("--k", "k", type=int, required=True, help="Largest number of edges to add.")
@click.option("--candidates", type=str, default=None, help="Candidate edges 'i:j,...' (default: all absent pairs).")
@click.option("--weight", type=float, default=1.0, show_default=True, help="Weight of each added edge.")
@click.option("--exclude", type=str, default=None, help="Nodes whose own cost is ignored, e.g. '0,3'.")
@click.pass_context
@_guarded
def design_brute(ctx, graph, k, candidates, weight, exclude):
    """Exhaustive search over candidate subsets of size at most k."""
    t0 = time.perf_counter()
    g = _load(graph)
    cand = _pairs(candidates)
    if not cand:
        present = {(i, j) for i, j, _ in g.to_directed().edges}
        cand = [(i, j) for i in range(g.n) for j in range(g.n) if i != j and (i, j) not in present]
    res = design.brute_force_design(
        g.to_directed(), cand, k, unit_weight=weight, exclude=_ints(exclude) if exclude else None
    )
    _emit(
        ctx,
        "design brute",
        g,
        {
            "edges": [list(e) for e in res.edges],
            "cost": res.cost,
            "baseline_cost": res.baseline_cost,
            "evaluated": res.evaluated,
        },
        t0,
    )


@main.group(name="gen")
def gen_group():
    """Write generated instances as graph documents."""


def _write(g: Graph):
    click.echo(write_graph(g))


@gen_group.command(name="path3")
def gen_path3():
    """Three-node path with opinions 0, 1/2, 1."""
    _write(generators.gen_path3())


@gen_group.command(name="star")
@click.option("--n", "n", type=int, default=9, show_default=True)
@_guarded
def gen_star(n):
    """In-directed star: n-1 leaves listening to centre 0."""
    _write(generators.gen_star(n))


@gen_group.command(name="tree")
@click.option("--k", "k", type=int, default=3, show_default=True, help="Branching factor is 2^k.")
@click.option("--depth", type=int, default=2, show_default=True)
@_guarded
def gen_tree(k, depth):
    """2^k-ary in-directed tree, root opinion 1."""
    _write(generators.gen_kary_tree(k, depth)[0])


@gen_group.command(name="cycle")
@click.option("--n", "n", type=int, default=8, show_default=True)
@_guarded
def gen_cycle(n):
    """Directed cycle with a worst-case opinion vector."""
    _write(generators.gen_cycle(n))


@gen_group.command(name="random")
@click.option("--n", "n", type=int, default=8, show_default=True)
@click.option("--density", type=float, default=0.3, show_default=True)
@click.option("--wmin", type=float, default=0.5, show_default=True)
@click.option("--wmax", type=float, default=2.0, show_default=True)
@click.option("--undirected", is_flag=True)
@click.pass_context
@_guarded
def gen_random(ctx, n, density, wmin, wmax, undirected):
    """Random weighted graph with uniform opinions in [0, 1]."""
    _write(generators.gen_random(n, density, (wmin, wmax), seed=ctx.obj.seed, directed=not undirected))


@gen_group.command(name="eulerian")
@click.option("--n", "n", type=int, default=8, show_default=True)
@click.option("--cycles", type=int, default=3, show_default=True)
@click.pass_context
@_guarded
def gen_eulerian(ctx, n, cycles):
    """Unit-weight Eulerian digraph from edge-disjoint random cycles."""
    _write(generators.gen_random_eulerian(n, cycles, seed=ctx.obj.seed))


@gen_group.command(name="gadget-subsetsum")
@click.option("--a", "a", type=str, required=True, help="Item sizes, e.g. '1,2,3'.")
@click.option("--t", "t", type=int, required=True, help="Target sum.")
@_guarded
def gen_subsetsum(a, t):
    """Subset-sum gadget (node 0 is w)."""
    _write(generators.gen_subset_sum_gadget(_ints(a), t).graph)


@gen_group.command(name="gadget-vc")
@click.option("--edges", type=str, required=True, help="Source graph edges 'i:j,...'.")
@_guarded
def gen_vc(edges):
    """Vertex-cover gadget for an undirected source graph."""
    _write(generators.gen_vertex_cover_gadget(_pairs(edges)).graph)


@gen_group.command(name="gadget-dks")
@click.option("--edges", type=str, required=True, help="Source graph edges 'i:j,...'.")
@click.option("--k", "k", type=int, default=1, show_default=True)
@_guarded
def gen_dks(edges, k):
    """Dense-k-subgraph gadget for an undirected source graph."""
    _write(generators.gen_dense_subgraph_gadget(_pairs(edges), k).graph)


if __name__ == "__main__":
    main()
