"""Named instances, seeded random families and the NP-hardness gadgets.

Gadgets come with the equilibrium costs they are designed to produce, keyed by
configuration, so the equilibrium solver can be checked against them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import GraphError
from .graph import Graph


@dataclass(frozen=True, eq=False)
class GadgetInstance:
    graph: Graph
    nodes: dict  # label -> node index, covers every node once
    roles: dict  # role name -> list of node indices
    expected_values: dict
    configurations: dict = field(default_factory=dict)  # key -> edges to add (unit weight)
    candidates: list = field(default_factory=list)
    excluded: int | None = None
    params: dict = field(default_factory=dict)


def gen_path3() -> Graph:
    return Graph(n=3, edges=((0, 1, 1.0), (1, 2, 1.0)), opinions=[0.0, 0.5, 1.0], directed=False)


def gen_star(n: int) -> Graph:
    """In-directed star: leaves ``1..n-1`` (opinion 0) all listen to centre 0 (opinion 1)."""
    if n < 2:
        raise GraphError("star needs n >= 2")
    s = np.zeros(n)
    s[0] = 1.0
    return Graph(n=n, edges=tuple((leaf, 0, 1.0) for leaf in range(1, n)), opinions=s)


def gen_kary_tree(k: int, depth: int) -> tuple[Graph, list[list[int]]]:
    """``2^k``-ary tree with edges child -> parent, root opinion 1, others 0.

    Returns the graph and its node layers (root layer first).
    """
    if k < 1 or depth < 0:
        raise GraphError("need k >= 1 and depth >= 0")
    b = 2**k
    layers = [[0]]
    edges = []
    nxt = 1
    for _ in range(depth):
        layer = []
        for parent in layers[-1]:
            for _ in range(b):
                edges.append((nxt, parent, 1.0))
                layer.append(nxt)
                nxt += 1
        layers.append(layer)
    s = np.zeros(nxt)
    s[0] = 1.0
    return Graph(n=nxt, edges=tuple(edges), opinions=s), layers


def gen_cycle(n: int, opinions=None) -> Graph:
    """Directed ``n``-cycle ``i -> i+1``; default opinions are a worst-case vector."""
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    edges = tuple((i, (i + 1) % n, 1.0) for i in range(n))
    if opinions is not None:
        return Graph(n=n, edges=edges, opinions=opinions)
    from .poa import directed_worst

    g = Graph(n=n, edges=edges, opinions=np.zeros(n))
    return g.with_opinions(directed_worst(g).worst_s)


def gen_random(
    n: int,
    density: float,
    weight_range=(0.5, 2.0),
    seed: int = 0,
    directed: bool = True,
    opinion_range=(0.0, 1.0),
) -> Graph:
    """Erdos-Renyi style graph: each (ordered, if directed) pair is an edge with prob ``density``."""
    if not 0 <= density <= 1:
        raise GraphError("density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    lo, hi = weight_range
    if directed:
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    else:
        pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < density
    weights = rng.uniform(lo, hi, size=len(pairs)) if hi > lo else np.full(len(pairs), float(lo))
    edges = tuple((i, j, float(w)) for (i, j), k, w in zip(pairs, keep, weights) if k)
    s = rng.uniform(*opinion_range, size=n)
    return Graph(n=n, edges=edges, opinions=s, directed=directed)


def gen_random_eulerian(n: int, cycles: int, seed: int = 0, max_attempts: int = 1000) -> Graph:
    """Unit-weight Eulerian digraph built from edge-disjoint random directed cycles."""
    if n < 3:
        raise GraphError("Eulerian generator needs n >= 3")
    rng = np.random.default_rng(seed)
    present: set[tuple[int, int]] = set()
    for _ in range(cycles):
        for _ in range(max_attempts):
            length = int(rng.integers(3, n + 1))
            nodes = [int(v) for v in rng.permutation(n)[:length]]
            cyc = [(nodes[t], nodes[(t + 1) % length]) for t in range(length)]
            if not present.intersection(cyc):
                present.update(cyc)
                break
    s = rng.uniform(0.0, 1.0, size=n)
    return Graph(n=n, edges=tuple((i, j, 1.0) for i, j in sorted(present)), opinions=s)


def gen_subset_sum_gadget(a, t: int) -> GadgetInstance:
    """Star of ``len(a)`` peripherals listening to ``w`` plus isolated items with opinions ``-a_i/t``.

    Adding edges from ``w`` to a set ``F`` of items gives cost (excluding ``w``)
    ``2n ((1 + sum_F s_j) / (2 (1 + |F|)))^2``, zero exactly when ``sum_F a = t``.
    """
    a = [int(x) for x in a]
    if t <= 0 or any(x <= 0 for x in a):
        raise GraphError("subset-sum gadget needs positive integers")
    m = len(a)
    n = 2 * m + 1
    s = np.zeros(n)
    s[0] = 1.0
    items = list(range(m + 1, 2 * m + 1))
    for k, node in enumerate(items):
        s[node] = -a[k] / t
    edges = tuple((p, 0, 1.0) for p in range(1, m + 1))
    g = Graph(n=n, edges=edges, opinions=s)
    nodes = {"w": 0}
    nodes.update({f"p{k}": k + 1 for k in range(m)})
    nodes.update({f"item{k}": items[k] for k in range(m)})
    expected = {}
    configs = {}
    for size in range(m + 1):
        for F in itertools.combinations(range(m), size):
            total = sum(s[items[k]] for k in F)
            expected[F] = 2 * m * ((1.0 + total) / (2.0 * (1 + len(F)))) ** 2
            configs[F] = [(0, items[k]) for k in F]
    return GadgetInstance(
        graph=g,
        nodes=nodes,
        roles={"w": [0], "peripheral": list(range(1, m + 1)), "item": items},
        expected_values=expected,
        configurations=configs,
        candidates=[(0, node) for node in items],
        excluded=0,
    )


def _edge_list(g_prime):
    if isinstance(g_prime, Graph):
        if g_prime.directed:
            raise GraphError("source graph must be undirected")
        return g_prime.n, [(i, j) for i, j, _ in g_prime.edges]
    pairs = sorted({(min(i, j), max(i, j)) for i, j in g_prime})
    if any(i == j for i, j in pairs):
        raise GraphError("source graph has a self-loop")
    m = max((j for _, j in pairs), default=-1) + 1
    return m, pairs


VC_PERIPHERALS = 24
DKS_PERIPHERALS = 20

# configuration -> (v in T, u_i in T, u_j in T), v opinion, star cost
VC_TABLE = {
    1: ((False, False, False), 1.0, 12.0),
    2: ((True, False, False), 0.0, 12.0),
    3: ((True, True, False), -0.5, 14.0),
    4: ((True, True, True), -1.0, 20.0),
    5: ((False, True, False), 1.0 / 3.0, 4.0),
    6: ((False, True, True), -1.0 / 3.0, 4.0),
}


def gen_vertex_cover_gadget(g_prime) -> GadgetInstance:
    """Vertex-cover gadget: adding edges *to* ``w`` (opinion -3).

    Per source edge ``(i, j)``: node ``v_ij`` (opinion 1) listening to ``u_i`` and
    ``u_j`` (opinion 1), with 24 peripherals (opinion 0) listening to ``v_ij``.
    ``expected_values`` gives ``v``'s opinion and its star's cost for the six
    configurations of the first source edge.
    """
    m, pairs = _edge_list(g_prime)
    if not pairs:
        raise GraphError("source graph needs at least one edge")
    nodes, edges, s = {}, [], []

    def add(label, opinion):
        nodes[label] = len(s)
        s.append(opinion)
        return nodes[label]

    v_nodes, stars = {}, {}
    for i, j in pairs:
        v = add(f"v({i},{j})", 1.0)
        v_nodes[(i, j)] = v
        stars[(i, j)] = [add(f"p({i},{j})#{k}", 0.0) for k in range(VC_PERIPHERALS)]
        edges += [(p, v, 1.0) for p in stars[(i, j)]]
    u_nodes = [add(f"u{i}", 1.0) for i in range(m)]
    for i, j in pairs:
        edges += [(v_nodes[(i, j)], u_nodes[i], 1.0), (v_nodes[(i, j)], u_nodes[j], 1.0)]
    w = add("w", -3.0)
    g = Graph(n=len(s), edges=tuple(edges), opinions=s)

    i0, j0 = pairs[0]
    trio = (v_nodes[(i0, j0)], u_nodes[i0], u_nodes[j0])
    configs, expected = {}, {}
    for key, (flags, opinion, cost) in VC_TABLE.items():
        configs[key] = [(node, w) for node, on in zip(trio, flags) if on]
        expected[key] = {"v_opinion": opinion, "star_cost": cost}
    return GadgetInstance(
        graph=g,
        nodes=nodes,
        roles={
            "v": list(v_nodes.values()),
            "peripheral": [p for ps in stars.values() for p in ps],
            "u": u_nodes,
            "w": [w],
            "measured_star": [trio[0]] + stars[(i0, j0)],
        },
        expected_values=expected,
        configurations=configs,
        candidates=[(x, w) for x in range(len(s)) if x != w],
    )


DKS_TABLE = {"both": 0.0, "one": 2.0 / 3.0, "neither": 2.0 / 3.0}


def gen_dense_subgraph_gadget(g_prime, k: int) -> GadgetInstance:
    """Dense-k-subgraph gadget: ``k`` arbitrary unit edges.

    Per source edge ``(i, j)``: node ``v_ij`` (opinion 0) listening to ``u_i``,
    ``u_j`` (opinion 1); each ``u_i`` has 20 peripherals; isolated ``w`` has
    opinion -1.  ``expected_values`` gives ``v``'s own cost for the first source
    edge with both, one, or neither endpoint linked to ``w``.
    """
    m, pairs = _edge_list(g_prime)
    if not pairs:
        raise GraphError("source graph needs at least one edge")
    nodes, edges, s = {}, [], []

    def add(label, opinion):
        nodes[label] = len(s)
        s.append(opinion)
        return nodes[label]

    v_nodes = {(i, j): add(f"v({i},{j})", 0.0) for i, j in pairs}
    u_nodes = [add(f"u{i}", 1.0) for i in range(m)]
    periph = []
    for i in range(m):
        ps = [add(f"p{i}#{t}", 0.0) for t in range(DKS_PERIPHERALS)]
        periph += ps
        edges += [(p, u_nodes[i], 1.0) for p in ps]
    for (i, j), v in v_nodes.items():
        edges += [(v, u_nodes[i], 1.0), (v, u_nodes[j], 1.0)]
    w = add("w", -1.0)
    g = Graph(n=len(s), edges=tuple(edges), opinions=s)
    i0, j0 = pairs[0]
    configs = {
        "both": [(u_nodes[i0], w), (u_nodes[j0], w)],
        "one": [(u_nodes[i0], w)],
        "neither": [],
    }
    return GadgetInstance(
        graph=g,
        nodes=nodes,
        roles={
            "v": list(v_nodes.values()),
            "u": u_nodes,
            "peripheral": periph,
            "w": [w],
            "measured_v": [v_nodes[(i0, j0)]],
        },
        expected_values=dict(DKS_TABLE),
        configurations=configs,
        candidates=[(u, w) for u in u_nodes],
        params={"k": k},
    )
