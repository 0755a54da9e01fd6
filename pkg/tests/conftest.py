import numpy as np

from graphreduce.graph import WeightedGraph


def random_connected_graph(
    rng: np.random.Generator,
    n: int,
    extra_edges: int = 0,
    weighted_nodes: bool = False,
    weight_range=(0.5, 2.0),
) -> WeightedGraph:
    """Random spanning tree plus extra edges; optionally non-unit node weights."""
    g = WeightedGraph()
    lo, hi = weight_range
    for v in range(1, n):
        u = int(rng.integers(v))
        g.add_edge(u, v, float(rng.uniform(lo, hi)))
    added = 0
    attempts = 0
    while added < extra_edges and attempts < 50 * (extra_edges + 1):
        attempts += 1
        u, v = rng.integers(n, size=2)
        if u == v or g.has_edge(int(u), int(v)):
            continue
        g.add_edge(int(u), int(v), float(rng.uniform(lo, hi)))
        added += 1
    if weighted_nodes:
        for u in g.nodes():
            g.add_node(u, float(rng.uniform(0.5, 3.0)))
    return g


def pinv_by_eigen(g: WeightedGraph) -> np.ndarray:
    """Independent pseudoinverse oracle via the symmetrized eigenproblem.

    Diagonalizes W^{1/2} L W^{-1/2}, inverts the nonzero eigenvalues, and maps
    back; shares no code path with the rank-one-correction construction.
    """
    order = g.nodes()
    idx = {u: i for i, u in enumerate(order)}
    nn = len(order)
    S = np.zeros((nn, nn))
    for eid in g.edge_ids():
        u, v, w = g.edge(eid)
        iu, iv = idx[u], idx[v]
        S[iu, iu] += w
        S[iv, iv] += w
        S[iu, iv] -= w
        S[iv, iu] -= w
    wn = np.array([g.node_weight(u) for u in order])
    d = np.sqrt(wn)
    sym = S / d[:, None] / d[None, :]
    vals, vecs = np.linalg.eigh(sym)
    inv = np.where(vals > 1e-10 * vals.max(), 1.0 / np.where(vals > 0, vals, 1.0), 0.0)
    sym_pinv = (vecs * inv) @ vecs.T
    return sym_pinv / d[:, None] * d[None, :]
