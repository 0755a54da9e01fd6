"""Randomized estimation of per-edge leverage and update norms.

Works in the symmetrized basis: with S the ordinary edge-weighted Laplacian
and W the node weight diagonal, Lhat = W^{-1/2} S W^{-1/2} is symmetric PSD
with kernel spanned by what = W^{1/2} 1 (normalized). Per-edge quantities are
squared norms of Lhat^+ applied to fixed vectors, so a Johnson-Lindenstrauss
projection followed by a handful of linear solves estimates all of them at
once without ever forming a dense inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .action import EdgeQuantities, Priority
from .graph import WeightedGraph
from .laplacian import DisconnectedGraphError

PROJECTION_MAX_ITERS = 100


class ConvergenceError(RuntimeError):
    """An iterative routine failed to reach its tolerance."""


def default_probe_count(n_nodes: int, epsilon: float) -> int:
    """Projection rank giving ~epsilon-accurate norms with high probability."""
    if n_nodes < 2:
        return 1
    return max(1, math.ceil(4.0 * math.log(n_nodes) / epsilon**2))


def pcg(
    matrix: sp.spmatrix,
    rhs: np.ndarray,
    rtol: float = 1e-10,
    max_iter: int | None = None,
    deflate: np.ndarray | None = None,
) -> np.ndarray:
    """Jacobi-preconditioned conjugate gradients for SPD / PSD systems.

    `deflate`, if given, must be a unit vector spanning the kernel; the
    iteration keeps everything orthogonal to it, which makes singular
    Laplacian systems with compatible right-hand sides well posed.
    Raises ConvergenceError when the residual fails to reach
    rtol * ||rhs|| within max_iter steps.
    """
    n = matrix.shape[0]
    if max_iter is None:
        max_iter = 20 * n + 50
    diag = np.asarray(matrix.diagonal(), dtype=float)
    if np.any(diag <= 0):
        raise ValueError("matrix diagonal must be strictly positive")

    def strip(vec: np.ndarray) -> np.ndarray:
        if deflate is not None:
            vec = vec - deflate * (deflate @ vec)
        return vec

    b = strip(np.asarray(rhs, dtype=float))
    b_norm = float(np.linalg.norm(b))
    x = np.zeros(n)
    if b_norm == 0.0:
        return x
    r = b.copy()
    z = strip(r / diag)
    p = z.copy()
    rz = float(r @ z)
    for _ in range(max_iter):
        ap = matrix @ p
        denom = float(p @ ap)
        if denom <= 0.0:
            raise ConvergenceError("conjugate gradient hit a non-positive curvature")
        alpha = rz / denom
        x += alpha * p
        r -= alpha * ap
        r = strip(r)
        if np.linalg.norm(r) <= rtol * b_norm:
            return x
        z = strip(r / diag)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        f"conjugate gradient: no convergence to {rtol:g} in {max_iter} iterations"
    )


def symmetrized_laplacian(
    g: WeightedGraph, nodes: list[int] | None = None
) -> tuple[sp.csr_matrix, np.ndarray]:
    """Sparse Lhat = W^{-1/2} S W^{-1/2} and the node weight square roots."""
    if nodes is None:
        nodes = g.nodes()
    index = {u: i for i, u in enumerate(nodes)}
    n = len(nodes)
    w_sqrt = np.array([math.sqrt(g.node_weight(u)) for u in nodes])
    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    for eid in g.edge_ids():
        u, v, w = g.edge(eid)
        iu, iv = index[u], index[v]
        s = w / (w_sqrt[iu] * w_sqrt[iv])
        rows += [iu, iv]
        cols += [iv, iu]
        vals += [-s, -s]
        diag[iu] += w / (w_sqrt[iu] ** 2)
        diag[iv] += w / (w_sqrt[iv] ** 2)
    rows += list(range(n))
    cols += list(range(n))
    vals += list(diag)
    lhat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return lhat, w_sqrt


def build_projection(
    n_probes: int,
    w_sqrt: np.ndarray,
    rng: np.random.Generator,
    epsilon: float = 0.25,
) -> np.ndarray:
    """Random sign projection with rows orthogonal to the kernel direction.

    Starts from +-1/sqrt(k) entries (exactly unit columns) and alternates
    projecting rows off what = w_sqrt / ||w_sqrt|| with renormalizing columns
    until the columns are within epsilon/4 of unit right after a projection
    step, so the returned rows are orthogonal to what up to roundoff.
    """
    n = len(w_sqrt)
    what = w_sqrt / np.linalg.norm(w_sqrt)
    q = (rng.integers(0, 2, size=(n_probes, n)) * 2.0 - 1.0) / math.sqrt(n_probes)
    for _ in range(PROJECTION_MAX_ITERS):
        q -= np.outer(q @ what, what)
        col = np.linalg.norm(q, axis=0)
        if np.max(np.abs(col - 1.0)) <= epsilon / 4.0:
            return q
        q /= np.maximum(col, 1e-12)[None, :]
    raise ConvergenceError(
        f"projection cleanup: column norms not within {epsilon / 4.0:g} "
        f"after {PROJECTION_MAX_ITERS} sweeps"
    )


def _solve_rows(
    lhat: sp.csr_matrix,
    rhs_rows: np.ndarray,
    what: np.ndarray,
    rtol: float,
) -> np.ndarray:
    out = np.empty_like(rhs_rows)
    for i in range(rhs_rows.shape[0]):
        out[i] = pcg(lhat, rhs_rows[i], rtol=rtol, deflate=what)
    return out


def update_norms_from_projection(
    g: WeightedGraph, projection: np.ndarray, solver_tol: float = 1e-10
) -> dict[int, float]:
    """Estimated w_e ||pinv column gap||^2 for every edge, given probe rows.

    With the exact orthonormal basis of the kernel complement as the
    projection this reproduces the exact values up to solver tolerance.
    """
    nodes = g.nodes()
    index = {u: i for i, u in enumerate(nodes)}
    lhat, w_sqrt = symmetrized_laplacian(g, nodes)
    what = w_sqrt / np.linalg.norm(w_sqrt)
    z = _solve_rows(lhat, projection, what, solver_tol)
    y = z / w_sqrt[None, :]
    out = {}
    for eid in g.edge_ids():
        u, v, w = g.edge(eid)
        gap = y[:, index[u]] - y[:, index[v]]
        out[eid] = w * float(gap @ gap)
    return out


def edge_projection_rows(
    g: WeightedGraph, projection: np.ndarray
) -> np.ndarray:
    """Rows of projection @ W_e^{1/2} B W^{-1/2} for the current edge order."""
    nodes = g.nodes()
    index = {u: i for i, u in enumerate(nodes)}
    w_sqrt = np.array([math.sqrt(g.node_weight(u)) for u in nodes])
    eids = g.edge_ids()
    m = len(eids)
    rows, cols, vals = [], [], []
    for e_pos, eid in enumerate(eids):
        u, v, w = g.edge(eid)
        root = math.sqrt(w)
        rows += [e_pos, e_pos]
        cols += [index[u], index[v]]
        vals += [root / w_sqrt[index[u]], -root / w_sqrt[index[v]]]
    incidence = sp.coo_matrix((vals, (rows, cols)), shape=(m, len(nodes))).tocsr()
    return np.asarray(projection @ incidence)


def leverages_from_projection(
    g: WeightedGraph, projection: np.ndarray, solver_tol: float = 1e-10
) -> dict[int, float]:
    """Estimated leverage w_e * resistance for every edge.

    `projection` has one column per edge (in edge_ids order). The identity
    matrix reproduces the exact leverages up to solver tolerance.
    """
    nodes = g.nodes()
    index = {u: i for i, u in enumerate(nodes)}
    lhat, w_sqrt = symmetrized_laplacian(g, nodes)
    what = w_sqrt / np.linalg.norm(w_sqrt)
    r = edge_projection_rows(g, projection)
    gmat = _solve_rows(lhat, r, what, solver_tol)
    h = gmat / w_sqrt[None, :]
    out = {}
    for eid in g.edge_ids():
        u, v, w = g.edge(eid)
        gap = h[:, index[u]] - h[:, index[v]]
        out[eid] = w * float(gap @ gap)
    return out


@dataclass
class SketchEstimator:
    """Per-edge quantity estimates frozen at build time.

    Estimates go stale as soon as the graph changes; callers rebuild after
    every modifying round.
    """

    index: dict[int, int]
    norm_columns: np.ndarray  # k x n, update norm = w_e ||col_u - col_v||^2
    leverage_columns: np.ndarray  # k x n, leverage = w_e ||col_u - col_v||^2
    n_probes: int

    @classmethod
    def build(
        cls,
        g: WeightedGraph,
        n_probes: int = 0,
        epsilon: float = 0.25,
        solver_tol: float = 1e-8,
        rng: np.random.Generator | None = None,
    ) -> "SketchEstimator":
        if not g.is_connected():
            raise DisconnectedGraphError(
                "sketch estimates require a connected graph"
            )
        if rng is None:
            rng = np.random.default_rng()
        nodes = g.nodes()
        index = {u: i for i, u in enumerate(nodes)}
        n = len(nodes)
        k = n_probes if n_probes > 0 else default_probe_count(n, epsilon)
        lhat, w_sqrt = symmetrized_laplacian(g, nodes)
        what = w_sqrt / np.linalg.norm(w_sqrt)

        q_norm = build_projection(k, w_sqrt, rng, epsilon)
        z = _solve_rows(lhat, q_norm, what, solver_tol)
        y = z / w_sqrt[None, :]

        m = g.n_edges
        q_edge = (rng.integers(0, 2, size=(k, m)) * 2.0 - 1.0) / math.sqrt(k)
        r = edge_projection_rows(g, q_edge)
        gmat = _solve_rows(lhat, r, what, solver_tol)
        h = gmat / w_sqrt[None, :]
        return cls(index, y, h, k)

    def measure(
        self, g: WeightedGraph, eid: int, priority: Priority
    ) -> EdgeQuantities:
        u, v, w = g.edge(eid)
        iu, iv = self.index[u], self.index[v]
        ngap = self.norm_columns[:, iu] - self.norm_columns[:, iv]
        lgap = self.leverage_columns[:, iu] - self.leverage_columns[:, iv]
        return EdgeQuantities.from_measurements(
            w * float(lgap @ lgap),
            w * float(ngap @ ngap),
            g.triangle_count(eid),
            priority,
        )

    def update_norm_of(self, g: WeightedGraph, eid: int) -> float:
        u, v, w = g.edge(eid)
        gap = self.norm_columns[:, self.index[u]] - self.norm_columns[:, self.index[v]]
        return w * float(gap @ gap)

    def leverage_of(self, g: WeightedGraph, eid: int) -> float:
        u, v, w = g.edge(eid)
        gap = (
            self.leverage_columns[:, self.index[u]]
            - self.leverage_columns[:, self.index[v]]
        )
        return w * float(gap @ gap)


def orthonormal_complement_basis(w_sqrt: np.ndarray) -> np.ndarray:
    """Exact orthonormal basis (as rows) of the space orthogonal to w_sqrt."""
    n = len(w_sqrt)
    what = w_sqrt / np.linalg.norm(w_sqrt)
    full = np.concatenate([what[:, None], np.eye(n)], axis=1)
    q, _ = np.linalg.qr(full)
    return q[:, 1:n].T
