"""Optimal probabilistic actions on a single edge.

An edge can be deleted, contracted, or reweighted. Each action changes the
Laplacian pseudoinverse by `scalar * M_e`, where M_e is the edge's fixed
rank-one update matrix (Frobenius norm `update_norm`) and the scalar depends
only on the relative weight change and the edge leverage:

    update_scalar(ratio, leverage) = -ratio / (1 + ratio * leverage)

Deletion is ratio = -1, contraction the ratio -> infinity limit. A randomized
action over {delete, contract, reweight} is unbiased when the probability-
weighted scalars cancel; among all unbiased mixtures, the one minimizing

    E[|scalar|^2] * update_norm^2  -  beta^2 * E[reduction]

has a closed form with three regimes in the pressure parameter beta: below
both onset thresholds nothing happens; between onset and saturation a single
action (whichever onset is lower) is mixed with a compensating reweight; above
saturation the edge is deleted with probability 1 - leverage and contracted
with probability leverage. `grid_search_action` minimizes the same objective
numerically and exists to cross-check the closed form, not to be fast.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Priority",
    "Regime",
    "EdgeQuantities",
    "Thresholds",
    "ActionDistribution",
    "update_scalar",
    "regime_thresholds",
    "optimal_action",
    "activation_beta",
    "expected_reduction",
    "expected_error",
    "action_cost",
    "grid_search_action",
]

# Leverage this close to 1 is treated as an exact bridge: the deletion scalar
# would exceed 1e9 and no sane policy deletes such an edge anyway.
BRIDGE_SNAP = 1e-9


class Priority(enum.Enum):
    """What the reduction is trying to shrink.

    EDGES counts removed edges: deletion removes one, contraction removes the
    edge plus one per triangle through it (parallel merges). NODES counts
    removed nodes: only contraction removes one.
    """

    EDGES = "edges"
    NODES = "nodes"

    def reduction_counts(self, triangles: int) -> tuple[float, float]:
        """(count removed by deletion, count removed by contraction)."""
        if self is Priority.EDGES:
            return 1.0, 1.0 + triangles
        return 0.0, 1.0


class Regime(enum.Enum):
    NO_ACTION = 1
    SINGLE_ACTION = 2
    DELETE_OR_CONTRACT = 3


@dataclass(frozen=True)
class EdgeQuantities:
    """Everything the action solver needs to know about one edge.

    leverage = weight * effective resistance, in (0, 1], 1 iff bridge;
    update_norm = Frobenius norm of the edge's rank-one update matrix;
    triangles = triangle count through the edge in the current graph.
    """

    leverage: float
    update_norm: float
    triangles: int
    priority: Priority = Priority.EDGES

    def __post_init__(self) -> None:
        if not 0.0 < self.leverage <= 1.0:
            raise ValueError(f"leverage must be in (0, 1], got {self.leverage}")
        if self.update_norm <= 0.0:
            raise ValueError(f"update_norm must be positive, got {self.update_norm}")
        if self.triangles < 0:
            raise ValueError(f"triangles must be >= 0, got {self.triangles}")

    @classmethod
    def from_measurements(
        cls,
        leverage: float,
        update_norm: float,
        triangles: int,
        priority: Priority = Priority.EDGES,
    ) -> "EdgeQuantities":
        """Clamp raw (possibly sketched) measurements into the valid domain."""
        lev = min(float(leverage), 1.0)
        if lev > 1.0 - BRIDGE_SNAP:
            lev = 1.0
        lev = max(lev, 1e-12)
        return cls(lev, max(float(update_norm), 1e-300), triangles, priority)

    @property
    def r_delete(self) -> float:
        return self.priority.reduction_counts(self.triangles)[0]

    @property
    def r_contract(self) -> float:
        return self.priority.reduction_counts(self.triangles)[1]


@dataclass(frozen=True)
class Thresholds:
    """Regime boundaries in beta for one edge.

    onset_delete / onset_contract: below both, no action is worthwhile; the
    smaller one marks where its action starts mixing in. saturation: above it
    the reweight option drops out entirely. Any of these may be +inf.
    """

    onset_delete: float
    onset_contract: float
    saturation: float

    @property
    def onset(self) -> float:
        return min(self.onset_delete, self.onset_contract)


@dataclass(frozen=True)
class ActionDistribution:
    """Unbiased mixture over delete / contract / reweight for one edge.

    reweight_ratio is the relative weight change delta_w / w applied when the
    reweight branch is drawn (0.0 when the edge is left alone).
    """

    p_delete: float
    p_contract: float
    p_reweight: float
    reweight_ratio: float
    regime: Regime
    branch: str | None = None


def update_scalar(ratio: float, leverage: float) -> float:
    """Scalar multiplying the edge's update matrix for weight change ratio.

    ratio = delta_w / w in [-1, inf]; -1 is deletion, inf is contraction.
    """
    if not 0.0 < leverage <= 1.0:
        raise ValueError(f"leverage must be in (0, 1], got {leverage}")
    if math.isinf(ratio):
        if ratio < 0:
            raise ValueError("ratio must be >= -1")
        return -1.0 / leverage
    if ratio < -1.0:
        raise ValueError(f"ratio must be >= -1, got {ratio}")
    if ratio == -1.0 and leverage == 1.0:
        raise ValueError("deletion of a bridge diverges (leverage 1)")
    denom = 1.0 + ratio * leverage
    return -ratio / denom


def _delete_scalar(leverage: float) -> float:
    return math.inf if leverage >= 1.0 else 1.0 / (1.0 - leverage)


def regime_thresholds(eq: EdgeQuantities) -> Thresholds:
    """Closed-form regime boundaries of the cost minimization."""
    x, m = eq.leverage, eq.update_norm
    rd, rc = eq.r_delete, eq.r_contract
    if rd == 0.0 or x >= 1.0:
        onset_d = math.inf
    else:
        onset_d = m / ((1.0 - x) * math.sqrt(rd))
    onset_c = m / (x * math.sqrt(rc))
    if x >= 1.0:
        saturation = math.inf
    else:
        saturation = m / (x * (1.0 - x) * (math.sqrt(rd) + math.sqrt(rc)))
    return Thresholds(onset_d, onset_c, saturation)


def _single_action(eq: EdgeQuantities, beta: float, th: Thresholds) -> ActionDistribution:
    x = eq.leverage
    if th.onset_delete < th.onset_contract:
        branch, onset = "delete", th.onset_delete
        f_a = _delete_scalar(x)
    else:
        # Ties break toward contraction: it reduces at least as much.
        branch, onset = "contract", th.onset_contract
        f_a = -1.0 / x
    p = 1.0 - onset / beta
    if p >= 1.0:
        # beta so far past onset that p rounds to 1; keep the compensating
        # reweight finite (its weight update then trips the singularity guard
        # instead of propagating nan)
        p = math.nextafter(1.0, 0.0)
    f_r = -p * f_a / (1.0 - p)
    ratio = -f_r / (1.0 + f_r * x)
    if branch == "delete":
        return ActionDistribution(p, 0.0, 1.0 - p, ratio, Regime.SINGLE_ACTION, branch)
    return ActionDistribution(0.0, p, 1.0 - p, ratio, Regime.SINGLE_ACTION, branch)


def optimal_action(
    eq: EdgeQuantities, beta: float, allow_contraction: bool = True
) -> ActionDistribution:
    """Cost-minimizing unbiased action mixture for one edge at pressure beta.

    With allow_contraction False the same objective is minimized subject to
    zero contraction probability; the edge then only acts while the deletion
    branch is active and strictly below the beta where its compensating
    reweight would degenerate into a contraction.
    """
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    th = regime_thresholds(eq)
    none = ActionDistribution(0.0, 0.0, 1.0, 0.0, Regime.NO_ACTION)
    if not allow_contraction:
        if math.isinf(th.onset_delete) or beta <= th.onset_delete:
            return none
        # p_delete reaches its cap 1 - leverage at onset_delete / leverage;
        # at the cap the reweight ratio diverges, so stop strictly before.
        if beta >= th.onset_delete / eq.leverage:
            return none
        forced = Thresholds(th.onset_delete, math.inf, th.saturation)
        return _single_action(eq, beta, forced)
    # The corner owns the saturation point itself: both mixtures cost the
    # same there, but only the corner delivers the jumped expected reduction
    # that activation_beta promises. Checked first because onset can equal
    # saturation (leverage 1/2 with equal reduction payoffs leaves regime 2
    # empty), and that point must corner, not idle.
    if math.isfinite(th.saturation) and beta >= th.saturation:
        x = eq.leverage
        return ActionDistribution(1.0 - x, x, 0.0, 0.0, Regime.DELETE_OR_CONTRACT)
    if beta <= th.onset:
        return none
    return _single_action(eq, beta, th)


def activation_beta(
    eq: EdgeQuantities, min_reduction: float, allow_contraction: bool = True
) -> float:
    """Smallest beta at which the edge's expected reduction reaches the target.

    Acts as an importance score: low values mark edges that give up a lot of
    reduction for little error. +inf when no beta delivers the target.
    """
    d = min_reduction
    if d <= 0:
        raise ValueError(f"min_reduction must be positive, got {d}")
    th = regime_thresholds(eq)
    if not allow_contraction:
        rd = eq.r_delete
        if rd == 0.0 or math.isinf(th.onset_delete) or d >= rd * (1.0 - eq.leverage):
            return math.inf
        return th.onset_delete / (1.0 - d / rd)
    if th.onset_delete < th.onset_contract:
        onset, r_a = th.onset_delete, eq.r_delete
    else:
        onset, r_a = th.onset_contract, eq.r_contract
    if d < r_a:
        beta = onset / (1.0 - d / r_a)
        if beta <= th.saturation:
            return beta
    full = eq.r_delete * (1.0 - eq.leverage) + eq.r_contract * eq.leverage
    if d <= full and not math.isinf(th.saturation):
        return th.saturation
    return math.inf


def expected_reduction(eq: EdgeQuantities, dist: ActionDistribution) -> float:
    return eq.r_delete * dist.p_delete + eq.r_contract * dist.p_contract


def expected_error(eq: EdgeQuantities, dist: ActionDistribution) -> float:
    """Expected squared Frobenius change of the pseudoinverse under `dist`."""
    x, m = eq.leverage, eq.update_norm
    total = 0.0
    if dist.p_delete > 0.0:
        total += dist.p_delete * _delete_scalar(x) ** 2
    if dist.p_contract > 0.0:
        total += dist.p_contract * (1.0 / x) ** 2
    if dist.p_reweight > 0.0 and dist.reweight_ratio != 0.0:
        total += dist.p_reweight * update_scalar(dist.reweight_ratio, x) ** 2
    return m * m * total


def action_cost(eq: EdgeQuantities, dist: ActionDistribution, beta: float) -> float:
    """Objective value: expected error minus beta^2 * expected reduction."""
    return expected_error(eq, dist) - beta**2 * expected_reduction(eq, dist)


def grid_search_action(
    eq: EdgeQuantities, beta: float, grid_n: int = 2000
) -> tuple[ActionDistribution, float]:
    """Brute-force minimization of the action objective on a probability grid.

    Scans (p_delete, p_contract) on a grid_n x grid_n lattice over the
    feasible rectangle [0, 1-leverage] x [0, leverage] intersected with the
    simplex, with the reweight branch pinned by the unbiasedness constraint.
    Exists as an independent oracle for `optimal_action`; costs O(grid_n^2).
    """
    if grid_n < 1000:
        raise ValueError(f"grid_n must be >= 1000, got {grid_n}")
    x, m = eq.leverage, eq.update_norm
    rd, rc = eq.r_delete, eq.r_contract
    f_c = -1.0 / x
    if x >= 1.0:
        pd = np.array([0.0])
        f_d = 0.0  # never multiplied by a nonzero p_delete
    else:
        pd = np.linspace(0.0, 1.0 - x, grid_n)
        f_d = 1.0 / (1.0 - x)
    pc = np.linspace(0.0, x, grid_n)

    # Scan in row chunks so the temporaries stay cache resident; a single
    # grid_n x grid_n pass is memory bound and an order of magnitude slower.
    m2 = m * m
    b2 = beta * beta
    col_term = pd * (m2 * f_d**2 - b2 * rd)
    row_term = pc * (m2 * f_c**2 - b2 * rc)
    pc_fc = pc * f_c
    pr_base = 1.0 - pc
    best_val = np.inf
    best_i = best_j = 0
    chunk = 64
    for lo in range(0, len(pd), chunk):
        pdc = pd[lo : lo + chunk, None]
        G = pdc * f_d + pc_fc
        PR = pr_base - pdc
        with np.errstate(divide="ignore", invalid="ignore"):
            penalty = G * G / PR
        # Boundary p_reweight = 0 is feasible only where the constraint
        # already holds with no reweight mass; numerically G = 0 there.
        # Points past the simplex stay infeasible no matter what G is.
        boundary = PR <= 1e-12
        if boundary.any():
            penalty[boundary] = np.inf
            penalty[boundary & (PR >= -1e-12) & (np.abs(G) < 1e-9)] = 0.0
        cost = m2 * penalty
        cost += col_term[lo : lo + chunk, None]
        cost += row_term
        flat = int(np.argmin(cost))
        val = float(cost.flat[flat])
        if val < best_val:
            best_val = val
            best_i, best_j = lo + flat // cost.shape[1], flat % cost.shape[1]
    i, j = best_i, best_j
    best_pd, best_pc = float(pd[i]), float(pc[j])
    best_pr = max(1.0 - best_pd - best_pc, 0.0)
    # When deletion has zero reduction payoff the optimum is degenerate:
    # reweight mass whose compensating scalar equals the deletion scalar is a
    # deletion in disguise (ratio -1 removes the edge). Fold it back so the
    # classification below sees the canonical corner. The 2% window cannot
    # catch a genuine single-action point unless beta sits within ~5% of
    # saturation, which callers comparing against the closed form avoid.
    if best_pr > 1e-12 and x < 1.0:
        f_r = -(best_pd * f_d + best_pc * f_c) / best_pr
        if abs(f_r - f_d) <= 0.02 * abs(f_d):
            best_pd += best_pr
            best_pr = 0.0
    step = max((pd[1] - pd[0]) if len(pd) > 1 else 0.0, pc[1] - pc[0])
    tol = 1.5 * step
    if best_pd + best_pc <= tol:
        regime = Regime.NO_ACTION
    elif best_pr <= tol:
        regime = Regime.DELETE_OR_CONTRACT
    else:
        regime = Regime.SINGLE_ACTION
    ratio = 0.0
    if best_pr > 1e-12:
        g = best_pd * f_d + best_pc * f_c
        f_r = -g / best_pr
        if abs(1.0 + f_r * x) > 1e-15:
            ratio = -f_r / (1.0 + f_r * x)
    branch = None
    if regime is Regime.SINGLE_ACTION:
        branch = "delete" if best_pd >= best_pc else "contract"
    dist = ActionDistribution(best_pd, best_pc, best_pr, ratio, regime, branch)
    return dist, best_val
