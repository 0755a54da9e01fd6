"""Randomized reduction loop: repeatedly act on matched edge sets.

Each iteration matches an independent set of edges, scores every matched edge
by the beta at which its expected reduction reaches the per-edge target, keeps
the cheapest fraction, and applies an unbiased delete / contract / reweight
draw to each kept edge. The running pseudoinverse is maintained by low-rank
updates and the accumulated expected error is tracked against the budget.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .action import (
    ActionDistribution,
    EdgeQuantities,
    Priority,
    activation_beta,
    expected_error,
    optimal_action,
)
from .graph import ContractionMap, WeightedGraph
from .laplacian import (
    REBUILD_INTERVAL,
    PseudoinverseState,
    build_pseudoinverse,
    contraction_update,
    edge_leverage,
    update_norm,
    woodbury_reweight,
)
from .sketch import SketchEstimator

MAX_REDRAWS = 32
STALL_LIMIT = 1000


class RedrawLimitError(RuntimeError):
    """Every redraw of an iteration's actions kept disconnecting the graph."""


class StallError(RuntimeError):
    """No selected edge acted for many consecutive iterations."""


@dataclass(frozen=True)
class ExactMode:
    """Maintain the dense pseudoinverse throughout the reduction."""


@dataclass(frozen=True)
class SketchMode:
    """Estimate per-edge quantities with random projections and linear solves.

    The dense pseudoinverse is only built once at the end, so peak cost stays
    near-linear for sparse graphs. `n_probes` of 0 picks the default rank.
    """

    n_probes: int = 0
    epsilon: float = 0.25
    solver_tol: float = 1e-8


@dataclass(frozen=True)
class EdgeBudget:
    """Stop once at most `edges` edges remain."""

    edges: int

    def __post_init__(self):
        if self.edges < 0:
            raise ValueError(f"edge budget must be >= 0, got {self.edges}")

    def done(self, graph: WeightedGraph, error: float) -> bool:
        return graph.n_edges <= self.edges


@dataclass(frozen=True)
class NodeBudget:
    """Stop once at most `nodes` nodes remain."""

    nodes: int

    def __post_init__(self):
        if self.nodes < 1:
            raise ValueError(f"node budget must be >= 1, got {self.nodes}")

    def done(self, graph: WeightedGraph, error: float) -> bool:
        return graph.n_nodes <= self.nodes


@dataclass(frozen=True)
class ErrorCap:
    """Stop once the accumulated expected error estimate reaches `cap`."""

    cap: float

    def __post_init__(self):
        if self.cap <= 0:
            raise ValueError(f"error cap must be positive, got {self.cap}")

    def done(self, graph: WeightedGraph, error: float) -> bool:
        return error >= self.cap


@dataclass(frozen=True)
class BetaCap:
    """Stop once an iteration's selected beta would exceed `cap`.

    Checked against the shared beta right after selection, before any of the
    iteration's actions are applied.
    """

    cap: float

    def __post_init__(self):
        if self.cap <= 0:
            raise ValueError(f"beta cap must be positive, got {self.cap}")

    def done(self, graph: WeightedGraph, error: float) -> bool:
        return False


@dataclass(frozen=True)
class MaxIterations:
    """Stop after `iterations` matching rounds (zero is legal)."""

    iterations: int

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")

    def done(self, graph: WeightedGraph, error: float) -> bool:
        return False


StopCriterion = EdgeBudget | NodeBudget | ErrorCap | BetaCap | MaxIterations


@dataclass(frozen=True)
class ReductionConfig:
    """Tuning knobs for `reduce_graph`.

    keep_fraction: fraction of each matching kept for action, by score.
    target_reduction: per-edge expected reduction the score beta must deliver.
    priority: whether deletions or contractions earn reduction credit.
    allow_contraction: False restricts to pure sparsification.
    mode: ExactMode or SketchMode quantity estimation.
    """

    keep_fraction: float = 0.25
    target_reduction: float = 0.25
    priority: Priority = Priority.EDGES
    allow_contraction: bool = True
    mode: ExactMode | SketchMode = field(default_factory=ExactMode)

    def __post_init__(self):
        if not 0.0 < self.keep_fraction <= 1.0:
            raise ValueError(f"keep_fraction in (0, 1], got {self.keep_fraction}")
        if self.target_reduction <= 0.0:
            raise ValueError(
                f"target_reduction must be positive, got {self.target_reduction}"
            )


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    matched: int
    selected: int
    beta: float
    deleted: int
    contracted: int
    reweighted: int
    redraws: int
    nodes_after: int
    edges_after: int
    error_after: float

    def to_json(self) -> str:
        out = dict(self.__dict__)
        if math.isinf(out["beta"]):
            out["beta"] = None
        return json.dumps(out)


@dataclass
class ReductionTrace:
    records: list[IterationRecord] = field(default_factory=list)
    stopped_by: str = ""

    def append(self, rec: IterationRecord) -> None:
        self.records.append(rec)

    def write_jsonl(self, path: str) -> None:
        with open(path, "w") as fh:
            for rec in self.records:
                fh.write(rec.to_json() + "\n")
            fh.write(json.dumps({"stopped_by": self.stopped_by}) + "\n")

    def totals(self) -> dict[str, int]:
        return {
            "deleted": sum(r.deleted for r in self.records),
            "contracted": sum(r.contracted for r in self.records),
            "reweighted": sum(r.reweighted for r in self.records),
        }


@dataclass
class ReductionResult:
    graph: WeightedGraph
    cmap: ContractionMap
    state: PseudoinverseState
    trace: ReductionTrace


@dataclass(frozen=True)
class _PlannedAction:
    edge: int
    u: int
    v: int
    weight: float
    quantities: EdgeQuantities
    dist: ActionDistribution


def select_beta(
    scores: Sequence[float], keep_fraction: float
) -> tuple[float, list[int]]:
    """Pick the ceil(keep_fraction * len) lowest finite scores.

    Returns the largest kept score (the iteration's shared beta) and the kept
    indices. The quota counts infinite scores, so a matching whose edges are
    mostly saturated may keep fewer than the quota, possibly none.
    """
    n = len(scores)
    if n == 0:
        return math.inf, []
    quota = math.ceil(keep_fraction * n)
    order = sorted(range(n), key=lambda i: (scores[i], i))
    kept = [i for i in order[:quota] if math.isfinite(scores[i])]
    if not kept:
        return math.inf, []
    return max(scores[i] for i in kept), kept


def _rng(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def _draw_action(dist: ActionDistribution, rng: np.random.Generator) -> str:
    u = rng.random()
    if u < dist.p_delete:
        return "delete"
    if u < dist.p_delete + dist.p_contract:
        return "contract"
    return "reweight"


class _ExactQuantities:
    def __init__(self, state: PseudoinverseState):
        self.state = state

    def measure(self, g: WeightedGraph, eid: int, priority: Priority) -> EdgeQuantities:
        u, v, w = g.edge(eid)
        lev = edge_leverage(self.state, u, v, w)
        norm = update_norm(self.state, u, v, w)
        return EdgeQuantities.from_measurements(
            lev, norm, g.triangle_count(eid), priority
        )


def reduce_graph(
    graph: WeightedGraph,
    stop: StopCriterion | Sequence[StopCriterion],
    config: ReductionConfig | None = None,
    seed: int = 0,
) -> ReductionResult:
    """Reduce `graph` until a stop criterion fires, preserving E[pinv].

    The input graph is not modified. Raises DisconnectedGraphError for
    disconnected input, RedrawLimitError when an iteration cannot find a
    connectivity-preserving draw, StallError when selection repeatedly yields
    no action.
    """
    config = config or ReductionConfig()
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    stops = list(stop) if isinstance(stop, (list, tuple)) else [stop]
    if not stops:
        raise ValueError("at least one stop criterion is required")
    beta_cap = min((s.cap for s in stops if isinstance(s, BetaCap)), default=math.inf)
    max_iters = min(
        (s.iterations for s in stops if isinstance(s, MaxIterations)), default=None
    )

    g = graph.copy()
    cmap = ContractionMap.identity(g.nodes())
    sketch_mode = isinstance(config.mode, SketchMode)
    if sketch_mode:
        state = None
        estimated_error = 0.0
        estimator: SketchEstimator | None = None
        est_dirty = True
    else:
        state = build_pseudoinverse(g)

    trace = ReductionTrace()
    stall = 0
    iteration = 0  # index t of the iteration about to run

    def error_now() -> float:
        return estimated_error if sketch_mode else state.estimated_error

    def stop_reason() -> str | None:
        if max_iters is not None and iteration >= max_iters:
            return "MaxIterations"
        err = error_now()
        for s in stops:
            if s.done(g, err):
                return type(s).__name__
        return None

    while True:
        reason = stop_reason()
        if reason is not None:
            trace.stopped_by = reason
            break
        if g.n_edges == 0:
            trace.stopped_by = "no_edges"
            break

        matched = g.independent_edge_set(_rng(seed, iteration, 0))
        if sketch_mode:
            if est_dirty:
                estimator = SketchEstimator.build(
                    g,
                    n_probes=config.mode.n_probes,
                    epsilon=config.mode.epsilon,
                    solver_tol=config.mode.solver_tol,
                    rng=_rng(seed, iteration, 2),
                )
                est_dirty = False
            measure = estimator
        else:
            measure = _ExactQuantities(state)

        quantities = [measure.measure(g, eid, config.priority) for eid in matched]
        scores = [
            activation_beta(eq, config.target_reduction, config.allow_contraction)
            for eq in quantities
        ]
        beta, kept = select_beta(scores, config.keep_fraction)

        if kept and beta > beta_cap:
            trace.stopped_by = "BetaCap"
            break

        if not kept:
            stall += 1
            if stall >= STALL_LIMIT:
                raise StallError(
                    f"no edge selected in {STALL_LIMIT} consecutive iterations"
                )
            trace.append(
                IterationRecord(
                    iteration, len(matched), 0, math.inf, 0, 0, 0, 0,
                    g.n_nodes, g.n_edges, error_now(),
                )
            )
            iteration += 1
            continue

        plans = [
            _PlannedAction(
                matched[i],
                *g.edge(matched[i]),
                quantities[i],
                optimal_action(quantities[i], beta, config.allow_contraction),
            )
            for i in kept
        ]

        # Redraw the whole iteration's actions until deletions keep the graph
        # connected. Contractions and reweights never disconnect, and matched
        # edges share no endpoints, so checking the deletions alone suffices.
        for attempt in range(MAX_REDRAWS):
            chosen = [
                _draw_action(p.dist, _rng(seed, iteration, 1, p.edge, attempt))
                for p in plans
            ]
            deletions = {p.edge for p, act in zip(plans, chosen) if act == "delete"}
            if not deletions or g.connected_without(deletions):
                break
        else:
            raise RedrawLimitError(
                f"iteration {iteration}: {MAX_REDRAWS} action draws all "
                "disconnected the graph"
            )
        redraws = attempt

        n_del = n_con = n_rew = 0
        acted = False
        # Deletes and reweights first (all endpoints still present), then
        # contractions; matched edges are disjoint so ids stay valid.
        for p, act in zip(plans, chosen):
            if act == "delete":
                g.delete_edge(p.edge)
                if not sketch_mode:
                    woodbury_reweight(state, p.u, p.v, -p.weight)
                n_del += 1
                acted = True
            elif act == "reweight":
                ratio = p.dist.reweight_ratio
                if ratio == 0.0:
                    continue
                g.set_edge_weight(p.edge, p.weight * (1.0 + ratio))
                if not sketch_mode:
                    woodbury_reweight(state, p.u, p.v, p.weight * ratio)
                n_rew += 1
                acted = True
        for p, act in zip(plans, chosen):
            if act == "contract":
                rec = g.contract_edge(p.edge)
                if not sketch_mode:
                    contraction_update(state, rec)
                cmap.merge(rec.survivor, rec.removed)
                n_con += 1
                acted = True

        increment = sum(expected_error(p.quantities, p.dist) for p in plans)
        if sketch_mode:
            estimated_error += increment
            est_dirty = est_dirty or acted
        else:
            state.estimated_error += increment
            if state.updates >= REBUILD_INTERVAL:
                err = state.estimated_error
                state = build_pseudoinverse(g)
                state.estimated_error = err

        stall = 0 if acted else stall + 1
        if stall >= STALL_LIMIT:
            raise StallError(
                f"no action applied in {STALL_LIMIT} consecutive iterations"
            )
        trace.append(
            IterationRecord(
                iteration, len(matched), len(kept), beta, n_del, n_con, n_rew,
                redraws, g.n_nodes, g.n_edges, error_now(),
            )
        )
        iteration += 1

    if sketch_mode:
        state = build_pseudoinverse(g)
        state.estimated_error = estimated_error
    return ReductionResult(g, cmap, state, trace)
