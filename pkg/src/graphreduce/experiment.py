"""JSON-driven comparison experiments producing long-format CSV tables.

An experiment fixes one input graph (generated or loaded from an edge list),
runs each configured algorithm (reduce / sparsify / coarsen) down to every
target size in a decreasing schedule, lifts each output's pseudoinverse back
to the original nodes, compares it against the original along fixed test
vectors, and aggregates mean and standard deviation over repeats. Rows come
out in long format (level, algorithm, metric, vector, mean, std) so they can
be plotted without further reshaping.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .action import Priority
from .baselines import matching_coarsen, samples_for_edge_target, ss_sparsify
from .generators import generate
from .graph import WeightedGraph, read_edgelist
from .laplacian import DisconnectedGraphError, build_pseudoinverse, lift
from .metrics import (
    eigen_relative_error,
    hyperbolic_distance,
    laplacian_spectrum,
)
from .reducer import (
    BetaCap,
    EdgeBudget,
    ErrorCap,
    ExactMode,
    MaxIterations,
    NodeBudget,
    RedrawLimitError,
    ReductionConfig,
    SketchMode,
    StallError,
    StopCriterion,
    reduce_graph,
)
from .sketch import ConvergenceError, symmetrized_laplacian

# Runtime failures recorded per cell instead of aborting the sweep
ALGORITHM_FAILURES = (
    DisconnectedGraphError,
    RedrawLimitError,
    StallError,
    ConvergenceError,
)


def parse_stop(spec: str | dict) -> list[StopCriterion]:
    """Stop criteria from "edges=40" style strings or {"edges": 40} dicts."""
    if isinstance(spec, str):
        key, _, value = spec.partition("=")
        if not value:
            raise ValueError(f"stop wants key=value, got {spec!r}")
        spec = {key: value}
    out: list[StopCriterion] = []
    for key, value in spec.items():
        if key == "edges":
            out.append(EdgeBudget(int(value)))
        elif key == "nodes":
            out.append(NodeBudget(int(value)))
        elif key == "error":
            out.append(ErrorCap(float(value)))
        elif key == "beta":
            out.append(BetaCap(float(value)))
        elif key == "iters":
            out.append(MaxIterations(int(value)))
        else:
            raise ValueError(f"unknown stop criterion {key!r}")
    return out


def parse_mode(spec: str) -> ExactMode | SketchMode:
    """Quantity mode from "exact" or "sketch:probes,epsilon"."""
    if spec == "exact":
        return ExactMode()
    name, _, args = spec.partition(":")
    if name != "sketch":
        raise ValueError(f"unknown mode {spec!r}")
    if not args:
        return SketchMode()
    parts = args.split(",")
    probes = int(parts[0]) if parts[0] else 0
    eps = float(parts[1]) if len(parts) > 1 else 0.25
    return SketchMode(n_probes=probes, epsilon=eps)


def probe_vectors(g: WeightedGraph, labels: Sequence[str]) -> dict[str, np.ndarray]:
    """Named eigenvectors of the node-weighted Laplacian used as probes."""
    lhat, w_sqrt = symmetrized_laplacian(g)
    _, vecs = np.linalg.eigh(lhat.toarray())
    n = g.n_nodes
    out = {}
    for label in labels:
        if label == "fiedler":
            idx = 1
        elif label == "median":
            idx = n // 2
        else:
            raise ValueError(f"unknown test vector {label!r}")
        if idx >= n:
            raise ValueError(f"graph too small for {label!r} vector")
        out[label] = vecs[:, idx] / w_sqrt
    return out


@dataclass(frozen=True)
class LevelSchedule:
    """Decreasing sequence of target sizes, counted in edges or nodes."""

    target: str  # "edges" | "nodes"
    sizes: tuple[int, ...]

    def __post_init__(self):
        if self.target not in ("edges", "nodes"):
            raise ValueError(f"level target must be edges or nodes, got {self.target!r}")
        if not self.sizes:
            raise ValueError("need at least one level")
        if any(s < 1 for s in self.sizes):
            raise ValueError(f"level sizes must be positive, got {self.sizes}")
        if any(b >= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError(f"level sizes must strictly decrease, got {self.sizes}")


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    kind: str  # reduce | sparsify | coarsen
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("reduce", "sparsify", "coarsen"):
            raise ValueError(f"unknown algorithm kind {self.kind!r}")


@dataclass(frozen=True)
class ExperimentSpec:
    graph: dict  # {"kind", "params"} generator spec or {"path", "node_weights"}
    levels: LevelSchedule
    algorithms: tuple[AlgorithmSpec, ...]
    runs: int = 8
    seed: int = 0
    vectors: tuple[str, ...] = ("fiedler",)
    eigen_k: int | None = None
    csv_path: str | None = None
    json_path: str | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError(f"need at least one run, got {self.runs}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        levels = d["levels"]
        outputs = d.get("outputs", {})
        return cls(
            graph=d["graph"],
            levels=LevelSchedule(levels["target"], tuple(levels["sizes"])),
            algorithms=tuple(
                AlgorithmSpec(a["name"], a["kind"], a.get("options", {}))
                for a in d.get("algorithms", [])
            ),
            runs=int(d.get("runs", 8)),
            seed=int(d.get("seed", 0)),
            vectors=tuple(d.get("vectors", ["fiedler"])),
            eigen_k=d.get("eigen_k"),
            csv_path=outputs.get("csv"),
            json_path=outputs.get("json"),
        )

    @classmethod
    def from_json(cls, path: str) -> "ExperimentSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ResultRow:
    level: int
    algorithm: str
    metric: str
    vector: str
    mean: float
    std: float

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "algorithm": self.algorithm,
            "metric": self.metric,
            "vector": self.vector,
            "mean": self.mean,
            "std": self.std,
        }


def load_graph(spec: ExperimentSpec) -> WeightedGraph:
    if "path" in spec.graph:
        return read_edgelist(spec.graph["path"], spec.graph.get("node_weights"))
    return generate(spec.graph["kind"], spec.graph.get("params", {}), spec.seed)


def lifted_pseudoinverse(
    reduced: WeightedGraph, cmap, original_weights: np.ndarray | None = None
) -> np.ndarray:
    """Pseudoinverse of a reduced graph, lifted back to the original nodes."""
    nodes = reduced.nodes()
    weights = np.array([reduced.node_weight(u) for u in nodes])
    return lift(
        build_pseudoinverse(reduced).pinv, cmap, nodes, weights, original_weights
    )


def _run_reduce(g, options: dict, target: str, size: int, seed: int):
    default_priority = "edges" if target == "edges" else "nodes"
    config = ReductionConfig(
        keep_fraction=float(options.get("q", 0.25)),
        target_reduction=float(options.get("d", 0.25)),
        priority=Priority(options.get("priority", default_priority)),
        allow_contraction=not options.get("no_contraction", False),
        mode=parse_mode(options.get("mode", "exact")),
    )
    stops = [EdgeBudget(size) if target == "edges" else NodeBudget(size)]
    for extra in options.get("stop", []):
        stops.extend(parse_stop(extra))
    result = reduce_graph(g, stops, config, seed=seed)
    nodes = result.graph.nodes()
    weights = np.array([result.graph.node_weight(u) for u in nodes])
    return lift(result.state.pinv, result.cmap, nodes, weights), result.graph


def _run_sparsify(g, options: dict, target: str, size: int, seed: int):
    if target != "edges":
        raise ValueError("sparsify targets edge counts, schedule counts nodes")
    n_samples = samples_for_edge_target(g, size)
    h = ss_sparsify(g, n_samples, np.random.default_rng(seed))
    return build_pseudoinverse(h).pinv, h  # raises when disconnected


def _run_coarsen(g, options: dict, target: str, size: int, seed: int):
    if target != "nodes":
        raise ValueError("coarsen targets node counts, schedule counts edges")
    coarse, cmap = matching_coarsen(
        g,
        strategy=options.get("strategy", "random"),
        levels=1,
        rng=np.random.default_rng(seed),
        target_nodes=size,
    )
    return lifted_pseudoinverse(coarse, cmap), coarse


_RUNNERS = {"reduce": _run_reduce, "sparsify": _run_sparsify, "coarsen": _run_coarsen}


def _aggregate(values: list[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    g = load_graph(spec)
    node_w = np.array([g.node_weight(u) for u in g.nodes()])
    base = build_pseudoinverse(g)
    vectors = probe_vectors(g, spec.vectors)
    base_spectrum = laplacian_spectrum(g) if spec.eigen_k else None

    rows: list[ResultRow] = []
    for ai, algo in enumerate(spec.algorithms):
        for li, size in enumerate(spec.levels.sizes):
            distances: dict[str, list[float]] = {label: [] for label in vectors}
            eig_errors: list[float] = []
            out_edges: list[float] = []
            out_nodes: list[float] = []
            failures = 0
            for r in range(spec.runs):
                sub_seed = int(
                    np.random.SeedSequence((spec.seed, ai, li, r)).generate_state(1)[0]
                )
                try:
                    candidate, out_graph = _RUNNERS[algo.kind](
                        g, algo.options, spec.levels.target, size, sub_seed
                    )
                except ALGORITHM_FAILURES:
                    failures += 1
                    continue
                for label, vec in vectors.items():
                    distances[label].append(
                        hyperbolic_distance(
                            base.pinv, candidate, vec, node_weights=node_w
                        )
                    )
                if spec.eigen_k:
                    eig_errors.append(
                        eigen_relative_error(
                            base_spectrum, laplacian_spectrum(out_graph), spec.eigen_k
                        )
                    )
                out_edges.append(out_graph.n_edges)
                out_nodes.append(out_graph.n_nodes)

            for label in vectors:
                mean, std = _aggregate(distances[label])
                rows.append(ResultRow(size, algo.name, "hyperbolic", label, mean, std))
            if spec.eigen_k:
                mean, std = _aggregate(eig_errors)
                rows.append(
                    ResultRow(size, algo.name, "eigen_relative_error", "", mean, std)
                )
            for metric, values in (("edges", out_edges), ("nodes", out_nodes)):
                mean, std = _aggregate(values)
                rows.append(ResultRow(size, algo.name, metric, "", mean, std))
            rows.append(
                ResultRow(size, algo.name, "failures", "", float(failures), 0.0)
            )
    return rows


def write_rows_csv(rows: Sequence[ResultRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "algorithm", "metric", "vector", "mean", "std"])
        for row in rows:
            writer.writerow(
                [row.level, row.algorithm, row.metric, row.vector,
                 repr(row.mean), repr(row.std)]
            )


def read_rows_csv(path: str) -> list[ResultRow]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            out.append(
                ResultRow(
                    int(rec["level"]), rec["algorithm"], rec["metric"],
                    rec["vector"], float(rec["mean"]), float(rec["std"]),
                )
            )
    return out


def write_rows_json(rows: Sequence[ResultRow], path: str) -> None:
    with open(path, "w") as fh:
        json.dump({"rows": [row.to_dict() for row in rows]}, fh, indent=1)
        fh.write("\n")


def run_experiment_to_files(spec: ExperimentSpec) -> list[ResultRow]:
    rows = run_experiment(spec)
    if spec.csv_path:
        write_rows_csv(rows, spec.csv_path)
    if spec.json_path:
        write_rows_json(rows, spec.json_path)
    return rows
