"""Command line front end.

Subcommands: gen, reduce, sparsify, coarsen, metrics, compare. Every error
path exits nonzero with a message on stderr; success prints a short summary
line per action on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .action import Priority
from .baselines import matching_coarsen, samples_for_edge_target, ss_sparsify
from .experiment import (
    ExperimentSpec,
    parse_mode,
    parse_stop,
    run_experiment_to_files,
    probe_vectors,
    write_rows_csv,
    write_rows_json,
)
from .generators import generate
from .graph import (
    ContractionMap,
    read_contraction_map,
    read_edgelist,
    write_contraction_map,
    write_edgelist,
)
from .laplacian import build_pseudoinverse, lift, save_matrix_csv
from .metrics import (
    check_sigma_approx,
    compare_operators,
    eigen_relative_error,
    laplacian_spectrum,
)
from .reducer import ReductionConfig, reduce_graph


def _load_input(args) -> "WeightedGraph":
    return read_edgelist(args.input, getattr(args, "node_weights", None))


def _cmd_gen(args) -> int:
    params = json.loads(args.params) if args.params else {}
    g = generate(args.kind, params, args.seed)
    write_edgelist(g, args.out, args.node_weights_out)
    print(f"gen {args.kind}: {g.n_nodes} nodes, {g.n_edges} edges -> {args.out}")
    return 0


def _cmd_reduce(args) -> int:
    g = _load_input(args)
    config = ReductionConfig(
        keep_fraction=args.q,
        target_reduction=args.d,
        priority=Priority(args.priority),
        allow_contraction=not args.no_contraction,
        mode=parse_mode(args.mode),
    )
    stops = []
    for spec in args.stop:
        stops.extend(parse_stop(spec))
    result = reduce_graph(g, stops, config, seed=args.seed)

    prefix = args.out
    write_edgelist(result.graph, prefix + ".edges", prefix + ".nodeweights")
    write_contraction_map(result.cmap, prefix + ".cmap.json")
    result.trace.write_jsonl(prefix + ".trace.jsonl")
    if args.pinv_out:
        save_matrix_csv(args.pinv_out, result.state.pinv)
    totals = result.trace.totals()
    print(
        f"reduce: {g.n_nodes}x{g.n_edges} -> "
        f"{result.graph.n_nodes}x{result.graph.n_edges} "
        f"(deleted {totals['deleted']}, contracted {totals['contracted']}, "
        f"reweighted {totals['reweighted']}; stop {result.trace.stopped_by}; "
        f"error {result.state.estimated_error:.6g}) -> {prefix}.*"
    )
    return 0


def _cmd_sparsify(args) -> int:
    g = _load_input(args)
    if args.samples is not None:
        n_samples = args.samples
    elif args.target_edges is not None:
        n_samples = samples_for_edge_target(g, args.target_edges)
    else:
        raise ValueError("pass --samples or --target-edges")
    h = ss_sparsify(g, n_samples, np.random.default_rng(args.seed))
    write_edgelist(h, args.out + ".edges", args.out + ".nodeweights")
    print(
        f"sparsify: {g.n_edges} -> {h.n_edges} edges "
        f"({n_samples} samples) -> {args.out}.*"
    )
    return 0


def _cmd_coarsen(args) -> int:
    g = _load_input(args)
    coarse, cmap = matching_coarsen(
        g,
        strategy=args.strategy,
        levels=args.levels,
        rng=np.random.default_rng(args.seed),
        target_nodes=args.target_nodes,
    )
    prefix = args.out
    write_edgelist(coarse, prefix + ".edges", prefix + ".nodeweights")
    write_contraction_map(cmap, prefix + ".cmap.json")
    print(
        f"coarsen[{args.strategy}]: {g.n_nodes} -> {coarse.n_nodes} nodes -> {prefix}.*"
    )
    return 0


def _cmd_metrics(args) -> int:
    original = read_edgelist(args.original, args.node_weights)
    reduced = read_edgelist(args.reduced, args.reduced_node_weights)
    if args.cmap:
        cmap = read_contraction_map(args.cmap)
    else:
        cmap = ContractionMap.identity(original.nodes())

    node_w = np.array([original.node_weight(u) for u in original.nodes()])
    base = build_pseudoinverse(original).pinv
    red_nodes = reduced.nodes()
    red_w = np.array([reduced.node_weight(u) for u in red_nodes])
    candidate = lift(
        build_pseudoinverse(reduced).pinv, cmap, red_nodes, red_w, node_w
    )

    labels = [v for v in args.vectors.split(",") if v]
    vectors = probe_vectors(original, labels)
    eig = None
    if args.eigen_k is not None:
        eig = eigen_relative_error(
            laplacian_spectrum(original), laplacian_spectrum(reduced), args.eigen_k
        )
    report = compare_operators(base, candidate, vectors, node_w, eig)
    if args.out:
        report.write_csv(args.out)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(report.to_json() + "\n")
    for metric, label, value in report.rows():
        name = f"{metric}[{label}]" if label else metric
        print(f"{name} = {value:.6g}")

    if args.sigma is not None:
        rng = np.random.default_rng(args.seed)
        probe = rng.standard_normal((original.n_nodes, args.sigma_vectors))
        sig = check_sigma_approx(base, candidate, probe, args.sigma, node_w)
        status = "ok" if sig.ok else f"violated at {len(sig.violation_indices)}"
        print(
            f"sigma={args.sigma}: {status} "
            f"({sig.n_premise}/{sig.n_vectors} vectors within premise)"
        )
        if not sig.ok:
            return 1
    return 0


def _cmd_compare(args) -> int:
    spec = ExperimentSpec.from_json(args.spec)
    rows = run_experiment_to_files(spec)
    if args.csv:
        write_rows_csv(rows, args.csv)
    if args.json:
        write_rows_json(rows, args.json)
    wrote = [p for p in (spec.csv_path, spec.json_path, args.csv, args.json) if p]
    print(f"compare: {len(rows)} rows -> {', '.join(wrote) if wrote else 'stdout'}")
    if not wrote:
        for row in rows:
            name = f"{row.metric}[{row.vector}]" if row.vector else row.metric
            print(
                f"level={row.level} {row.algorithm} {name}: "
                f"{row.mean:.6g} +- {row.std:.6g}"
            )
    return 0


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="edge list file (u v w lines)")
    p.add_argument("--node-weights", default=None, help="node weight file (u w lines)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphreduce",
        description="Reduce weighted graphs while preserving the Laplacian "
        "pseudoinverse in expectation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a named graph family")
    p.add_argument("--kind", required=True,
                   help="path|cycle|torus|triangular-lattice|er|sbm")
    p.add_argument("--params", default="", help="JSON parameter object")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="edge list output path")
    p.add_argument("--node-weights-out", default=None)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("reduce", help="probabilistic unified reduction")
    _add_input_args(p)
    p.add_argument("--q", type=float, default=0.25,
                   help="fraction of matched edges acted on per iteration")
    p.add_argument("--d", type=float, default=0.25,
                   help="expected per-iteration reduction target")
    p.add_argument("--priority", choices=["edges", "nodes"], default="edges")
    p.add_argument("--stop", action="append", required=True,
                   help="edges=N|nodes=N|error=X|beta=X|iters=N (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", default="exact", help="exact|sketch:k,eps")
    p.add_argument("--no-contraction", action="store_true",
                   help="restrict to deletion/reweight (sparsify-only mode)")
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--pinv-out", default=None,
                   help="also write the reduced pseudoinverse as CSV")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("sparsify", help="leverage-score sampling baseline")
    _add_input_args(p)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--target-edges", type=int, default=None,
                   help="pick the sample count whose expected distinct edge "
                        "count reaches this")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=_cmd_sparsify)

    p = sub.add_parser("coarsen", help="matching-based coarsening baseline")
    _add_input_args(p)
    p.add_argument("--strategy", choices=["random", "heavy-edge"], default="random")
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--target-nodes", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=_cmd_coarsen)

    p = sub.add_parser("metrics", help="compare a reduced graph to its original")
    p.add_argument("--original", required=True)
    p.add_argument("--node-weights", default=None)
    p.add_argument("--reduced", required=True)
    p.add_argument("--reduced-node-weights", default=None)
    p.add_argument("--cmap", default=None,
                   help="contraction map JSON (identity when omitted)")
    p.add_argument("--vectors", default="fiedler,median")
    p.add_argument("--eigen-k", type=int, default=None)
    p.add_argument("--sigma", type=float, default=None,
                   help="also check the sigma-approximation guarantee")
    p.add_argument("--sigma-vectors", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="metric CSV output")
    p.add_argument("--json", default=None, help="metric JSON output")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("compare", help="run an experiment spec end to end")
    p.add_argument("--spec", required=True, help="experiment JSON file")
    p.add_argument("--csv", default=None, help="long-format CSV output")
    p.add_argument("--json", default=None, help="JSON output")
    p.set_defaults(func=_cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single exit point for the CLI
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
