import json
import math

import numpy as np
import pytest

from graphreduce.experiment import (
    AlgorithmSpec,
    ExperimentSpec,
    LevelSchedule,
    ResultRow,
    load_graph,
    parse_mode,
    parse_stop,
    read_rows_csv,
    run_experiment,
    run_experiment_to_files,
    probe_vectors,
    write_rows_csv,
)
from graphreduce.generators import er
from graphreduce.graph import write_edgelist
from graphreduce.reducer import (
    BetaCap,
    EdgeBudget,
    ErrorCap,
    ExactMode,
    MaxIterations,
    NodeBudget,
    SketchMode,
)
from graphreduce.sketch import symmetrized_laplacian


def edge_spec(sizes, algorithms, runs=2, seed=5, **kw):
    return ExperimentSpec(
        graph={"kind": "er", "params": {"n": 24, "p": 0.25}},
        levels=LevelSchedule("edges", tuple(sizes)),
        algorithms=tuple(algorithms),
        runs=runs,
        seed=seed,
        **kw,
    )


class TestParsing:
    def test_stop_string(self):
        (stop,) = parse_stop("edges=40")
        assert stop == EdgeBudget(40)

    def test_stop_all_kinds(self):
        assert parse_stop("nodes=10") == [NodeBudget(10)]
        assert parse_stop("error=0.5") == [ErrorCap(0.5)]
        assert parse_stop("beta=2.5") == [BetaCap(2.5)]
        assert parse_stop("iters=7") == [MaxIterations(7)]

    def test_stop_dict_multiple(self):
        stops = parse_stop({"edges": 40, "iters": 3})
        assert EdgeBudget(40) in stops and MaxIterations(3) in stops

    def test_stop_rejects_unknown_and_bare(self):
        with pytest.raises(ValueError):
            parse_stop("volume=3")
        with pytest.raises(ValueError):
            parse_stop("edges")

    def test_mode_exact(self):
        assert parse_mode("exact") == ExactMode()

    def test_mode_sketch_variants(self):
        assert parse_mode("sketch") == SketchMode()
        assert parse_mode("sketch:33") == SketchMode(n_probes=33)
        assert parse_mode("sketch:33,0.5") == SketchMode(n_probes=33, epsilon=0.5)
        assert parse_mode("sketch:,0.5") == SketchMode(epsilon=0.5)

    def test_mode_rejects_unknown(self):
        with pytest.raises(ValueError):
            parse_mode("approximate")


class TestSpecValidation:
    def test_levels_must_decrease(self):
        with pytest.raises(ValueError):
            LevelSchedule("edges", (40, 40))
        with pytest.raises(ValueError):
            LevelSchedule("edges", (20, 30))

    def test_levels_positive_nonempty_known_target(self):
        with pytest.raises(ValueError):
            LevelSchedule("edges", ())
        with pytest.raises(ValueError):
            LevelSchedule("edges", (4, 0))
        with pytest.raises(ValueError):
            LevelSchedule("volume", (4,))

    def test_algorithm_kind_checked(self):
        with pytest.raises(ValueError):
            AlgorithmSpec("x", "prune")

    def test_runs_positive(self):
        with pytest.raises(ValueError):
            edge_spec([10], [], runs=0)

    def test_from_dict_roundtrip(self):
        d = {
            "graph": {"kind": "er", "params": {"n": 24, "p": 0.25}},
            "levels": {"target": "edges", "sizes": [40, 25]},
            "algorithms": [
                {"name": "ours", "kind": "reduce", "options": {"q": 0.125}},
                {"name": "ss", "kind": "sparsify"},
            ],
            "runs": 3,
            "seed": 9,
            "vectors": ["fiedler", "median"],
            "eigen_k": 4,
            "outputs": {"csv": "a.csv", "json": "a.json"},
        }
        spec = ExperimentSpec.from_dict(d)
        assert spec.levels == LevelSchedule("edges", (40, 25))
        assert spec.algorithms[0].options == {"q": 0.125}
        assert spec.algorithms[1].options == {}
        assert spec.runs == 3 and spec.seed == 9
        assert spec.vectors == ("fiedler", "median") and spec.eigen_k == 4
        assert spec.csv_path == "a.csv" and spec.json_path == "a.json"


class TestVectors:
    def test_fiedler_is_second_eigenvector(self):
        g = er(20, 0.3, np.random.default_rng(0), "uniform:0.5,2")
        vecs = probe_vectors(g, ["fiedler", "median"])
        lhat, w_sqrt = symmetrized_laplacian(g)
        vals, evs = np.linalg.eigh(lhat.toarray())
        v = vecs["fiedler"] * w_sqrt
        # eigenvector up to sign
        assert min(np.linalg.norm(v - evs[:, 1]), np.linalg.norm(v + evs[:, 1])) < 1e-8
        assert vecs["median"].shape == (20,)

    def test_vectors_kill_weighted_mean(self):
        g = er(16, 0.4, np.random.default_rng(1))
        w = np.array([g.node_weight(u) for u in g.nodes()])
        for vec in probe_vectors(g, ["fiedler", "median"]).values():
            assert abs(w @ vec) < 1e-8

    def test_unknown_label_rejected(self):
        g = er(10, 0.5, np.random.default_rng(2))
        with pytest.raises(ValueError):
            probe_vectors(g, ["largest"])


class TestRunExperiment:
    def test_edge_schedule_row_layout(self):
        spec = edge_spec(
            [40, 25],
            [
                AlgorithmSpec("ours", "reduce", {"q": 0.125}),
                AlgorithmSpec("ss", "sparsify"),
            ],
        )
        rows = run_experiment(spec)
        # per cell: hyperbolic[fiedler] + edges + nodes + failures
        assert len(rows) == 2 * 2 * 4
        assert {r.level for r in rows} == {40, 25}
        assert {r.algorithm for r in rows} == {"ours", "ss"}
        # a sparsifier at 25 edges on 24 nodes may disconnect; ours may not
        fails = {(r.algorithm, r.level): r.mean for r in rows if r.metric == "failures"}
        assert fails[("ours", 40)] == 0.0 and fails[("ours", 25)] == 0.0
        for r in rows:
            if r.metric == "hyperbolic" and fails[(r.algorithm, r.level)] < spec.runs:
                assert math.isfinite(r.mean) and r.mean >= 0

    def test_reduce_respects_edge_budget(self):
        spec = edge_spec([30], [AlgorithmSpec("ours", "reduce")])
        rows = run_experiment(spec)
        (edges_row,) = [r for r in rows if r.metric == "edges"]
        assert edges_row.mean <= 30

    def test_node_schedule_with_coarsen(self):
        spec = ExperimentSpec(
            graph={"kind": "er", "params": {"n": 20, "p": 0.3}},
            levels=LevelSchedule("nodes", (12, 8)),
            algorithms=(
                AlgorithmSpec("ours", "reduce"),
                AlgorithmSpec("match", "coarsen", {"strategy": "heavy-edge"}),
            ),
            runs=2,
            seed=3,
        )
        rows = run_experiment(spec)
        for r in rows:
            if r.metric == "nodes":
                assert r.mean <= r.level
            if r.metric == "failures":
                assert r.mean == 0.0

    def test_sparsify_rejects_node_targets(self):
        spec = ExperimentSpec(
            graph={"kind": "er", "params": {"n": 20, "p": 0.3}},
            levels=LevelSchedule("nodes", (12,)),
            algorithms=(AlgorithmSpec("ss", "sparsify"),),
            runs=1,
        )
        with pytest.raises(ValueError):
            run_experiment(spec)

    def test_coarsen_rejects_edge_targets(self):
        spec = edge_spec([10], [AlgorithmSpec("match", "coarsen")], runs=1)
        with pytest.raises(ValueError):
            run_experiment(spec)

    def test_failures_counted_not_fatal(self):
        # 8 distinct edges out of 69 leaves a 24 node sparsifier disconnected
        spec = edge_spec([8], [AlgorithmSpec("ss", "sparsify")], runs=3)
        rows = run_experiment(spec)
        (fail_row,) = [r for r in rows if r.metric == "failures"]
        assert fail_row.mean == 3.0
        (dist_row,) = [r for r in rows if r.metric == "hyperbolic"]
        assert math.isnan(dist_row.mean)

    def test_zero_algorithms_gives_header_only(self, tmp_path):
        spec = edge_spec([10], [])
        rows = run_experiment(spec)
        assert rows == []
        out = tmp_path / "empty.csv"
        write_rows_csv(rows, out)
        # read_text folds the csv module's \r\n line ending
        assert out.read_text() == "level,algorithm,metric,vector,mean,std\n"

    def test_eigen_metric_present_when_requested(self):
        spec = edge_spec([30], [AlgorithmSpec("ours", "reduce")], eigen_k=3)
        rows = run_experiment(spec)
        (eig_row,) = [r for r in rows if r.metric == "eigen_relative_error"]
        assert math.isfinite(eig_row.mean) and eig_row.mean >= 0

    def test_deterministic_per_seed(self, tmp_path):
        spec = edge_spec(
            [35],
            [AlgorithmSpec("ours", "reduce"), AlgorithmSpec("ss", "sparsify")],
            vectors=("fiedler", "median"),
        )
        rows_a = run_experiment(spec)
        rows_b = run_experiment(spec)
        assert rows_a == rows_b
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_rows_csv(rows_a, a)
        write_rows_csv(rows_b, b)
        assert a.read_bytes() == b.read_bytes()

    def test_graph_from_file(self, tmp_path):
        g = er(18, 0.3, np.random.default_rng(4), "uniform:0.5,2")
        path = tmp_path / "g.edges"
        write_edgelist(g, path)
        spec = ExperimentSpec(
            graph={"path": str(path)},
            levels=LevelSchedule("edges", (20,)),
            algorithms=(AlgorithmSpec("ours", "reduce"),),
            runs=1,
        )
        loaded = load_graph(spec)
        assert loaded.n_nodes == 18 and loaded.n_edges == g.n_edges
        rows = run_experiment(spec)
        assert any(r.metric == "hyperbolic" for r in rows)


class TestReportFiles:
    def test_csv_roundtrip(self, tmp_path):
        rows = [
            ResultRow(40, "ours", "hyperbolic", "fiedler", 0.125, 0.03),
            ResultRow(40, "ours", "failures", "", 0.0, 0.0),
        ]
        path = tmp_path / "rows.csv"
        write_rows_csv(rows, path)
        assert read_rows_csv(path) == rows

    def test_to_files_writes_csv_and_json(self, tmp_path):
        spec = edge_spec(
            [30],
            [AlgorithmSpec("ours", "reduce")],
            csv_path=str(tmp_path / "out.csv"),
            json_path=str(tmp_path / "out.json"),
        )
        rows = run_experiment_to_files(spec)
        assert read_rows_csv(spec.csv_path) == rows
        with open(spec.json_path) as fh:
            payload = json.load(fh)
        assert len(payload["rows"]) == len(rows)
        assert payload["rows"][0]["algorithm"] == "ours"
