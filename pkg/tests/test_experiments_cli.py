import json

import jsonschema
import pytest

from sublinear_graphs.cli import main
from sublinear_graphs.errors import ConfigError
from sublinear_graphs.experiments import aggregate, run_experiment, valid_pairs, validate_output
from sublinear_graphs.graph_core import read_edge_list


def _spec(**kw):
    spec = {"algo": "count-direct", "model": "hash_ordered", "trials": 4, "seed": 5,
            "graph": {"family": "er", "n": 200, "m": 600, "seed": 1},
            "params": {"eps": 0.3}, "success_eps": 0.3}
    spec.update(kw)
    return spec


class TestExperiments:
    def test_zero_trials(self):
        doc = run_experiment(_spec(trials=0))
        agg = doc["aggregate"]
        assert agg["trials"] == 0 and agg["mean_estimate"] == 0 and agg["success_rate"] == 0
        assert all(v == 0 for v in agg["mean_queries"].values())
        validate_output(doc)

    def test_reproducible_without_timing(self):
        a = json.dumps(run_experiment(_spec(record_time=False)), sort_keys=True)
        b = json.dumps(run_experiment(_spec(record_time=False)), sort_keys=True)
        assert a == b

    def test_parallel_matches_serial(self):
        a = run_experiment(_spec(record_time=False))
        b = run_experiment(_spec(record_time=False, workers=2))
        assert a == b

    def test_trial_seeds_distinct(self):
        doc = run_experiment(_spec())
        assert len({r["params"]["seed"] for r in doc["reports"]}) == 4

    def test_schema(self):
        doc = run_experiment(_spec())
        validate_output(doc)
        doc["reports"][0]["rel_error"] = -1
        with pytest.raises(jsonschema.ValidationError):
            validate_output(doc)

    def test_truth_and_success(self):
        doc = run_experiment(_spec(trials=6))
        assert doc["reports"][0]["truth"] == 600
        assert 0 <= doc["aggregate"]["success_rate"] <= 1

    @pytest.mark.parametrize("bad", [{"algo": "nope"}, {"model": "telepathy"},
                                     {"algo": "tri-edge", "model": "hash_ordered"}])
    def test_config_errors(self, bad):
        with pytest.raises(ConfigError) as exc:
            run_experiment(_spec(**bad))
        assert "count-direct@hash_ordered" in str(exc.value)

    def test_missing_graph_field(self):
        with pytest.raises(ConfigError):
            run_experiment(_spec(graph={"family": "er", "n": 10}))

    def test_valid_pairs(self):
        pairs = valid_pairs()
        assert "count-pairs@indexed_pairs" in pairs and "tri-edge@full_neighborhood" in pairs
        assert "tri-edge@indexed" not in pairs

    def test_aggregate_ignores_failures(self):
        reps = [{"estimate": None, "rel_error": None, "queries": {}},
                {"estimate": 10.0, "rel_error": 0.0, "queries": {}}]
        for r in reps:
            r["queries"] = {k: 1 for k in ("random_vertex", "degree", "ith_neighbor", "hash", "pair",
                                           "full_neighborhood", "batched_block", "random_edge", "total")}
        agg = aggregate(reps, 0.1)
        assert agg["mean_estimate"] == 10 and agg["success_rate"] == 0.5


class TestCli:
    def test_gen_and_verify(self, tmp_path, capsys):
        path = tmp_path / "k.txt"
        assert main(["gen", "--family", "cliques-plus-independent", "--n", "30", "--s", "1", "--m", "45",
                     "--out", str(path)]) == 0
        g = read_edge_list(path)
        assert (g.n, g.m) == (30, 45)
        out = tmp_path / "v.json"
        assert main(["verify", "--graph", str(path), "--out", str(out)]) == 0
        v = json.loads(out.read_text())
        assert v["triangles"] == 120 and v["assignment_conserved"] and v["out_degree_sum_is_m"]

    def test_gen_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for p in (a, b):
            main(["gen", "--family", "er", "--n", "100", "--m", "300", "--seed", "4", "--out", str(p)])
        assert a.read_bytes() == b.read_bytes()

    def _graph(self, tmp_path, *args):
        path = tmp_path / "g.txt"
        main(["gen", *args, "--out", str(path)])
        return str(path)

    def test_count_edges(self, tmp_path, capsys):
        path = self._graph(tmp_path, "--family", "er", "--n", "300", "--m", "1200", "--seed", "2")
        for algo in ("sampling", "direct", "pairs"):
            assert main(["count-edges", "--graph", path, "--algo", algo, "--advice", "1200", "--truth"]) == 0
            rep = json.loads(capsys.readouterr().out)
            assert rep["truth"] == 1200 and rep["queries"]["total"] > 0

    def test_count_edges_advice_free(self, tmp_path, capsys):
        path = self._graph(tmp_path, "--family", "cycle", "--n", "300")
        assert main(["count-edges", "--graph", path]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert "confident" in rep["extra"]

    def test_sampling_commands(self, tmp_path, capsys):
        path = self._graph(tmp_path, "--family", "complete", "--n", "12")
        assert main(["sample-edge", "--graph", path, "--seed", "3"]) == 0
        u, v = json.loads(capsys.readouterr().out)["extra"]["edge"]
        assert u != v
        for mode in ("walk", "wr", "wor", "bernoulli"):
            assert main(["sample-edges", "--graph", path, "--mode", mode, "--count", "5"]) == 0
            edges = json.loads(capsys.readouterr().out)["extra"]["edges"]
            if mode in ("walk", "wr", "wor"):
                assert len(edges) == 5

    def test_count_triangles(self, tmp_path, capsys):
        path = self._graph(tmp_path, "--family", "cliques-plus-independent", "--n", "60", "--s", "1",
                           "--m", "45")
        assert main(["count-triangles", "--graph", path, "--truth"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["truth"] == 120
        assert main(["count-triangles", "--graph", path, "--algo", "edge", "--advice", "120",
                     "--m", "45", "--random-edge"]) == 0
        assert json.loads(capsys.readouterr().out)["extra"]["branch"] == "edge-sampling"

    def test_bench(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(_spec(record_time=False)))
        out = tmp_path / "o.json"
        assert main(["bench", "--config", str(cfg), "--trials", "2", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        validate_output(doc)
        assert doc["aggregate"]["trials"] == 2

    def test_errors_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(_spec(algo="nope")))
        assert main(["bench", "--config", str(cfg)]) == 2
        assert "valid pairs" in capsys.readouterr().err
        bad = tmp_path / "bad.txt"
        bad.write_text("n=3\n0 7\n")
        assert main(["verify", "--graph", str(bad)]) == 2
