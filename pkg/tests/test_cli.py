import json

import numpy as np
import pytest

from hypermix.cli import main
from hypermix.hypergraph import connected_components
from hypermix.io import load_hypergraph, load_params, read_hyperedges


@pytest.fixture
def dataset(tmp_path):
    """Small generated dataset on disk: edges, attributes, truth."""
    config = {
        "num_nodes": 30,
        "num_communities": 2,
        "dim_seq": {"2": 30, "3": 20, "4": 10},
        "rho_match": 0.9,
        "seed": 5,
    }
    cfg_path = tmp_path / "gen.json"
    cfg_path.write_text(json.dumps(config), encoding="utf-8")
    out_dir = tmp_path / "data"
    assert main(["generate", "--config", str(cfg_path),
                 "--out-dir", str(out_dir)]) == 0
    inst = out_dir / "instance_00"
    return {
        "edges": inst / "edges.txt",
        "attributes": inst / "attributes.csv",
        "truth": inst / "truth.json",
        "dir": inst,
        "root": out_dir,
    }


class TestGenerate:
    def test_outputs_exist(self, dataset):
        for key in ("edges", "attributes", "truth"):
            assert dataset[key].exists()
        assert (dataset["root"] / "generate.manifest.json").exists()

    def test_manifest_records_inputs_and_outputs(self, dataset):
        manifest = json.loads(
            (dataset["root"] / "generate.manifest.json").read_text())
        assert manifest["command"] == "generate"
        assert manifest["outputs"]
        assert all(len(d) == 64 for d in manifest["inputs"].values())

    def test_instances_flag(self, tmp_path):
        config = {"num_nodes": 12, "num_communities": 2,
                  "dim_seq": {"2": 6}, "rho_match": 1.0, "seed": 0}
        cfg = tmp_path / "gen.json"
        cfg.write_text(json.dumps(config), encoding="utf-8")
        out = tmp_path / "multi"
        assert main(["generate", "--config", str(cfg), "--out-dir", str(out),
                     "--instances", "3"]) == 0
        assert sorted(p.name for p in out.iterdir() if p.is_dir()) == [
            "instance_00", "instance_01", "instance_02"]

    def test_full_match_attributes_equal_dominant_truth(self, tmp_path):
        config = {"num_nodes": 15, "num_communities": 2,
                  "dim_seq": {"2": 10}, "rho_match": 1.0, "seed": 3}
        cfg = tmp_path / "gen.json"
        cfg.write_text(json.dumps(config), encoding="utf-8")
        out = tmp_path / "exact"
        assert main(["generate", "--config", str(cfg),
                     "--out-dir", str(out)]) == 0
        truth = load_params(out / "instance_00" / "truth.json")
        lines = (out / "instance_00" / "attributes.csv").read_text().splitlines()
        got = {row.split(",")[0]: row.split(",")[1] for row in lines[1:]}
        dominant = np.argmax(truth["u"], axis=1)
        for node, value in got.items():
            assert value == f"c{dominant[int(node)]}"

    def test_zero_affinity_is_numerical_failure(self, tmp_path):
        n, k = 10, 2
        config = {"num_nodes": n, "num_communities": k, "dim_seq": {"2": 3},
                  "rho_match": 1.0, "seed": 0,
                  "planted_u": np.full((n, k), 0.5).tolist(),
                  "planted_w": np.zeros((k, k)).tolist()}
        cfg = tmp_path / "gen.json"
        cfg.write_text(json.dumps(config), encoding="utf-8")
        assert main(["generate", "--config", str(cfg),
                     "--out-dir", str(tmp_path / "x")]) == 2


class TestFit:
    def test_structure_only_run(self, dataset, tmp_path):
        out = tmp_path / "params.json"
        code = main(["fit", str(dataset["edges"]), "--k", "2", "--gamma", "0",
                     "--seed", "1", "--restarts", "2", "--max-iter", "60",
                     "--out", str(out)])
        assert code == 0
        doc = load_params(out)
        assert doc["k"] == 2 and doc["beta"] is None
        assert out.with_suffix(".trace.csv").exists()
        assert out.with_suffix(".manifest.json").exists()

    def test_blended_run_produces_beta(self, dataset, tmp_path):
        out = tmp_path / "params.json"
        code = main(["fit", str(dataset["edges"]),
                     "--attributes", str(dataset["attributes"]),
                     "--k", "2", "--gamma", "0.9", "--seed", "1",
                     "--restarts", "2", "--max-iter", "60", "--out", str(out)])
        assert code == 0
        doc = load_params(out)
        assert doc["beta"] is not None and doc["z"] == 2

    def test_gamma_without_attributes_is_validation_error(self, dataset,
                                                          tmp_path):
        code = main(["fit", str(dataset["edges"]), "--k", "2",
                     "--gamma", "0.5", "--out", str(tmp_path / "p.json")])
        assert code == 1

    def test_missing_file_is_validation_error(self, tmp_path):
        code = main(["fit", str(tmp_path / "nope.txt"), "--k", "2",
                     "--out", str(tmp_path / "p.json")])
        assert code == 1

    def test_same_seed_byte_identical_params(self, dataset, tmp_path):
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            assert main(["fit", str(dataset["edges"]), "--k", "2",
                         "--gamma", "0", "--seed", "9", "--restarts", "2",
                         "--max-iter", "50", "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestAuc:
    @pytest.fixture
    def fitted(self, dataset, tmp_path):
        out = tmp_path / "params.json"
        assert main(["fit", str(dataset["edges"]), "--k", "2", "--gamma", "0",
                     "--seed", "2", "--restarts", "2", "--max-iter", "80",
                     "--out", str(out)]) == 0
        return out

    def test_uniform_mode(self, dataset, fitted, tmp_path, capsys):
        out = tmp_path / "auc.json"
        code = main(["auc", str(dataset["edges"]), str(fitted),
                     "--mode", "uniform", "--seed", "4", "--out", str(out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "auc=" in printed
        doc = json.loads(out.read_text())
        assert 0.0 <= doc["auc"] <= 1.0

    def test_soo_mode_prints_jaccard(self, dataset, fitted, capsys):
        code = main(["auc", str(dataset["edges"]), str(fitted),
                     "--mode", "soo", "--seed", "4"])
        assert code == 0
        printed = capsys.readouterr().out
        assert "jaccard" in printed
        # Size-3 edges exist in the dataset: (3-1)/(3+1) = 0.5.
        assert "size=3 jaccard=0.5000" in printed

    def test_unknown_node_is_validation_error(self, fitted, tmp_path):
        rogue = tmp_path / "rogue.txt"
        rogue.write_text("998,999\n", encoding="utf-8")
        assert main(["auc", str(rogue), str(fitted)]) == 1


class TestCv:
    def test_single_cell_report(self, dataset, tmp_path, capsys):
        out = tmp_path / "report.csv"
        code = main(["cv", str(dataset["edges"]), "--k-range", "2",
                     "--gamma-grid", "0", "--folds", "5", "--seed", "3",
                     "--restarts", "1", "--max-iter", "40", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "k,gamma,fold,auc"
        fold_rows = [l for l in lines[1:] if l.split(",")[2].isdigit()]
        assert len(fold_rows) == 5
        assert "selected: k=2 gamma=0.0" in capsys.readouterr().out

    def test_small_grid_with_attributes(self, dataset, tmp_path, capsys):
        out = tmp_path / "report.csv"
        code = main(["cv", str(dataset["edges"]),
                     "--attributes", str(dataset["attributes"]),
                     "--k-range", "2", "--gamma-grid", "0,0.9", "--folds", "2",
                     "--seed", "3", "--restarts", "1", "--max-iter", "40",
                     "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len([l for l in lines[1:] if l.split(",")[2].isdigit()]) == 4

    def test_empty_grid_is_validation_error(self, dataset, tmp_path):
        code = main(["cv", str(dataset["edges"]), "--k-range", "2",
                     "--gamma-grid", "2.0", "--out", str(tmp_path / "r.csv")])
        assert code == 1


class TestDeleteEdges:
    def test_keep_all_is_identity(self, dataset, tmp_path):
        out = tmp_path / "kept.txt"
        assert main(["delete-edges", str(dataset["edges"]),
                     "--keep-fraction", "1.0", "--out", str(out)]) == 0
        a = sorted((tuple(sorted(ids)), w)
                   for ids, w in read_hyperedges(dataset["edges"]))
        b = sorted((tuple(sorted(ids)), w) for ids, w in read_hyperedges(out))
        assert a == b

    def test_keep_connected_output_verified_by_traversal(self, dataset,
                                                         tmp_path):
        out = tmp_path / "kept.txt"
        assert main(["delete-edges", str(dataset["edges"]),
                     "--keep-fraction", "0.4", "--keep-connected",
                     "--seed", "6", "--out", str(out)]) == 0
        before = load_hypergraph(dataset["edges"])
        after = load_hypergraph(out, nodes=[str(l) for l in before.node_labels])
        assert connected_components(after) == connected_components(before)

    def test_bad_fraction_is_validation_error(self, dataset, tmp_path):
        assert main(["delete-edges", str(dataset["edges"]),
                     "--keep-fraction", "0", "--out",
                     str(tmp_path / "k.txt")]) == 1


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
