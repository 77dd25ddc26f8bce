"""CLI subcommands and exit codes."""

import json

import pytest

from heatpatterns.cli import main
from heatpatterns.kshape import model_from_json_dict
from heatpatterns.strategy import (ClusterLabel, ControlStrategy,
                                   make_labeling, save_labeling)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    code = main(["generate", "--out", str(root / "data"),
                 "--mix", "COC=6,NSB=6,TCO5=6,TCO7=6",
                 "--noise", "0.1", "--seed", "3"])
    assert code == 0
    return root


class TestGenerate:
    def test_files_written(self, workdir):
        data = workdir / "data"
        assert (data / "readings.csv").exists()
        assert (data / "buildings.csv").exists()
        assert (data / "truth.csv").exists()


class TestRun:
    def test_run_and_artifacts(self, workdir, capsys):
        code = main(["run", "--readings", str(workdir / "data/readings.csv"),
                     "--out", str(workdir / "out"), "--k", "4",
                     "--seed", "7"])
        assert code == 0
        out = capsys.readouterr().out
        assert "ingested 24" in out
        assert (workdir / "out" / "manifest.json").exists()

    def test_config_file_with_overrides(self, workdir, tmp_path):
        config = {"readings_csv": str(workdir / "data/readings.csv"),
                  "output_dir": str(tmp_path / "out"), "k": 4, "seed": 1}
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        assert main(["run", "--config", str(path), "--seed", "7"]) == 0
        doc = json.loads((tmp_path / "out" / "config.json").read_text())
        assert doc["seed"] == 7

    def test_missing_inputs_is_input_error(self, tmp_path):
        assert main(["run", "--out", str(tmp_path)]) == 1

    def test_unreadable_csv_is_input_error(self, tmp_path):
        assert main(["run", "--readings", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "out"), "--k", "4"]) == 1

    def test_too_many_clusters_is_pipeline_error(self, workdir, tmp_path):
        assert main(["run", "--readings",
                     str(workdir / "data/readings.csv"),
                     "--out", str(tmp_path / "out"), "--k", "25"]) == 2


class TestSweep:
    def test_sweep_table(self, workdir, tmp_path, capsys):
        code = main(["sweep", "--readings",
                     str(workdir / "data/readings.csv"),
                     "--out", str(tmp_path / "sweepout"),
                     "--k-min", "2", "--k-max", "5", "--seed", "0"])
        assert code == 0
        assert "recommended k=4" in capsys.readouterr().out
        assert (tmp_path / "sweepout" / "sweep.csv").exists()


class TestDetectAndFlag:
    def test_detect_rewrites_report(self, workdir, capsys):
        code = main(["detect", "--artifacts", str(workdir / "out"),
                     "--model", "final"])
        assert code == 0
        assert "flagged" in capsys.readouterr().out

    def test_flag_with_labeling(self, workdir, capsys):
        with open(workdir / "out" / "model_final.json") as fh:
            model = model_from_json_dict(json.load(fh))
        labeling = make_labeling(
            model, {c: ClusterLabel(ControlStrategy.COC)
                    for c in range(model.k)}, author="expert")
        path = workdir / "labeling.json"
        save_labeling(labeling, path)
        code = main(["flag", "--artifacts", str(workdir / "out"),
                     "--labeling", str(path)])
        assert code == 0
        flags = (workdir / "out" / "flags.csv").read_text().splitlines()
        assert flags[0] == "building_id,category,cluster,strategy,verdict,rule"
        assert len(flags) - 1 == len(model.assignment)

    def test_stale_labeling_is_input_error(self, workdir, tmp_path):
        stale = {"fingerprint": "f" * 64, "author": "x", "timestamp": "t",
                 "clusters": {"0": {"strategy": "COC"},
                              "1": {"strategy": "COC"},
                              "2": {"strategy": "COC"},
                              "3": {"strategy": "COC"}}}
        path = tmp_path / "stale.json"
        path.write_text(json.dumps(stale))
        assert main(["flag", "--artifacts", str(workdir / "out"),
                     "--labeling", str(path)]) == 1

    def test_detect_without_artifacts_is_input_error(self, tmp_path):
        assert main(["detect", "--artifacts", str(tmp_path)]) == 1
