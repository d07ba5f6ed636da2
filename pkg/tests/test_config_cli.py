import json

import pytest

from glassdyn.cli import main
from glassdyn.config import ConfigError, ExperimentConfig, parse_config
from glassdyn.experiments import run_experiment


def test_parse_and_roundtrip():
    cfg = parse_config("experiment.name = torus-unique  # comment\nexperiment.seed = 4\n\ndynamics.horizon = 2.5\n")
    assert cfg.name == "torus-unique" and cfg.seed == 4 and cfg.horizon == 2.5
    assert parse_config(cfg.to_text()) == cfg


@pytest.mark.parametrize("text", [
    "experiment.name = x\nbogus.key = 1\n",
    "experiment.name = x\nexperiment.name = y\n",
    "experiment.seed = 1\n",
    "experiment.name = x\nexperiment.replicas = ten\n",
    "experiment.name\n",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_cli_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "loop-terminal-gsp" in out and "cross-lemma" in out


def test_cli_graph(capsys):
    assert main(["graph", "window:3x3:periodic"]) == 0
    out = capsys.readouterr().out
    assert "edges 18" in out


def test_cli_bad_recipe(capsys):
    assert main(["graph", "blob:3"]) == 2


def test_cli_gsp(capsys):
    assert main(["gsp", "torus-check", "--side", "3"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["energy"] == -18.0 and rep["minimizers"] == ["1" * 9]
    assert main(["gsp", "enumerate", "--graph", "path:3", "--coupling", "constant"]) == 0
    assert json.loads(capsys.readouterr().out)["energy"] == -2.0
    assert main(["gsp", "verify", "--graph", "path:3", "--coupling", "constant", "--spins", "101", "--K", "1"]) == 1
    # every vertex of 1-0-1 sits on an unsatisfied edge, so any singleton is a witness
    assert len(json.loads(capsys.readouterr().out)["witness"]) == 1


def test_cli_loops_types(capsys):
    assert main(["loops", "--width", "9", "--types"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "length,span,area,orientations,count"
    assert len(rows) == 6


def test_cli_geometry(capsys, tmp_path):
    assert main(["geometry", "spiral", "--turns", "1"]) == 0
    assert capsys.readouterr().out.splitlines()[:2] == ["0 0", "1 0"]
    assert main(["geometry", "en", "--sizes", "4", "8", "--seeds", "2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "en.csv").read_text().startswith("n,value,stderr,seeds")


def test_cli_run_writes_outputs(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"experiment.name = torus-unique\nexperiment.out = {tmp_path / 'out'}\n")
    assert main(["run", "--config", str(cfg)]) == 0
    assert json.loads((tmp_path / "out" / "summary.json").read_text())["passed"] is True
    assert (tmp_path / "out" / "runs.csv").exists()
    assert main(["run", "no-such-experiment"]) == 2


def test_same_config_is_byte_identical(tmp_path):
    cfg = ExperimentConfig(name="monotone-coupling", replicas=20, seed=9)
    a = run_experiment(cfg).summary_json()
    b = run_experiment(cfg).summary_json()
    assert a == b
    other = run_experiment(ExperimentConfig(name="monotone-coupling", replicas=20, seed=10))
    assert json.loads(other.summary_json())["seed"] == 10 and json.loads(a)["seed"] == 9
    assert other.runs_csv() == run_experiment(ExperimentConfig(name="monotone-coupling", replicas=20, seed=10)).runs_csv()


def test_parallel_reduction_matches_serial():
    cfg = ExperimentConfig(name="evenTree-tie", replicas=8, seed=3)
    assert run_experiment(cfg, jobs=2).summary_json() == run_experiment(cfg, jobs=1).summary_json()


def test_graph_override_rejected():
    with pytest.raises((ConfigError, ValueError)):
        run_experiment(ExperimentConfig(name="torus-unique", graph="window:3x3"))
