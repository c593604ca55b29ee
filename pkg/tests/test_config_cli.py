"""JSON configuration handling and the command-line front end."""

import json

import numpy as np
import pytest

from sysrel import cli
from sysrel.config import (
    ConfigError,
    history_to_csv,
    load_config,
    problem_from_config,
    seeds_from_config,
    validate_config,
)
from sysrel.learning import Seeds

CHEAP = {
    "problem": {"builtin": "four_branch", "params": {"P": 7.0}},
    "surrogate": {"kind": "pck"},
    "learning": {"max_iterations": 12},
    "sus": {"n_level": 1000},
    "sus_final": {"n_level": 4000},
    "seed": 1,
}


def _write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


# -- config parsing ----------------------------------------------------------


def test_builtin_problem_from_config():
    p = problem_from_config(CHEAP)
    assert p.name == "four_branch(P=7)"
    assert p.reference["beta"] == 2.842


def test_unknown_builtin_lists_available():
    with pytest.raises(ConfigError, match="four_branch"):
        problem_from_config({"problem": {"builtin": "nope"}})


def test_explicit_problem_with_expressions():
    cfg = {
        "name": "toy",
        "inputs": [
            {"kind": "gaussian", "mean": 0.0, "std": 1.0},
            {"kind": "uniform", "bounds": [-1.0, 1.0]},
            {"kind": "lognormal", "mean": 5.0, "cov": 0.1},
        ],
        "components": [
            {"map": [0, 2], "expression": "x1 + x3"},
            {"map": [1], "expression": "3 - x2^2"},
        ],
        "composition": "min(g1, g2)",
    }
    p = problem_from_config(cfg)
    assert p.input_model.dim == 3
    # x1 + x3 on the subvector (x0, x2)
    out = p.limit_states[0](np.array([[2.0, 5.0]]))
    assert out[0] == pytest.approx(7.0)
    out = p.limit_states[1](np.array([[0.5]]))
    assert out[0] == pytest.approx(3.0 - 0.25)


def test_expression_outside_map_rejected():
    cfg = {
        "inputs": [{"kind": "gaussian", "mean": 0.0, "std": 1.0}] * 2,
        "components": [{"map": [0], "expression": "x2"}],
        "composition": "g1",
    }
    with pytest.raises(ConfigError, match="x2"):
        problem_from_config(cfg)


def test_missing_composition_names_field():
    cfg = {
        "inputs": [{"kind": "gaussian", "mean": 0.0, "std": 1.0}],
        "components": [{"map": [0], "expression": "x1"}],
    }
    with pytest.raises(ConfigError, match="composition"):
        validate_config(cfg)


def test_seeds_from_config_variants():
    assert seeds_from_config({"seed": 5}) == Seeds.derive(5)
    assert seeds_from_config({}, override=9) == Seeds.derive(9)
    assert seeds_from_config({"seeds": {"global": 3}}) == Seeds.derive(3)
    explicit = seeds_from_config(
        {"seeds": {"global": 1, "sus": 2, "usys": 3, "sobol": 4}})
    assert explicit == Seeds(1, 2, 3, 4)


def test_load_config_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_shipped_configs_validate():
    import pathlib

    configs = pathlib.Path(__file__).resolve().parent.parent / "configs"
    names = sorted(p.name for p in configs.glob("*.json"))
    assert names == ["four_branch_p6.json", "four_branch_p7.json",
                     "roof_truss.json"]
    for name in names:
        validate_config(load_config(str(configs / name)))


# -- CLI ---------------------------------------------------------------------


def test_cli_validate_ok(tmp_path, capsys):
    assert cli.main(["validate", _write(tmp_path, CHEAP)]) == 0
    assert "OK" in capsys.readouterr().out


def test_cli_validate_bad_config(tmp_path, capsys):
    bad = {
        "inputs": [{"kind": "gaussian", "mean": 0.0, "std": 1.0}],
        "components": [{"map": [0], "expression": "x1"}],
    }
    assert cli.main(["validate", _write(tmp_path, bad)]) == 1
    assert "composition" in capsys.readouterr().err


def test_cli_missing_file():
    assert cli.main(["validate", "/does/not/exist.json"]) == 1


@pytest.mark.slow
def test_cli_run_json_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = cli.main(["run", _write(tmp_path, CHEAP), "-o", str(out)])
    assert code in (0, 2)
    doc = json.loads(out.read_text())
    assert doc["config_echo"] == CHEAP
    assert 0.0 < doc["pf"] < 1.0
    assert doc["total_eval"] == sum(doc["n_eval"])
    assert set(doc["seeds"]) == {"global", "sus", "usys", "sobol"}
    err = capsys.readouterr().err
    assert "beta=" in err


@pytest.mark.slow
def test_cli_run_csv_history(tmp_path):
    out = tmp_path / "history.csv"
    code = cli.main(["run", _write(tmp_path, CHEAP), "-o", str(out),
                     "--format", "csv"])
    assert code in (0, 2)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "iteration,pf,beta,eps,pool_size,n_clusters,n_enriched"
    assert len(lines) >= 2
    first = lines[1].split(",")
    assert first[0] == "0" and first[3] == ""  # no epsilon at iteration 0


@pytest.mark.slow
def test_cli_run_seed_reproducible(tmp_path):
    reports = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        cli.main(["run", _write(tmp_path, CHEAP), "-o", str(out), "--seed", "11"])
        reports.append(json.loads(out.read_text()))
    assert reports[0]["pf"] == reports[1]["pf"]
    assert reports[0]["beta"] == reports[1]["beta"]
    assert reports[0]["n_eval"] == reports[1]["n_eval"]


@pytest.mark.slow
def test_cli_reference_runs(tmp_path, capsys):
    cfg = dict(CHEAP)
    cfg["sus_final"] = {"n_level": 2000}
    code = cli.main(["reference", _write(tmp_path, cfg)])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["beta"] == pytest.approx(2.842, abs=0.25)


@pytest.mark.slow
def test_cli_repeat_summary(tmp_path, capsys):
    out = tmp_path / "summary.json"
    code = cli.main(["repeat", _write(tmp_path, CHEAP), "--n", "2",
                     "-o", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["repetitions"] == 2
    assert {"median", "q1", "q3"} <= set(doc["beta"])
    assert "eps_beta_median" in doc


def test_history_to_csv_round_numbers():
    class It:
        iteration, pf, beta, eps = 0, 1e-3, 3.09, None
        pool_size, n_clusters, n_enriched = 100, 2, 2

    class Rep:
        iterations = [It()]

    text = history_to_csv(Rep())
    assert text.splitlines()[1].startswith("0,0.001,3.09,,100,2,2")
