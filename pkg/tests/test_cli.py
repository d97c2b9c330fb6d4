import json
from pathlib import Path

import numpy as np
import pytest

import shallow_plan_lab.cli as cli
from shallow_plan_lab import load_mdp
from shallow_plan_lab.campaign import CampaignInvariantError

DATA = Path(__file__).parent / "data"


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_gen_solve_blackwell_pipeline(tmp_path, capsys):
    mdp_path = tmp_path / "mdp.json"
    code, out, err = run_cli(
        capsys, "gen", "--states", "5", "--branching", "2", "--seed", "7",
        "--out", str(mdp_path),
    )
    assert code == 0
    mdp = load_mdp(str(mdp_path))
    assert mdp.n_states == 5

    code, out, _ = run_cli(capsys, "solve", "--mdp", str(mdp_path), "--gamma", "0.9")
    assert code == 0
    solved = json.loads(out)
    assert len(solved["policy"]) == 5
    assert all(0 <= v <= 10 for v in solved["values"])

    code, out, _ = run_cli(capsys, "blackwell", "--mdp", str(mdp_path))
    assert code == 0
    assert json.loads(out)["gamma_bw"] == 0.47  # frozen for Fixed(5,2) seed 7


def test_gen_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        code, _, _ = run_cli(
            capsys, "gen", "--states", "4", "--branching", "2", "--seed", "3",
            "--out", str(path),
        )
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_sample_counts(tmp_path, capsys):
    mdp_path = tmp_path / "mdp.json"
    run_cli(capsys, "gen", "--states", "4", "--branching", "2", "--seed", "1", "--out", str(mdp_path))
    code, out, _ = run_cli(
        capsys, "sample", "--mdp", str(mdp_path), "--n-per-pair", "12", "--seed", "2"
    )
    assert code == 0
    payload = json.loads(out)
    counts = np.asarray(payload["counts"])
    assert counts.shape == (4, 2, 4)
    assert np.all(counts.sum(axis=2) == 12)
    assert payload["n_per_pair"] == 12


def test_params_and_bounds_reports(capsys):
    mdp = str(DATA / "golden_mdp.json")
    code, out, _ = run_cli(capsys, "params", "--mdp", mdp, "--gamma", "0.3")
    assert code == 0
    params = json.loads(out)
    assert params["kappa"] == pytest.approx(0.75, abs=1e-12)
    assert params["gamma_bw"] == 0.48

    code, out, _ = run_cli(capsys, "bounds", "--mdp", mdp, "--gamma", "0.3")
    assert code == 0
    bounds = json.loads(out)
    assert bounds["measured_bias"] == pytest.approx(1 / 104, abs=1e-12)
    assert bounds["condition_holds"] is True


def test_abstract_blind_map(capsys):
    code, out, _ = run_cli(
        capsys, "abstract", "--mdp", str(DATA / "golden_mdp.json"),
        "--omap", str(DATA / "golden_omap.json"),
    )
    assert code == 0
    abstract = json.loads(out)
    assert abstract["n_states"] == 1
    assert abstract["rewards"] == [[0.2375, 0.5]]


def test_schema_prints_headers(capsys):
    code, out, _ = run_cli(capsys, "schema", "--experiment", "fig2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("trial,mdp_seed,n_obs,gamma_bw")
    assert lines[1].startswith("trial,mdp_seed,n_obs,gamma,gamma_bw,normalized_bias")


def test_run_fig1_writes_csv(tmp_path, capsys):
    out_path = tmp_path / "fig1.csv"
    code, out, _ = run_cli(
        capsys, "run", "fig1", "--n-mdps", "3", "--states", "5", "--branching", "2",
        "--gamma-start", "0.9", "--gamma-step", "0.3", "--seed", "5",
        "--out", str(out_path),
    )
    assert code == 0
    assert "wrote" in out
    assert out_path.read_text().splitlines()[0] == "gamma,proportion_true,n"


def test_run_single_cli(capsys):
    code, out, _ = run_cli(
        capsys, "run", "single", "--mdp", str(DATA / "golden_mdp.json"),
        "--omap", str(DATA / "golden_omap.json"), "--gamma", "0.3",
        "--n-per-pair", "10", "--seed", "7",
    )
    assert code == 0
    payload = json.loads(out)
    golden = json.loads((DATA / "golden_report.json").read_text())
    assert payload == golden


def test_single_without_omap_has_null_abstraction(capsys):
    code, out, _ = run_cli(
        capsys, "run", "single", "--mdp", str(DATA / "golden_mdp.json"), "--gamma", "0.3",
    )
    assert code == 0
    assert json.loads(out)["abstraction"] is None


# --- failure modes -----------------------------------------------------------------


def test_bad_schema_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_states": 2, "n_actions": 1}')
    code, _, err = run_cli(capsys, "solve", "--mdp", str(bad), "--gamma", "0.5")
    assert code == 1
    assert "validation error" in err and "transitions" in err


def test_malformed_json_exits_1_with_location(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  not json")
    code, _, err = run_cli(capsys, "solve", "--mdp", str(bad), "--gamma", "0.5")
    assert code == 1
    assert "bad.json:2" in err


def test_missing_file_exits_2(capsys):
    code, _, err = run_cli(capsys, "solve", "--mdp", "/nonexistent/m.json", "--gamma", "0.5")
    assert code == 2
    assert "i/o error" in err


def test_unwritable_output_exits_2(capsys):
    code, _, err = run_cli(
        capsys, "gen", "--states", "3", "--branching", "2",
        "--out", "/nonexistent-dir/m.json",
    )
    assert code == 2


def test_usage_error_exits_1(capsys):
    code, _, err = run_cli(capsys, "run", "fig9")
    assert code == 1
    assert "invalid choice" in err


def test_no_command_exits_1(capsys):
    code, _, err = run_cli(capsys)
    assert code == 1


def test_invalid_gamma_exits_1(capsys):
    code, _, err = run_cli(
        capsys, "solve", "--mdp", str(DATA / "golden_mdp.json"), "--gamma", "1.0"
    )
    assert code == 1
    assert "gamma" in err


def test_campaign_invariant_violation_exits_3(monkeypatch, capsys, tmp_path):
    def boom(config, mdp_path=None, omap_path=None):
        raise CampaignInvariantError("trial 0 (mdp seed 42) violates ['x'] at gamma=0.0")

    monkeypatch.setattr(cli, "run_campaign", boom)
    code, _, err = run_cli(
        capsys, "run", "fig1", "--n-mdps", "1", "--out", str(tmp_path / "x.csv")
    )
    assert code == 3
    assert "invariant violation" in err


def test_help_exits_0(capsys):
    code, out, _ = run_cli(capsys, "--help")
    assert code == 0
    assert "shallow-plan-lab" in out
