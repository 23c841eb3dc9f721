"""End-to-end checks for the command line runner.

Every run goes through ``click.testing.CliRunner`` in-process, so the
library tie-outs recompute the exact same code path and must agree to
formatting precision.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from ldbayes.cli import EXPERIMENTS, config_hash, main
from ldbayes.core import Alphabet, markov_from_json
from ldbayes.entropy import finite_horizon_entropy_curve
from ldbayes.gibbs import FiniteRangePotential, build_gibbs_model
from ldbayes.hypermix import hypermixing_profile
from ldbayes.posterior import LossSpec, log_partition_curve
from ldbayes.simulate import (
    LangevinSpec,
    ObservedSystemSpec,
    generate_observation,
    sample_langevin,
    write_langevin_csv,
    write_path_text,
)

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"
SHAPE = [1.0, 0.0, 0.0, 1.0]
LOSS_DOC = {"range": 1, "table": [[0, 1], [1, 0]]}


def family_doc(count, start=-2.0, stop=2.0):
    return {
        "kind": "scaled-potential",
        "alphabet": ["0", "1"],
        "range": 2,
        "shape": SHAPE,
        "thetas": {"start": start, "stop": stop, "count": count},
    }


def source_doc(theta=0.8):
    return {
        "kind": "gibbs",
        "alphabet": ["0", "1"],
        "range": 2,
        "shape": SHAPE,
        "theta": theta,
    }


def write_cfg(directory, cfg, name="cfg.json"):
    path = Path(directory) / name
    path.write_text(json.dumps(cfg))
    return path


def invoke(args, **kwargs):
    return CliRunner().invoke(main, [str(a) for a in args], **kwargs)


def all_output(result):
    # merged stream works across click versions with and without mix_stderr
    try:
        extra = result.stderr
    except (ValueError, AttributeError):
        extra = ""
    return result.output + extra


def read_csv(path):
    lines = Path(path).read_text().strip().split("\n")
    return lines[0], [line.split(",") for line in lines[1:]]


def observation_spec():
    alpha = Alphabet(("0", "1"))
    model = build_gibbs_model(FiniteRangePotential(alpha, 2, 0.8 * np.asarray(SHAPE)))
    return ObservedSystemSpec(model)


def test_help_lists_all_subcommands():
    result = invoke(["--help"])
    assert result.exit_code == 0
    for name in EXPERIMENTS + ("validate",):
        assert name in result.output


@pytest.mark.parametrize(
    "config_path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.stem
)
def test_validate_accepts_shipped_configs(config_path):
    result = invoke(["validate", "--config", config_path])
    assert result.exit_code == 0, all_output(result)


def test_validate_leaves_filesystem_untouched(tmp_path):
    out = tmp_path / "never"
    cfg = {"experiment": "pressure", "family": family_doc(3), "out": str(out)}
    result = invoke(["validate", "--config", write_cfg(tmp_path, cfg)])
    assert result.exit_code == 0
    assert not out.exists()


def test_missing_config_file_exits_two(tmp_path):
    result = invoke(["pressure", "--config", tmp_path / "absent.json"])
    assert result.exit_code == 2
    assert "config" in all_output(result)


def test_invalid_json_exits_two(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    result = invoke(["validate", "--config", path])
    assert result.exit_code == 2
    assert "config" in all_output(result)


def test_validate_requires_experiment_field(tmp_path):
    result = invoke(
        ["validate", "--config", write_cfg(tmp_path, {"family": family_doc(3)})]
    )
    assert result.exit_code == 2
    assert "experiment" in all_output(result)


def test_validate_rejects_unknown_experiment(tmp_path):
    cfg = {"experiment": "frobnicate"}
    result = invoke(["validate", "--config", write_cfg(tmp_path, cfg)])
    assert result.exit_code == 2
    assert "experiment" in all_output(result)


def test_declared_experiment_mismatch_exits_two():
    result = invoke(["entropy-rate", "--config", CONFIG_DIR / "pressure.json"])
    assert result.exit_code == 2
    assert "experiment" in all_output(result)


def test_diagnostics_use_dotted_paths(tmp_path):
    fam = family_doc(3)
    del fam["range"]
    cfg = {"experiment": "pressure", "family": fam}
    result = invoke(["pressure", "--config", write_cfg(tmp_path, cfg, "a.json")])
    assert result.exit_code == 2
    assert "family.range" in all_output(result)

    cfg = {
        "experiment": "simulate",
        "samples": {
            "kind": "langevin",
            "gradient": "quadratic",
            "rho": 1.0,
            "x0": [0.0],
            "dt": 0.001,
        },
    }
    result = invoke(["simulate", "--config", write_cfg(tmp_path, cfg, "b.json")])
    assert result.exit_code == 2
    assert "samples.t_steps" in all_output(result)

    cfg = {
        "experiment": "posterior",
        "family": family_doc(3),
        "observation": {"source": source_doc()},
        "loss": {"range": 1, "table": [[0, 1, 2], [1, 0, 2]]},
        "t": 8,
    }
    result = invoke(["posterior", "--config", write_cfg(tmp_path, cfg, "c.json")])
    assert result.exit_code == 2
    assert "loss.table" in all_output(result)


def test_missing_required_section_exits_two(tmp_path):
    cfg = {
        "experiment": "posterior",
        "family": family_doc(3),
        "observation": {"source": source_doc()},
        "t": 8,
    }
    result = invoke(["posterior", "--config", write_cfg(tmp_path, cfg)])
    assert result.exit_code == 2
    assert "loss" in all_output(result)


def test_depth_and_channel_guards(tmp_path):
    base = {
        "experiment": "variational",
        "family": family_doc(3),
        "observation": {"source": source_doc()},
        "loss": LOSS_DOC,
        "t": 8,
        "m": 1,
    }
    result = invoke(["variational", "--config", write_cfg(tmp_path, base, "m.json")])
    assert result.exit_code == 2
    assert "m:" in all_output(result)

    noisy = dict(base, m=2)
    noisy["observation"] = {
        "source": source_doc(),
        "channel": [[0.8, 0.2], [0.2, 0.8]],
    }
    result = invoke(["variational", "--config", write_cfg(tmp_path, noisy, "ch.json")])
    assert result.exit_code == 2
    assert "observation.channel" in all_output(result)


def test_pressure_run_matches_closed_form(tmp_path):
    thetas = np.linspace(-2.0, 2.0, 5)
    cfg = {"experiment": "pressure", "family": family_doc(5)}
    out = tmp_path / "run"
    result = invoke(["pressure", "--config", write_cfg(tmp_path, cfg), "--out", out])
    assert result.exit_code == 0, all_output(result)
    assert "pressures.csv" in result.output

    header, rows = read_csv(out / "pressures.csv")
    assert header == "theta,pressure"
    assert len(rows) == 5
    for row, theta in zip(rows, thetas):
        assert math.isclose(float(row[0]), theta, abs_tol=1e-15)
        assert math.isclose(float(row[1]), math.log(math.exp(theta) + 1.0), abs_tol=1e-10)

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "complete"
    assert manifest["config_hash"] == config_hash(cfg)
    assert isinstance(manifest["artifact_version"], str)
    assert any(entry.endswith("pressures.csv") for entry in manifest["outputs"])
    assert manifest["stage_seconds"]


def test_entropy_rate_run_matches_library(tmp_path):
    eta_doc = {
        "alphabet": ["0", "1"],
        "order": 1,
        "kernel": {"0": [0.5, 0.5], "1": [0.5, 0.5]},
        "stationary": {"0": 0.5, "1": 0.5},
    }
    mu_doc = {
        "alphabet": ["0", "1"],
        "order": 1,
        "kernel": {"0": [0.9, 0.1], "1": [0.1, 0.9]},
        "stationary": {"0": 0.5, "1": 0.5},
    }
    cfg = {
        "experiment": "entropy-rate",
        "eta": eta_doc,
        "mu": mu_doc,
        "t_values": [1, 10, 1000],
    }
    out = tmp_path / "run"
    result = invoke(["entropy-rate", "--config", write_cfg(tmp_path, cfg), "--out", out])
    assert result.exit_code == 0, all_output(result)

    header, rows = read_csv(out / "entropy_curve.csv")
    assert header == "t,K_t,K_t_over_t"
    expected = finite_horizon_entropy_curve(
        markov_from_json(eta_doc), markov_from_json(mu_doc), cfg["t_values"]
    )
    assert len(rows) == len(expected)
    for row, (t, k_t, rate) in zip(rows, expected):
        assert int(row[0]) == t
        assert math.isclose(float(row[1]), k_t, rel_tol=1e-12)
        assert math.isclose(float(row[2]), rate, rel_tol=1e-12)
    assert math.isclose(float(rows[-1][2]), math.log(5.0 / 3.0), abs_tol=1e-3)


def test_hypermix_run_matches_profile(tmp_path):
    cfg = {
        "experiment": "hypermix",
        "cls": 2.5,
        "ells": {"from_factor": 1.0, "to_factor": 10.0, "count": 7},
    }
    out = tmp_path / "grid"
    result = invoke(["hypermix", "--config", write_cfg(tmp_path, cfg), "--out", out])
    assert result.exit_code == 0, all_output(result)

    header, rows = read_csv(out / "profile.csv")
    assert header == "ell,alpha"
    profile = hypermixing_profile(2.5)
    ells = np.linspace(profile.ell0, 10.0 * profile.ell0, 7)
    assert len(rows) == 7
    for row, ell in zip(rows, ells):
        assert math.isclose(float(row[0]), ell, rel_tol=1e-12)
        assert math.isclose(float(row[1]), profile.alpha(ell), rel_tol=1e-12)

    listed = {
        "experiment": "hypermix",
        "cls": 2.5,
        "ells": [profile.ell0, 2.0 * profile.ell0],
    }
    result = invoke(
        ["hypermix", "--config", write_cfg(tmp_path, listed, "list.json"), "--out", out]
    )
    assert result.exit_code == 0
    _, rows = read_csv(out / "profile.csv")
    assert len(rows) == 2


def partition_cfg(t_values, seed=0, count=5):
    return {
        "experiment": "partition",
        "family": family_doc(count),
        "observation": {"source": source_doc()},
        "loss": LOSS_DOC,
        "t_values": t_values,
        "seed": seed,
    }


def test_partition_run_reruns_and_threads_agree(tmp_path):
    cfg = partition_cfg([16, 64])
    cfg_path = write_cfg(tmp_path, cfg)
    bodies = []
    for label, extra in (("a", []), ("b", []), ("c", ["--threads", "8"])):
        out = tmp_path / label
        result = invoke(["partition", "--config", cfg_path, "--out", out] + extra)
        assert result.exit_code == 0, all_output(result)
        bodies.append((out / "partition.csv").read_bytes())
    assert bodies[0] == bodies[1] == bodies[2]

    header, rows = read_csv(tmp_path / "a" / "partition.csv")
    assert header == "theta,t,log_partition"
    assert len(rows) == 5 * 2

    alpha = Alphabet(("0", "1"))
    loss = LossSpec(alpha, alpha, 1, np.array([[0.0, 1.0], [1.0, 0.0]]))
    y = generate_observation(observation_spec(), 64, 0)
    model = build_gibbs_model(FiniteRangePotential(alpha, 2, -2.0 * np.asarray(SHAPE)))
    expected = log_partition_curve(model, loss, y, [16, 64])
    assert math.isclose(float(rows[0][2]), expected[0], rel_tol=1e-12)
    assert math.isclose(float(rows[1][2]), expected[1], rel_tol=1e-12)


def test_seed_flag_overrides_config_seed(tmp_path):
    cfg_path = write_cfg(tmp_path, partition_cfg([32], seed=0))
    out_default = tmp_path / "default"
    out_flag = tmp_path / "flag"
    out_config = tmp_path / "config5"
    assert invoke(["partition", "--config", cfg_path, "--out", out_default]).exit_code == 0
    assert (
        invoke(
            ["partition", "--config", cfg_path, "--out", out_flag, "--seed", "5"]
        ).exit_code
        == 0
    )
    cfg5_path = write_cfg(tmp_path, partition_cfg([32], seed=5), "cfg5.json")
    assert invoke(["partition", "--config", cfg5_path, "--out", out_config]).exit_code == 0

    default_body = (out_default / "partition.csv").read_bytes()
    flag_body = (out_flag / "partition.csv").read_bytes()
    assert default_body != flag_body
    assert flag_body == (out_config / "partition.csv").read_bytes()

    manifest = json.loads((out_flag / "manifest.json").read_text())
    assert manifest["seeds"] == [5]


def test_posterior_run_weights_normalized(tmp_path):
    cfg = {
        "experiment": "posterior",
        "family": family_doc(9),
        "observation": {"source": source_doc()},
        "loss": LOSS_DOC,
        "t": 64,
        "seed": 0,
    }
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    cfg_path = write_cfg(tmp_path, cfg)
    assert invoke(["posterior", "--config", cfg_path, "--out", out_a]).exit_code == 0
    result = invoke(
        ["posterior", "--config", cfg_path, "--out", out_b, "--threads", "8"]
    )
    assert result.exit_code == 0, all_output(result)
    assert (out_a / "posterior.csv").read_bytes() == (out_b / "posterior.csv").read_bytes()

    header, rows = read_csv(out_a / "posterior.csv")
    assert header == "theta,log_partition,posterior_weight"
    weights = np.array([float(row[2]) for row in rows])
    assert weights.shape == (9,)
    assert np.all(weights >= 0.0)
    assert math.isclose(weights.sum(), 1.0, abs_tol=1e-9)


def test_simulate_markov_reruns_match_library(tmp_path):
    doc = {
        "kind": "markov",
        "alphabet": ["0", "1"],
        "order": 1,
        "kernel": {"0": [0.9, 0.1], "1": [0.1, 0.9]},
        "stationary": {"0": 0.5, "1": 0.5},
    }
    cfg = {
        "experiment": "simulate",
        "samples": {"kind": "markov", "source": doc, "t": 200},
        "seed": 7,
    }
    cfg_path = write_cfg(tmp_path, cfg)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert invoke(["simulate", "--config", cfg_path, "--out", out_a]).exit_code == 0
    assert invoke(["simulate", "--config", cfg_path, "--out", out_b]).exit_code == 0
    body = (out_a / "path.txt").read_bytes()
    assert body == (out_b / "path.txt").read_bytes()

    labels = body.decode().strip().split("\n")
    assert len(labels) == 200
    assert set(labels) <= {"0", "1"}

    spec = ObservedSystemSpec(markov_from_json(doc))
    expected = tmp_path / "expected.txt"
    write_path_text(expected, generate_observation(spec, 200, 7))
    assert body == expected.read_bytes()


def test_simulate_langevin_matches_library(tmp_path):
    cfg = {
        "experiment": "simulate",
        "samples": {
            "kind": "langevin",
            "gradient": "quadratic",
            "rho": 1.0,
            "x0": [0.0],
            "dt": 0.001,
            "t_steps": 50,
        },
        "seed": 11,
    }
    out = tmp_path / "run"
    result = invoke(["simulate", "--config", write_cfg(tmp_path, cfg), "--out", out])
    assert result.exit_code == 0, all_output(result)

    header, rows = read_csv(out / "langevin.csv")
    assert header == "step,x_1"
    assert len(rows) == 51

    spec = LangevinSpec(lambda x: 1.0 * x, 0.001, np.array([0.0]))
    expected = tmp_path / "expected.csv"
    write_langevin_csv(expected, sample_langevin(spec, 50, 11))
    assert (out / "langevin.csv").read_bytes() == expected.read_bytes()


def test_runtime_failure_cleans_partial_outputs(tmp_path):
    cfg = {
        "experiment": "simulate",
        "samples": {
            "kind": "langevin",
            "gradient": "quadratic",
            "rho": -2000.0,
            "x0": [1.0],
            "dt": 0.001,
            "t_steps": 5000,
        },
        "seed": 0,
    }
    out = tmp_path / "run"
    with np.errstate(over="ignore", invalid="ignore"):
        result = invoke(["simulate", "--config", write_cfg(tmp_path, cfg), "--out", out])
    assert result.exit_code == 1
    assert "error:" in all_output(result)
    assert not (out / "langevin.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "failed"


def test_consistency_run_emits_all_tables(tmp_path):
    cfg = {
        "experiment": "consistency",
        "family": family_doc(5),
        "observation": {"source": source_doc()},
        "loss": LOSS_DOC,
        "t_values": [16, 64],
        "m": 2,
        "y_seeds": [0, 1],
        "radius": 0.5,
    }
    out = tmp_path / "run"
    result = invoke(["consistency", "--config", write_cfg(tmp_path, cfg), "--out", out])
    assert result.exit_code == 0, all_output(result)

    header, rows = read_csv(out / "partition.csv")
    assert header == "seed,theta,t,log_partition"
    assert len(rows) == 2 * 5 * 2

    header, rows = read_csv(out / "posterior.csv")
    assert header == "seed,t,theta,posterior_weight"
    assert len(rows) == 2 * 2 * 5

    header, rows = read_csv(out / "variational.csv")
    assert header == "theta,m,V_m,optimality,solver_iters"
    assert len(rows) == 5

    header, rows = read_csv(out / "consistency.csv")
    assert header == "seed,t,mass_outside"
    assert len(rows) == 2 * 2
    for row in rows:
        mass = float(row[2])
        assert 0.0 <= mass <= 1.0

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "complete"
    assert manifest["seeds"] == [0, 1]
