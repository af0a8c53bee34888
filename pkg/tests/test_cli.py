import csv
import json
import math
import os
import subprocess
import sys

import pytest
import yaml

from shadowlab.cli import main, orbit_seeds
from shadowlab.config import ExperimentConfig, config_from_dict, load_config
from shadowlab.errors import ConfigError

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

SMALL_LOGISTIC = {
    "seed": 11,
    "map": {"family": "logistic", "params": [4.0]},
    "orbit": {"N": 20000, "count": 2},
    "lyapunov": {"window": 5000},
    "shadowing": {"epsilon": 0.2, "L": 1, "disjoint_window": 2000},
    "entropy": {"epsilon_schedule": [0.2, 0.1], "n_schedule": [6, 7, 8, 9],
                "katok_n": [4, 5, 6, 7], "sequence_lengths": [5000, 10000]},
    "types": {"n": [4, 20], "L": [2, 8]},
}


def write_cfg(tmp_path, data, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- config -----------------------------------------------------------------------

def test_shipped_configs_load():
    for name in ("logistic.yaml", "doubling.yaml"):
        cfg = load_config(os.path.join(ROOT, "configs", name))
        assert isinstance(cfg, ExperimentConfig)
        cfg.build_map()


def test_config_round_trip(tmp_path):
    cfg = config_from_dict(SMALL_LOGISTIC)
    path = tmp_path / "dump.yaml"
    path.write_text(cfg.dump())
    again = load_config(str(path))
    assert again == cfg
    assert again.digest() == cfg.digest()


def test_defaults_fill_missing_sections():
    cfg = config_from_dict({"map": {"family": "logistic"}})
    assert cfg.seed == 0 and cfg.orbit.count == 1 and cfg.shadowing.delta == "auto"


def test_bad_value_reports_path_and_line(tmp_path):
    text = "seed: 1\nmap:\n  family: logistic\norbit:\n  N: -5\n"
    path = tmp_path / "bad.yaml"
    path.write_text(text)
    with pytest.raises(ConfigError) as err:
        load_config(str(path))
    assert "orbit.N" in str(err.value) and "line 5" in str(err.value)


def test_orbit_seeds_are_stable():
    assert orbit_seeds(5, 3) == orbit_seeds(5, 3)
    assert orbit_seeds(5, 3)[:2] != orbit_seeds(6, 3)[:2]
    assert len(set(orbit_seeds(1, 50))) == 50


# -- exit codes --------------------------------------------------------------------

@pytest.mark.parametrize("patch, code", [
    ({"orbit": {"N": -1}}, 2),
    ({"orbit": {"speed": 3}}, 2),
    ({"map": {"family": "tent"}}, 2),
    ({"shadowing": {"epsilon": 0.3, "L": 1}}, 3),
])
def test_exit_codes(tmp_path, patch, code, capsys):
    data = json.loads(json.dumps(SMALL_LOGISTIC))
    for k, v in patch.items():
        data[k] = {**data.get(k, {}), **v}
    rc = main(["shadowing", "--config", write_cfg(tmp_path, data), "--out", str(tmp_path / "o")])
    assert rc == code
    assert capsys.readouterr().err


def test_gap_needs_L4(tmp_path, capsys):
    data = {**SMALL_LOGISTIC, "entropy": {**SMALL_LOGISTIC["entropy"], "L": 3}}
    rc = main(["gap", "--config", write_cfg(tmp_path, data), "--out", str(tmp_path / "o")])
    assert rc == 3
    assert "type-counting" in capsys.readouterr().err


def test_malformed_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("map: [unclosed\n")
    assert main(["types", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


# -- commands ------------------------------------------------------------------------

def test_types_command(tmp_path):
    out = tmp_path / "o"
    data = {**SMALL_LOGISTIC, "types": {"n": [4], "L": [2]}}
    assert main(["types", "--config", write_cfg(tmp_path, data), "--out", str(out)]) == 0
    rows = read_csv(out / "types.csv")
    assert rows == [{"n": "4", "L": "2", "count": "8", "log_rate": repr(math.log(8) / 4)}]
    manifest = json.loads((out / "manifest_types.json").read_text())
    assert manifest["outputs"] == ["types.csv"]


def test_doubling_lyapunov_and_shadowing(tmp_path):
    data = {"seed": 3, "map": {"family": "doubling", "params": [2]},
            "orbit": {"N": 4000, "count": 2, "precision": "auto"},
            "lyapunov": {"window": 1000}, "shadowing": {"epsilon": 0.2, "L": 2}}
    cfg = write_cfg(tmp_path, data)
    out = tmp_path / "o"
    assert main(["lyapunov", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out / "lyapunov.csv")
    assert len(rows) == 8
    assert all(float(r["lyapunov"]) == math.log(2) for r in rows)
    assert main(["shadowing", "--config", cfg, "--out", str(out)]) == 0
    dec = json.loads((out / "decomposition.json").read_text())
    assert all(o["psi_list"] == [] and o["intervals"] == [] for o in dec["orbits"])
    summary = json.loads((out / "lemma_summary.json").read_text())
    assert summary["all_passed"] and summary["psi_count"] == [0, 0]


def test_logistic_shadowing_outputs(tmp_path):
    out = tmp_path / "o"
    assert main(["shadowing", "--config", write_cfg(tmp_path, SMALL_LOGISTIC),
                 "--out", str(out)]) == 0
    summary = json.loads((out / "lemma_summary.json").read_text())
    assert summary["all_passed"]
    assert summary["params"]["delta"] == 2.0**-5
    cov = read_csv(out / "coverage.csv")
    assert {r["orbit"] for r in cov} == {"0", "1"}
    assert list(cov[0])[:4] == ["orbit", "n", "covered", "target"]


def test_gap_outputs(tmp_path):
    out = tmp_path / "o"
    assert main(["gap", "--config", write_cfg(tmp_path, SMALL_LOGISTIC), "--out", str(out)]) == 0
    rep = json.loads((out / "gap_report.json").read_text())
    assert rep["violations"] == 0
    assert 0.5 < rep["h_top_est"] < 0.8
    assert rep["rhs_main"] <= rep["h_top_est"]
    fit = read_csv(out / "entropy_fit.csv")
    assert len(fit) == 8 and set(fit[0]) == {"epsilon", "n", "r", "log_r"}


def test_determinism_across_workers(tmp_path):
    cfg = write_cfg(tmp_path, SMALL_LOGISTIC)
    outs = []
    for w in (1, 2):
        out = tmp_path / f"w{w}"
        assert main(["all", "--config", cfg, "--out", str(out), "--workers", str(w)]) == 0
        outs.append(out)
    names = sorted(p.name for p in outs[0].iterdir() if not p.name.startswith("manifest_"))
    assert names == sorted(p.name for p in outs[1].iterdir()
                           if not p.name.startswith("manifest_"))
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_console_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, {**SMALL_LOGISTIC, "types": {"n": [4], "L": [2]}})
    res = subprocess.run([sys.executable, "-m", "shadowlab.cli", "types", "--config", cfg,
                          "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.strip().endswith("types.csv")
