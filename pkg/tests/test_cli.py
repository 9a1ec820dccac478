import csv
import json
import math
import subprocess
import sys

import pytest

from qphase import cli
from qphase.output import config_hash


def _run(tmp_path, *args):
    return cli.main(list(args) + ["--out", str(tmp_path)])


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_dist_outputs_and_manifest(tmp_path):
    assert _run(tmp_path, "dist", "--nbar", "2", "--M", "256") == 0
    rows = _rows(tmp_path / "dist.csv")
    assert rows[0][:2] == ["theta", "P_pb"] and len(rows) == 257
    man = json.loads((tmp_path / "manifest.json").read_text())
    for key in ("command", "config", "config_sha256", "git_describe", "package_version", "numpy_version",
                "tolerances", "outputs"):
        assert key in man
    assert man["command"] == "dist" and "dist.csv" in man["outputs"]
    cfg = {k: v for k, v in man["config"].items() if k != "out"}
    assert man["config_sha256"] == config_hash(cfg)


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(a, "tmsv", "--r-list", "0.5,1") == 0
    assert _run(b, "tmsv", "--r-list", "0.5,1") == 0
    assert (a / "tmsv.csv").read_bytes() == (b / "tmsv.csv").read_bytes()
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma["config_sha256"] == mb["config_sha256"]


def test_tmsv_csv_matches_closed_form(tmp_path):
    assert _run(tmp_path, "tmsv", "--r-list", "1") == 0
    header, row = _rows(tmp_path / "tmsv.csv")[:2]
    rec = dict(zip(header, map(float, row)))
    assert rec["C12"] == pytest.approx(rec["C12_closed"], abs=1e-9)


def test_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nbar": 1.0, "M": 128, "formalisms": "pb"}))
    out = tmp_path / "out"
    assert cli.main(["dist", "--nbar", "9", "--config", str(cfg), "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["config"]["nbar"] == 1.0
    assert len(_rows(out / "dist.csv")) == 129


@pytest.mark.parametrize("doc", [{"nbar": "two"}, {"bogus": 1}, {"M": 1.5}])
def test_schema_rejections_exit_2(tmp_path, doc):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(doc))
    assert cli.main(["dist", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_bad_json_exit_2(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{nope")
    assert cli.main(["dist", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_bad_formalism_exit_2(tmp_path):
    assert _run(tmp_path, "dist", "--formalisms", "pb,q7") == 2


def test_unknown_state_exit_2(tmp_path):
    assert _run(tmp_path, "dist", "--state", "vortex") == 2


def test_coarse_grid_exit_3(tmp_path):
    assert _run(tmp_path, "dist", "--nbar", "40", "--M", "64") == 3
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["summary"]["warnings"]


def test_gw_job(tmp_path):
    assert _run(tmp_path, "gw", "--M", "256") == 0
    header, *rows = _rows(tmp_path / "gw.csv")
    assert header == ["theta", "P_gw", "P_pb"]
    p = [float(r[1]) for r in rows]
    assert sum(p) * 2 * math.pi / len(p) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("cmd", [
    ["jcm", "--nbar", "9", "--tmax", "0.5", "--dt", "0.05"],
    ["kerr1", "--steps", "20", "--M", "256"],
    ["kerr2", "--steps", "10"],
    ["paircoh", "--zeta-list", "1"],
    ["shg", "--gt-list", "0.5", "--tmax", "0.5", "--dt", "0.25", "--M", "32"],
    ["pdc", "--gt-list", "0.3", "--tmax", "0.3", "--dt", "0.15", "--M", "128"],
    ["fdcoh", "--nbar-list", "1", "--sigma-list", "1,2"],
    ["cat", "--M", "256"],
    ["squeezed", "--r-list", "0.5", "--M", "256"],
])
def test_other_jobs_succeed(tmp_path, cmd):
    assert _run(tmp_path, *cmd) == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    for name in man["outputs"]:
        assert (tmp_path / name).exists()


def test_selftest_passes_and_detects_mutation(capsys):
    assert cli.main(["selftest", "--only", "specfun"]) == 0
    assert cli.main(["selftest", "--only", "specfun", "--mutate", "dilog"]) == 3
    out = capsys.readouterr().out
    assert "FAIL" in out and "passed" in out


def test_selftest_unknown_mutation():
    assert cli.main(["selftest", "--mutate", "gravity"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qphase", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "selftest" in res.stdout


def test_missing_command_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2
