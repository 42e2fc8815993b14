import json
import subprocess
import sys

import pytest

from sdebye import cli

RUN = {
    "scenario": "Run",
    "grid": {"kind": "radial", "dimension": 3, "extent": 10.0, "points": 256},
    "debye": {"mu": 0.1, "lambda": -1},
    "time": {"dt": 0.01, "t_end": 0.2, "diag_every": 2},
    "hs_orders": [1, 2],
    "data": {"family": "gaussian", "amplitude": 0.5},
}


@pytest.fixture
def run_cfg(tmp_path):
    p = tmp_path / "run.json"
    p.write_text(json.dumps(RUN))
    return p


def test_run_ok(run_cfg, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(run_cfg), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["provenance.txt", "records.csv", "summary.json"]
    s = json.loads((out / "summary.json").read_text())
    assert s["schema"] == 1 and s["outcome"] == "Completed"
    head = (out / "records.csv").read_text().splitlines()[0]
    assert "hs_1,hs_2" in head


def test_missing_config_is_io_error(tmp_path, capsys):
    rc = cli.main(["run", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "o")])
    assert rc == cli.EXIT_IO
    assert "I/O error" in capsys.readouterr().err


def test_invalid_json_is_config_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG


def test_wrong_command_is_config_error(run_cfg, tmp_path):
    assert cli.main(["sweep", "--config", str(run_cfg), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG


def test_output_path_is_file(run_cfg, tmp_path):
    f = tmp_path / "occupied"
    f.write_text("")
    assert cli.main(["run", "--config", str(run_cfg), "--out", str(f)]) == cli.EXIT_IO


def test_refused_gwp_exits_nonzero(tmp_path):
    raw = dict(RUN, scenario="GwpTrap3D", data={"family": "gaussian", "amplitude": 3.0})
    p = tmp_path / "g.json"
    p.write_text(json.dumps(raw))
    out = tmp_path / "o"
    assert cli.main(["gwp-trap", "--config", str(p), "--out", str(out)]) == cli.EXIT_CONFIG
    assert json.loads((out / "summary.json").read_text())["refused"]


def test_regions_inline(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["regions", "--out", str(out), "--n", "2", "--s", "1", "--kappa", "0"]) == 0
    s = json.loads((out / "summary.json").read_text())
    assert s["points"] == [{"n": 2, "s": 1.0, "kappa": 0.0, "inside": True}]
    assert cli.main(["regions", "--out", str(out), "--n", "2"]) == cli.EXIT_CONFIG
    assert cli.main(["regions", "--out", str(out)]) == cli.EXIT_CONFIG


def test_argparse_requires_config(tmp_path):
    with pytest.raises(SystemExit) as e:
        cli.main(["run", "--out", str(tmp_path)])
    assert e.value.code != 0


def test_byte_identical_reruns(run_cfg, tmp_path):
    for sub in ("a", "b"):
        assert cli.main(["run", "--config", str(run_cfg), "--out", str(tmp_path / sub)]) == 0
    for name in ("records.csv", "summary.json", "provenance.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_module_entry_point(tmp_path):
    out = tmp_path / "o"
    r = subprocess.run([sys.executable, "-m", "sdebye", "regions", "--out", str(out),
                        "--n", "4", "--s", "1", "--kappa", "1"], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (out / "regions.csv").read_bytes() == b"n,s,kappa,inside\r\n4,1,1,1\r\n"
