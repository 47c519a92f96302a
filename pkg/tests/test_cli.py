import subprocess
import sys

import numpy as np
import pytest

from clipcpd.cli import main
from clipcpd.streams import write_stream_csv


def test_simulate_is_deterministic(tmp_path):
    args = ["simulate", "--scenario", "gauss-d1-D1", "--g", "1", "--replicates", "2", "--seed", "5"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("metrics.csv", "detections.csv", "summary.csv"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes()
        lines = a.decode().splitlines()
        assert lines[0].startswith("# config: ")
    metrics = (tmp_path / "a" / "metrics.csv").read_text().splitlines()
    assert metrics[1] == "seed,num_detections,num_false,regret,delay"
    assert [ln.split(",")[0] for ln in metrics[2:]] == ["5", "6"]


def test_parallel_matches_serial(tmp_path):
    args = ["simulate", "--scenario", "pareto-d1-D05", "--g", "1", "--replicates", "3"]
    assert main(args + ["--out", str(tmp_path / "s")]) == 0
    assert main(args + ["--jobs", "2", "--out", str(tmp_path / "p")]) == 0
    for name in ("metrics.csv", "detections.csv", "summary.csv"):
        assert (tmp_path / "s" / name).read_bytes() == (tmp_path / "p" / name).read_bytes().replace(
            b'"jobs": 2', b'"jobs": 1'
        )


def test_unknown_scenario_lists_catalog(tmp_path, capsys):
    rc = main(["simulate", "--scenario", "foo", "--g", "1", "--out", str(tmp_path)])
    assert rc == 1
    err = capsys.readouterr().err
    assert "foo" in err and "gauss-d1-D1" in err and "bern-a" in err


def test_missing_g_is_usage_error(tmp_path, capsys):
    rc = main(["simulate", "--scenario", "gauss-d1-D1", "--out", str(tmp_path)])
    assert rc == 1
    assert "--g" in capsys.readouterr().err


def test_bad_flag_exits_1():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--bogus"])
    assert exc.value.code == 1


def test_detect_constant_stream_writes_header_only(tmp_path):
    src = tmp_path / "c.csv"
    write_stream_csv(src, np.full((300, 2), 0.25))
    out = tmp_path / "d.csv"
    assert main(["detect", str(src), "--g", "1", "--dim", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1:] == ["time,segment_start,loc_lo,loc_hi,witness_split"]


def test_detect_finds_change(tmp_path):
    rng = np.random.default_rng(0)
    src = tmp_path / "s.csv"
    write_stream_csv(src, np.r_[rng.standard_normal(300), 3 + rng.standard_normal(300)][:, None])
    out = tmp_path / "d.csv"
    assert main(["detect", str(src), "--g", "1", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()[2:]
    assert len(rows) == 1
    t, r, lo, hi, w = map(int, rows[0].split(","))
    assert 300 <= t < 600 and r == 0 and lo <= w <= hi


def test_detect_dimension_mismatch_is_data_error(tmp_path, capsys):
    src = tmp_path / "s.csv"
    write_stream_csv(src, np.zeros((10, 2)))
    assert main(["detect", str(src), "--g", "1", "--dim", "3"]) == 2
    assert "dimension" in capsys.readouterr().err


def test_detect_well_log_parse_error(tmp_path, capsys):
    src = tmp_path / "w.txt"
    src.write_text("60000\n61000\nbad\n")
    assert main(["detect", str(src), "--well-log", "--g", "10"]) == 2
    assert ":3:" in capsys.readouterr().err
    assert main(["detect", str(tmp_path / "missing.txt"), "--well-log", "--g", "10"]) == 2


def test_delay_heatmap_single_cell(tmp_path):
    out = tmp_path / "h.csv"
    rc = main(["delay-heatmap", "--g", "1", "--n-grid", "1000", "--jump-grid", "10", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1:] == ["n,10.0", "1000,1"]


def test_delay_heatmap_stdout(capsys):
    assert main(["delay-heatmap", "--g", "1", "--n-grid", "100", "--jump-grid", "0.5,10"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "n,0.5,10.0"
    assert lines[2].startswith("100,,")


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("scenario: gauss-d1-D05\ng_diam: 1.0\nreplicates: 1\ndelta: 0.2\n")
    assert main(["simulate", "--config", str(cfg), "--delta", "0.05", "--out", str(tmp_path / "o")]) == 0
    head = (tmp_path / "o" / "summary.csv").read_text().splitlines()[0]
    assert '"delta": 0.05' in head and '"replicates": 1' in head
    assert '"name": "gauss-d1-D05"' in head


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("g_diam: 1\nwat: 3\n")
    assert main(["simulate", "--config", str(cfg), "--scenario", "gauss-d1-D1", "--out", str(tmp_path)]) == 1
    assert "wat" in capsys.readouterr().err


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 10
    assert out[0].split("\t")[0] == "pareto-d1-D05"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "clipcpd", "list-scenarios"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and "bern-b" in proc.stdout
