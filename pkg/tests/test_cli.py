import csv
import io
import json
import subprocess
import sys

import pytest

from dprshare.cli import EXIT_EXEC, EXIT_LOAD, EXIT_OK, EXIT_USAGE, main
from dprshare.report import import_timeline
from dprshare.scenario import fixture_text


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_table(capsys):
    code, out, _ = run(capsys, "check", "--scenario", "fig8a")
    assert code == EXIT_OK
    assert "feasible" in out and "yes" in out
    assert "lower_tight_ms" not in out


def test_check_staggered_reports_the_tight_bound(capsys):
    code, out, _ = run(capsys, "check", "--scenario", "fig3", "--format", "ndjson")
    assert code == EXIT_OK
    recs = [json.loads(x) for x in out.splitlines()]
    assert all("lower_tight_ms" in r for r in recs[:-1])
    assert recs[-1]["feasible"] is True and recs[-1]["mode"] == "staggered"


def test_overrides_change_the_verdict(capsys):
    _, out, _ = run(capsys, "check", "--scenario", "fig8b", "--s", "1", "--format", "csv")
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["feasible"] == "False" and row["s"] == "1"
    _, out, _ = run(capsys, "check", "--scenario", "fig8b", "--format", "csv")
    assert next(csv.DictReader(io.StringIO(out)))["fps"] == "30.0"


def test_simulate_formats(capsys):
    for fmt in ("table", "csv", "ndjson"):
        code, out, _ = run(capsys, "simulate", "--scenario", "fig8a", "--format", fmt)
        assert code == EXIT_OK and out
    recs = [json.loads(x) for x in out.splitlines()]
    assert recs[-1]["glitches"] == 0 and recs[-1]["agree"] is True
    assert {r["fps"] for r in recs[:-1]} == {60.0}


def test_simulate_mode_and_rounds(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", "fig8a", "--mode", "staggered", "--rounds", "2", "--format", "ndjson")
    assert code == EXIT_OK
    summary = json.loads(out.splitlines()[-1])
    assert summary["mode"] == "staggered" and summary["rounds"] == 2


def test_plan(capsys):
    code, out, _ = run(capsys, "plan", "--scenario", "fig4")
    assert code == EXIT_OK
    assert "exact=True" in out
    assert "steady" in out and "warmup" in out


def test_sweep_table_and_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--scenario", "fig8a", "--g-values", "1", "--reconfigs", "1,2")
    assert code == EXIT_OK
    assert out.splitlines()[0].split()[:3] == ["resolution", "pipelines", "reconfigs"]
    dest = tmp_path / "grid.csv"
    code, out, _ = run(capsys, "sweep", "--scenario", "fig8a", "--format", "csv", "--jobs", "2", "-o", str(dest))
    assert code == EXIT_OK and out == ""
    rows = list(csv.DictReader(dest.open()))
    assert len(rows) == 6 * 3 * 4


def test_sweep_cell_error_exits_1(capsys):
    code, _, err = run(capsys, "sweep", "--scenario", "fig8a", "--reconfigs", "7", "--g", "1", "--s", "1")
    assert code == EXIT_EXEC
    assert "cell error" in err


def test_sweep_cap_is_a_usage_error(capsys):
    code, _, err = run(capsys, "sweep", "--scenario", "fig8a", "--max-cells", "5")
    assert code == EXIT_USAGE
    assert "cap" in err


def test_render_styles(capsys):
    code, out, _ = run(capsys, "render", "--scenario", "fig3", "--width", "60")
    assert code == EXIT_OK and out.startswith("mode=staggered")
    code, out, _ = run(capsys, "render", "--scenario", "fig3", "--style", "ndjson")
    assert code == EXIT_OK
    assert import_timeline(out).pipeline_ids == ["A", "B"]
    code, out, _ = run(capsys, "render", "--scenario", "fig3", "--style", "structured")
    assert code == EXIT_OK and all("lane" in json.loads(x) for x in out.splitlines())


def test_seed_scenarios_are_reproducible(capsys):
    _, a, _ = run(capsys, "simulate", "--seed", "11", "--format", "ndjson")
    _, b, _ = run(capsys, "simulate", "--seed", "11", "--format", "ndjson")
    assert a == b and a


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["check", "--scenario", "fig3", "--g", "0"],
        ["check", "--scenario", "fig3", "--seed", "1"],
        ["check", "--scenario", "fig3", "--mode", "fast"],
        ["sweep", "--scenario", "fig3", "--resolutions", "4k"],
        ["sweep", "--scenario", "fig3", "--g-values", "a,b"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == EXIT_USAGE


def test_help_exits_0(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == EXIT_OK and "sweep" in out


def test_load_errors_exit_3(capsys, tmp_path):
    code, _, err = run(capsys, "check", "--scenario", str(tmp_path / "missing.json"))
    assert code == EXIT_LOAD
    bad = tmp_path / "bad.json"
    doc = json.loads(fixture_text("fig3"))
    doc["pipelines"][0]["stages"][0] = "nope"
    bad.write_text(json.dumps(doc))
    code, _, err = run(capsys, "simulate", "--scenario", str(bad))
    assert code == EXIT_LOAD and "nope" in err
    code, _, _ = run(capsys, "check")
    assert code == EXIT_LOAD


def test_execution_error_exits_1(capsys, tmp_path):
    # with camera and display holding both DMA engines, no decoupling FIFO fits
    doc = json.loads(fixture_text("fig3"))
    doc["platform"]["dma_engines"] = 2
    path = tmp_path / "tight.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "simulate", "--scenario", str(path))
    assert code == EXIT_EXEC
    assert "TopologyError" in err


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "dprshare", "check", "--scenario", "fig8a", "--format", "csv"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0
    assert "feasible" in res.stdout
