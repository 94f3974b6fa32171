import csv
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from safe_mppi.cli import EXIT_ERROR, EXIT_INCOMPLETE, EXIT_OK, SWEEP_HEADER, main

SVG = "{http://www.w3.org/2000/svg}"

QUICK = """
[scenario]
base = "single_obstacle"
target = [0.8, 0.0]
max_steps = {max_steps}

[controller]
horizon = 8
samples = 24
"""


@pytest.fixture
def quick(tmp_path):
    def make(max_steps=80):
        path = tmp_path / f"quick{max_steps}.toml"
        path.write_text(QUICK.format(max_steps=max_steps))
        return str(path)

    return make


def _csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_success_writes_outputs(quick, tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--config", quick(), "--variant", "trust_region", "--out", str(out)]) == EXIT_OK
    assert {p.name for p in out.iterdir()} == {"episode.csv", "snapshot.csv", "trajectory.svg", "summary.jsonl"}


def test_run_incomplete_exit_code(quick, tmp_path):
    assert main(["run", "--config", quick(max_steps=1), "--out", str(tmp_path / "r")]) == EXIT_INCOMPLETE


def test_unknown_scenario_names_it(tmp_path, capsys):
    assert main(["run", "--scenario", "moon_base", "--out", str(tmp_path / "r")]) == EXIT_ERROR
    assert "moon_base" in capsys.readouterr().err


def test_missing_config_is_error(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "none.toml"), "--out", str(tmp_path / "r")]) == EXIT_ERROR
    assert "none.toml" in capsys.readouterr().err


def test_unwritable_output_is_error(quick, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "--config", quick(), "--out", str(blocker / "sub")]) == EXIT_ERROR


@pytest.mark.parametrize("workers", ["2", "3"])
def test_worker_count_gives_identical_bytes(quick, tmp_path, workers):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["run", "--config", quick(), "--variant", "trust_region", "--seed", "5"]
    main(args + ["--workers", "1", "--out", str(a)])
    main(args + ["--workers", workers, "--out", str(b)])
    for name in ("episode.csv", "snapshot.csv", "trajectory.svg", "summary.jsonl"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_sweep_single_cell(quick, tmp_path):
    out = tmp_path / "s"
    assert main(["sweep", "--config", quick(), "--samples", "50", "--seeds", "1", "--out", str(out)]) == EXIT_OK
    rows = _csv(out / "sweep.csv")
    assert rows[0] == SWEEP_HEADER and len(rows) == 2
    assert rows[1][1] == "50"


def test_sweep_grid(quick, tmp_path):
    out = tmp_path / "s"
    assert main(["sweep", "--config", quick(), "--samples", "8,16", "--seeds", "2", "--seed", "4", "--out", str(out)]) == 0
    rows = _csv(out / "sweep.csv")[1:]
    assert [(r[1], r[2]) for r in rows] == [("8", "4"), ("8", "5"), ("16", "4"), ("16", "5")]
    assert len(_csv(out / "sweep_mean.csv")) == 3


def test_compare_columns_and_cost_graphic(quick, tmp_path):
    out = tmp_path / "c"
    assert main(["compare", "--config", quick(), "--variants", "mppi,trust_region,mppi", "--seeds", "2", "--out", str(out)]) == 0
    rows = _csv(out / "compare.csv")
    header = rows[0]
    assert header[0] == "seed"
    assert "mppi_steps" in header and "trust_region_steps" in header and "mppi_2_steps" in header
    assert len(rows) == 3
    root = ET.parse(out / "cost.svg").getroot()
    ids = [g.get("id") for g in root.iter(f"{SVG}g") if (g.get("id") or "").startswith("cost-")]
    assert sorted(ids) == ["cost-mppi", "cost-mppi_2", "cost-trust_region"]


def test_compare_needs_two_variants(quick, tmp_path):
    assert main(["compare", "--config", quick(), "--variants", "mppi", "--out", str(tmp_path / "c")]) == EXIT_ERROR


@pytest.mark.parametrize("kind", ["trajectory", "samples", "cost"])
def test_plot_from_run_dir(quick, tmp_path, kind):
    run = tmp_path / "run"
    main(["run", "--config", quick(), "--out", str(run)])
    target = tmp_path / f"{kind}.svg"
    assert main(["plot", "--run", str(run), "--kind", kind, "--out", str(target)]) == EXIT_OK
    assert ET.parse(target).getroot().tag == f"{SVG}svg"


def test_plot_missing_run_dir(tmp_path, capsys):
    assert main(["plot", "--run", str(tmp_path / "nothing"), "--out", str(tmp_path / "x.svg")]) == EXIT_ERROR
    assert "episode.csv" in capsys.readouterr().err


@pytest.mark.parametrize("cmd", [[], ["run"], ["sweep"], ["compare"], ["plot"]])
def test_help_exits_zero(cmd):
    with pytest.raises(SystemExit) as exc:
        main(cmd + ["--help"])
    assert exc.value.code == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--bogus", "--out", "x"],
        ["run", "--variant", "turbo", "--out", "x"],
        ["sweep", "--samples", "ten", "--out", "x"],
        ["frobnicate"],
    ],
)
def test_bad_usage_exits_nonzero(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == EXIT_ERROR


def test_console_entry_point(quick, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "safe_mppi.cli", "run", "--config", quick(max_steps=1), "--out", str(tmp_path / "r")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == EXIT_INCOMPLETE
