"""Render tests against CSVs produced by the market-game CLI."""

import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from mmplots import FigureSpec, RenderError, render
from mmplots.cli import main


def run_primary(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "mmgame", *args], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def datasets(tmp_path_factory):
    """Real CSV outputs from the analysis and training commands."""
    root = tmp_path_factory.mktemp("csvs")
    run_primary("analyze", "--preset", "table1", "--out", str(root / "crossing"))
    run_primary("payoff", "--preset", "figure8", "--out", str(root / "payoff"))
    spec = {
        "name": "smoke",
        "game": {"levels": [0.1, 0.8], "weights": [0.0, 0.0], "sigma": 0.1,
                 "xi": 0.1, "two_sided": True},
        "training": {"temperature": 0.1, "instances": 3, "budget": 3000,
                     "stability_window": None, "snapshot_every": 1000,
                     "last_window": 500, "seed": 11},
    }
    cfg = root / "train.json"
    cfg.write_text(json.dumps(spec))
    run_primary("train", "--config", str(cfg), "--out", str(root / "run_a"))
    spec["training"]["seed"] = 12
    cfg.write_text(json.dumps(spec))
    run_primary("train", "--config", str(cfg), "--out", str(root / "run_b"))
    return root


def spec_for(kind, inputs, out, **kw):
    return FigureSpec(kind=kind, inputs=tuple(Path(p) for p in inputs),
                      output=Path(out), **kw)


class TestRenderKinds:
    def test_crossing_renders_and_marks_csv_roots(self, datasets, tmp_path):
        src = datasets / "crossing" / "crossing.csv"
        result = render(spec_for("crossing", [src], tmp_path / "crossing.png"))
        assert result.output.exists() and result.output.stat().st_size > 0
        with open(src, newline="") as fh:
            rows = list(csv.DictReader(fh))
        csv_roots = tuple(float(r["root_p"]) for r in rows)
        assert result.marked_roots == csv_roots

    def test_q_convergence(self, datasets, tmp_path):
        src = datasets / "run_a" / "snapshots.csv"
        out = render(spec_for("q-convergence", [src], tmp_path / "q.png")).output
        assert out.exists() and out.stat().st_size > 0

    def test_q_convergence_action_subset(self, datasets, tmp_path):
        src = datasets / "run_a" / "snapshots.csv"
        out = render(
            spec_for("q-convergence", [src], tmp_path / "q46.png", actions=(1, 4))
        ).output
        assert out.exists()
        with pytest.raises(RenderError, match="actions"):
            render(spec_for("q-convergence", [src], tmp_path / "no.png", actions=(99,)))

    def test_inventory(self, datasets, tmp_path):
        src = datasets / "run_a" / "series.csv"
        out = render(spec_for("inventory", [src], tmp_path / "inv.png")).output
        assert out.exists() and out.stat().st_size > 0

    def test_histogram_two_runs(self, datasets, tmp_path):
        srcs = [datasets / "run_a" / "action_freq.csv",
                datasets / "run_b" / "action_freq.csv"]
        out = render(
            spec_for("histogram", srcs, tmp_path / "freq.png",
                     labels=("stateless", "memory"))
        ).output
        assert out.exists() and out.stat().st_size > 0
        with pytest.raises(RenderError, match="label"):
            render(spec_for("histogram", srcs, tmp_path / "bad.png", labels=("one",)))

    def test_payoff_heatmap(self, datasets, tmp_path):
        src = datasets / "payoff" / "tensor.csv"
        out = render(spec_for("payoff-heatmap", [src], tmp_path / "pay.png")).output
        assert out.exists() and out.stat().st_size > 0


class TestContracts:
    def test_identical_inputs_identical_bytes(self, datasets, tmp_path):
        src = datasets / "crossing" / "crossing.csv"
        a = render(spec_for("crossing", [src], tmp_path / "a.png")).output
        b = render(spec_for("crossing", [src], tmp_path / "b.png")).output
        assert a.read_bytes() == b.read_bytes()

    def test_missing_column_is_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("temperature,slope,root_p\n0.1,3.5,0.05\n")
        with pytest.raises(RenderError, match="intercept"):
            render(spec_for("crossing", [bad], tmp_path / "x.png"))
        assert not (tmp_path / "x.png").exists()

    def test_empty_data_is_an_error(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("instance,period,agent,action,q_value\n")
        with pytest.raises(RenderError, match="no data"):
            render(spec_for("q-convergence", [empty], tmp_path / "y.png"))
        assert not (tmp_path / "y.png").exists()

    def test_missing_file_is_an_error(self, tmp_path):
        with pytest.raises(RenderError, match="not found"):
            render(spec_for("inventory", [tmp_path / "nope.csv"], tmp_path / "z.png"))

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(RenderError, match="kind"):
            FigureSpec(kind="pie", inputs=(tmp_path / "a.csv",), output=tmp_path / "p.png")


class TestCli:
    def test_end_to_end(self, datasets, tmp_path, capsys):
        out = tmp_path / "cli.png"
        code = main(["crossing", "--in", str(datasets / "crossing" / "crossing.csv"),
                     "--out", str(out)])
        assert code == 0
        assert out.exists()
        assert str(out) in capsys.readouterr().out

    def test_cli_error_exit(self, tmp_path, capsys):
        code = main(["inventory", "--in", str(tmp_path / "missing.csv"),
                     "--out", str(tmp_path / "o.png")])
        assert code == 1
        assert "not found" in capsys.readouterr().err

    def test_histogram_with_labels(self, datasets, tmp_path):
        code = main(["histogram",
                     "--in", str(datasets / "run_a" / "action_freq.csv"),
                     str(datasets / "run_b" / "action_freq.csv"),
                     "--label", "run a", "--label", "run b",
                     "--out", str(tmp_path / "h.png"), "--title", "action mix"])
        assert code == 0
