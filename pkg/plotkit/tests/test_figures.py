import shutil
from pathlib import Path

import pytest

from plotkit import (
    FigureSpec,
    SchemaError,
    heatmap_matrix,
    plot_coverage,
    plot_heatmap,
    plot_solutions,
    plot_sweep,
)
from plotkit import schema

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def spec(tmp_path) -> FigureSpec:
    return FigureSpec(
        in_dir=FIXTURES, out_dir=tmp_path, scenario=FIXTURES / "scenario.json"
    )


class TestSolutions:
    def test_renders(self, spec):
        out = plot_solutions(spec)
        assert out.exists() and out.stat().st_size > 0

    def test_empty_solution_set_still_renders_geometry(self, tmp_path, spec):
        stripped = tmp_path / "in"
        stripped.mkdir()
        header = (FIXTURES / "solutions.csv").read_text().splitlines()[0]
        (stripped / "solutions.csv").write_text(header + "\n")
        spec.in_dir = stripped
        spec.out_dir = tmp_path / "out"
        out = plot_solutions(spec)
        assert out.exists()

    def test_marker_count_matches_rows(self, spec, monkeypatch):
        captured = {}
        import plotkit.figures as figs

        real_scatter = figs.plt.Axes.scatter

        def spy(self, x, y, **kw):
            captured["n"] = len(x)
            return real_scatter(self, x, y, **kw)

        monkeypatch.setattr(figs.plt.Axes, "scatter", spy)
        plot_solutions(spec)
        rows = schema.load_solutions(FIXTURES / "solutions.csv")
        level1 = [r for r in rows if r["level"] == 1]
        assert captured["n"] == len(level1)

    def test_missing_column_names_it(self, tmp_path, spec):
        broken = tmp_path / "in"
        broken.mkdir()
        lines = (FIXTURES / "solutions.csv").read_text().splitlines()
        lines[0] = lines[0].replace("min_sinr", "sinr_floor")
        (broken / "solutions.csv").write_text("\n".join(lines))
        spec.in_dir = broken
        with pytest.raises(SchemaError, match="min_sinr"):
            plot_solutions(spec)


class TestHeatmap:
    def test_renders(self, spec):
        out = plot_heatmap(spec)
        assert out.exists() and out.stat().st_size > 0

    def test_matrix_entries_equal_counts(self):
        rows = schema.load_heatmap(FIXTURES / "heatmap.csv")
        for level in sorted({r["level"] for r in rows}):
            matrix, xs, ys, step = heatmap_matrix(rows, level)
            for r in rows:
                if r["level"] == level:
                    assert matrix[ys.index(r["cell_y"]), xs.index(r["cell_x"])] == r["count"]

    def test_single_cluster_single_hot_cell(self, tmp_path, spec):
        single = tmp_path / "in"
        single.mkdir()
        (single / "heatmap.csv").write_text(
            "level,step,cell_x,cell_y,count\n1,2,4,6,11\n"
        )
        spec.in_dir = single
        matrix, xs, ys, step = heatmap_matrix(schema.load_heatmap(single / "heatmap.csv"), 1)
        assert matrix.sum() == 11 and (matrix > 0).sum() == 1
        assert plot_heatmap(spec).exists()

    def test_unknown_level_rejected(self):
        rows = schema.load_heatmap(FIXTURES / "heatmap.csv")
        with pytest.raises(SchemaError):
            heatmap_matrix(rows, 99)


class TestCoverage:
    def test_renders(self, spec):
        out = plot_coverage(spec)
        assert out.exists() and out.stat().st_size > 0

    def test_empty_file_rejected(self, tmp_path, spec):
        empty = tmp_path / "in"
        empty.mkdir()
        (empty / "coverage.csv").write_text("x,y,covered\n")
        spec.in_dir = empty
        with pytest.raises(SchemaError):
            plot_coverage(spec)


class TestSweep:
    def test_renders(self, spec):
        out = plot_sweep(spec)
        assert out.exists() and out.stat().st_size > 0

    def test_single_mode_single_curve(self, tmp_path, spec, monkeypatch):
        one = tmp_path / "in"
        one.mkdir()
        (one / "sweep.csv").write_text(
            "mode,p_max_dbm,avg_wsr\nnone,0,1.5\nnone,10,2.5\n"
        )
        spec.in_dir = one
        curves = _count_curves(spec, monkeypatch)
        assert curves == 1

    def test_three_modes_three_curves_optimal_uppermost(self, spec, monkeypatch):
        assert _count_curves(spec, monkeypatch) == 3
        rows = schema.load_sweep(FIXTURES / "sweep.csv")
        by_power = {}
        for r in rows:
            by_power.setdefault(r["p_max_dbm"], {})[r["mode"]] = r["avg_wsr"]
        for vals in by_power.values():
            assert vals["optimal"] >= max(vals.values()) - 1e-12

    def test_missing_column_names_it(self, tmp_path, spec):
        broken = tmp_path / "in"
        broken.mkdir()
        (broken / "sweep.csv").write_text("mode,power,avg_wsr\nnone,0,1\n")
        spec.in_dir = broken
        with pytest.raises(SchemaError, match="p_max_dbm"):
            plot_sweep(spec)


def _count_curves(spec, monkeypatch) -> int:
    import plotkit.figures as figs

    calls = []
    real_plot = figs.plt.Axes.plot

    def spy(self, *args, **kw):
        if "label" in kw:
            calls.append(kw["label"])
        return real_plot(self, *args, **kw)

    monkeypatch.setattr(figs.plt.Axes, "plot", spy)
    plot_sweep(spec)
    return len(calls)


class TestDeterminismAndPurity:
    def test_rendering_is_deterministic(self, tmp_path):
        a = FigureSpec(in_dir=FIXTURES, out_dir=tmp_path / "a",
                       scenario=FIXTURES / "scenario.json")
        b = FigureSpec(in_dir=FIXTURES, out_dir=tmp_path / "b",
                       scenario=FIXTURES / "scenario.json")
        pa, pb = plot_solutions(a), plot_solutions(b)
        assert pa.read_bytes() == pb.read_bytes()

    def test_inputs_not_mutated(self, tmp_path):
        src = tmp_path / "in"
        shutil.copytree(FIXTURES, src)
        before = {p.name: p.read_bytes() for p in src.iterdir()}
        spec = FigureSpec(in_dir=src, out_dir=tmp_path / "out", scenario=src / "scenario.json")
        plot_solutions(spec)
        plot_heatmap(spec)
        plot_coverage(spec)
        plot_sweep(spec)
        after = {p.name: p.read_bytes() for p in src.iterdir()}
        assert before == after
