import json
import re
import subprocess
import sys

import numpy as np
import pytest

from graphpyramid import io
from graphpyramid.cli import main
from graphpyramid.graph import random_geometric
from graphpyramid.signals import fiedler_sign, poly2_patch, synthetic_signal


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture
def geo_file(tmp_path):
    path = tmp_path / "g.tsv"
    assert run("generate", "random-geometric", "--n", 150, "--radius", 0.17, "--seed", 7, "--out", path) == 0
    return path


class TestGenerate:
    def test_path(self, tmp_path):
        assert run("generate", "path", "--n", 8, "--out", tmp_path / "p.tsv") == 0
        g = io.read_graph(tmp_path / "p.tsv")
        assert g.n == 8 and g.num_edges == 7

    def test_ring(self, tmp_path):
        assert run("generate", "ring", "--n", 16, "--out", tmp_path / "r.tsv") == 0
        assert io.read_graph(tmp_path / "r.tsv").num_edges == 16

    def test_stdout(self, capsys):
        assert run("generate", "grid", "--rows", 2, "--cols", 2) == 0
        assert capsys.readouterr().out.startswith("#pyra-graph n=4\n")

    def test_geometric_deterministic(self, tmp_path):
        for name in ("a", "b"):
            run("generate", "random-geometric", "--n", 200, "--radius", 0.15, "--seed", 7, "--out", tmp_path / name)
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()

    @pytest.mark.parametrize("args", [
        ["generate", "grid", "--rows", "3"],
        ["generate", "ring", "--n", "2"],
        ["generate", "k-rbg", "--k", "3", "--n", "7"],
        ["generate", "moebius"],
        ["frobnicate"],
        [],
    ])
    def test_usage_errors(self, args):
        assert main(args) == 2


class TestDownsampleReduce:
    def test_p8_mask(self, tmp_path):
        run("generate", "path", "--n", 8, "--out", tmp_path / "p.tsv")
        assert run("downsample", "--graph", tmp_path / "p.tsv", "--out", tmp_path / "m.txt", "--quiet") == 0
        keep = io.read_mask(tmp_path / "m.txt", 8).keep
        assert np.all(keep[:-1] != keep[1:])

    def test_reduce_p5(self, tmp_path):
        run("generate", "path", "--n", 5, "--out", tmp_path / "p.tsv")
        (tmp_path / "m.txt").write_text("1\n0\n1\n0\n1\n")
        assert run("reduce", "--graph", tmp_path / "p.tsv", "--mask", tmp_path / "m.txt",
                   "--out", tmp_path / "r.tsv") == 0
        text = (tmp_path / "r.tsv").read_text()
        assert "#repaired" not in text
        edges = io.read_graph(tmp_path / "r.tsv").edge_list()
        assert [e[:2] for e in edges] == [(0, 1), (1, 2)]
        np.testing.assert_allclose([e[2] for e in edges], 0.5, rtol=1e-12)

    def test_reduce_sparsify_flag(self, tmp_path, geo_file):
        assert run("reduce", "--graph", geo_file, "--sparsify", "--q", "auto:4", "--seed", 2,
                   "--out", tmp_path / "r.tsv") == 0
        assert re.search(r"^#repaired=(true|false)$", (tmp_path / "r.tsv").read_text(), re.M)

    def test_bad_q(self, tmp_path, geo_file):
        assert run("reduce", "--graph", geo_file, "--sparsify", "--q", "lots", "--out", tmp_path / "r.tsv") == 2

    def test_missing_graph(self, tmp_path):
        assert run("downsample", "--graph", tmp_path / "nope.tsv") == 2

    def test_corrupt_graph(self, tmp_path):
        (tmp_path / "bad.tsv").write_text("#pyra-graph n=3\n0\t1\tfoo\n")
        assert run("downsample", "--graph", tmp_path / "bad.tsv") == 4

    def test_disconnected_graph(self, tmp_path):
        (tmp_path / "d.tsv").write_text("#pyra-graph n=4\n0\t1\t1.0\n2\t3\t1.0\n")
        assert run("downsample", "--graph", tmp_path / "d.tsv") == 2


class TestAnalyzeSynthesize:
    def test_round_trip(self, tmp_path, geo_file, capsys):
        x = np.random.default_rng(0).standard_normal(150)
        io.write_signal(tmp_path / "x.csv", x)
        assert run("analyze", "--graph", geo_file, "--signal", tmp_path / "x.csv", "--levels", 3,
                   "--epsilon", 0.005, "--out", tmp_path / "c", "--quiet") == 0
        summary = json.loads((tmp_path / "c" / "summary.json").read_text())
        assert 1.7 < summary["redundancy"] < 2.0
        assert len(summary["sizes"]) == 4 and len(summary["energy"]) == 4
        capsys.readouterr()
        assert run("synthesize", "--container", tmp_path / "c", "--mode", "direct", "--reference", tmp_path / "x.csv",
                   "--out", tmp_path / "xr.csv") == 0
        report = json.loads(capsys.readouterr().out)
        assert report["relative_error"] <= 1e-8
        assert run("synthesize", "--container", tmp_path / "c", "--mode", "leastsquares",
                   "--reference", tmp_path / "x.csv") == 0
        assert json.loads(capsys.readouterr().out)["relative_error"] <= 1e-6

    def test_zero_signal(self, tmp_path, geo_file):
        io.write_signal(tmp_path / "z.csv", np.zeros(150))
        assert run("analyze", "--graph", geo_file, "--signal", tmp_path / "z.csv", "--epsilon", 0.005,
                   "--out", tmp_path / "c", "--quiet") == 0
        summary = json.loads((tmp_path / "c" / "summary.json").read_text())
        assert all(e == 0 for e in summary["energy"])

    def test_deterministic_container(self, tmp_path, geo_file):
        for name in ("a", "b"):
            assert run("analyze", "--graph", geo_file, "--synthetic", "lowpass-noise:1", "--sparsify",
                       "--epsilon", 0.005, "--seed", 3, "--out", tmp_path / name, "--quiet") == 0
        for f in io.list_files(tmp_path / "a"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_fiedler_cut(self, tmp_path, geo_file):
        assert run("analyze", "--graph", geo_file, "--synthetic", "fiedler-sign", "--epsilon", 0.005,
                   "--out", tmp_path / "c", "--quiet") == 0
        g = io.read_graph(geo_file)
        x = fiedler_sign(g)
        y = io.read_signal(tmp_path / "c" / "y_0.csv", g.n)
        rows, cols, _ = g.edges()
        crossing = x[rows] != x[cols]
        near_cut = np.zeros(g.n, dtype=bool)
        near_cut[rows[crossing]] = near_cut[cols[crossing]] = True
        top = np.argsort(-np.abs(y), kind="stable")[:10]
        assert near_cut[top].all()

    def test_epsilon_required(self, tmp_path, geo_file):
        assert run("analyze", "--graph", geo_file, "--synthetic", "fiedler-sign", "--out", tmp_path / "c") == 2

    @pytest.mark.parametrize("extra", [
        ["--epsilon", "-1"], ["--epsilon", "0.01", "--filter", "box:1"], ["--epsilon", "0.01", "--levels", "0"],
        ["--epsilon", "0.01", "--interp", "chebyshev:30"],
    ])
    def test_bad_options(self, tmp_path, geo_file, extra):
        assert run("analyze", "--graph", geo_file, "--synthetic", "fiedler-sign", "--out", tmp_path / "c",
                   *extra) == 2

    def test_too_many_levels_is_usage_error(self, tmp_path):
        run("generate", "path", "--n", 6, "--out", tmp_path / "p.tsv")
        assert run("analyze", "--graph", tmp_path / "p.tsv", "--synthetic", "fiedler-sign", "--epsilon", 0.01,
                   "--levels", 6, "--out", tmp_path / "c") == 2

    def test_signal_and_synthetic_conflict(self, tmp_path, geo_file):
        io.write_signal(tmp_path / "x.csv", np.ones(150))
        assert run("analyze", "--graph", geo_file, "--signal", tmp_path / "x.csv", "--synthetic", "fiedler-sign",
                   "--epsilon", 0.01, "--out", tmp_path / "c") == 2

    def test_truncated_container(self, tmp_path, geo_file):
        run("analyze", "--graph", geo_file, "--synthetic", "fiedler-sign", "--epsilon", 0.005,
            "--out", tmp_path / "c", "--quiet")
        f = tmp_path / "c" / "y_1.csv"
        f.write_text(f.read_text()[:40])
        assert run("synthesize", "--container", tmp_path / "c") == 4

    def test_missing_container(self, tmp_path):
        assert run("synthesize", "--container", tmp_path / "none") == 2


class TestCompress:
    def test_sweep(self, tmp_path, geo_file):
        out = tmp_path / "rep.json"
        assert run("compress", "--graph", geo_file, "--synthetic", "poly2-patch", "--epsilon", 0.005,
                   "--keep", "0.1,0.333,0.6,1.0", "--out", out, "--quiet") == 0
        rep = json.loads(out.read_text())
        sweep = rep["sweep"]
        assert [r["keep_fraction"] for r in sweep] == [0.1, 0.333, 0.6, 1.0]
        assert sweep[-1]["direct"] <= 1e-8 and sweep[-1]["leastsquares"] <= 1e-8
        assert all(r["leastsquares"] <= r["direct"] + 1e-12 for r in sweep)
        assert rep["ls_not_worse"] is True
        ls = [r["leastsquares"] for r in sweep]
        assert rep["ls_monotone"] == all(b <= a + 1e-12 for a, b in zip(ls, ls[1:]))

    def test_keep_of_n(self, tmp_path, geo_file):
        out = tmp_path / "rep.json"
        assert run("compress", "--graph", geo_file, "--synthetic", "poly2-patch", "--epsilon", 0.005,
                   "--keep", "0.5", "--keep-of", "n", "--out", out, "--quiet") == 0
        assert json.loads(out.read_text())["sweep"][0]["keep_count"] == 75

    @pytest.mark.parametrize("keep", ["0", "1.5", "a,b"])
    def test_bad_keep(self, tmp_path, geo_file, keep):
        assert run("compress", "--graph", geo_file, "--synthetic", "poly2-patch", "--epsilon", 0.005,
                   "--keep", keep, "--quiet") == 2


class TestPlot:
    def test_p8_mask_two_colors(self, tmp_path):
        run("generate", "path", "--n", 8, "--out", tmp_path / "p.tsv")
        run("downsample", "--graph", tmp_path / "p.tsv", "--out", tmp_path / "m.txt", "--quiet")
        assert run("plot", "--graph", tmp_path / "p.tsv", "--mask", tmp_path / "m.txt", "--out", tmp_path / "svg",
                   "--quiet") == 0
        svg = (tmp_path / "svg" / "graph.svg").read_text()
        fills = re.findall(r'<circle [^>]*fill="(#[0-9a-f]{6})"', svg)
        assert len(fills) == 8 and len(set(fills)) == 2
        assert all(a != b for a, b in zip(fills, fills[1:]))

    def test_container_one_svg_per_level(self, tmp_path, geo_file):
        run("analyze", "--graph", geo_file, "--synthetic", "poly2-patch", "--epsilon", 0.005, "--levels", 3,
            "--out", tmp_path / "c", "--quiet")
        assert run("plot", "--container", tmp_path / "c", "--out", tmp_path / "svg", "--quiet") == 0
        files = sorted(p.name for p in (tmp_path / "svg").iterdir())
        assert [f for f in files if f.startswith("level_")] == [f"level_{j}.svg" for j in range(4)]

    def test_report_polyline(self, tmp_path, geo_file):
        run("compress", "--graph", geo_file, "--synthetic", "poly2-patch", "--epsilon", 0.005,
            "--out", tmp_path / "rep.json", "--quiet")
        assert run("plot", "--report", tmp_path / "rep.json", "--out", tmp_path / "svg", "--quiet") == 0
        assert (tmp_path / "svg" / "compression.svg").read_text().count("<polyline") == 2

    def test_needs_input(self, tmp_path):
        assert run("plot", "--out", tmp_path / "svg") == 2


class TestSignals:
    def test_fiedler_sign_values(self):
        g = random_geometric(60, 0.3, seed=1)
        x = fiedler_sign(g)
        assert set(np.unique(x)) == {-1.0, 1.0}

    def test_poly2_patch(self):
        g = random_geometric(60, 0.3, seed=1)
        x = poly2_patch(g)
        cx, cy = g.coords[:, 0], g.coords[:, 1]
        upper = cy > 0.55
        np.testing.assert_allclose(x[upper], cx[upper] ** 2 - cy[upper])
        np.testing.assert_allclose(x[~upper], cx[~upper] - cy[~upper] + 3 * cy[~upper] ** 2 - 5)

    def test_poly2_needs_coords(self):
        from graphpyramid.graph import build_graph
        with pytest.raises(ValueError):
            poly2_patch(build_graph(2, [(0, 1, 1.0)]))

    def test_unknown(self):
        with pytest.raises(ValueError):
            synthetic_signal("square-wave", random_geometric(20, 0.5, seed=0))


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "graphpyramid", "generate", "path", "--n", "4"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.splitlines()[0] == "#pyra-graph n=4"
