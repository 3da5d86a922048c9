"""Text file formats: edge lists, signals, masks and pyramid containers.

Floats are written with ``repr`` so every write/read round trip is exact
and files are byte-identical across reruns.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .downsample import VertexMask
from .errors import ContainerCorrupt, GraphPyramidError
from .graph import Graph, Laplacian, build_graph, is_connected, laplacian
from .pyramid import PyramidLevelRecord, PyramidOutput
from .reduce import graph_from_laplacian
from .spectral import parse_kernel

HEADER = "#pyra-graph"


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------


def format_graph(g: Graph, comments: dict | None = None) -> str:
    lines = [f"{HEADER} n={g.n}"]
    for key, value in (comments or {}).items():
        lines.append(f"#{key}={value}")
    if g.coords is not None:
        for i, row in enumerate(g.coords):
            lines.append("#xy " + " ".join([str(i)] + [_fmt(v) for v in row]))
    for i, j, w in g.edge_list():
        lines.append(f"{i}\t{j}\t{_fmt(w)}")
    return "\n".join(lines) + "\n"


def write_graph(path, g: Graph, comments: dict | None = None) -> None:
    Path(path).write_text(format_graph(g, comments), encoding="utf-8")


def parse_graph(text: str) -> Graph:
    """Parse the edge-list format; raises ``ContainerCorrupt`` on malformed input."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith(HEADER):
        raise ContainerCorrupt("missing '#pyra-graph n=<N>' header")
    try:
        n = int(lines[0].split("n=", 1)[1].split()[0])
    except (IndexError, ValueError) as exc:
        raise ContainerCorrupt(f"bad header line {lines[0]!r}") from exc
    edges, coords, meta = [], {}, {}
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:]
            if body.startswith("xy "):
                parts = body.split()
                coords[int(parts[1])] = [float(v) for v in parts[2:]]
            elif "=" in body and " " not in body.split("=", 1)[0]:
                key, value = body.split("=", 1)
                meta[key] = value
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ContainerCorrupt(f"line {lineno}: expected 'i<TAB>j<TAB>w', got {line!r}")
        try:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise ContainerCorrupt(f"line {lineno}: {exc}") from exc
    xy = None
    if coords:
        if sorted(coords) != list(range(n)):
            raise ContainerCorrupt("coordinate lines do not cover every vertex")
        xy = np.array([coords[i] for i in range(n)])
    g = build_graph(n, edges, xy)
    if meta:
        g = g.with_meta(**meta)
    return g


def read_graph(path) -> Graph:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ContainerCorrupt(f"{path}: not UTF-8 text") from exc
    try:
        return parse_graph(text)
    except ContainerCorrupt as exc:
        raise ContainerCorrupt(f"{path}: {exc}") from exc
    except GraphPyramidError as exc:
        raise ContainerCorrupt(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# signals and masks
# ---------------------------------------------------------------------------


def write_signal(path, values) -> None:
    Path(path).write_text("".join(_fmt(v) + "\n" for v in np.asarray(values, dtype=float)), encoding="utf-8")


def read_signal(path, n: int | None = None) -> np.ndarray:
    try:
        vals = [float(line) for line in Path(path).read_text(encoding="utf-8").split("\n") if line.strip()]
    except ValueError as exc:
        raise ContainerCorrupt(f"{path}: {exc}") from exc
    if n is not None and len(vals) != n:
        raise ContainerCorrupt(f"{path}: expected {n} values, found {len(vals)}")
    return np.array(vals, dtype=float)


def write_mask(path, mask: VertexMask) -> None:
    Path(path).write_text("".join("1\n" if k else "0\n" for k in mask.keep), encoding="utf-8")


def read_mask(path, n: int | None = None) -> VertexMask:
    tokens = [t.strip() for t in Path(path).read_text(encoding="utf-8").split("\n") if t.strip()]
    if any(t not in ("0", "1") for t in tokens):
        raise ContainerCorrupt(f"{path}: mask entries must be 0 or 1")
    if n is not None and len(tokens) != n:
        raise ContainerCorrupt(f"{path}: expected {n} entries, found {len(tokens)}")
    return VertexMask(np.array([t == "1" for t in tokens]), "given")


# ---------------------------------------------------------------------------
# pyramid container
# ---------------------------------------------------------------------------


def write_pyramid(directory, p: PyramidOutput, L0: Laplacian, coords=None) -> Path:
    """Write ``manifest``, ``graph_<j>.tsv`` (j = 0..J), ``mask_<j>.txt``, ``y_<j>.csv`` and ``x_J.csv``.

    ``coords`` (for the original vertices) are carried down to the kept
    vertices of every level so reduced graphs can be drawn.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    laps = [L0] + [lvl.laplacian_next for lvl in p.levels]
    level_coords = [None if coords is None else np.asarray(coords, dtype=float)]
    for lvl in p.levels:
        prev = level_coords[-1]
        level_coords.append(None if prev is None else prev[lvl.mask.keep])
    lines = ["pyra-pyramid 1", f"J={p.J}", f"n0={p.n0}"]
    for j, lvl in enumerate(p.levels):
        if lvl.kernel.name not in ("green", "heat", "ideal-low"):
            raise ValueError(f"kernel {lvl.kernel!r} has no file representation")
        meta = lvl.sparsify_meta
        lines.append(
            f"level {j} filter={lvl.kernel.spec} epsilon={_fmt(lvl.epsilon)} filtering={lvl.filtering}"
            f" order={lvl.chebyshev_order}"
            f" bound={'none' if lvl.lambda_max_bound is None else _fmt(lvl.lambda_max_bound)}"
            f" sparsify={'yes' if meta else 'no'} Q={meta.get('Q', 0)} seed={meta.get('seed', 0)}"
            f" repaired={str(bool(meta.get('repaired', False))).lower()}"
            f" mask={lvl.mask.method} n={lvl.mask.n} kept={lvl.mask.n_kept}"
        )
    graphs = [graph_from_laplacian(L, coords=c) for L, c in zip(laps, level_coords)]
    lines.append("edges " + " ".join(str(g.num_edges) for g in graphs))
    (d / "manifest").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for j, g in enumerate(graphs):
        comments = {}
        if j >= 1 and p.levels[j - 1].sparsify_meta:
            comments["repaired"] = str(bool(p.levels[j - 1].sparsify_meta.get("repaired", False))).lower()
        write_graph(d / f"graph_{j}.tsv", g, comments)
    for j, lvl in enumerate(p.levels):
        write_mask(d / f"mask_{j}.txt", lvl.mask)
        write_signal(d / f"y_{j}.csv", lvl.prediction_error)
    write_signal(d / "x_J.csv", p.coarsest)
    return d


def _parse_level_line(line: str) -> dict:
    parts = line.split()
    if len(parts) < 2 or parts[0] != "level":
        raise ContainerCorrupt(f"bad manifest line {line!r}")
    out = {"index": int(parts[1])}
    for token in parts[2:]:
        key, _, value = token.partition("=")
        out[key] = value
    return out


def read_pyramid(directory):
    """Inverse of :func:`write_pyramid`; returns ``(pyramid, L0, graphs)``.

    Raises
    ------
    ContainerCorrupt
        Missing or truncated files and inconsistent sizes.
    """
    d = Path(directory)
    try:
        manifest = (d / "manifest").read_text(encoding="utf-8").splitlines()
        if not manifest or manifest[0] != "pyra-pyramid 1":
            raise ContainerCorrupt("manifest header missing")
        J = int(manifest[1].split("=", 1)[1])
        n0 = int(manifest[2].split("=", 1)[1])
        body = [line for line in manifest[3:] if line.strip()]
        if not body or not body[-1].startswith("edges "):
            raise ContainerCorrupt("manifest has no edge-count line")
        edge_counts = [int(t) for t in body[-1].split()[1:]]
        specs = [_parse_level_line(line) for line in body[:-1]]
        if len(specs) != J or len(edge_counts) != J + 1:
            raise ContainerCorrupt(f"manifest lists {len(specs)} levels, expected {J}")
        graphs = [read_graph(d / f"graph_{j}.tsv") for j in range(J + 1)]
        if graphs[0].n != n0:
            raise ContainerCorrupt("graph_0 size differs from n0")
        for j, g in enumerate(graphs):
            if g.num_edges != edge_counts[j] or not is_connected(g):
                raise ContainerCorrupt(f"graph_{j}.tsv is incomplete")
        levels = []
        for j, spec in enumerate(specs):
            mask = read_mask(d / f"mask_{j}.txt", graphs[j].n)
            mask = VertexMask(mask.keep, spec.get("mask", "given"))
            if mask.n_kept != graphs[j + 1].n:
                raise ContainerCorrupt(f"mask_{j} keeps {mask.n_kept} vertices but graph_{j + 1} has {graphs[j + 1].n}")
            y = read_signal(d / f"y_{j}.csv", graphs[j].n)
            meta = {}
            if spec.get("sparsify") == "yes":
                meta = {"Q": int(spec["Q"]), "seed": int(spec["seed"]), "repaired": spec["repaired"] == "true"}
            bound = None if spec.get("bound", "none") == "none" else float(spec["bound"])
            levels.append(PyramidLevelRecord(
                laplacian(graphs[j + 1]), mask, y, parse_kernel(spec["filter"]), float(spec["epsilon"]),
                meta, spec.get("filtering", "exact"), bound, int(spec.get("order", 50))))
        x_j = read_signal(d / "x_J.csv", graphs[J].n)
    except ContainerCorrupt:
        raise
    except (OSError, ValueError, IndexError, KeyError, GraphPyramidError) as exc:
        raise ContainerCorrupt(f"{d}: {exc}") from exc
    return PyramidOutput(levels, x_j, n0), laplacian(graphs[0]), graphs


def list_files(directory) -> list[str]:
    return sorted(os.listdir(directory))
