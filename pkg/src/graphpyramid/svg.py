"""Minimal hand-written SVG output: graph drawings, stem plots and line charts."""

from __future__ import annotations

import numpy as np

from .graph import Graph

WIDTH, HEIGHT, PAD = 480, 480, 24


def spring_layout(g: Graph, seed: int = 0, iterations: int = 200) -> np.ndarray:
    """Deterministic Fruchterman-Reingold layout in the unit square."""
    rng = np.random.default_rng(seed)
    n = g.n
    pos = rng.uniform(size=(n, 2))
    if n < 2:
        return pos
    k = 1.0 / np.sqrt(n)
    a = g.adjacency.toarray() > 0
    temp = 0.1
    for _ in range(iterations):
        delta = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((delta ** 2).sum(-1))
        np.fill_diagonal(dist, 1.0)
        dist = np.maximum(dist, 1e-3)
        force = k * k / dist ** 2 - a * dist / k
        np.fill_diagonal(force, 0.0)
        disp = (delta * force[:, :, None]).sum(1)
        length = np.maximum(np.linalg.norm(disp, axis=1), 1e-9)
        pos += disp / length[:, None] * np.minimum(length, temp)[:, None]
        temp *= 0.98
    return pos


def layout(g: Graph, seed: int = 0) -> np.ndarray:
    return np.asarray(g.coords, dtype=float)[:, :2] if g.coords is not None else spring_layout(g, seed)


def _scale(pos):
    lo, hi = pos.min(0), pos.max(0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    unit = (pos - lo) / span
    return PAD + unit[:, 0] * (WIDTH - 2 * PAD), HEIGHT - PAD - unit[:, 1] * (HEIGHT - 2 * PAD)


def _color(t: float) -> str:
    # blue (low) to red (high)
    t = min(max(t, 0.0), 1.0)
    r, g, b = int(255 * t), int(80 + 60 * (1 - abs(2 * t - 1))), int(255 * (1 - t))
    return f"#{r:02x}{g:02x}{b:02x}"


def _doc(body: list[str], width=WIDTH, height=HEIGHT) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">')
    return "\n".join([head, f'<rect width="{width}" height="{height}" fill="white"/>', *body, "</svg>"]) + "\n"


def draw_graph(g: Graph, values=None, pos=None, title: str = "") -> str:
    """Edges in grey, vertices colored by ``values`` (a signal or a 0/1 mask)."""
    pos = layout(g) if pos is None else np.asarray(pos, dtype=float)
    xs, ys = _scale(pos)
    rows, cols, w = g.edges()
    body = []
    wmax = w.max() if w.size else 1.0
    for i, j, wij in zip(rows, cols, w):
        body.append(f'<line x1="{xs[i]:.2f}" y1="{ys[i]:.2f}" x2="{xs[j]:.2f}" y2="{ys[j]:.2f}" '
                    f'stroke="#999" stroke-width="{0.4 + 1.6 * wij / wmax:.2f}"/>')
    vals = np.zeros(g.n) if values is None else np.asarray(values, dtype=float)
    lo, hi = vals.min(), vals.max()
    span = hi - lo if hi > lo else 1.0
    radius = max(2.0, min(8.0, 120.0 / np.sqrt(max(g.n, 1))))
    for i in range(g.n):
        body.append(f'<circle cx="{xs[i]:.2f}" cy="{ys[i]:.2f}" r="{radius:.1f}" '
                    f'fill="{_color((vals[i] - lo) / span)}" stroke="black" stroke-width="0.3"/>')
    if title:
        body.append(f'<text x="{PAD}" y="16" font-size="12" font-family="sans-serif">{title}</text>')
    return _doc(body)


def stem_plot(values, title: str = "") -> str:
    """Coefficient magnitudes as vertical stems."""
    vals = np.abs(np.asarray(values, dtype=float))
    n = max(vals.size, 1)
    top = vals.max() if vals.size and vals.max() > 0 else 1.0
    body = [f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" y2="{HEIGHT - PAD}" stroke="black"/>']
    for i, v in enumerate(vals):
        x = PAD + (i + 0.5) * (WIDTH - 2 * PAD) / n
        y = HEIGHT - PAD - v / top * (HEIGHT - 2 * PAD)
        body.append(f'<line x1="{x:.2f}" y1="{HEIGHT - PAD}" x2="{x:.2f}" y2="{y:.2f}" stroke="#1f4e9c"/>')
    if title:
        body.append(f'<text x="{PAD}" y="16" font-size="12" font-family="sans-serif">{title}</text>')
    return _doc(body)


def line_chart(x, series: dict, title: str = "") -> str:
    """One polyline per named series over shared ``x`` values."""
    x = np.asarray(x, dtype=float)
    allv = np.concatenate([np.asarray(v, dtype=float) for v in series.values()]) if series else np.zeros(1)
    x0, x1 = x.min(), x.max() if x.max() > x.min() else x.min() + 1
    y1 = allv.max() if allv.max() > 0 else 1.0
    palette = ["#c0392b", "#1f4e9c", "#27ae60", "#8e44ad"]
    body = [f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
            f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{HEIGHT - PAD}" stroke="black"/>']
    for k, (name, vals) in enumerate(series.items()):
        vals = np.asarray(vals, dtype=float)
        px = PAD + (x - x0) / (x1 - x0) * (WIDTH - 2 * PAD)
        py = HEIGHT - PAD - vals / y1 * (HEIGHT - 2 * PAD)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        color = palette[k % len(palette)]
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        body.append(f'<text x="{WIDTH - 140}" y="{PAD + 14 * (k + 1)}" font-size="11" '
                    f'font-family="sans-serif" fill="{color}">{name}</text>')
    if title:
        body.append(f'<text x="{PAD}" y="16" font-size="12" font-family="sans-serif">{title}</text>')
    return _doc(body)
