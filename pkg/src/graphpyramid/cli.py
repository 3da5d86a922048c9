"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 corrupt input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .downsample import select_largest_eigenvector
from .errors import (
    ContainerCorrupt,
    GraphPyramidError,
    InvalidFamilyParameters,
    InvalidGraph,
    NumericalFailure,
)
from .graph import generate, is_connected, laplacian
from .pyramid import (
    PyramidConfig,
    analyze,
    redundancy,
    relative_error,
    synthesize,
    threshold_coefficients,
)
from .reduce import SparsifyConfig, graph_from_laplacian, reduce_pipeline
from .signals import synthetic_signal
from .spectral import parse_kernel
from . import svg

log = logging.getLogger("graphpyramid")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CORRUPT = 0, 2, 3, 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _load_graph(path):
    if not Path(path).exists():
        raise UsageError(f"graph file {path} does not exist")
    g = io.read_graph(path)
    if not is_connected(g):
        raise UsageError(f"graph in {path} is not connected")
    return g


def _load_signal(args, g):
    if args.signal and args.synthetic:
        raise UsageError("give either --signal or --synthetic, not both")
    if args.signal:
        if not Path(args.signal).exists():
            raise UsageError(f"signal file {args.signal} does not exist")
        return io.read_signal(args.signal, g.n)
    if args.synthetic:
        return synthetic_signal(args.synthetic, g, seed=args.seed)
    raise UsageError("a signal is required (--signal FILE or --synthetic SPEC)")


def _sparsify_cfg(args):
    try:
        return SparsifyConfig.parse(args.q, seed=args.seed)
    except ValueError as exc:
        raise UsageError(f"bad --q value {args.q!r}: {exc}") from exc


def _pyramid_config(args):
    try:
        kernel = parse_kernel(args.filter)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not args.epsilon > 0:
        raise UsageError("--epsilon must be positive")
    if args.interp != "exact":
        raise UsageError("pyramid commands support only --interp exact")
    if args.levels < 1:
        raise UsageError("--levels must be at least 1")
    return PyramidConfig(kernel=kernel, epsilon=args.epsilon, sparsify=args.sparsify,
                         sparsify_cfg=_sparsify_cfg(args), seed=args.seed, filtering=args.filtering)


def _emit(args, payload):
    if not args.quiet:
        print(json.dumps(payload, indent=2, sort_keys=True))


def _level_energy(p):
    return [float(np.sum(lvl.prediction_error ** 2)) for lvl in p.levels] + [float(np.sum(p.coarsest ** 2))]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_generate(args):
    params = {}
    fam = args.family.replace("-", "_")
    if fam in ("path", "ring", "complete"):
        params = {"n": args.n}
    elif fam == "grid":
        params = {"rows": args.rows, "cols": args.cols, "wrap": args.wrap}
    elif fam == "balanced_tree":
        params = {"branching": args.branching, "depth": args.depth}
    elif fam == "k_rbg":
        params = {"k": args.k, "n": args.n, "seed": args.seed}
    elif fam == "random_geometric":
        params = {"n": args.n, "radius": args.radius, "seed": args.seed}
    elif fam == "star":
        params = {"leaves": args.n}
    if any(v is None for v in params.values()):
        raise UsageError(f"missing parameters for {args.family}: {sorted(k for k, v in params.items() if v is None)}")
    g = generate(fam, **params)
    text = io.format_graph(g)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    log.info("generated %s with %d vertices and %d edges", args.family, g.n, g.num_edges)
    return EXIT_OK


def cmd_downsample(args):
    g = _load_graph(args.graph)
    mask = select_largest_eigenvector(laplacian(g), seed=args.seed, fallback=True)
    if args.out:
        io.write_mask(args.out, mask)
    _emit(args, {"n": g.n, "kept": mask.n_kept, "method": mask.method})
    return EXIT_OK


def cmd_reduce(args):
    g = _load_graph(args.graph)
    L = laplacian(g)
    if args.mask:
        mask = io.read_mask(args.mask, g.n)
    else:
        mask = select_largest_eigenvector(L, seed=args.seed, fallback=True)
    reduced, info = reduce_pipeline(L, mask, _sparsify_cfg(args), args.sparsify, with_info=True)
    coords = None if g.coords is None else g.coords[mask.keep]
    out_g = graph_from_laplacian(reduced, coords=coords)
    comments = {"repaired": str(bool(info.get("repaired", False))).lower()} if args.sparsify else {}
    text = io.format_graph(out_g, comments)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_analyze(args):
    if not args.out:
        raise UsageError("analyze needs --out DIR for the pyramid container")
    g = _load_graph(args.graph)
    x = _load_signal(args, g)
    config = _pyramid_config(args)
    L = laplacian(g)
    p = analyze(x, L, args.levels, config)
    io.write_pyramid(args.out, p, L, coords=g.coords)
    summary = {
        "sizes": p.sizes,
        "redundancy": redundancy(p),
        "total_coefficients": p.total_coefficients,
        "energy": _level_energy(p),
        "filter": config.kernel.spec,
        "epsilon": config.epsilon,
        "sparsify": [lvl.sparsify_meta for lvl in p.levels],
        "masks": [lvl.mask.method for lvl in p.levels],
    }
    Path(args.out, "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _emit(args, summary)
    return EXIT_OK


def cmd_synthesize(args):
    if not Path(args.container).is_dir():
        raise UsageError(f"container {args.container} is not a directory")
    p, L0, _ = io.read_pyramid(args.container)
    x = synthesize(p, L0, args.mode, solver=args.solver)
    if args.out:
        io.write_signal(args.out, x)
    report = {"mode": args.mode, "n": int(x.shape[0])}
    if args.reference:
        ref = io.read_signal(args.reference, x.shape[0])
        report["relative_error"] = relative_error(x, ref)
    _emit(args, report)
    return EXIT_OK


def cmd_compress(args):
    g = _load_graph(args.graph)
    x = _load_signal(args, g)
    config = _pyramid_config(args)
    L = laplacian(g)
    p = analyze(x, L, args.levels, config)
    try:
        fractions = sorted({float(t) for t in args.keep.split(",")})
    except ValueError as exc:
        raise UsageError(f"bad --keep list {args.keep!r}") from exc
    if any(not 0 < f <= 1 for f in fractions):
        raise UsageError("keep fractions must lie in (0, 1]")
    rows = []
    for frac in fractions:
        base = p.total_coefficients if args.keep_of == "total" else g.n
        count = max(1, min(p.total_coefficients, int(round(frac * base))))
        pt = threshold_coefficients(p, count)
        rows.append({
            "keep_fraction": frac,
            "keep_count": count,
            "direct": relative_error(synthesize(pt, L, "direct"), x),
            "leastsquares": relative_error(synthesize(pt, L, "leastsquares"), x),
        })
    ls = [r["leastsquares"] for r in rows]
    report = {
        "n": g.n,
        "keep_of": args.keep_of,
        "total_coefficients": p.total_coefficients,
        "redundancy": redundancy(p),
        "sweep": rows,
        "ls_monotone": bool(all(b <= a + 1e-12 for a, b in zip(ls, ls[1:]))),
        "ls_not_worse": bool(all(r["leastsquares"] <= r["direct"] + 1e-12 for r in rows)),
    }
    if not report["ls_monotone"]:
        log.warning("least-squares error is not monotone in the keep fraction")
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _emit(args, report)
    return EXIT_OK


def cmd_plot(args):
    if not args.out:
        raise UsageError("plot needs --out DIR")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if args.container:
        p, _, graphs = io.read_pyramid(args.container)
        for j, g in enumerate(graphs):
            if j < p.J:
                values = p.levels[j].prediction_error
                title = f"level {j}: N={g.n}, prediction error"
            else:
                values = p.coarsest
                title = f"level {j}: N={g.n}, coarsest approximation"
            pos = g.coords if g.coords is not None else svg.spring_layout(g, args.seed)
            path = out / f"level_{j}.svg"
            path.write_text(svg.draw_graph(g, values, pos, title), encoding="utf-8")
            written.append(path.name)
        path = out / "coefficients.svg"
        path.write_text(svg.stem_plot(np.sort(np.abs(p.coefficients()))[::-1], "sorted coefficient magnitudes"),
                        encoding="utf-8")
        written.append(path.name)
    elif args.report:
        report = json.loads(Path(args.report).read_text(encoding="utf-8"))
        sweep = report["sweep"]
        x = [r["keep_fraction"] for r in sweep]
        chart = svg.line_chart(x, {"direct": [r["direct"] for r in sweep],
                                   "least squares": [r["leastsquares"] for r in sweep]},
                               "relative error vs keep fraction")
        path = out / "compression.svg"
        path.write_text(chart, encoding="utf-8")
        written.append(path.name)
    elif args.graph:
        g = io.read_graph(args.graph)
        values = None
        if args.mask:
            values = io.read_mask(args.mask, g.n).keep.astype(float)
        elif args.signal:
            values = io.read_signal(args.signal, g.n)
        pos = g.coords if g.coords is not None else svg.spring_layout(g, args.seed)
        path = out / "graph.svg"
        path.write_text(svg.draw_graph(g, values, pos), encoding="utf-8")
        written.append(path.name)
    else:
        raise UsageError("plot needs --container, --report or --graph")
    _emit(args, {"written": written})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--quiet", action="store_true", help="suppress the JSON report on stdout")

    sparsify = argparse.ArgumentParser(add_help=False)
    sparsify.add_argument("--sparsify", action="store_true", help="sparsify after each Kron reduction")
    sparsify.add_argument("--q", default="auto:4", help="edge draws: an integer or auto:<c> for round(c N ln N)")

    signal = argparse.ArgumentParser(add_help=False)
    signal.add_argument("--graph", required=True, help="edge-list file")
    signal.add_argument("--signal", help="signal file (one value per line)")
    signal.add_argument("--synthetic", help="fiedler-sign | poly2-patch | lowpass-noise:<tau>")
    signal.add_argument("--levels", "-J", type=int, default=3)
    signal.add_argument("--filter", default="green:0.5", help="green:<tau> | heat:<t> | ideal-low:<c>")
    signal.add_argument("--epsilon", type=float, required=True, help="regularization for interpolation")
    signal.add_argument("--filtering", choices=["auto", "exact", "chebyshev"], default="auto")
    signal.add_argument("--interp", default="exact",
                        help="spline evaluation; pyramids need the exact solve so their adjoint stays consistent")

    parser = argparse.ArgumentParser(prog="graphpyramid", description=__doc__.splitlines()[0],
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write a generated graph")
    p.add_argument("family", choices=["path", "ring", "grid", "balanced-tree", "k-rbg",
                                      "random-geometric", "complete", "star"])
    p.add_argument("--n", type=int)
    p.add_argument("--radius", type=float)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--wrap", action="store_true")
    p.add_argument("--branching", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("downsample", parents=[common], help="largest-eigenvector vertex selection")
    p.add_argument("--graph", required=True)
    p.set_defaults(func=cmd_downsample)

    p = sub.add_parser("reduce", parents=[common, sparsify], help="Kron reduction (+ sparsification)")
    p.add_argument("--graph", required=True)
    p.add_argument("--mask", help="mask file; computed by downsampling when omitted")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("analyze", parents=[common, sparsify, signal], help="pyramid analysis to a container")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synthesize", parents=[common], help="reconstruct a signal from a container")
    p.add_argument("--container", required=True)
    p.add_argument("--mode", choices=["direct", "leastsquares"], default="direct")
    p.add_argument("--solver", choices=["normal_cg", "landweber"], default="normal_cg")
    p.add_argument("--reference", help="signal file to report the relative error against")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("compress", parents=[common, sparsify, signal], help="thresholding sweep report")
    p.add_argument("--keep", default="0.1,0.2,0.333,0.5,0.75,1.0", help="comma-separated keep fractions")
    p.add_argument("--keep-of", choices=["total", "n"], default="total",
                   help="fractions of the total coefficient count (default) or of the vertex count")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("plot", parents=[common], help="SVG drawings")
    p.add_argument("--container")
    p.add_argument("--report")
    p.add_argument("--graph")
    p.add_argument("--mask")
    p.add_argument("--signal")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, InvalidFamilyParameters) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ContainerCorrupt, InvalidGraph) as exc:
        print(f"corrupt input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except GraphPyramidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
