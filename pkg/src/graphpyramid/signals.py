"""Synthetic test signals on graphs."""

from __future__ import annotations

import numpy as np

from .graph import Graph, laplacian
from .spectral import apply_filter_exact, dense_eigendecomposition, green_kernel


def fiedler_sign(g: Graph) -> np.ndarray:
    """Piecewise-constant +-1 signal from the polarity of the Fiedler vector."""
    dec = dense_eigendecomposition(laplacian(g))
    return np.where(dec.eigenvectors[:, 1] >= 0, 1.0, -1.0)


def poly2_patch(g: Graph, split: float = 0.55) -> np.ndarray:
    """Two quadratic patches over the vertex coordinates with a jump at ``y = split``.

    Upper patch ``x^2 + y - 2z``, lower patch ``x - y + 3z^2 - 5`` where
    ``z`` is the third coordinate (taken as ``y`` for planar layouts).
    """
    if g.coords is None:
        raise ValueError("poly2-patch needs vertex coordinates")
    xyz = np.asarray(g.coords, dtype=float)
    x, y = xyz[:, 0], xyz[:, 1]
    z = xyz[:, 2] if xyz.shape[1] > 2 else y
    upper = x ** 2 + y - 2 * z
    lower = x - y + 3 * z ** 2 - 5
    return np.where(y > split, upper, lower)


def lowpass_noise(g: Graph, tau: float, seed=None) -> np.ndarray:
    """White Gaussian noise smoothed by the ``tau / (tau + lambda)`` kernel."""
    rng = np.random.default_rng(seed)
    dec = dense_eigendecomposition(laplacian(g))
    return apply_filter_exact(rng.standard_normal(g.n), green_kernel(tau), dec)


def synthetic_signal(spec: str, g: Graph, seed=None) -> np.ndarray:
    """``fiedler-sign``, ``poly2-patch`` or ``lowpass-noise:<tau>``."""
    name, _, arg = spec.partition(":")
    if name == "fiedler-sign":
        return fiedler_sign(g)
    if name == "poly2-patch":
        return poly2_patch(g)
    if name == "lowpass-noise":
        return lowpass_noise(g, float(arg or 1.0), seed)
    raise ValueError(f"unknown synthetic signal {spec!r}")
