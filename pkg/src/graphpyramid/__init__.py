"""Graph multiresolutions and the Laplacian pyramid transform for graph signals."""

from .downsample import (
    VertexMask,
    count_strong_nodal_domains,
    is_bipartition_split,
    select_largest_eigenvector,
)
from .graph import Graph, Laplacian, build_graph, generate, is_connected, laplacian
from .interpolate import SplineInterpolant, fit_spline, green_function, interpolate
from .pyramid import (
    PyramidConfig,
    PyramidOutput,
    analyze,
    analyze_level,
    build_hierarchy,
    redundancy,
    synthesize,
    synthesize_level_direct,
    synthesize_level_leastsquares,
    threshold_coefficients,
)
from .reduce import (
    SparsifyConfig,
    effective_resistance,
    graph_from_laplacian,
    kron_reduce,
    reduce_pipeline,
    spectral_sparsify,
)
from .spectral import (
    FilterKernel,
    SpectralDecomposition,
    apply_filter_chebyshev,
    apply_filter_exact,
    dense_eigendecomposition,
    graph_fourier,
    parse_kernel,
    power_method,
)

__version__ = "0.1.0"
