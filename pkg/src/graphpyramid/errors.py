"""Exception hierarchy shared by every module of the package."""


class GraphPyramidError(Exception):
    """Base class for all errors raised by graphpyramid."""


class InvalidGraph(GraphPyramidError, ValueError):
    """An edge list or matrix does not describe a valid loopless undirected graph."""


class SelfLoop(InvalidGraph):
    pass


class NonPositiveWeight(InvalidGraph):
    pass


class DuplicateEdge(InvalidGraph):
    pass


class IndexOutOfRange(InvalidGraph):
    pass


class NotALaplacian(InvalidGraph):
    pass


class InvalidFamilyParameters(GraphPyramidError, ValueError):
    pass


class DisconnectedAfterRetries(GraphPyramidError):
    pass


class DimensionMismatch(GraphPyramidError, ValueError):
    pass


class NumericalFailure(GraphPyramidError, ArithmeticError):
    """Base class for failures of an iterative or numerical routine."""


class SolverFailure(NumericalFailure):
    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class NoConvergence(NumericalFailure):
    """Power iteration sign pattern did not settle; ``vector`` holds the last iterate."""

    def __init__(self, message, vector=None, eigenvalue=None, iterations=None):
        super().__init__(message)
        self.vector = vector
        self.eigenvalue = eigenvalue
        self.iterations = iterations


class DegenerateSplit(NumericalFailure):
    pass


class TooLarge(GraphPyramidError, ValueError):
    pass


class KernelNotFinite(NumericalFailure):
    pass


class BadSpectrumBound(GraphPyramidError, ValueError):
    pass


class NotBipartite(GraphPyramidError, ValueError):
    pass


class MaskTooSmall(GraphPyramidError, ValueError):
    pass


class TooManyLevels(GraphPyramidError, ValueError):
    pass


class BadKeepCount(GraphPyramidError, ValueError):
    pass


class ContainerCorrupt(GraphPyramidError):
    pass
