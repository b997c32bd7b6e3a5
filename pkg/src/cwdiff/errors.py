"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: usage and I/O problems exit
with 2, checked conditions that fail (unbalanced graph, failed separation)
exit with 1.
"""


class CwdiffError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(CwdiffError, ValueError):
    """Operands have incompatible shapes."""


class GraphFormatError(CwdiffError, ValueError):
    """A graph/weights/labels/features file violates its documented format."""


class ConnectivityError(CwdiffError):
    """Operation requires a connected graph but the input is disconnected."""


class DegenerateDegreeError(CwdiffError):
    """Zero row degree with a zero degree floor; names the offending nodes."""

    def __init__(self, nodes):
        self.nodes = list(nodes)
        super().__init__(
            f"zero complex degree at nodes {self.nodes} with degree_floor=0"
        )


class PhaseUndefinedError(CwdiffError):
    """Phase requested for a zero edge weight."""


class PathError(CwdiffError):
    """A node sequence is not a path in the graph."""


class BalanceError(CwdiffError):
    """Operation requires a structurally balanced graph."""


class PartitionError(CwdiffError, ValueError):
    """Invalid node partition (empty class or length mismatch)."""


class SeparationError(CwdiffError):
    """Phase clustering did not recover the expected number of classes."""

    def __init__(self, expected, recovered, cluster_sizes, phase_histogram):
        self.expected = expected
        self.recovered = recovered
        self.cluster_sizes = cluster_sizes
        self.phase_histogram = phase_histogram
        super().__init__(
            f"expected {expected} phase clusters, found {recovered} "
            f"(sizes {cluster_sizes}); histogram {phase_histogram}"
        )


class NumericError(CwdiffError, ArithmeticError):
    """Non-finite values appeared during an iterative computation."""


class DatasetError(CwdiffError, ValueError):
    """A dataset directory or its contents failed validation."""


class ConfigError(CwdiffError, ValueError):
    """A training configuration value is outside its documented range."""
