"""Exception types raised across the package."""


class BlockRegError(Exception):
    """Base class for all package errors."""


class DatasetError(BlockRegError, ValueError):
    pass


class DimensionMismatch(DatasetError):
    pass


class ConstantColumn(DatasetError):
    def __init__(self, marker_id):
        super().__init__(f"marker {marker_id!r} has a constant genotype column")
        self.marker_id = marker_id


class NonFiniteValue(DatasetError):
    pass


class NegativeDistance(DatasetError):
    pass


class InvalidGenotype(DatasetError):
    pass


class ParseError(DatasetError):
    def __init__(self, path, line, column, message):
        super().__init__(f"{path}:{line}:{column}: {message}")
        self.path = path
        self.line = line
        self.column = column


class ZeroVarianceColumn(BlockRegError, ValueError):
    pass


class DegenerateColumn(BlockRegError, ValueError):
    pass


class DegenerateBeta(BlockRegError, ValueError):
    pass


class SolveFailure(BlockRegError, ArithmeticError):
    pass


class NoConvergence(BlockRegError, RuntimeError):
    def __init__(self, message, max_kkt_violation, beta=None):
        super().__init__(f"{message} (max KKT violation {max_kkt_violation:.3g})")
        self.max_kkt_violation = max_kkt_violation
        self.beta = beta  # last iterate


class OddHaplotypeCount(BlockRegError, ValueError):
    pass


class AllMarkersFiltered(BlockRegError, ValueError):
    pass


class InfeasibleBlocks(BlockRegError, ValueError):
    def __init__(self, message, largest_runs=()):
        super().__init__(f"{message}; largest feasible run lengths: {list(largest_runs)}")
        self.largest_runs = list(largest_runs)


class EmptyTrace(BlockRegError, ValueError):
    pass


class EmptyTruth(BlockRegError, ValueError):
    pass


class ReplicateFailure(BlockRegError, RuntimeError):
    def __init__(self, seed, cause):
        super().__init__(f"replicate with seed {seed} failed: {cause}")
        self.seed = seed


class SegmentFailure(BlockRegError, RuntimeError):
    def __init__(self, index, cause):
        super().__init__(f"segment {index} failed: {cause}")
        self.index = index
        self.cause = cause
