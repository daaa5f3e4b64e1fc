"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operands or arrays have incompatible alphabet size, depth, or shape."""


class RidgeError(RuntimeError):
    """Normal-equation solve failed its residual check."""


class SimulationError(RuntimeError):
    """A simulated path left the finite range; message carries the step index."""


class SolverError(RuntimeError):
    """Backward recursion produced non-finite values; message carries step and count."""


class TrainingError(RuntimeError):
    """Network training diverged."""
