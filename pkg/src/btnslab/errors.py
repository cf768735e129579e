"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Index extents of tensors do not line up."""


class UnsupportedGraphError(ValueError):
    """Graph kind or path not supported by the requested operation."""


class ResourceLimitError(RuntimeError):
    """Dense evaluation would exceed the configured amplitude cap."""


class DegenerateStateError(RuntimeError):
    """A state with (numerically) zero norm where a nonzero one is required."""


class NormCollapseError(RuntimeError):
    """State norm fell below the collapse threshold during evolution."""
