"""Exception types raised across the package."""


class CapacityError(ValueError):
    """Problem size exceeds a configured hardware-style capacity limit."""


class DegenerateProblemError(ValueError):
    """Input is structurally unusable (all-zero problem, single class, ...)."""


class StratificationError(ValueError):
    """A class is too small for the requested stratified split or folding."""


class DatasetParseError(ValueError):
    """A dataset or problem file failed to parse; message carries location info."""
