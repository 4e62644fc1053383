"""Exception types shared across the package.

The command line maps these onto exit codes: configuration problems are
data errors (65), numerical failures are software errors (70).
"""


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class NumericalError(RuntimeError):
    """Base for failures of the numerical machinery."""


class ConvergenceError(NumericalError):
    """An iteration hit its cap before reaching tolerance."""


class PoleHitError(NumericalError):
    """The characteristic function was evaluated exactly on a pole."""


class CrossingBracketError(NumericalError):
    """The crossing bracket does not straddle a sign change."""


class BranchJumpError(NumericalError):
    """The tracked branch changed identity inside the bracket."""


class UndefinedConfinementError(NumericalError):
    """Confinement ratio requested for a state with no photon weight."""
