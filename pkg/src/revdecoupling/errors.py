class RevDecouplingError(Exception):
    """Base class for all errors raised by this package."""


class ProfileError(RevDecouplingError, ValueError):
    """Invalid profile parameters or domain."""


class DomainError(RevDecouplingError, ValueError):
    """A radius outside the profile domain."""


class CapabilityError(RevDecouplingError, ValueError):
    """A request beyond a configured limit (derivative order, memory budget)."""


class ClassificationError(RevDecouplingError):
    """A degeneracy of the profile that fits none of the three handled cases."""


class StructureError(RevDecouplingError):
    """The interval decomposition of the profile domain failed."""


class LatticeError(RevDecouplingError, ValueError):
    """Frequency lattice construction failed (e.g. resolution too coarse)."""


class ConvergenceError(RevDecouplingError):
    """An iterative solver did not converge."""


class ConfigError(RevDecouplingError, ValueError):
    """Invalid run configuration."""
