"""Exception types shared across the library.

The CLI maps these onto process exit codes, so user-facing entry points
should funnel failures through one of the classes below rather than
raising bare exceptions.
"""


class ConfigError(ValueError):
    """A scenario/config file or user-supplied parameter set is invalid."""


class AllocationError(ValueError):
    """A multiuser resource allocation is malformed (tiling, overlap, range)."""


class GuardError(RuntimeError):
    """A size or complexity guard refused to run an operation."""


class IllConditionedError(GuardError):
    """A matrix inversion was refused because the operator is near-singular."""
