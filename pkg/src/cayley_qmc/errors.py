"""Exception hierarchy shared by all modules.

The CLI maps these onto its exit-code contract: domain errors exit 2,
resource-guard refusals exit 3.
"""


class CayleyQmcError(Exception):
    """Base class for all package errors."""


class DomainError(CayleyQmcError):
    """Invalid or excluded parameters / inputs."""


class SingularParameterError(DomainError):
    """Parameters on an excluded singular set (e.g. J = +-J0)."""


class SolutionNotPositiveError(DomainError):
    """A formal fixed point exists but is not positive semidefinite."""


class ModelInconsistencyError(DomainError):
    """A numeric extraction violated a structural identity of the model."""


class ResourceLimitError(CayleyQmcError):
    """Requested volume exceeds the dense brute-force guard."""
