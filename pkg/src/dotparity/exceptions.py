"""Exception hierarchy shared by the simulation modules and the CLI."""


class DotParityError(Exception):
    """Base class for all package errors."""


class DimensionError(DotParityError, ValueError):
    """Operands live on incompatible bases or have the wrong shape."""


class ImpossibleBranchError(DotParityError, ArithmeticError):
    """Conditioning on an outcome whose probability is (numerically) zero."""


class NumericalError(DotParityError, RuntimeError):
    """An integrator or quadrature failed to reach its tolerance."""


class ConfigError(DotParityError, ValueError):
    """A run configuration could not be parsed or failed validation."""


class IndeterminateOutcome(DotParityError, ValueError):
    """A stabiliser expectation was too close to zero to assign a sign."""
