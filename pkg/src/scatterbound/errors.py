"""Exception hierarchy shared by every module."""

from __future__ import annotations


class ScatterboundError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class InputError(ScatterboundError):
    """Inputs outside the domain an operation is defined on."""

    exit_code = 2


class BelowAsymptote(InputError):
    """Energy does not exceed both asymptotic potential values."""


class NonconvergentTail(InputError):
    """A sampled profile does not settle to its declared asymptotes."""


class UnsupportedFamily(InputError):
    """The operation has no implementation for this potential family."""


class DomainError(InputError):
    """A scalar argument lies outside the function's domain."""


class ParameterOutOfRange(InputError):
    """A free parameter of a bound lies outside its admissible range."""


class AsymmetricAsymptotes(InputError):
    """The operation requires equal asymptotic values on both sides."""


class ForbiddenRegion(InputError):
    """The operation requires k^2 > 0 everywhere."""


class NoForbiddenRegion(InputError):
    """The operation requires a classically forbidden region."""


class NotSingleHump(InputError):
    """The operation requires a single-hump potential."""


class MultiHump(NotSingleHump):
    """More than one hump was detected."""


class NegativePotential(InputError):
    """The operation requires V(x) >= V_inf everywhere."""


class NonMonotoneMap(InputError):
    """A change of variables is not strictly increasing."""


class InsideHorizon(InputError):
    """Radius at or inside the Schwarzschild horizon."""


class NumericalError(ScatterboundError):
    """Base class for numerical failures."""

    exit_code = 3


class StiffFailure(NumericalError):
    """The ODE integrator exceeded its step budget or failed."""


class DegenerateMatch(NumericalError):
    """The incident amplitude vanished while matching asymptotics."""


class FluxViolation(NumericalError):
    """A reference solution does not carry unit flux."""


class QuadratureFailure(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance."""
