"""Units, the potential catalogue, dispersion relations and extrema.

Every potential is an immutable dataclass exposing ``V(x)`` (vectorised,
smooth part only), its asymptotic values, delta interfaces, joints where the
profile is not smooth, and a characteristic length.  A :class:`Dispersion`
packages ``k^2(x) = (2m/hbar^2)(E - V(x))`` together with the truncation
window and the classically forbidden intervals, and is what the solver and
the bound machinery consume.
"""

from __future__ import annotations

import abc
import dataclasses
import math
import weakref
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, ClassVar

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.special import expit

from .errors import (
    BelowAsymptote,
    DomainError,
    NonconvergentTail,
    UnsupportedFamily,
)

__all__ = [
    "UnitsConvention",
    "DEFAULT_UNITS",
    "Potential",
    "Free",
    "Step",
    "Delta",
    "DoubleDelta",
    "SquareBarrier",
    "AsymSquareWell",
    "Tanh",
    "Sech2",
    "PoschlTeller",
    "Mobius",
    "Eckart",
    "RosenMorse",
    "Morse",
    "ManningRosen",
    "Hulthen",
    "Tietz",
    "Hua",
    "Sampled",
    "Shifted",
    "Dispersion",
    "ExtremumRecord",
    "asymptotic_wavenumbers",
    "build_dispersion",
    "canonicalize_mobius",
    "poschl_teller_from_mu",
    "find_extrema",
    "tail_tolerance",
    "standard_grid",
    "potential_from_dict",
    "potential_to_dict",
    "POTENTIAL_KINDS",
    "NAMED_FAMILIES",
]

ArrayLike = Any

# Relative threshold on |V - V_inf| that defines the truncation window.
TAIL_RTOL = 1e-10
# Absolute accuracy of forbidden-region endpoints.
TURNING_XTOL = 1e-12


def _sech2(s):
    """``sech^2`` that never overflows.

    Plain floats go through ``math``: quadrature evaluates one point at a
    time and numpy's per-call overhead dominates there.
    """
    if type(s) is float:
        t = math.exp(-2.0 * abs(s))
        return 4.0 * t / (1.0 + t) ** 2
    t = np.exp(-2.0 * np.abs(s))
    return 4.0 * t / (1.0 + t) ** 2


@dataclass(frozen=True)
class UnitsConvention:
    """Values of hbar and the particle mass.

    The defaults ``hbar = 1, mass = 1/2`` make ``2m/hbar^2 = 1`` so that
    ``k^2 = E - V``.
    """

    hbar: float = 1.0
    mass: float = 0.5

    def __post_init__(self) -> None:
        if not (self.hbar > 0 and self.mass > 0):
            raise DomainError("hbar and mass must be positive")

    @property
    def k2_factor(self) -> float:
        """The constant ``2m/hbar^2`` converting energies to ``k^2``."""
        return 2.0 * self.mass / self.hbar**2


DEFAULT_UNITS = UnitsConvention()


def tail_tolerance(E: float) -> float:
    """Threshold on ``|V - V_inf|`` below which the profile counts as flat."""
    return TAIL_RTOL * max(1.0, abs(E))


# ---------------------------------------------------------------------------
# Potential catalogue
# ---------------------------------------------------------------------------


class Potential(abc.ABC):
    """Abstract one-dimensional potential."""

    kind: ClassVar[str] = "abstract"

    @property
    @abc.abstractmethod
    def v_minus(self) -> float:
        """Limit of V as x -> -inf."""

    @property
    @abc.abstractmethod
    def v_plus(self) -> float:
        """Limit of V as x -> +inf."""

    @abc.abstractmethod
    def V(self, x: ArrayLike) -> np.ndarray:
        """Smooth part of the potential (delta interfaces excluded)."""

    @property
    def scale(self) -> float:
        """Characteristic length used for windows and difference steps."""
        return 1.0

    @property
    def center(self) -> float:
        return 0.0

    @property
    def deltas(self) -> tuple[tuple[float, float], ...]:
        """Delta interfaces as ``(x0, g)`` with ``psi'`` jumping by ``g psi``."""
        return ()

    @property
    def joints(self) -> tuple[float, ...]:
        """Points where V or its derivatives are discontinuous."""
        return ()

    @property
    def support(self) -> tuple[float, float] | None:
        """Finite interval outside which V equals its asymptotes exactly."""
        return None

    def dV(self, x: ArrayLike) -> np.ndarray:
        """Derivative of the smooth part; central differences by default."""
        x = np.asarray(x, dtype=float)
        h = 1e-6 * self.scale
        return (self.V(x + h) - self.V(x - h)) / (2.0 * h)

    @property
    def has_analytic_derivative(self) -> bool:
        return type(self).dV is not Potential.dV

    def mirrored(self) -> Potential:
        """The potential reflected through x = 0."""
        raise UnsupportedFamily(f"{self.kind} has no mirror implementation")

    def params(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}  # type: ignore[arg-type]


@dataclass(frozen=True)
class Free(Potential):
    """Constant potential."""

    v_inf: float = 0.0
    kind: ClassVar[str] = "free"

    @property
    def v_minus(self) -> float:
        return self.v_inf

    @property
    def v_plus(self) -> float:
        return self.v_inf

    def V(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.v_inf)

    def dV(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def support(self):
        return (-1.0, 1.0)

    def mirrored(self):
        return self


@dataclass(frozen=True)
class Step(Potential):
    """Sharp step from ``v_minus_`` to ``v_plus_`` at ``x0``."""

    v_left: float = 0.0
    v_right: float = 0.0
    x0: float = 0.0
    kind: ClassVar[str] = "step"

    @property
    def v_minus(self):
        return self.v_left

    @property
    def v_plus(self):
        return self.v_right

    def V(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < self.x0, self.v_left, self.v_right)

    def dV(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def joints(self):
        return (self.x0,)

    @property
    def support(self):
        return (self.x0 - 1.0, self.x0 + 1.0)

    @property
    def center(self):
        return self.x0

    def mirrored(self):
        return Step(self.v_right, self.v_left, -self.x0)


@dataclass(frozen=True)
class Delta(Potential):
    """Single delta interface of jump strength ``g = 2 m alpha / hbar^2``."""

    g: float = 1.0
    x0: float = 0.0
    kind: ClassVar[str] = "delta"

    @property
    def v_minus(self):
        return 0.0

    @property
    def v_plus(self):
        return 0.0

    def V(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def dV(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def deltas(self):
        return ((self.x0, self.g),)

    @property
    def support(self):
        return (self.x0 - 1.0, self.x0 + 1.0)

    @property
    def center(self):
        return self.x0

    def mirrored(self):
        return Delta(self.g, -self.x0)


@dataclass(frozen=True)
class DoubleDelta(Potential):
    """Two equal delta interfaces at ``-d/2`` and ``+d/2``."""

    g: float = 1.0
    d: float = 1.0
    kind: ClassVar[str] = "double_delta"

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError("separation d must be positive")

    @property
    def v_minus(self):
        return 0.0

    @property
    def v_plus(self):
        return 0.0

    def V(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def dV(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def deltas(self):
        return ((-0.5 * self.d, self.g), (0.5 * self.d, self.g))

    @property
    def scale(self):
        return self.d

    @property
    def support(self):
        return (-self.d, self.d)

    def mirrored(self):
        return self


@dataclass(frozen=True)
class SquareBarrier(Potential):
    """``V0`` on ``[0, L]``, zero elsewhere."""

    V0: float = 1.0
    L: float = 1.0
    kind: ClassVar[str] = "square_barrier"

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError("barrier width L must be positive")

    @property
    def v_minus(self):
        return 0.0

    @property
    def v_plus(self):
        return 0.0

    def V(self, x):
        if type(x) is float:
            return self.V0 if 0.0 <= x <= self.L else 0.0
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0.0) & (x <= self.L), self.V0, 0.0)

    def dV(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def scale(self):
        return self.L

    @property
    def center(self):
        return 0.5 * self.L

    @property
    def joints(self):
        return (0.0, self.L)

    @property
    def support(self):
        return (0.0, self.L)

    def mirrored(self):
        # The reflection of [0, L] is [-L, 0]; express it as a well with equal sides.
        return AsymSquareWell(0.0, self.V0, 0.0, -self.L, 0.0)


@dataclass(frozen=True)
class AsymSquareWell(Potential):
    """``V1`` for x < a, ``V2`` on (a, b), ``V3`` for x > b."""

    V1: float = 0.0
    V2: float = -1.0
    V3: float = 0.0
    a: float = 0.0
    b: float = 1.0
    kind: ClassVar[str] = "asym_square_well"

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError("AsymSquareWell requires a < b")

    @property
    def v_minus(self):
        return self.V1

    @property
    def v_plus(self):
        return self.V3

    def V(self, x):
        if type(x) is float:
            return self.V1 if x < self.a else (self.V2 if x <= self.b else self.V3)
        x = np.asarray(x, dtype=float)
        return np.where(x < self.a, self.V1, np.where(x <= self.b, self.V2, self.V3))

    def dV(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def scale(self):
        return self.b - self.a

    @property
    def center(self):
        return 0.5 * (self.a + self.b)

    @property
    def joints(self):
        return (self.a, self.b)

    @property
    def support(self):
        return (self.a, self.b)

    def mirrored(self):
        return AsymSquareWell(self.V3, self.V2, self.V1, -self.b, -self.a)


@dataclass(frozen=True)
class Tanh(Potential):
    """Smoothed step ``(V- + V+)/2 + (V+ - V-)/2 tanh(x/L)``."""

    v_left: float = 0.0
    v_right: float = 1.0
    L: float = 1.0
    kind: ClassVar[str] = "tanh"

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError("length L must be positive")

    @property
    def v_minus(self):
        return self.v_left

    @property
    def v_plus(self):
        return self.v_right

    def V(self, x):
        tanh = math.tanh if type(x) is float else np.tanh
        x = x if type(x) is float else np.asarray(x, dtype=float)
        return 0.5 * (self.v_left + self.v_right) + 0.5 * (self.v_right - self.v_left) * tanh(x / self.L)

    def dV(self, x):
        if type(x) is float:
            return 0.5 * (self.v_right - self.v_left) / self.L * _sech2(x / self.L)
        x = np.asarray(x, dtype=float)
        return 0.5 * (self.v_right - self.v_left) / self.L * _sech2(x / self.L)

    @property
    def scale(self):
        return self.L

    def mirrored(self):
        return Tanh(self.v_right, self.v_left, self.L)


@dataclass(frozen=True)
class Sech2(Potential):
    """``V_e sech^2(x/L)``."""

    Ve: float = 1.0
    L: float = 1.0
    kind: ClassVar[str] = "sech2"

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError("length L must be positive")

    @property
    def v_minus(self):
        return 0.0

    @property
    def v_plus(self):
        return 0.0

    def V(self, x):
        if type(x) is float:
            return self.Ve * _sech2(x / self.L)
        x = np.asarray(x, dtype=float)
        return self.Ve * _sech2(x / self.L)

    def dV(self, x):
        if type(x) is float:
            s = x / self.L
            return -2.0 * self.Ve / self.L * math.tanh(s) * _sech2(s)
        x = np.asarray(x, dtype=float)
        s = x / self.L
        return -2.0 * self.Ve / self.L * np.tanh(s) * _sech2(s)

    @property
    def scale(self):
        return self.L

    def mirrored(self):
        return self


@dataclass(frozen=True)
class PoschlTeller(Potential):
    """Re-grouped form ``V0 sech^2(x/L) + Vinf tanh(x/L)``.

    ``V(-inf) = -Vinf`` and ``V(+inf) = +Vinf``.  Use
    :func:`poschl_teller_from_mu` for the shifted squared-tanh form.
    """

    V0: float = 1.0
    Vinf: float = 0.0
    L: float = 1.0
    kind: ClassVar[str] = "poschl_teller"

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError("length L must be positive")

    @property
    def v_minus(self):
        return -self.Vinf

    @property
    def v_plus(self):
        return self.Vinf

    def V(self, x):
        if type(x) is float:
            s = x / self.L
            return self.V0 * _sech2(s) + self.Vinf * math.tanh(s)
        s = np.asarray(x, dtype=float) / self.L
        return self.V0 * _sech2(s) + self.Vinf * np.tanh(s)

    def dV(self, x):
        if type(x) is float:
            s = x / self.L
            return (-2.0 * self.V0 * math.tanh(s) + self.Vinf) * _sech2(s) / self.L
        s = np.asarray(x, dtype=float) / self.L
        sech2 = _sech2(s)
        return (-2.0 * self.V0 * np.tanh(s) * sech2 + self.Vinf * sech2) / self.L

    @property
    def scale(self):
        return self.L

    def mirrored(self):
        return PoschlTeller(self.V0, -self.Vinf, self.L)


def poschl_teller_from_mu(V0: float, mu: float, L: float) -> tuple[PoschlTeller, float, float]:
    """Convert ``V0 cosh^2(mu) {tanh((x - mu L)/L) + tanh(mu)}^2`` to re-grouped form.

    Returns ``(pt, offset, shift)`` with ``V_mu(x) = pt.V(x - shift) + offset``.
    """
    ch2 = math.cosh(mu) ** 2
    pt = PoschlTeller(V0=-V0 * ch2, Vinf=V0 * math.sinh(2.0 * mu), L=L)
    return pt, V0 * math.cosh(2.0 * mu), mu * L


@dataclass(frozen=True)
class Mobius(Potential):
    """``V0 + V1 [(A + B u)/(C + D u)]^2`` with ``u = exp(-2x/a)``."""

    V0: float = 0.0
    V1: float = 1.0
    A: float = 1.0
    B: float = 0.0
    C: float = 1.0
    D: float = 1.0
    a: float = 1.0
    kind: ClassVar[str] = "mobius"

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("length a must be positive")

    @property
    def v_minus(self):
        return self.V0 + self.V1 * (self.B / self.D) ** 2 if self.D != 0 else math.inf

    @property
    def v_plus(self):
        return self.V0 + self.V1 * (self.A / self.C) ** 2 if self.C != 0 else math.inf

    def ratio(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            # Scale by exp(2x/a) on the left half-line so nothing overflows.
            pos = x >= 0
            w = np.exp(-2.0 * np.abs(x) / self.a)
            num = np.where(pos, self.A + self.B * w, self.A * w + self.B)
            den = np.where(pos, self.C + self.D * w, self.C * w + self.D)
            return num / den

    def V(self, x):
        return self.V0 + self.V1 * self.ratio(x) ** 2

    @property
    def scale(self):
        return self.a

    def mirrored(self):
        # u -> 1/u swaps (A, B) and (C, D).
        return Mobius(self.V0, self.V1, self.B, self.A, self.D, self.C, self.a)


@dataclass(frozen=True)
class Eckart(Potential):
    """``-A xi/(1 - xi) - B xi/(1 - xi)^2`` with ``xi = -exp(2x/a)``."""

    A: float = 0.0
    B: float = 1.0
    a: float = 1.0
    kind: ClassVar[str] = "eckart"

    @property
    def v_minus(self):
        return 0.0

    @property
    def v_plus(self):
        return self.A

    def V(self, x):
        z = 2.0 * np.asarray(x, dtype=float) / self.a
        # -xi/(1 - xi) = e/(1 + e) and -xi/(1 - xi)^2 = e/(1 + e)^2 with e = exp(z).
        return self.A * expit(z) + self.B * expit(z) * expit(-z)

    @property
    def scale(self):
        return self.a


@dataclass(frozen=True)
class RosenMorse(Potential):
    """``B tanh(x/d) - C sech^2(x/d)``."""

    B: float = 0.0
    C: float = 1.0
    d: float = 1.0
    kind: ClassVar[str] = "rosen_morse"

    @property
    def v_minus(self):
        return -self.B

    @property
    def v_plus(self):
        return self.B

    def V(self, x):
        s = np.asarray(x, dtype=float) / self.d
        return self.B * np.tanh(s) - self.C * _sech2(s)

    @property
    def scale(self):
        return self.d


@dataclass(frozen=True)
class Morse(Potential):
    """``V0 (1 - exp(-(x - x0)/a))^2``."""

    V0: float = 1.0
    x0: float = 0.0
    a: float = 1.0
    kind: ClassVar[str] = "morse"

    @property
    def v_minus(self):
        return math.inf

    @property
    def v_plus(self):
        return self.V0

    def V(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            return self.V0 * (1.0 - np.exp(-(x - self.x0) / self.a)) ** 2

    @property
    def scale(self):
        return self.a


@dataclass(frozen=True)
class ManningRosen(Potential):
    """``B coth(x/d) - C cosech^2(x/d)``; singular at x = 0."""

    B: float = 1.0
    C: float = 1.0
    d: float = 1.0
    kind: ClassVar[str] = "manning_rosen"

    @property
    def v_minus(self):
        return -self.B

    @property
    def v_plus(self):
        return self.B

    def V(self, x):
        s = np.asarray(x, dtype=float) / self.d
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.B / np.tanh(s) - self.C / np.sinh(s) ** 2

    @property
    def scale(self):
        return self.d


@dataclass(frozen=True)
class Hulthen(Potential):
    """``V0 exp(-x/a)/(1 - exp(-x/a))``; singular at x = 0."""

    V0: float = 1.0
    a: float = 1.0
    kind: ClassVar[str] = "hulthen"

    @property
    def v_minus(self):
        return -self.V0

    @property
    def v_plus(self):
        return 0.0

    def V(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return self.V0 / np.expm1(x / self.a)

    @property
    def scale(self):
        return self.a


_TIETZ_DENOMINATORS = {"sinh": np.sinh, "cosh": np.cosh, "exp": np.exp}


@dataclass(frozen=True)
class Tietz(Potential):
    """``V0 (sinh((x - x0)/a) / f(x/a))^2`` with ``f`` one of sinh, cosh, exp."""

    V0: float = 1.0
    x0: float = 0.0
    a: float = 1.0
    denominator: str = "cosh"
    kind: ClassVar[str] = "tietz"

    def __post_init__(self):
        if self.denominator not in _TIETZ_DENOMINATORS:
            raise DomainError(f"Tietz denominator must be one of {sorted(_TIETZ_DENOMINATORS)}")

    @property
    def v_minus(self):
        if self.denominator == "exp":
            return math.inf
        sign = -1.0 if self.denominator == "sinh" else 1.0
        return self.V0 * math.exp(2.0 * self.x0 / self.a) * sign**2

    @property
    def v_plus(self):
        if self.denominator == "exp":
            return 0.25 * self.V0 * math.exp(-2.0 * self.x0 / self.a)
        return self.V0 * math.exp(-2.0 * self.x0 / self.a)

    def V(self, x):
        x = np.asarray(x, dtype=float)
        f = _TIETZ_DENOMINATORS[self.denominator]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return self.V0 * (np.sinh((x - self.x0) / self.a) / f(x / self.a)) ** 2

    @property
    def scale(self):
        return self.a


@dataclass(frozen=True)
class Hua(Potential):
    """``V0 ((1 - exp(-2x/a)) / (1 - q exp(-2x/a)))^2``."""

    V0: float = 1.0
    q: float = 0.5
    a: float = 1.0
    kind: ClassVar[str] = "hua"

    def __post_init__(self):
        if self.q == 0:
            raise DomainError("Hua potential requires q != 0")

    @property
    def v_minus(self):
        return self.V0 / self.q**2

    @property
    def v_plus(self):
        return self.V0

    def V(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            u = np.exp(-2.0 * x / self.a)
            return self.V0 * ((1.0 - u) / (1.0 - self.q * u)) ** 2

    @property
    def scale(self):
        return self.a


NAMED_FAMILIES: dict[str, type[Potential]] = {
    cls.kind: cls for cls in (Eckart, RosenMorse, Morse, ManningRosen, Hulthen, Tietz, Hua)
}


@dataclass(frozen=True, eq=False)
class Sampled(Potential):
    """Tabulated potential joined by monotone cubic interpolation.

    Outside the sampled range the profile is clamped to the asymptotes.
    """

    xs: tuple[float, ...] = ()
    vs: tuple[float, ...] = ()
    v_left: float = 0.0
    v_right: float = 0.0
    kind: ClassVar[str] = "sampled"

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if xs.ndim != 1 or len(xs) < 2 or len(xs) != len(self.vs):
            raise DomainError("Sampled needs matching x and V arrays with at least 2 points")
        if np.any(np.diff(xs) <= 0):
            raise DomainError("Sampled x values must be strictly increasing")
        object.__setattr__(self, "xs", tuple(float(v) for v in self.xs))
        object.__setattr__(self, "vs", tuple(float(v) for v in self.vs))

    @cached_property
    def _interp(self) -> PchipInterpolator:
        return PchipInterpolator(np.asarray(self.xs), np.asarray(self.vs), extrapolate=False)

    @property
    def v_minus(self):
        return self.v_left

    @property
    def v_plus(self):
        return self.v_right

    def V(self, x):
        x = np.asarray(x, dtype=float)
        inner = self._interp(np.clip(x, self.xs[0], self.xs[-1]))
        return np.where(x < self.xs[0], self.v_left, np.where(x > self.xs[-1], self.v_right, inner))

    def dV(self, x):
        x = np.asarray(x, dtype=float)
        d = self._interp.derivative()(np.clip(x, self.xs[0], self.xs[-1]))
        return np.where((x < self.xs[0]) | (x > self.xs[-1]), 0.0, d)

    @property
    def scale(self):
        return (self.xs[-1] - self.xs[0]) / 10.0

    @property
    def center(self):
        return 0.5 * (self.xs[0] + self.xs[-1])

    @property
    def joints(self):
        return (self.xs[0], self.xs[-1])

    @property
    def support(self):
        return (self.xs[0], self.xs[-1])

    def mirrored(self):
        return Sampled(tuple(-v for v in reversed(self.xs)), tuple(reversed(self.vs)), self.v_right, self.v_left)


@dataclass(frozen=True, eq=False)
class Shifted(Potential):
    """``base.V(x) + eps * dv(x)``; ``dv`` must vanish at both infinities."""

    base: Potential = field(default_factory=Free)
    eps: float = 0.0
    dv: Callable[[np.ndarray], np.ndarray] = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    dv_support: tuple[float, float] | None = None
    kind: ClassVar[str] = "shifted"

    def __post_init__(self):
        if isinstance(self.base, Shifted):
            raise DomainError("Shifted potentials may not be nested")

    @property
    def v_minus(self):
        return self.base.v_minus

    @property
    def v_plus(self):
        return self.base.v_plus

    def V(self, x):
        x = np.asarray(x, dtype=float)
        return self.base.V(x) + self.eps * np.asarray(self.dv(x), dtype=float)

    @property
    def scale(self):
        return self.base.scale

    @property
    def center(self):
        return self.base.center

    @property
    def deltas(self):
        return self.base.deltas

    @property
    def joints(self):
        extra = self.dv_support if self.dv_support is not None else ()
        return tuple(sorted(set(self.base.joints) | set(extra)))

    @property
    def support(self):
        if self.base.support is None or self.dv_support is None:
            return None
        lo = min(self.base.support[0], self.dv_support[0])
        hi = max(self.base.support[1], self.dv_support[1])
        return (lo, hi)

    def params(self):
        return {"base": potential_to_dict(self.base), "eps": self.eps, "dv_support": self.dv_support}


POTENTIAL_KINDS: dict[str, type[Potential]] = {
    cls.kind: cls
    for cls in (
        Free,
        Step,
        Delta,
        DoubleDelta,
        SquareBarrier,
        AsymSquareWell,
        Tanh,
        Sech2,
        PoschlTeller,
        Mobius,
        Sampled,
        *NAMED_FAMILIES.values(),
    )
}


def potential_from_dict(doc: Mapping[str, Any]) -> Potential:
    """Build a potential from a ``{"kind": ..., <params>}`` mapping."""
    doc = dict(doc)
    try:
        kind = doc.pop("kind")
    except KeyError:
        raise DomainError("potential document needs a 'kind' field") from None
    if kind == "shifted":
        raise UnsupportedFamily("shifted potentials carry a callable and cannot be read from text")
    try:
        cls = POTENTIAL_KINDS[kind]
    except KeyError:
        raise UnsupportedFamily(f"unknown potential kind {kind!r}") from None
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - names
    if unknown:
        raise DomainError(f"unknown fields for {kind}: {sorted(unknown)}")
    if cls is Sampled:
        doc["xs"] = tuple(doc.get("xs", ()))
        doc["vs"] = tuple(doc.get("vs", ()))
    return cls(**doc)


def potential_to_dict(p: Potential) -> dict[str, Any]:
    return {"kind": p.kind, **p.params()}


# ---------------------------------------------------------------------------
# Dispersion
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dispersion:
    """Evaluable ``k^2(x)`` with asymptotic wavenumbers and truncation window.

    ``deltas`` holds ``(x0, g)`` pairs: ``k^2`` contains ``-g delta(x - x0)``
    and ``psi'`` jumps by ``g psi(x0)``.  ``right_wave`` optionally returns
    ``(psi, psi')`` of the purely transmitted solution at the right edge of
    the window when the tail is not flat enough for a plane wave.
    """

    k2: Callable[[ArrayLike], np.ndarray]
    k_minus: float
    k_plus: float
    window: tuple[float, float]
    forbidden: tuple[tuple[float, float], ...] = ()
    joints: tuple[float, ...] = ()
    deltas: tuple[tuple[float, float], ...] = ()
    scale: float = 1.0
    k2_prime: Callable[[ArrayLike], np.ndarray] | None = None
    right_wave: Callable[[float], tuple[complex, complex]] | None = None
    potential: Potential | None = None
    energy: float | None = None
    units: UnitsConvention = DEFAULT_UNITS
    label: str = ""

    @property
    def forbidden_regions(self) -> tuple[tuple[float, float], ...]:
        return self.forbidden

    @property
    def symmetric_asymptotes(self) -> bool:
        return math.isclose(self.k_minus, self.k_plus, rel_tol=1e-12, abs_tol=0.0)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Joints, deltas and turning points inside the open window."""
        lo, hi = self.window
        pts = set(self.joints) | {x for x, _ in self.deltas}
        for a, b in self.forbidden:
            pts.update((a, b))
        return tuple(sorted(p for p in pts if lo < p < hi))

    def dk2(self, x: ArrayLike) -> np.ndarray:
        """Derivative of ``k^2``; analytic when available."""
        x = np.asarray(x, dtype=float)
        if self.k2_prime is not None:
            return np.asarray(self.k2_prime(x), dtype=float)
        h = 1e-6 * self.scale
        return (np.asarray(self.k2(x + h)) - np.asarray(self.k2(x - h))) / (2.0 * h)

    def d2k2(self, x: ArrayLike) -> np.ndarray:
        """Second derivative of ``k^2`` by central differences."""
        x = np.asarray(x, dtype=float)
        h = 1e-4 * self.scale
        if self.k2_prime is not None:
            return (np.asarray(self.k2_prime(x + h)) - np.asarray(self.k2_prime(x - h))) / (2.0 * h)
        return (np.asarray(self.k2(x + h)) - 2.0 * np.asarray(self.k2(x)) + np.asarray(self.k2(x - h))) / (h * h)

    def mirrored(self) -> Dispersion:
        k2 = self.k2
        kp = self.k2_prime
        return Dispersion(
            k2=lambda x: k2(-np.asarray(x, dtype=float)),
            k_minus=self.k_plus,
            k_plus=self.k_minus,
            window=(-self.window[1], -self.window[0]),
            forbidden=tuple(sorted((-b, -a) for a, b in self.forbidden)),
            joints=tuple(sorted(-x for x in self.joints)),
            deltas=tuple(sorted((-x, g) for x, g in self.deltas)),
            scale=self.scale,
            k2_prime=None if kp is None else (lambda x: -np.asarray(kp(-np.asarray(x, dtype=float)))),
            potential=None,
            energy=self.energy,
            units=self.units,
            label=f"mirror({self.label})",
        )


@dataclass(frozen=True)
class ExtremumRecord:
    """Interior extremum of ``k^2``."""

    x: float
    k2: float
    kind: str  # "peak" or "valley"


def asymptotic_wavenumbers(p: Potential, E: float, u: UnitsConvention = DEFAULT_UNITS) -> tuple[float, float]:
    """Return ``(k_-inf, k_+inf)`` for energy ``E``."""
    vmax = max(p.v_minus, p.v_plus)
    if not E > vmax:
        raise BelowAsymptote(f"E = {E} does not exceed max(V-inf, V+inf) = {vmax}")
    c = u.k2_factor
    return math.sqrt(c * (E - p.v_minus)), math.sqrt(c * (E - p.v_plus))


def _tail_edge(f: Callable[[float], float], start: float, direction: float, step: float, tol: float) -> float:
    """First point beyond which ``|f| < tol``, searching outward from ``start``."""
    inner = start
    dist = step
    outer = start + direction * dist
    for _ in range(200):
        # Require two consecutive flat samples to step over zero crossings.
        if abs(f(outer)) < tol and abs(f(outer + direction * 0.5 * dist)) < tol:
            break
        inner = outer
        dist *= 1.5
        outer = start + direction * dist
    else:
        raise NonconvergentTail("potential does not settle to its asymptote")
    if abs(f(inner)) < tol:
        return inner
    g = lambda x: abs(f(x)) - tol  # noqa: E731
    try:
        return brentq(g, inner, outer, xtol=1e-9 * step)
    except ValueError:
        return outer


def _window_for(p: Potential, E: float) -> tuple[float, float]:
    if p.support is not None:
        lo, hi = p.support
        for x0, _ in p.deltas:
            lo, hi = min(lo, x0), max(hi, x0)
        return (float(lo), float(hi))
    tol = tail_tolerance(E)
    c = p.center
    s = p.scale
    left = _tail_edge(lambda x: float(p.V(x)) - p.v_minus, c, -1.0, s, tol)
    right = _tail_edge(lambda x: float(p.V(x)) - p.v_plus, c, 1.0, s, tol)
    return (left, right)


def _scan_forbidden(
    k2: Callable[[ArrayLike], np.ndarray],
    window: tuple[float, float],
    joints: Sequence[float],
    n: int = 4097,
) -> tuple[tuple[float, float], ...]:
    lo, hi = window
    grid = np.union1d(np.linspace(lo, hi, n), [j for j in joints if lo <= j <= hi])
    vals = np.asarray(k2(grid), dtype=float)
    neg = vals < 0
    if not neg.any():
        return ()
    f = lambda x: float(k2(x))  # noqa: E731
    regions = []
    i = 0
    m = len(grid)
    while i < m:
        if not neg[i]:
            i += 1
            continue
        j = i
        while j + 1 < m and neg[j + 1]:
            j += 1
        a = brentq(f, grid[i - 1], grid[i], xtol=TURNING_XTOL) if i > 0 else grid[0]
        b = brentq(f, grid[j], grid[j + 1], xtol=TURNING_XTOL) if j + 1 < m else grid[-1]
        regions.append((float(a), float(b)))
        i = j + 1
    return tuple(regions)


def build_dispersion(p: Potential, E: float, u: UnitsConvention = DEFAULT_UNITS) -> Dispersion:
    """Construct the dispersion ``k^2(x) = (2m/hbar^2)(E - V(x))``."""
    k_minus, k_plus = asymptotic_wavenumbers(p, E, u)
    c = u.k2_factor
    if isinstance(p, Sampled):
        tol = tail_tolerance(E)
        if abs(p.vs[0] - p.v_left) > tol or abs(p.vs[-1] - p.v_right) > tol:
            raise NonconvergentTail("sampled profile does not reach its declared asymptotes")
    window = _window_for(p, E)

    def k2(x):
        return c * (E - p.V(x))

    k2_prime = None
    if p.has_analytic_derivative:
        k2_prime = lambda x: -c * p.dV(x)  # noqa: E731
    deltas = tuple(sorted((float(x0), float(g)) for x0, g in p.deltas))
    joints = tuple(sorted(set(float(j) for j in p.joints)))
    forbidden = _scan_forbidden(k2, window, joints)
    return Dispersion(
        k2=k2,
        k_minus=k_minus,
        k_plus=k_plus,
        window=window,
        forbidden=forbidden,
        joints=joints,
        deltas=deltas,
        scale=p.scale,
        k2_prime=k2_prime,
        potential=p,
        energy=E,
        units=u,
        label=p.kind,
    )


# ---------------------------------------------------------------------------
# Mobius canonical form
# ---------------------------------------------------------------------------


def _mobius_from_quadratic(c0: float, c1: float, c2: float, a: float, var: str) -> Mobius:
    """Rewrite ``c0 + c1 w + c2 w^2`` as a Mobius potential.

    ``w = tanh(x/a) = (1 - u)/(1 + u)`` or ``w = coth(x/a) = (1 + u)/(1 - u)``.
    """
    if c2 == 0:
        raise UnsupportedFamily(
            "profile is linear in the hyperbolic variable; a squared Mobius ratio has a "
            "double pole and cannot reproduce it"
        )
    delta = c1 / (2.0 * c2)
    v0 = c0 - c2 * delta**2
    if var == "tanh":
        return Mobius(v0, c2, 1.0 + delta, delta - 1.0, 1.0, 1.0, a)
    return Mobius(v0, c2, 1.0 + delta, 1.0 - delta, 1.0, -1.0, a)


def canonicalize_mobius(p: Potential) -> Mobius:
    """Express a named family, Poschl-Teller or sech^2 potential in Mobius form."""
    if isinstance(p, Mobius):
        return Mobius(p.V0, p.V1, p.A, p.B, p.C, p.D, p.a)
    if isinstance(p, PoschlTeller):
        return _mobius_from_quadratic(p.V0, p.Vinf, -p.V0, p.L, "tanh")
    if isinstance(p, Sech2):
        return _mobius_from_quadratic(p.Ve, 0.0, -p.Ve, p.L, "tanh")
    if isinstance(p, RosenMorse):
        return _mobius_from_quadratic(-p.C, p.B, p.C, p.d, "tanh")
    if isinstance(p, Eckart):
        # V = A (1 + t)/2 + B (1 - t^2)/4 with t = tanh(x/a).
        return _mobius_from_quadratic(0.5 * p.A + 0.25 * p.B, 0.5 * p.A, -0.25 * p.B, p.a, "tanh")
    if isinstance(p, ManningRosen):
        # cosech^2 = coth^2 - 1.
        return _mobius_from_quadratic(p.C, p.B, -p.C, p.d, "coth")
    if isinstance(p, Morse):
        return Mobius(0.0, p.V0, 1.0, -math.exp(p.x0 / p.a), 1.0, 0.0, 2.0 * p.a)
    if isinstance(p, Tietz):
        A, B = math.exp(-p.x0 / p.a), -math.exp(p.x0 / p.a)
        C, D = {"sinh": (1.0, -1.0), "cosh": (1.0, 1.0), "exp": (2.0, 0.0)}[p.denominator]
        return Mobius(0.0, p.V0, A, B, C, D, p.a)
    if isinstance(p, Hua):
        return Mobius(0.0, p.V0, 1.0, -1.0, 1.0, -p.q, p.a)
    if isinstance(p, Hulthen):
        raise UnsupportedFamily(
            "Hulthen profile V0/(exp(x/a) - 1) has a simple pole; a squared Mobius ratio "
            "always has a double pole, so no exact Mobius form exists"
        )
    raise UnsupportedFamily(f"no Mobius form for family {p.kind!r}")


def standard_grid(p: Potential, n: int = 101, span: float = 10.0) -> np.ndarray:
    """``n`` points spanning ``+-span`` length scales around the origin."""
    return np.linspace(-span * p.scale, span * p.scale, n)


# ---------------------------------------------------------------------------
# Extrema
# ---------------------------------------------------------------------------


def find_extrema(
    d: Dispersion,
    window: tuple[float, float] | None = None,
    n_scan: int = 2049,
) -> list[ExtremumRecord]:
    """Interior extrema of ``k^2`` ordered by position.

    Flat plateaus are reported at their midpoint.  Delta interfaces are not
    part of ``k^2`` and never produce extrema.
    """
    if n_scan < 3:
        raise DomainError("n_scan must be at least 3")
    key = (window, n_scan)
    memo = _EXTREMA_CACHE.setdefault(d, {})
    if key not in memo:
        memo[key] = tuple(_scan_extrema(d, window, n_scan))
    return list(memo[key])


# Extrema scans are reused by many bounds at one energy; keyed by dispersion identity.
_EXTREMA_CACHE: weakref.WeakKeyDictionary[Dispersion, dict] = weakref.WeakKeyDictionary()


def _scan_extrema(d: Dispersion, window: tuple[float, float] | None, n_scan: int) -> list[ExtremumRecord]:
    if window is None:
        # Pad so that flat asymptotic stretches bracket any edge plateau.
        lo, hi = d.window
        if not lo < hi:
            return []
        pad = 0.25 * (hi - lo)
        lo, hi = lo - pad, hi + pad
    else:
        lo, hi = window
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError("window must be finite and non-empty")
    width = hi - lo
    grid = np.linspace(lo, hi, n_scan)
    inner = [j for j in d.joints if lo < j < hi]
    if inner:
        eps = 1e-9 * width
        grid = np.union1d(grid, np.clip(np.concatenate([np.array(inner) - eps, np.array(inner) + eps]), lo, hi))
    vals = np.asarray(d.k2(grid), dtype=float)
    noise = 1e-13 * max(1.0, float(np.max(np.abs(vals))))

    # Compress runs of equal values into levels (index ranges).
    levels: list[tuple[int, int]] = []
    start = 0
    for i in range(1, len(grid)):
        if abs(vals[i] - vals[start]) > noise:
            levels.append((start, i - 1))
            start = i
    levels.append((start, len(grid) - 1))

    out: list[ExtremumRecord] = []
    for n in range(1, len(levels) - 1):
        i0, i1 = levels[n]
        prev_v = vals[levels[n - 1][1]]
        next_v = vals[levels[n + 1][0]]
        here = vals[i0]
        if here > prev_v and here > next_v:
            kind = "peak"
        elif here < prev_v and here < next_v:
            kind = "valley"
        else:
            continue
        a, b = grid[i0 - 1], grid[i1 + 1]
        flat = i1 - i0 >= 2
        if flat:
            x = _plateau_midpoint(d, grid, i0, i1, here, noise, width)
        else:
            x = _refine_extremum(d, a, b, width)
        out.append(ExtremumRecord(float(x), float(d.k2(x)), kind))
    return _alternate(out)


def _plateau_midpoint(d, grid, i0, i1, level, noise, width):
    inside = lambda x: abs(float(d.k2(x)) - level) <= noise  # noqa: E731

    def edge(out_x, in_x):
        for _ in range(200):
            if abs(in_x - out_x) <= 1e-12 * width:
                break
            mid = 0.5 * (out_x + in_x)
            if inside(mid):
                in_x = mid
            else:
                out_x = mid
        return 0.5 * (out_x + in_x)

    left = edge(grid[i0 - 1], grid[i0])
    right = edge(grid[i1 + 1], grid[i1])
    return 0.5 * (left + right)


def _refine_extremum(d: Dispersion, a: float, b: float, width: float) -> float:
    if d.k2_prime is not None:
        slope = lambda x: float(d.k2_prime(x))  # noqa: E731
    else:
        # Five-point stencil: a wider step keeps rounding noise out of the root.
        h = min(1e-3 * d.scale, 0.25 * (b - a))

        def slope(x):
            f = d.k2(np.array([x - 2 * h, x - h, x + h, x + 2 * h]))
            return float((f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h))

    fa, fb = slope(a), slope(b)
    if fa * fb < 0:
        return brentq(slope, a, b, xtol=1e-12 * width)
    # Kink (derivative does not change sign continuously): take the best sample.
    xs = np.linspace(a, b, 65)
    v = np.asarray(d.k2(xs))
    mid = float(d.k2(0.5 * (a + b)))
    return float(xs[np.argmax(v)] if mid >= max(float(d.k2(a)), float(d.k2(b))) else xs[np.argmin(v)])


def _alternate(records: list[ExtremumRecord]) -> list[ExtremumRecord]:
    """Merge neighbouring records of the same kind, keeping the more extreme one."""
    out: list[ExtremumRecord] = []
    for r in records:
        if out and out[-1].kind == r.kind:
            keep = max if r.kind == "peak" else min
            out[-1] = keep(out[-1], r, key=lambda e: e.k2)
        else:
            out.append(r)
    return out
