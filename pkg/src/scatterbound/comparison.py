"""Bounds relative to an exactly solvable reference potential.

A target wavefunction is written as ``psi = a psi0 + b conj(psi0)`` where
``psi0`` is the unit-flux reference solution that is a pure right-moving
wave at ``-inf``.  Then ``|a| = cosh(theta)``, ``|b| = sinh(theta)`` with

    theta <= (1/2) int |k^2 - k0^2| |psi0|^2 dx,

which brackets the target's Bogoliubov coefficients around the reference
ones.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import IntegrationWarning

from .bounds import BoundResult, sech2, theta_integral
from .errors import DomainError, FluxViolation, UnsupportedFamily
from .model import (
    DEFAULT_UNITS,
    Delta,
    Dispersion,
    Free,
    Potential,
    SquareBarrier,
    Step,
    UnitsConvention,
    build_dispersion,
)
from .quadrature import DEFAULT_QUAD, QuadratureConfig, integrate

__all__ = [
    "ReferenceSolution",
    "ThetaBudget",
    "PerturbationEstimates",
    "REFERENCE_FAMILIES",
    "reference_solution",
    "theta_bound",
    "bracket_transmission",
    "compose_bogoliubov_bounds",
    "perturbation_estimates",
]

REFERENCE_FAMILIES: tuple[type[Potential], ...] = (Free, Step, SquareBarrier, Delta)

FLUX_TOL = 1e-8
SMALLNESS_WARN = 0.3


def _cos_sinc(q2: complex, y: float) -> tuple[complex, complex, complex]:
    """``cos(q y)``, ``sin(q y)/q`` and ``q sin(q y)`` as entire functions of ``q^2``."""
    q = np.sqrt(complex(q2))
    qy = q * y
    c = np.cos(qy)
    if abs(qy) < 1e-8:
        s = y * (1 - qy * qy / 6)
    else:
        s = np.sin(qy) / q
    return c, s, q2 * s


@dataclass(frozen=True, eq=False)
class ReferenceSolution:
    """Unit-flux solution of a piecewise-constant reference with deltas.

    ``nodes`` are the layer boundaries, ``layer_k2`` holds ``k^2`` on each of
    the ``len(nodes) + 1`` layers and ``states`` the value and derivative of
    ``psi0`` at the left end of each finite layer (after any delta jump).
    """

    nodes: tuple[float, ...]
    layer_k2: tuple[float, ...]
    states: tuple[tuple[complex, complex], ...]
    k_minus: float
    k_plus: float
    alpha0: complex
    beta0: complex
    deltas: tuple[tuple[float, float], ...]
    potential: Potential
    energy: float

    @property
    def T0(self) -> float:
        return 1.0 / abs(self.alpha0) ** 2

    @property
    def joints(self) -> tuple[float, ...]:
        return self.nodes

    @property
    def window(self) -> tuple[float, float] | None:
        if not self.nodes:
            return None
        return (self.nodes[0], self.nodes[-1])

    def _state(self, x: float) -> tuple[complex, complex]:
        x = float(x)
        i = int(np.searchsorted(self.nodes, x, side="right"))
        if i == 0:
            k = self.k_minus
            e = np.exp(1j * k * x) / math.sqrt(k)
            return e, 1j * k * e
        x0 = self.nodes[i - 1]
        p, dp = self.states[i - 1]
        c, s, qs = _cos_sinc(self.layer_k2[i], x - x0)
        return p * c + dp * s, -p * qs + dp * c

    def psi0(self, x: float) -> complex:
        return complex(self._state(x)[0])

    def psi0_prime(self, x: float) -> complex:
        return complex(self._state(x)[1])

    def k0sq(self, x: float) -> float:
        i = int(np.searchsorted(self.nodes, float(x), side="right"))
        if i == 0:
            return self.k_minus * self.k_minus
        return self.layer_k2[i]

    def inverse_density(self, x: float) -> float:
        """``1/|psi0|^2``; exactly ``k_minus`` on the incident side."""
        if not self.nodes or x < self.nodes[0]:
            return self.k_minus
        return 1.0 / abs(self.psi0(x)) ** 2

    def density(self, x: float) -> float:
        return 1.0 / self.inverse_density(x)

    def flux(self, x: float) -> float:
        p, dp = self._state(x)
        return float((np.conj(p) * dp).imag)


def reference_solution(p: Potential, E: float, u: UnitsConvention = DEFAULT_UNITS) -> ReferenceSolution:
    """Closed-form reference solution for a free, step, square-barrier or delta potential."""
    if not isinstance(p, REFERENCE_FAMILIES):
        raise UnsupportedFamily(f"{p.kind} has no closed-form reference solution")
    d = build_dispersion(p, E, u)
    nodes = tuple(sorted(set(d.joints) | {x for x, _ in d.deltas}))
    jumps: dict[float, float] = {}
    for x0, g in d.deltas:
        jumps[x0] = jumps.get(x0, 0.0) + g
    mids = [nodes[0] - 1.0] if nodes else [0.0]
    mids += [0.5 * (a + b) for a, b in zip(nodes[:-1], nodes[1:])]
    if nodes:
        mids.append(nodes[-1] + 1.0)
    layer_k2 = [d.k_minus**2] + [float(d.k2(m)) for m in mids[1:-1]] + ([d.k_plus**2] if nodes else [])

    states: list[tuple[complex, complex]] = []
    k = d.k_minus
    if nodes:
        x = nodes[0]
        psi = np.exp(1j * k * x) / math.sqrt(k)
        dpsi = 1j * k * psi
        for i, x in enumerate(nodes):
            if i > 0:
                c, s, qs = _cos_sinc(layer_k2[i], x - nodes[i - 1])
                psi, dpsi = psi * c + dpsi * s, -psi * qs + dpsi * c
            dpsi = dpsi + jumps.get(x, 0.0) * psi
            states.append((complex(psi), complex(dpsi)))
        x_ref = nodes[-1]
        psi, dpsi = states[-1]
    else:
        x_ref = 0.0
        psi, dpsi = 1 / math.sqrt(k), 1j * math.sqrt(k)
    kp = d.k_plus
    sk = math.sqrt(kp)
    alpha0 = sk * (psi + dpsi / (1j * kp)) * np.exp(-1j * kp * x_ref) / 2
    beta0 = sk * (psi - dpsi / (1j * kp)) * np.exp(1j * kp * x_ref) / 2
    ref = ReferenceSolution(
        nodes=nodes,
        layer_k2=tuple(layer_k2) if nodes else (d.k_minus**2,),
        states=tuple(states),
        k_minus=d.k_minus,
        k_plus=kp,
        alpha0=complex(alpha0),
        beta0=complex(beta0),
        deltas=d.deltas,
        potential=p,
        energy=E,
    )
    _check_flux(ref)
    return ref


def _check_flux(ref: ReferenceSolution) -> None:
    probes = [ref.nodes[0] - 1.0] if ref.nodes else [0.0]
    probes += [0.5 * (a + b) for a, b in zip(ref.nodes[:-1], ref.nodes[1:])]
    if ref.nodes:
        probes.append(ref.nodes[-1] + 1.0)
    for x in probes:
        if abs(ref.flux(x) - 1.0) > FLUX_TOL:
            raise FluxViolation(f"reference flux {ref.flux(x):.12g} at x = {x:.6g}")
    if abs(abs(ref.alpha0) ** 2 - abs(ref.beta0) ** 2 - 1.0) > FLUX_TOL:
        raise FluxViolation("reference Bogoliubov coefficients are not normalised")


@dataclass(frozen=True)
class ThetaBudget:
    """Bound on the relative rotation ``theta`` and the reference's own ``theta0``."""

    thetaBound: float
    theta0: float
    quad_err: float = 0.0

    def __post_init__(self) -> None:
        if self.thetaBound < 0 or self.theta0 < 0:
            raise DomainError("theta budgets are non-negative")


def _theta0(T0: float) -> float:
    # arcsech(sqrt(T0)) = arccosh(1/sqrt(T0)), written to stay accurate near T0 = 1.
    return math.asinh(math.sqrt(max(0.0, 1.0 - T0) / T0))


def theta_bound(
    ref: ReferenceSolution,
    d: Dispersion,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> ThetaBudget:
    """``(1/2) int |k^2 - k0^2| |psi0|^2 dx`` including point masses of deltas."""
    if abs(d.k_minus - ref.k_minus) > 1e-12 * ref.k_minus or abs(d.k_plus - ref.k_plus) > 1e-12 * ref.k_plus:
        raise DomainError("reference and target must share their asymptotic wavenumbers")
    net: dict[float, float] = {}
    for x0, g in d.deltas:
        net[x0] = net.get(x0, 0.0) + g
    for x0, g in ref.deltas:
        net[x0] = net.get(x0, 0.0) - g
    lo, hi = d.window
    if ref.window is not None:
        lo, hi = min(lo, ref.window[0]), max(hi, ref.window[1])
    dd = replace(
        d,
        window=(lo, hi),
        deltas=tuple(sorted((x, g) for x, g in net.items() if g != 0.0)),
        joints=tuple(sorted(set(d.joints) | set(ref.joints))),
    )
    k2 = d.k2

    def integrand(x):
        q = float(k2(x)) - ref.k0sq(x)
        return np.sqrt(q * q) / (2 * ref.inverse_density(x))

    val, err = theta_integral(dd, integrand, lambda x0: 1.0 / (2 * ref.inverse_density(x0)), ref.joints, None, quad_cfg)
    return ThetaBudget(float(val), _theta0(ref.T0), float(err))


def bracket_transmission(ref: ReferenceSolution, budget: ThetaBudget) -> tuple[BoundResult, BoundResult]:
    """``sech^2(theta0 + thetaBound) <= T <= sech^2(theta0 - thetaBound)``.

    The upper bracket is flagged invalid when ``thetaBound >= theta0``.
    """
    if not math.isfinite(budget.thetaBound):
        raise DomainError("theta budget must be finite")
    t0, tb = budget.theta0, budget.thetaBound
    lower = BoundResult("lowerT", sech2(t0 + tb), "compare-lower", t0 + tb, budget.quad_err)
    upper = BoundResult("upperT", sech2(t0 - tb), "compare-upper", t0 - tb, budget.quad_err)
    if tb >= t0 and tb > 0:
        upper = upper.invalid("budget exceeds the reference rotation; only the trivial bound T <= 1 follows")
    return lower, upper


def compose_bogoliubov_bounds(betaE: float, betaDelta: float) -> tuple[float, float]:
    """Bounds on ``|beta|`` for a process split into two stages.

    ``|beta| <= sqrt(1+|bE|^2)|bD| + |bE| sqrt(1+|bD|^2)`` and the matching
    lower bound with a difference inside an absolute value.
    """
    if betaE < 0 or betaDelta < 0:
        raise DomainError("|beta| values are non-negative")
    a = math.sqrt(1 + betaE * betaE) * betaDelta
    b = betaE * math.sqrt(1 + betaDelta * betaDelta)
    return abs(a - b), a + b


@dataclass(frozen=True)
class PerturbationEstimates:
    """First-order response to ``V -> V + eps dv``.

    ``bAbsBound``, ``deltaT_bound`` and ``deltaN_bound`` are rigorous to first
    order; ``deltaT_est`` is the first-order estimate itself.
    """

    bAbsBound: float
    deltaT_est: float
    deltaT_bound: float
    deltaN_bound: float
    b_inf: complex
    smallness: float


def _dv_window(dv: Callable, center: float, scale: float, tol: float = 1e-14) -> tuple[float, float]:
    xs = center + scale * np.linspace(-1, 1, 401)
    peak = float(np.max(np.abs(dv(xs)))) if np.ndim(dv(xs)) else abs(float(dv(xs)))
    if peak == 0.0:
        return center, center
    half = scale
    for _ in range(200):
        if abs(float(dv(center - half))) <= tol * peak and abs(float(dv(center + half))) <= tol * peak:
            return center - half, center + half
        half *= 1.5
    raise DomainError("perturbation does not decay")


def perturbation_estimates(
    ref: ReferenceSolution,
    dv: Callable,
    eps: float,
    support: tuple[float, float] | None = None,
    u: UnitsConvention = DEFAULT_UNITS,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> PerturbationEstimates:
    """Distorted-wave first-order estimates for a small potential shift.

    ``support`` bounds where ``dv`` is non-negligible; it is searched for
    around the reference centre when omitted.
    """
    if support is None:
        c = ref.potential.center
        support = _dv_window(dv, c, max(ref.potential.scale, 1.0))
    lo, hi = support
    pts = [x for x in ref.nodes if lo < x < hi]
    f = u.k2_factor

    def absint(x):
        return abs(float(dv(x))) * ref.density(x)

    mass, _ = integrate(absint, lo, hi, pts, quad_cfg)
    smallness = abs(eps) * f * mass
    if smallness > SMALLNESS_WARN:
        warnings.warn(f"perturbation is not small (eps * int |dv||psi0|^2 = {smallness:.3g})", stacklevel=2)

    def part(fn):
        def g(x):
            return float(dv(x)) * fn(ref.psi0(x) ** 2)

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            return integrate(g, lo, hi, pts, quad_cfg)[0]

    overlap = complex(part(lambda z: z.real), part(lambda z: z.imag))
    # k^2 shifts by -f eps dv, so b' = -(i/2) dk^2 psi0^2 integrates to:
    b_inf = 0.5j * f * eps * overlap
    T0 = ref.T0
    N0 = abs(ref.beta0) ** 2
    deltaT = -2.0 * T0 * (np.conj(ref.beta0) * b_inf / ref.alpha0).real
    return PerturbationEstimates(
        bAbsBound=0.5 * abs(eps) * f * mass,
        deltaT_est=float(deltaT),
        deltaT_bound=abs(eps) * f * T0 * math.sqrt(max(0.0, 1.0 - T0)) * mass,
        deltaN_bound=abs(eps) * f * math.sqrt(N0 * (N0 + 1)) * mass,
        b_inf=complex(b_inf),
        smallness=smallness,
    )
