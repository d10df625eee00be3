"""Rigorous transmission bounds built on the functional

    theta(x) = sqrt(h'^2 + (k^2 - h^2)^2) / (2 h),

for any positive auxiliary function ``h`` with ``h -> k`` at both infinities:
``T >= sech^2(I)``, ``R <= tanh^2(I)``, ``|alpha| <= cosh(I)``,
``|beta| <= sinh(I)`` and ``N <= sinh^2(I)`` where ``I = int theta dx``.

A delta interface ``k^2 -> k^2 - g delta(x - x0)`` adds ``|g|/(2 h(x0))``
to ``I``; a jump of ``h`` at a joint adds ``|ln(h+/h-)|/2``.
"""

from __future__ import annotations

import math
import weakref
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    AsymmetricAsymptotes,
    DomainError,
    ParameterOutOfRange,
)
from .model import (
    DEFAULT_UNITS,
    Dispersion,
    ExtremumRecord,
    Potential,
    UnitsConvention,
    build_dispersion,
    find_extrema,
)
from .quadrature import DEFAULT_QUAD, QuadratureConfig, integrate, search_config

__all__ = [
    "BoundResult",
    "ConstantK",
    "PhaseEqualsK",
    "MaxClamp",
    "PowerInterp",
    "UserFunction",
    "AuxiliaryChoice",
    "TimeProfile",
    "vartheta",
    "vartheta_general",
    "theta_integral",
    "general_bound",
    "wrap_integral",
    "companions",
    "bound_case1",
    "case1_weakened",
    "bound_case2",
    "bound_case2_monotonic",
    "bound_case2_extremum",
    "bound_case2_multi",
    "bound_case3",
    "bound_case4",
    "wkb_estimate",
    "born_beta_estimate",
    "production_from_transmission",
    "transmission_from_production",
    "time_profile_dispersion",
    "time_domain_bounds",
    "time_bound_monotonic",
    "time_bound_extremum",
    "level_regions",
    "as_dispersion",
]

KINDS = ("lowerT", "upperT", "upperR", "upperAbsAlpha", "upperAbsBeta", "lowerAbsBeta", "upperN", "estimate")

# Relative mismatch between h and k at the window edges tolerated before
# the bound is declared divergent.
ASYMPTOTE_RTOL = 1e-6


@dataclass(frozen=True)
class BoundResult:
    """One bound (or estimate) together with its provenance."""

    kind: str
    value: float
    bound_id: str
    integral: float = 0.0
    quad_err: float = 0.0
    valid: bool = True
    reason: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise DomainError(f"unknown bound kind {self.kind!r}")

    def invalid(self, reason: str) -> BoundResult:
        return replace(self, valid=False, reason=reason)


def sech2(x: float) -> float:
    """``sech(x)^2`` without overflow."""
    x = abs(x)
    if x > 350:
        return 4.0 * math.exp(-2.0 * x)
    return 1.0 / math.cosh(x) ** 2


def wrap_integral(I: float, bound_id: str, err: float = 0.0, valid: bool = True, reason: str = "") -> BoundResult:
    """The ``lowerT = sech^2(I)`` result for an integral ``I``."""
    return BoundResult("lowerT", sech2(I), bound_id, I, err, valid, reason)


def companions(res: BoundResult) -> dict[str, BoundResult]:
    """All quantities implied by the integral behind a ``lowerT`` result."""
    I = res.integral
    t = math.tanh(I)
    base = dict(bound_id=res.bound_id, integral=I, quad_err=res.quad_err, valid=res.valid, reason=res.reason)
    big = I > 700
    return {
        "lowerT": res,
        "upperR": BoundResult("upperR", t * t, **base),
        "upperAbsAlpha": BoundResult("upperAbsAlpha", math.inf if big else math.cosh(I), **base),
        "upperAbsBeta": BoundResult("upperAbsBeta", math.inf if big else math.sinh(I), **base),
        "upperN": BoundResult("upperN", math.inf if big else math.sinh(I) ** 2, **base),
    }


def production_from_transmission(T: float) -> float:
    """Particle number ``N = (1 - T)/T``."""
    if not 0 < T <= 1:
        raise DomainError("T must lie in (0, 1]")
    return (1.0 - T) / T


def transmission_from_production(N: float) -> float:
    if N < 0:
        raise DomainError("N must be non-negative")
    return 1.0 / (1.0 + N)


# ---------------------------------------------------------------------------
# Pointwise functionals
# ---------------------------------------------------------------------------


def vartheta(h: float, h_prime: float, k2: float) -> float:
    """``sqrt(h'^2 + (k^2 - h^2)^2) / (2h)``."""
    if not h > 0:
        raise DomainError("h must be positive")
    p = h_prime
    q = k2 - h * h
    return float(np.sqrt(p * p + q * q) / (2 * h))


def vartheta_general(phi_p: float, phi_pp: float, chi: float, chi_p: float, k2: float) -> float:
    """Extended functional with the second auxiliary function ``chi``.

    ``sqrt((phi'' + 2 chi phi')^2 + (k^2 + chi^2 + chi' - phi'^2)^2) / (2 phi')``.
    With ``chi = 0`` this is :func:`vartheta` with ``h = phi'``.
    """
    if not phi_p > 0:
        raise DomainError("phi' must be positive")
    h = phi_p
    p = phi_pp + 2 * chi * phi_p
    q = k2 + chi * chi + chi_p - h * h
    return float(np.sqrt(p * p + q * q) / (2 * h))


# ---------------------------------------------------------------------------
# Auxiliary functions
# ---------------------------------------------------------------------------


class AuxiliaryChoice:
    """Auxiliary function ``h(x) > 0`` and its derivative for a dispersion."""

    label = "aux"

    def functions(self, d: Dispersion) -> tuple[Callable[[float], float], Callable[[float], float]]:
        raise NotImplementedError

    def kinks(self, d: Dispersion) -> tuple[float, ...]:
        return ()


@dataclass(frozen=True)
class ConstantK(AuxiliaryChoice):
    """``h = k0``; ``None`` selects the common asymptotic wavenumber."""

    k0: float | None = None
    label = "constant"

    def value(self, d: Dispersion) -> float:
        if self.k0 is not None:
            if not self.k0 > 0:
                raise ParameterOutOfRange("k0 must be positive")
            return float(self.k0)
        return d.k_plus if d.symmetric_asymptotes else math.sqrt(d.k_minus * d.k_plus)

    def functions(self, d):
        h = self.value(d)
        return (lambda x: h), (lambda x: 0.0)


@dataclass(frozen=True)
class PhaseEqualsK(AuxiliaryChoice):
    """``h = k``; only defined when ``k^2 > 0`` everywhere."""

    label = "phase=k"

    def functions(self, d):
        def h(x):
            return math.sqrt(max(float(d.k2(x)), 1e-300))

        def hp(x):
            return float(d.dk2(x)) / (2.0 * h(x))

        return h, hp


@dataclass(frozen=True)
class MaxClamp(AuxiliaryChoice):
    """``h = sqrt(max(k^2, k0^2))``."""

    k0: float = 1.0
    label = "max-clamp"

    def functions(self, d):
        k0sq = self.k0 * self.k0
        if not self.k0 > 0:
            raise ParameterOutOfRange("k0 must be positive")

        def h(x):
            return math.sqrt(max(float(d.k2(x)), k0sq))

        def hp(x):
            q = float(d.k2(x))
            return float(d.dk2(x)) / (2.0 * math.sqrt(q)) if q > k0sq else 0.0

        return h, hp

    def kinks(self, d):
        return tuple(x for iv in level_regions(d, self.k0 * self.k0) for x in iv)


@dataclass(frozen=True)
class PowerInterp(AuxiliaryChoice):
    """``h = k^eps k0^(1 - eps)`` interpolating between constant and ``h = k``."""

    eps: float = 0.5
    k0: float | None = None
    label = "power"

    def functions(self, d):
        if not 0 <= self.eps <= 1:
            raise ParameterOutOfRange("eps must lie in [0, 1]")
        k0 = self.k0 if self.k0 is not None else ConstantK().value(d)
        e = self.eps

        def h(x):
            k = math.sqrt(max(float(d.k2(x)), 1e-300))
            return k**e * k0 ** (1.0 - e)

        def hp(x):
            q = max(float(d.k2(x)), 1e-300)
            return 0.5 * e * h(x) * float(d.dk2(x)) / q

        return h, hp


@dataclass(frozen=True)
class UserFunction(AuxiliaryChoice):
    """Caller-supplied ``h`` and ``h'``."""

    h: Callable[[float], float] = lambda x: 1.0
    h_prime: Callable[[float], float] = lambda x: 0.0
    label = "user"

    def functions(self, d):
        return (lambda x: float(self.h(x))), (lambda x: float(self.h_prime(x)))


# ---------------------------------------------------------------------------
# Integration machinery
# ---------------------------------------------------------------------------


def as_dispersion(
    obj: Dispersion | Potential, E: float | None = None, u: UnitsConvention = DEFAULT_UNITS
) -> Dispersion:
    if isinstance(obj, Dispersion):
        return obj
    if E is None:
        raise DomainError("an energy is required when passing a potential")
    return build_dispersion(obj, E, u)


def level_regions(d: Dispersion, level: float, n: int = 4097) -> tuple[tuple[float, float], ...]:
    """Intervals inside the window where ``k^2 < level``."""
    memo = _LEVEL_CACHE.setdefault(d, {})
    if (level, n) not in memo:
        memo[(level, n)] = _scan_level(d, level, n)
    return memo[(level, n)]


_LEVEL_CACHE: weakref.WeakKeyDictionary[Dispersion, dict] = weakref.WeakKeyDictionary()


def _scan_level(d: Dispersion, level: float, n: int) -> tuple[tuple[float, float], ...]:
    lo, hi = d.window
    pts = [p for p in d.joints if lo <= p <= hi]
    grid = np.union1d(np.linspace(lo, hi, n), pts)
    f = lambda x: float(d.k2(x)) - level  # noqa: E731
    vals = np.asarray(d.k2(grid), dtype=float) - level
    below = vals < 0
    out = []
    i = 0
    m = len(grid)
    while i < m:
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < m and below[j + 1]:
            j += 1
        a = brentq(f, grid[i - 1], grid[i], xtol=1e-12) if i > 0 else grid[0]
        b = brentq(f, grid[j], grid[j + 1], xtol=1e-12) if j + 1 < m else grid[-1]
        out.append((float(a), float(b)))
        i = j + 1
    return tuple(out)


def theta_integral(
    d: Dispersion,
    integrand: Callable[[float], float],
    delta_weight: Callable[[float], float],
    extra_points: Iterable[float] = (),
    jumps: Callable[[float], float] | None = None,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> tuple[float, float]:
    """Integral of ``integrand`` over the line plus point contributions.

    The truncated tails are estimated conservatively as the edge value of the
    integrand times ``max(scale, half-width)``.
    """
    lo, hi = d.window
    pts = set(d.breakpoints) | set(float(p) for p in extra_points)
    val, err = integrate(integrand, lo, hi, pts, quad_cfg)
    half = 0.5 * (hi - lo)
    for outside in edge_points(d):
        tail = abs(integrand(outside)) * max(d.scale, half)
        val += tail
        err += tail
    for x0, g in d.deltas:
        val += abs(g) * delta_weight(x0)
    if jumps is not None:
        for j in d.joints:
            if lo <= j <= hi:
                val += jumps(j)
    return val, err


def edge_points(d: Dispersion) -> tuple[float, float]:
    """Points just outside the window where the profile is asymptotic."""
    lo, hi = d.window
    eta = 1e-9 * max(d.scale, 0.5 * (hi - lo))
    return lo - eta, hi + eta


def _log_jump(h: Callable[[float], float], scale: float, weight: Callable[[float], float] = lambda x: 1.0):
    def jump(x):
        eta = 1e-10 * scale
        a, b = h(x - eta), h(x + eta)
        return 0.5 * abs(math.log(b / a)) * weight(x)

    return jump


def _asymptote_mismatch(d: Dispersion, h: Callable[[float], float], target=None) -> str:
    for x, k in zip(edge_points(d), (d.k_minus, d.k_plus)):
        want = k if target is None else target(x, k)
        got = h(x)
        if abs(got - want) > ASYMPTOTE_RTOL * want:
            return (
                "auxiliary function does not approach the asymptotic wavenumber; value is the partial-window integral"
            )
    return ""


def general_bound(
    d: Dispersion,
    aux: AuxiliaryChoice | None = None,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
    bound_id: str = "general",
) -> BoundResult:
    """``T >= sech^2(int theta)`` for the given auxiliary function.

    Without ``aux`` a clamped choice ``h = max(k, k0)`` is optimised over
    ``k0``.  Use :func:`companions` for the matching R, alpha, beta, N bounds.
    """
    if aux is None:
        return _optimised_clamp(d, quad_cfg, bound_id)
    if isinstance(aux, PhaseEqualsK) and d.forbidden:
        I, err = _raw_general(d, MaxClamp(1e-8 * min(d.k_minus, d.k_plus)), quad_cfg)
        return wrap_integral(I, bound_id, err, False, "h = k requires k^2 > 0 everywhere")
    I, err = _raw_general(d, aux, quad_cfg)
    h, _ = aux.functions(d)
    reason = _asymptote_mismatch(d, h)
    return wrap_integral(I, bound_id, err, not reason, reason)


def _raw_general(d: Dispersion, aux: AuxiliaryChoice, quad_cfg: QuadratureConfig) -> tuple[float, float]:
    h, hp = aux.functions(d)
    k2 = d.k2

    def integrand(x):
        hx = h(x)
        p = hp(x)
        q = float(k2(x)) - hx * hx
        return np.sqrt(p * p + q * q) / (2 * hx)

    return theta_integral(
        d,
        integrand,
        lambda x0: 1.0 / (2 * h(x0)),
        aux.kinks(d),
        _log_jump(h, d.scale) if d.joints and not isinstance(aux, ConstantK) else None,
        quad_cfg,
    )


def _optimised_clamp(d: Dispersion, quad_cfg: QuadratureConfig, bound_id: str) -> BoundResult:
    kmin = min(d.k_minus, d.k_plus)

    coarse = search_config(quad_cfg)

    def neg(k0):
        return _raw_general(d, MaxClamp(k0), coarse)[0]

    res = minimize_scalar(
        neg, bounds=(1e-3 * kmin, kmin), method="bounded", options={"xatol": 1e-5 * kmin, "maxiter": 200}
    )
    k0 = float(res.x)
    # The end point k0 = min(k+-) is often optimal for barriers; compare explicitly.
    if neg(kmin) <= res.fun:
        k0 = kmin
    I, err = _raw_general(d, MaxClamp(k0), quad_cfg)
    return wrap_integral(I, bound_id, err)


# ---------------------------------------------------------------------------
# Special cases
# ---------------------------------------------------------------------------


def bound_case1(
    d: Dispersion | Potential,
    E: float | None = None,
    u: UnitsConvention = DEFAULT_UNITS,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> BoundResult:
    """``T >= sech^2((1/2k) int |k^2 - k_inf^2| dx)`` with constant ``h = k_inf``."""
    d = as_dispersion(d, E, u)
    if not d.symmetric_asymptotes:
        I, err = _raw_general(d, ConstantK(), quad_cfg)
        return wrap_integral(I, "case1", err, False, "asymptotic wavenumbers differ; integral diverges")
    I, err = _raw_general(d, ConstantK(d.k_plus), quad_cfg)
    return wrap_integral(I, "case1", err)


def case1_weakened(res: BoundResult) -> float:
    """Quadratic weakening ``1 - I^2 <= sech^2(I)`` of a case-1 result."""
    return 1.0 - res.integral**2


def _log_k_variation(d: Dispersion, extrema: Sequence[ExtremumRecord]) -> float:
    seq = [d.k_minus] + [math.sqrt(e.k2) for e in extrema] + [d.k_plus]
    with np.errstate(divide="ignore"):
        logs = np.log(seq)
    return float(np.sum(np.abs(np.diff(logs))))


def bound_case2(
    d: Dispersion | Potential, E: float | None = None, u: UnitsConvention = DEFAULT_UNITS, bound_id: str = "case2"
) -> BoundResult:
    """``h = k``: ``T >= sech^2(TV(ln k)/2)`` from the ordered extrema of ``k``.

    Delta interfaces add ``|g|/(2k(x0))``.  Invalid with a forbidden region.
    """
    d = as_dispersion(d, E, u)
    if d.forbidden:
        return BoundResult("lowerT", 0.0, bound_id, math.inf, 0.0, False, "requires k^2 > 0 everywhere")
    ext = find_extrema(d)
    I = 0.5 * _log_k_variation(d, ext)
    for x0, g in d.deltas:
        I += abs(g) / (2.0 * math.sqrt(float(d.k2(x0))))
    return wrap_integral(I, bound_id)


def bound_case2_monotonic(k_minus: float, k_plus: float) -> float:
    """``4 k+ k- / (k+ + k-)^2``."""
    _positive(k_minus, k_plus)
    return 4.0 * k_plus * k_minus / (k_plus + k_minus) ** 2


def bound_case2_extremum(k_minus: float, k_plus: float, k_ext: float) -> float:
    """``4 k+ k- k_e^2 / (k_e^2 + k+ k-)^2`` for a single extremum of ``k``."""
    _positive(k_minus, k_plus, k_ext)
    p = k_plus * k_minus
    return 4.0 * p * k_ext**2 / (k_ext**2 + p) ** 2


def bound_case2_multi(peaks: Sequence[float], valleys: Sequence[float], k_minus: float, k_plus: float) -> float:
    """Product form ``4 k+ k- P_e^2 / (P_p^2 + k+ k- P_v^2)^2``.

    ``peaks`` and ``valleys`` are values of ``k``.  This matches
    ``sech^2(TV(ln k)/2)`` when the profile runs peak, valley, ..., peak.
    """
    _positive(k_minus, k_plus, *peaks, *valleys)
    pp = float(np.prod(peaks)) if len(peaks) else 1.0
    pv = float(np.prod(valleys)) if len(valleys) else 1.0
    p = k_plus * k_minus
    return 4.0 * p * (pp * pv) ** 2 / (pp * pp + p * pv * pv) ** 2


def _positive(*vals: float) -> None:
    if not all(v > 0 for v in vals):
        raise DomainError("wavenumbers must be positive")


def _single_valley(d: Dispersion) -> tuple[bool, list[ExtremumRecord]]:
    ext = find_extrema(d)
    ok = len(ext) == 1 and ext[0].kind == "valley"
    return ok, ext


def _case3_value(d: Dispersion, k0: float, quad_cfg: QuadratureConfig) -> tuple[float, float, float]:
    regions = level_regions(d, k0 * k0)
    L = sum(b - a for a, b in regions)
    kap2 = 0.0
    err = 0.0
    for a, b in d.forbidden:
        v, e = integrate(lambda x: max(0.0, -float(d.k2(x))), a, b, d.breakpoints, quad_cfg)
        kap2 += v
        err += e
    B = kap2 / (2.0 * k0) + 0.5 * k0 * L
    for _, g in d.deltas:
        B += abs(g) / (2.0 * k0)
    s = math.sqrt(d.k_minus * d.k_plus)
    if B > 700:
        return 0.0, B, err
    return 4.0 / ((s / k0) * math.exp(B) + (k0 / s) * math.exp(-B)) ** 2, B, err


def bound_case3(
    d: Dispersion | Potential,
    k0: float | None = None,
    E: float | None = None,
    u: UnitsConvention = DEFAULT_UNITS,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> BoundResult:
    """Clamped bound for a single valley of ``k^2``.

    ``T >= 4 / ((sqrt(k+ k-)/k0) e^B + (k0/sqrt(k+ k-)) e^{-B})^2`` with
    ``B = (1/2k0) int kappa^2 + k0 L/2``, ``L`` the length where
    ``k^2 < k0^2``.  ``k0`` is optimised when omitted.
    """
    d = as_dispersion(d, E, u)
    kmin = min(d.k_minus, d.k_plus)
    if k0 is None:
        res = minimize_scalar(
            lambda k: -_case3_value(d, k, quad_cfg)[0],
            bounds=(1e-6 * kmin, kmin * (1 - 1e-9)),
            method="bounded",
            options={"xatol": 1e-6 * kmin, "maxiter": 200},
        )
        k0 = float(res.x)
    elif not 0 < k0 < kmin:
        raise ParameterOutOfRange("case 3 needs 0 < k0 < min(k-inf, k+inf)")
    value, B, err = _case3_value(d, k0, quad_cfg)
    single, _ = _single_valley(d)
    res = BoundResult("lowerT", value, "case3", B, err)
    if not single:
        return res.invalid("requires k^2 with a single valley and no peaks")
    return res


def _case4_value(d, k0, kappa_ext, kint, quad_cfg):
    inner = level_regions(d, k0 * k0)
    deep = level_regions(d, -k0 * k0)
    L = sum(b - a for a, b in inner) - sum(b - a for a, b in deep)
    log_val = 4 * math.log(k0) - math.log(d.k_minus * d.k_plus) - 2 * math.log(kappa_ext) - 2 * k0 * L - 2 * kint
    return math.exp(log_val), L


def bound_case4(
    d: Dispersion | Potential,
    k0: float | None = None,
    E: float | None = None,
    u: UnitsConvention = DEFAULT_UNITS,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> BoundResult:
    """Tunnelling bound for a single barrier with a forbidden region.

    ``T >= k0^4/(k- k+ kappa_ext^2) exp(-2 k0 L) exp(-2 int kappa)`` with
    ``L`` the width where ``-k0^2 < k^2 < k0^2``.
    """
    d = as_dispersion(d, E, u)
    single, ext = _single_valley(d)
    if not d.forbidden:
        return BoundResult("lowerT", 0.0, "case4", math.inf, 0.0, False, "requires a classically forbidden region")
    kint, err = 0.0, 0.0
    for a, b in d.forbidden:
        v, e = integrate(lambda x: math.sqrt(max(0.0, -float(d.k2(x)))), a, b, d.breakpoints, quad_cfg)
        kint += v
        err += e
    grid = np.linspace(d.window[0], d.window[1], 4097)
    kappa_ext = math.sqrt(max(0.0, -float(np.min(d.k2(grid)))))
    if ext:
        kappa_ext = max(kappa_ext, math.sqrt(max(0.0, -min(e.k2 for e in ext))))
    kmax = min(d.k_minus, d.k_plus, kappa_ext)
    if k0 is None:
        res = minimize_scalar(
            lambda k: -_case4_value(d, k, kappa_ext, kint, quad_cfg)[0],
            bounds=(1e-6 * kmax, kmax * (1 - 1e-9)),
            method="bounded",
            options={"xatol": 1e-6 * kmax, "maxiter": 200},
        )
        k0 = float(res.x)
    elif not 0 < k0 < kmax:
        raise ParameterOutOfRange("case 4 needs 0 < k0 < min(k-inf, k+inf, kappa_ext)")
    value, L = _case4_value(d, k0, kappa_ext, kint, quad_cfg)
    res = BoundResult("lowerT", min(value, 1.0), "case4", kint, err)
    if not single:
        return res.invalid("requires a single hump")
    if d.deltas:
        return res.invalid("delta interfaces are outside the hypotheses")
    return res


# ---------------------------------------------------------------------------
# Estimates
# ---------------------------------------------------------------------------


def wkb_estimate(d: Dispersion | Potential, E: float | None = None, u: UnitsConvention = DEFAULT_UNITS) -> BoundResult:
    """``sech^2(int kappa + ln 2)``; an estimate, not a bound."""
    d = as_dispersion(d, E, u)
    kint = 0.0
    for a, b in d.forbidden:
        kint += integrate(lambda x: math.sqrt(max(0.0, -float(d.k2(x)))), a, b, d.breakpoints)[0]
    I = kint + math.log(2.0)
    return BoundResult("estimate", sech2(I), "wkb-estimate", I)


def born_beta_estimate(
    d: Dispersion | Potential, E: float | None = None, u: UnitsConvention = DEFAULT_UNITS
) -> complex:
    """First Born approximation to ``beta``.

    ``beta ~ (i / 2k) int (k_inf^2 - k^2) e^{2ikx} dx``; delta interfaces
    contribute ``i g e^{2ik x0} / 2k``.
    """
    d = as_dispersion(d, E, u)
    if not d.symmetric_asymptotes:
        raise AsymmetricAsymptotes("the Born estimate needs equal asymptotic wavenumbers")
    k = d.k_plus
    lo, hi = d.window
    f = lambda x: k * k - float(d.k2(x))  # noqa: E731
    nodes = [lo, *d.breakpoints, hi]
    re = im = 0.0
    for a, b in zip(nodes[:-1], nodes[1:]):
        if b <= a:
            continue
        re += quad(f, a, b, weight="cos", wvar=2 * k, limit=400)[0]
        im += quad(f, a, b, weight="sin", wvar=2 * k, limit=400)[0]
    total = complex(re, im)
    for x0, g in d.deltas:
        total += g * complex(math.cos(2 * k * x0), math.sin(2 * k * x0))
    return 1j * total / (2.0 * k)


# ---------------------------------------------------------------------------
# Time domain
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TimeProfile:
    """Frequency profile ``omega^2(t)`` of a parametric oscillator."""

    omega2: Callable[[float], float]
    omega_minus: float
    omega_plus: float
    window: tuple[float, float]
    breakpoints: tuple[float, ...] = ()
    scale: float = 1.0

    @classmethod
    def square_pulse(cls, omega0: float, omega_in: float, t0: float, t1: float) -> TimeProfile:
        """``omega_in^2`` on ``[t0, t1]`` and ``omega0^2`` elsewhere; ``omega_in^2`` may be negative."""
        w0, w1 = omega0 * omega0, omega_in * abs(omega_in)

        def omega2(t):
            t = np.asarray(t, dtype=float)
            return np.where((t >= t0) & (t <= t1), w1, w0)

        return cls(omega2, omega0, omega0, (t0, t1), (t0, t1), t1 - t0)


def time_profile_dispersion(p: TimeProfile) -> Dispersion:
    """Relabel ``t -> x`` and ``omega -> k``."""
    from .model import _scan_forbidden

    if not (p.omega_minus > 0 and p.omega_plus > 0):
        raise DomainError("asymptotic frequencies must be positive")
    k2 = lambda t: np.asarray(p.omega2(t), dtype=float)  # noqa: E731
    return Dispersion(
        k2=k2,
        k_minus=p.omega_minus,
        k_plus=p.omega_plus,
        window=p.window,
        forbidden=_scan_forbidden(k2, p.window, p.breakpoints),
        joints=tuple(sorted(p.breakpoints)),
        scale=p.scale,
        label="time-profile",
    )


def time_domain_bounds(
    p: TimeProfile,
    aux: AuxiliaryChoice | None = None,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> dict[str, BoundResult]:
    """Bounds on ``|alpha|``, ``|beta|`` and ``N`` for a time profile."""
    base = general_bound(time_profile_dispersion(p), aux, quad_cfg)
    c = companions(base)
    return {k: c[k] for k in ("upperAbsAlpha", "upperAbsBeta", "upperN")}


def time_bound_monotonic(omega_minus: float, omega_plus: float) -> dict[str, float]:
    """Closed forms for a monotone ``omega(t)``."""
    _positive(omega_minus, omega_plus)
    s = 2.0 * math.sqrt(omega_minus * omega_plus)
    return {
        "upperAbsBeta": abs(omega_minus - omega_plus) / s,
        "upperAbsAlpha": (omega_minus + omega_plus) / s,
    }


def time_bound_extremum(omega0: float, omega_ext: float) -> dict[str, float]:
    """Closed forms for a single extremum with equal asymptotes ``omega0``."""
    _positive(omega0, omega_ext)
    beta = abs(omega_ext**2 - omega0**2) / (2.0 * omega0 * omega_ext)
    return {"upperAbsBeta": beta, "upperAbsAlpha": math.sqrt(1.0 + beta * beta)}
