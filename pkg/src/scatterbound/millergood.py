"""Changes of variable ``u(x) = U(X(x))/sqrt(X'(x))`` and the bounds they unlock.

Under such a map the wave equation keeps its form with

    K^2 = (1/X'^2) {k^2 - X'''/(2X') + (3/4)(X''/X')^2},

and transmission probabilities are unchanged.  Applying the basic bound in
the new variable gives bounds with two free functions, available in three
equivalent forms related by ``h = H J^2`` and ``j = X' = J^-2``.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass, replace
from typing import ClassVar

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .bounds import (
    BoundResult,
    TimeProfile,
    _log_jump,
    _single_valley,
    as_dispersion,
    companions,
    edge_points,
    level_regions,
    theta_integral,
    time_profile_dispersion,
    wrap_integral,
)
from .errors import DomainError, NonMonotoneMap, ParameterOutOfRange
from .model import DEFAULT_UNITS, Dispersion, Potential, UnitsConvention, find_extrema
from .quadrature import DEFAULT_QUAD, QuadratureConfig, integrate, search_config

__all__ = [
    "MgMap",
    "Form1",
    "Form2",
    "Form3",
    "mg_transform",
    "improved_bound",
    "default_choice",
    "schwarzian_bound",
    "low_energy_bound",
    "low_energy_threshold",
    "wkb_like_bound",
    "delta_param_bound",
    "production_bounds",
]

Fn = Callable[[float], float]
# Penalty recorded in quad_err when derivatives come from finite differences.
FD_PENALTY = 1e-6


def _fd(f: Fn, scale: float) -> Fn:
    h = 1e-6 * scale
    return lambda x: (f(x + h) - f(x - h)) / (2.0 * h)


@dataclass(frozen=True, eq=False)
class MgMap:
    """Monotone change of variables given through ``j = X'`` or ``J = X'^(-1/2)``.

    ``f``, ``fp``, ``fpp`` are the chosen function and its first two
    derivatives; ``representation`` is ``"j"`` or ``"J"``.
    """

    representation: str
    f: Fn
    fp: Fn
    fpp: Fn
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.representation not in ("j", "J"):
            raise DomainError("representation must be 'j' or 'J'")

    @classmethod
    def from_X(cls, Xp: Fn, Xpp: Fn, Xppp: Fn, scale: float = 1.0) -> MgMap:
        """Build from the derivatives of ``X`` directly."""
        return cls("j", Xp, Xpp, Xppp, scale)

    def j(self, x: float) -> float:
        v = float(self.f(x))
        return v if self.representation == "j" else v**-2

    def K2(self, k2: float, x: float) -> float:
        """Transformed ``K^2`` at the original coordinate ``x``."""
        f, fp, fpp = float(self.f(x)), float(self.fp(x)), float(self.fpp(x))
        if self.representation == "J":
            return f**4 * (k2 + fpp / f)
        return (k2 - 0.5 * fpp / f + 0.75 * (fp / f) ** 2) / (f * f)


def mg_transform(d: Dispersion, m: MgMap, n_grid: int = 4001) -> Dispersion:
    """The dispersion ``K^2(X)`` in the new coordinate.

    ``X`` is tabulated by quadrature on a grid over the window and inverted
    with a cubic spline.
    """
    lo, hi = d.window
    xs = np.linspace(lo, hi, n_grid)
    js = np.array([m.j(x) for x in xs])
    if np.any(js <= 0) or not np.all(np.isfinite(js)):
        raise NonMonotoneMap("X' must be positive on the window")
    X = np.zeros(n_grid)
    for i in range(1, n_grid):
        X[i] = X[i - 1] + integrate(m.j, xs[i - 1], xs[i])[0]
    inv = CubicSpline(X, xs)
    j_lo, j_hi = m.j(lo), m.j(hi)

    def k2_new(Xv):
        Xv = np.asarray(Xv, dtype=float)
        out = np.empty(Xv.shape)
        flat = out.reshape(-1)
        for i, v in enumerate(Xv.reshape(-1)):
            if v <= X[0]:
                flat[i] = d.k_minus**2 / j_lo**2
            elif v >= X[-1]:
                flat[i] = d.k_plus**2 / j_hi**2
            else:
                x = float(inv(v))
                flat[i] = m.K2(float(d.k2(x)), x)
        return out if Xv.ndim else float(out)

    to_X = CubicSpline(xs, X)
    return Dispersion(
        k2=k2_new,
        k_minus=d.k_minus / j_lo,
        k_plus=d.k_plus / j_hi,
        window=(float(X[0]), float(X[-1])),
        joints=tuple(float(to_X(x)) for x in d.joints),
        deltas=tuple((float(to_X(x)), g / m.j(x)) for x, g in d.deltas),
        scale=d.scale,
        energy=d.energy,
        units=d.units,
        label=f"mg({d.label})",
    )


# ---------------------------------------------------------------------------
# Improved bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Form3:
    """``(1/2H) sqrt((H' + 2H J'/J)^2 + (k^2 + J''/J - H^2)^2)``.

    ``H = None`` means the common asymptotic wavenumber; ``J = None`` means 1.
    Missing derivatives fall back to central differences.
    """

    H: Fn | None = None
    Hp: Fn | None = None
    J: Fn | None = None
    Jp: Fn | None = None
    Jpp: Fn | None = None
    kinks: tuple[float, ...] = ()
    form: ClassVar[int] = 3

    def to_form2(self, d: Dispersion) -> Form2:
        H, Hp, J, Jp, Jpp, _ = _resolve3(self, d)
        return Form2(
            h=lambda x: H(x) * J(x) ** 2,
            hp=lambda x: Hp(x) * J(x) ** 2 + 2.0 * H(x) * J(x) * Jp(x),
            J=J,
            Jp=Jp,
            Jpp=Jpp,
        )

    def to_form1(self, d: Dispersion) -> Form1:
        H, Hp, J, Jp, Jpp, _ = _resolve3(self, d)
        return Form1(
            h=lambda x: H(x) * J(x) ** 2,
            hp=lambda x: Hp(x) * J(x) ** 2 + 2.0 * H(x) * J(x) * Jp(x),
            j=lambda x: J(x) ** -2,
            jp=lambda x: -2.0 * Jp(x) * J(x) ** -3,
            jpp=lambda x: 6.0 * Jp(x) ** 2 * J(x) ** -4 - 2.0 * Jpp(x) * J(x) ** -3,
        )


@dataclass(frozen=True, eq=False)
class Form2:
    """``(1/2h) sqrt(h'^2 + (J^2 {k^2 + J''/J} - h^2/J^2)^2)``."""

    h: Fn
    hp: Fn | None = None
    J: Fn | None = None
    Jp: Fn | None = None
    Jpp: Fn | None = None
    kinks: tuple[float, ...] = ()
    form: ClassVar[int] = 2


@dataclass(frozen=True, eq=False)
class Form1:
    """``(1/2h) sqrt(h'^2 + ((1/j){k^2 - j''/2j + 3j'^2/4j^2} - j h^2)^2)``."""

    h: Fn
    hp: Fn | None = None
    j: Fn | None = None
    jp: Fn | None = None
    jpp: Fn | None = None
    kinks: tuple[float, ...] = ()
    form: ClassVar[int] = 1


MgBoundChoice = Form1 | Form2 | Form3


def _one(x: float) -> float:
    return 1.0


def _zero(x: float) -> float:
    return 0.0


def _resolve3(c: Form3, d: Dispersion):
    fd = False
    if c.H is None:
        kinf = d.k_plus if d.symmetric_asymptotes else math.sqrt(d.k_minus * d.k_plus)
        H, Hp = (lambda x: kinf), _zero
    else:
        H = c.H
        Hp = c.Hp if c.Hp is not None else _fd(c.H, d.scale)
        fd |= c.Hp is None
    if c.J is None:
        J, Jp, Jpp = _one, _zero, _zero
    else:
        J = c.J
        Jp = c.Jp if c.Jp is not None else _fd(c.J, d.scale)
        Jpp = c.Jpp if c.Jpp is not None else _fd(Jp, d.scale)
        fd |= c.Jp is None or c.Jpp is None
    return H, Hp, J, Jp, Jpp, fd


def _resolve_pair(f, fp, fpp, d, default):
    fd = False
    if f is None:
        return default, _zero, _zero, False
    if fp is None:
        fp = _fd(f, d.scale)
        fd = True
    if fpp is None:
        fpp = _fd(fp, d.scale)
        fd = True
    return f, fp, fpp, fd


def improved_bound(
    d: Dispersion,
    choice: MgBoundChoice | None = None,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> BoundResult:
    """Two-free-function lower bound on ``T`` in the requested form."""
    choice = Form3() if choice is None else choice
    k2 = d.k2
    bound_id = f"mg-form{choice.form}"
    if isinstance(choice, Form3):
        H, Hp, J, Jp, Jpp, fd = _resolve3(choice, d)

        def integrand(x):
            hx = H(x)
            p = Hp(x) + 2 * hx * Jp(x) / J(x)
            q = float(k2(x)) + Jpp(x) / J(x) - hx * hx
            return np.sqrt(p * p + q * q) / (2 * hx)

        weight = lambda x0: 1.0 / (2 * H(x0))  # noqa: E731
        edge = lambda x, k: k  # noqa: E731
        lead, jump_w = H, _one
    elif isinstance(choice, Form2):
        h = choice.h
        hp = choice.hp if choice.hp is not None else _fd(h, d.scale)
        J, Jp, Jpp, fd = _resolve_pair(choice.J, choice.Jp, choice.Jpp, d, _one)
        fd |= choice.hp is None

        def integrand(x):
            hx = h(x)
            Jx = J(x)
            p = hp(x)
            q = Jx * Jx * (float(k2(x)) + Jpp(x) / Jx) - hx * hx / (Jx * Jx)
            return np.sqrt(p * p + q * q) / (2 * hx)

        weight = lambda x0: J(x0) ** 2 / (2 * h(x0))  # noqa: E731
        edge = lambda x, k: J(x) ** 2 * k  # noqa: E731
        lead, jump_w = h, _one
    elif isinstance(choice, Form1):
        h = choice.h
        hp = choice.hp if choice.hp is not None else _fd(h, d.scale)
        j, jp, jpp, fd = _resolve_pair(choice.j, choice.jp, choice.jpp, d, _one)
        fd |= choice.hp is None

        def integrand(x):
            hx = h(x)
            jx = j(x)
            p = hp(x)
            r = jp(x) / jx
            q = (float(k2(x)) - 0.5 * jpp(x) / jx + 0.75 * r * r) / jx - jx * hx * hx
            return np.sqrt(p * p + q * q) / (2 * hx)

        weight = lambda x0: 1.0 / (2 * h(x0) * j(x0))  # noqa: E731
        edge = lambda x, k: k / j(x)  # noqa: E731
        lead, jump_w = h, _one
    else:
        raise DomainError("unknown bound choice")
    const_lead = isinstance(choice, Form3) and choice.H is None
    jumps = None if const_lead or not d.joints else _log_jump(lead, d.scale, jump_w)
    I, err = theta_integral(d, integrand, weight, choice.kinks, jumps, quad_cfg)
    reason = ""
    if fd:
        err += FD_PENALTY * (1.0 + I)
        reason = "derivatives from finite differences"
    for x, k in zip(edge_points(d), (d.k_minus, d.k_plus)):
        want = edge(x, k)
        if abs(lead(x) - want) > 1e-6 * want:
            return wrap_integral(
                I, bound_id, err, False, "free functions do not match the asymptotics; partial-window value"
            )
    return wrap_integral(I, bound_id, err, True, reason)


def default_choice(d: Dispersion, form: int = 3) -> MgBoundChoice:
    """``J = 1`` with ``H = max(k, k_min)``; used for the ``mg-form*`` ids."""
    kmin = min(d.k_minus, d.k_plus)
    k0sq = kmin * kmin

    def H(x):
        return math.sqrt(max(float(d.k2(x)), k0sq))

    def Hp(x):
        q = float(d.k2(x))
        return float(d.dk2(x)) / (2.0 * math.sqrt(q)) if q > k0sq else 0.0

    kinks = tuple(x for iv in level_regions(d, k0sq) for x in iv)
    c3 = Form3(H=H, Hp=Hp, J=_one, Jp=_zero, Jpp=_zero, kinks=kinks)
    if form == 3:
        return c3
    if form == 2:
        return replace(c3.to_form2(d), kinks=kinks)
    if form == 1:
        return replace(c3.to_form1(d), kinks=kinks)
    raise DomainError("form must be 1, 2 or 3")


# ---------------------------------------------------------------------------
# Specialisations
# ---------------------------------------------------------------------------


def schwarzian_bound(
    d: Dispersion | Potential,
    E: float | None = None,
    u: UnitsConvention = DEFAULT_UNITS,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> BoundResult:
    """``T >= sech^2((1/2) int |k^-1/2 (k^-1/2)''| dx)``.

    Needs ``k^2 > 0`` and a smooth profile.
    """
    d = as_dispersion(d, E, u)
    if d.forbidden:
        return BoundResult("lowerT", 0.0, "schwarzian", math.inf, 0.0, False, "requires k^2 > 0 everywhere")

    def integrand(x):
        q = float(d.k2(x))
        qp = float(d.dk2(x))
        qpp = float(d.d2k2(x))
        return 0.5 * abs(-0.25 * qpp * q**-1.5 + 0.3125 * qp * qp * q**-2.5)

    I, err = theta_integral(d, integrand, lambda x0: 0.0, (), None, quad_cfg)
    res = wrap_integral(I, "schwarzian", err)
    if d.deltas or d.joints:
        return res.invalid("requires a smooth profile without joints or delta interfaces")
    return res


def _kappa_variation(d: Dispersion, level: float = 0.0) -> float:
    """Total variation of ``sqrt(max(0, level - k^2))`` over the line."""
    ext = find_extrema(d)
    seq = [0.0] + [math.sqrt(max(0.0, level - e.k2)) for e in ext] + [0.0]
    return float(np.sum(np.abs(np.diff(seq))))


def _with_tails(f: Fn, d: Dispersion, quad_cfg: QuadratureConfig) -> tuple[float, float]:
    """Integral over the window plus the semi-infinite tails.

    Square roots of the potential decay too slowly for the window cut-off.
    """
    lo, hi = d.window
    val, err = integrate(f, lo, hi, d.breakpoints, quad_cfg)
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        # Start just outside the window so a jump at an edge stays out of the tails.
        out_lo, out_hi = edge_points(d)
        for a, b in ((-np.inf, out_lo), (out_hi, np.inf)):
            v, e = quad(f, a, b, epsabs=quad_cfg.abs_tol, epsrel=quad_cfg.rel_tol, limit=quad_cfg.limit)
            val += v
            err += e
    return val, err


def _excess_root(d: Dispersion) -> Fn:
    """``sqrt(max(0, k_inf^2 - k^2))`` without cancellation in the tails."""
    k = d.k_plus
    p = d.potential
    if p is not None and not p.deltas:
        c, vinf = d.units.k2_factor, p.v_plus
        return lambda x: math.sqrt(max(0.0, c * (float(p.V(x)) - vinf)))
    # Subtraction leaves sqrt(eps) noise where k^2 = k_inf^2.
    floor = 64.0 * np.finfo(float).eps * k * k

    def chi(x):
        v = k * k - float(d.k2(x))
        return math.sqrt(v) if v > floor else 0.0

    return chi


def low_energy_threshold(d: Dispersion) -> tuple[float, float]:
    """``(sqrt(Vmax), (1/2) int sqrt(2m) V / hbar)`` in ``k^2`` units.

    The low-energy bound beats case 1 at small energy when the first is smaller.
    """
    k = d.k_plus
    lo, hi = d.window
    kmin2 = float(np.min(d.k2(np.linspace(lo, hi, 4097))))
    vmax = max(0.0, k * k - kmin2)
    integral = _with_tails(lambda x: max(0.0, k * k - float(d.k2(x))), d, DEFAULT_QUAD)[0]
    return math.sqrt(vmax), 0.5 * integral


def low_energy_bound(
    d: Dispersion | Potential,
    E: float | None = None,
    u: UnitsConvention = DEFAULT_UNITS,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> BoundResult:
    """``T >= sech^2(sqrt(Vmax/E) + int sqrt(2mV)/hbar dx)`` for ``V >= V_inf``.

    Written with ``chi = sqrt(k_inf^2 - k^2)``: the first term is
    ``TV(chi)/(2 k_inf)``, equal to ``chi_max/k_inf`` for a single hump.
    """
    d = as_dispersion(d, E, u)
    k = d.k_plus
    chi = _excess_root(d)

    lo, hi = d.window
    I, err = _with_tails(chi, d, quad_cfg)
    I += _kappa_variation(d, k * k) / (2.0 * k)
    res = wrap_integral(I, "low-energy", err)
    if not d.symmetric_asymptotes:
        return res.invalid("requires equal asymptotic wavenumbers")
    if d.deltas:
        return res.invalid("delta interfaces are outside the hypotheses")
    grid = np.linspace(lo, hi, 4097)
    if np.any(np.asarray(d.k2(grid)) > k * k * (1 + 1e-12)):
        return res.invalid("requires V >= V_inf everywhere")
    return res


def wkb_like_bound(
    d: Dispersion | Potential,
    k0: float | None = None,
    E: float | None = None,
    u: UnitsConvention = DEFAULT_UNITS,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> BoundResult:
    """Bound with the barrier-penetration integral of WKB.

    ``sech^2(int kappa + kappa_max/k0 + k0 L/2 + int_{k^2>0} |k0^2 - k^2|/2k0)``
    where ``L`` is the forbidden width.  Only ``k0 = k_inf`` (the default)
    gives a convergent integral; other values are reported as invalid.
    """
    d = as_dispersion(d, E, u)
    kinf = d.k_plus if d.symmetric_asymptotes else math.sqrt(d.k_minus * d.k_plus)
    k0 = kinf if k0 is None else float(k0)
    if not k0 > 0:
        raise ParameterOutOfRange("k0 must be positive")
    lo, hi = d.window
    kap, err = 0.0, 0.0
    L = 0.0
    for a, b in d.forbidden:
        v, e = integrate(lambda x: math.sqrt(max(0.0, -float(d.k2(x)))), a, b, d.breakpoints, quad_cfg)
        kap += v
        err += e
        L += b - a

    def allowed(x):
        q = float(d.k2(x))
        return abs(k0 * k0 - q) / (2 * k0) if q > 0 else 0.0

    v, e = theta_integral(d, allowed, lambda x0: 1.0 / (2 * k0), [x for iv in d.forbidden for x in iv], None, quad_cfg)
    I = kap + _kappa_variation(d) / (2 * k0) + 0.5 * k0 * L + v
    res = wrap_integral(I, "wkb-like", err + e)
    if not d.symmetric_asymptotes or abs(k0 - kinf) > 1e-12 * kinf:
        return res.invalid("k0 must equal the common asymptotic wavenumber for convergence")
    return res


def _delta_param_value(d: Dispersion, Delta: float, quad_cfg: QuadratureConfig) -> tuple[float, float]:
    D2 = Delta * Delta
    err = 0.0
    area = 0.0
    for a, b in level_regions(d, D2):
        v, e = integrate(lambda x: math.sqrt(max(0.0, D2 - float(d.k2(x)))), a, b, d.breakpoints, quad_cfg)
        area += v
        err += e
    I = 0.5 * math.log(d.k_plus * d.k_minus / D2) + _kappa_variation(d, D2) / (2.0 * Delta) + area
    for _, g in d.deltas:
        I += abs(g) / (2.0 * Delta)
    return I, err


def delta_param_bound(
    d: Dispersion | Potential,
    Delta: float | None = None,
    E: float | None = None,
    u: UnitsConvention = DEFAULT_UNITS,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> BoundResult:
    """``sech^2(ln(k+ k-/D^2)/2 + max sqrt(D^2 - k^2)/D + int_{D^2>k^2} sqrt(D^2 - k^2))``.

    Requires a single valley of ``k^2`` and ``0 < D <= min(k+-)``; ``D`` is
    optimised when omitted (at most 200 evaluations).
    """
    d = as_dispersion(d, E, u)
    kmin = min(d.k_minus, d.k_plus)
    if Delta is None:
        coarse = search_config(quad_cfg)
        res = minimize_scalar(
            lambda D: _delta_param_value(d, D, coarse)[0],
            bounds=(1e-6 * kmin, kmin),
            method="bounded",
            options={"xatol": 1e-5 * kmin, "maxiter": 200},
        )
        Delta = float(res.x)
        if _delta_param_value(d, kmin, coarse)[0] <= res.fun:
            Delta = kmin
    elif not 0 < Delta <= kmin * (1 + 1e-12):
        raise ParameterOutOfRange("Delta must lie in (0, min(k-inf, k+inf)]")
    I, err = _delta_param_value(d, Delta, quad_cfg)
    res = wrap_integral(I, "delta-param", err)
    single, ext = _single_valley(d)
    if not (single or (not ext and not level_regions(d, Delta * Delta))):
        return res.invalid("requires a single-hump profile")
    return res


def production_bounds(
    p: TimeProfile,
    choice: MgBoundChoice | None = None,
    quad_cfg: QuadratureConfig = DEFAULT_QUAD,
) -> BoundResult:
    """``N <= sinh^2(I)`` for the improved integral on a time profile."""
    d = time_profile_dispersion(p)
    return companions(improved_bound(d, choice, quad_cfg))["upperN"]
