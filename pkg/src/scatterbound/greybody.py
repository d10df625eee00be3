"""Greybody factors of a Schwarzschild black hole.

Spin-``s`` perturbations with angular momentum ``ell`` obey a flat wave
equation in the tortoise coordinate ``r* = r + 2m ln((r - 2m)/2m)`` with the
Regge-Wheeler barrier

    V(r) = (1 - 2m/r) [ell(ell+1)/r^2 + 2m(1 - s^2)/r^3].

Geometric units ``G = c = 1`` are used throughout, independently of any
:class:`~scatterbound.model.UnitsConvention`: ``k^2 = omega^2 - V``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import brentq
from scipy.special import lambertw

from .bounds import BoundResult, sech2
from .errors import DomainError, InsideHorizon
from .model import Dispersion
from .solver import DEFAULT_SOLVER, ScatteringResult, SolverConfig, solve_scattering

__all__ = [
    "GreybodyQuery",
    "RwPeak",
    "lambert_w0",
    "tortoise",
    "radius_from_tortoise",
    "regge_wheeler_potential",
    "rw_peak",
    "greybody_bound_1",
    "greybody_bound_2",
    "greybody_dispersion",
    "greybody_numeric",
]

# Left window edge: V below this fraction of omega^2.
HORIZON_TAIL = 1e-12


@dataclass(frozen=True)
class GreybodyQuery:
    """Black-hole mass ``m``, spin ``s``, angular momentum ``ell`` and frequency ``omega``."""

    m: float
    s: int
    ell: int
    omega: float

    def __post_init__(self) -> None:
        if not self.m > 0:
            raise DomainError("mass must be positive")
        if self.s not in (0, 1, 2):
            raise DomainError("spin must be 0, 1 or 2")
        if int(self.ell) != self.ell or self.ell < self.s:
            raise DomainError("ell must be an integer with ell >= s")
        if not self.omega > 0:
            raise DomainError("omega must be positive")

    @property
    def L(self) -> int:
        return self.ell * (self.ell + 1)

    @property
    def c(self) -> float:
        """Coefficient of the ``1/r^3`` term."""
        return 2.0 * self.m * (1 - self.s * self.s)


@dataclass(frozen=True)
class RwPeak:
    rPeak: float
    vPeak: float


def lambert_w0(x: ArrayLike) -> np.ndarray | float:
    """Principal branch of the Lambert W function for ``x >= 0``."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise DomainError("lambert_w0 is only provided for x >= 0")
    w = lambertw(arr, 0).real
    return float(w) if np.ndim(x) == 0 else w


def _w_of_exp(y: ArrayLike) -> np.ndarray:
    """``W(exp(y))`` without overflowing ``exp`` for large ``y``."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = y < 600.0
    out[small] = lambertw(np.exp(y[small]), 0).real
    big = ~small
    if big.any():
        yb = y[big]
        w = yb - np.log(yb)
        # Newton on w + ln w = y.
        for _ in range(8):
            w = w - (w + np.log(w) - yb) / (1.0 + 1.0 / w)
        out[big] = w
    return out


def _check_radius(r: np.ndarray, m: float) -> None:
    if np.any(r <= 2 * m):
        raise InsideHorizon("radius must exceed the horizon radius 2m")


def tortoise(r: ArrayLike, m: float) -> np.ndarray | float:
    """``r* = r + 2m ln((r - 2m)/2m)``."""
    ra = np.asarray(r, dtype=float)
    _check_radius(ra, m)
    out = ra + 2 * m * np.log((ra - 2 * m) / (2 * m))
    return float(out) if np.ndim(r) == 0 else out


def radius_from_tortoise(r_star: ArrayLike, m: float) -> np.ndarray | float:
    """Inverse of :func:`tortoise`: ``r = 2m [1 + W(exp((r* - 2m)/2m))]``."""
    y = (np.asarray(r_star, dtype=float) - 2 * m) / (2 * m)
    out = 2 * m * (1.0 + _w_of_exp(np.atleast_1d(y)))
    return float(out[0]) if np.ndim(r_star) == 0 else out.reshape(np.shape(r_star))


def regge_wheeler_potential(q: GreybodyQuery, r: ArrayLike) -> np.ndarray | float:
    ra = np.asarray(r, dtype=float)
    _check_radius(ra, q.m)
    out = (1 - 2 * q.m / ra) * (q.L / ra**2 + q.c / ra**3)
    return float(out) if np.ndim(r) == 0 else out


def _rw_dv_dr(q: GreybodyQuery, r):
    m, L, c = q.m, q.L, q.c
    return (2 * m / r**2) * (L / r**2 + c / r**3) + (1 - 2 * m / r) * (-2 * L / r**3 - 3 * c / r**4)


def rw_peak(q: GreybodyQuery, n_scan: int = 2048) -> RwPeak:
    """Location and height of the barrier maximum."""
    m = q.m
    if q.s == 1:
        return RwPeak(3 * m, q.L / (27 * m * m))
    if q.s == 0 and q.ell == 0:
        return RwPeak(8 * m / 3, 27 / (1024 * m * m))
    r = np.linspace(2 * m, 20 * m, n_scan + 1)[1:]
    dv = _rw_dv_dr(q, r)
    i = int(np.argmax(dv < 0))
    r_peak = brentq(lambda x: _rw_dv_dr(q, x), r[i - 1], r[i], xtol=1e-14 * m)
    return RwPeak(float(r_peak), float(regge_wheeler_potential(q, r_peak)))


def greybody_bound_1(q: GreybodyQuery) -> BoundResult:
    """``T >= sech^2(((ell+1)^2 + ell^2 - s^2) / (8 omega m))``, valid at every frequency."""
    I = ((q.ell + 1) ** 2 + q.ell**2 - q.s**2) / (8 * q.omega * q.m)
    return BoundResult("lowerT", sech2(I), "greybody-1", I)


def greybody_bound_2(q: GreybodyQuery) -> BoundResult:
    """``T >= 1 - V_peak^2 / (2 omega^2 - V_peak)^2``, valid above the barrier top."""
    w2 = q.omega**2
    vp = rw_peak(q).vPeak
    if q.s == 1:
        x = w2 * q.m**2
        val = 108 * x * (27 * x - q.L) / (54 * x - q.L) ** 2
    else:
        val = 1.0 - vp * vp / (2 * w2 - vp) ** 2
    res = BoundResult("lowerT", float(val), "greybody-2")
    if w2 <= vp:
        return res.invalid("omega^2 does not exceed the barrier height")
    return res


def _outgoing_series(q: GreybodyQuery, r: float, r_star: float) -> tuple[complex, complex]:
    """Asymptotic outgoing solution ``exp(i w r*) sum a_n r^-n`` and its r*-derivative."""
    w, m, L, c = q.omega, q.m, q.L, q.c
    a_prev, a = 0.0 + 0j, 1.0 + 0j
    f, fr = a, 0j
    # Individual coefficients can vanish exactly, so convergence and the onset
    # of asymptotic divergence are judged on pairs of consecutive terms.
    last = prev = math.inf
    for n in range(0, 400):
        a_next = ((n * (n + 1) - L) * a - (2 * m * (n * n - 1) + c) * a_prev) / (2j * w * (n + 1))
        term = a_next / r ** (n + 1)
        size = max(abs(term), last)
        if size > max(last, prev) or size < 1e-18 * abs(f):
            break
        prev, last = last, abs(term)
        f += term
        fr += -(n + 1) * term / r
        a_prev, a = a, a_next
    phase = np.exp(1j * w * r_star)
    psi = phase * f
    dpsi = phase * (1j * w * f + (1 - 2 * m / r) * fr)
    return complex(psi), complex(dpsi)


def _w_tortoise(x, m):
    y = (np.asarray(x, dtype=float) - 2 * m) / (2 * m)
    out = _w_of_exp(np.atleast_1d(y))
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def _v_tortoise(q: GreybodyQuery, x):
    """Barrier as a function of ``r*``, accurate arbitrarily close to the horizon."""
    W = _w_tortoise(x, q.m)
    r = 2 * q.m * (1 + W)
    # 1 - 2m/r = W/(1 + W) keeps relative accuracy as W -> 0.
    return W / (1 + W) * (q.L / r**2 + q.c / r**3)


def greybody_dispersion(q: GreybodyQuery) -> Dispersion:
    """``k^2(r*) = omega^2 - V(r(r*))`` on a truncated tortoise window.

    The horizon side is cut where ``V < 1e-12 omega^2``; beyond the right
    edge the outgoing wave is an asymptotic series in ``1/r``.
    """
    m, w = q.m, q.omega
    w2 = w * w

    def k2(x):
        return w2 - _v_tortoise(q, x)

    def k2p(x):
        W = _w_tortoise(x, m)
        r = 2 * m * (1 + W)
        return -_rw_dv_dr(q, r) * W / (1 + W)

    peak = rw_peak(q)
    x_peak = tortoise(peak.rPeak, m)
    target = HORIZON_TAIL * w2
    lo = x_peak - 2 * m
    while _v_tortoise(q, lo) > target:
        lo -= 8 * m
    r_lo = brentq(lambda x: math.log(_v_tortoise(q, x) / target), lo, x_peak)
    r_right = max(50 * m, (40 + 2 * q.L) / w)
    hi = tortoise(r_right, m)

    return Dispersion(
        k2=k2,
        k_minus=w,
        k_plus=w,
        window=(float(r_lo), float(hi)),
        scale=2 * m,
        k2_prime=k2p,
        right_wave=lambda x: _outgoing_series(q, 2 * m * (1 + _w_tortoise(x, m)), x),
        energy=w2,
        label=f"regge-wheeler s={q.s} ell={q.ell}",
    )


def greybody_numeric(q: GreybodyQuery, cfg: SolverConfig = DEFAULT_SOLVER) -> ScatteringResult:
    """Transmission probability through the Regge-Wheeler barrier."""
    return solve_scattering(greybody_dispersion(q), cfg=cfg)
