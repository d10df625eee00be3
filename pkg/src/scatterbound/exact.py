"""Closed-form transmission, amplitudes and quasinormal modes.

Amplitudes use the flux-normalised convention: for a wave incident from the
left, ``psi = e^{i k- x} + r e^{-i k- x}`` on the left and
``psi = sqrt(k-/k+) t e^{i k+ x}`` on the right, so that ``|t|^2 + |r|^2 = 1``.

Notes on individual families
----------------------------
* Delta: ``t = 1/(1 + i g/2k)`` and ``r = -1/(1 - 2ik/g)``, obtained directly
  from the derivative jump ``psi'(0+) - psi'(0-) = g psi(0)``.
* Double delta at ``+-d/2``: ``t = k^2/((k + i k0)^2 + k0^2 e^{2ikd})`` with
  ``k0 = g/2``; transmission resonances sit at ``tan(kd) = -k/k0``.
* Poschl-Teller: the denominator carries ``cos(pi s)`` with
  ``s = sqrt(1 - 8 m V0 L^2/hbar^2)``, continued to ``cosh(pi sqrt(-s^2))``
  when the radicand is negative.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedFamily
from .model import (
    DEFAULT_UNITS,
    AsymSquareWell,
    Delta,
    DoubleDelta,
    Eckart,
    Free,
    PoschlTeller,
    Potential,
    RosenMorse,
    Sech2,
    SquareBarrier,
    Step,
    Tanh,
    UnitsConvention,
    asymptotic_wavenumbers,
)

__all__ = [
    "ExactAmplitudes",
    "QnmFrequency",
    "exact_transmission",
    "exact_reflection",
    "exact_amplitudes",
    "qnm",
    "qnm_denominator",
    "EXACT_FAMILIES",
]

_LN2 = math.log(2.0)
# Below this |q| L the sin(qL)/q factor switches to its Taylor series.
_SERIES_CUTOFF = 1e-6


@dataclass(frozen=True)
class ExactAmplitudes:
    """Flux-normalised transmission and reflection amplitudes."""

    t: complex
    r: complex
    convention: str = "flux-normalized"

    @property
    def T(self) -> float:
        return abs(self.t) ** 2

    @property
    def R(self) -> float:
        return abs(self.r) ** 2


@dataclass(frozen=True)
class QnmFrequency:
    """Pole of the transmission amplitude in the complex ``k_+`` plane."""

    k: complex
    n: int
    k_minus: complex
    branch: int = 0


def _sinc_len(q2: float, L: float) -> float:
    """``sin(qL)/q`` with ``q = sqrt(q2)`` continued to ``sinh`` for ``q2 < 0``."""
    x2 = q2 * L * L
    if abs(x2) < _SERIES_CUTOFF**2:
        return L * (1.0 - x2 / 6.0 + x2 * x2 / 120.0)
    if q2 > 0:
        q = math.sqrt(q2)
        return math.sin(q * L) / q
    kappa = math.sqrt(-q2)
    return math.sinh(kappa * L) / kappa


def _log_sinh(x: float) -> float:
    """``log(sinh x)`` for ``x > 0`` without overflow."""
    return x + math.log(-math.expm1(-2.0 * x)) - _LN2


def _log_cosh(x: float) -> float:
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x)) - _LN2


def _three_layer_T(k1: float, k3: float, k22: float, L: float) -> float:
    """Transmission through a flat layer of ``k^2 = k22`` and width ``L``."""
    S = _sinc_len(k22, L)
    num = 4.0 * k1 * k3
    coef = k1 * k1 * k3 * k3 + k22 * (k22 - k1 * k1 - k3 * k3)
    return num / ((k1 + k3) ** 2 + coef * S * S)


def _tanh_T(km: float, kp: float, L: float) -> float:
    a = math.pi * km * L
    b = math.pi * kp * L
    return (-math.expm1(-2.0 * a)) * (-math.expm1(-2.0 * b)) / math.expm1(-(a + b)) ** 2


def _pt_T(km: float, kp: float, V0: float, L: float, c: float) -> float:
    a = math.pi * km * L
    b = math.pi * kp * L
    s2 = 1.0 - 4.0 * c * V0 * L * L
    num = (-math.expm1(-2.0 * a)) * (-math.expm1(-2.0 * b))
    if s2 >= 0:
        extra = 2.0 * math.cos(math.pi * math.sqrt(s2)) * math.exp(-(a + b))
    else:
        sig = math.pi * math.sqrt(-s2)
        extra = math.exp(sig - (a + b)) + math.exp(-sig - (a + b))
    return num / (1.0 + math.exp(-2.0 * (a + b)) + extra)


def _sech2_T(k: float, Ve: float, L: float, c: float) -> float:
    x = math.pi * k * L
    s2 = 1.0 - 4.0 * c * Ve * L * L
    if s2 >= 0:
        cs = math.cos(0.5 * math.pi * math.sqrt(s2))
        if cs == 0.0:
            return 1.0
        log_ratio = math.log(abs(cs)) - _log_sinh(x)
    else:
        log_ratio = _log_cosh(0.5 * math.pi * math.sqrt(-s2)) - _log_sinh(x)
    return 1.0 / (1.0 + math.exp(2.0 * log_ratio))


def _as_poschl_teller(p: Potential) -> tuple[PoschlTeller, float] | None:
    """Families that are a Poschl-Teller profile plus a constant offset."""
    if isinstance(p, PoschlTeller):
        return p, 0.0
    if isinstance(p, RosenMorse):
        return PoschlTeller(-p.C, p.B, p.d), 0.0
    if isinstance(p, Eckart):
        return PoschlTeller(0.25 * p.B, 0.5 * p.A, p.a), 0.5 * p.A
    return None


EXACT_FAMILIES = (
    Free,
    Step,
    Delta,
    DoubleDelta,
    SquareBarrier,
    AsymSquareWell,
    Tanh,
    Sech2,
    PoschlTeller,
    RosenMorse,
    Eckart,
)


def exact_transmission(p: Potential, E: float, u: UnitsConvention = DEFAULT_UNITS) -> float:
    """Transmission probability from the family's closed form."""
    km, kp = asymptotic_wavenumbers(p, E, u)
    c = u.k2_factor
    if isinstance(p, Free):
        return 1.0
    if isinstance(p, Step):
        return 4.0 * km * kp / (km + kp) ** 2
    if isinstance(p, Delta):
        return 1.0 / (1.0 + p.g**2 / (4.0 * km * km))
    if isinstance(p, DoubleDelta):
        k = km
        x = p.g / k  # 2 k0 / k
        kd = k * p.d
        return 1.0 / (1.0 + (x * math.cos(kd) + 0.5 * x * x * math.sin(kd)) ** 2)
    if isinstance(p, SquareBarrier):
        return _three_layer_T(km, kp, c * (E - p.V0), p.L)
    if isinstance(p, AsymSquareWell):
        return _three_layer_T(km, kp, c * (E - p.V2), p.b - p.a)
    if isinstance(p, Tanh):
        return _tanh_T(km, kp, p.L)
    if isinstance(p, Sech2):
        return _sech2_T(km, p.Ve, p.L, c)
    pt = _as_poschl_teller(p)
    if pt is not None:
        fam, offset = pt
        km2, kp2 = asymptotic_wavenumbers(fam, E - offset, u)
        return _pt_T(km2, kp2, fam.V0, fam.L, c)
    raise UnsupportedFamily(f"no closed-form transmission for {p.kind!r}")


def exact_reflection(p: Potential, E: float, u: UnitsConvention = DEFAULT_UNITS) -> float:
    """Reflection probability; computed directly where cancellation matters."""
    if isinstance(p, Tanh):
        km, kp = asymptotic_wavenumbers(p, E, u)
        x = 0.5 * math.pi * abs(km - kp) * p.L
        y = 0.5 * math.pi * (km + kp) * p.L
        if x == 0:
            return 0.0
        return (math.exp(x - y) * (-math.expm1(-2.0 * x)) / (-math.expm1(-2.0 * y))) ** 2
    if isinstance(p, Delta):
        km, _ = asymptotic_wavenumbers(p, E, u)
        return 1.0 / (1.0 + 4.0 * km * km / p.g**2) if p.g != 0 else 0.0
    return 1.0 - exact_transmission(p, E, u)


# ---------------------------------------------------------------------------
# Amplitudes for piecewise-constant profiles via analytic layer matrices
# ---------------------------------------------------------------------------


def _basis(k: complex, x: float) -> np.ndarray:
    """Columns are (psi, psi') of the two basis waves of one flat layer."""
    if k == 0:
        return np.array([[1.0, x], [0.0, 1.0]], dtype=complex)
    e = cmath.exp(1j * k * x)
    return np.array([[e, 1.0 / e], [1j * k * e, -1j * k / e]], dtype=complex)


def _layer_amplitudes(ks: Sequence[complex], edges: Sequence[float], gs: Sequence[float]) -> ExactAmplitudes:
    """Amplitudes for layers ``ks[j]`` separated at ``edges[j]``.

    ``gs[j]`` is the delta strength sitting on ``edges[j]``.
    """
    coeff = np.array([1.0, 0.0], dtype=complex)
    for j in range(len(edges) - 1, -1, -1):
        x, g = edges[j], gs[j]
        jump_inv = np.array([[1.0, 0.0], [-g, 1.0]], dtype=complex)
        state = jump_inv @ (_basis(ks[j + 1], x) @ coeff)
        coeff = np.linalg.solve(_basis(ks[j], x), state)
    A, B = coeff
    km, kp = ks[0].real, ks[-1].real
    return ExactAmplitudes(t=complex(math.sqrt(kp / km) / A), r=complex(B / A))


def _layer_k(c: float, E: float, V: float) -> complex:
    return cmath.sqrt(c * (E - V))


def exact_amplitudes(p: Potential, E: float, u: UnitsConvention = DEFAULT_UNITS) -> ExactAmplitudes:
    """Transmission and reflection amplitudes for piecewise-constant families.

    Amplitude phases for the smooth families are outside the supported set.
    """
    km, kp = asymptotic_wavenumbers(p, E, u)
    c = u.k2_factor
    if isinstance(p, Free):
        return ExactAmplitudes(1.0 + 0j, 0j)
    if isinstance(p, Delta):
        k = km
        t = 1.0 / (1.0 + 1j * p.g / (2.0 * k))
        r = -1.0 / (1.0 - 2j * k / p.g) if p.g != 0 else 0j
        # Move the scatterer from the origin to x0.
        return ExactAmplitudes(t, r * cmath.exp(2j * k * p.x0))
    if isinstance(p, DoubleDelta):
        k, k0, d = km, 0.5 * p.g, p.d
        den = (k + 1j * k0) ** 2 + k0 * k0 * cmath.exp(2j * k * d)
        t = k * k / den
        r = -2j * k0 * (k * math.cos(k * d) + k0 * math.sin(k * d)) / den
        return ExactAmplitudes(t, r)
    if isinstance(p, Step):
        return _layer_amplitudes([km, kp], [p.x0], [0.0])
    if isinstance(p, SquareBarrier):
        return _layer_amplitudes([km, _layer_k(c, E, p.V0), kp], [0.0, p.L], [0.0, 0.0])
    if isinstance(p, AsymSquareWell):
        return _layer_amplitudes([km, _layer_k(c, E, p.V2), kp], [p.a, p.b], [0.0, 0.0])
    raise UnsupportedFamily(f"no closed-form amplitudes for {p.kind!r}")


# ---------------------------------------------------------------------------
# Quasinormal modes
# ---------------------------------------------------------------------------


def _split_sum(S: complex, D: float) -> tuple[complex, complex]:
    """``(k+, k-)`` from ``k+ + k- = S`` and ``k-^2 - k+^2 = D``."""
    kp = 0.5 * (S - D / S)
    return kp, S - kp


def qnm(p: Potential, n_range: Iterable[int], u: UnitsConvention = DEFAULT_UNITS) -> list[QnmFrequency]:
    """Closed-form transmission poles, damped (``Im k < 0``) branch."""
    c = u.k2_factor
    out: list[QnmFrequency] = []
    ns = list(n_range)
    if isinstance(p, Delta):
        if p.g == 0:
            return []
        k = -0.5j * p.g
        return [QnmFrequency(k, 0, k)]
    if isinstance(p, Tanh):
        D = c * (p.v_right - p.v_left)
        for n in ns:
            if n == 0:
                continue
            kp, km = _split_sum(-2j * n / p.L, D)
            out.append(QnmFrequency(kp, n, km))
        return out
    if isinstance(p, Sech2):
        s = cmath.sqrt(1.0 - 4.0 * c * p.Ve * p.L**2)
        for n in ns:
            if n < 0:
                continue
            for branch, sign in ((1, 1.0), (-1, -1.0)):
                k = -1j * (2 * n + 1 + sign * s) / (2.0 * p.L)
                if k == 0:
                    continue
                out.append(QnmFrequency(k, n, k, branch))
        return out
    pt = _as_poschl_teller(p)
    if pt is not None:
        fam, _ = pt
        s = cmath.sqrt(1.0 - 4.0 * c * fam.V0 * fam.L**2)
        D = 2.0 * c * fam.Vinf
        for n in ns:
            if n < 0:
                continue
            for branch, sign in ((1, 1.0), (-1, -1.0)):
                S = -1j * (2 * n + 1 + sign * s) / fam.L
                if S == 0:
                    continue
                kp, km = _split_sum(S, D)
                out.append(QnmFrequency(kp, n, km, branch))
        return out
    raise UnsupportedFamily(f"no closed-form quasinormal modes for {p.kind!r}")


def qnm_denominator(p: Potential, mode: QnmFrequency, u: UnitsConvention = DEFAULT_UNITS) -> complex:
    """The vanishing factor of the transmission denominator at ``mode``."""
    c = u.k2_factor
    k, km = mode.k, mode.k_minus
    if isinstance(p, Delta):
        return 1.0 + 1j * p.g / (2.0 * k)
    if isinstance(p, Tanh):
        return cmath.sinh(0.5 * math.pi * (km + k) * p.L)
    if isinstance(p, Sech2):
        s = cmath.sqrt(1.0 - 4.0 * c * p.Ve * p.L**2)
        return cmath.sinh(math.pi * k * p.L) ** 2 + cmath.cos(0.5 * math.pi * s) ** 2
    pt = _as_poschl_teller(p)
    if pt is not None:
        fam, _ = pt
        s = cmath.sqrt(1.0 - 4.0 * c * fam.V0 * fam.L**2)
        return cmath.cosh(math.pi * (km + k) * fam.L) + cmath.cos(math.pi * s)
    raise UnsupportedFamily(f"no closed-form quasinormal modes for {p.kind!r}")
