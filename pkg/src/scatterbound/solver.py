"""Numeric scattering solver and real monodromy matrices.

The stationary problem ``psi'' + k^2(x) psi = 0`` is solved by propagating
the real 2x2 fundamental matrix from the right edge of the window to the left
edge.  The transmitted wave is imposed analytically on the right, so under a
barrier the physical solution is the one that grows in the direction of
integration.  Delta interfaces act as exact jump matrices.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DegenerateMatch, DomainError, StiffFailure
from .model import Dispersion

__all__ = [
    "SolverConfig",
    "DEFAULT_SOLVER",
    "ScatteringResult",
    "MonodromyMatrix",
    "solve_scattering",
    "propagate",
    "monodromy_matrix",
    "bogoliubov_from_monodromy",
    "beta_lower_bound",
    "evolve_relative",
]


@dataclass(frozen=True)
class SolverConfig:
    """Integrator tolerances and window padding."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 1_000_000
    window_padding: float = 0.0

    def __post_init__(self) -> None:
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not (0 < v <= 1e-2):
                raise DomainError(f"{name} must lie in (0, 1e-2]")
        if self.max_steps < 1 or self.window_padding < 0:
            raise DomainError("max_steps must be positive and window_padding non-negative")


DEFAULT_SOLVER = SolverConfig()


@dataclass(frozen=True)
class ScatteringResult:
    """Amplitudes for a wave incident from the left.

    ``alpha`` and ``beta`` satisfy ``|alpha|^2 - |beta|^2 = 1`` with
    ``t = 1/alpha`` and ``r = beta/alpha``.  ``transfer`` maps ``(psi, psi')``
    at the right edge of ``window`` to the left edge.
    """

    t: complex
    r: complex
    T: float
    R: float
    alpha: complex
    beta: complex
    err_estimate: float
    transfer: np.ndarray = field(repr=False)
    window: tuple[float, float] = (0.0, 0.0)
    k_minus: float = 1.0
    k_plus: float = 1.0

    @property
    def errEstimate(self) -> float:
        return self.err_estimate

    def left_normalized(self) -> tuple[complex, complex]:
        """Bogoliubov pair for the solution that is ``e^{i k- x}/sqrt(k-)`` on the left.

        On the right that solution reads
        ``(alpha e^{i k+ x} + beta e^{-i k+ x})/sqrt(k+)``.
        """
        xl, xr = self.window
        km, kp = self.k_minus, self.k_plus
        left = np.array([1.0, 1j * km]) * cmath.exp(1j * km * xl) / math.sqrt(km)
        psi, dpsi = np.linalg.solve(self.transfer, left)
        a = 0.5 * (psi + dpsi / (1j * kp)) * cmath.exp(-1j * kp * xr) * math.sqrt(kp)
        b = 0.5 * (psi - dpsi / (1j * kp)) * cmath.exp(1j * kp * xr) * math.sqrt(kp)
        return complex(a), complex(b)


@dataclass(frozen=True)
class MonodromyMatrix:
    """Real unit-determinant matrix propagating ``(phi, pi/omega0)``."""

    a: float
    b: float
    c: float
    d: float
    interval: tuple[float, float] = (0.0, 0.0)
    det_drift: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c


def _rhs(k2: Callable) -> Callable:
    def f(x, y):
        q = float(k2(x))
        # y holds Y row-major; Y' = [[0, 1], [-k^2, 0]] Y.
        return np.array([y[2], y[3], -q * y[0], -q * y[1]])

    return f


def _integrate_segment(f, y0, x0, x1, cfg: SolverConfig) -> np.ndarray:
    if x0 == x1:
        return y0
    sol = solve_ivp(f, (x0, x1), y0, method="DOP853", rtol=cfg.rel_tol, atol=cfg.abs_tol)
    if sol.status != 0:
        raise StiffFailure(f"integration failed on [{x1}, {x0}]: {sol.message}")
    if sol.nfev > 12 * cfg.max_steps:
        raise StiffFailure("step budget exceeded")
    return sol.y[:, -1]


def propagate(
    k2: Callable,
    x_right: float,
    x_left: float,
    breakpoints: Sequence[float] = (),
    deltas: Sequence[tuple[float, float]] = (),
    cfg: SolverConfig = DEFAULT_SOLVER,
) -> tuple[np.ndarray, float]:
    """Fundamental matrix mapping ``(psi, psi')`` at ``x_right`` to ``x_left``.

    Returns the matrix projected to unit determinant and the determinant
    drift measured before projection.
    """
    jumps = {float(x): 0.0 for x, _ in deltas}
    for x, g in deltas:
        jumps[float(x)] += float(g)
    nodes = sorted({float(p) for p in breakpoints if x_left < p < x_right} | {x for x in jumps if x_left < x < x_right})
    f = _rhs(k2)
    y = np.array([1.0, 0.0, 0.0, 1.0])
    here = x_right
    if x_right in jumps:
        y = _jump_left(y, jumps[x_right])
    for x in reversed(nodes):
        y = _integrate_segment(f, y, here, x, cfg)
        if x in jumps:
            y = _jump_left(y, jumps[x])
        here = x
    y = _integrate_segment(f, y, here, x_left, cfg)
    if x_left in jumps and x_left != x_right:
        y = _jump_left(y, jumps[x_left])
    Y = y.reshape(2, 2)
    det = float(np.linalg.det(Y))
    if not det > 0:
        raise StiffFailure("fundamental matrix lost its determinant")
    return Y / math.sqrt(det), abs(det - 1.0)


def _jump_left(y: np.ndarray, g: float) -> np.ndarray:
    # Crossing a delta leftwards: psi' (left) = psi' (right) - g psi.
    return np.array([y[0], y[1], y[2] - g * y[0], y[3] - g * y[1]])


def solve_scattering(
    d: Dispersion,
    deltas: Sequence[tuple[float, float]] | None = None,
    cfg: SolverConfig = DEFAULT_SOLVER,
) -> ScatteringResult:
    """Transmission and reflection for a wave incident from the left."""
    km, kp = d.k_minus, d.k_plus
    if not (km > 0 and kp > 0):
        raise DomainError("asymptotic wavenumbers must be positive")
    jumps = tuple(d.deltas if deltas is None else deltas)
    xl = d.window[0] - cfg.window_padding
    xr = d.window[1] + cfg.window_padding
    Y, drift = propagate(d.k2, xr, xl, d.breakpoints, jumps, cfg)
    if d.right_wave is not None:
        out = np.array(d.right_wave(xr), dtype=complex)
    else:
        out = np.array([1.0, 1j * kp]) * cmath.exp(1j * kp * xr)
    psi, dpsi = Y @ out
    A = 0.5 * (psi + dpsi / (1j * km)) * cmath.exp(-1j * km * xl)
    B = 0.5 * (psi - dpsi / (1j * km)) * cmath.exp(1j * km * xl)
    if abs(A) == 0 or not np.isfinite(abs(A)):
        raise DegenerateMatch("incident amplitude vanished")
    T = (kp / km) / abs(A) ** 2
    R = abs(B / A) ** 2
    scale = math.sqrt(km / kp)
    err = max(drift, cfg.rel_tol, 8.0 * np.finfo(float).eps * float(np.max(np.abs(Y))) ** 2 / abs(A) ** 2)
    return ScatteringResult(
        t=complex(1.0 / (A * scale)),
        r=complex(B / A),
        T=float(T),
        R=float(R),
        alpha=complex(A * scale),
        beta=complex(B * scale),
        err_estimate=float(err),
        transfer=Y,
        window=(xl, xr),
        k_minus=km,
        k_plus=kp,
    )


# ---------------------------------------------------------------------------
# Time domain
# ---------------------------------------------------------------------------


def monodromy_matrix(
    omega2: Callable[[float], float],
    t_i: float,
    t_f: float,
    omega0: float,
    cfg: SolverConfig = DEFAULT_SOLVER,
    breakpoints: Sequence[float] = (),
) -> MonodromyMatrix:
    """Propagator of ``(phi, pi/omega0)`` from ``t_i`` to ``t_f``."""
    if not omega0 > 0:
        raise DomainError("omega0 must be positive")
    if not t_f > t_i:
        raise DomainError("need t_f > t_i")

    def f(t, y):
        w2 = float(omega2(t)) / omega0
        return np.array([omega0 * y[2], omega0 * y[3], -w2 * y[0], -w2 * y[1]])

    nodes = [t_i, *sorted(p for p in breakpoints if t_i < p < t_f), t_f]
    y = np.array([1.0, 0.0, 0.0, 1.0])
    for lo, hi in zip(nodes[:-1], nodes[1:]):
        y = _integrate_segment(f, y, lo, hi, cfg)
    M = y.reshape(2, 2)
    det = float(np.linalg.det(M))
    if not det > 0:
        raise StiffFailure("monodromy matrix lost its determinant")
    M = M / math.sqrt(det)
    return MonodromyMatrix(M[0, 0], M[0, 1], M[1, 0], M[1, 1], (t_i, t_f), abs(det - 1.0))


def bogoliubov_from_monodromy(M: MonodromyMatrix) -> tuple[float, float]:
    """``(|alpha|^2, |beta|^2)`` from the trace of ``T T^T``."""
    s = M.a**2 + M.b**2 + M.c**2 + M.d**2
    return 0.25 * (s + 2.0), 0.25 * (s - 2.0)


def beta_lower_bound(M: MonodromyMatrix) -> float:
    """Lower bound on ``|beta|^2`` from ``tr T^2``."""
    tr2 = M.a**2 + 2.0 * M.b * M.c + M.d**2
    return max(0.0, 0.25 * (abs(tr2) - 2.0))


# ---------------------------------------------------------------------------
# Interaction picture relative to a reference solution
# ---------------------------------------------------------------------------


class _Reference(Protocol):
    deltas: tuple[tuple[float, float], ...]
    window: tuple[float, float] | None
    joints: tuple[float, ...]

    def psi0(self, x: float) -> complex: ...

    def k0sq(self, x: float) -> float: ...


def evolve_relative(
    reference: _Reference,
    d: Dispersion,
    cfg: SolverConfig = DEFAULT_SOLVER,
) -> tuple[complex, complex]:
    """Coefficients ``(a, b)`` at ``+inf`` of ``psi = a psi0 + b conj(psi0)``.

    Starts from ``a = 1, b = 0`` at ``-inf``.  The reference must share the
    target's asymptotic wavenumbers.
    """
    lo, hi = d.window
    if reference.window is not None:
        lo, hi = min(lo, reference.window[0]), max(hi, reference.window[1])

    def rhs(x, y):
        p = complex(reference.psi0(x))
        dk = float(d.k2(x)) - float(reference.k0sq(x))
        a, b = y
        m2 = (p * p.conjugate()).real
        return np.array(
            [0.5j * dk * (a * m2 + b * p.conjugate() ** 2), -0.5j * dk * (a * p * p + b * m2)],
            dtype=complex,
        )

    jumps: dict[float, float] = {}
    for x, g in d.deltas:
        jumps[float(x)] = jumps.get(float(x), 0.0) + g
    for x, g in reference.deltas:
        jumps[float(x)] = jumps.get(float(x), 0.0) - g
    pts = set(d.breakpoints) | set(reference.joints) | set(jumps)
    nodes = [lo, *sorted(p for p in pts if lo < p < hi), hi]
    y = np.array([1.0 + 0j, 0j])
    for x0, x1 in zip(nodes[:-1], nodes[1:]):
        if x0 in jumps and jumps[x0] != 0.0:
            y = _relative_jump(y, reference.psi0(x0), jumps[x0])
        if x1 > x0:
            sol = solve_ivp(rhs, (x0, x1), y, method="DOP853", rtol=cfg.rel_tol, atol=cfg.abs_tol)
            if sol.status != 0:
                raise StiffFailure(sol.message)
            y = sol.y[:, -1]
    if hi in jumps and jumps[hi] != 0.0:
        y = _relative_jump(y, reference.psi0(hi), jumps[hi])
    return complex(y[0]), complex(y[1])


def _relative_jump(y: np.ndarray, p: complex, g: float) -> np.ndarray:
    # exp of a nilpotent generator: I - (i g/2) N.
    m2 = abs(p) ** 2
    N = np.array([[m2, p.conjugate() ** 2], [-(p * p), -m2]], dtype=complex)
    return (np.eye(2) - 0.5j * g * N) @ y
