"""Piecewise adaptive quadrature over a window with known kinks."""

from __future__ import annotations

import warnings
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import DomainError, QuadratureFailure

__all__ = ["QuadratureConfig", "DEFAULT_QUAD", "integrate", "split_points", "search_config"]


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for adaptive Gauss-Kronrod quadrature."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    limit: int = 400
    # Absolute error above which a result is rejected outright.
    fail_tol: float = 1e-5

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.limit > 0):
            raise DomainError("quadrature tolerances must be positive")


DEFAULT_QUAD = QuadratureConfig()


def search_config(cfg: QuadratureConfig) -> QuadratureConfig:
    """Looser tolerances for objective evaluations inside a parameter search.

    Only the search uses these; the reported value is recomputed with ``cfg``.
    """
    return QuadratureConfig(max(cfg.abs_tol, 1e-7), max(cfg.rel_tol, 1e-7), cfg.limit, cfg.fail_tol)


def split_points(a: float, b: float, points: Iterable[float]) -> list[float]:
    """Sorted nodes ``a < p_1 < ... < b`` keeping only interior points."""
    inner = sorted({float(p) for p in points if a < p < b})
    return [a, *inner, b]


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    points: Iterable[float] = (),
    cfg: QuadratureConfig = DEFAULT_QUAD,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]`` piecewise between the given kinks.

    Returns ``(value, abs_error)``.
    """
    if b < a:
        v, e = integrate(f, b, a, points, cfg)
        return -v, e
    if a == b:
        return 0.0, 0.0
    nodes = split_points(a, b, points)
    total = 0.0
    err = 0.0
    for lo, hi in zip(nodes[:-1], nodes[1:]):
        if hi - lo <= 0:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            v, e = quad(f, lo, hi, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=cfg.limit)
        if not np.isfinite(v):
            raise QuadratureFailure(f"non-finite integral on [{lo}, {hi}]")
        total += v
        err += e
    if err > cfg.fail_tol * max(1.0, abs(total)):
        raise QuadratureFailure(f"quadrature error {err:.3g} exceeds tolerance")
    return total, err
