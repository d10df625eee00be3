"""Stable string identifiers for every bound and estimate."""

from __future__ import annotations

import math
from collections.abc import Callable

from . import bounds as B
from . import millergood as MG
from .bounds import BoundResult
from .errors import InputError, UnsupportedFamily
from .model import Dispersion, find_extrema

__all__ = ["BOUND_IDS", "ESTIMATE_IDS", "RIGOROUS_IDS", "evaluate_bound", "evaluate_bounds", "expand_bound_ids"]


def _case2a(d: Dispersion) -> BoundResult:
    res = BoundResult("lowerT", B.bound_case2_monotonic(d.k_minus, d.k_plus), "case2a")
    if d.forbidden:
        return res.invalid("requires k^2 > 0 everywhere")
    if d.deltas:
        return res.invalid("delta interfaces are outside the hypotheses")
    if find_extrema(d):
        return res.invalid("requires a monotonic k(x)")
    return res


def _case2b(d: Dispersion) -> BoundResult:
    if d.forbidden:
        return BoundResult("lowerT", 0.0, "case2b", valid=False, reason="requires k^2 > 0 everywhere")
    ext = find_extrema(d)
    if len(ext) != 1:
        return BoundResult("lowerT", 0.0, "case2b", valid=False, reason=f"requires one extremum, found {len(ext)}")
    res = BoundResult("lowerT", B.bound_case2_extremum(d.k_minus, d.k_plus, math.sqrt(ext[0].k2)), "case2b")
    if d.deltas:
        return res.invalid("delta interfaces are outside the hypotheses")
    return res


def _case2c(d: Dispersion) -> BoundResult:
    res = B.bound_case2(d, bound_id="case2c")
    if res.valid and d.deltas:
        return res.invalid("delta interfaces are outside the hypotheses")
    return res


def _wkb(d: Dispersion) -> BoundResult:
    res = B.wkb_estimate(d)
    return res if d.forbidden else res.invalid("no classically forbidden region")


def _born(d: Dispersion) -> BoundResult:
    beta = B.born_beta_estimate(d)
    return BoundResult("estimate", abs(beta), "born-estimate", reason="value is the estimated |beta|")


def _mg(form: int) -> Callable[[Dispersion], BoundResult]:
    return lambda d: MG.improved_bound(d, MG.default_choice(d, form))


_TABLE: dict[str, Callable[[Dispersion], BoundResult]] = {
    "general": B.general_bound,
    "case1": B.bound_case1,
    "case2": B.bound_case2,
    "case2a": _case2a,
    "case2b": _case2b,
    "case2c": _case2c,
    "case3": B.bound_case3,
    "case4": B.bound_case4,
    "wkb-estimate": _wkb,
    "born-estimate": _born,
    "mg-form1": _mg(1),
    "mg-form2": _mg(2),
    "mg-form3": _mg(3),
    "schwarzian": MG.schwarzian_bound,
    "low-energy": MG.low_energy_bound,
    "wkb-like": MG.wkb_like_bound,
    "delta-param": MG.delta_param_bound,
}

BOUND_IDS: tuple[str, ...] = tuple(_TABLE)
ESTIMATE_IDS: tuple[str, ...] = ("wkb-estimate", "born-estimate")
RIGOROUS_IDS: tuple[str, ...] = tuple(b for b in BOUND_IDS if b not in ESTIMATE_IDS)


def expand_bound_ids(spec: str | list[str] | tuple[str, ...]) -> tuple[str, ...]:
    """Parse ``"case1,case2"`` or ``"all"``; raises on unknown identifiers."""
    items = [s.strip() for s in spec.split(",")] if isinstance(spec, str) else list(spec)
    out: list[str] = []
    for s in items:
        if not s:
            continue
        if s == "all":
            out.extend(BOUND_IDS)
        elif s == "rigorous":
            out.extend(RIGOROUS_IDS)
        elif s in _TABLE:
            out.append(s)
        else:
            raise UnsupportedFamily(f"unknown bound id {s!r}; known: {', '.join(BOUND_IDS)}")
    return tuple(dict.fromkeys(out))


def evaluate_bound(bound_id: str, d: Dispersion) -> BoundResult:
    """Evaluate one bound; inapplicable inputs give an invalid result, not an error."""
    try:
        fn = _TABLE[bound_id]
    except KeyError:
        raise UnsupportedFamily(f"unknown bound id {bound_id!r}") from None
    try:
        return fn(d)
    except InputError as exc:
        kind = "estimate" if bound_id in ESTIMATE_IDS else "lowerT"
        return BoundResult(kind, math.nan, bound_id, math.nan, 0.0, False, str(exc))


def evaluate_bounds(bound_ids, d: Dispersion) -> list[BoundResult]:
    return [evaluate_bound(b, d) for b in expand_bound_ids(bound_ids)]
