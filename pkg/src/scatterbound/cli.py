"""Command-line interface: ``scatterbound <subcommand> [options]``.

Every subcommand writes one table.  ``csv`` output has a header line and
floats with 17 significant digits; ``jsonl`` writes one object per row.
Exit codes: 0 success, 1 usage error, 2 unsupported input, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .comparison import bracket_transmission, reference_solution, theta_bound
from .errors import NumericalError, ScatterboundError
from .exact import exact_reflection, exact_transmission
from .greybody import GreybodyQuery, greybody_bound_1, greybody_bound_2, greybody_numeric
from .model import build_dispersion, potential_from_dict
from .registry import evaluate_bound, expand_bound_ids
from .solver import SolverConfig, solve_scattering

__all__ = ["RunSpec", "Grid", "main", "build_parser", "parse_grid", "parse_potential", "format_csv", "format_jsonl"]

Row = list[Any]

# Marks a row whose grid point hit a numerical failure.
FAILED = "failed: "


class UsageError(Exception):
    """Malformed command line; exit code 1."""


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    n: int
    log: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise UsageError("grid needs n >= 1")
        if self.n > 1 and not self.lo < self.hi:
            raise UsageError("grid needs lo < hi when n > 1")
        if self.log and self.lo <= 0:
            raise UsageError("log grids need lo > 0")

    def values(self) -> list[float]:
        if self.n == 1:
            return [self.lo]
        if self.log:
            return [float(v) for v in np.geomspace(self.lo, self.hi, self.n)]
        return [float(v) for v in np.linspace(self.lo, self.hi, self.n)]


@dataclass
class RunSpec:
    """Everything one invocation needs."""

    subcommand: str
    potential: dict | None = None
    reference: dict | None = None
    grid: Grid | None = None
    bounds: tuple[str, ...] = ()
    fmt: str = "csv"
    out: str | None = None
    tol: float | None = None
    plot: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def solver_config(self) -> SolverConfig:
        if self.tol is None:
            return SolverConfig()
        return SolverConfig(rel_tol=self.tol, abs_tol=min(1e-12, 1e-2 * self.tol))


def parse_grid(text: str) -> Grid:
    """``lo:hi:n[:log]`` or a single number."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return Grid(v, v, 1)
        if len(parts) in (3, 4):
            log = len(parts) == 4
            if log and parts[3] not in ("log", "lin"):
                raise UsageError(f"grid spacing must be 'log' or 'lin', got {parts[3]!r}")
            return Grid(float(parts[0]), float(parts[1]), int(parts[2]), log and parts[3] == "log")
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from None
    raise UsageError(f"grid must be lo:hi:n[:log], got {text!r}")


def _scalar(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_potential(text: str) -> dict:
    """A JSON file path, an inline JSON object, or ``kind=...,name=value,...``."""
    path = Path(text)
    if not text.lstrip().startswith("{") and "=" not in text and path.exists():
        text = path.read_text()
    text = text.strip()
    if text.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid potential JSON: {exc}") from None
    else:
        doc = {}
        for item in filter(None, (s.strip() for s in text.split(","))):
            if "=" not in item:
                raise UsageError(f"expected name=value in potential spec, got {item!r}")
            k, v = item.split("=", 1)
            doc[k.strip()] = _scalar(v.strip())
    if not isinstance(doc, dict) or "kind" not in doc:
        raise UsageError("potential spec needs a 'kind'")
    return doc


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    s = str(v)
    if any(c in s for c in ',"\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def format_csv(columns: Sequence[str], rows: Sequence[Row]) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def _json_value(v: Any) -> Any:
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def format_jsonl(columns: Sequence[str], rows: Sequence[Row]) -> str:
    return "".join(json.dumps({c: _json_value(v) for c, v in zip(columns, r)}) + "\n" for r in rows)


def _emit(spec: RunSpec, columns: Sequence[str], rows: Sequence[Row]) -> None:
    text = format_csv(columns, rows) if spec.fmt == "csv" else format_jsonl(columns, rows)
    if spec.out:
        Path(spec.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Grid evaluation
# ---------------------------------------------------------------------------


def _threads() -> int:
    raw = os.environ.get("SCATTERBOUND_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"SCATTERBOUND_THREADS must be an integer, got {raw!r}") from None


def _run(fn: Callable, tasks: list[tuple]) -> list:
    """Apply ``fn`` to every task, in input order, optionally in worker processes."""
    n = min(_threads(), len(tasks))
    if n <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, *zip(*tasks)))


def _point_exact(doc: dict, E: float) -> list[Row]:
    p = potential_from_dict(doc)
    return [[E, exact_transmission(p, E), exact_reflection(p, E)]]


def _point_solve(doc: dict, E: float, cfg: SolverConfig) -> list[Row]:
    p = potential_from_dict(doc)
    try:
        r = solve_scattering(build_dispersion(p, E), cfg=cfg)
    except NumericalError as exc:
        return [[E, math.nan, math.nan, math.nan, math.nan, math.nan, f"{FAILED}{type(exc).__name__}: {exc}"]]
    return [[E, r.T, r.R, abs(r.alpha), abs(r.beta), r.err_estimate, "ok"]]


def _point_bound(doc: dict, E: float, ids: tuple[str, ...]) -> list[Row]:
    d = build_dispersion(potential_from_dict(doc), E)
    rows = []
    for b in sorted(ids):
        try:
            res = evaluate_bound(b, d)
        except NumericalError as exc:
            rows.append([E, b, "lowerT", math.nan, False, math.nan, f"{FAILED}{type(exc).__name__}: {exc}"])
            continue
        rows.append([E, b, res.kind, res.value, res.valid, res.quad_err, res.reason])
    return rows


def _point_greybody(m: float, s: int, ell: int, omega: float, cfg: SolverConfig) -> list[Row]:
    q = GreybodyQuery(m, s, ell, omega)
    b2 = greybody_bound_2(q)
    T = greybody_numeric(q, cfg).T
    return [[omega, greybody_bound_1(q).value, b2.value if b2.valid else math.nan, T]]


def _point_compare(ref_doc: dict, doc: dict, E: float, cfg: SolverConfig) -> list[Row]:
    ref = reference_solution(potential_from_dict(ref_doc), E)
    d = build_dispersion(potential_from_dict(doc), E)
    budget = theta_bound(ref, d)
    lower, upper = bracket_transmission(ref, budget)
    T = solve_scattering(d, cfg=cfg).T
    return [[E, lower.value, upper.value, upper.valid, T, ref.T0, budget.thetaBound, budget.theta0]]


def _point_sweep(doc: dict, name: str, value: float, E: float, ids: tuple[str, ...], cfg: SolverConfig) -> list[Row]:
    p = potential_from_dict({**doc, name: value})
    d = build_dispersion(p, E)
    row: Row = [value, E, solve_scattering(d, cfg=cfg).T]
    for b in ids:
        res = evaluate_bound(b, d)
        row.append(res.value if res.valid else math.nan)
    return [row]


def _flatten(chunks: list[list[Row]]) -> list[Row]:
    return [r for c in chunks for r in c]


def _require(spec: RunSpec, *names: str) -> None:
    for n in names:
        if getattr(spec, n) is None:
            raise UsageError(f"{spec.subcommand} needs --{n if n != 'grid' else 'energy'}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_exact(spec: RunSpec) -> tuple[list[str], list[Row]]:
    _require(spec, "potential", "grid")
    rows = _flatten(_run(_point_exact, [(spec.potential, E) for E in spec.grid.values()]))
    return ["E", "T_exact", "R_exact"], rows


def cmd_solve(spec: RunSpec) -> tuple[list[str], list[Row]]:
    _require(spec, "potential", "grid")
    cfg = spec.solver_config
    rows = _flatten(_run(_point_solve, [(spec.potential, E, cfg) for E in spec.grid.values()]))
    return ["E", "T", "R", "abs_alpha", "abs_beta", "err_estimate", "status"], rows


def cmd_bound(spec: RunSpec) -> tuple[list[str], list[Row]]:
    _require(spec, "potential", "grid")
    ids = spec.bounds or expand_bound_ids("all")
    rows = _flatten(_run(_point_bound, [(spec.potential, E, ids) for E in spec.grid.values()]))
    rows.sort(key=lambda r: (r[0], r[1]))
    return ["E", "bound_id", "kind", "value", "valid", "quad_err", "reason"], rows


def cmd_greybody(spec: RunSpec) -> tuple[list[str], list[Row]]:
    x = spec.extra
    if spec.grid is None:
        raise UsageError("greybody needs --omega or --sweep")
    cfg = spec.solver_config
    tasks = [(x["mass"], x["spin"], x["ell"], w, cfg) for w in spec.grid.values()]
    GreybodyQuery(x["mass"], x["spin"], x["ell"], spec.grid.values()[0])  # validate before fanning out
    rows = _flatten(_run(_point_greybody, tasks))
    return ["omega", "bound1", "bound2", "T_numeric"], rows


def cmd_compare(spec: RunSpec) -> tuple[list[str], list[Row]]:
    _require(spec, "potential", "reference", "grid")
    cfg = spec.solver_config
    rows = _flatten(_run(_point_compare, [(spec.reference, spec.potential, E, cfg) for E in spec.grid.values()]))
    return ["E", "lowerT", "upperT", "upper_valid", "T_numeric", "T_reference", "theta_bound", "theta0"], rows


def cmd_sweep(spec: RunSpec) -> tuple[list[str], list[Row]]:
    _require(spec, "potential", "grid")
    name = spec.extra["param"]
    values = spec.extra["values"]
    if name is None or values is None:
        raise UsageError("sweep needs --param and --values")
    ids = spec.bounds
    cfg = spec.solver_config
    tasks = [(spec.potential, name, v, E, ids, cfg) for v in values.values() for E in spec.grid.values()]
    rows = _flatten(_run(_point_sweep, tasks))
    return [name, "E", "T_numeric", *ids], rows


COMMANDS: dict[str, Callable[[RunSpec], tuple[list[str], list[Row]]]] = {
    "exact": cmd_exact,
    "solve": cmd_solve,
    "bound": cmd_bound,
    "greybody": cmd_greybody,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


# ---------------------------------------------------------------------------
# Plotting hook
# ---------------------------------------------------------------------------


def _plot(spec: RunSpec, columns: list[str], rows: list[Row]) -> None:
    from .plotting import plot_table

    sub = spec.subcommand
    log = bool(spec.grid and spec.grid.log)
    if sub == "exact":
        plot_table(columns, rows, spec.plot, "E", ["T_exact", "R_exact"], logx=log)
    elif sub == "solve":
        plot_table(columns, rows, spec.plot, "E", ["T", "R"], logx=log)
    elif sub == "bound":
        plot_table(columns, rows, spec.plot, "E", ["value"], group="bound_id", logx=log)
    elif sub == "greybody":
        plot_table(columns, rows, spec.plot, "omega", ["T_numeric", "bound1", "bound2"], logx=log)
    elif sub == "compare":
        plot_table(columns, rows, spec.plot, "E", ["T_numeric", "lowerT", "upperT", "T_reference"], logx=log)
    elif sub == "sweep":
        plot_table(columns, rows, spec.plot, columns[0], ["T_numeric"], group="E")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        raise UsageError(message)


def _common(p: argparse.ArgumentParser, potential: bool = True, energy: bool = True) -> None:
    if potential:
        p.add_argument("--potential", help="JSON file, inline JSON, or kind=...,name=value list")
    if energy:
        p.add_argument("--energy", help="energy grid lo:hi:n[:log] or a single value")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", help="write the table here instead of stdout")
    p.add_argument("--tol", type=float, help="solver relative tolerance")
    p.add_argument("--plot", metavar="PATH", help="also save a figure (needs matplotlib)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scatterbound", description="Exact, numeric and bounded 1-D transmission probabilities.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    _common(sub.add_parser("exact", help="closed-form T and R"))
    _common(sub.add_parser("solve", help="numeric T, R, |alpha|, |beta|"))
    b = sub.add_parser("bound", help="rigorous bounds and estimates")
    _common(b)
    b.add_argument("--bounds", default="all", help="comma-separated bound ids, 'all' or 'rigorous'")
    g = sub.add_parser("greybody", help="Schwarzschild greybody bounds and numerics")
    _common(g, potential=False, energy=False)
    g.add_argument("--mass", type=float, default=1.0)
    g.add_argument("--spin", type=int, default=0)
    g.add_argument("--ell", type=int, default=0)
    g.add_argument("--omega", type=float)
    g.add_argument("--sweep", help="frequency grid lo:hi:n[:log]")
    c = sub.add_parser("compare", help="bracket T around a solvable reference")
    _common(c)
    c.add_argument("--reference", required=True, help="reference potential (free, step, square_barrier, delta)")
    s = sub.add_parser("sweep", help="T (and bounds) over a parameter axis and an energy grid")
    _common(s)
    s.add_argument("--param", required=True, help="potential parameter to vary")
    s.add_argument("--values", required=True, help="parameter grid lo:hi:n[:log]")
    s.add_argument("--bounds", default="", help="comma-separated bound ids to add as columns")
    return parser


def spec_from_args(ns: argparse.Namespace) -> RunSpec:
    spec = RunSpec(subcommand=ns.subcommand, fmt=ns.format, out=ns.out, tol=ns.tol, plot=ns.plot)
    if spec.tol is not None and not 0 < spec.tol <= 1e-2:
        raise UsageError("--tol must lie in (0, 1e-2]")
    if getattr(ns, "potential", None):
        spec.potential = parse_potential(ns.potential)
    if getattr(ns, "reference", None):
        spec.reference = parse_potential(ns.reference)
    if getattr(ns, "energy", None):
        spec.grid = parse_grid(ns.energy)
    if getattr(ns, "bounds", None):
        spec.bounds = expand_bound_ids(ns.bounds)
    if ns.subcommand == "greybody":
        if (ns.omega is None) == (ns.sweep is None):
            raise UsageError("greybody needs exactly one of --omega and --sweep")
        spec.grid = parse_grid(ns.sweep) if ns.sweep else Grid(ns.omega, ns.omega, 1)
        spec.extra = {"mass": ns.mass, "spin": ns.spin, "ell": ns.ell}
    if ns.subcommand == "sweep":
        spec.extra = {"param": ns.param, "values": parse_grid(ns.values)}
    if spec.potential is not None:
        # Fail early, before any worker starts.
        potential_from_dict(spec.potential)
    return spec


def run(spec: RunSpec) -> tuple[list[str], list[Row], int]:
    """Run a spec and return ``(columns, rows, exit_code)`` without writing anything."""
    columns, rows = COMMANDS[spec.subcommand](spec)
    failed = any(isinstance(r[-1], str) and r[-1].startswith(FAILED) for r in rows)
    return columns, rows, 3 if failed else 0


def main(argv: Sequence[str] | None = None) -> int:
    try:
        spec = spec_from_args(build_parser().parse_args(argv))
        columns, rows, code = run(spec)
        _emit(spec, columns, rows)
        if spec.plot:
            _plot(spec, columns, rows)
        return code
    except UsageError as exc:
        print(f"scatterbound: error: {exc}", file=sys.stderr)
        return 1
    except ScatterboundError as exc:
        print(f"scatterbound: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
