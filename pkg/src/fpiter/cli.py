"""Command-line entry point.

Exit codes: 0 success, 1 verification mismatch, 2 invalid configuration,
3 numerical failure (divergence, not a contraction, tolerance unmet).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import catalog, golden
from .analysis import (
    bound_new,
    bound_thakur,
    empirical_compare,
    error_sequence,
    theoretical_ratio,
)
from .integral import DivergenceError, NotAContractionError, bound_56, solve
from .quadrature import RULES, QuadratureError, QuadratureGrid
from .schemes import (
    EVALS_PER_STEP,
    ParamSchedule,
    SchemeId,
    StopReason,
    iterate,
    run,
)
from .space import DomainError, ParameterError

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMPARE_TOL = 5e-12


class ConfigError(Exception):
    pass


class NumericalFailure(Exception):
    pass


# -- formatting and writers --------------------------------------------------

def fixed(x: float, precision: int) -> str:
    if not math.isfinite(x):
        return repr(float(x))
    return f"{x:.{precision}f}"


def sci(x: float, precision: int) -> str:
    if not math.isfinite(x):
        return repr(float(x))
    return f"{x:.{precision}e}"


class Table:
    """Rows of pre-formatted cells plus a header."""

    def __init__(self, header, rows):
        self.header = list(header)
        self.rows = [list(r) for r in rows]

    def delimited(self, delimiter: str) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        return buf.getvalue()

    def records(self) -> dict:
        """Column-oriented JSON payload; numeric cells are parsed back to floats."""
        cols = {}
        for j, name in enumerate(self.header):
            cols[name] = [_parse_cell(r[j]) for r in self.rows]
        return cols


def _parse_cell(cell):
    if isinstance(cell, str):
        try:
            v = float(cell)
        except ValueError:
            return cell
        if cell.lstrip("-").isdigit():
            return int(cell)
        return v if math.isfinite(v) else cell
    return cell


def emit(args, table: Table, extra: Optional[dict] = None, command: str = ""):
    if args.format == "json":
        payload = {
            "command": command,
            "config": config_echo(args),
            "columns": table.header,
            "data": table.records(),
        }
        if extra:
            payload.update(extra)
        payload["timing"] = {"seconds": round(time.perf_counter() - args._t0, 6)} if args.timing else None
        text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    else:
        text = table.delimited("," if args.format == "csv" else "\t")
        if extra and args.summary:
            sys.stderr.write(json.dumps(extra, indent=2) + "\n")
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def config_echo(args) -> dict:
    skip = {"func", "_t0"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def side_path(out: Optional[str], suffix: str) -> Optional[Path]:
    if not out:
        return None
    p = Path(out)
    return p.with_name(f"{p.stem}_{suffix}.csv")


# -- commands ------------------------------------------------------------------

def _schedule(args) -> ParamSchedule:
    try:
        return ParamSchedule(args.delta, args.zeta, args.gamma)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


def table1_columns(x0: float, schedule: ParamSchedule, steps: int) -> dict:
    S = catalog.get_map("sqrt-quadratic")
    start = S.space.point(x0)
    return {name: [p.scalar for p in iterate(name, S, start, schedule, steps)] for name in golden.COLUMNS}


def verify_table1(columns: dict, tol: float = golden.TOLERANCE) -> Optional[tuple]:
    """First golden cell off by more than ``tol``: ``(step, column, expected, actual)``."""
    for row in golden.TABLE1:
        step = row[0]
        for name, cell in zip(golden.COLUMNS, row[1:]):
            values = columns[name]
            if step > len(values):
                return (step, name, float(cell), None)
            actual = values[step - 1]
            if not abs(actual - float(cell)) <= tol:
                return (step, name, float(cell), actual)
    return None


HEADINGS = {"agarwal": "Agarwal", "noor": "Noor", "abbas_nazir": "Abbas", "thakur": "Thakur", "new": "New iter"}


def cmd_table1(args) -> int:
    schedule = _schedule(args)
    steps = args.max_iters or 30
    cols = table1_columns(args.x0 if args.x0 is not None else golden.START, schedule, steps)
    rows = [[str(i + 1)] + [fixed(cols[n][i], args.precision) for n in golden.COLUMNS] for i in range(steps)]
    table = Table(["Step"] + [HEADINGS[n] for n in golden.COLUMNS], rows)

    plot = Table(
        ["step", "scheme", "abs_error", "log10_error"],
        [
            [str(i + 1), n, sci(abs(cols[n][i] - 5.0), args.precision),
             fixed(math.log10(abs(cols[n][i] - 5.0)), 6) if cols[n][i] != 5.0 else "-inf"]
            for n in golden.COLUMNS
            for i in range(steps)
        ],
    )
    plot_path = Path(args.plot_data) if args.plot_data else side_path(args.out, "plot")
    if plot_path:
        plot_path.write_text(plot.delimited(","))

    status = EXIT_OK
    extra = {}
    if args.verify:
        bad = verify_table1(cols)
        extra["verify"] = {"tolerance": golden.TOLERANCE, "ok": bad is None}
        if bad is not None:
            step, name, expected, actual = bad
            extra["verify"]["first_mismatch"] = {"row": step, "column": HEADINGS[name], "expected": expected, "actual": actual}
            sys.stderr.write(
                f"table1 mismatch at row {step}, column {HEADINGS[name]}: expected {expected!r}, got {actual!r}\n"
            )
            status = EXIT_MISMATCH
        else:
            sys.stderr.write(f"table1 verified: {len(golden.TABLE1)} rows x {len(golden.COLUMNS)} columns within {golden.TOLERANCE}\n")
    if args.format == "json":
        extra["plot"] = plot.records()
    emit(args, table, extra, "table1")
    return status


def _map_and_start(args):
    try:
        S = catalog.get_map(args.map)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from exc
    if args.x0 is None:
        x0 = np.full(S.space.dim, golden.START if args.map == "sqrt-quadratic" else 1.0)
    else:
        x0 = np.array([float(v) for v in str(args.x0).split(",")])
    try:
        start = S.space.point(x0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return S, start


def _trajectory_table(traj, precision: int) -> Table:
    dim = traj.space.dim
    vcols = ["value"] if dim == 1 else [f"x{i + 1}" for i in range(dim)]
    header = ["step", *vcols, "residual"] + (["error"] if traj.errors is not None else [])
    rows = []
    for i, x in enumerate(traj.iterates):
        row = [str(i + 1), *[fixed(v, precision) for v in x.value], sci(traj.residuals[i], precision)]
        if traj.errors is not None:
            row.append(sci(traj.errors[i], precision))
        rows.append(row)
    return Table(header, rows)


def _parse_scheme(name: str) -> SchemeId:
    try:
        return SchemeId.parse(name)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from exc


def _run(args, scheme, S, start, tol):
    try:
        return run(scheme, S, start, _schedule(args), tol=tol, max_iters=args.max_iters or 1000)
    except DomainError as exc:
        raise NumericalFailure(str(exc)) from exc


def cmd_run(args) -> int:
    if len(args.scheme or []) != 1:
        raise ConfigError("run needs exactly one --scheme")
    scheme = _parse_scheme(args.scheme[0])
    S, start = _map_and_start(args)
    traj = _run(args, scheme, S, start, args.tol if args.tol is not None else 1e-10)
    extra = {
        "diagnostics": {
            "scheme": scheme.value,
            "map": args.map,
            "steps": len(traj),
            "stop_reason": traj.stop_reason.value,
            "evaluations": traj.evaluations,
            "evaluations_per_step": EVALS_PER_STEP[scheme],
        }
    }
    emit(args, _trajectory_table(traj, args.precision), extra, "run")
    return EXIT_NUMERICAL if traj.stop_reason is StopReason.DIVERGED else EXIT_OK


def compare_runs(args):
    if len(args.scheme or []) != 2:
        raise ConfigError("compare needs exactly two --scheme options")
    a, b = (_parse_scheme(s) for s in args.scheme)
    S, start = _map_and_start(args)
    tol = args.tol if args.tol is not None else COMPARE_TOL
    ta = _run(args, a, S, start, tol)
    tb = _run(args, b, S, start, tol)
    if S.fixed_point is None:
        raise ConfigError(f"map {args.map!r} has no known fixed point to compare against")
    return a, b, ta, tb, S, tol


def cmd_compare(args) -> int:
    a, b, ta, tb, S, tol = compare_runs(args)
    report = empirical_compare(ta, tb, S.fixed_point)
    ea = error_sequence(ta, S.fixed_point)
    eb = error_sequence(tb, S.fixed_point)
    n = min(len(ea), len(eb))
    rows = []
    for i in range(n):
        ratio = report.ratio_sequence[i] if i < len(report.ratio_sequence) else None
        rows.append([str(i + 1), sci(ea[i], args.precision), sci(eb[i], args.precision),
                     sci(ratio, args.precision) if ratio is not None else ""])
    table = Table(["step", f"error_{a.value}", f"error_{b.value}", "ratio"], rows)
    extra = {
        "diagnostics": {
            "verdict": report.verdict.value,
            "tolerance": tol,
            "steps_to_tolerance": {a.value: ta.steps_to(tol), b.value: tb.steps_to(tol)},
            "evaluations": {a.value: ta.evaluations, b.value: tb.evaluations},
            "evaluations_per_step": {a.value: EVALS_PER_STEP[a], b.value: EVALS_PER_STEP[b]},
            "stop_reason": {a.value: ta.stop_reason.value, b.value: tb.stop_reason.value},
            "ratio_threshold": report.threshold,
            "tail_fraction": report.tail_fraction,
        }
    }
    emit(args, table, extra, "compare")
    return EXIT_OK


def cmd_solve_integral(args) -> int:
    try:
        problem = catalog.get_problem(args.problem)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from exc
    try:
        grid = QuadratureGrid.uniform(problem.box, args.nodes, args.rule)
        schedule = ParamSchedule(delta=args.delta)
    except (QuadratureError, ParameterError) as exc:
        raise ConfigError(str(exc)) from exc
    tol = args.tol if args.tol is not None else 1e-8
    try:
        result = solve(problem, grid, schedule, tol=tol, max_iters=args.max_iters or 200, workers=args.workers)
    except NotAContractionError as exc:
        raise NumericalFailure(str(exc)) from exc
    except DivergenceError as exc:
        raise NumericalFailure(str(exc)) from exc

    m = grid.m
    coord = ["t"] if m == 1 else [f"t{i + 1}" for i in range(m)]
    exact = grid.sample(problem.solution) if problem.solution is not None else None
    header = [*coord, "value"] + (["exact"] if exact is not None else [])
    rows = []
    for i, t in enumerate(grid.nodes):
        row = [*[fixed(v, args.precision) for v in t], fixed(result.solution.value[i], args.precision)]
        if exact is not None:
            row.append(fixed(exact[i], args.precision))
        rows.append(row)
    table = Table(header, rows)

    traj = result.trajectory
    history = {"step": list(range(1, len(traj) + 1)), "residual": [float(r) for r in traj.residuals]}
    if result.errors is not None:
        prod, expo = result.bound_history()
        history["error"] = [float(e) for e in result.errors]
        # step k >= 2 holds c_{k-1}, bounded by entry k-2
        history["bound_product"] = [None] + [float(v) for v in prod[: len(traj) - 1]]
        history["bound_exponential"] = [None] + [float(v) for v in expo[: len(traj) - 1]]
    meta = {
        "problem": args.problem,
        "theta": result.theta,
        "grid": {"nodes_per_axis": args.nodes, "rule": args.rule, "box": [list(b) for b in grid.box]},
        "steps": len(traj),
        "stop_reason": traj.stop_reason.value,
        "achieved_residual": result.achieved_residual,
        "converged": result.converged,
        "final_error": result.errors[-1] if result.errors else None,
        "quadrature_slack": result.quadrature_slack,
        "history": history,
    }
    hist_path = side_path(args.out, "history")
    if args.format != "json" and hist_path:
        hist_path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")
    emit(args, table, {"diagnostics": meta}, "solve-integral")
    return EXIT_OK if result.converged else EXIT_NUMERICAL


def cmd_bounds(args) -> int:
    n_max = args.n
    p = args.precision
    try:
        if args.theta is not None:
            deltas = [args.delta] * n_max
            prod, expo = bound_56(args.e1, args.theta, deltas)
            table = Table(["n", "product", "exponential"],
                          [[str(k), sci(prod[k], p), sci(expo[k], p)] for k in range(n_max)])
        else:
            xi = args.xi if args.xi is not None else 0.5
            rows = []
            for k in range(1, n_max + 1):
                bn = bound_new(xi, args.delta, args.e1, k)
                bt = bound_thakur(xi, args.delta, args.zeta, args.e1, k)
                r = theoretical_ratio(xi, args.delta, args.zeta, args.e1, args.e1, k) if args.e1 > 0 else 0.0
                rows.append([str(k), sci(bn, p), sci(bt, p), sci(r, p)])
            table = Table(["n", "bound_new", "bound_thakur", "ratio"], rows)
    except NotAContractionError as exc:
        raise NumericalFailure(str(exc)) from exc
    except (ParameterError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc
    emit(args, table, None, "bounds")
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _precision(text: str) -> int:
    v = int(text)
    if not 1 <= v <= 17:
        raise argparse.ArgumentTypeError("precision must lie in [1, 17]")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scheme", action="append", help="scheme id (repeat twice for compare)")
    common.add_argument("--map", default="sqrt-quadratic", help="catalog map key")
    common.add_argument("--problem", default="mvf-linear-1d", help="catalog integral problem key")
    common.add_argument("--x0", default=None, help="start point (comma separated for vectors)")
    common.add_argument("--delta", type=float, default=golden.DELTA)
    common.add_argument("--zeta", type=float, default=golden.ZETA)
    common.add_argument("--gamma", type=float, default=golden.GAMMA)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--max-iters", type=int, default=None)
    common.add_argument("--nodes", type=int, default=65, help="grid nodes per axis")
    common.add_argument("--rule", choices=RULES, default="simpson")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--format", choices=("csv", "json", "tsv"), default="csv")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--precision", type=_precision, default=10, help="printed decimals")
    common.add_argument("--verify", action="store_true", help="table1: check against the embedded reference")
    common.add_argument("--plot-data", default=None, help="table1: path for the step/log-error series")
    common.add_argument("--timing", action="store_true", help="include wall time in JSON reports")
    common.add_argument("--summary", action="store_true", help="print diagnostics to stderr for csv/tsv output")

    parser = argparse.ArgumentParser(prog="fpiter", description="Fixed-point iteration toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("table1", parents=[common], help="reproduce the sqrt-quadratic benchmark table").set_defaults(func=cmd_table1)
    sub.add_parser("run", parents=[common], help="run one scheme on a catalog map").set_defaults(func=cmd_run)
    sub.add_parser("compare", parents=[common], help="compare two schemes").set_defaults(func=cmd_compare)
    sub.add_parser("solve-integral", parents=[common], help="solve a catalog integral equation").set_defaults(
        func=cmd_solve_integral
    )
    b = sub.add_parser("bounds", parents=[common], help="tabulate a-priori error bounds")
    b.add_argument("--xi", type=float, default=None, help="contraction factor for the scheme bounds")
    b.add_argument("--theta", type=float, default=None, help="certificate for the integral-equation bound")
    b.add_argument("--e1", type=float, default=1.0, help="initial error")
    b.add_argument("--n", type=int, default=10, help="number of rows")
    b.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    args._t0 = time.perf_counter()
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except NumericalFailure as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
