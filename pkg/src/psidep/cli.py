"""Command-line front end.

Every subcommand prints one JSON object on standard output (keys sorted, so
identical inputs give byte-identical output) and a short summary on standard
error. Exit status is 0 on success, 1 when the data make the requested
statistic undefined, and 2 for usage or input-format errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .conditional import psi_conditional_hat, select_variables
from .errors import DegenerateInputError
from .estimator import LabelVector, estimate_psi
from .independence import independence_test
from .metric import PointCloud
from .simlab import KINDS, SimSetting, null_calibration, power_curve


class DatasetError(ValueError):
    """The input file does not have the expected shape or content."""


class Dataset:
    """Parsed CSV: the response plus named numeric covariate columns."""

    def __init__(self, labels, columns, names, warnings):
        self.labels = labels
        self.columns = columns
        self.names = names
        self.warnings = warnings

    @property
    def n(self):
        return self.labels.n

    def matrix(self, names=None):
        names = self.names if names is None else names
        missing = [c for c in names if c not in self.columns]
        if missing:
            raise DatasetError(f"unknown covariate column(s): {', '.join(missing)}")
        if not names:
            raise DatasetError("no covariate columns selected")
        return np.column_stack([self.columns[c] for c in names])


def _read_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc.strerror}") from exc


def _number(cell, row, col):
    try:
        value = float(cell)
    except ValueError:
        raise DatasetError(f"non-numeric value {cell!r} at row {row}, column {col!r}") from None
    if not math.isfinite(value):
        raise DatasetError(f"non-finite value {cell!r} at row {row}, column {col!r}")
    return value


def read_table(path, response, covariates=None):
    """Read a headed CSV into labels and float covariate columns.

    Rows are numbered from 1 for the first data row. ``covariates=None``
    takes every column except the response.
    """
    rows = _read_rows(path)
    if not rows:
        raise DatasetError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    if response not in header:
        raise DatasetError(f"response column {response!r} not found in header")
    names = [h for h in header if h != response] if covariates is None else list(covariates)
    for name in names:
        if name not in header:
            raise DatasetError(f"covariate column {name!r} not found in header")
    pos = {h: i for i, h in enumerate(header)}
    raw_y, cols = [], {name: [] for name in names}
    for r, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise DatasetError(f"row {r} has {len(row)} fields, header has {len(header)}")
        raw_y.append(row[pos[response]].strip())
        for name in names:
            cols[name].append(_number(row[pos[name]], r, name))
    if len(body) < 2:
        raise DatasetError(f"need at least 2 data rows, found {len(body)}")
    labels = LabelVector.from_raw(np.array(raw_y, dtype=object))
    warnings = []
    if labels.K < 2:
        warnings.append("response has fewer than 2 distinct levels; the coefficient is undefined")
    columns = {name: np.array(v) for name, v in cols.items()}
    return Dataset(labels, columns, names, warnings)


def read_distance_matrix(path, n):
    rows = [r for r in _read_rows(path) if any(cell.strip() for cell in r)]
    values = [[_number(cell, i + 1, str(j + 1)) for j, cell in enumerate(row)] for i, row in enumerate(rows)]
    if len(values) != n or any(len(row) != n for row in values):
        raise DatasetError(f"distance matrix must be {n} x {n} to match the response")
    try:
        return PointCloud.precomputed(np.array(values))
    except ValueError as exc:
        raise DatasetError(str(exc)) from None


def parse_dataset(path, response, covariates=None, distance_matrix=None, grid=False, standardize=False):
    """Build ``(PointCloud, LabelVector, warnings)`` from the CLI inputs.

    With ``distance_matrix`` the covariates come from that file; with
    ``grid`` each row's covariate columns are the values of one curve on a
    uniform grid of ``[0, 1]``; otherwise the columns are Euclidean
    coordinates.
    """
    data = read_table(path, response, [] if distance_matrix else covariates)
    if distance_matrix:
        cloud = read_distance_matrix(distance_matrix, data.n)
    elif grid:
        cloud = PointCloud.function_grid(data.matrix())
    else:
        cloud = PointCloud.euclidean(data.matrix(), standardize=standardize)
    return cloud, data.labels, list(data.warnings)


# -- output --------------------------------------------------------------------


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        return _clean(value.item())
    return value


def _emit(command, payload, n, K, warnings, summary):
    report = dict(payload)
    report.update(version=__version__, command=command, n=n, K=K, warnings=list(warnings))
    sys.stdout.write(json.dumps(_clean(report), sort_keys=True) + "\n")
    sys.stderr.write(summary + "\n")


def _columns(text):
    return [c.strip() for c in text.split(",") if c.strip()]


# -- commands ----------------------------------------------------------------


def cmd_psi(args):
    cloud, y, warns = parse_dataset(
        args.input, args.response, None, args.distance_matrix, args.grid, args.standardize
    )
    res = estimate_psi(cloud, y, workers=args.threads)
    payload = {"psi_hat": res.psi_hat, "w_n": res.w_n, "l_n": res.l_n, "levels": list(y.levels)}
    _emit("psi", payload, res.n, res.K, warns + list(res.warnings), f"psi_hat = {res.psi_hat:.6g} (n={res.n}, K={res.K})")


def cmd_test(args):
    cloud, y, warns = parse_dataset(
        args.input, args.response, None, args.distance_matrix, args.grid, args.standardize
    )
    rep = independence_test(cloud, y, workers=args.threads)
    payload = rep.as_dict()
    payload.pop("warnings")
    payload["levels"] = list(y.levels)
    _emit(
        "test",
        payload,
        rep.n,
        rep.K,
        warns + list(rep.warnings),
        f"I_n = {rep.statistic:.6g} on {rep.df} df, p = {rep.p_value:.4g}",
    )


def cmd_cond(args):
    z_names, x_names = _columns(args.covariates), _columns(args.given)
    data = read_table(args.input, args.response, z_names + [c for c in x_names if c not in z_names])
    x = PointCloud.euclidean(data.matrix(x_names), standardize=args.standardize)
    z = PointCloud.euclidean(data.matrix(z_names), standardize=args.standardize)
    value = psi_conditional_hat(x, z, data.labels)
    payload = {"psi_conditional_hat": value, "covariates": z_names, "given": x_names}
    _emit("cond", payload, data.n, data.labels.K, data.warnings, f"conditional psi_hat = {value:.6g}")


def cmd_select(args):
    data = read_table(args.input, args.response)
    if not data.names:
        raise DatasetError("no covariate columns to select from")
    clouds = [PointCloud.euclidean(data.columns[c], standardize=args.standardize) for c in data.names]
    trace = select_variables(clouds, data.labels, max_steps=args.max_steps, workers=args.threads)
    payload = trace.as_dict()
    payload["chosen_names"] = [data.names[i] for i in trace.chosen]
    payload["selected_names"] = [data.names[i] for i in trace.selected]
    _emit(
        "select",
        payload,
        data.n,
        data.labels.K,
        data.warnings,
        f"selected {payload['selected_names']} (stopped: {trace.stopped_because})",
    )


def cmd_simulate(args):
    lambdas = [float(v) for v in _columns(args.lambdas)]
    setting = SimSetting(args.setting, args.n, args.m, args.seed)
    curve = power_curve(setting, lambdas, args.reps, args.alpha, args.seed, workers=args.threads)
    if args.csv:
        text = curve.to_csv()
        if args.csv == "-":
            sys.stdout.write(text)
        else:
            with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    summary = ", ".join(f"{lam:g}: {rate:.3f}" for lam, rate in zip(curve.lambdas, curve.rates))
    if args.csv == "-":
        sys.stderr.write(f"power by lambda: {summary}\n")
        return
    payload = {
        "setting": curve.setting,
        "m": args.m,
        "alpha": curve.alpha,
        "reps": curve.reps,
        "seed": args.seed,
        "rows": curve.rows(),
        "rates": list(curve.rates),
        "degenerate": list(curve.degenerate),
    }
    warns = [f"{sum(curve.degenerate)} degenerate samples counted as non-rejections"] if any(curve.degenerate) else []
    _emit("simulate", payload, curve.n, None, warns, f"power by lambda: {summary}")


def cmd_calibrate(args):
    rep = null_calibration(args.n, args.K, args.reps, seed=args.seed, dim=args.dim, alpha=args.alpha, workers=args.threads)
    payload = rep.as_dict()
    payload["seed"] = args.seed
    warns = [f"{rep.degenerate} replications missed a level and were skipped"] if rep.degenerate else []
    _emit(
        "calibrate",
        payload,
        rep.n,
        rep.K,
        warns,
        f"rejection rate {rep.rejection_rate:.3f} at alpha={rep.alpha}, KS distance {rep.ks_distance:.4f}",
    )


# -- parser --------------------------------------------------------------------


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="psidep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random draw (default 0)")
    common.add_argument(
        "--threads", type=_positive_int, default=os.cpu_count() or 1, help="worker threads (default: all cores)"
    )
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", required=True, help="CSV file with a header row")
    data.add_argument("--response", required=True, help="name of the categorical response column")
    data.add_argument("--standardize", action="store_true", help="centre and scale each covariate column")
    space = argparse.ArgumentParser(add_help=False)
    space.add_argument("--distance-matrix", help="CSV of pairwise covariate distances, no header")
    space.add_argument("--grid", action="store_true", help="covariate columns are samples of one curve per row")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("psi", parents=[common, data, space], help="estimate the dependence coefficient")
    p.set_defaults(func=cmd_psi)
    p = sub.add_parser("test", parents=[common, data, space], help="chi-squared test of independence")
    p.set_defaults(func=cmd_test)
    p = sub.add_parser("cond", parents=[common, data], help="conditional coefficient of some columns given others")
    p.add_argument("--covariates", required=True, help="comma-separated columns forming Z")
    p.add_argument("--given", required=True, help="comma-separated columns forming X")
    p.set_defaults(func=cmd_cond)
    p = sub.add_parser("select", parents=[common, data], help="greedy forward variable selection")
    p.add_argument("--max-steps", type=_positive_int, default=None)
    p.set_defaults(func=cmd_select)
    p = sub.add_parser("simulate", parents=[common], help="power curve on a synthetic setting")
    p.add_argument("--setting", choices=KINDS, required=True)
    p.add_argument("--n", type=_positive_int, default=100)
    p.add_argument("--m", type=_positive_int, default=100, help="grid points for functional settings")
    p.add_argument("--reps", type=_positive_int, default=200)
    p.add_argument("--lambdas", default="0,0.25,0.5,0.75,1")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--csv", help="also write the power-curve CSV here ('-' replaces the JSON on stdout)")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("calibrate", parents=[common], help="null distribution of I_n against chi-squared")
    p.add_argument("--n", type=_positive_int, default=200)
    p.add_argument("--K", type=_positive_int, default=3)
    p.add_argument("--dim", type=_positive_int, default=2)
    p.add_argument("--reps", type=_positive_int, default=2000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        args.func(args)
    except DegenerateInputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (DatasetError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
