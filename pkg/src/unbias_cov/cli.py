"""``unbias-cov`` command line front-end.

Exit codes: 0 success, 1 unreadable input, 2 invalid range, configuration or
metadata, 3 singular or ill-conditioned bias matrix. Errors are reported on
stderr as one line ``unbias-cov: error: <kind>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import autocov, crosscov, simulation
from .csvio import ParseError, fmt, read_columns, read_table, write_columns, write_table
from .errors import InvalidConfig, SingularMatrix, UnbiasCovError
from .series_stats import WeightedSeries, bessel_variance_independent, demean
from .structures import CovarianceFunction, LagRange

EXIT_PARSE, EXIT_RANGE, EXIT_SINGULAR = 1, 2, 3


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


def _fail_from(exc: Exception) -> CliError:
    if isinstance(exc, CliError):
        return exc
    if isinstance(exc, ParseError):
        return CliError(EXIT_PARSE, "parse", str(exc))
    if isinstance(exc, SingularMatrix):
        return CliError(EXIT_SINGULAR, "singular", str(exc))
    if isinstance(exc, InvalidConfig):
        return CliError(EXIT_RANGE, "config", str(exc))
    return CliError(EXIT_RANGE, "range", str(exc))


def _resolve_dt(flag: float | None, *declared: float | None) -> float:
    known = [d for d in declared if d is not None]
    if flag is not None:
        known.append(flag)
    if any(d != known[0] for d in known):
        raise CliError(EXIT_RANGE, "dt", f"sampling intervals disagree: {sorted(set(known))}")
    return known[0] if known else 1.0


def _load_series(path, dt_flag):
    table = read_table(path)
    try:
        series = WeightedSeries(table.values, table.weights, _resolve_dt(dt_flag, table.dt))
    except UnbiasCovError as exc:
        raise CliError(EXIT_PARSE, "parse", f"{path}: {exc}") from None
    return series, table.dt


def _load_truth(path, lag_range: LagRange, dt: float) -> CovarianceFunction:
    cols = read_columns(path)
    if "lag_index" not in cols:
        raise ParseError(f"{path}: truth file needs a lag_index column")
    name = next((c for c in ("value", "truth", "c") if c in cols), None)
    if name is None:
        raise ParseError(f"{path}: truth file needs a value column")
    lags = cols["lag_index"].astype(int)
    table = dict(zip(lags.tolist(), cols[name].tolist()))
    return CovarianceFunction(
        lag_range.k1, lag_range.k2, [table.get(int(k), 0.0) for k in lag_range.lags], dt
    )


def _emit(args, columns, summary: list[str]) -> None:
    text = write_columns(args.output, columns)
    if args.output is None:
        sys.stdout.write(text)
    stream = sys.stderr if args.output is None else sys.stdout
    for line in summary:
        print(line, file=stream)


def _covariance_columns(raw, estimate, predicted):
    cols = {"lag_index": raw.lags, "lag_time": raw.lag_times, "c_raw": raw.values}
    if estimate.corrected is not None:
        cols["c_corrected"] = estimate.corrected.values
    if predicted is not None:
        cols["epsilon_predicted"] = predicted
    return cols


def cmd_acov(args) -> int:
    series, _ = _load_series(args.input, args.dt)
    lr = LagRange(args.kmin, args.kmax)
    est = autocov.analyze(series, lr, correct_bias=not args.raw_only)
    predicted = None
    if args.predict:
        truth = _load_truth(args.predict, lr, series.dt)
        a = est.matrix or autocov.bias_matrix(series.weights, lr)
        predicted = autocov.expected_estimate(truth, a).values - truth.values
    summary = []
    if est.variance is not None:
        v = est.variance
        summary = [f"s2={fmt(v.s2)}", f"sigma_mean2={fmt(v.sigma_mean2)}",
                   f"s2_corrected={fmt(v.s2_corrected)}", f"rcond={fmt(est.matrix.rcond)}"]
    _emit(args, _covariance_columns(est.raw, est, predicted), summary)
    return 0


def cmd_xcov(args) -> int:
    s1, dt1 = _load_series(args.input1, args.dt)
    s2, dt2 = _load_series(args.input2, args.dt)
    _resolve_dt(args.dt, dt1, dt2)
    pair = crosscov.SeriesPair(s1, s2)
    lr = LagRange(args.kmin, args.kmax)
    est = crosscov.analyze_cross(pair, lr, correct_bias=not args.raw_only)
    predicted = None
    if args.predict:
        truth = _load_truth(args.predict, lr, pair.dt)
        a = est.matrix or crosscov.bias_matrix_cross(s1.weights, s2.weights, lr)
        predicted = autocov.expected_estimate(truth, a).values - truth.values
    summary = [] if est.matrix is None else [f"rcond={fmt(est.matrix.rcond)}"]
    _emit(args, _covariance_columns(est.raw, est, predicted), summary)
    return 0


def cmd_variance(args) -> int:
    series, _ = _load_series(args.input, None)
    if args.independent:
        mf = demean(series)
        print(f"s2_bessel={fmt(bessel_variance_independent(mf))}")
        return 0
    if args.kmin is None or args.kmax is None:
        raise CliError(EXIT_RANGE, "range", "--kmin and --kmax are required without --independent")
    v = autocov.corrected_variance_pipeline(series, LagRange(args.kmin, args.kmax))
    print(f"s2={fmt(v.s2)}")
    print(f"sigma_mean2={fmt(v.sigma_mean2)}")
    print(f"s2_corrected={fmt(v.s2_corrected)}")
    return 0


def _lag_table(report, stats_raw, stats_hat, stats_pred, truth):
    return {
        "lag_index": report.lags,
        "lag_time": report.lag_times,
        "mean_raw": stats_raw.mean,
        "mean_corrected": stats_hat.mean,
        "truth": truth.values,
        "stderr": stats_hat.stderr,
        "stderr_raw": stats_raw.stderr,
        "mean_predicted_raw": stats_pred.mean,
    }


def _scalar(s) -> dict:
    se = None if np.isnan(s.stderr) else s.stderr
    return {"mean": s.mean, "stderr": se}


def cmd_simulate(args) -> int:
    n1 = args.n1 if args.n1 is not None else args.n
    n2 = args.n2 if args.n2 is not None else args.n
    config = simulation.SimulationConfig(
        n1=n1, n2=n2, k1=args.kmin, k2=args.kmax, realizations=args.realizations,
        weight_law=args.weights, seed=args.seed,
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    report = simulation.run_monte_carlo(config, threads=args.threads)
    runtime = time.perf_counter() - t0

    pair = simulation.generate_pair(config, 0)
    idx = np.arange(max(n1, n2))

    def pad(a):
        return np.concatenate([a, np.full(idx.size - a.size, np.nan)])

    write_columns(out / "fig1a.csv", {
        "index": idx, "time": idx * config.dt,
        "x1": pad(pair.s1.values), "w1": pad(pair.s1.weights),
        "x2": pad(pair.s2.values), "w2": pad(pair.s2.weights),
    })
    write_table(out / "series1.csv", pair.s1.values, pair.s1.weights, config.dt)
    write_table(out / "series2.csv", pair.s2.values, pair.s2.weights, config.dt)
    write_columns(out / "fig1b.csv", _lag_table(
        report, report.auto_raw, report.auto_corrected, report.auto_predicted, report.auto_truth))
    write_columns(out / "fig1c.csv", _lag_table(
        report, report.cross_raw, report.cross_corrected, report.cross_predicted, report.cross_truth))

    summary = {
        "config": simulation.config_dict(config),
        "seed": config.seed,
        "realizations": report.realizations,
        "stderr_defined": report.stderr_defined,
        "variance": {
            "true": config.target_variance,
            "s2_naive": _scalar(report.s2),
            "sigma_mean2": _scalar(report.sigma_mean2),
            "s2_corrected": _scalar(report.s2_corrected),
            "s2_predicted": _scalar(report.s2_predicted),
        },
    }
    if args.timing:
        summary["runtime_seconds"] = runtime
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} ({report.realizations} realizations, {runtime:.1f} s)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unbias-cov", description=(
        "Bias-free auto- and cross-covariance estimates for weighted series "
        "whose mean is estimated from the data."))
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("acov", help="auto-covariance of one series")
    a.add_argument("--input", required=True)
    a.add_argument("--kmin", type=int, required=True)
    a.add_argument("--kmax", type=int, required=True)
    a.add_argument("--dt", type=float)
    a.add_argument("--raw-only", action="store_true")
    a.add_argument("--predict", metavar="TRUTH_CSV",
                   help="add epsilon_predicted for the covariance in TRUTH_CSV (lag_index,value)")
    a.add_argument("--output")
    a.set_defaults(func=cmd_acov)

    x = sub.add_parser("xcov", help="cross-covariance of two series")
    x.add_argument("--input1", required=True)
    x.add_argument("--input2", required=True)
    x.add_argument("--kmin", type=int, required=True)
    x.add_argument("--kmax", type=int, required=True)
    x.add_argument("--dt", type=float)
    x.add_argument("--raw-only", action="store_true")
    x.add_argument("--predict", metavar="TRUTH_CSV")
    x.add_argument("--output")
    x.set_defaults(func=cmd_xcov)

    v = sub.add_parser("variance", help="bias-corrected variance of one series")
    v.add_argument("--input", required=True)
    v.add_argument("--independent", action="store_true")
    v.add_argument("--kmin", type=int)
    v.add_argument("--kmax", type=int)
    v.set_defaults(func=cmd_variance)

    s = sub.add_parser("simulate", help="Monte Carlo study of the coupled MA pair")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--realizations", type=int, default=10_000)
    s.add_argument("--n", type=int, default=50)
    s.add_argument("--n1", type=int)
    s.add_argument("--n2", type=int)
    s.add_argument("--kmin", type=int, default=-25)
    s.add_argument("--kmax", type=int, default=24)
    s.add_argument("--weights", choices=simulation.WEIGHT_LAWS, default="redraw")
    s.add_argument("--threads", type=int, help=f"overrides ${simulation.THREADS_ENV}")
    s.add_argument("--timing", action="store_true", help="record runtime in summary.json")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (CliError, ParseError, UnbiasCovError) as exc:
        err = _fail_from(exc)
        message = " ".join(str(err).split())
        print(f"unbias-cov: error: {err.kind}: {message}", file=sys.stderr)
        return err.code


if __name__ == "__main__":
    sys.exit(main())
