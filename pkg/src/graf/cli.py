"""Command-line entry point: one binary, one subcommand per study.

Every command writes a single CSV or JSON document, atomically when an
output path is given.  All randomness flows from ``--seed``; repeating a
command with identical flags reproduces the output byte for byte, for any
``--workers`` value.  A run manifest (version, flags, wall time) is echoed
to stdout after file output; ``GRAF_LOG`` selects the log level.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from fractions import Fraction

from graf import __version__
from graf.bounds import (
    bounds_row,
    greedy_lower_bound,
    nearmax_theorem_bound,
    upper_bound_expected_max,
    variance_lower_bound,
)
from graf.combinatorics import (
    EXACT_N_MAX,
    RencontresTable,
    ball_size,
    ball_size_upper_bound,
)
from graf.enumerator import (
    ENUM_N_MAX,
    HISTOGRAM_N_MAX,
    correlation_histogram_exact,
    enumerate_field,
    enumerated_field_mean,
    mean_correlation_exhaustive,
    nearmax_table,
    verify_ball_size,
)
from graf.field import SEED_MAX, read_matrix_csv, sample_cost_matrix
from graf.montecarlo import EstimateReport, derive_seed, estimate, ratio_table
from graf.serialize import atomic_write_text, fmt, to_csv_text, to_json_text
from graf.solvers import (
    greedy_assignment,
    solve_max_bruteforce,
    solve_max_exact,
    solve_min_exact,
)

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

_USAGE_EXIT = 2
_FAILURE_EXIT = 1


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _seed_value(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _unit_open(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _int_list(minimum: int, maximum: int | None = None):
    def convert(text: str) -> list[int]:
        values = []
        for part in text.split(","):
            try:
                value = int(part)
            except ValueError:
                raise argparse.ArgumentTypeError(f"not an integer: {part!r}")
            if value < minimum or (maximum is not None and value > maximum):
                bound = f">= {minimum}" if maximum is None else f"in {minimum}..{maximum}"
                raise argparse.ArgumentTypeError(f"each value must be {bound}, got {value}")
            values.append(value)
        if not values:
            raise argparse.ArgumentTypeError("list must not be empty")
        return values

    return convert


def _unit_list(text: str) -> list[float]:
    return [_unit_open(part) for part in text.split(",")]


# Per-subcommand registry of config-file keys: name -> "value" or "flag".
_CONFIG_KEYS: dict[str, dict[str, str]] = {}


def _arg(sub: argparse.ArgumentParser, command: str, name: str, **kwargs) -> None:
    registry = _CONFIG_KEYS.setdefault(command, {})
    registry[name] = "flag" if kwargs.get("action") == "store_true" else "value"
    sub.add_argument(f"--{name}", **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graf",
        description="Gaussian random assignment field studies",
    )
    parser.add_argument("--version", action="version", version=f"graf {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    solve = subs.add_parser("solve", help="solve one cost matrix")
    _arg(solve, "solve", "input", required=True, help="cost matrix CSV")
    _arg(
        solve,
        "solve",
        "method",
        choices=("brute", "exact", "greedy", "min"),
        default="exact",
    )

    bounds = subs.add_parser("bounds", help="closed-form bound table")
    _arg(bounds, "bounds", "n-list", dest="n_list", type=_int_list(1), required=True)
    _arg(bounds, "bounds", "eps", type=_unit_list, default=[])
    _arg(bounds, "bounds", "delta", type=_unit_list, default=[])
    _arg(bounds, "bounds", "c-small", dest="c_small", type=_positive_float, default=1.0)
    _arg(bounds, "bounds", "c-large", dest="c_large", type=_positive_float, default=1.0)

    est = subs.add_parser("estimate", help="replicated moment estimates")
    _arg(est, "estimate", "n", type=_positive_int, required=True)
    _arg(est, "estimate", "reps", type=_positive_int, required=True)
    _arg(est, "estimate", "seed", type=_seed_value, required=True)
    _arg(est, "estimate", "format", choices=("json", "csv"), default="json")

    ratio = subs.add_parser("ratio-table", help="ratio convergence table")
    _arg(ratio, "ratio-table", "n-list", dest="n_list", type=_int_list(2), required=True)
    _arg(ratio, "ratio-table", "reps", type=_positive_int, required=True)
    _arg(ratio, "ratio-table", "seed", type=_seed_value, required=True)

    nearmax = subs.add_parser("nearmax", help="near-maximal set dimension study")
    _arg(nearmax, "nearmax", "n", type=_int_list(2, ENUM_N_MAX), required=True)
    _arg(nearmax, "nearmax", "eps", type=_unit_list, required=True)
    _arg(nearmax, "nearmax", "reps", type=_positive_int, required=True)
    _arg(nearmax, "nearmax", "seed", type=_seed_value, required=True)
    _arg(nearmax, "nearmax", "m-reps", dest="m_reps", type=_positive_int, default=100_000)
    _arg(nearmax, "nearmax", "c-small", dest="c_small", type=_positive_float, default=1.0)
    _arg(nearmax, "nearmax", "c-large", dest="c_large", type=_positive_float, default=1.0)
    _arg(nearmax, "nearmax", "sensitivity", action="store_true")

    enum = subs.add_parser("enumerate", help="list every assignment's field value")
    _arg(enum, "enumerate", "input", required=True, help="cost matrix CSV")

    verify = subs.add_parser("verify", help="enumeration-vs-formula checks")
    _arg(verify, "verify", "n", type=_int_list(2, HISTOGRAM_N_MAX), required=True)
    _arg(verify, "verify", "delta", type=_unit_list, required=True)
    _arg(verify, "verify", "seed", type=_seed_value, default=0)

    for name, sub in subs.choices.items():
        _arg(sub, name, "config", default=None, help="key=value file; flags win")
        _arg(sub, name, "out", default=None, help="output path (stdout if omitted)")
        if name in ("estimate", "ratio-table", "nearmax"):
            _arg(
                sub,
                name,
                "workers",
                type=_positive_int,
                default=os.cpu_count() or 1,
                help="replication worker count (results do not depend on it)",
            )
    return parser


class UsageError(Exception):
    pass


def _config_tokens(path: str, command: str) -> list[str]:
    """Turn a flat key=value file into CLI tokens for ``command``."""
    registry = _CONFIG_KEYS[command]
    tokens: list[str] = []
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        if key == "config" or key not in registry:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        if registry[key] == "flag":
            if value.lower() not in ("true", "false"):
                raise UsageError(f"{path}:{lineno}: flag {key!r} must be true or false")
            if value.lower() == "true":
                tokens.append(f"--{key}")
        else:
            tokens.extend([f"--{key}", value])
    return tokens


def _merge_config(argv: list[str]) -> list[str]:
    """Insert config-file tokens right after the subcommand so explicit
    flags, which come later, win."""
    subcommand = None
    sub_index = -1
    for i, token in enumerate(argv):
        if not token.startswith("-"):
            subcommand = token
            sub_index = i
            break
    if subcommand is None or subcommand not in _CONFIG_KEYS:
        return argv
    path = None
    rest = argv[sub_index + 1 :]
    for i, token in enumerate(rest):
        if token == "--config" and i + 1 < len(rest):
            path = rest[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path is None:
        return argv
    return argv[: sub_index + 1] + _config_tokens(path, subcommand) + rest


class RunConfig:
    """Validated invocation: subcommand plus its flag values."""

    def __init__(self, subcommand: str, options: dict[str, object]):
        self.subcommand = subcommand
        self.options = options

    def __getattr__(self, name: str) -> object:
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name)


def parse_args(argv: list[str]) -> RunConfig:
    """Parse (and config-merge) command-line arguments into a RunConfig."""
    parser = build_parser()
    namespace = parser.parse_args(_merge_config(list(argv)))
    options = vars(namespace).copy()
    subcommand = options.pop("subcommand")
    return RunConfig(subcommand, options)


def _write_output(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(out, text)


def _report_to_json(report: EstimateReport) -> dict:
    def summary(s) -> dict:
        return {
            "mean": s.mean,
            "variance": s.variance,
            "mean_std_error": s.mean_std_error,
            "variance_std_error": s.variance_std_error,
        }

    return {
        "n": report.n,
        "replications": report.replications,
        "master_seed": report.master_seed,
        "statistics": {
            "max_value": summary(report.max_value),
            "min_value": summary(report.min_value),
            "greedy_value": summary(report.greedy_value),
            "field_mean": summary(report.field_mean),
            "residual_max": summary(report.residual_max),
        },
        "ratio": report.ratio,
        "ratio_std_error": report.ratio_std_error,
        "cov_field_mean_residual": report.cov_field_mean_residual,
        "greedy_violations": report.greedy_violations,
    }


_RATIO_COLUMNS = [
    "n",
    "reps",
    "mean_M",
    "se_M",
    "var_M",
    "se_var_M",
    "mean_W",
    "mean_greedy",
    "mean_gbar",
    "var_gbar",
    "cov_gbar_L",
    "ratio",
    "upper_E",
    "greedy_lower_E",
    "var_lower",
]


def _ratio_rows(reports: list[EstimateReport]) -> list[list[object]]:
    rows = []
    for r in reports:
        rows.append(
            [
                r.n,
                r.replications,
                r.max_value.mean,
                r.max_value.mean_std_error,
                r.max_value.variance,
                r.max_value.variance_std_error,
                r.min_value.mean,
                r.greedy_value.mean,
                r.field_mean.mean,
                r.field_mean.variance,
                r.cov_field_mean_residual,
                r.ratio,
                upper_bound_expected_max(r.n),
                greedy_lower_bound(r.n),
                variance_lower_bound(r.n),
            ]
        )
    return rows


def _cmd_solve(config: RunConfig) -> int:
    matrix = read_matrix_csv(config.input)
    solver = {
        "brute": solve_max_bruteforce,
        "exact": solve_max_exact,
        "greedy": greedy_assignment,
        "min": solve_min_exact,
    }[config.method]
    result = solver(matrix)
    document = {
        "n": matrix.n,
        "method": config.method,
        "assignment": list(result.assignment.mapping),
        "raw_sum": result.raw_sum,
        "field_value": result.field_value,
    }
    _write_output(config.out, to_json_text(document))
    return 0


def _cmd_bounds(config: RunConfig) -> int:
    header = ["n", "upper_E", "trivial_upper_E", "greedy_lower_E", "var_lower"]
    for eps in config.eps:
        header.append(f"nearmax_eps_{format(eps, 'g')}")
    for delta in config.delta:
        header.append(f"V_delta_{format(delta, 'g')}")
        header.append(f"Vbound_delta_{format(delta, 'g')}")
    rows: list[list[object]] = []
    for n in config.n_list:
        row_bounds = bounds_row(n)
        row: list[object] = [
            n,
            row_bounds.upper_E,
            row_bounds.trivial_upper_E,
            row_bounds.greedy_lower_E,
            row_bounds.var_lower,
        ]
        for eps in config.eps:
            if n >= 2:
                bound = nearmax_theorem_bound(
                    n, eps, c_small=config.c_small, c_large=config.c_large
                )
                row.append(bound.bound_value)
            else:
                row.append("")
        for delta in config.delta:
            # Exact counts stay decimal strings so big integers survive CSV.
            row.append(str(ball_size(n, delta)) if n <= EXACT_N_MAX else "")
            row.append(ball_size_upper_bound(n, delta))
        rows.append(row)
    _write_output(config.out, to_csv_text(header, rows))
    return 0


def _cmd_estimate(config: RunConfig) -> int:
    report = estimate(config.n, config.reps, config.seed, workers=config.workers)
    if config.format == "json":
        text = to_json_text(_report_to_json(report))
    else:
        text = to_csv_text(_RATIO_COLUMNS, _ratio_rows([report]))
    _write_output(config.out, text)
    return 0


def _cmd_ratio_table(config: RunConfig) -> int:
    reports = ratio_table(config.n_list, config.reps, config.seed, workers=config.workers)
    _write_output(config.out, to_csv_text(_RATIO_COLUMNS, _ratio_rows(reports)))
    return 0


_NEARMAX_COLUMNS = [
    "n",
    "eps",
    "m_used",
    "m_se",
    "reps",
    "empty_frac",
    "mean_log_size_nonempty",
    "se",
    "dimension",
    "bound_small",
    "bound_large",
]


def _cmd_nearmax(config: RunConfig) -> int:
    rows = nearmax_table(
        config.n,
        config.eps,
        config.reps,
        config.seed,
        m_reps=config.m_reps,
        c_small=config.c_small,
        c_large=config.c_large,
        sensitivity=config.sensitivity,
        workers=config.workers,
    )
    table = [
        [
            row.n,
            row.epsilon,
            row.m_used,
            row.m_std_error,
            row.replications,
            row.empty_fraction,
            row.mean_log_size_nonempty,
            row.se_log_size,
            row.dimension,
            row.bound_small,
            row.bound_large,
        ]
        for row in rows
    ]
    _write_output(config.out, to_csv_text(_NEARMAX_COLUMNS, table))
    return 0


def _cmd_enumerate(config: RunConfig) -> int:
    matrix = read_matrix_csv(config.input)
    rows = [[perm.to_text(), value] for perm, value in enumerate_field(matrix)]
    _write_output(config.out, to_csv_text(["permutation", "field_value"], rows))
    return 0


def _cmd_verify(config: RunConfig) -> int:
    lines: list[str] = []
    failed = False

    def check(label: str, ok: bool, detail: str = "") -> None:
        nonlocal failed
        status = "ok" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        lines.append(f"{status}: {label}{suffix}")
        failed = failed or not ok

    for n in config.n:
        for delta in config.delta:
            ball = verify_ball_size(n, delta, seed=config.seed)
            check(
                f"ball size n={n} delta={format(delta, 'g')}",
                ball.passed,
                f"counts={ball.counts} closed_form={ball.expected} "
                f"bound={fmt(ball.upper_bound)}",
            )
        table = correlation_histogram_exact(n)
        check(
            f"agreement histogram n={n}",
            table.counts == RencontresTable.for_size(n).counts,
            f"counts={table.counts}",
        )
        matrix = sample_cost_matrix(n, derive_seed(config.seed, n, 2))
        closed = float(matrix.entries.sum()) / (n * math.sqrt(n))
        enumerated = enumerated_field_mean(matrix)
        check(
            f"field mean identity n={n}",
            abs(enumerated - closed) <= 1e-10 * max(1.0, abs(closed)),
            f"enumerated={fmt(enumerated)} closed={fmt(closed)}",
        )
        brute = solve_max_bruteforce(matrix)
        exact = solve_max_exact(matrix)
        check(
            f"solver agreement n={n}",
            abs(brute.raw_sum - exact.raw_sum) <= 1e-9,
            f"brute={fmt(brute.raw_sum)} exact={fmt(exact.raw_sum)}",
        )
        if n <= 7:
            check(
                f"mean correlation n={n}",
                mean_correlation_exhaustive(n) == Fraction(1, n),
            )
    text = "\n".join(lines) + "\n"
    _write_output(config.out, text)
    if config.out is not None:
        sys.stdout.write(text)
    return _FAILURE_EXIT if failed else 0


_COMMANDS = {
    "solve": _cmd_solve,
    "bounds": _cmd_bounds,
    "estimate": _cmd_estimate,
    "ratio-table": _cmd_ratio_table,
    "nearmax": _cmd_nearmax,
    "enumerate": _cmd_enumerate,
    "verify": _cmd_verify,
}


def run(config: RunConfig) -> int:
    """Dispatch a parsed configuration to its subcommand."""
    return _COMMANDS[config.subcommand](config)


def _configure_logging() -> None:
    raw = os.environ.get("GRAF_LOG", "warn").lower()
    if raw not in _LOG_LEVELS:
        raise UsageError(
            f"GRAF_LOG must be one of {sorted(_LOG_LEVELS)}, got {raw!r}"
        )
    logging.basicConfig(
        level=_LOG_LEVELS[raw],
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: list[str] | None = None) -> int:
    """CLI entry point; returns the process exit status."""
    if argv is None:
        argv = sys.argv[1:]
    started = time.monotonic()
    try:
        _configure_logging()
        config = parse_args(list(argv))
        status = run(config)
    except UsageError as exc:
        print(f"graf: error: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else _USAGE_EXIT
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"graf: error: {exc}", file=sys.stderr)
        return _FAILURE_EXIT
    if status == 0 and config.options.get("out") is not None:
        manifest = {
            "tool": "graf",
            "version": __version__,
            "subcommand": config.subcommand,
            "config": {
                key: list(value) if isinstance(value, list) else value
                for key, value in sorted(config.options.items())
                if key != "config"
            },
            "elapsed_seconds": time.monotonic() - started,
        }
        sys.stdout.write(to_json_text(manifest))
    return status


if __name__ == "__main__":
    sys.exit(main())
