"""Command-line front end.

Subcommands: ``simulate`` writes a synthetic measurement, ``detect`` runs a
detection on a measurement file, ``experiment`` sweeps a configuration grid,
``selftest`` validates the statistical kernels against their Monte Carlo
oracles. Every output artifact gets a manifest JSON sufficient to re-run the
exact command.

Exit codes: 0 success, 1 runtime failure, 2 flag/usage error, 3 unparseable
input file.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .experiment import (
    METHODS,
    MetricsSummary,
    TrialConfig,
    csv_rows,
    run_config_trials,
    summarize,
    write_grid_sidecar,
    CSV_COLUMNS,
)
from .filtering import KernelSpec, write_candidates_csv
from .ksample import NeighborConfig, SIDE_POLICIES
from .oracles import run_oracles
from .pipeline import k_sample_test, one_sample_test, write_detection_json
from .signal_model import (
    MeasurementFormatError,
    NoiseSpec,
    SignalSpec,
    place_occurrences,
    read_measurement_csv,
    synthesize,
    write_measurement_csv,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_INPUT = 3


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return value


def _alpha_value(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie strictly between 0 and 1")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return value


def _default_seed() -> int:
    env = os.environ.get("PEAKFDR_SEED")
    return int(env) if env else 0


def _atomic_write_json(payload: dict, path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, indent=2, default=str)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_manifest(primary_output: str, command: str, config: dict, seed, outputs: list) -> str:
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "config": config,
        "seed": seed,
        "tool_version": __version__,
        "outputs": [str(p) for p in outputs],
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    path = f"{primary_output}.manifest.json"
    _atomic_write_json(manifest, path)
    return path


# --- simulate ---------------------------------------------------------------


def _cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    hw = args.c * args.b
    min_gap = args.min_gap if args.min_gap is not None else 2.0 * hw
    centers = place_occurrences(
        args.signals, args.L, args.dt,
        support_halfwidth=hw, min_gap=min_gap,
        seed=seed, stream_id=0,
    )
    signal = SignalSpec(args.a, args.b, args.c, tuple(centers))
    noise = NoiseSpec(args.sigma, args.nu)
    m = synthesize(signal, noise, args.L, args.dt, seed=seed, stream_id=1)
    write_measurement_csv(m, args.out)
    config = {
        "L": args.L, "signals": args.signals, "a": args.a, "b": args.b,
        "c": args.c, "sigma": args.sigma, "nu": args.nu, "dt": args.dt,
        "min_gap": min_gap, "centers": [float(c) for c in centers],
    }
    write_manifest(args.out, "simulate", config, seed, [args.out])
    print(f"wrote {args.out} ({args.L} rows)")
    return EXIT_OK


# --- detect ------------------------------------------------------------------


def _cmd_detect(args) -> int:
    try:
        m = read_measurement_csv(args.input)
    except MeasurementFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    kernel = KernelSpec(args.gamma)
    noise = NoiseSpec(args.sigma, args.nu)
    if args.method == "one-sample":
        result = one_sample_test(m, kernel, noise, args.alpha, args.moments_bandwidth)
    else:
        nc = NeighborConfig(distance=args.d, k=args.k, side_policy=args.policy)
        result = k_sample_test(
            m, kernel, noise, args.alpha, nc,
            moments_bandwidth=args.moments_bandwidth,
            neighbor_floor=args.neighbor_floor,
        )
    write_detection_json(result, args.out)
    outputs = [args.out]
    if args.candidates_out:
        write_candidates_csv(result.candidates, m, args.candidates_out)
        outputs.append(args.candidates_out)
    config = dict(result.params, method=args.method, input=str(args.input))
    write_manifest(args.out, "detect", config, None, outputs)
    print(f"wrote {args.out}: {len(result.detected)} detections "
          f"from {len(result.candidates)} candidates")
    return EXIT_OK


# --- experiment ---------------------------------------------------------------

_GRID_KEYS = (
    "L", "n_signals", "a", "b", "c", "sigma", "nu", "gamma", "alpha", "d",
    "policy", "n_trials", "base_seed", "moments_bandwidth", "min_gap",
)
_SWEEPABLE = ("a", "b", "c", "sigma", "nu", "gamma", "alpha", "d", "policy",
              "moments_bandwidth")
_SCALAR_INT = ("L", "n_signals", "n_trials", "base_seed")


class GridConfigError(ValueError):
    pass


def _parse_scalar(token: str):
    for cast in (int, float):
        try:
            return cast(token)
        except ValueError:
            continue
    return token


def _parse_kv_tokens(tokens: list[str]) -> dict:
    grid = {}
    for token in tokens:
        if "=" not in token:
            raise GridConfigError(f"expected key=value, got {token!r}")
        key, _, raw = token.partition("=")
        if key not in _GRID_KEYS:
            raise GridConfigError(f"unknown grid key {key!r}")
        parts = [p for p in raw.split(",") if p != ""]
        values = [_parse_scalar(p) for p in parts]
        grid[key] = values if len(values) > 1 else values[0]
    return grid


def _load_grid_config(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise GridConfigError("config file must hold a JSON object")
    unknown = set(data) - set(_GRID_KEYS)
    if unknown:
        raise GridConfigError(f"unknown grid keys {sorted(unknown)}")
    return data


def expand_grid(grid: dict) -> list[TrialConfig]:
    """Cartesian product over the list-valued sweep axes, in a fixed order."""
    for key in ("a", "b", "sigma", "nu", "gamma", "d"):
        if key not in grid:
            raise GridConfigError(f"grid is missing required key {key!r}")
    for key in _SCALAR_INT:
        if isinstance(grid.get(key), list):
            raise GridConfigError(f"{key} cannot be swept")
    axes = [key for key in _SWEEPABLE if isinstance(grid.get(key), list)]
    fixed = {k: v for k, v in grid.items() if k not in axes}
    configs = []
    for combo in itertools.product(*(grid[k] for k in axes)):
        entry = dict(fixed)
        entry.update(dict(zip(axes, combo)))
        kwargs = {
            "a": float(entry["a"]), "b": float(entry["b"]),
            "sigma": float(entry["sigma"]), "nu": float(entry["nu"]),
            "gamma": float(entry["gamma"]), "d": int(entry["d"]),
        }
        for key, field_name, cast in (
            ("L", "L", int), ("n_signals", "n_signals", int), ("c", "c", float),
            ("alpha", "alpha", float), ("policy", "side_policy", str),
            ("n_trials", "n_trials", int), ("base_seed", "base_seed", int),
            ("moments_bandwidth", "moments_bandwidth", str),
            ("min_gap", "min_gap", float),
        ):
            if key in entry and entry[key] is not None:
                kwargs[field_name] = cast(entry[key])
        try:
            configs.append(TrialConfig(**kwargs))
        except ValueError as exc:
            raise GridConfigError(str(exc)) from exc
    return configs


def _cmd_experiment(args) -> int:
    grid: dict = {}
    if args.config:
        try:
            grid.update(_load_grid_config(args.config))
        except (OSError, json.JSONDecodeError, GridConfigError) as exc:
            print(f"error: config file: {exc}", file=sys.stderr)
            return EXIT_INPUT
    try:
        grid.update(_parse_kv_tokens(args.settings))
        if args.trials is not None:
            grid["n_trials"] = args.trials
        if args.seed is not None:
            grid["base_seed"] = args.seed
        elif "base_seed" not in grid:
            grid["base_seed"] = _default_seed()
        configs = expand_grid(grid)
    except GridConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    summaries: list[MetricsSummary] = []
    # stream rows config by config so partial results survive a failure
    with open(args.out, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        fh.flush()
        try:
            for cfg in configs:
                summary = summarize(run_config_trials(cfg, parallel=args.parallel))
                summaries.append(summary)
                for row in csv_rows(summary):
                    fh.write(row + "\n")
                fh.flush()
        finally:
            sidecar = f"{args.out}.sidecar.json"
            write_grid_sidecar(summaries, sidecar)
            write_manifest(
                args.out, "experiment", {"grid": grid, "parallel": args.parallel},
                grid.get("base_seed"), [args.out, sidecar],
            )
    print(f"wrote {args.out}: {len(summaries)} configs x {len(METHODS)} methods")
    return EXIT_OK


# --- selftest -----------------------------------------------------------------


def _cmd_selftest(args) -> int:
    reports = run_oracles(quick=args.quick, only=args.oracle)
    for report in reports:
        print(report.line())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_RUNTIME


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peakfdr",
        description="FDR-controlled detection of signal occurrences in noisy 1-D measurements",
    )
    parser.add_argument("--version", action="version", version=f"peakfdr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="synthesize a measurement and write it as CSV")
    sim.add_argument("--L", type=_positive_int, default=1000, help="number of samples")
    sim.add_argument("--signals", type=_nonneg_int, default=10, help="number of occurrences")
    sim.add_argument("--a", type=_positive_float, default=5.0, help="occurrence amplitude")
    sim.add_argument("--b", type=_positive_float, default=3.0, help="occurrence width (sd)")
    sim.add_argument("--c", type=_positive_float, default=3.0, help="support half-width in widths")
    sim.add_argument("--sigma", type=_nonneg_float, default=1.0, help="noise scale")
    sim.add_argument("--nu", type=_positive_float, default=4.0, help="noise correlation bandwidth")
    sim.add_argument("--dt", type=_positive_float, default=1.0, help="grid spacing")
    sim.add_argument("--min-gap", type=_nonneg_float, default=None, help="minimum gap between supports")
    sim.add_argument("--seed", type=int, default=None, help="seed (default: PEAKFDR_SEED or 0)")
    sim.add_argument("-o", "--out", default="measurement.csv")
    sim.set_defaults(func=_cmd_simulate)

    det = sub.add_parser("detect", help="run a detection on a measurement CSV")
    det.add_argument("--input", required=True, help="measurement CSV (needs t and y columns)")
    det.add_argument("--method", choices=("one-sample", "two-sample"), required=True)
    det.add_argument("--gamma", type=_positive_float, required=True, help="smoothing bandwidth")
    det.add_argument("--alpha", type=_alpha_value, default=0.05, help="FDR level in (0,1)")
    det.add_argument("--sigma", type=_positive_float, required=True, help="noise scale (known)")
    det.add_argument("--nu", type=_positive_float, required=True, help="noise bandwidth (known)")
    det.add_argument("--d", type=_positive_int, default=2, help="neighbor distance in samples")
    det.add_argument("--policy", choices=SIDE_POLICIES, default="right")
    det.add_argument("--k", type=_positive_int, default=2,
                     help="samples per test (k>2 switches to Monte Carlo p-values)")
    det.add_argument("--moments-bandwidth", choices=("composed", "raw"), default="composed")
    det.add_argument("--neighbor-floor", action="store_true",
                     help="debug: force the neighbor threshold to -inf")
    det.add_argument("--candidates-out", default=None,
                     help="also write the candidate table as CSV")
    det.add_argument("-o", "--out", default="detection.json")
    det.set_defaults(func=_cmd_detect)

    exp = sub.add_parser("experiment", help="run a Monte Carlo trial grid and write CSV")
    exp.add_argument("settings", nargs="*", metavar="KEY=VALUE",
                     help="grid settings; comma-separate swept values, e.g. gamma=1,2,3")
    exp.add_argument("--config", help="JSON config file; flags and KEY=VALUE override it")
    exp.add_argument("--parallel", type=_positive_int, default=1, help="worker processes")
    exp.add_argument("--trials", type=_positive_int, default=None, help="override n_trials")
    exp.add_argument("--seed", type=int, default=None, help="override base_seed")
    exp.add_argument("-o", "--out", default="experiment.csv")
    exp.set_defaults(func=_cmd_experiment)

    st = sub.add_parser("selftest", help="validate the statistical kernels against oracles")
    st.add_argument("--quick", action="store_true",
                    help="smaller sample counts and looser tolerances")
    st.add_argument("--oracle", choices=("moments", "palm", "bh", "two-sample"),
                    default=None, help="run a single oracle")
    st.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MeasurementFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BrokenPipeError:
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
