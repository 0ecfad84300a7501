"""Command-line entry point for sweeps, line scans, and point analyses.

Usage examples::

    duffspec --method both --gamma 2 --chi 1 \
        --delta-range -10:2:241 --epsilon-range 0.05:5:100 --out-dir out

    duffspec --scan epsilon=3.2 --method closed-form --out-dir out

    duffspec --point delta=-5.2,epsilon=3.2 \
        --analyze entropy,spectrum,metastable,mixing-curve --out-dir out

    duffspec --circuit circuit.json --analyze entropy --out-dir out

Options given on the command line override the same keys from --config.
On failure a machine-readable error report is written to stderr as JSON
and the exit status is nonzero (2 for configuration problems, 1 for
runtime failures).
"""

import argparse
import json
import sys

from . import __version__
from .sweep import (
    ANALYZE_TASKS,
    METHODS,
    ConfigError,
    SweepConfig,
    analyze,
    config_from_dict,
    load_config,
    resolve_circuit,
    run_sweep_to_dir,
    validate_config,
)


def _parse_range(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}")
    try:
        return (float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}: {exc}") from None


def _parse_assignments(text, allowed):
    out = {}
    for item in text.split(","):
        if "=" not in item:
            raise argparse.ArgumentTypeError(f"expected key=value, got {item!r}")
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in allowed:
            raise argparse.ArgumentTypeError(f"unknown key {key!r}; allowed: {sorted(allowed)}")
        try:
            out[key] = float(value)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad value for {key!r}: {exc}") from None
    return out


def _parse_scan(text):
    out = _parse_assignments(text, {"epsilon", "delta"})
    if len(out) != 1:
        raise argparse.ArgumentTypeError("scan takes exactly one of epsilon=/delta=")
    return out


def _parse_point(text):
    out = _parse_assignments(text, {"epsilon", "delta"})
    if set(out) != {"epsilon", "delta"}:
        raise argparse.ArgumentTypeError("point needs delta=...,epsilon=...")
    return out


def _parse_analyze(text):
    tasks = tuple(t.strip() for t in text.split(",") if t.strip())
    for task in tasks:
        if task not in ANALYZE_TASKS:
            raise argparse.ArgumentTypeError(
                f"unknown task {task!r}; choose from {', '.join(ANALYZE_TASKS)}"
            )
    return tasks


def build_parser():
    parser = argparse.ArgumentParser(
        prog="duffspec",
        description=(
            "Steady-state response of a driven, damped Kerr oscillator: "
            "parameter sweeps, line scans, and single-point analyses."
        ),
    )
    parser.add_argument("--version", action="version", version=f"duffspec {__version__}")
    parser.add_argument("--config", help="JSON config file; flags override its keys")
    parser.add_argument("--method", choices=METHODS, help="response evaluation method")
    parser.add_argument("--gamma", type=float, help="decay rate")
    parser.add_argument("--chi", type=float, help="anharmonicity")
    parser.add_argument(
        "--delta-range", type=_parse_range, metavar="LO:HI:N", help="detuning grid"
    )
    parser.add_argument(
        "--epsilon-range", type=_parse_range, metavar="LO:HI:N", help="drive-amplitude grid"
    )
    parser.add_argument(
        "--scan",
        type=_parse_scan,
        metavar="epsilon=V|delta=V",
        help="run a 1-D line scan at the fixed value",
    )
    parser.add_argument(
        "--point",
        type=_parse_point,
        metavar="delta=V,epsilon=V",
        help="parameter point for --analyze",
    )
    parser.add_argument(
        "--analyze",
        type=_parse_analyze,
        metavar="TASK[,TASK...]",
        help=f"point analyses to run ({', '.join(ANALYZE_TASKS)})",
    )
    parser.add_argument("--circuit", help="circuit-parameter JSON file")
    parser.add_argument("--out-dir", help="output directory")
    parser.add_argument("--workers", type=int, help="process count for numeric sweeps")
    parser.add_argument("--dim", type=int, help="fixed truncation (default: adaptive)")
    return parser


_FLAG_FIELDS = (
    "method",
    "gamma",
    "chi",
    "delta_range",
    "epsilon_range",
    "scan",
    "point",
    "analyze",
    "circuit",
    "out_dir",
    "workers",
    "dim",
)


def merge_config(args):
    if args.config:
        base = load_config(args.config)
    else:
        base = SweepConfig()
    overrides = {}
    for name in _FLAG_FIELDS:
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    merged = config_from_dict({**_as_dict(base), **overrides})
    return merged


def _as_dict(config):
    return {name: getattr(config, name) for name in SweepConfig.__dataclass_fields__}


def _emit_error(kind, exc):
    report = {"error": {"kind": kind, "type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(report, sort_keys=True), file=sys.stderr)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = merge_config(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        _emit_error("config", exc)
        return 2
    try:
        if config.analyze:
            manifest = analyze(config)
            print(f"analyze: {len(manifest['tasks'])} task(s) -> {config.out_dir}")
            if manifest["failed_tasks"]:
                failed = [k for k, v in manifest["tasks"].items() if v["status"] == "error"]
                _emit_error(
                    "analysis",
                    RuntimeError(
                        f"{manifest['failed_tasks']} task(s) failed: {', '.join(failed)}; "
                        "see manifest.json for details"
                    ),
                )
                return 1
        elif config.scan is not None:
            config, _, _ = resolve_circuit(config)
            manifest = run_sweep_to_dir(validate_config(config), kind="scan")
            print(f"scan: {manifest['grid']} -> {config.out_dir}")
        else:
            config, _, _ = resolve_circuit(config)
            manifest = run_sweep_to_dir(validate_config(config), kind="sweep")
            print(f"sweep: {manifest['grid']} -> {config.out_dir}")
    except ConfigError as exc:
        _emit_error("config", exc)
        return 2
    except Exception as exc:
        _emit_error("runtime", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
