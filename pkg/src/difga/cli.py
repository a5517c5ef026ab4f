"""Command-line entry point: experiment selection, overrides, CSV/JSON output.

Seeding precedence is flag > DIFGA_SEED environment variable > default 42,
so bare invocations are reproducible. Numeric output uses the shortest
round-trip decimal representation; identical configurations produce
byte-identical files for deterministic (delta = 0) experiments.
"""

from __future__ import annotations

import argparse
import csv
import inspect
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .circuits import CircuitSpec, RecoveryParams
from .experiments import (
    EXPERIMENT_IDS,
    EXPERIMENT_RUNNERS,
    DEFAULT_SEED,
    ExperimentResult,
    gradient_check,
    run_experiment,
)
from .noise import NoiseModel
from .training import TrainConfig, train, loss

__all__ = ["RunConfig", "parse_args", "write_results", "main", "COLUMN_SCHEMAS"]

SEED_ENV_VAR = "DIFGA_SEED"
DELTA_RANGE = (0.0, 0.8)
ETA_RANGE = (0.0, 1.0)

COLUMN_SCHEMAS = {
    "loss_sweep": ("eta", "baseline_loss", "final_loss", "degradation_DT"),
    "sm_vs_mm": ("variant", "final_loss"),
    "phase_diagram": ("delta", "eta", "log10_final_loss"),
    "generalization": ("delta", "gauss_trained_error", "ng_trained_error"),
    "critical_threshold": ("delta", "baseline_error", "mitigated_error"),
    "mode_scaling": ("total_modes", "baseline_error", "mitigated_error"),
    "param_dynamics": ("step", "loss", "p0", "p1", "p2", "p3", "p4", "p5"),
    "runtime_vs_k": ("samples_K", "seconds", "slowdown"),
}


@dataclass
class RunConfig:
    """One resolved CLI invocation of an experiment."""

    experiment_id: str
    overrides: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    output_dir: Path = Path("results")
    format: str = "both"


class CliError(Exception):
    """A named configuration error; printed and mapped to a nonzero exit."""


def _ranged_float(name: str, lo: float, hi: float):
    def parse(text: str) -> float:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}")
        if math.isnan(value) or not lo <= value <= hi:
            raise argparse.ArgumentTypeError(
                f"{name} exceeds documented range [{lo:g}, {hi:g}]: {text}"
            )
        return value

    return parse


def _positive_int(name: str, minimum: int = 1):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}")
        if value < minimum:
            raise argparse.ArgumentTypeError(f"{name} must be at least {minimum}, got {value}")
        return value

    return parse


def _positive_float(name: str):
    def parse(text: str) -> float:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}")
        if not value > 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {value}")
        return value

    return parse


def _float_list(name: str, lo: float, hi: float):
    item = _ranged_float(name, lo, hi)

    def parse(text: str) -> list[float]:
        return [item(part) for part in text.split(",") if part.strip()]

    return parse


def _add_common_noise_flags(parser: argparse.ArgumentParser, grids: bool = False) -> None:
    if grids:
        parser.add_argument("--eta", type=_float_list("eta", *ETA_RANGE),
                            help="comma-separated transmissivity grid")
        parser.add_argument("--delta", type=_float_list("delta", *DELTA_RANGE),
                            help="comma-separated jitter grid")
    else:
        parser.add_argument("--eta", type=_ranged_float("eta", *ETA_RANGE),
                            help="loss transmissivity in [0, 1]")
        parser.add_argument("--delta", type=_ranged_float("delta", *DELTA_RANGE),
                            help="signal phase-jitter std dev in [0, 0.8]")
    parser.add_argument("--kappa", type=_positive_float("kappa"),
                        help="ancilla jitter factor (ancilla std dev = kappa * delta)")
    parser.add_argument("--samples", type=_positive_int("samples"),
                        help="Monte-Carlo sample count K")
    parser.add_argument("--steps", type=_positive_int("steps"), help="gradient-descent steps")
    parser.add_argument("--lr", type=_positive_float("lr"), help="learning rate")
    parser.add_argument("--ancillas", type=_positive_int("ancillas", minimum=0),
                        help="number of ancilla modes")
    parser.add_argument("--seed", type=_positive_int("seed", minimum=0), help="base PRNG seed")
    parser.add_argument("--frozen-noise", action=argparse.BooleanOptionalAction, default=None,
                        help="reuse one kick set for every training step")
    parser.add_argument("--eval-samples", type=_positive_int("eval-samples"),
                        help="Monte-Carlo sample count for post-training evaluation")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="difga",
        description="Differentiable Gaussian photonic circuits with a trainable recovery layer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named experiment and write CSV/JSON results")
    run.add_argument("experiment_id", help=f"one of: {', '.join(EXPERIMENT_IDS)}")
    _add_common_noise_flags(run)
    run.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    run.add_argument("--format", choices=("csv", "json", "both"), default="both")
    run.add_argument("--workers", type=_positive_int("workers"), help="work-pool size")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override any runner keyword (repeatable)")

    tr = sub.add_parser("train", help="one training run with explicit parameters")
    _add_common_noise_flags(tr)
    tr.add_argument("--out", type=Path, help="optional directory for the step log CSV")

    sw = sub.add_parser("sweep", help="train over a custom eta x delta grid")
    _add_common_noise_flags(sw, grids=True)
    sw.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    sw.add_argument("--format", choices=("csv", "json", "both"), default="both")

    gc = sub.add_parser("gradcheck", help="forward-mode vs finite-difference oracle suite")
    gc.add_argument("--seed", type=_positive_int("seed", minimum=0))
    gc.add_argument("--configs", type=_positive_int("configs"), default=50,
                    help="number of random configurations")

    sub.add_parser("list", help="enumerate available experiments")
    return parser


def _resolve_seed(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env_value = os.environ.get(SEED_ENV_VAR)
    if env_value is not None:
        try:
            return int(env_value)
        except ValueError:
            raise CliError(f"{SEED_ENV_VAR} must be an integer, got {env_value!r}")
    return DEFAULT_SEED


def _parse_override_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


# Flags whose values flow into runner keywords when the runner accepts them.
_FLAG_TO_KWARG = {
    "eta": "eta",
    "delta": "delta",
    "kappa": "kappa",
    "samples": "samples",
    "steps": "steps",
    "lr": "learning_rate",
    "eval_samples": "eval_samples",
    "frozen_noise": "frozen_noise",
    "workers": "workers",
}

# Grid experiments take sequences; a scalar flag rescales the default grid
# up to the given maximum.
_GRID_KWARGS = {
    ("loss_sweep", "eta"): "etas",
    ("phase_diagram", "eta"): "etas",
    ("phase_diagram", "delta"): "deltas",
    ("generalization", "delta"): "deltas",
    ("critical_threshold", "delta"): "deltas",
}


def _experiment_kwargs(experiment_id: str, args: argparse.Namespace) -> dict:
    runner = EXPERIMENT_RUNNERS[experiment_id]
    accepted = set(inspect.signature(runner).parameters)
    kwargs: dict = {"seed": _resolve_seed(args.seed)}
    for flag, kwarg in _FLAG_TO_KWARG.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        grid_kwarg = _GRID_KWARGS.get((experiment_id, flag))
        if grid_kwarg is not None:
            default_grid = inspect.signature(runner).parameters[grid_kwarg].default
            kwargs[grid_kwarg] = [g for g in default_grid if g <= value] or [value]
        elif kwarg in accepted:
            kwargs[kwarg] = value
        else:
            raise CliError(f"unknown override key {flag!r} for experiment {experiment_id!r}")
    if getattr(args, "ancillas", None) is not None:
        if "ancilla_counts" in accepted:
            kwargs["ancilla_counts"] = list(range(args.ancillas + 1))
        else:
            raise CliError(f"unknown override key 'ancillas' for experiment {experiment_id!r}")
    for item in getattr(args, "set", []):
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep:
            raise CliError(f"--set expects KEY=VALUE, got {item!r}")
        if key not in accepted:
            raise CliError(f"unknown override key {key!r} for experiment {experiment_id!r}")
        kwargs[key] = _parse_override_value(raw)
    return kwargs


def parse_args(argv: list[str] | None = None) -> tuple[argparse.Namespace, RunConfig | None]:
    """Parse the command line; for ``run``, also resolve a RunConfig."""
    args = _build_parser().parse_args(argv)
    if args.command != "run":
        return args, None
    if args.experiment_id not in EXPERIMENT_RUNNERS:
        raise CliError(
            f"unknown experiment {args.experiment_id!r}; choose from {', '.join(EXPERIMENT_IDS)}"
        )
    overrides = _experiment_kwargs(args.experiment_id, args)
    config = RunConfig(
        experiment_id=args.experiment_id,
        overrides={k: v for k, v in overrides.items() if k != "seed"},
        seed=overrides["seed"],
        output_dir=args.out,
        format=args.format,
    )
    return args, config


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_results(result: ExperimentResult, config: RunConfig) -> list[Path]:
    """Write one CSV and/or JSON file named after the experiment."""
    out_dir = Path(config.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise CliError(f"cannot create output directory {out_dir}: {err}")
    columns = COLUMN_SCHEMAS[result.experiment_id]
    paths: list[Path] = []
    if config.format in ("csv", "both"):
        path = out_dir / f"{result.experiment_id}.csv"
        try:
            with open(path, "w", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(columns)
                for row in result.rows:
                    writer.writerow([_format_cell(row.get(col)) for col in columns])
        except OSError as err:
            raise CliError(f"cannot write {path}: {err}")
        paths.append(path)
    if config.format in ("json", "both"):
        path = out_dir / f"{result.experiment_id}.json"
        payload = {
            "experiment_id": result.experiment_id,
            "config_snapshot": result.config_snapshot,
            "summary": result.summary,
            "rows": result.rows,
        }
        try:
            with open(path, "w") as handle:
                json.dump(payload, handle, indent=2)
                handle.write("\n")
        except OSError as err:
            raise CliError(f"cannot write {path}: {err}")
        paths.append(path)
    return paths


def _cmd_run(args: argparse.Namespace, config: RunConfig) -> int:
    result = run_experiment(config.experiment_id, seed=config.seed, **config.overrides)
    paths = write_results(result, config)
    for path in paths:
        print(f"wrote {path}")
    for key, value in result.summary.items():
        print(f"{key}: {value}")
    failed = result.failed_rows
    for row in failed:
        print(f"row failed: {row}", file=sys.stderr)
    return 1 if failed else 0


def _train_components(args: argparse.Namespace):
    seed = _resolve_seed(args.seed)
    eta = args.eta if args.eta is not None else 0.55
    delta = args.delta if args.delta is not None else 0.0
    spec = CircuitSpec(
        eta=eta, num_ancillas=args.ancillas if args.ancillas is not None else 1
    )
    model = NoiseModel(
        eta=eta,
        delta=delta,
        kappa=args.kappa if args.kappa is not None else 0.6,
        samples=args.samples if args.samples is not None else 16,
        seed=seed,
        frozen=bool(args.frozen_noise),
    )
    mode = "ng-aware" if delta > 0 else "gaussian-only"
    config = TrainConfig(
        learning_rate=args.lr if args.lr is not None else 0.06,
        steps=args.steps if args.steps is not None else 60,
        noise_mode=mode,
    )
    return spec, model, config


def _cmd_train(args: argparse.Namespace) -> int:
    spec, model, config = _train_components(args)
    record = train(spec, model, config)
    print(f"final loss: {float(record.loss_history[-1])!r}")
    print(f"final params: {[round(float(v), 6) for v in record.final_params.values]}")
    print(f"wall time: {record.wall_time:.3f} s")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "train.csv"
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            num_params = record.param_history.shape[1]
            writer.writerow(["step", "loss"] + [f"p{k}" for k in range(num_params)])
            for step in range(record.loss_history.size):
                writer.writerow(
                    [step, repr(float(record.loss_history[step]))]
                    + [repr(float(v)) for v in record.param_history[step]]
                )
        print(f"wrote {path}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    etas = args.eta if args.eta else [0.55]
    deltas = args.delta if args.delta else [0.0]
    ancillas = args.ancillas if args.ancillas is not None else 1
    rows = []
    for eta in etas:
        for delta in deltas:
            spec = CircuitSpec(eta=eta, num_ancillas=ancillas)
            model = NoiseModel(
                eta=eta,
                delta=delta,
                kappa=args.kappa if args.kappa is not None else 0.6,
                samples=args.samples if args.samples is not None else 16,
                seed=seed,
                frozen=bool(args.frozen_noise),
            )
            config = TrainConfig(
                learning_rate=args.lr if args.lr is not None else 0.06,
                steps=args.steps if args.steps is not None else 60,
                noise_mode="ng-aware" if delta > 0 else "gaussian-only",
            )
            baseline = loss(spec, RecoveryParams.zeros(ancillas), model, step=0)
            record = train(spec, model, config)
            rows.append(
                {
                    "eta": float(eta),
                    "delta": float(delta),
                    "baseline_loss": float(baseline),
                    "final_loss": float(record.loss_history[-1]),
                }
            )
            print(f"eta={eta:g} delta={delta:g}: final loss {record.loss_history[-1]:.3e}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.format in ("csv", "both"):
        path = out_dir / "sweep.csv"
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["eta", "delta", "baseline_loss", "final_loss"])
            for row in rows:
                writer.writerow([_format_cell(row[c]) for c in ("eta", "delta", "baseline_loss", "final_loss")])
        print(f"wrote {path}")
    if args.format in ("json", "both"):
        path = out_dir / "sweep.json"
        with open(path, "w") as handle:
            json.dump({"seed": seed, "rows": rows}, handle, indent=2)
            handle.write("\n")
        print(f"wrote {path}")
    return 0


def _cmd_gradcheck(args: argparse.Namespace) -> int:
    rows = gradient_check(seed=_resolve_seed(args.seed), num_configs=args.configs)
    worst = max(rows, key=lambda r: r["max_abs_deviation"])
    ok = all(r["ok"] for r in rows)
    print(f"checked {len(rows)} configurations")
    print(f"worst absolute deviation: {worst['max_abs_deviation']:.3e} "
          f"(eta={worst['eta']:.3f}, delta={worst['delta']:.3f}, M={worst['total_modes']})")
    print("gradient oracle:", "ok" if ok else "MISMATCH")
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    try:
        args, config = parse_args(argv)
        if args.command == "list":
            for experiment_id in EXPERIMENT_IDS:
                print(experiment_id)
            return 0
        if args.command == "run":
            return _cmd_run(args, config)
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "gradcheck":
            return _cmd_gradcheck(args)
        raise CliError(f"unhandled command {args.command!r}")
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
