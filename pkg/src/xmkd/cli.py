"""Command-line entry point.

Subcommands: synth-data, train-discom, train-teacher, distill, eval, ablate.
Exit codes: 0 success, 2 usage/config errors, 3 data errors, 4 training
divergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ExperimentConfig, apply_overrides
from .data import save_dataset
from .errors import (
    CheckpointError,
    ConfigError,
    DataError,
    TrainingDivergedError,
    XmkdError,
)
from .runner import (
    build_dataset,
    components_plan,
    evaluate_run_dir,
    representations_plan,
    run_ablation,
    run_repeats,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DIVERGED = 4


def _add_common(parser: argparse.ArgumentParser, need_out: bool = True) -> None:
    parser.add_argument("--config", type=Path, help="experiment config (JSON)")
    if need_out:
        parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted-key config override, repeatable (e.g. optimizer.lr=0.001)",
    )
    parser.add_argument("--seeds", help="comma-separated run seeds, overrides the config")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xmkd",
        description="Cross-modal knowledge distillation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, descr in (
        ("synth-data", "generate a synthetic paired dataset as tensor files plus a manifest"),
        ("train-discom", "jointly train both single-modal classifiers"),
        ("train-teacher", "train a single-modality or fusion teacher"),
        ("distill", "train a teacher (or load one) and distill a student"),
        ("eval", "recompute metrics from a run directory's checkpoints"),
        ("ablate", "run the configured ablation plan"),
    ):
        p = sub.add_parser(name, help=descr)
        if name == "eval":
            p.add_argument("--run-dir", type=Path, help="directory written by a train command")
            p.add_argument("--config", type=Path, help="resolved config.json inside a run directory")
            p.add_argument("--out", type=Path, help="where to write metrics (default: the run dir)")
            p.add_argument("--quiet", action="store_true")
        else:
            _add_common(p)
    return parser


def _load_config(args) -> ExperimentConfig:
    if args.config is not None:
        if not args.config.exists():
            raise ConfigError(f"config file not found: {args.config}")
        config_dict = ExperimentConfig.load(args.config).to_dict()
    else:
        config_dict = ExperimentConfig.desk_default().to_dict()
    if args.overrides:
        config_dict = apply_overrides(config_dict, args.overrides)
    config = ExperimentConfig.from_dict(config_dict)
    if args.seeds:
        try:
            seeds = tuple(int(s) for s in args.seeds.split(","))
        except ValueError:
            raise ConfigError(f"--seeds must be a comma-separated integer list, got {args.seeds!r}") from None
        import dataclasses

        config = dataclasses.replace(config, seeds=seeds)
        config.validate()
    return config


def _persist_config(config: ExperimentConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    config.save(out / "config.json")
    from . import __version__

    (out / "version.txt").write_text(f"xmkd {__version__}\n", encoding="utf-8")


def _say(args, message: str) -> None:
    if not getattr(args, "quiet", False):
        print(message)


def _cmd_synth_data(args) -> int:
    config = _load_config(args)
    if config.data.kind != "synth":
        raise ConfigError("synth-data requires data.kind='synth'")
    dataset = build_dataset(config)
    _persist_config(config, args.out)
    manifest = save_dataset(dataset, args.out)
    _say(args, f"wrote {len(dataset)} paired samples; manifest at {manifest}")
    return EXIT_OK


def _run_method(args, kind: str) -> int:
    config = _load_config(args)
    import dataclasses

    config = dataclasses.replace(
        config, method=dataclasses.replace(config.method, kind=kind), output_dir=str(args.out)
    )
    config.validate()
    _persist_config(config, args.out)
    result = run_repeats(config, out_dir=args.out)
    for agg in result.aggregates:
        _say(
            args,
            f"{agg['variant']} {agg['modality']}: weighted F1 "
            f"{agg['mean_weighted_f1']:.4f} +- {agg['std_weighted_f1']:.4f} over {agg['n_runs']} run(s)",
        )
    if result.incomplete:
        for failure in result.failures:
            print(f"run failed (seed {failure['seed']}): {failure['error']}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def _cmd_eval(args) -> int:
    run_dir = args.run_dir
    if run_dir is None:
        if args.config is None:
            raise ConfigError("eval needs --run-dir or --config")
        run_dir = args.config.parent
    records = evaluate_run_dir(run_dir, out_dir=args.out)
    _say(args, f"re-evaluated {len(records)} model(s); metrics written")
    return EXIT_OK


def _cmd_ablate(args) -> int:
    config = _load_config(args)
    import dataclasses

    config = dataclasses.replace(
        config, method=dataclasses.replace(config.method, kind="discom"), output_dir=str(args.out)
    )
    config.validate()
    _persist_config(config, args.out)
    plan = components_plan() if config.ablation_plan == "components" else representations_plan()
    result = run_ablation(config, plan, out_dir=args.out)
    for row in result.rows:
        _say(args, f"{row['variant']}: m1={row['m1']:.4f} m2={row['m2']:.4f} avg={row['average']:.4f}")
    if result.failures:
        for failure in result.failures:
            print(f"variant {failure['variant']} seed {failure['seed']} failed: {failure['error']}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    commands = {
        "synth-data": _cmd_synth_data,
        "train-discom": lambda a: _run_method(a, "discom"),
        "train-teacher": lambda a: _run_method(a, "teacher"),
        "distill": lambda a: _run_method(a, "distill"),
        "eval": _cmd_eval,
        "ablate": _cmd_ablate,
    }
    try:
        return commands[args.command](args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingDivergedError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    except (DataError, CheckpointError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA
    except XmkdError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(dispatch())
