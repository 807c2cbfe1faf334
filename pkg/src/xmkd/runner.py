"""Config-driven orchestration: training pipelines, repeats and ablations.

Every run is a pure function of (config, seed): data synthesis, splits,
initialization and batch order are all seeded, so repeating a run reproduces
its metrics bit-for-bit. Artifacts written under an output directory are
self-describing (resolved config, per-epoch history, checkpoints, metrics).
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .config import MODALITIES, ExperimentConfig
from .data import AugmentSpec, SplitSpec, load_manifest_dataset, split
from .errors import ConfigError, DataError, XmkdError
from .estimators import (
    DisComKDClassifier,
    DistilledClassifier,
    FusionTeacherClassifier,
    NetClassifier,
    SingleModalClassifier,
)
from .losses import KDConfig
from .metrics import MetricsRecord, evaluate_predictions
from .synth import PairedDataset, generate, to_image_layout

COMPONENT_VARIANTS = ("no_adv", "no_mod", "no_aux", "no_orth", "full")
REPRESENTATION_VARIANTS = ("only_inv", "only_inf", "full")
ALL_VARIANTS = ("full", "no_adv", "no_mod", "no_aux", "no_orth", "only_inv", "only_inf")

METRICS_COLUMNS = ["run_id", "seed", "variant", "modality", "split", "weighted_f1", "accuracy"]
HISTORY_COLUMNS = [
    "epoch",
    "loss_cl",
    "loss_adv",
    "loss_mod",
    "loss_aux",
    "loss_orth",
    "loss_total",
    "val_f1_m1",
    "val_f1_m2",
]

__all__ = [
    "AblationPlan",
    "RepeatsResult",
    "AblationResult",
    "build_dataset",
    "prepare_splits",
    "train_discom",
    "train_teacher",
    "distill_student",
    "evaluate_model",
    "run_single",
    "run_repeats",
    "run_ablation",
    "apply_variant",
    "components_plan",
    "representations_plan",
    "write_metrics_csv",
    "write_confusions_json",
    "evaluate_run_dir",
]


# ---------------------------------------------------------------------------
# data plumbing


def build_dataset(config: ExperimentConfig) -> PairedDataset:
    config.data.validate()
    if config.data.kind == "synth":
        ds = generate(config.data.synth)
    else:
        ds = load_manifest_dataset(config.data.manifest_path)
    if config.data.image_layout:
        ds = to_image_layout(ds)
    return ds


def prepare_splits(config: ExperimentConfig) -> tuple[PairedDataset, PairedDataset, PairedDataset]:
    ds = build_dataset(config)
    return split(ds, SplitSpec(fractions=tuple(config.split.fractions), seed=config.split.seed))


def _augment_spec(config: ExperimentConfig) -> AugmentSpec | None:
    a = config.augment
    spec = AugmentSpec(a.enable_hflip, a.enable_vflip, a.enable_rot90, a.seed)
    return spec if spec.any_enabled else None


# ---------------------------------------------------------------------------
# estimator construction from a config


def _common_net_kwargs(config: ExperimentConfig, seed: int) -> dict:
    return {
        "backbone": config.model.backbone,
        "hidden_dim": config.model.hidden_dim,
        "feature_dim": 2 * config.model.embed_dim,
        "epochs": config.optimizer.epochs,
        "batch_size": config.optimizer.batch_size,
        "lr": config.optimizer.lr,
        "augment": _augment_spec(config),
        "random_state": seed,
    }


def build_discom(config: ExperimentConfig, seed: int) -> DisComKDClassifier:
    return DisComKDClassifier(
        backbone=config.model.backbone,
        embed_dim=config.model.embed_dim,
        hidden_dim=config.model.hidden_dim,
        task_input=config.model.task_input,
        epochs=config.optimizer.epochs,
        batch_size=config.optimizer.batch_size,
        lr=config.optimizer.lr,
        grl_lambda=config.loss.grl_lambda,
        orth_mode=config.loss.orth_mode,
        disabled_terms=config.loss.disabled_terms(),
        term_weights=dict(config.loss.weights) or None,
        augment=_augment_spec(config),
        random_state=seed,
    )


# ---------------------------------------------------------------------------
# training pipelines


def _modality_x(ds: PairedDataset, modality: str) -> np.ndarray:
    return ds.x_m1 if modality == "m1" else ds.x_m2


def train_discom(config: ExperimentConfig, seed: int | None = None, out_dir=None, extra: dict | None = None):
    """Joint training; returns the two deployable models plus the history.

    One optimizer step per batch updates both branches, both task heads and
    all shared auxiliary heads. Each returned model carries the
    best-validation parameters for its own modality.
    """
    config.validate()
    seed = config.seeds[0] if seed is None else seed
    train, val, test = prepare_splits(config)
    if len(train) == 0:
        raise DataError("training split is empty")
    est = build_discom(config, seed)
    est.fit((train.x_m1, train.x_m2), train.y, eval_set=((val.x_m1, val.x_m2), val.y))
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_history_csv(out_dir / "history.csv", est.history_, HISTORY_COLUMNS)
        for m, name in enumerate(MODALITIES):
            save_checkpoint(
                out_dir / f"model_{name}.ckpt",
                est.models_[m].net,
                config=config.to_dict(),
                epoch=config.optimizer.epochs,
                best_val_f1=max(row[f"val_f1_{name}"] for row in est.history_),
                extra={"inputs": name, "seed": seed, **(extra or {})},
            )
    return est.models_[0], est.models_[1], est.history_


def train_teacher(config: ExperimentConfig, mode: str, seed: int | None = None, out_dir=None, extra: dict | None = None):
    """Plain CE training of a teacher: one modality or the fusion of both."""
    config.validate()
    if mode not in ("fusion", "m1", "m2"):
        raise ConfigError(f"teacher mode must be 'fusion', 'm1' or 'm2', got {mode!r}")
    seed = config.seeds[0] if seed is None else seed
    train, val, _ = prepare_splits(config)
    kwargs = _common_net_kwargs(config, seed)
    if mode == "fusion":
        est = FusionTeacherClassifier(**kwargs)
        est.fit((train.x_m1, train.x_m2), train.y, eval_set=((val.x_m1, val.x_m2), val.y))
    else:
        est = NetClassifier(**kwargs)
        est.fit(_modality_x(train, mode), train.y, eval_set=(_modality_x(val, mode), val.y))
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        save_checkpoint(
            out_dir / "teacher.ckpt",
            est.net_,
            config=config.to_dict(),
            epoch=config.optimizer.epochs,
            best_val_f1=max((r.get("val_f1", 0.0) for r in est.history_), default=None),
            extra={"inputs": "pair" if mode == "fusion" else mode, "seed": seed, **(extra or {})},
        )
    return est


def distill_student(
    config: ExperimentConfig,
    teacher,
    student_modality: str,
    kd_cfg: KDConfig,
    seed: int | None = None,
    out_dir=None,
    extra: dict | None = None,
):
    """Train a single-modal student against a frozen teacher's logits."""
    config.validate()
    kd_cfg.validate()
    seed = config.seeds[0] if seed is None else seed
    train, val, _ = prepare_splits(config)
    teacher_inputs = "both" if isinstance(teacher, FusionTeacherClassifier) else config.method.teacher
    if hasattr(teacher, "_xmkd_inputs"):
        teacher_inputs = teacher._xmkd_inputs
    est = DistilledClassifier(
        teacher=teacher,
        teacher_inputs=teacher_inputs,
        student_modality=student_modality,
        alpha=kd_cfg.alpha,
        temperature=kd_cfg.temperature,
        use_lskd=kd_cfg.use_lskd,
        **_common_net_kwargs(config, seed),
    )
    est.fit((train.x_m1, train.x_m2), train.y, eval_set=((val.x_m1, val.x_m2), val.y))
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        save_checkpoint(
            out_dir / "student.ckpt",
            est.net_,
            config=config.to_dict(),
            epoch=config.optimizer.epochs,
            best_val_f1=max((r.get("val_f1", 0.0) for r in est.history_), default=None),
            extra={"inputs": student_modality, "seed": seed, **(extra or {})},
        )
    return est


# ---------------------------------------------------------------------------
# evaluation


def evaluate_model(
    model,
    dataset: PairedDataset,
    inputs: str,
    *,
    run_id: str = "",
    seed: int = 0,
    variant: str = "full",
    split_name: str = "test",
) -> MetricsRecord:
    """Deterministic full-pass evaluation of one model on one split."""
    if len(dataset) == 0:
        raise DataError("cannot evaluate an empty split")
    if inputs == "pair":
        preds = model.predict((dataset.x_m1, dataset.x_m2))
        modality = "fusion"
    elif inputs in MODALITIES:
        preds = model.predict(_modality_x(dataset, inputs))
        modality = inputs
    else:
        raise ConfigError(f"inputs must be 'm1', 'm2' or 'pair', got {inputs!r}")
    return evaluate_predictions(
        preds,
        dataset.y,
        dataset.n_classes,
        run_id=run_id,
        seed=seed,
        variant=variant,
        modality=modality,
        split=split_name,
    )


# ---------------------------------------------------------------------------
# variants (ablations)


@dataclass(frozen=True)
class AblationPlan:
    """Ordered list of training variants to compare."""

    variants: tuple = COMPONENT_VARIANTS

    def validate(self) -> None:
        unknown = set(self.variants) - set(ALL_VARIANTS)
        if unknown:
            raise ConfigError(f"unknown ablation variants: {sorted(unknown)}")
        if not self.variants:
            raise ConfigError("ablation plan has no variants")


def components_plan() -> AblationPlan:
    """One row per dropped loss term plus the full setup."""
    return AblationPlan(COMPONENT_VARIANTS)


def representations_plan() -> AblationPlan:
    """Single-representation task heads plus the full setup."""
    return AblationPlan(REPRESENTATION_VARIANTS)


def apply_variant(config: ExperimentConfig, variant: str) -> ExperimentConfig:
    """Return a config altered ONLY in the component the variant names."""
    if variant == "full":
        return config
    if variant.startswith("no_"):
        term = variant.removeprefix("no_")
        if term not in ("adv", "mod", "aux", "orth"):
            raise ConfigError(f"unknown ablation variant {variant!r}")
        return dataclasses.replace(
            config, loss=dataclasses.replace(config.loss, **{f"enable_{term}": False})
        )
    if variant in ("only_inv", "only_inf"):
        return dataclasses.replace(
            config,
            model=dataclasses.replace(config.model, task_input=variant.removeprefix("only_")),
        )
    raise ConfigError(f"unknown ablation variant {variant!r}")


# ---------------------------------------------------------------------------
# single runs and repeats


def run_single(
    config: ExperimentConfig, seed: int, variant: str = "full", out_dir=None
) -> list[MetricsRecord]:
    """Train once with the given seed and evaluate on the test split."""
    cfg = apply_variant(config, variant)
    method = cfg.method.kind
    run_id = f"{method}-{variant}-seed{seed}"
    _, _, test = prepare_splits(cfg)
    ids = {"run_id": run_id, "seed": seed, "variant": variant}
    extra = {"run_id": run_id, "variant": variant}

    if method == "discom":
        model_m1, model_m2, _ = train_discom(cfg, seed=seed, out_dir=out_dir, extra=extra)
        return [
            evaluate_model(model_m1, test, "m1", **ids),
            evaluate_model(model_m2, test, "m2", **ids),
        ]
    if method == "student":
        modality = cfg.method.student_modality
        train, val, _ = prepare_splits(cfg)
        est = NetClassifier(**_common_net_kwargs(cfg, seed))
        est.fit(_modality_x(train, modality), train.y, eval_set=(_modality_x(val, modality), val.y))
        if out_dir is not None:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            save_checkpoint(
                Path(out_dir) / "model.ckpt",
                est.net_,
                config=cfg.to_dict(),
                extra={"inputs": modality, "seed": seed, **extra},
            )
        return [evaluate_model(est, test, modality, **ids)]
    if method == "teacher":
        mode = cfg.method.teacher
        est = train_teacher(cfg, mode, seed=seed, out_dir=out_dir, extra=extra)
        return [evaluate_model(est, test, "pair" if mode == "fusion" else mode, **ids)]
    if method == "distill":
        teacher = _obtain_teacher(cfg, seed, out_dir)
        kd = cfg.method.kd
        est = distill_student(
            cfg,
            teacher,
            cfg.method.student_modality,
            KDConfig(alpha=kd.alpha, temperature=kd.temperature, use_lskd=kd.use_lskd),
            seed=seed,
            out_dir=out_dir,
            extra=extra,
        )
        return [evaluate_model(est, test, cfg.method.student_modality, **ids)]
    raise ConfigError(f"unknown method kind {method!r}")


def _obtain_teacher(config: ExperimentConfig, seed: int, out_dir):
    if config.method.teacher_checkpoint:
        net, meta = load_checkpoint(config.method.teacher_checkpoint)
        inputs = meta.get("extra", {}).get("inputs", config.method.teacher)
        wrapper = _wrap_net(net, inputs)
        wrapper._xmkd_inputs = "both" if inputs == "pair" else inputs
        return wrapper
    return train_teacher(config, config.method.teacher, seed=seed, out_dir=out_dir)


class _FusionPredictor:
    """Prediction-only wrapper so a loaded fusion net can act as a teacher."""

    def __init__(self, net, n_classes: int):
        self.net_ = net.eval()
        self.classes_ = np.arange(n_classes)

    def decision_function(self, X):
        from .estimators import _net_logits
        from .validation import check_paired

        x1, x2 = check_paired(X)
        return _net_logits(self.net_, x1, x2)

    def predict(self, X):
        return self.decision_function(X).argmax(axis=1)


def _wrap_net(net, inputs: str):
    if inputs == "pair":
        return _FusionPredictor(net, net.n_classes)
    return SingleModalClassifier(net, np.arange(net.n_classes))


@dataclass
class RepeatsResult:
    records: list[MetricsRecord]
    aggregates: list[dict]
    failures: list[dict] = field(default_factory=list)

    @property
    def incomplete(self) -> bool:
        return bool(self.failures)


def _aggregate(records: list[MetricsRecord], n_runs: int, incomplete: bool, baseline: dict | None) -> list[dict]:
    groups: dict[tuple, list[MetricsRecord]] = {}
    for rec in records:
        groups.setdefault((rec.variant, rec.modality, rec.split), []).append(rec)
    rows = []
    for (variant, modality, split_name), group in sorted(groups.items()):
        f1s = np.array([r.weighted_f1 for r in group])
        accs = np.array([r.accuracy for r in group])
        row = {
            "variant": variant,
            "modality": modality,
            "split": split_name,
            "n_runs": len(group),
            "mean_weighted_f1": float(f1s.mean()),
            "std_weighted_f1": float(f1s.std()),
            "mean_accuracy": float(accs.mean()),
            "std_accuracy": float(accs.std()),
            "incomplete": incomplete or len(group) < n_runs,
        }
        if baseline and modality in baseline:
            row["baseline_f1"] = float(baseline[modality])
            row["delta_f1"] = row["mean_weighted_f1"] - float(baseline[modality])
        rows.append(row)
    return rows


def run_repeats(
    config: ExperimentConfig,
    n_runs: int | None = None,
    out_dir=None,
    variant: str = "full",
    baseline: dict | None = None,
) -> RepeatsResult:
    """Run the full train+evaluate pipeline once per seed and aggregate.

    A run that aborts with a library error is recorded as a failure and the
    aggregation of the remaining runs is flagged incomplete.
    """
    config.validate()
    seeds = list(config.seeds) if n_runs is None else list(config.seeds)[:n_runs]
    if n_runs is not None and n_runs < 1:
        raise ConfigError(f"n_runs must be >= 1, got {n_runs}")
    if n_runs is not None and len(seeds) < n_runs:
        seeds = seeds + [max(config.seeds) + 1 + i for i in range(n_runs - len(seeds))]
    records: list[MetricsRecord] = []
    failures: list[dict] = []
    for seed in seeds:
        seed_dir = Path(out_dir) / f"seed{seed}" if out_dir is not None else None
        try:
            records.extend(run_single(config, seed, variant=variant, out_dir=seed_dir))
        except XmkdError as err:
            failures.append({"seed": seed, "error": str(err)})
    result = RepeatsResult(
        records=records,
        aggregates=_aggregate(records, len(seeds), bool(failures), baseline),
        failures=failures,
    )
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_metrics_csv(out_dir / "metrics.csv", records)
        write_confusions_json(out_dir / "confusion_matrices.json", records)
        _write_aggregate_csv(out_dir / "aggregate.csv", result.aggregates)
    return result


@dataclass
class AblationResult:
    plan: AblationPlan
    rows: list[dict]                      # variant, m1, m2, average
    records: list[MetricsRecord]
    failures: list[dict] = field(default_factory=list)


def run_ablation(
    config: ExperimentConfig, plan: AblationPlan, out_dir=None
) -> AblationResult:
    """Train every variant over all seeds; emit the variant x modality table."""
    config.validate()
    plan.validate()
    if config.method.kind != "discom":
        raise ConfigError("ablations are defined for the joint 'discom' method only")
    all_records: list[MetricsRecord] = []
    failures: list[dict] = []
    rows = []
    for variant in plan.variants:
        var_dir = Path(out_dir) / variant if out_dir is not None else None
        result = run_repeats(config, out_dir=var_dir, variant=variant)
        all_records.extend(result.records)
        failures.extend({**f, "variant": variant} for f in result.failures)
        means = {}
        for agg in result.aggregates:
            means[agg["modality"]] = agg["mean_weighted_f1"]
        row = {"variant": variant, "m1": means.get("m1"), "m2": means.get("m2")}
        present = [v for v in (row["m1"], row["m2"]) if v is not None]
        row["average"] = float(np.mean(present)) if present else None
        rows.append(row)
    result = AblationResult(plan=plan, rows=rows, records=all_records, failures=failures)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_ablation_csv(out_dir / "ablation_table.csv", rows)
        write_metrics_csv(out_dir / "metrics.csv", all_records)
    return result


# ---------------------------------------------------------------------------
# artifact writers


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_metrics_csv(path, records: list[MetricsRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for rec in records:
            row = rec.csv_row()
            writer.writerow([_fmt(row[c]) for c in METRICS_COLUMNS])


def write_confusions_json(path, records: list[MetricsRecord]) -> None:
    payload = [
        {
            "run_id": r.run_id,
            "seed": r.seed,
            "variant": r.variant,
            "modality": r.modality,
            "split": r.split,
            "confusion": r.confusion,
        }
        for r in records
    ]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _write_history_csv(path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c, "")) for c in columns])


def _write_aggregate_csv(path, aggregates: list[dict]) -> None:
    if not aggregates:
        Path(path).write_text("", encoding="utf-8")
        return
    columns = list(aggregates[0].keys())
    for row in aggregates[1:]:
        for key in row:
            if key not in columns:
                columns.append(key)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in aggregates:
            writer.writerow([_fmt(row.get(c, "")) for c in columns])


def _write_ablation_csv(path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "m1", "m2", "average"])
        for row in rows:
            writer.writerow([_fmt(row[c]) if row[c] is not None else "" for c in ("variant", "m1", "m2", "average")])


# ---------------------------------------------------------------------------
# re-evaluation from a self-describing run directory

_METHOD_CHECKPOINTS = {
    "discom": ("model_m1.ckpt", "model_m2.ckpt"),
    "student": ("model.ckpt",),
    "teacher": ("teacher.ckpt",),
    "distill": ("student.ckpt",),
}


def evaluate_run_dir(run_dir, out_dir=None) -> list[MetricsRecord]:
    """Recompute metrics.csv from a run directory's config and checkpoints.

    The directory must contain the resolved ``config.json`` written at
    training time plus ``seed<N>/`` checkpoint folders; the test split is
    rebuilt from the config, so the rewritten metrics match the training-time
    ones bit for bit.
    """
    run_dir = Path(run_dir)
    config_path = run_dir / "config.json"
    if not config_path.exists():
        raise DataError(f"{run_dir}: no config.json; not a run directory")
    config = ExperimentConfig.load(config_path)
    names = _METHOD_CHECKPOINTS[config.method.kind]
    _, _, test = prepare_splits(config)
    records: list[MetricsRecord] = []
    for seed in config.seeds:
        seed_dir = run_dir / f"seed{seed}"
        if not seed_dir.is_dir():
            continue
        for name in names:
            path = seed_dir / name
            if not path.exists():
                continue
            net, meta = load_checkpoint(path)
            extra = meta.get("extra", {})
            inputs = extra.get("inputs", "m1")
            model = _wrap_net(net, inputs)
            records.append(
                evaluate_model(
                    model,
                    test,
                    inputs,
                    run_id=extra.get("run_id", f"{config.method.kind}-full-seed{seed}"),
                    seed=int(extra.get("seed", seed)),
                    variant=extra.get("variant", "full"),
                )
            )
    if not records:
        raise DataError(f"{run_dir}: no checkpoints found under seed directories")
    target = Path(out_dir) if out_dir is not None else run_dir
    target.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(target / "metrics.csv", records)
    write_confusions_json(target / "confusion_matrices.json", records)
    return records
