"""Declarative experiment configuration with a strict JSON round-trip.

Unknown keys are rejected everywhere; missing keys fall back to built-in
defaults; command-line ``--set`` overrides apply on top of the file. The
library defaults mirror the full-scale recipe (300 epochs, batch 128,
learning rate 1e-4); ``desk_default()`` returns the small synthetic setup
used by the test suite.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .synth import SynthConfig

MODALITIES = ("m1", "m2")
METHOD_KINDS = ("discom", "student", "teacher", "distill")
TEACHER_MODES = ("fusion", "m1", "m2")

__all__ = ["ExperimentConfig", "apply_overrides", "MODALITIES"]


def _from_dict(cls, d: dict, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object, got {type(d).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")
    return d


@dataclass(frozen=True)
class DataConfig:
    kind: str = "synth"                 # "synth" | "manifest"
    synth: SynthConfig = field(default_factory=SynthConfig)
    manifest_path: str | None = None
    image_layout: bool = False          # tile flat vectors into 1xHxH images

    def validate(self) -> None:
        if self.kind not in ("synth", "manifest"):
            raise ConfigError(f"data.kind must be 'synth' or 'manifest', got {self.kind!r}")
        if self.kind == "manifest" and not self.manifest_path:
            raise ConfigError("data.kind='manifest' requires data.manifest_path")
        if self.kind == "synth":
            self.synth.validate()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "synth": self.synth.to_dict(),
            "manifest_path": self.manifest_path,
            "image_layout": self.image_layout,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DataConfig":
        d = dict(_from_dict(cls, d, "data"))
        if "synth" in d:
            d["synth"] = SynthConfig.from_dict(d["synth"])
        return cls(**d)


@dataclass(frozen=True)
class ModelConfig:
    backbone: str = "mlp"
    embed_dim: int = 16
    hidden_dim: int = 64
    task_input: str = "both"            # "both" | "inv" | "inf"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**_from_dict(cls, d, "model"))


@dataclass(frozen=True)
class LossConfig:
    orth_mode: str = "raw"
    grl_lambda: float = 1.0
    enable_adv: bool = True
    enable_mod: bool = True
    enable_aux: bool = True
    enable_orth: bool = True
    weights: dict = field(default_factory=dict)   # optional per-term weights

    def to_dict(self) -> dict:
        return {
            "orth_mode": self.orth_mode,
            "grl_lambda": self.grl_lambda,
            "enable_adv": self.enable_adv,
            "enable_mod": self.enable_mod,
            "enable_aux": self.enable_aux,
            "enable_orth": self.enable_orth,
            "weights": dict(self.weights),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LossConfig":
        return cls(**_from_dict(cls, d, "loss"))

    def disabled_terms(self) -> tuple:
        return tuple(
            name
            for name, on in (
                ("adv", self.enable_adv),
                ("mod", self.enable_mod),
                ("aux", self.enable_aux),
                ("orth", self.enable_orth),
            )
            if not on
        )


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "adam"
    lr: float = 1e-4
    epochs: int = 300
    batch_size: int = 128

    def validate(self) -> None:
        if self.kind != "adam":
            raise ConfigError(f"optimizer.kind must be 'adam', got {self.kind!r}")
        if self.lr <= 0:
            raise ConfigError(f"optimizer.lr must be > 0, got {self.lr}")
        if self.epochs < 1:
            raise ConfigError(f"optimizer.epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"optimizer.batch_size must be >= 1, got {self.batch_size}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerConfig":
        return cls(**_from_dict(cls, d, "optimizer"))


@dataclass(frozen=True)
class SplitConfig:
    fractions: tuple = (0.70, 0.10, 0.20)
    seed: int = 0

    def to_dict(self) -> dict:
        return {"fractions": list(self.fractions), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "SplitConfig":
        d = dict(_from_dict(cls, d, "split"))
        if "fractions" in d:
            d["fractions"] = tuple(d["fractions"])
        return cls(**d)


@dataclass(frozen=True)
class AugmentConfig:
    enable_hflip: bool = False
    enable_vflip: bool = False
    enable_rot90: bool = False
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentConfig":
        return cls(**_from_dict(cls, d, "augment"))


@dataclass(frozen=True)
class KDSettings:
    alpha: float = 0.5
    temperature: float = 4.0
    use_lskd: bool = False

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "KDSettings":
        return cls(**_from_dict(cls, d, "method.kd"))


@dataclass(frozen=True)
class MethodConfig:
    kind: str = "discom"                 # "discom" | "student" | "teacher" | "distill"
    student_modality: str = "m2"
    teacher: str = "fusion"              # teacher inputs: "fusion" | "m1" | "m2"
    teacher_checkpoint: str | None = None
    kd: KDSettings = field(default_factory=KDSettings)

    def validate(self) -> None:
        if self.kind not in METHOD_KINDS:
            raise ConfigError(f"method.kind must be one of {METHOD_KINDS}, got {self.kind!r}")
        if self.student_modality not in MODALITIES:
            raise ConfigError(
                f"method.student_modality must be one of {MODALITIES}, got {self.student_modality!r}"
            )
        if self.teacher not in TEACHER_MODES:
            raise ConfigError(f"method.teacher must be one of {TEACHER_MODES}, got {self.teacher!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "student_modality": self.student_modality,
            "teacher": self.teacher,
            "teacher_checkpoint": self.teacher_checkpoint,
            "kd": self.kd.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MethodConfig":
        d = dict(_from_dict(cls, d, "method"))
        if "kd" in d:
            d["kd"] = KDSettings.from_dict(d["kd"])
        return cls(**d)


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    method: MethodConfig = field(default_factory=MethodConfig)
    seeds: tuple = (0, 1, 2, 3, 4)
    ablation_plan: str = "components"    # "components" | "representations"
    output_dir: str = "runs/default"

    def validate(self) -> None:
        self.data.validate()
        self.optimizer.validate()
        self.method.validate()
        if not self.seeds:
            raise ConfigError("at least one run seed is required")
        if any(int(s) < 0 for s in self.seeds):
            raise ConfigError("run seeds must be non-negative")
        if self.ablation_plan not in ("components", "representations"):
            raise ConfigError(
                f"ablation_plan must be 'components' or 'representations', got {self.ablation_plan!r}"
            )

    def to_dict(self) -> dict:
        return {
            "data": self.data.to_dict(),
            "model": self.model.to_dict(),
            "loss": self.loss.to_dict(),
            "optimizer": self.optimizer.to_dict(),
            "split": self.split.to_dict(),
            "augment": self.augment.to_dict(),
            "method": self.method.to_dict(),
            "seeds": list(self.seeds),
            "ablation_plan": self.ablation_plan,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(_from_dict(cls, d, "config"))
        parsers = {
            "data": DataConfig.from_dict,
            "model": ModelConfig.from_dict,
            "loss": LossConfig.from_dict,
            "optimizer": OptimizerConfig.from_dict,
            "split": SplitConfig.from_dict,
            "augment": AugmentConfig.from_dict,
            "method": MethodConfig.from_dict,
        }
        for key, parse in parsers.items():
            if key in d:
                d[key] = parse(d[key])
        if "seeds" in d:
            d["seeds"] = tuple(int(s) for s in d["seeds"])
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"invalid JSON config: {err}") from None
        return cls.from_dict(payload)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def desk_default(cls) -> "ExperimentConfig":
        """Small synthetic configuration that trains in seconds on a CPU."""
        return cls(
            data=DataConfig(kind="synth", synth=SynthConfig()),
            model=ModelConfig(backbone="mlp", embed_dim=16, hidden_dim=64),
            loss=LossConfig(orth_mode="squared"),
            optimizer=OptimizerConfig(kind="adam", lr=1e-3, epochs=30, batch_size=64),
        )


def _coerce_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(config_dict: dict, overrides: list[str]) -> dict:
    """Apply ``section.key=value`` pairs onto a config dictionary.

    Values parse as JSON when possible (numbers, booleans, lists), else as
    strings. Paths must address existing keys; anything else is a usage
    error.
    """
    out = json.loads(json.dumps(config_dict))  # deep copy, JSON-typed
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        dotted, raw = item.split("=", 1)
        keys = dotted.strip().split(".")
        if not all(keys):
            raise ConfigError(f"override {item!r} has an empty key component")
        node = out
        for k in keys[:-1]:
            if not isinstance(node, dict) or k not in node:
                raise ConfigError(f"override path {dotted!r} does not exist in the config")
            node = node[k]
        if not isinstance(node, dict):
            raise ConfigError(f"override path {dotted!r} does not address a config object")
        # A new leaf key is allowed (e.g. a fresh loss-term weight); strict
        # section parsing still rejects keys no section knows about.
        node[keys[-1]] = _coerce_value(raw)
    return out
