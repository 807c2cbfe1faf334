"""Cross-modal knowledge distillation via disentangled representations.

Paired two-modality data goes in; two independently deployable single-modal
classifiers come out, trained jointly with adversarial, modality and
orthogonality constraints. Classic teacher/student distillation baselines
(optionally with logit standardization), a synthetic data generator and a
config-driven evaluation/ablation harness are included.
"""

from .config import ExperimentConfig
from .data import AugmentSpec, SplitSpec, read_tensor_file, split, write_tensor_file
from .errors import XmkdError
from .estimators import (
    DisComKDClassifier,
    DistilledClassifier,
    FusionTeacherClassifier,
    NetClassifier,
    SingleModalClassifier,
)
from .losses import KDConfig, LossOptions, LossReport, kd_baseline_loss, lskd_standardize
from .metrics import weighted_f1
from .runner import (
    distill_student,
    evaluate_model,
    run_ablation,
    run_repeats,
    train_discom,
    train_teacher,
)
from .synth import SynthConfig, generate, oracle_ceilings

__version__ = "0.1.0"

__all__ = [
    "AugmentSpec",
    "DisComKDClassifier",
    "DistilledClassifier",
    "ExperimentConfig",
    "FusionTeacherClassifier",
    "KDConfig",
    "LossOptions",
    "LossReport",
    "NetClassifier",
    "SingleModalClassifier",
    "SplitSpec",
    "SynthConfig",
    "XmkdError",
    "distill_student",
    "evaluate_model",
    "generate",
    "kd_baseline_loss",
    "lskd_standardize",
    "oracle_ceilings",
    "read_tensor_file",
    "run_ablation",
    "run_repeats",
    "split",
    "train_discom",
    "train_teacher",
    "weighted_f1",
    "write_tensor_file",
]
