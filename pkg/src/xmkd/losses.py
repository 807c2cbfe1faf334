"""Training objectives.

The joint objective is the plain sum of five terms: the per-modality task
cross-entropy, an adversarial modality loss routed through gradient reversal
on the invariant embeddings, modality classification on the informative and
irrelevant embeddings, a shared auxiliary task head over the invariant and
informative embeddings of both modalities, and a cosine-orthogonality term.
All batch reductions are means, so magnitudes are comparable across batch
sizes.

The teacher/student baselines use ``kd_baseline_loss``:
``alpha * CE(student, y) + (1 - alpha) * tau^2 * KL(soft_teacher || soft_student)``,
optionally z-scoring both logit sets first (LSKD).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import torch
import torch.nn.functional as F

from .errors import (
    ConfigError,
    DegenerateEmbeddingError,
    DimensionError,
    TrainingDivergedError,
)
from .networks import (
    MODALITY_M1,
    MODALITY_M2,
    EmbeddingTriple,
    ModelBundle,
    grad_reverse,
)

EPS_NORM = 1e-8
EPS_DEGENERATE = 1e-12
EPS_LSKD = 1e-8

ORTH_MODES = ("raw", "squared")
TERM_NAMES = ("cl", "adv", "mod", "aux", "orth")

__all__ = [
    "Batch",
    "LossReport",
    "LossOptions",
    "KDConfig",
    "cross_entropy",
    "loss_cl",
    "loss_adv",
    "loss_mod",
    "loss_aux",
    "loss_orth",
    "total_loss",
    "lskd_standardize",
    "kd_baseline_loss",
]


class Batch(NamedTuple):
    """One mini-batch of paired observations with labels."""

    x_m1: torch.Tensor
    x_m2: torch.Tensor
    y: torch.Tensor


@dataclass(frozen=True)
class LossReport:
    """Per-term scalar values for one batch; ``total`` is their exact sum."""

    cl: float
    adv: float
    mod: float
    aux: float
    orth: float
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", self.cl + self.adv + self.mod + self.aux + self.orth)

    def as_dict(self) -> dict:
        return {
            "loss_cl": self.cl,
            "loss_adv": self.adv,
            "loss_mod": self.mod,
            "loss_aux": self.aux,
            "loss_orth": self.orth,
            "loss_total": self.total,
        }


@dataclass(frozen=True)
class LossOptions:
    """Term toggles and weights; defaults reproduce the unweighted sum."""

    orth_mode: str = "raw"
    grl_lambda: float = 1.0
    enable_adv: bool = True
    enable_mod: bool = True
    enable_aux: bool = True
    enable_orth: bool = True
    weight_cl: float = 1.0
    weight_adv: float = 1.0
    weight_mod: float = 1.0
    weight_aux: float = 1.0
    weight_orth: float = 1.0

    def validate(self) -> None:
        if self.orth_mode not in ORTH_MODES:
            raise ConfigError(f"orth_mode must be one of {ORTH_MODES}, got {self.orth_mode!r}")
        if self.grl_lambda < 0:
            raise ConfigError(f"grl_lambda must be >= 0, got {self.grl_lambda}")


def cross_entropy(logits: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Batch-mean of -log softmax(logits)[target]."""
    if logits.ndim != 2:
        raise DimensionError(f"logits must be (B, K), got shape {tuple(logits.shape)}")
    k = logits.shape[1]
    if targets.numel() and (int(targets.min()) < 0 or int(targets.max()) >= k):
        raise IndexError(f"target outside [0, {k})")
    return F.cross_entropy(logits, targets)


def _modality_targets(n: int, modality: int, device) -> torch.Tensor:
    return torch.full((n,), modality, dtype=torch.long, device=device)


# ---------------------------------------------------------------------------
# the five joint-training terms


def _term_cl(bundle: ModelBundle, t1: EmbeddingTriple, t2: EmbeddingTriple, y: torch.Tensor) -> torch.Tensor:
    return cross_entropy(bundle.task_logits_for(MODALITY_M1, t1), y) + cross_entropy(
        bundle.task_logits_for(MODALITY_M2, t2), y
    )


def _term_adv(bundle: ModelBundle, t1: EmbeddingTriple, t2: EmbeddingTriple, lam: float) -> torch.Tensor:
    out = None
    for modality, triple in ((MODALITY_M1, t1), (MODALITY_M2, t2)):
        logits = bundle.cl_adv(grad_reverse(triple.z_inv, lam))
        targets = _modality_targets(logits.shape[0], modality, logits.device)
        term = cross_entropy(logits, targets)
        out = term if out is None else out + term
    return out


def _term_mod(bundle: ModelBundle, t1: EmbeddingTriple, t2: EmbeddingTriple) -> torch.Tensor:
    out = None
    for modality, triple in ((MODALITY_M1, t1), (MODALITY_M2, t2)):
        targets = _modality_targets(triple.z_inf.shape[0], modality, triple.z_inf.device)
        term = cross_entropy(bundle.cl_m_inf(triple.z_inf), targets) + cross_entropy(
            bundle.cl_m_irr(triple.z_irr), targets
        )
        out = term if out is None else out + term
    return out


def _term_aux(bundle: ModelBundle, t1: EmbeddingTriple, t2: EmbeddingTriple, y: torch.Tensor) -> torch.Tensor:
    out = None
    for triple in (t1, t2):
        for z in (triple.z_inv, triple.z_inf):
            term = cross_entropy(bundle.cl_aux(z), y)
            out = term if out is None else out + term
    return out


def _cosine(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    na = a.norm(dim=-1)
    nb = b.norm(dim=-1)
    with torch.no_grad():
        if float(na.min()) < EPS_DEGENERATE or float(nb.min()) < EPS_DEGENERATE:
            raise DegenerateEmbeddingError(
                "embedding with near-zero norm; cosine orthogonality is undefined"
            )
    return (a * b).sum(dim=-1) / (na * nb + EPS_NORM)


def _term_orth(t1: EmbeddingTriple, t2: EmbeddingTriple, mode: str) -> torch.Tensor:
    if mode not in ORTH_MODES:
        raise ConfigError(f"orth_mode must be one of {ORTH_MODES}, got {mode!r}")
    out = None
    for triple in (t1, t2):
        for a, b in ((triple.z_inv, triple.z_inf), (triple.z_inf, triple.z_irr)):
            c = _cosine(a, b)
            term = (c.square() if mode == "squared" else c).mean()
            out = term if out is None else out + term
    return out


def loss_cl(bundle: ModelBundle, batch: Batch) -> torch.Tensor:
    """Main-task cross-entropy summed over both modalities' task heads."""
    return _term_cl(bundle, bundle.embed(batch.x_m1, MODALITY_M1), bundle.embed(batch.x_m2, MODALITY_M2), batch.y)


def loss_adv(bundle: ModelBundle, batch: Batch) -> torch.Tensor:
    """Modality CE on reversed invariant embeddings.

    The forward value is the plain cross-entropy of the shared modality
    discriminator; reversal only changes what flows back into the invariant
    encoders.
    """
    return _term_adv(
        bundle,
        bundle.embed(batch.x_m1, MODALITY_M1),
        bundle.embed(batch.x_m2, MODALITY_M2),
        bundle.grl_lambda,
    )


def loss_mod(bundle: ModelBundle, batch: Batch) -> torch.Tensor:
    """Modality CE on informative and irrelevant embeddings; no reversal."""
    return _term_mod(bundle, bundle.embed(batch.x_m1, MODALITY_M1), bundle.embed(batch.x_m2, MODALITY_M2))


def loss_aux(bundle: ModelBundle, batch: Batch) -> torch.Tensor:
    """Task CE of the shared auxiliary head over four embedding streams."""
    return _term_aux(bundle, bundle.embed(batch.x_m1, MODALITY_M1), bundle.embed(batch.x_m2, MODALITY_M2), batch.y)


def loss_orth(triples_m1: EmbeddingTriple, triples_m2: EmbeddingTriple, mode: str = "raw") -> torch.Tensor:
    """Cosine alignment between (inv, inf) and (inf, irr) per modality.

    ``raw`` sums the batch-mean cosines; ``squared`` sums batch-mean squared
    cosines, whose minimum is orthogonality rather than anti-alignment.
    """
    return _term_orth(triples_m1, triples_m2, mode)


def total_loss(
    bundle: ModelBundle, batch: Batch, options: LossOptions | None = None
) -> tuple[torch.Tensor, LossReport]:
    """All enabled terms plus their report; disabled terms contribute nothing.

    Returns the differentiable scalar and a float report whose ``total`` is
    the exact sum of its five fields.
    """
    options = options or LossOptions()
    options.validate()
    t1 = bundle.embed(batch.x_m1, MODALITY_M1)
    t2 = bundle.embed(batch.x_m2, MODALITY_M2)

    terms: dict[str, torch.Tensor | None] = {
        "cl": options.weight_cl * _term_cl(bundle, t1, t2, batch.y),
        "adv": options.weight_adv * _term_adv(bundle, t1, t2, options.grl_lambda)
        if options.enable_adv
        else None,
        "mod": options.weight_mod * _term_mod(bundle, t1, t2) if options.enable_mod else None,
        "aux": options.weight_aux * _term_aux(bundle, t1, t2, batch.y) if options.enable_aux else None,
        "orth": options.weight_orth * _term_orth(t1, t2, options.orth_mode)
        if options.enable_orth
        else None,
    }

    total = None
    values: dict[str, float] = {}
    for name in TERM_NAMES:
        term = terms[name]
        if term is None:
            values[name] = 0.0
            continue
        if not torch.isfinite(term):
            raise TrainingDivergedError(name)
        values[name] = float(term.detach())
        total = term if total is None else total + term
    report = LossReport(**values)
    return total, report


# ---------------------------------------------------------------------------
# teacher/student distillation baselines


@dataclass(frozen=True)
class KDConfig:
    """Distillation hyper-parameters: alpha=0 is soft-label-only (KDv1),
    alpha=0.5 weighs hard and soft labels equally (KDv2)."""

    alpha: float = 0.5
    temperature: float = 4.0
    use_lskd: bool = False

    def validate(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.temperature <= 0:
            raise ConfigError(f"temperature must be > 0, got {self.temperature}")


def lskd_standardize(logits: torch.Tensor) -> torch.Tensor:
    """Z-score each row: subtract its mean, divide by its (population) std.

    A constant row maps to zeros (the epsilon guard kicks in) and is flagged
    with a RuntimeWarning.
    """
    if logits.ndim != 2 or logits.shape[1] < 2:
        raise DimensionError(f"logits must be (B, K) with K >= 2, got {tuple(logits.shape)}")
    mean = logits.mean(dim=1, keepdim=True)
    std = logits.std(dim=1, keepdim=True, correction=0)
    if bool((std < EPS_DEGENERATE).any()):
        warnings.warn(
            "constant logit row encountered in lskd_standardize; returning zeros for it",
            RuntimeWarning,
            stacklevel=2,
        )
    return (logits - mean) / (std + EPS_LSKD)


def kd_baseline_loss(
    student_logits: torch.Tensor,
    teacher_logits: torch.Tensor,
    y: torch.Tensor,
    cfg: KDConfig,
) -> torch.Tensor:
    """Standard distillation objective over one batch.

    The task term always sees the raw student logits; with ``use_lskd`` both
    logit sets are standardized before the temperature-scaled KL term.
    """
    cfg.validate()
    if student_logits.shape != teacher_logits.shape:
        raise DimensionError(
            f"student and teacher logits disagree: {tuple(student_logits.shape)} vs "
            f"{tuple(teacher_logits.shape)}"
        )
    task = cross_entropy(student_logits, y)
    s, t = student_logits, teacher_logits
    if cfg.use_lskd:
        s = lskd_standardize(s)
        t = lskd_standardize(t)
    tau = cfg.temperature
    kd = F.kl_div(
        F.log_softmax(s / tau, dim=1),
        F.softmax(t / tau, dim=1),
        reduction="batchmean",
    ) * (tau * tau)
    return cfg.alpha * task + (1.0 - cfg.alpha) * kd
