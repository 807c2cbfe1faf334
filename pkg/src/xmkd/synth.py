"""Synthetic paired-modality classification data.

Each sample is built from three kinds of latent factors: a shared factor
``s`` seen by both modalities, per-modality informative factors ``u1``/``u2``
seen by exactly one modality, and per-modality nuisance factors that never
influence the label. The label is a fixed linear-argmax rule over
``(s, u1, u2)``, which keeps the Bayes-optimal accuracy computable, so tests
can compare trained models against an analytic ceiling.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .errors import ConfigError, DataError, EstimationError

__all__ = [
    "SynthConfig",
    "Latents",
    "PairedSample",
    "PairedDataset",
    "CeilingReport",
    "generate",
    "oracle_ceilings",
    "to_image_layout",
]


@dataclass(frozen=True)
class SynthConfig:
    """Recipe for one synthetic dataset; equal configs give bit-equal data."""

    n_samples: int = 2000
    n_classes: int = 4
    obs_dim_m1: int = 36
    obs_dim_m2: int = 16
    shared_dim: int = 4
    spec_dim_m1: int = 4
    spec_dim_m2: int = 4
    nuis_dim: int = 4
    noise_sigma: float = 0.82
    seed: int = 0

    def validate(self) -> None:
        if self.n_classes < 2:
            raise ConfigError(f"n_classes must be >= 2, got {self.n_classes}")
        if self.n_samples < self.n_classes:
            raise ConfigError(
                f"n_samples ({self.n_samples}) must be >= n_classes ({self.n_classes})"
            )
        if self.obs_dim_m1 < 1 or self.obs_dim_m2 < 1:
            raise ConfigError("observation widths must be >= 1")
        for name in ("shared_dim", "spec_dim_m1", "spec_dim_m2", "nuis_dim"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.noise_sigma < 0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")

    @property
    def informative_dim(self) -> int:
        return self.shared_dim + self.spec_dim_m1 + self.spec_dim_m2

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "n_classes": self.n_classes,
            "obs_dim_m1": self.obs_dim_m1,
            "obs_dim_m2": self.obs_dim_m2,
            "shared_dim": self.shared_dim,
            "spec_dim_m1": self.spec_dim_m1,
            "spec_dim_m2": self.spec_dim_m2,
            "nuis_dim": self.nuis_dim,
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown key(s) in data.synth: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class Latents:
    """Diagnostic record of the factors behind each sample."""

    shared: np.ndarray        # (N, shared_dim)
    spec_m1: np.ndarray       # (N, spec_dim_m1)
    spec_m2: np.ndarray       # (N, spec_dim_m2)

    def subset(self, idx: np.ndarray) -> "Latents":
        return Latents(self.shared[idx], self.spec_m1[idx], self.spec_m2[idx])


@dataclass(frozen=True)
class PairedSample:
    """One observation per modality plus the class label."""

    x_m1: np.ndarray
    x_m2: np.ndarray
    y: int
    latents: dict | None = None


@dataclass
class PairedDataset:
    """Ordered collection of paired samples, stored as dense arrays."""

    x_m1: np.ndarray          # (N, ...) float32
    x_m2: np.ndarray          # (N, ...) float32
    y: np.ndarray             # (N,) int64
    n_classes: int
    latents: Latents | None = None
    source: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.y.shape[0]

    def __getitem__(self, i: int) -> PairedSample:
        lat = None
        if self.latents is not None:
            lat = {
                "shared": self.latents.shared[i],
                "spec_m1": self.latents.spec_m1[i],
                "spec_m2": self.latents.spec_m2[i],
            }
        return PairedSample(self.x_m1[i], self.x_m2[i], int(self.y[i]), lat)

    def __iter__(self) -> Iterator[PairedSample]:
        for i in range(len(self)):
            yield self[i]

    def subset(self, idx: np.ndarray) -> "PairedDataset":
        idx = np.asarray(idx)
        return PairedDataset(
            x_m1=self.x_m1[idx],
            x_m2=self.x_m2[idx],
            y=self.y[idx],
            n_classes=self.n_classes,
            latents=self.latents.subset(idx) if self.latents is not None else None,
            source=self.source,
        )


def _draw_parameters(rng: np.random.Generator, cfg: SynthConfig):
    """Draw the fixed label-rule and mixing matrices for ``cfg``.

    Must be called first on a fresh generator seeded with ``cfg.seed`` so
    that `generate` and `oracle_ceilings` agree on the matrices. Label-rule
    rows are scaled to unit norm so class scores share a common variance,
    which keeps class frequencies roughly balanced across seeds; mixing
    matrices are scaled so observed coordinates have unit signal variance.
    """
    c = cfg.n_classes
    d_inf = cfg.informative_dim
    if d_inf > 0:
        w = rng.standard_normal((c, d_inf))
        w /= np.linalg.norm(w, axis=1, keepdims=True)
    else:
        w = np.zeros((c, 0))
    lat1 = cfg.shared_dim + cfg.spec_dim_m1 + cfg.nuis_dim
    lat2 = cfg.shared_dim + cfg.spec_dim_m2 + cfg.nuis_dim
    a1 = rng.standard_normal((cfg.obs_dim_m1, lat1)) / np.sqrt(max(lat1, 1))
    a2 = rng.standard_normal((cfg.obs_dim_m2, lat2)) / np.sqrt(max(lat2, 1))
    return w, a1, a2


def generate(config: SynthConfig) -> PairedDataset:
    """Generate a paired dataset; a pure function of the config.

    The label is ``argmax_c w_c . [s; u1; u2]`` before any observation noise
    is added, so changing ``noise_sigma`` perturbs the observations but never
    the labels. If no informative latent exists at all, labels are drawn
    uniformly at random (still seed-deterministic) so that they stay
    independent of the observations rather than collapsing to one class.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    w, a1, a2 = _draw_parameters(rng, config)
    n = config.n_samples

    s = rng.standard_normal((n, config.shared_dim))
    u1 = rng.standard_normal((n, config.spec_dim_m1))
    u2 = rng.standard_normal((n, config.spec_dim_m2))
    n1 = rng.standard_normal((n, config.nuis_dim))
    n2 = rng.standard_normal((n, config.nuis_dim))

    if config.informative_dim > 0:
        scores = np.hstack([s, u1, u2]) @ w.T
        y = np.argmax(scores, axis=1).astype(np.int64)
    else:
        y = rng.integers(0, config.n_classes, size=n, dtype=np.int64)

    eps1 = rng.standard_normal((n, config.obs_dim_m1))
    eps2 = rng.standard_normal((n, config.obs_dim_m2))
    x1 = np.hstack([s, u1, n1]) @ a1.T + config.noise_sigma * eps1
    x2 = np.hstack([s, u2, n2]) @ a2.T + config.noise_sigma * eps2

    return PairedDataset(
        x_m1=x1.astype(np.float32),
        x_m2=x2.astype(np.float32),
        y=y,
        n_classes=config.n_classes,
        latents=Latents(shared=s, spec_m1=u1, spec_m2=u2),
        source={"kind": "synth", "synth": config.to_dict()},
    )


@dataclass(frozen=True)
class CeilingReport:
    """Monte-Carlo Bayes-accuracy ceilings for each modality."""

    acc_shared_only_m1: float
    acc_shared_only_m2: float
    acc_full_m1: float
    acc_full_m2: float


def _bayes_accuracy(
    w: np.ndarray,
    z_outer: np.ndarray,
    h_inner: np.ndarray,
    observed: np.ndarray,
) -> float:
    """E over observed draws of max_c P(argmax class = c | observed part).

    ``observed`` is a boolean mask over informative-latent coordinates. The
    hidden coordinates are integrated by a shared inner sample, so estimates
    for nested observation sets use common random numbers.
    """
    hidden = ~observed
    obs_scores = z_outer[:, observed] @ w[:, observed].T        # (n_outer, C)
    if not hidden.any():
        return 1.0
    hid_scores = h_inner[:, hidden] @ w[:, hidden].T            # (n_inner, C)
    n_outer = obs_scores.shape[0]
    n_inner, c = hid_scores.shape
    total = 0.0
    chunk = max(1, int(2_000_000 // max(n_inner, 1)))
    for lo in range(0, n_outer, chunk):
        block = obs_scores[lo : lo + chunk, None, :] + hid_scores[None, :, :]
        winners = np.argmax(block, axis=2)                      # (rows, n_inner)
        rows = winners.shape[0]
        flat = winners + c * np.arange(rows)[:, None]
        counts = np.bincount(flat.ravel(), minlength=rows * c).reshape(rows, c)
        total += (counts.max(axis=1) / n_inner).sum()
    return float(total / n_outer)


def oracle_ceilings(
    config: SynthConfig,
    n_mc: int = 20_000,
    inner: int = 512,
    mc_seed: int = 20240901,
) -> CeilingReport:
    """Estimate Bayes-accuracy ceilings from partial latent knowledge.

    ``shared_only`` conditions on ``s`` alone; ``full`` additionally
    conditions on that modality's own informative factor. The estimate
    scores the known label rule over ``n_mc`` outer draws, integrating the
    unobserved factors with ``inner`` shared samples.
    """
    config.validate()
    if n_mc < 10_000:
        raise EstimationError(f"n_mc must be >= 10000 for a usable estimate, got {n_mc}")
    d_inf = config.informative_dim
    if d_inf == 0:
        p = 1.0 / config.n_classes
        return CeilingReport(p, p, p, p)

    rng = np.random.default_rng(config.seed)
    w, _, _ = _draw_parameters(rng, config)
    mc = np.random.default_rng(mc_seed)
    z_outer = mc.standard_normal((n_mc, d_inf))
    h_inner = mc.standard_normal((inner, d_inf))

    ds, d1 = config.shared_dim, config.spec_dim_m1
    mask_shared = np.zeros(d_inf, dtype=bool)
    mask_shared[:ds] = True
    mask_full_m1 = mask_shared.copy()
    mask_full_m1[ds : ds + d1] = True
    mask_full_m2 = mask_shared.copy()
    mask_full_m2[ds + d1 :] = True

    acc_shared = _bayes_accuracy(w, z_outer, h_inner, mask_shared)
    return CeilingReport(
        acc_shared_only_m1=acc_shared,
        acc_shared_only_m2=acc_shared,
        acc_full_m1=_bayes_accuracy(w, z_outer, h_inner, mask_full_m1),
        acc_full_m2=_bayes_accuracy(w, z_outer, h_inner, mask_full_m2),
    )


def to_image_layout(dataset: PairedDataset) -> PairedDataset:
    """Reshape flat observations into single-channel square images.

    Each modality's width must be a perfect square; the result has shape
    (N, 1, H, H) per modality, suitable for convolutional backbones and for
    geometric augmentation.
    """

    def reshape(x: np.ndarray, name: str) -> np.ndarray:
        if x.ndim == 4:
            return x
        if x.ndim != 2:
            raise DataError(f"{name} must be flat (N, d) to tile into images")
        d = x.shape[1]
        h = int(round(np.sqrt(d)))
        if h * h != d:
            raise DataError(
                f"{name} width {d} is not a perfect square; cannot tile into an image"
            )
        return x.reshape(x.shape[0], 1, h, h)

    return replace(
        dataset,
        x_m1=reshape(dataset.x_m1, "x_m1"),
        x_m2=reshape(dataset.x_m2, "x_m2"),
    )
