"""Shared fixtures and oracles for the test suite."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest
import torch

from xmkd.config import ExperimentConfig
from xmkd.networks import EncoderSpec, ModelBundle, init_params
from xmkd.synth import SynthConfig


def make_bundle(
    in1: int = 6,
    in2: int = 5,
    d: int = 8,
    n_classes: int = 3,
    hidden: int = 8,
    grl_lambda: float = 1.0,
    seed: int = 0,
    double: bool = False,
) -> ModelBundle:
    """Small mlp bundle for loss and gradient tests."""
    bundle = ModelBundle(
        EncoderSpec("mlp", (in1,), d, hidden),
        EncoderSpec("mlp", (in2,), d, hidden),
        n_classes,
        grl_lambda=grl_lambda,
    )
    init_params(bundle, seed)
    if double:
        bundle.double()
    return bundle


def random_batch(in1: int = 6, in2: int = 5, b: int = 4, n_classes: int = 3, seed: int = 0, double: bool = False):
    """Paired random batch as torch tensors."""
    from xmkd.losses import Batch

    rng = np.random.default_rng(seed)
    dtype = torch.float64 if double else torch.float32
    return Batch(
        torch.tensor(rng.standard_normal((b, in1)), dtype=dtype),
        torch.tensor(rng.standard_normal((b, in2)), dtype=dtype),
        torch.tensor(rng.integers(0, n_classes, b), dtype=torch.long),
    )


def brute_force_weighted_f1(predictions, labels, n_classes: int) -> float:
    """Independent weighted-F1 oracle: per-class counting loops, no shortcuts."""
    predictions = list(predictions)
    labels = list(labels)
    n = len(labels)
    total = 0.0
    for c in range(n_classes):
        tp = sum(1 for p, t in zip(predictions, labels) if p == c and t == c)
        fp = sum(1 for p, t in zip(predictions, labels) if p == c and t != c)
        fn = sum(1 for p, t in zip(predictions, labels) if p != c and t == c)
        support = sum(1 for t in labels if t == c)
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        total += (support / n) * f1
    return total


def tiny_config(n_samples: int = 240, epochs: int = 2, seeds=(0,)) -> ExperimentConfig:
    """Desk config shrunk for fast unit tests."""
    cfg = ExperimentConfig.desk_default()
    return dataclasses.replace(
        cfg,
        data=dataclasses.replace(cfg.data, synth=SynthConfig(n_samples=n_samples)),
        optimizer=dataclasses.replace(cfg.optimizer, epochs=epochs),
        seeds=tuple(seeds),
    )


@pytest.fixture
def bundle():
    return make_bundle()


@pytest.fixture
def batch():
    return random_batch()
