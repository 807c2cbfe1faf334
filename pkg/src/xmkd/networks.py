"""Neural building blocks: backbones, branch extractors, heads, gradient reversal.

Every branch extractor owns two encoders that share no parameters. The
modality-specific encoder emits a width-2D vector whose first half is the
irrelevant embedding and whose second half is the informative embedding; the
modality-invariant encoder emits its native feature, projected to width D by
a single affine head. All classifier heads are single linear layers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import torch
from torch import nn

from .errors import ConfigError, DimensionError

MODALITY_M1 = 0
MODALITY_M2 = 1

TASK_INPUTS = ("both", "inv", "inf")

__all__ = [
    "MODALITY_M1",
    "MODALITY_M2",
    "EmbeddingTriple",
    "EncoderSpec",
    "GradientReversal",
    "grad_reverse",
    "make_backbone",
    "native_feature_width",
    "BranchExtractor",
    "ModelBundle",
    "SingleModalNet",
    "SingleNet",
    "FusionNet",
    "fusion_teacher_forward",
    "task_logits",
    "init_params",
]


class EmbeddingTriple(NamedTuple):
    """The three per-modality representations, all of width D."""

    z_inv: torch.Tensor
    z_inf: torch.Tensor
    z_irr: torch.Tensor


class GradientReversal(torch.autograd.Function):
    """Identity forward; backward multiplies the incoming gradient by -lambda."""

    @staticmethod
    def forward(ctx, x: torch.Tensor, lam: float) -> torch.Tensor:
        ctx.lam = lam
        return x.view_as(x)

    @staticmethod
    def backward(ctx, grad_output: torch.Tensor):
        return grad_output.neg() * ctx.lam, None


def grad_reverse(x: torch.Tensor, lam: float = 1.0) -> torch.Tensor:
    if lam < 0:
        raise ConfigError(f"gradient reversal lambda must be >= 0, got {lam}")
    return GradientReversal.apply(x, float(lam))


# ---------------------------------------------------------------------------
# backbones


class MLPBackbone(nn.Module):
    """Two affine layers with a nonlinearity, batch-normalized output.

    The output normalization mirrors the residual backbone's normalized
    feature maps; without it the feature scale is free to grow until the
    adversarial head's logits saturate and the min-max game freezes.
    """

    def __init__(self, in_features: int, hidden_dim: int, out_width: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Flatten(),
            nn.Linear(in_features, hidden_dim),
            nn.ReLU(),
            nn.Linear(hidden_dim, out_width),
            nn.BatchNorm1d(out_width),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


class SmallCNNBackbone(nn.Module):
    """Three conv blocks with global average pooling, normalized output."""

    def __init__(self, in_channels: int, out_width: int):
        super().__init__()
        widths = (16, 32, 64)
        blocks = []
        c = in_channels
        for w in widths:
            blocks += [
                nn.Conv2d(c, w, 3, padding=1),
                nn.BatchNorm2d(w),
                nn.ReLU(),
                nn.MaxPool2d(2, ceil_mode=True),
            ]
            c = w
        self.features = nn.Sequential(*blocks)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.fc = nn.Linear(widths[-1], out_width)
        self.out_norm = nn.BatchNorm1d(out_width)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.pool(self.features(x)).flatten(1)
        return self.out_norm(self.fc(h))


class _BasicBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, stride: int = 1):
        super().__init__()
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, stride=stride, padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(out_ch)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(out_ch)
        self.relu = nn.ReLU(inplace=True)
        if stride != 1 or in_ch != out_ch:
            self.downsample = nn.Sequential(
                nn.Conv2d(in_ch, out_ch, 1, stride=stride, bias=False),
                nn.BatchNorm2d(out_ch),
            )
        else:
            self.downsample = None

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        identity = x if self.downsample is None else self.downsample(x)
        h = self.relu(self.bn1(self.conv1(x)))
        h = self.bn2(self.conv2(h))
        return self.relu(h + identity)


class ResNet18Backbone(nn.Module):
    """The standard 18-layer residual plan (4 stages of 2 basic blocks)."""

    FEATURE_WIDTH = 512

    def __init__(self, in_channels: int, out_width: int):
        super().__init__()
        self.stem = nn.Sequential(
            nn.Conv2d(in_channels, 64, 7, stride=2, padding=3, bias=False),
            nn.BatchNorm2d(64),
            nn.ReLU(inplace=True),
            nn.MaxPool2d(3, stride=2, padding=1),
        )
        stages = []
        widths = (64, 128, 256, 512)
        in_ch = 64
        for i, w in enumerate(widths):
            stride = 1 if i == 0 else 2
            stages += [_BasicBlock(in_ch, w, stride), _BasicBlock(w, w)]
            in_ch = w
        self.stages = nn.Sequential(*stages)
        self.pool = nn.AdaptiveAvgPool2d(1)
        if out_width == self.FEATURE_WIDTH:
            self.fc = nn.Identity()
            self.out_norm = nn.Identity()
        else:
            self.fc = nn.Linear(self.FEATURE_WIDTH, out_width)
            self.out_norm = nn.BatchNorm1d(out_width)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.pool(self.stages(self.stem(x))).flatten(1)
        return self.out_norm(self.fc(h))


BACKBONES = ("mlp", "small_cnn", "resnet18_shape")


def native_feature_width(backbone: str, embed_width: int) -> int:
    """Raw output width of the invariant encoder before projection."""
    if backbone == "resnet18_shape":
        return ResNet18Backbone.FEATURE_WIDTH
    return 2 * embed_width


def make_backbone(backbone: str, input_shape: tuple[int, ...], out_width: int, hidden_dim: int = 64) -> nn.Module:
    if backbone == "mlp":
        in_features = 1
        for d in input_shape:
            in_features *= d
        return MLPBackbone(in_features, hidden_dim, out_width)
    if backbone == "small_cnn":
        if len(input_shape) != 3:
            raise ConfigError(f"small_cnn needs a (C, H, W) input shape, got {input_shape}")
        return SmallCNNBackbone(input_shape[0], out_width)
    if backbone == "resnet18_shape":
        if len(input_shape) != 3:
            raise ConfigError(f"resnet18_shape needs a (C, H, W) input shape, got {input_shape}")
        return ResNet18Backbone(input_shape[0], out_width)
    raise ConfigError(f"unknown backbone {backbone!r}; choose from {BACKBONES}")


# ---------------------------------------------------------------------------
# branch extractor and heads


@dataclass(frozen=True)
class EncoderSpec:
    backbone: str = "mlp"
    input_shape: tuple[int, ...] = (32,)
    embed_width: int = 16
    hidden_dim: int = 64

    def validate(self) -> None:
        if self.backbone not in BACKBONES:
            raise ConfigError(f"unknown backbone {self.backbone!r}")
        if self.embed_width < 1:
            raise ConfigError(f"embed_width must be >= 1, got {self.embed_width}")
        if not self.input_shape:
            raise ConfigError("input_shape must be non-empty")


def _check_input(x: torch.Tensor, input_shape: tuple[int, ...]) -> None:
    if tuple(x.shape[1:]) != tuple(input_shape):
        raise DimensionError(
            f"input of shape {tuple(x.shape[1:])} does not match expected {tuple(input_shape)}"
        )


class BranchExtractor(nn.Module):
    """Per-modality extractor producing (z_inv, z_inf, z_irr)."""

    def __init__(self, spec: EncoderSpec):
        super().__init__()
        spec.validate()
        self.spec = spec
        d = spec.embed_width
        e = native_feature_width(spec.backbone, d)
        self.specific_encoder = make_backbone(spec.backbone, spec.input_shape, 2 * d, spec.hidden_dim)
        self.invariant_encoder = make_backbone(spec.backbone, spec.input_shape, e, spec.hidden_dim)
        self.projection_head = nn.Linear(e, d)

    def forward(self, x: torch.Tensor) -> EmbeddingTriple:
        _check_input(x, self.spec.input_shape)
        d = self.spec.embed_width
        v = self.specific_encoder(x)
        z_inv = self.projection_head(self.invariant_encoder(x))
        return EmbeddingTriple(z_inv=z_inv, z_inf=v[:, d:], z_irr=v[:, :d])


def task_logits(head: nn.Linear, triple: EmbeddingTriple) -> torch.Tensor:
    """Main-task logits from [z_inv || z_inf]; z_irr is never consumed."""
    feats = torch.cat([triple.z_inv, triple.z_inf], dim=-1)
    if feats.shape[-1] != head.in_features:
        raise DimensionError(
            f"task head expects width {head.in_features}, got {feats.shape[-1]}"
        )
    return head(feats)


def _select_task_features(triple: EmbeddingTriple, task_input: str) -> torch.Tensor:
    if task_input == "both":
        return torch.cat([triple.z_inv, triple.z_inf], dim=-1)
    if task_input == "inv":
        return triple.z_inv
    if task_input == "inf":
        return triple.z_inf
    raise ConfigError(f"task_input must be one of {TASK_INPUTS}, got {task_input!r}")


class ModelBundle(nn.Module):
    """Both branches plus every classifier head used during joint training.

    The auxiliary heads (cl_adv, cl_m_inf, cl_m_irr, cl_aux) are single
    modules shared across both modalities. Only the branches and the two
    per-modality task heads are needed at inference time.
    """

    def __init__(
        self,
        spec_m1: EncoderSpec,
        spec_m2: EncoderSpec,
        n_classes: int,
        grl_lambda: float = 1.0,
        task_input: str = "both",
    ):
        super().__init__()
        if spec_m1.embed_width != spec_m2.embed_width:
            raise ConfigError("both modalities must use the same embed_width")
        if task_input not in TASK_INPUTS:
            raise ConfigError(f"task_input must be one of {TASK_INPUTS}, got {task_input!r}")
        if grl_lambda < 0:
            raise ConfigError(f"grl_lambda must be >= 0, got {grl_lambda}")
        d = spec_m1.embed_width
        task_in = 2 * d if task_input == "both" else d
        self.branch_m1 = BranchExtractor(spec_m1)
        self.branch_m2 = BranchExtractor(spec_m2)
        self.cl_m1 = nn.Linear(task_in, n_classes)
        self.cl_m2 = nn.Linear(task_in, n_classes)
        self.cl_adv = nn.Linear(d, 2)
        self.cl_m_inf = nn.Linear(d, 2)
        self.cl_m_irr = nn.Linear(d, 2)
        self.cl_aux = nn.Linear(d, n_classes)
        self.grl_lambda = float(grl_lambda)
        self.task_input = task_input
        self.n_classes = n_classes

    def branch(self, modality: int) -> BranchExtractor:
        return self.branch_m1 if modality == MODALITY_M1 else self.branch_m2

    def task_head(self, modality: int) -> nn.Linear:
        return self.cl_m1 if modality == MODALITY_M1 else self.cl_m2

    def embed(self, x: torch.Tensor, modality: int) -> EmbeddingTriple:
        return self.branch(modality)(x)

    def task_logits_for(self, modality: int, triple: EmbeddingTriple) -> torch.Tensor:
        return self.task_head(modality)(_select_task_features(triple, self.task_input))

    def forward(self, x1: torch.Tensor, x2: torch.Tensor):
        t1 = self.embed(x1, MODALITY_M1)
        t2 = self.embed(x2, MODALITY_M2)
        return self.task_logits_for(MODALITY_M1, t1), self.task_logits_for(MODALITY_M2, t2), t1, t2

    def export_single(self, modality: int) -> "SingleModalNet":
        """Copy the deployable part (branch + task head) for one modality."""
        spec = self.branch(modality).spec
        net = SingleModalNet(spec, self.n_classes, task_input=self.task_input)
        net.branch.load_state_dict(self.branch(modality).state_dict())
        net.head.load_state_dict(self.task_head(modality).state_dict())
        return net


class SingleModalNet(nn.Module):
    """Deployable per-modality model: one branch extractor plus its task head."""

    def __init__(self, spec: EncoderSpec, n_classes: int, task_input: str = "both"):
        super().__init__()
        if task_input not in TASK_INPUTS:
            raise ConfigError(f"task_input must be one of {TASK_INPUTS}, got {task_input!r}")
        d = spec.embed_width
        task_in = 2 * d if task_input == "both" else d
        self.branch = BranchExtractor(spec)
        self.head = nn.Linear(task_in, n_classes)
        self.task_input = task_input
        self.n_classes = n_classes

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        triple = self.branch(x)
        return self.head(_select_task_features(triple, self.task_input))

    def arch_spec(self) -> dict:
        s = self.branch.spec
        return {
            "kind": "single_modal",
            "backbone": s.backbone,
            "input_shape": list(s.input_shape),
            "embed_width": s.embed_width,
            "hidden_dim": s.hidden_dim,
            "n_classes": self.n_classes,
            "task_input": self.task_input,
        }


class SingleNet(nn.Module):
    """Plain supervised classifier: backbone feature plus one linear head.

    Used for the undistilled student baseline, single-modality teachers and
    distilled students.
    """

    def __init__(self, spec: EncoderSpec, n_classes: int, feature_width: int | None = None):
        super().__init__()
        spec.validate()
        self.spec = spec
        self.feature_width = feature_width or 2 * spec.embed_width
        self.encoder = make_backbone(spec.backbone, spec.input_shape, self.feature_width, spec.hidden_dim)
        self.head = nn.Linear(self.feature_width, n_classes)
        self.n_classes = n_classes

    def features(self, x: torch.Tensor) -> torch.Tensor:
        _check_input(x, self.spec.input_shape)
        return self.encoder(x)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(x))

    def arch_spec(self) -> dict:
        s = self.spec
        return {
            "kind": "single_net",
            "backbone": s.backbone,
            "input_shape": list(s.input_shape),
            "embed_width": s.embed_width,
            "hidden_dim": s.hidden_dim,
            "feature_width": self.feature_width,
            "n_classes": self.n_classes,
        }


def fusion_teacher_forward(
    enc_m1: nn.Module, enc_m2: nn.Module, head: nn.Module, x_m1: torch.Tensor, x_m2: torch.Tensor
) -> torch.Tensor:
    """Two-branch teacher fused by elementwise addition of penultimate features."""
    f1 = enc_m1(x_m1)
    f2 = enc_m2(x_m2)
    if f1.shape != f2.shape:
        raise DimensionError(f"fusion features disagree: {tuple(f1.shape)} vs {tuple(f2.shape)}")
    return head(f1 + f2)


class FusionNet(nn.Module):
    """Multi-modal teacher: per-modality encoders, added features, linear head."""

    def __init__(self, spec_m1: EncoderSpec, spec_m2: EncoderSpec, n_classes: int, feature_width: int | None = None):
        super().__init__()
        spec_m1.validate()
        spec_m2.validate()
        self.spec_m1 = spec_m1
        self.spec_m2 = spec_m2
        self.feature_width = feature_width or 2 * spec_m1.embed_width
        self.enc_m1 = make_backbone(spec_m1.backbone, spec_m1.input_shape, self.feature_width, spec_m1.hidden_dim)
        self.enc_m2 = make_backbone(spec_m2.backbone, spec_m2.input_shape, self.feature_width, spec_m2.hidden_dim)
        self.head = nn.Linear(self.feature_width, n_classes)
        self.n_classes = n_classes

    def forward(self, x1: torch.Tensor, x2: torch.Tensor) -> torch.Tensor:
        _check_input(x1, self.spec_m1.input_shape)
        _check_input(x2, self.spec_m2.input_shape)
        return fusion_teacher_forward(self.enc_m1, self.enc_m2, self.head, x1, x2)

    def arch_spec(self) -> dict:
        return {
            "kind": "fusion",
            "backbone": self.spec_m1.backbone,
            "input_shape_m1": list(self.spec_m1.input_shape),
            "input_shape_m2": list(self.spec_m2.input_shape),
            "embed_width": self.spec_m1.embed_width,
            "hidden_dim": self.spec_m1.hidden_dim,
            "feature_width": self.feature_width,
            "n_classes": self.n_classes,
        }


def init_params(module: nn.Module, seed: int) -> nn.Module:
    """Re-initialize every parameter deterministically from ``seed``.

    Leaves the global torch RNG state untouched.
    """
    with torch.random.fork_rng():
        torch.manual_seed(seed)
        for m in module.modules():
            if hasattr(m, "reset_parameters"):
                m.reset_parameters()
    return module
