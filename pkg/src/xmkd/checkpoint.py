"""Model checkpoints: a zip archive of metadata plus tensor-file parameters.

Layout inside the archive:

    meta.json          version tag, architecture record, config echo,
                       epoch / best-val bookkeeping, per-entry dtypes
    params/<name>.dkt  one tensor file per state-dict entry (f32 payload;
                       original dtypes are restored from meta.json)

Reloading rebuilds the network from the architecture record and restores a
bit-identical state dict, so inference outputs match exactly.
"""

from __future__ import annotations

import json
import zipfile
from pathlib import Path

import numpy as np
import torch

from .data import tensor_from_bytes, tensor_to_bytes
from .errors import CheckpointError, FormatError
from .networks import EncoderSpec, FusionNet, SingleModalNet, SingleNet

CHECKPOINT_VERSION = "xmkd-checkpoint-1"

__all__ = ["CHECKPOINT_VERSION", "save_checkpoint", "load_checkpoint"]


def _build_from_arch(arch: dict) -> torch.nn.Module:
    kind = arch.get("kind")
    if kind == "single_modal":
        spec = EncoderSpec(
            backbone=arch["backbone"],
            input_shape=tuple(arch["input_shape"]),
            embed_width=arch["embed_width"],
            hidden_dim=arch["hidden_dim"],
        )
        return SingleModalNet(spec, arch["n_classes"], task_input=arch["task_input"])
    if kind == "single_net":
        spec = EncoderSpec(
            backbone=arch["backbone"],
            input_shape=tuple(arch["input_shape"]),
            embed_width=arch["embed_width"],
            hidden_dim=arch["hidden_dim"],
        )
        return SingleNet(spec, arch["n_classes"], feature_width=arch["feature_width"])
    if kind == "fusion":
        spec1 = EncoderSpec(
            backbone=arch["backbone"],
            input_shape=tuple(arch["input_shape_m1"]),
            embed_width=arch["embed_width"],
            hidden_dim=arch["hidden_dim"],
        )
        spec2 = EncoderSpec(
            backbone=arch["backbone"],
            input_shape=tuple(arch["input_shape_m2"]),
            embed_width=arch["embed_width"],
            hidden_dim=arch["hidden_dim"],
        )
        return FusionNet(spec1, spec2, arch["n_classes"], feature_width=arch["feature_width"])
    raise CheckpointError(f"unknown architecture kind {kind!r} in checkpoint")


def save_checkpoint(
    path,
    net: torch.nn.Module,
    *,
    config: dict | None = None,
    epoch: int | None = None,
    best_val_f1: float | None = None,
    extra: dict | None = None,
) -> None:
    """Archive ``net`` (must expose ``arch_spec()``) with its config echo."""
    if not hasattr(net, "arch_spec"):
        raise CheckpointError(f"{type(net).__name__} does not describe its architecture")
    state = net.state_dict()
    meta = {
        "version": CHECKPOINT_VERSION,
        "arch": net.arch_spec(),
        "config": config,
        "epoch": epoch,
        "best_val_f1": best_val_f1,
        "extra": extra or {},
        "dtypes": {k: str(v.dtype).removeprefix("torch.") for k, v in state.items()},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("meta.json", json.dumps(meta, indent=2, sort_keys=True))
        for name, tensor in state.items():
            arr = tensor.detach().cpu().numpy().astype(np.float32)
            zf.writestr(f"params/{name}.dkt", tensor_to_bytes(arr))


def load_checkpoint(path) -> tuple[torch.nn.Module, dict]:
    """Rebuild the archived network; returns ``(net, meta)``.

    Raises CheckpointError on version mismatch or a damaged archive; never
    returns a partially restored model.
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        with zipfile.ZipFile(path) as zf:
            try:
                meta = json.loads(zf.read("meta.json"))
            except KeyError:
                raise CheckpointError(f"{path}: archive has no meta.json") from None
            version = meta.get("version")
            if version != CHECKPOINT_VERSION:
                raise CheckpointError(
                    f"{path}: version mismatch: file has {version!r}, "
                    f"library expects {CHECKPOINT_VERSION!r}"
                )
            net = _build_from_arch(meta.get("arch", {}))
            dtypes = meta.get("dtypes", {})
            state = {}
            for name in net.state_dict():
                entry = f"params/{name}.dkt"
                try:
                    blob = zf.read(entry)
                except KeyError:
                    raise CheckpointError(f"{path}: missing tensor {entry}") from None
                try:
                    arr = tensor_from_bytes(blob)
                except FormatError as err:
                    raise CheckpointError(f"{path}: damaged tensor {entry}: {err}") from None
                dtype = getattr(torch, dtypes.get(name, "float32"))
                state[name] = torch.from_numpy(arr).to(dtype)
    except zipfile.BadZipFile:
        raise CheckpointError(f"{path}: not a readable checkpoint archive") from None
    net.load_state_dict(state)
    net.eval()
    return net, meta
