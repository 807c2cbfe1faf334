"""Dataset IO, splitting, augmentation and batching.

Tensor file format (binary, little-endian, no padding):

    magic   4 bytes  b"DKT1"
    rank    u32      number of dimensions, at most 4
    dims    u32 * rank
    payload f32 * prod(dims), row-major

Manifests are UTF-8 CSV files with the header
``sample_id,path_m1,path_m2,label``; tensor paths are resolved relative to
the manifest's directory.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AugmentError, DataError, FormatError, ManifestError, SplitError
from .synth import PairedDataset, PairedSample

MAGIC = b"DKT1"
MAX_RANK = 4

__all__ = [
    "tensor_to_bytes",
    "tensor_from_bytes",
    "write_tensor_file",
    "read_tensor_file",
    "Manifest",
    "ManifestRow",
    "read_manifest",
    "write_manifest",
    "load_manifest_dataset",
    "save_dataset",
    "SplitSpec",
    "split_indices",
    "split",
    "AugmentSpec",
    "apply_transform",
    "augment",
    "augment_pairs",
    "batch_index_plan",
    "batches",
]


# ---------------------------------------------------------------------------
# tensor file format


def tensor_to_bytes(tensor) -> bytes:
    """Encode a rank <= 4 tensor of finite values; round-trips bit-exactly."""
    arr = np.asarray(tensor, dtype="<f4")
    if arr.ndim > MAX_RANK:
        raise FormatError(f"rank {arr.ndim} exceeds maximum {MAX_RANK}")
    if not np.isfinite(arr).all():
        raise FormatError("tensor contains non-finite values")
    parts = [
        MAGIC,
        struct.pack("<I", arr.ndim),
        struct.pack(f"<{arr.ndim}I", *arr.shape),
        np.ascontiguousarray(arr).tobytes(),
    ]
    return b"".join(parts)


def write_tensor_file(path, tensor) -> None:
    Path(path).write_bytes(tensor_to_bytes(tensor))


def tensor_from_bytes(blob: bytes) -> np.ndarray:
    """Decode tensor bytes, validating the header and the payload size."""
    if len(blob) < 4:
        raise FormatError("missing magic", offset=0)
    if blob[:4] != MAGIC:
        raise FormatError(f"bad magic {blob[:4]!r}, expected {MAGIC!r}", offset=0)
    if len(blob) < 8:
        raise FormatError("truncated rank field", offset=4)
    (rank,) = struct.unpack_from("<I", blob, 4)
    if rank > MAX_RANK:
        raise FormatError(f"rank {rank} exceeds maximum {MAX_RANK}", offset=4)
    header_end = 8 + 4 * rank
    if len(blob) < header_end:
        raise FormatError("truncated dimension list", offset=8)
    dims = struct.unpack_from(f"<{rank}I", blob, 8)
    n_values = int(np.prod(dims, dtype=np.int64)) if rank else 1
    expected = header_end + 4 * n_values
    if len(blob) < expected:
        raise FormatError(
            f"truncated payload: expected {expected} bytes, file has {len(blob)}",
            offset=header_end,
        )
    if len(blob) > expected:
        raise FormatError(
            f"trailing bytes after payload: expected {expected} bytes, file has {len(blob)}",
            offset=expected,
        )
    data = np.frombuffer(blob, dtype="<f4", count=n_values, offset=header_end)
    return data.reshape(dims).copy()


def read_tensor_file(path) -> np.ndarray:
    return tensor_from_bytes(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# manifests


@dataclass(frozen=True)
class ManifestRow:
    sample_id: str
    path_m1: str
    path_m2: str
    label: int


@dataclass
class Manifest:
    rows: list[ManifestRow]
    n_classes: int


MANIFEST_HEADER = ["sample_id", "path_m1", "path_m2", "label"]


def write_manifest(path, manifest: Manifest) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for row in manifest.rows:
            writer.writerow([row.sample_id, row.path_m1, row.path_m2, row.label])


def read_manifest(path) -> Manifest:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(f"{path}: empty manifest") from None
        if header != MANIFEST_HEADER:
            raise ManifestError(
                f"{path}: bad header {header}, expected {MANIFEST_HEADER}"
            )
        rows = []
        seen: set[str] = set()
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != 4:
                raise ManifestError(f"{path}:{lineno}: expected 4 columns, got {len(record)}")
            sample_id, p1, p2, label_s = record
            if sample_id in seen:
                raise ManifestError(f"{path}:{lineno}: duplicate sample_id {sample_id!r}")
            seen.add(sample_id)
            try:
                label = int(label_s)
            except ValueError:
                raise ManifestError(f"{path}:{lineno}: non-integer label {label_s!r}") from None
            if label < 0:
                raise ManifestError(f"{path}:{lineno}: negative label {label}")
            rows.append(ManifestRow(sample_id, p1, p2, label))
    if not rows:
        raise ManifestError(f"{path}: manifest lists no samples")
    n_classes = max(r.label for r in rows) + 1
    return Manifest(rows=rows, n_classes=n_classes)


def load_manifest_dataset(manifest_path) -> PairedDataset:
    """Load every referenced tensor pair into memory."""
    manifest_path = Path(manifest_path)
    manifest = read_manifest(manifest_path)
    base = manifest_path.parent
    xs1, xs2, ys = [], [], []
    for row in manifest.rows:
        for rel in (row.path_m1, row.path_m2):
            if not (base / rel).exists():
                raise ManifestError(f"{manifest_path}: referenced file missing: {rel}")
        xs1.append(read_tensor_file(base / row.path_m1))
        xs2.append(read_tensor_file(base / row.path_m2))
        ys.append(row.label)
    x1 = np.stack(xs1)
    x2 = np.stack(xs2)
    return PairedDataset(
        x_m1=x1,
        x_m2=x2,
        y=np.asarray(ys, dtype=np.int64),
        n_classes=manifest.n_classes,
        source={"kind": "manifest", "manifest": str(manifest_path)},
    )


def save_dataset(dataset: PairedDataset, out_dir) -> Path:
    """Write per-sample tensor files plus a manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    tensors = out_dir / "tensors"
    tensors.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(len(dataset) - 1)))
    rows = []
    for i in range(len(dataset)):
        sid = f"s{i:0{width}d}"
        rel1 = f"tensors/{sid}_m1.dkt"
        rel2 = f"tensors/{sid}_m2.dkt"
        write_tensor_file(out_dir / rel1, dataset.x_m1[i])
        write_tensor_file(out_dir / rel2, dataset.x_m2[i])
        rows.append(ManifestRow(sid, rel1, rel2, int(dataset.y[i])))
    manifest_path = out_dir / "manifest.csv"
    write_manifest(manifest_path, Manifest(rows=rows, n_classes=dataset.n_classes))
    return manifest_path


# ---------------------------------------------------------------------------
# splits


@dataclass(frozen=True)
class SplitSpec:
    """Train/val/test fractions plus the shuffle seed."""

    fractions: tuple[float, float, float] = (0.70, 0.10, 0.20)
    seed: int = 0

    def validate(self) -> None:
        if len(self.fractions) != 3 or any(f <= 0 for f in self.fractions):
            raise SplitError(f"fractions must be three positive values, got {self.fractions}")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise SplitError(f"fractions must sum to 1.0, got {sum(self.fractions)!r}")


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic shuffle then contiguous partition of ``range(n)``.

    Sizes are floor(f_train * n) and floor(f_val * n), remainder to test.
    """
    spec.validate()
    if n < 10:
        raise SplitError(f"dataset of {n} samples is too small to split (need >= 10)")
    perm = np.random.default_rng(spec.seed).permutation(n)
    n_train = int(np.floor(spec.fractions[0] * n))
    n_val = int(np.floor(spec.fractions[1] * n))
    if n_train == 0 or n_val == 0 or n_train + n_val >= n:
        raise SplitError(f"split of {n} samples leaves an empty partition")
    return (
        perm[:n_train],
        perm[n_train : n_train + n_val],
        perm[n_train + n_val :],
    )


def split(dataset: PairedDataset, spec: SplitSpec) -> tuple[PairedDataset, PairedDataset, PairedDataset]:
    idx_train, idx_val, idx_test = split_indices(len(dataset), spec)
    return dataset.subset(idx_train), dataset.subset(idx_val), dataset.subset(idx_test)


# ---------------------------------------------------------------------------
# augmentation


@dataclass(frozen=True)
class AugmentSpec:
    """Which geometric transforms may fire; each fires with probability 0.5.

    Training-time only — validation and test data must never pass through
    `augment`.
    """

    enable_hflip: bool = False
    enable_vflip: bool = False
    enable_rot90: bool = False
    seed: int = 0

    @property
    def any_enabled(self) -> bool:
        return self.enable_hflip or self.enable_vflip or self.enable_rot90


def apply_transform(x: np.ndarray, hflip: bool = False, vflip: bool = False, rot_quarters: int = 0) -> np.ndarray:
    """Deterministic core transform on one (C, H, W) image."""
    if x.ndim != 3:
        raise AugmentError(f"augmentation needs (C, H, W) layout, got shape {x.shape}")
    if rot_quarters % 4 and x.shape[-2] != x.shape[-1]:
        raise AugmentError(
            f"rot90 needs square spatial dims, got {x.shape[-2]}x{x.shape[-1]}"
        )
    out = x
    if hflip:
        out = out[..., ::-1]
    if vflip:
        out = out[..., ::-1, :]
    if rot_quarters % 4:
        out = np.rot90(out, k=rot_quarters % 4, axes=(-2, -1))
    return np.ascontiguousarray(out)


def _draw_transform(spec: AugmentSpec, rng: np.random.Generator) -> tuple[bool, bool, int]:
    hflip = spec.enable_hflip and rng.random() < 0.5
    vflip = spec.enable_vflip and rng.random() < 0.5
    quarters = 0
    if spec.enable_rot90 and rng.random() < 0.5:
        quarters = int(rng.integers(1, 4))
    return hflip, vflip, quarters


def augment(sample: PairedSample, spec: AugmentSpec, rng: np.random.Generator) -> PairedSample:
    """Apply one randomly drawn transform to BOTH modalities of a pair.

    Sharing the draw keeps the two views spatially aligned; the label is
    untouched.
    """
    hflip, vflip, quarters = _draw_transform(spec, rng)
    return PairedSample(
        x_m1=apply_transform(sample.x_m1, hflip, vflip, quarters),
        x_m2=apply_transform(sample.x_m2, hflip, vflip, quarters),
        y=sample.y,
        latents=sample.latents,
    )


def augment_pairs(
    x1: np.ndarray, x2: np.ndarray, spec: AugmentSpec, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample paired augmentation over (N, C, H, W) batches."""
    out1 = np.empty_like(x1)
    out2 = np.empty_like(x2)
    for i in range(x1.shape[0]):
        hflip, vflip, quarters = _draw_transform(spec, rng)
        out1[i] = apply_transform(x1[i], hflip, vflip, quarters)
        out2[i] = apply_transform(x2[i], hflip, vflip, quarters)
    return out1, out2


def augment_images(x: np.ndarray, spec: AugmentSpec, rng: np.random.Generator) -> np.ndarray:
    """Per-sample augmentation of a single-modality (N, C, H, W) batch."""
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        hflip, vflip, quarters = _draw_transform(spec, rng)
        out[i] = apply_transform(x[i], hflip, vflip, quarters)
    return out


# ---------------------------------------------------------------------------
# batching


def batch_index_plan(n: int, batch_size: int, shuffle_seed: int, epoch: int = 0) -> list[np.ndarray]:
    """Index arrays for one epoch: ceil(n / batch_size) batches, each sample once.

    The order is a pure function of (shuffle_seed, epoch).
    """
    if batch_size < 1:
        raise DataError(f"batch_size must be >= 1, got {batch_size}")
    if n < 1:
        raise DataError("cannot batch an empty dataset")
    perm = np.random.default_rng([shuffle_seed, epoch]).permutation(n)
    return [perm[lo : lo + batch_size] for lo in range(0, n, batch_size)]


def batches(dataset: PairedDataset, batch_size: int, shuffle_seed: int, epoch: int = 0):
    """Yield PairedDataset slices in seeded order."""
    for idx in batch_index_plan(len(dataset), batch_size, shuffle_seed, epoch):
        yield dataset.subset(idx)
