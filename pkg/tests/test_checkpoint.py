import json
import zipfile

import pytest
import torch

from xmkd.checkpoint import CHECKPOINT_VERSION, load_checkpoint, save_checkpoint
from xmkd.config import ExperimentConfig
from xmkd.errors import CheckpointError
from xmkd.networks import EncoderSpec, FusionNet, SingleModalNet, SingleNet, init_params


def _probe_net(seed=0):
    net = SingleModalNet(EncoderSpec("mlp", (6,), 4, 8), 3)
    init_params(net, seed)
    net.eval()
    return net


def test_round_trip_identical_logits(tmp_path):
    net = _probe_net()
    probe = torch.randn(8, 6)
    expected = net(probe)
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, net, epoch=7, best_val_f1=0.5)
    loaded, meta = load_checkpoint(path)
    assert torch.equal(loaded(probe), expected)
    assert meta["epoch"] == 7
    assert meta["best_val_f1"] == 0.5


def test_config_echo_recoverable_verbatim(tmp_path):
    cfg = ExperimentConfig.desk_default()
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, _probe_net(), config=cfg.to_dict())
    _, meta = load_checkpoint(path)
    assert ExperimentConfig.from_dict(meta["config"]) == cfg


def test_version_mismatch_reports_both_tags(tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, _probe_net())
    # rewrite the archive with a doctored version tag
    with zipfile.ZipFile(path) as zf:
        entries = {n: zf.read(n) for n in zf.namelist()}
    meta = json.loads(entries["meta.json"])
    meta["version"] = "xmkd-checkpoint-0"
    entries["meta.json"] = json.dumps(meta).encode()
    with zipfile.ZipFile(path, "w") as zf:
        for name, blob in entries.items():
            zf.writestr(name, blob)
    with pytest.raises(CheckpointError) as err:
        load_checkpoint(path)
    assert "xmkd-checkpoint-0" in str(err.value)
    assert CHECKPOINT_VERSION in str(err.value)


def test_truncated_file_fails_without_partial_model(tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, _probe_net())
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError, match="not found"):
        load_checkpoint(tmp_path / "absent.ckpt")


def test_single_net_and_fusion_round_trip(tmp_path):
    single = SingleNet(EncoderSpec("mlp", (5,), 4, 8), 4, feature_width=10)
    init_params(single, 1)
    single.eval()
    probe = torch.randn(4, 5)
    save_checkpoint(tmp_path / "s.ckpt", single)
    loaded, _ = load_checkpoint(tmp_path / "s.ckpt")
    assert torch.equal(loaded(probe), single(probe))

    fusion = FusionNet(EncoderSpec("mlp", (5,), 4, 8), EncoderSpec("mlp", (3,), 4, 8), 4)
    init_params(fusion, 2)
    fusion.eval()
    p1, p2 = torch.randn(4, 5), torch.randn(4, 3)
    save_checkpoint(tmp_path / "f.ckpt", fusion)
    loaded_f, _ = load_checkpoint(tmp_path / "f.ckpt")
    assert torch.equal(loaded_f(p1, p2), fusion(p1, p2))


def test_resnet_buffers_restored_bit_exact(tmp_path):
    # running BN statistics ride along through the f32 tensor format
    net = SingleNet(EncoderSpec("small_cnn", (1, 6, 6), 4, 8), 3, feature_width=8)
    init_params(net, 3)
    net.train()
    net(torch.randn(16, 1, 6, 6))  # populate running stats
    net.eval()
    probe = torch.randn(4, 1, 6, 6)
    save_checkpoint(tmp_path / "cnn.ckpt", net)
    loaded, _ = load_checkpoint(tmp_path / "cnn.ckpt")
    assert torch.equal(loaded(probe), net(probe))
