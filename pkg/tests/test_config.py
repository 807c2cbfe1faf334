import pytest

from xmkd.config import ExperimentConfig, apply_overrides
from xmkd.errors import ConfigError


class TestRoundTrip:
    def test_json_round_trip_identity(self):
        cfg = ExperimentConfig.desk_default()
        assert ExperimentConfig.from_json(cfg.to_json()) == cfg

    def test_file_round_trip(self, tmp_path):
        cfg = ExperimentConfig.desk_default()
        cfg.save(tmp_path / "c.json")
        assert ExperimentConfig.load(tmp_path / "c.json") == cfg

    def test_partial_config_fills_defaults(self):
        cfg = ExperimentConfig.from_dict({"optimizer": {"lr": 0.005}})
        assert cfg.optimizer.lr == 0.005
        assert cfg.optimizer.epochs == 300  # library default is the full-scale recipe
        assert cfg.optimizer.batch_size == 128
        assert cfg.split.fractions == (0.70, 0.10, 0.20)

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            ExperimentConfig.from_dict({"optimiser": {}})

    def test_unknown_nested_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            ExperimentConfig.from_dict({"optimizer": {"lrr": 1}})
        with pytest.raises(ConfigError, match="unknown key"):
            ExperimentConfig.from_dict({"data": {"synth": {"n_sample": 5}}})

    def test_invalid_json_rejected(self):
        with pytest.raises(ConfigError, match="invalid JSON"):
            ExperimentConfig.from_json("{not json")


class TestValidation:
    def test_lr_positive(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"optimizer": {"lr": 0.0}})

    def test_epochs_at_least_one(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"optimizer": {"epochs": 0}})

    def test_at_least_one_seed(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"seeds": []})

    def test_method_kind_checked(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"method": {"kind": "alchemy"}})


class TestOverrides:
    def test_three_layer_precedence(self):
        # built-in default < config file < command line, probed on one key
        default_lr = ExperimentConfig().optimizer.lr
        file_dict = ExperimentConfig.from_dict({"optimizer": {"lr": 0.005}}).to_dict()
        assert default_lr != 0.005
        overridden = apply_overrides(file_dict, ["optimizer.lr=0.007"])
        cfg = ExperimentConfig.from_dict(overridden)
        assert cfg.optimizer.lr == 0.007

    def test_values_parse_as_json(self):
        cfg_dict = ExperimentConfig().to_dict()
        out = apply_overrides(cfg_dict, ["loss.enable_adv=false", "seeds=[3,4]"])
        cfg = ExperimentConfig.from_dict(out)
        assert cfg.loss.enable_adv is False
        assert cfg.seeds == (3, 4)

    def test_string_values_pass_through(self):
        out = apply_overrides(ExperimentConfig().to_dict(), ["model.backbone=small_cnn"])
        assert ExperimentConfig.from_dict(out).model.backbone == "small_cnn"

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError, match="key=value"):
            apply_overrides(ExperimentConfig().to_dict(), ["optimizer.lr"])

    def test_bad_path_rejected(self):
        with pytest.raises(ConfigError, match="does not exist"):
            apply_overrides(ExperimentConfig().to_dict(), ["nonexistent.key=1"])

    def test_override_followed_by_unknown_key_detection(self):
        out = apply_overrides(ExperimentConfig().to_dict(), ["optimizer.lrr=1"])
        with pytest.raises(ConfigError, match="unknown key"):
            ExperimentConfig.from_dict(out)


def test_desk_default_is_small_scale():
    cfg = ExperimentConfig.desk_default()
    assert cfg.optimizer.epochs == 30
    assert cfg.optimizer.batch_size == 64
    assert cfg.model.backbone == "mlp"
    assert cfg.model.embed_dim == 16
    assert cfg.loss.orth_mode == "squared"
    assert cfg.data.synth.n_samples == 2000
    assert cfg.data.synth.n_classes == 4


def test_disabled_terms_helper():
    cfg = ExperimentConfig.from_dict({"loss": {"enable_adv": False, "enable_orth": False}})
    assert cfg.loss.disabled_terms() == ("adv", "orth")
