import dataclasses

import numpy as np
import pytest

from xmkd.errors import ConfigError, EstimationError
from xmkd.synth import SynthConfig, generate, oracle_ceilings, to_image_layout


def test_same_config_regenerates_bit_identical_datasets():
    cfg = SynthConfig(n_samples=300, seed=7)
    a = generate(cfg)
    b = generate(cfg)
    assert np.array_equal(a.x_m1, b.x_m1)
    assert np.array_equal(a.x_m2, b.x_m2)
    assert np.array_equal(a.y, b.y)


def test_different_seeds_differ():
    a = generate(SynthConfig(n_samples=100, seed=0))
    b = generate(SynthConfig(n_samples=100, seed=1))
    assert not np.array_equal(a.x_m1, b.x_m1)


def test_noise_sigma_changes_observations_never_labels():
    base = SynthConfig(n_samples=500, seed=3)
    clean = generate(dataclasses.replace(base, noise_sigma=0.0))
    noisy = generate(dataclasses.replace(base, noise_sigma=2.5))
    assert np.array_equal(clean.y, noisy.y)
    assert not np.array_equal(clean.x_m1, noisy.x_m1)


def test_label_rule_is_deterministic_function_of_latents():
    # with zero noise, re-deriving the label rule from the latents gives
    # exactly the stored labels
    cfg = SynthConfig(n_samples=1000, n_classes=4, noise_sigma=0.0, seed=11)
    ds = generate(cfg)
    rng = np.random.default_rng(cfg.seed)
    from xmkd.synth import _draw_parameters

    w, _, _ = _draw_parameters(rng, cfg)
    z = np.hstack([ds.latents.shared, ds.latents.spec_m1, ds.latents.spec_m2])
    assert np.array_equal(np.argmax(z @ w.T, axis=1), ds.y)


def test_default_config_class_frequencies_balanced():
    ds = generate(SynthConfig())
    freq = np.bincount(ds.y, minlength=4) / len(ds)
    assert freq.min() >= 0.15 and freq.max() <= 0.35


def test_every_class_present_when_samples_ample():
    for seed in range(5):
        cfg = SynthConfig(n_samples=10 * 4, n_classes=4, seed=seed)
        ds = generate(cfg)
        assert set(np.unique(ds.y)) == set(range(4))


def test_invalid_configs_rejected():
    with pytest.raises(ConfigError):
        generate(SynthConfig(n_classes=1))
    with pytest.raises(ConfigError):
        generate(SynthConfig(noise_sigma=-0.1))
    with pytest.raises(ConfigError):
        generate(SynthConfig(obs_dim_m1=0))
    with pytest.raises(ConfigError):
        generate(SynthConfig(n_samples=2, n_classes=4))


def test_dataset_iteration_and_subset():
    ds = generate(SynthConfig(n_samples=50))
    sample = ds[3]
    assert sample.x_m1.shape == (36,)
    assert 0 <= sample.y < 4
    sub = ds.subset(np.array([1, 5, 9]))
    assert len(sub) == 3
    assert np.array_equal(sub.y, ds.y[[1, 5, 9]])


class TestOracleCeilings:
    def test_no_specific_factors_makes_shared_equal_full(self):
        cfg = SynthConfig(spec_dim_m1=0, spec_dim_m2=0, seed=5)
        rep = oracle_ceilings(cfg, n_mc=10_000, inner=128)
        assert rep.acc_shared_only_m1 == rep.acc_full_m1
        assert rep.acc_shared_only_m2 == rep.acc_full_m2

    def test_default_config_full_strictly_beats_shared(self):
        rep = oracle_ceilings(SynthConfig(), n_mc=10_000, inner=256)
        assert rep.acc_full_m1 > rep.acc_shared_only_m1
        assert rep.acc_full_m2 > rep.acc_shared_only_m2

    def test_no_informative_latents_gives_class_prior(self):
        cfg = SynthConfig(n_classes=2, shared_dim=0, spec_dim_m1=0, spec_dim_m2=0, noise_sigma=3.0)
        rep = oracle_ceilings(cfg)
        assert rep.acc_shared_only_m1 == pytest.approx(0.5)
        assert rep.acc_full_m2 == pytest.approx(0.5)

    def test_monotonicity_over_random_configs(self):
        # more information never lowers the Bayes ceiling
        for seed in range(5):
            rng = np.random.default_rng(1000 + seed)
            cfg = SynthConfig(
                n_classes=int(rng.integers(2, 6)),
                shared_dim=int(rng.integers(2, 6)),
                spec_dim_m1=int(rng.integers(2, 6)),
                spec_dim_m2=int(rng.integers(2, 6)),
                seed=seed,
            )
            rep = oracle_ceilings(cfg, n_mc=10_000, inner=256)
            assert rep.acc_full_m1 >= rep.acc_shared_only_m1 - 1e-9
            assert rep.acc_full_m2 >= rep.acc_shared_only_m2 - 1e-9
            for v in (rep.acc_shared_only_m1, rep.acc_full_m1, rep.acc_full_m2):
                assert 0.0 <= v <= 1.0

    def test_small_budget_rejected(self):
        with pytest.raises(EstimationError):
            oracle_ceilings(SynthConfig(), n_mc=999)


def test_to_image_layout_squares():
    ds = generate(SynthConfig(n_samples=20))
    img = to_image_layout(ds)
    assert img.x_m1.shape == (20, 1, 6, 6)
    assert img.x_m2.shape == (20, 1, 4, 4)
    assert np.array_equal(img.x_m1.reshape(20, -1), ds.x_m1)


def test_to_image_layout_rejects_non_square():
    from xmkd.errors import DataError

    ds = generate(SynthConfig(n_samples=20, obs_dim_m1=10))
    with pytest.raises(DataError):
        to_image_layout(ds)
