import numpy as np
import pytest
import torch
from sklearn.base import clone

from xmkd.data import AugmentSpec, SplitSpec, split
from xmkd.errors import ConfigError, DimensionError, NotFittedError
from xmkd.estimators import (
    DisComKDClassifier,
    DistilledClassifier,
    FusionTeacherClassifier,
    NetClassifier,
)
from xmkd.metrics import weighted_f1
from xmkd.synth import SynthConfig, generate, to_image_layout


@pytest.fixture(scope="module")
def small_data():
    ds = generate(SynthConfig(n_samples=240, seed=4))
    return split(ds, SplitSpec(seed=0))


def _pairs(ds):
    return (ds.x_m1, ds.x_m2)


class TestSklearnProtocol:
    def test_get_set_params_and_clone(self):
        est = DisComKDClassifier(epochs=3, lr=0.01, orth_mode="squared")
        params = est.get_params()
        assert params["epochs"] == 3
        assert params["orth_mode"] == "squared"
        est2 = clone(est)
        assert est2.get_params() == params
        est2.set_params(epochs=5)
        assert est2.epochs == 5 and est.epochs == 3

    def test_all_estimators_cloneable(self):
        for est in (
            NetClassifier(epochs=1),
            FusionTeacherClassifier(epochs=1),
            DistilledClassifier(teacher=None, epochs=1),
        ):
            assert clone(est).get_params() == est.get_params()

    def test_unfitted_predict_raises(self):
        with pytest.raises(NotFittedError):
            DisComKDClassifier().predict(np.zeros((2, 4)))
        with pytest.raises(NotFittedError):
            NetClassifier().predict(np.zeros((2, 4)))


class TestDisComKD:
    def test_fit_produces_two_deployable_models(self, small_data):
        train, val, test = small_data
        est = DisComKDClassifier(epochs=2, batch_size=32, random_state=0)
        est.fit(_pairs(train), train.y, eval_set=(_pairs(val), val.y))
        assert len(est.models_) == 2
        p1 = est.predict(test.x_m1, modality=0)
        p2 = est.predict(test.x_m2, modality=1)
        assert p1.shape == (len(test),)
        assert set(np.unique(p2)) <= set(range(4))

    def test_fit_deterministic_given_random_state(self, small_data):
        train, val, test = small_data
        runs = []
        for _ in range(2):
            est = DisComKDClassifier(epochs=2, batch_size=32, random_state=7)
            est.fit(_pairs(train), train.y, eval_set=(_pairs(val), val.y))
            runs.append((est.predict(test.x_m1, 0), est.history_))
        assert np.array_equal(runs[0][0], runs[1][0])
        assert runs[0][1] == runs[1][1]

    def test_history_has_loss_and_val_columns(self, small_data):
        train, val, _ = small_data
        est = DisComKDClassifier(epochs=2, batch_size=32)
        est.fit(_pairs(train), train.y, eval_set=(_pairs(val), val.y))
        row = est.history_[0]
        for key in ("epoch", "loss_cl", "loss_adv", "loss_mod", "loss_aux", "loss_orth", "loss_total", "val_f1_m1", "val_f1_m2"):
            assert key in row

    def test_single_optimizer_step_updates_everything(self, small_data):
        # joint training: one epoch moves branches, task heads and shared heads
        train, val, _ = small_data
        est = DisComKDClassifier(epochs=1, batch_size=256, random_state=0)
        est.fit(_pairs(train), train.y)
        from xmkd.networks import init_params

        reference = DisComKDClassifier(epochs=1, batch_size=256, random_state=0)
        # rebuild the initial parameters and compare against the fitted bundle
        import xmkd.networks as N

        spec1 = N.EncoderSpec("mlp", (36,), 16, 64)
        spec2 = N.EncoderSpec("mlp", (16,), 16, 64)
        init_bundle = N.ModelBundle(spec1, spec2, 4)
        init_params(init_bundle, 0)
        moved = {
            name: not torch.equal(p_init, dict(est.bundle_.named_parameters())[name])
            for name, p_init in init_bundle.named_parameters()
        }
        for prefix in ("branch_m1", "branch_m2", "cl_m1", "cl_m2", "cl_adv", "cl_m_inf", "cl_m_irr", "cl_aux"):
            assert any(moved[n] for n in moved if n.startswith(prefix)), prefix

    def test_wrong_modality_width_raises(self, small_data):
        train, val, test = small_data
        est = DisComKDClassifier(epochs=1, batch_size=64)
        est.fit(_pairs(train), train.y)
        with pytest.raises(DimensionError):
            est.predict(test.x_m2, modality=0)

    def test_best_val_selection_per_modality(self, small_data):
        # the returned models realize exactly the best recorded validation F1
        train, val, _ = small_data
        est = DisComKDClassifier(epochs=4, batch_size=32, random_state=0)
        est.fit(_pairs(train), train.y, eval_set=(_pairs(val), val.y))
        for m, name in ((0, "m1"), (1, "m2")):
            best = max(row[f"val_f1_{name}"] for row in est.history_)
            realized = weighted_f1(est.predict((val.x_m1, val.x_m2)[m], modality=m), val.y, 4)
            assert realized == pytest.approx(best, abs=1e-12)

    def test_embed_returns_three_d_wide_arrays(self, small_data):
        train, _, test = small_data
        est = DisComKDClassifier(epochs=1, batch_size=64, embed_dim=8)
        est.fit(_pairs(train), train.y)
        z_inv, z_inf, z_irr = est.embed(test.x_m1, 0)
        assert z_inv.shape == z_inf.shape == z_irr.shape == (len(test), 8)

    def test_unknown_disabled_term_rejected(self, small_data):
        train, _, _ = small_data
        est = DisComKDClassifier(epochs=1, disabled_terms=("cl",))
        with pytest.raises(ConfigError):
            est.fit(_pairs(train), train.y)

    def test_paired_input_required(self):
        est = DisComKDClassifier(epochs=1)
        with pytest.raises(DimensionError):
            est.fit(np.zeros((10, 4)), np.zeros(10, dtype=int))


class TestNetClassifier:
    def test_fit_predict_and_score(self, small_data):
        train, val, test = small_data
        est = NetClassifier(epochs=3, batch_size=32, random_state=0)
        est.fit(train.x_m1, train.y, eval_set=(val.x_m1, val.y))
        assert est.score(test.x_m1, test.y) > 0.2
        proba = est.predict_proba(test.x_m1)
        assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-5)

    def test_best_val_selection_tracks_history(self, small_data):
        train, val, _ = small_data
        est = NetClassifier(epochs=3, batch_size=32, random_state=0)
        est.fit(train.x_m1, train.y, eval_set=(val.x_m1, val.y))
        assert all("val_f1" in row for row in est.history_)

    def test_deterministic(self, small_data):
        train, _, test = small_data
        a = NetClassifier(epochs=2, random_state=5).fit(train.x_m1, train.y).predict(test.x_m1)
        b = NetClassifier(epochs=2, random_state=5).fit(train.x_m1, train.y).predict(test.x_m1)
        assert np.array_equal(a, b)


class TestFusionTeacher:
    def test_fit_predict(self, small_data):
        train, val, test = small_data
        est = FusionTeacherClassifier(epochs=3, batch_size=32, random_state=0)
        est.fit(_pairs(train), train.y, eval_set=(_pairs(val), val.y))
        preds = est.predict(_pairs(test))
        assert preds.shape == (len(test),)

    def test_overfits_noiseless_data(self):
        # labels are a deterministic function of the latents: the fusion
        # teacher must fit the training set nearly perfectly
        ds = generate(SynthConfig(n_samples=600, noise_sigma=0.0, seed=9))
        train, val, _ = split(ds, SplitSpec(seed=0))
        est = FusionTeacherClassifier(epochs=30, batch_size=64, lr=1e-3, random_state=0)
        est.fit(_pairs(train), train.y, eval_set=(_pairs(val), val.y))
        train_f1 = weighted_f1(est.predict(_pairs(train)), train.y, 4)
        assert train_f1 >= 0.95


@pytest.fixture(scope="module")
def teacher(small_data):
    train, val, _ = small_data
    t = FusionTeacherClassifier(epochs=3, batch_size=32, random_state=0)
    t.fit(_pairs(train), train.y, eval_set=(_pairs(val), val.y))
    return t


class TestDistilled:
    def test_teacher_parameters_frozen(self, small_data, teacher):
        train, val, _ = small_data
        before = {k: v.clone() for k, v in teacher.net_.state_dict().items()}
        student = DistilledClassifier(teacher=teacher, student_modality="m2", epochs=2, batch_size=32)
        student.fit(_pairs(train), train.y, eval_set=(_pairs(val), val.y))
        after = teacher.net_.state_dict()
        for key in before:
            assert torch.equal(before[key], after[key])

    def test_kdv1_invariant_to_train_label_permutation(self, small_data, teacher):
        train, val, _ = small_data
        rng = np.random.default_rng(0)
        permuted = train.y[rng.permutation(len(train))]

        def fit_params(labels):
            est = DistilledClassifier(
                teacher=teacher, student_modality="m2", alpha=0.0, epochs=2, batch_size=32, random_state=3
            )
            est.fit(_pairs(train), labels, eval_set=(_pairs(val), val.y))
            return est.net_.state_dict()

        a = fit_params(train.y)
        b = fit_params(permuted)
        for key in a:
            assert torch.equal(a[key], b[key])

    def test_self_distillation_starts_near_zero_kd(self, small_data):
        # teacher == already-trained student copy: the KD term starts at ~0
        train, val, _ = small_data
        base = NetClassifier(epochs=3, batch_size=32, random_state=0)
        base.fit(train.x_m2, train.y, eval_set=(val.x_m2, val.y))
        from xmkd.losses import KDConfig, kd_baseline_loss

        logits = torch.tensor(base.decision_function(train.x_m2))
        loss = kd_baseline_loss(logits, logits.clone(), torch.tensor(train.y), KDConfig(alpha=0.0))
        assert loss.item() == pytest.approx(0.0, abs=1e-6)

    def test_class_count_mismatch_rejected(self, small_data, teacher):
        train, _, _ = small_data
        est = DistilledClassifier(teacher=teacher, student_modality="m2", n_classes=7, epochs=1)
        with pytest.raises(ConfigError, match="classes"):
            est.fit(_pairs(train), train.y)

    def test_missing_teacher_rejected(self, small_data):
        train, _, _ = small_data
        est = DistilledClassifier(teacher=None, epochs=1)
        with pytest.raises(ConfigError, match="teacher"):
            est.fit(_pairs(train), train.y)


class TestAugmentedTraining:
    def test_image_mode_with_augmentation_runs(self):
        ds = to_image_layout(generate(SynthConfig(n_samples=60, seed=2)))
        spec = AugmentSpec(enable_hflip=True, enable_vflip=True, enable_rot90=True, seed=0)
        est = NetClassifier(backbone="small_cnn", epochs=2, batch_size=16, augment=spec, random_state=0)
        est.fit(ds.x_m1, ds.y)
        assert est.predict(ds.x_m1).shape == (60,)

    def test_discom_on_images(self):
        ds = to_image_layout(generate(SynthConfig(n_samples=60, seed=2)))
        spec = AugmentSpec(enable_hflip=True, seed=0)
        est = DisComKDClassifier(backbone="small_cnn", embed_dim=8, epochs=1, batch_size=16, augment=spec)
        est.fit((ds.x_m1, ds.x_m2), ds.y)
        assert est.predict(ds.x_m1, 0).shape == (60,)
