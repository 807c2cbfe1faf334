import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_weighted_f1
from xmkd.errors import DataError, DimensionError
from xmkd.metrics import confusion_matrix, evaluate_predictions, per_class_prf, weighted_f1


class TestWeightedF1:
    def test_perfect_predictions(self):
        labels = np.array([0, 1, 2, 2, 1, 0, 2])
        assert weighted_f1(labels, labels, 3) == 1.0

    def test_hand_computed_binary_case(self):
        labels = [0, 0, 0, 1]
        preds = [0, 0, 1, 1]
        # class0: P=1, R=2/3, F1=0.8; class1: P=0.5, R=1, F1=2/3
        expected = 0.75 * 0.8 + 0.25 * (2 / 3)
        assert weighted_f1(preds, labels, 2) == pytest.approx(expected, abs=1e-12)

    def test_matches_brute_force_on_random_instances(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            c = int(rng.integers(2, 8))
            n = int(rng.integers(1, 60))
            labels = rng.integers(0, c, n)
            preds = rng.integers(0, c, n)
            ours = weighted_f1(preds, labels, c)
            oracle = brute_force_weighted_f1(preds, labels, c)
            assert ours == pytest.approx(oracle, abs=1e-12)

    def test_label_out_of_range(self):
        with pytest.raises(IndexError):
            weighted_f1([0, 1], [0, 2], 2)
        with pytest.raises(IndexError):
            weighted_f1([0, -1], [0, 1], 2)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**16), c=st.integers(2, 6), n=st.integers(1, 100))
    def test_bounded_and_one_iff_diagonal(self, seed, c, n):
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, c, n)
        preds = rng.integers(0, c, n)
        score = weighted_f1(preds, labels, c)
        assert 0.0 <= score <= 1.0
        conf = confusion_matrix(labels, preds, c)
        diagonal = conf.sum() == np.trace(conf)
        assert (score == 1.0) == diagonal


class TestConfusion:
    def test_entries_sum_to_samples(self):
        conf = confusion_matrix([0, 1, 1, 2], [0, 1, 2, 2], 3)
        assert conf.sum() == 4
        assert conf[1, 2] == 1

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            confusion_matrix([], [], 3)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            confusion_matrix([0, 1], [0], 2)

    def test_prf_zero_division_convention(self):
        # class 2 never predicted, never true: P = R = F1 = 0
        conf = confusion_matrix([0, 0, 1], [0, 1, 1], 3)
        p, r, f1 = per_class_prf(conf)
        assert p[2] == r[2] == f1[2] == 0.0


class TestEvaluatePredictions:
    def test_constant_model_balanced_four_classes(self):
        labels = np.repeat(np.arange(4), 25)
        preds = np.zeros(100, dtype=int)
        rec = evaluate_predictions(preds, labels, 4)
        # predicted class: P=0.25, R=1, F1=0.4 weighted by support 0.25
        assert rec.weighted_f1 == pytest.approx(0.1, abs=1e-12)
        assert rec.accuracy == pytest.approx(0.25)

    def test_confusion_diag_sum_is_accuracy(self):
        rng = np.random.default_rng(1)
        labels = rng.integers(0, 3, 60)
        preds = rng.integers(0, 3, 60)
        rec = evaluate_predictions(preds, labels, 3)
        conf = np.array(rec.confusion)
        assert rec.accuracy == pytest.approx(np.trace(conf) / conf.sum())
        assert conf.sum() == rec.n_samples

    def test_record_recomputable(self):
        rng = np.random.default_rng(2)
        labels = rng.integers(0, 4, 80)
        preds = rng.integers(0, 4, 80)
        rec = evaluate_predictions(preds, labels, 4)
        support = np.array(rec.confusion).sum(axis=1)
        rebuilt = float((support / support.sum() * np.array(rec.per_class_f1)).sum())
        assert rec.weighted_f1 == pytest.approx(rebuilt, abs=1e-12)

    def test_determinism(self):
        labels = [0, 1, 2, 1]
        preds = [0, 2, 2, 1]
        a = evaluate_predictions(preds, labels, 3)
        b = evaluate_predictions(preds, labels, 3)
        assert a == b
