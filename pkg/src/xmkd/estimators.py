"""Scikit-learn style estimators wrapping the torch training loops.

``DisComKDClassifier`` jointly trains both modality branches from paired
data and yields two independently deployable single-modal classifiers.
``NetClassifier`` is the plain supervised baseline (also used for
single-modality teachers), ``FusionTeacherClassifier`` the multi-modal
teacher, and ``DistilledClassifier`` the classic teacher/student pipeline.

All estimators follow sklearn conventions: hyper-parameters in ``__init__``
(so ``get_params``/``set_params``/``clone`` work), fitted state in
trailing-underscore attributes, ``fit`` returns ``self``. Paired inputs are
``(X_m1, X_m2)`` tuples; an optional ``eval_set`` fit argument enables
best-epoch selection by validation weighted F1.
"""

from __future__ import annotations

import numpy as np
import torch
from sklearn.base import BaseEstimator, ClassifierMixin

from .data import AugmentSpec, augment_images, augment_pairs, batch_index_plan
from .errors import ConfigError, NotFittedError, TrainingDivergedError
from .losses import Batch, KDConfig, LossOptions, cross_entropy, kd_baseline_loss, total_loss
from .metrics import weighted_f1
from .networks import (
    MODALITY_M1,
    MODALITY_M2,
    EncoderSpec,
    FusionNet,
    ModelBundle,
    SingleNet,
    init_params,
)
from .validation import check_labels, check_observations, check_paired, check_same_length

MODALITY_NAMES = ("m1", "m2")

__all__ = [
    "SingleModalClassifier",
    "DisComKDClassifier",
    "NetClassifier",
    "FusionTeacherClassifier",
    "DistilledClassifier",
]


def _tensor(x: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(np.ascontiguousarray(x))


def _fit_batches(n: int, batch_size: int, shuffle_seed: int, epoch: int) -> list[np.ndarray]:
    """Epoch batching for training; folds a trailing singleton into its
    neighbour because batch statistics are undefined on one sample."""
    plan = batch_index_plan(n, batch_size, shuffle_seed, epoch)
    if len(plan) > 1 and plan[-1].shape[0] == 1:
        plan[-2:] = [np.concatenate(plan[-2:])]
    return plan


def _label_tensor(y: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(np.ascontiguousarray(y.astype(np.int64)))


def _net_logits(net: torch.nn.Module, *arrays: np.ndarray, chunk: int = 1024) -> np.ndarray:
    """Run a net over numpy inputs in eval mode, without gradients."""
    net.eval()
    outs = []
    n = arrays[0].shape[0]
    with torch.no_grad():
        for lo in range(0, n, chunk):
            parts = [_tensor(a[lo : lo + chunk]) for a in arrays]
            outs.append(net(*parts).numpy())
    return np.concatenate(outs, axis=0)


def _snapshot(module: torch.nn.Module) -> dict:
    return {k: v.detach().clone() for k, v in module.state_dict().items()}


def _resolve_classes(y: np.ndarray, n_classes: int | None) -> int:
    c = int(n_classes) if n_classes is not None else int(y.max()) + 1
    if c < 2:
        raise ConfigError(f"need at least 2 classes, inferred {c}")
    return c


def _check_fitted(est, attr: str) -> None:
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} must be fitted before use")


class SingleModalClassifier:
    """Fitted single-modality predictor (one branch or net plus its head).

    Produced by training; not configured directly. Exposes the usual sklearn
    prediction surface over a plain array of its own modality.
    """

    def __init__(self, net: torch.nn.Module, classes: np.ndarray):
        self.net = net.eval()
        self.classes_ = np.asarray(classes)

    def decision_function(self, X) -> np.ndarray:
        x = check_observations(X)
        return _net_logits(self.net, x)

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X).argmax(axis=1)

    def predict_proba(self, X) -> np.ndarray:
        logits = self.decision_function(X)
        return torch.softmax(torch.from_numpy(logits), dim=1).numpy()

    def score(self, X, y) -> float:
        y = check_labels(y, len(self.classes_))
        return float((self.predict(X) == y).mean())


def _unpack_eval_pair(eval_set):
    if eval_set is None:
        return None
    (xv, yv) = eval_set
    vx1, vx2 = check_paired(xv)
    return vx1, vx2, np.asarray(yv)


class DisComKDClassifier(ClassifierMixin, BaseEstimator):
    """Joint disentanglement trainer over paired two-modality data.

    ``fit`` optimizes both branch extractors, both task heads and the four
    shared auxiliary heads with a single optimizer. After fitting,
    ``models_`` holds one :class:`SingleModalClassifier` per modality
    (best-validation parameters when an ``eval_set`` is given), and
    ``bundle_`` keeps the final joint model for inspection.
    """

    def __init__(
        self,
        n_classes: int | None = None,
        backbone: str = "mlp",
        embed_dim: int = 16,
        hidden_dim: int = 64,
        task_input: str = "both",
        epochs: int = 30,
        batch_size: int = 64,
        lr: float = 1e-3,
        grl_lambda: float = 1.0,
        orth_mode: str = "raw",
        disabled_terms: tuple = (),
        term_weights: dict | None = None,
        augment: AugmentSpec | None = None,
        random_state: int = 0,
    ):
        self.n_classes = n_classes
        self.backbone = backbone
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.task_input = task_input
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.grl_lambda = grl_lambda
        self.orth_mode = orth_mode
        self.disabled_terms = disabled_terms
        self.term_weights = term_weights
        self.augment = augment
        self.random_state = random_state

    def _loss_options(self) -> LossOptions:
        unknown = set(self.disabled_terms) - {"adv", "mod", "aux", "orth"}
        if unknown:
            raise ConfigError(f"cannot disable unknown loss terms: {sorted(unknown)}")
        weights = dict(self.term_weights or {})
        unknown_w = set(weights) - {"cl", "adv", "mod", "aux", "orth"}
        if unknown_w:
            raise ConfigError(f"unknown loss-term weights: {sorted(unknown_w)}")
        return LossOptions(
            orth_mode=self.orth_mode,
            grl_lambda=self.grl_lambda,
            enable_adv="adv" not in self.disabled_terms,
            enable_mod="mod" not in self.disabled_terms,
            enable_aux="aux" not in self.disabled_terms,
            enable_orth="orth" not in self.disabled_terms,
            weight_cl=weights.get("cl", 1.0),
            weight_adv=weights.get("adv", 1.0),
            weight_mod=weights.get("mod", 1.0),
            weight_aux=weights.get("aux", 1.0),
            weight_orth=weights.get("orth", 1.0),
        )

    def fit(self, X, y, eval_set=None):
        x1, x2 = check_paired(X)
        y = check_labels(y)
        check_same_length("X", x1, "y", y)
        c = _resolve_classes(y, self.n_classes)
        y = check_labels(y, c)
        val = _unpack_eval_pair(eval_set)
        if val is not None:
            val = (val[0], val[1], check_labels(val[2], c, "y_val"))

        spec1 = EncoderSpec(self.backbone, tuple(x1.shape[1:]), self.embed_dim, self.hidden_dim)
        spec2 = EncoderSpec(self.backbone, tuple(x2.shape[1:]), self.embed_dim, self.hidden_dim)
        bundle = ModelBundle(spec1, spec2, c, grl_lambda=self.grl_lambda, task_input=self.task_input)
        init_params(bundle, self.random_state)
        options = self._loss_options()
        opt = torch.optim.Adam(bundle.parameters(), lr=self.lr)

        augmenting = self.augment is not None and self.augment.any_enabled
        n = x1.shape[0]
        history: list[dict] = []
        best: list[tuple[float, dict | None]] = [(-1.0, None), (-1.0, None)]

        for epoch in range(self.epochs):
            bundle.train()
            if augmenting:
                aug_rng = np.random.default_rng([self.augment.seed, epoch])
            sums = dict.fromkeys(("cl", "adv", "mod", "aux", "orth", "total"), 0.0)
            for idx in _fit_batches(n, self.batch_size, self.random_state, epoch):
                xb1, xb2 = x1[idx], x2[idx]
                if augmenting:
                    xb1, xb2 = augment_pairs(xb1, xb2, self.augment, aug_rng)
                batch = Batch(_tensor(xb1), _tensor(xb2), _label_tensor(y[idx]))
                try:
                    loss, report = total_loss(bundle, batch, options)
                except TrainingDivergedError as err:
                    raise TrainingDivergedError(err.term, epoch) from None
                opt.zero_grad()
                loss.backward()
                opt.step()
                w = len(idx) / n
                for name, val_ in (
                    ("cl", report.cl),
                    ("adv", report.adv),
                    ("mod", report.mod),
                    ("aux", report.aux),
                    ("orth", report.orth),
                    ("total", report.total),
                ):
                    sums[name] += w * val_
            row = {"epoch": epoch, **{f"loss_{k}": sums[k] for k in ("cl", "adv", "mod", "aux", "orth", "total")}}
            if val is not None:
                for m, vx in ((MODALITY_M1, val[0]), (MODALITY_M2, val[1])):
                    f1 = self._val_f1(bundle, m, vx, val[2], c)
                    row[f"val_f1_{MODALITY_NAMES[m]}"] = f1
                    if f1 > best[m][0]:
                        best[m] = (
                            f1,
                            {
                                "branch": _snapshot(bundle.branch(m)),
                                "head": _snapshot(bundle.task_head(m)),
                            },
                        )
            history.append(row)

        bundle.eval()
        self.classes_ = np.arange(c)
        self.n_classes_ = c
        self.bundle_ = bundle
        self.history_ = history
        models = []
        for m in (MODALITY_M1, MODALITY_M2):
            net = bundle.export_single(m)
            if best[m][1] is not None:
                net.branch.load_state_dict(best[m][1]["branch"])
                net.head.load_state_dict(best[m][1]["head"])
            models.append(SingleModalClassifier(net, self.classes_))
        self.models_ = models
        return self

    @staticmethod
    def _val_f1(bundle: ModelBundle, modality: int, vx: np.ndarray, vy: np.ndarray, c: int) -> float:
        bundle.eval()
        preds = []
        with torch.no_grad():
            for lo in range(0, vx.shape[0], 1024):
                t = bundle.embed(_tensor(vx[lo : lo + 1024]), modality)
                preds.append(bundle.task_logits_for(modality, t).argmax(dim=1).numpy())
        bundle.train()
        return weighted_f1(np.concatenate(preds), vy, c)

    def predict(self, X, modality: int = MODALITY_M1) -> np.ndarray:
        _check_fitted(self, "models_")
        return self.models_[modality].predict(X)

    def decision_function(self, X, modality: int = MODALITY_M1) -> np.ndarray:
        _check_fitted(self, "models_")
        return self.models_[modality].decision_function(X)

    def embed(self, X, modality: int = MODALITY_M1):
        """Final-model embeddings (z_inv, z_inf, z_irr) as numpy arrays."""
        _check_fitted(self, "bundle_")
        x = check_observations(X)
        self.bundle_.eval()
        with torch.no_grad():
            t = self.bundle_.embed(_tensor(x), modality)
        return t.z_inv.numpy(), t.z_inf.numpy(), t.z_irr.numpy()

    def disentanglement_report(self, X) -> dict:
        """Probe how well the auxiliary heads separate the final embeddings.

        Returns modality-prediction accuracies of the adversarial head on
        z_inv and of the modality heads on z_inf / z_irr, plus mean absolute
        cosines between (z_inv, z_inf) and (z_inf, z_irr).
        """
        _check_fitted(self, "bundle_")
        x1, x2 = check_paired(X)
        self.bundle_.eval()
        with torch.no_grad():
            t1 = self.bundle_.embed(_tensor(x1), MODALITY_M1)
            t2 = self.bundle_.embed(_tensor(x2), MODALITY_M2)

            def head_acc(head, z1, z2):
                p1 = head(z1).argmax(dim=1)
                p2 = head(z2).argmax(dim=1)
                correct = (p1 == MODALITY_M1).sum() + (p2 == MODALITY_M2).sum()
                return float(correct) / (len(p1) + len(p2))

            def mean_abs_cos(a1, b1, a2, b2):
                vals = []
                for a, b in ((a1, b1), (a2, b2)):
                    c = torch.nn.functional.cosine_similarity(a, b, dim=1)
                    vals.append(c.abs().mean())
                return float(torch.stack(vals).mean())

            return {
                "adv_acc_on_inv": head_acc(self.bundle_.cl_adv, t1.z_inv, t2.z_inv),
                "mod_acc_on_inf": head_acc(self.bundle_.cl_m_inf, t1.z_inf, t2.z_inf),
                "mod_acc_on_irr": head_acc(self.bundle_.cl_m_irr, t1.z_irr, t2.z_irr),
                "mean_abs_cos_inv_inf": mean_abs_cos(t1.z_inv, t1.z_inf, t2.z_inv, t2.z_inf),
                "mean_abs_cos_inf_irr": mean_abs_cos(t1.z_inf, t1.z_irr, t2.z_inf, t2.z_irr),
            }


class NetClassifier(ClassifierMixin, BaseEstimator):
    """Plain cross-entropy classifier on a single modality.

    Serves as the undistilled student baseline and as the single-modality
    teacher.
    """

    def __init__(
        self,
        n_classes: int | None = None,
        backbone: str = "mlp",
        hidden_dim: int = 64,
        feature_dim: int = 32,
        epochs: int = 30,
        batch_size: int = 64,
        lr: float = 1e-3,
        augment: AugmentSpec | None = None,
        random_state: int = 0,
    ):
        self.n_classes = n_classes
        self.backbone = backbone
        self.hidden_dim = hidden_dim
        self.feature_dim = feature_dim
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.augment = augment
        self.random_state = random_state

    def _build_net(self, input_shape: tuple[int, ...], c: int) -> SingleNet:
        spec = EncoderSpec(self.backbone, input_shape, max(1, self.feature_dim // 2), self.hidden_dim)
        return SingleNet(spec, c, feature_width=self.feature_dim)

    def fit(self, X, y, eval_set=None):
        x = check_observations(X)
        y = check_labels(y)
        check_same_length("X", x, "y", y)
        c = _resolve_classes(y, self.n_classes)
        y = check_labels(y, c)
        val = None
        if eval_set is not None:
            vx, vy = eval_set
            val = (check_observations(vx, "X_val"), check_labels(np.asarray(vy), c, "y_val"))

        net = self._build_net(tuple(x.shape[1:]), c)
        init_params(net, self.random_state)
        opt = torch.optim.Adam(net.parameters(), lr=self.lr)
        augmenting = self.augment is not None and self.augment.any_enabled
        n = x.shape[0]
        history = []
        best: tuple[float, dict | None] = (-1.0, None)

        for epoch in range(self.epochs):
            net.train()
            if augmenting:
                aug_rng = np.random.default_rng([self.augment.seed, epoch])
            loss_sum = 0.0
            for idx in _fit_batches(n, self.batch_size, self.random_state, epoch):
                xb = x[idx]
                if augmenting:
                    xb = augment_images(xb, self.augment, aug_rng)
                logits = net(_tensor(xb))
                loss = cross_entropy(logits, _label_tensor(y[idx]))
                if not torch.isfinite(loss):
                    raise TrainingDivergedError("cl", epoch)
                opt.zero_grad()
                loss.backward()
                opt.step()
                loss_sum += float(loss.detach()) * len(idx) / n
            row = {"epoch": epoch, "loss": loss_sum}
            if val is not None:
                preds = _net_logits(net, val[0]).argmax(axis=1)
                f1 = weighted_f1(preds, val[1], c)
                row["val_f1"] = f1
                if f1 > best[0]:
                    best = (f1, _snapshot(net))
                net.train()
            history.append(row)

        if best[1] is not None:
            net.load_state_dict(best[1])
        net.eval()
        self.classes_ = np.arange(c)
        self.n_classes_ = c
        self.net_ = net
        self.history_ = history
        return self

    def decision_function(self, X) -> np.ndarray:
        _check_fitted(self, "net_")
        return _net_logits(self.net_, check_observations(X))

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X).argmax(axis=1)

    def predict_proba(self, X) -> np.ndarray:
        return torch.softmax(torch.from_numpy(self.decision_function(X)), dim=1).numpy()


class FusionTeacherClassifier(ClassifierMixin, BaseEstimator):
    """Multi-modal teacher: per-modality encoders fused by feature addition."""

    def __init__(
        self,
        n_classes: int | None = None,
        backbone: str = "mlp",
        hidden_dim: int = 64,
        feature_dim: int = 32,
        epochs: int = 30,
        batch_size: int = 64,
        lr: float = 1e-3,
        augment: AugmentSpec | None = None,
        random_state: int = 0,
    ):
        self.n_classes = n_classes
        self.backbone = backbone
        self.hidden_dim = hidden_dim
        self.feature_dim = feature_dim
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.augment = augment
        self.random_state = random_state

    def fit(self, X, y, eval_set=None):
        x1, x2 = check_paired(X)
        y = check_labels(y)
        check_same_length("X", x1, "y", y)
        c = _resolve_classes(y, self.n_classes)
        y = check_labels(y, c)
        val = _unpack_eval_pair(eval_set)
        if val is not None:
            val = (val[0], val[1], check_labels(val[2], c, "y_val"))

        emb = max(1, self.feature_dim // 2)
        spec1 = EncoderSpec(self.backbone, tuple(x1.shape[1:]), emb, self.hidden_dim)
        spec2 = EncoderSpec(self.backbone, tuple(x2.shape[1:]), emb, self.hidden_dim)
        net = FusionNet(spec1, spec2, c, feature_width=self.feature_dim)
        init_params(net, self.random_state)
        opt = torch.optim.Adam(net.parameters(), lr=self.lr)
        augmenting = self.augment is not None and self.augment.any_enabled
        n = x1.shape[0]
        history = []
        best: tuple[float, dict | None] = (-1.0, None)

        for epoch in range(self.epochs):
            net.train()
            if augmenting:
                aug_rng = np.random.default_rng([self.augment.seed, epoch])
            loss_sum = 0.0
            for idx in _fit_batches(n, self.batch_size, self.random_state, epoch):
                xb1, xb2 = x1[idx], x2[idx]
                if augmenting:
                    xb1, xb2 = augment_pairs(xb1, xb2, self.augment, aug_rng)
                loss = cross_entropy(net(_tensor(xb1), _tensor(xb2)), _label_tensor(y[idx]))
                if not torch.isfinite(loss):
                    raise TrainingDivergedError("cl", epoch)
                opt.zero_grad()
                loss.backward()
                opt.step()
                loss_sum += float(loss.detach()) * len(idx) / n
            row = {"epoch": epoch, "loss": loss_sum}
            if val is not None:
                preds = _net_logits(net, val[0], val[1]).argmax(axis=1)
                f1 = weighted_f1(preds, val[2], c)
                row["val_f1"] = f1
                if f1 > best[0]:
                    best = (f1, _snapshot(net))
                net.train()
            history.append(row)

        if best[1] is not None:
            net.load_state_dict(best[1])
        net.eval()
        self.classes_ = np.arange(c)
        self.n_classes_ = c
        self.net_ = net
        self.history_ = history
        return self

    def decision_function(self, X) -> np.ndarray:
        _check_fitted(self, "net_")
        x1, x2 = check_paired(X)
        return _net_logits(self.net_, x1, x2)

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X).argmax(axis=1)


class DistilledClassifier(ClassifierMixin, BaseEstimator):
    """Single-modal student distilled from a frozen, already-fitted teacher.

    ``teacher_inputs`` selects what the teacher consumes from each paired
    batch ("m1", "m2" or "both"); the student always trains on
    ``student_modality``. The teacher is only ever queried through its
    prediction surface, so its parameters cannot change.
    """

    def __init__(
        self,
        teacher=None,
        teacher_inputs: str = "both",
        student_modality: str = "m2",
        alpha: float = 0.5,
        temperature: float = 4.0,
        use_lskd: bool = False,
        n_classes: int | None = None,
        backbone: str = "mlp",
        hidden_dim: int = 64,
        feature_dim: int = 32,
        epochs: int = 30,
        batch_size: int = 64,
        lr: float = 1e-3,
        augment: AugmentSpec | None = None,
        random_state: int = 0,
    ):
        self.teacher = teacher
        self.teacher_inputs = teacher_inputs
        self.student_modality = student_modality
        self.alpha = alpha
        self.temperature = temperature
        self.use_lskd = use_lskd
        self.n_classes = n_classes
        self.backbone = backbone
        self.hidden_dim = hidden_dim
        self.feature_dim = feature_dim
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.augment = augment
        self.random_state = random_state

    def _teacher_logits(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        if self.teacher_inputs == "both":
            return self.teacher.decision_function((x1, x2))
        if self.teacher_inputs == "m1":
            return self.teacher.decision_function(x1)
        if self.teacher_inputs == "m2":
            return self.teacher.decision_function(x2)
        raise ConfigError(f"teacher_inputs must be 'm1', 'm2' or 'both', got {self.teacher_inputs!r}")

    def fit(self, X, y, eval_set=None):
        if self.teacher is None or not hasattr(self.teacher, "decision_function"):
            raise ConfigError("a fitted teacher with a decision_function is required")
        if self.student_modality not in MODALITY_NAMES:
            raise ConfigError(f"student_modality must be 'm1' or 'm2', got {self.student_modality!r}")
        kd_cfg = KDConfig(alpha=self.alpha, temperature=self.temperature, use_lskd=self.use_lskd)
        kd_cfg.validate()

        x1, x2 = check_paired(X)
        y = check_labels(y)
        check_same_length("X", x1, "y", y)
        c = _resolve_classes(y, self.n_classes)
        teacher_c = len(getattr(self.teacher, "classes_", [])) or c
        if teacher_c != c:
            raise ConfigError(f"teacher predicts {teacher_c} classes but student expects {c}")
        y = check_labels(y, c)
        val = _unpack_eval_pair(eval_set)
        if val is not None:
            val = (val[0], val[1], check_labels(val[2], c, "y_val"))

        s_idx = MODALITY_NAMES.index(self.student_modality)
        xs = (x1, x2)[s_idx]
        spec = EncoderSpec(self.backbone, tuple(xs.shape[1:]), max(1, self.feature_dim // 2), self.hidden_dim)
        net = SingleNet(spec, c, feature_width=self.feature_dim)
        init_params(net, self.random_state)
        opt = torch.optim.Adam(net.parameters(), lr=self.lr)
        augmenting = self.augment is not None and self.augment.any_enabled
        n = x1.shape[0]
        history = []
        best: tuple[float, dict | None] = (-1.0, None)

        for epoch in range(self.epochs):
            net.train()
            if augmenting:
                aug_rng = np.random.default_rng([self.augment.seed, epoch])
            loss_sum = 0.0
            for idx in _fit_batches(n, self.batch_size, self.random_state, epoch):
                xb1, xb2 = x1[idx], x2[idx]
                if augmenting:
                    xb1, xb2 = augment_pairs(xb1, xb2, self.augment, aug_rng)
                t_logits = torch.from_numpy(
                    np.asarray(self._teacher_logits(xb1, xb2), dtype=np.float32)
                )
                s_logits = net(_tensor((xb1, xb2)[s_idx]))
                loss = kd_baseline_loss(s_logits, t_logits, _label_tensor(y[idx]), kd_cfg)
                if not torch.isfinite(loss):
                    raise TrainingDivergedError("kd", epoch)
                opt.zero_grad()
                loss.backward()
                opt.step()
                loss_sum += float(loss.detach()) * len(idx) / n
            row = {"epoch": epoch, "loss": loss_sum}
            if val is not None:
                preds = _net_logits(net, (val[0], val[1])[s_idx]).argmax(axis=1)
                f1 = weighted_f1(preds, val[2], c)
                row["val_f1"] = f1
                if f1 > best[0]:
                    best = (f1, _snapshot(net))
                net.train()
            history.append(row)

        if best[1] is not None:
            net.load_state_dict(best[1])
        net.eval()
        self.classes_ = np.arange(c)
        self.n_classes_ = c
        self.net_ = net
        self.history_ = history
        return self

    def decision_function(self, X) -> np.ndarray:
        _check_fitted(self, "net_")
        return _net_logits(self.net_, check_observations(X))

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X).argmax(axis=1)
