"""Training schedules, alignment fine-tuning and the gradient checker.

All training here is single-threaded and fully deterministic: every
random draw comes from a generator derived from (seed, stream tag), so
identical inputs and configs produce bit-identical serialized models.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field

import numpy as np

from . import backprop
from .backprop import (
    alignment_batch,
    contrastive_batch,
    embed,
    init_params,
    nli_batch,
    regression_batch,
)
from .errors import ConfigError, ModelCorruptionError, ModelFormatError
from .features import FeaturizerConfig, featurize_all, fnv1a_64
from .model import TASKS, EncoderConfig, EncoderModel, model_from_bytes, model_to_bytes
from .optim import Adam
from .stats import pearson
from .validation import as_nli_data, as_pair_scores, as_text_pairs

__all__ = [
    "TrainConfig",
    "ContrastiveConfig",
    "AlignmentReport",
    "FeatureStackModel",
    "GradCheckReport",
    "multitask_train",
    "train_filtration",
    "align_encoders",
    "train_feature_stack",
    "feature_predict",
    "save_feature_model",
    "load_feature_model",
    "grad_check",
    "history_to_csv",
]

logger = logging.getLogger(__name__)

# stream tags: one independent generator per source of randomness
_TAG_INIT = 0
_TAG_STREAM = {"qe": 1, "sts": 2, "nli": 3}
_TAG_FILTER = 4
_TAG_ALIGN_SPLIT = 5
_TAG_ALIGN = 6
_TAG_FEATURE = 7
_TAG_GRADCHECK = 8

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([seed & _MASK64, tag])


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and schedule settings shared by all training entry points."""

    epochs: int = 3
    finetune_epochs: int = 1
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    tasks: tuple = ("qe", "sts", "nli")
    seed: int = 42
    until_convergence: bool = False
    patience: int = 3
    max_epochs: int = 50

    def __post_init__(self):
        tasks = tuple(t for t in TASKS if t in self.tasks)
        if not tasks or len(tasks) != len(set(self.tasks)):
            raise ValueError(f"tasks must be a non-empty subset of {TASKS}")
        object.__setattr__(self, "tasks", tasks)
        if self.epochs < 0 or self.finetune_epochs < 0:
            raise ValueError("epoch counts must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.patience < 1 or self.max_epochs < 1:
            raise ValueError("patience and max_epochs must be >= 1")


@dataclass(frozen=True)
class ContrastiveConfig:
    """Margin for the contrastive objective (cosine is bounded by 1)."""

    margin: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.margin <= 1.0:
            raise ValueError(f"margin must lie in (0,1], got {self.margin}")


@dataclass
class AlignmentReport:
    """Mean held-out cosine before/after alignment fine-tuning."""

    cosine_before: float
    cosine_after: float
    heldout_size: int


@dataclass(frozen=True)
class FeatureStackModel:
    """Three frozen backbones plus a two-layer quality head over their pair features."""

    sts_backbone: EncoderModel
    nli_backbone: EncoderModel
    qe_backbone: EncoderModel
    hidden_w: np.ndarray
    hidden_b: np.ndarray
    out_w: np.ndarray
    out_b: np.ndarray

    def __post_init__(self):
        for name in ("hidden_w", "hidden_b", "out_w", "out_b"):
            array = np.ascontiguousarray(np.asarray(getattr(self, name)), dtype=np.float32)
            object.__setattr__(self, name, array)


class _BatchStream:
    """Endless batch index iterator; reshuffles whenever the pass completes."""

    def __init__(self, size: int, batch_size: int, rng: np.random.Generator):
        self.size = size
        self.batch_size = batch_size
        self.rng = rng
        self._order = None
        self._pos = 0

    @property
    def batches_per_pass(self) -> int:
        return -(-self.size // self.batch_size)

    def next_batch(self) -> np.ndarray:
        if self._order is None or self._pos >= self.size:
            self._order = self.rng.permutation(self.size)
            self._pos = 0
        batch = self._order[self._pos : self._pos + self.batch_size]
        self._pos += self.batch_size
        return batch


def _featurized_pairs(texts_a, texts_b, featurizer):
    return featurize_all(texts_a, featurizer), featurize_all(texts_b, featurizer)


def _prepare_task(task, data, featurizer):
    if task == "nli":
        a, b, y = as_nli_data(data)
    else:
        a, b, y = as_pair_scores(data)
    Xa, Xb = _featurized_pairs(a, b, featurizer)
    return Xa, Xb, y


def _task_step(task, params, Xa, Xb, y, idx):
    if task == "nli":
        return nli_batch(params, Xa[idx], Xb[idx], y[idx])
    return regression_batch(params, task, Xa[idx], Xb[idx], y[idx])


def multitask_train(qe=None, sts=None, nli=None, config: TrainConfig = TrainConfig(),
                    encoder: EncoderConfig = EncoderConfig(), validation=None):
    """Two-phase training: interleaved multitask epochs, then QE-only fine-tuning.

    Phase 1 runs ``config.epochs`` epochs (or until validation Pearson
    stops improving when ``until_convergence`` is set).  Within an epoch,
    batches from the enabled tasks are interleaved round-robin; the
    largest enabled dataset defines the epoch and shorter ones are
    reshuffled and recycled.  Phase 2 runs ``finetune_epochs`` epochs on
    QE only, updating the backbone and QE head; the STS and NLI heads
    are untouched.

    Returns (EncoderModel, HeadSet, history) where history is a list of
    ``{"epoch", "task", "mean_loss"}`` rows.
    """
    raw = {"qe": qe, "sts": sts, "nli": nli}
    for task in config.tasks:
        if not raw[task]:
            raise ConfigError(f"task {task!r} is enabled but its dataset is empty")
    if config.finetune_epochs > 0 and not raw["qe"]:
        raise ConfigError("fine-tuning requires a QE dataset")
    if config.until_convergence and validation is None:
        raise ConfigError("until_convergence training requires a validation set")

    featurizer = encoder.featurizer
    data = {}
    streams = {}
    for task in TASKS:
        if raw[task]:
            data[task] = _prepare_task(task, raw[task], featurizer)
            streams[task] = _BatchStream(
                len(data[task][2]), config.batch_size, _rng(config.seed, _TAG_STREAM[task])
            )

    params = init_params(encoder, _rng(config.seed, _TAG_INIT))
    adam = Adam(config.learning_rate, config.beta1, config.beta2, config.adam_eps)
    history = []

    if validation is not None:
        va, vb, vy = as_pair_scores(validation)
        vXa, vXb = _featurized_pairs(va, vb, featurizer)

    def run_epoch(epoch, tasks):
        sums = {t: 0.0 for t in tasks}
        counts = {t: 0 for t in tasks}
        slots = max(streams[t].batches_per_pass for t in tasks)
        for _ in range(slots):
            for task in tasks:
                idx = streams[task].next_batch()
                Xa, Xb, y = data[task]
                losses, grads = _task_step(task, params, Xa, Xb, y, idx)
                adam.step(params, grads)
                sums[task] += float(losses.sum())
                counts[task] += len(losses)
        for task in tasks:
            history.append(
                {"epoch": epoch, "task": task, "mean_loss": sums[task] / counts[task]}
            )

    def validation_pearson():
        pred = backprop.predict_regression(params, "qe", vXa, vXb)
        try:
            return pearson(pred, vy)
        except ValueError:
            return float("-inf")

    epoch = 0
    if config.until_convergence:
        best_score = float("-inf")
        best_params = {k: v.copy() for k, v in params.items()}
        wait = 0
        while epoch < config.max_epochs:
            epoch += 1
            run_epoch(epoch, config.tasks)
            score = validation_pearson()
            if score > best_score:
                best_score = score
                best_params = {k: v.copy() for k, v in params.items()}
                wait = 0
            else:
                wait += 1
                if wait >= config.patience:
                    break
        params.update(best_params)
        adam = Adam(config.learning_rate, config.beta1, config.beta2, config.adam_eps)
    else:
        for _ in range(config.epochs):
            epoch += 1
            run_epoch(epoch, config.tasks)

    for _ in range(config.finetune_epochs):
        epoch += 1
        run_epoch(epoch, ("qe",))

    model = backprop.model_from_params(params, featurizer)
    heads = backprop.heads_from_params(params)
    return model, heads, history


def train_filtration(positives, negatives, config: TrainConfig = TrainConfig(),
                     contrastive: ContrastiveConfig = ContrastiveConfig(),
                     encoder: EncoderConfig = EncoderConfig()):
    """Train a fresh sentence encoder contrastively on matched/mismatched pairs.

    Positives carry label 1 (pushed toward the margin), negatives label 0
    (pushed toward zero cosine).  Returns (EncoderModel, history).
    """
    pos = as_text_pairs(positives)
    neg = as_text_pairs(negatives)
    if not pos or not neg:
        raise ConfigError("filtration training needs non-empty positive and negative sets")
    texts_a = [p[0] for p in pos] + [p[0] for p in neg]
    texts_b = [p[1] for p in pos] + [p[1] for p in neg]
    y = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])

    featurizer = encoder.featurizer
    Xa, Xb = _featurized_pairs(texts_a, texts_b, featurizer)
    params = init_params(encoder, _rng(config.seed, _TAG_INIT))
    adam = Adam(config.learning_rate, config.beta1, config.beta2, config.adam_eps)
    stream = _BatchStream(len(y), config.batch_size, _rng(config.seed, _TAG_FILTER))

    history = []
    for epoch in range(1, config.epochs + 1):
        total, count = 0.0, 0
        for _ in range(stream.batches_per_pass):
            idx = stream.next_batch()
            losses, grads = contrastive_batch(params, Xa[idx], Xb[idx], y[idx], contrastive.margin)
            adam.step(params, grads)
            total += float(losses.sum())
            count += len(losses)
        history.append({"epoch": epoch, "task": "contrastive", "mean_loss": total / count})

    return backprop.model_from_params(params, featurizer), history


def _mean_cosine(params, Xa, Xb) -> float:
    ua = embed(params, Xa)
    ub = embed(params, Xb)
    na = np.linalg.norm(ua, axis=1)
    nb = np.linalg.norm(ub, axis=1)
    denom = na * nb
    safe = denom > 0
    cos = np.where(safe, np.einsum("ij,ij->i", ua, ub) / np.where(safe, denom, 1.0), 0.0)
    return float(cos.mean())


def align_encoders(model: EncoderModel, parallel, config: TrainConfig = TrainConfig(),
                   heldout_fraction: float = 0.1):
    """Pull source-side embeddings toward their fixed English-side embeddings.

    The English (target) embeddings are computed once with the incoming
    model and held constant, so gradients only flow into the source
    side.  A held-out slice of the parallel set measures the mean
    source/target cosine before and after, both with the model being
    evaluated at that moment.

    Returns (EncoderModel, AlignmentReport).
    """
    pairs = parallel.pairs if hasattr(parallel, "pairs") else as_text_pairs(parallel)
    total = len(pairs)
    heldout_size = int(total * heldout_fraction)
    if heldout_size < 1:
        raise ConfigError(
            f"held-out fraction {heldout_fraction} of {total} pairs leaves no held-out pair"
        )
    perm = _rng(config.seed, _TAG_ALIGN_SPLIT).permutation(total)
    held, train = perm[:heldout_size], perm[heldout_size:]
    if len(train) == 0:
        raise ConfigError("no training pairs left after the held-out split")

    featurizer = model.featurizer
    Xs = featurize_all([p[0] for p in pairs], featurizer)
    Xt = featurize_all([p[1] for p in pairs], featurizer)
    params = backprop.params_from_model(model)

    before = _mean_cosine(params, Xs[held], Xt[held])
    targets = embed(params, Xt[train])

    adam = Adam(config.learning_rate, config.beta1, config.beta2, config.adam_eps)
    stream = _BatchStream(len(train), config.batch_size, _rng(config.seed, _TAG_ALIGN))
    Xs_train = Xs[train]
    for _ in range(config.epochs):
        for _ in range(stream.batches_per_pass):
            idx = stream.next_batch()
            _, grads = alignment_batch(params, Xs_train[idx], targets[idx])
            adam.step(params, grads)

    after = _mean_cosine(params, Xs[held], Xt[held])
    aligned = backprop.model_from_params(params, featurizer)
    return aligned, AlignmentReport(before, after, heldout_size)


def _stack_features(backbones, sources, targets) -> np.ndarray:
    blocks = []
    for backbone in backbones:
        p = backprop.params_from_model(backbone)
        Xa = featurize_all(sources, backbone.featurizer)
        Xb = featurize_all(targets, backbone.featurizer)
        ua = embed(p, Xa)
        ub = embed(p, Xb)
        feats, _ = backprop._reg_features_forward(ua, ub)
        blocks.append(feats)
    return np.concatenate(blocks, axis=1)


def _feature_head_forward(params, feats):
    hidden = np.tanh(feats @ params["h_w"].T + params["h_b"])
    z = hidden @ params["o_w"] + params["o_b"][0]
    return backprop._sigmoid(z), hidden


def train_feature_stack(sts_backbone, nli_backbone, qe_backbone, qe_data,
                          config: TrainConfig = TrainConfig(), hidden_units: int = 64):
    """Train the feature-extraction quality predictor over frozen backbones.

    Each pair is described by the concatenated pair features of the
    three backbones; only the two-layer head (tanh hidden layer,
    logistic output) is trained.  Returns (FeatureStackModel, history).
    """
    backbones = (sts_backbone, nli_backbone, qe_backbone)
    sources, targets, y = as_pair_scores(qe_data)
    feats = _stack_features(backbones, sources, targets)
    n, width = feats.shape

    rng = _rng(config.seed, _TAG_FEATURE)
    params = {
        "h_w": rng.normal(0.0, 1.0 / np.sqrt(width), size=(hidden_units, width)),
        "h_b": np.zeros(hidden_units),
        "o_w": np.zeros(hidden_units),
        "o_b": np.zeros(1),
    }
    adam = Adam(config.learning_rate, config.beta1, config.beta2, config.adam_eps)
    stream = _BatchStream(n, config.batch_size, _rng(config.seed, _TAG_FEATURE + 100))

    history = []
    for epoch in range(1, config.epochs + 1):
        total, count = 0.0, 0
        for _ in range(stream.batches_per_pass):
            idx = stream.next_batch()
            f = feats[idx]
            p, hidden = _feature_head_forward(params, f)
            diff = p - y[idx]
            dz = 2.0 * diff * p * (1.0 - p) / len(idx)
            d_hidden = np.outer(dz, params["o_w"]) * (1.0 - hidden * hidden)
            grads = {
                "o_w": hidden.T @ dz,
                "o_b": np.array([dz.sum()]),
                "h_w": d_hidden.T @ f,
                "h_b": d_hidden.sum(axis=0),
            }
            adam.step(params, grads)
            total += float((diff * diff).sum())
            count += len(idx)
        history.append({"epoch": epoch, "task": "qe-feature", "mean_loss": total / count})

    model = FeatureStackModel(sts_backbone, nli_backbone, qe_backbone,
                              params["h_w"], params["h_b"], params["o_w"], params["o_b"])
    return model, history


_FEATURE_MAGIC = b"QEF1"


def save_feature_model(model: FeatureStackModel, path) -> None:
    """Container file: three embedded encoder blobs plus the head arrays."""
    blob = bytearray()
    blob += _FEATURE_MAGIC
    blob += struct.pack("<H", 1)
    blob += struct.pack("<II", model.hidden_w.shape[0], model.hidden_w.shape[1])
    for backbone in (model.sts_backbone, model.nli_backbone, model.qe_backbone):
        encoded = model_to_bytes(backbone)
        blob += struct.pack("<Q", len(encoded))
        blob += encoded
    for array in (model.hidden_w, model.hidden_b, model.out_w, model.out_b):
        blob += np.ascontiguousarray(array, dtype="<f4").tobytes()
    blob += struct.pack("<Q", fnv1a_64(bytes(blob)))
    with open(path, "wb") as handle:
        handle.write(bytes(blob))


def load_feature_model(path) -> FeatureStackModel:
    with open(path, "rb") as handle:
        blob = handle.read()
    if blob[:4] != _FEATURE_MAGIC:
        raise ModelFormatError(f"{path}: bad magic bytes {blob[:4]!r}")
    if len(blob) < 22 or fnv1a_64(blob[:-8]) != struct.unpack("<Q", blob[-8:])[0]:
        raise ModelCorruptionError(f"{path}: checksum mismatch or truncated file")
    offset = 4
    (version,) = struct.unpack_from("<H", blob, offset)
    offset += 2
    if version != 1:
        raise ModelFormatError(f"{path}: unsupported version {version}")
    hidden, width = struct.unpack_from("<II", blob, offset)
    offset += 8
    backbones = []
    for _ in range(3):
        (size,) = struct.unpack_from("<Q", blob, offset)
        offset += 8
        encoder, _ = model_from_bytes(blob[offset : offset + size], path)
        backbones.append(encoder)
        offset += size
    arrays = []
    for shape in ((hidden, width), (hidden,), (hidden,), (1,)):
        count = int(np.prod(shape))
        arrays.append(
            np.frombuffer(blob[offset : offset + 4 * count], dtype="<f4").reshape(shape)
        )
        offset += 4 * count
    if offset + 8 != len(blob):
        raise ModelCorruptionError(f"{path}: unexpected trailing bytes")
    return FeatureStackModel(*backbones, *arrays)


def feature_predict(model: FeatureStackModel, pairs) -> np.ndarray:
    """Quality scores from a feature-extraction predictor."""
    pairs = as_text_pairs(pairs)
    backbones = (model.sts_backbone, model.nli_backbone, model.qe_backbone)
    feats = _stack_features(backbones, [p[0] for p in pairs], [p[1] for p in pairs])
    params = {
        "h_w": model.hidden_w.astype(np.float64),
        "h_b": model.hidden_b.astype(np.float64),
        "o_w": model.out_w.astype(np.float64),
        "o_b": model.out_b.astype(np.float64),
    }
    if feats.shape[1] != params["h_w"].shape[1]:
        raise ValueError(
            f"backbone pair features have width {feats.shape[1]}, head expects "
            f"{params['h_w'].shape[1]}"
        )
    return _feature_head_forward(params, feats)[0]


@dataclass
class GradCheckReport:
    """Per-block maximum relative error between analytic and numeric gradients.

    The relative error for a block is max |analytic - numeric| divided
    by the largest absolute entry of either gradient (floored at 1e-12).
    """

    loss_kind: str
    eps: float
    errors: dict = field(default_factory=dict)

    @property
    def max_error(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0

    def to_csv(self) -> str:
        lines = ["block,max_rel_error"]
        lines += [f"{name},{err!r}" for name, err in sorted(self.errors.items())]
        return "\n".join(lines) + "\n"


GRAD_CHECK_KINDS = ("qe-mse", "sts-mse", "nli-ce", "contrastive", "alignment")


def _random_texts(rng, count):
    words = []
    alphabet = "abcdefgh"
    texts = []
    for _ in range(count):
        n_words = int(rng.integers(2, 6))
        sent = []
        for _ in range(n_words):
            length = int(rng.integers(1, 7))
            sent.append("".join(alphabet[i] for i in rng.integers(0, len(alphabet), length)))
        texts.append(" ".join(sent))
    return texts


def grad_check(loss_kind: str, seed: int = 0, eps: float = 1e-4) -> GradCheckReport:
    """Compare analytic gradients of one loss against central finite differences.

    Uses a small random encoder with randomized heads.  Samples landing
    within 1e-3 of a non-differentiable point (the contrastive hinge or
    an |u-v| sign change) are resampled.
    """
    if loss_kind not in GRAD_CHECK_KINDS:
        raise ValueError(f"unknown loss kind {loss_kind!r}, expected one of {GRAD_CHECK_KINDS}")
    rng = _rng(seed, _TAG_GRADCHECK)
    encoder = EncoderConfig(FeaturizerConfig((1, 2, 3), 64, 0), hidden_units=6, embedding_dim=5)
    margin = 0.8
    n_pairs = 4

    for _ in range(50):
        params = init_params(encoder, rng)
        for name in ("qe_w", "qe_b", "sts_w", "sts_b", "nli_w"):
            params[name] = rng.normal(0.0, 0.3, size=params[name].shape)
        texts_a = _random_texts(rng, n_pairs)
        texts_b = _random_texts(rng, n_pairs)
        Xa = featurize_all(texts_a, encoder.featurizer)
        Xb = featurize_all(texts_b, encoder.featurizer)
        ua = embed(params, Xa)
        ub = embed(params, Xb)
        if np.min(np.abs(ua - ub)) < 1e-3:
            continue
        cos, _ = backprop._cos_forward(ua, ub)
        if loss_kind == "contrastive" and np.min(np.abs(margin - cos)) < 1e-3:
            continue
        break
    else:
        raise RuntimeError("could not sample a configuration away from kinks")

    if loss_kind == "qe-mse":
        y = rng.uniform(0.05, 0.95, n_pairs)
        loss_fn = lambda p: float(regression_batch(p, "qe", Xa, Xb, y)[0].mean())
        _, grads = regression_batch(params, "qe", Xa, Xb, y)
    elif loss_kind == "sts-mse":
        y = rng.uniform(0.05, 0.95, n_pairs)
        loss_fn = lambda p: float(regression_batch(p, "sts", Xa, Xb, y)[0].mean())
        _, grads = regression_batch(params, "sts", Xa, Xb, y)
    elif loss_kind == "nli-ce":
        y = rng.integers(0, 3, n_pairs)
        loss_fn = lambda p: float(nli_batch(p, Xa, Xb, y)[0].mean())
        _, grads = nli_batch(params, Xa, Xb, y)
    elif loss_kind == "contrastive":
        y = np.array([1.0, 0.0] * (n_pairs // 2))
        loss_fn = lambda p: float(contrastive_batch(p, Xa, Xb, y, margin)[0].mean())
        _, grads = contrastive_batch(params, Xa, Xb, y, margin)
    else:  # alignment
        targets = rng.normal(0.0, 1.0, size=(n_pairs, encoder.embedding_dim))
        loss_fn = lambda p: float(alignment_batch(p, Xa, targets)[0].mean())
        _, grads = alignment_batch(params, Xa, targets)

    report = GradCheckReport(loss_kind, eps)
    for name, analytic in grads.items():
        analytic = np.ascontiguousarray(analytic, dtype=np.float64)
        numeric = np.zeros(analytic.shape)
        flat_p = params[name].reshape(-1)
        flat_n = numeric.reshape(-1)
        for i in range(flat_p.size):
            original = flat_p[i]
            flat_p[i] = original + eps
            up = loss_fn(params)
            flat_p[i] = original - eps
            down = loss_fn(params)
            flat_p[i] = original
            flat_n[i] = (up - down) / (2.0 * eps)
        scale = max(float(np.max(np.abs(analytic))), float(np.max(np.abs(numeric))), 1e-12)
        report.errors[name] = float(np.max(np.abs(analytic - numeric))) / scale
    return report


def history_to_csv(history) -> str:
    lines = ["epoch,task,mean_loss"]
    lines += [f"{row['epoch']},{row['task']},{row['mean_loss']!r}" for row in history]
    return "\n".join(lines) + "\n"
