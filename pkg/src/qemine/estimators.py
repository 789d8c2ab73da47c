"""Estimator-style wrappers around the training pipelines.

These follow the scikit-learn conventions: hyperparameters are
constructor arguments mirrored by get_params/set_params, fit returns
self, fitted state lives in trailing-underscore attributes, and
inference goes through predict/transform.  They also implement the
scorer/encoder protocols the mining pipelines expect (``score_pairs``,
``score_matrix``, ``embed``).
"""

from __future__ import annotations

import inspect

import numpy as np

from . import backprop
from .errors import ConfigError
from .features import FeaturizerConfig, featurize_all
from .model import EncoderConfig, HeadSet, load_model, save_model
from .training import (
    ContrastiveConfig,
    TrainConfig,
    feature_predict,
    multitask_train,
    train_filtration,
    train_feature_stack,
)
from .validation import as_text_pairs, check_is_fitted

__all__ = ["MultitaskScorer", "ContrastiveFilter", "FeatureStackScorer"]


class _EstimatorMixin:
    """get_params/set_params over the constructor signature."""

    @classmethod
    def _param_names(cls):
        signature = inspect.signature(cls.__init__)
        return tuple(name for name in signature.parameters if name != "self")

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = self._param_names()
        for name, value in params.items():
            if name not in valid:
                raise ValueError(f"invalid parameter {name!r} for {type(self).__name__}")
            setattr(self, name, value)
        return self


class _EncoderParams:
    def _encoder_config(self) -> EncoderConfig:
        featurizer = FeaturizerConfig(tuple(self.ngram_orders), self.n_features, self.hash_seed)
        return EncoderConfig(featurizer, self.hidden_units, self.embedding_dim)


class MultitaskScorer(_EstimatorMixin, _EncoderParams):
    """Shared-backbone quality scorer with optional STS and NLI co-training.

    Parameters
    ----------
    tasks : tuple of {"qe", "sts", "nli"}
        Tasks interleaved during the first training phase.
    epochs, finetune_epochs : int
        Multitask epochs, then QE-only fine-tuning epochs.
    until_convergence : bool
        Replace the fixed epoch count with early stopping on validation
        Pearson (requires a validation set at fit time).
    """

    def __init__(self, tasks=("qe", "sts", "nli"), epochs=3, finetune_epochs=1,
                 batch_size=32, learning_rate=1e-3, n_features=32768,
                 hidden_units=256, embedding_dim=128, ngram_orders=(1, 2, 3, 4),
                 hash_seed=0, until_convergence=False, patience=3, max_epochs=50,
                 seed=42):
        self.tasks = tasks
        self.epochs = epochs
        self.finetune_epochs = finetune_epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.n_features = n_features
        self.hidden_units = hidden_units
        self.embedding_dim = embedding_dim
        self.ngram_orders = ngram_orders
        self.hash_seed = hash_seed
        self.until_convergence = until_convergence
        self.patience = patience
        self.max_epochs = max_epochs
        self.seed = seed
        self.encoder_ = None
        self.heads_ = None
        self.history_ = None
        self._params64 = None

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            finetune_epochs=self.finetune_epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            tasks=tuple(self.tasks),
            seed=self.seed,
            until_convergence=self.until_convergence,
            patience=self.patience,
            max_epochs=self.max_epochs,
        )

    def fit(self, qe=None, sts=None, nli=None, validation=None):
        self.encoder_, self.heads_, self.history_ = multitask_train(
            qe, sts, nli, self._train_config(), self._encoder_config(), validation
        )
        self._params64 = backprop.params_from_model(self.encoder_, self.heads_)
        return self

    def _require_fitted(self):
        check_is_fitted(self, "encoder_", "heads_")
        if self._params64 is None:
            self._params64 = backprop.params_from_model(self.encoder_, self.heads_)
        return self._params64

    def _featurize_pair_lists(self, texts_a, texts_b):
        featurizer = self.encoder_.featurizer
        return featurize_all(texts_a, featurizer), featurize_all(texts_b, featurizer)

    def score_pairs(self, texts_a, texts_b) -> np.ndarray:
        params = self._require_fitted()
        Xa, Xb = self._featurize_pair_lists(list(texts_a), list(texts_b))
        return backprop.predict_regression(params, "qe", Xa, Xb)

    def predict(self, pairs) -> np.ndarray:
        """Quality scores in (0,1) for (source, translation) pairs."""
        pairs = as_text_pairs(pairs)
        return self.score_pairs([p[0] for p in pairs], [p[1] for p in pairs])

    def predict_sts(self, pairs) -> np.ndarray:
        params = self._require_fitted()
        pairs = as_text_pairs(pairs)
        Xa, Xb = self._featurize_pair_lists([p[0] for p in pairs], [p[1] for p in pairs])
        return backprop.predict_regression(params, "sts", Xa, Xb)

    def predict_nli(self, pairs) -> np.ndarray:
        params = self._require_fitted()
        pairs = as_text_pairs(pairs)
        Xa, Xb = self._featurize_pair_lists([p[0] for p in pairs], [p[1] for p in pairs])
        return backprop.predict_nli(params, Xa, Xb)

    def score_matrix(self, references, hypotheses) -> np.ndarray:
        """All pairwise QE scores, embedding each sentence only once."""
        params = self._require_fitted()
        Xr, Xh = self._featurize_pair_lists(list(references), list(hypotheses))
        ur = backprop.embed(params, Xr)
        uh = backprop.embed(params, Xh)
        rows = []
        for i in range(ur.shape[0]):
            ua = np.broadcast_to(ur[i], uh.shape)
            feats, _ = backprop._reg_features_forward(ua, uh)
            z = feats @ params["qe_w"] + params["qe_b"][0]
            rows.append(backprop._sigmoid(z))
        return np.stack(rows)

    def save(self, path) -> None:
        check_is_fitted(self, "encoder_", "heads_")
        save_model(self.encoder_, self.heads_, path)

    @classmethod
    def load(cls, path) -> "MultitaskScorer":
        model, heads = load_model(path)
        est = cls(
            n_features=model.featurizer.n_features,
            hidden_units=model.hidden_units,
            embedding_dim=model.embedding_dim,
            ngram_orders=model.featurizer.ngram_orders,
            hash_seed=model.featurizer.hash_seed,
        )
        est.encoder_ = model
        est.heads_ = heads
        return est


class ContrastiveFilter(_EstimatorMixin, _EncoderParams):
    """Sentence embedder trained contrastively to separate matched from
    mismatched pairs; used to shortlist mining candidates."""

    def __init__(self, margin=1.0, epochs=3, batch_size=32, learning_rate=1e-3,
                 n_features=32768, hidden_units=256, embedding_dim=128,
                 ngram_orders=(1, 2, 3, 4), hash_seed=0, seed=42):
        self.margin = margin
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.n_features = n_features
        self.hidden_units = hidden_units
        self.embedding_dim = embedding_dim
        self.ngram_orders = ngram_orders
        self.hash_seed = hash_seed
        self.seed = seed
        self.encoder_ = None
        self.history_ = None
        self._params64 = None

    def fit(self, positives, negatives):
        config = TrainConfig(
            epochs=self.epochs,
            finetune_epochs=0,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            seed=self.seed,
        )
        self.encoder_, self.history_ = train_filtration(
            positives, negatives, config, ContrastiveConfig(self.margin), self._encoder_config()
        )
        self._params64 = backprop.params_from_model(self.encoder_)
        return self

    def _require_fitted(self):
        check_is_fitted(self, "encoder_")
        if self._params64 is None:
            self._params64 = backprop.params_from_model(self.encoder_)
        return self._params64

    def embed(self, texts) -> np.ndarray:
        """Raw sentence embeddings, one row per text."""
        params = self._require_fitted()
        X = featurize_all(list(texts), self.encoder_.featurizer)
        return backprop.embed(params, X)

    def transform(self, texts) -> np.ndarray:
        return self.embed(texts)

    def pair_cosines(self, texts_a, texts_b) -> np.ndarray:
        """Cosine per aligned pair (not the full cross product)."""
        ua = self.embed(texts_a)
        ub = self.embed(texts_b)
        na = np.linalg.norm(ua, axis=1)
        nb = np.linalg.norm(ub, axis=1)
        denom = na * nb
        safe = denom > 0
        return np.where(safe, np.einsum("ij,ij->i", ua, ub) / np.where(safe, denom, 1.0), 0.0)

    def save(self, path) -> None:
        check_is_fitted(self, "encoder_")
        save_model(self.encoder_, HeadSet.zeros(self.encoder_.embedding_dim), path)

    @classmethod
    def load(cls, path) -> "ContrastiveFilter":
        model, _ = load_model(path)
        est = cls(
            n_features=model.featurizer.n_features,
            hidden_units=model.hidden_units,
            embedding_dim=model.embedding_dim,
            ngram_orders=model.featurizer.ngram_orders,
            hash_seed=model.featurizer.hash_seed,
        )
        est.encoder_ = model
        return est


class FeatureStackScorer(_EstimatorMixin):
    """Quality predictor over the pair features of three frozen backbones.

    The backbones (STS, NLI and QE encoders, already trained and
    possibly aligned) are fixed at construction; fit only trains the
    two-layer head.
    """

    def __init__(self, sts_backbone=None, nli_backbone=None, qe_backbone=None,
                 hidden_units=64, epochs=3, batch_size=32, learning_rate=1e-3, seed=42):
        self.sts_backbone = sts_backbone
        self.nli_backbone = nli_backbone
        self.qe_backbone = qe_backbone
        self.hidden_units = hidden_units
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed
        self.model_ = None
        self.history_ = None

    def fit(self, qe):
        for name in ("sts_backbone", "nli_backbone", "qe_backbone"):
            if getattr(self, name) is None:
                raise ConfigError(f"{name} must be set before fitting")
        config = TrainConfig(
            epochs=self.epochs,
            finetune_epochs=0,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            seed=self.seed,
        )
        self.model_, self.history_ = train_feature_stack(
            self.sts_backbone, self.nli_backbone, self.qe_backbone, qe,
            config, self.hidden_units,
        )
        return self

    def predict(self, pairs) -> np.ndarray:
        check_is_fitted(self, "model_")
        return feature_predict(self.model_, pairs)

    def score_pairs(self, texts_a, texts_b) -> np.ndarray:
        return self.predict(list(zip(texts_a, texts_b)))
