"""Batched forward/backward passes for every training objective.

Parameters are plain dicts of float64 arrays keyed by block name
('W1', 'b1', 'W2', 'b2', 'qe_w', 'qe_b', 'sts_w', 'sts_b', 'nli_w').
Every *_batch function returns per-example losses plus the gradient of
the batch MEAN loss; the gradient checker in ``training`` verifies all
of them against central finite differences.
"""

from __future__ import annotations

import numpy as np

from .features import FeaturizerConfig
from .model import EncoderConfig, EncoderModel, HeadSet

BACKBONE_BLOCKS = ("W1", "b1", "W2", "b2")
HEAD_BLOCKS = {"qe": ("qe_w", "qe_b"), "sts": ("sts_w", "sts_b"), "nli": ("nli_w",)}


def init_params(config: EncoderConfig, rng: np.random.Generator) -> dict:
    """Seeded float64 parameter dict; heads start at zero (neutral outputs)."""
    n_features = config.featurizer.n_features
    hidden = config.hidden_units
    dim = config.embedding_dim
    params = {
        "W1": rng.normal(0.0, 0.5, size=(hidden, n_features)),
        "W2": rng.normal(0.0, 1.0 / np.sqrt(hidden), size=(dim, hidden)),
        "b1": np.zeros(hidden),
        "b2": np.zeros(dim),
        "qe_w": np.zeros(2 * dim + 1),
        "qe_b": np.zeros(1),
        "sts_w": np.zeros(2 * dim + 1),
        "sts_b": np.zeros(1),
        "nli_w": np.zeros((3, 4 * dim + 1)),
    }
    return params


def params_from_model(model: EncoderModel, heads: HeadSet | None = None) -> dict:
    params = {
        "W1": model.w1.astype(np.float64),
        "b1": model.b1.astype(np.float64),
        "W2": model.w2.astype(np.float64),
        "b2": model.b2.astype(np.float64),
    }
    if heads is not None:
        params.update(
            qe_w=heads.qe_w.astype(np.float64),
            qe_b=heads.qe_b.astype(np.float64),
            sts_w=heads.sts_w.astype(np.float64),
            sts_b=heads.sts_b.astype(np.float64),
            nli_w=heads.nli_w.astype(np.float64),
        )
    return params


def model_from_params(params: dict, featurizer: FeaturizerConfig) -> EncoderModel:
    return EncoderModel(featurizer, params["W1"], params["b1"], params["W2"], params["b2"])


def heads_from_params(params: dict) -> HeadSet:
    return HeadSet(
        params["qe_w"], params["qe_b"], params["sts_w"], params["sts_b"], params["nli_w"]
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def embed_forward(params: dict, X) -> tuple[np.ndarray, np.ndarray]:
    """Embeddings and the hidden-layer cache for a CSR feature matrix."""
    pre = X.dot(params["W1"].T) + params["b1"]
    hidden = np.tanh(pre)
    return hidden @ params["W2"].T + params["b2"], hidden


def embed(params: dict, X) -> np.ndarray:
    return embed_forward(params, X)[0]


def _acc(grads: dict, name: str, value: np.ndarray) -> None:
    if name in grads:
        grads[name] += value
    else:
        grads[name] = value


def embed_backward(params: dict, X, hidden: np.ndarray, d_emb: np.ndarray, grads: dict) -> None:
    _acc(grads, "b2", d_emb.sum(axis=0))
    _acc(grads, "W2", d_emb.T @ hidden)
    d_hidden = d_emb @ params["W2"]
    d_pre = d_hidden * (1.0 - hidden * hidden)
    _acc(grads, "b1", d_pre.sum(axis=0))
    _acc(grads, "W1", X.T.dot(d_pre).T)


def _cos_forward(ua: np.ndarray, ub: np.ndarray):
    na = np.linalg.norm(ua, axis=1)
    nb = np.linalg.norm(ub, axis=1)
    denom = na * nb
    safe = denom > 0.0
    dot = np.einsum("ij,ij->i", ua, ub)
    cos = np.where(safe, dot / np.where(safe, denom, 1.0), 0.0)
    return cos, (ua, ub, na, nb, denom, cos, safe)


def _cos_backward(d_cos: np.ndarray, cache):
    ua, ub, na, nb, denom, cos, safe = cache
    weight = np.where(safe, d_cos, 0.0)[:, None]
    denom_s = np.where(safe, denom, 1.0)[:, None]
    na2 = np.where(safe, na * na, 1.0)[:, None]
    nb2 = np.where(safe, nb * nb, 1.0)[:, None]
    cos_col = cos[:, None]
    d_ua = weight * (ub / denom_s - cos_col * ua / na2)
    d_ub = weight * (ua / denom_s - cos_col * ub / nb2)
    return d_ua, d_ub


def _reg_features_forward(ua: np.ndarray, ub: np.ndarray):
    sign = np.sign(ua - ub)
    prod = ua * ub
    cos, cos_cache = _cos_forward(ua, ub)
    feats = np.concatenate([np.abs(ua - ub), prod, cos[:, None]], axis=1)
    return feats, (sign, cos_cache)


def _reg_features_backward(d_feats: np.ndarray, cache, ua, ub):
    sign, cos_cache = cache
    dim = ua.shape[1]
    d_abs = d_feats[:, :dim]
    d_prod = d_feats[:, dim : 2 * dim]
    d_cos = d_feats[:, 2 * dim]
    d_ua = sign * d_abs + ub * d_prod
    d_ub = -sign * d_abs + ua * d_prod
    ca, cb = _cos_backward(d_cos, cos_cache)
    return d_ua + ca, d_ub + cb


def predict_regression(params: dict, task: str, Xa, Xb) -> np.ndarray:
    ua = embed(params, Xa)
    ub = embed(params, Xb)
    feats, _ = _reg_features_forward(ua, ub)
    z = feats @ params[f"{task}_w"] + params[f"{task}_b"][0]
    return _sigmoid(z)


def predict_nli(params: dict, Xa, Xb) -> np.ndarray:
    ua = embed(params, Xa)
    ub = embed(params, Xb)
    feats = np.concatenate([ua, ub, np.abs(ua - ub), ua * ub], axis=1)
    w = params["nli_w"]
    return _softmax_rows(feats @ w[:, :-1].T + w[:, -1])


def regression_batch(params: dict, task: str, Xa, Xb, y: np.ndarray):
    """Squared-error batch for the QE or STS head; returns (losses, grads)."""
    n = len(y)
    ua, ha = embed_forward(params, Xa)
    ub, hb = embed_forward(params, Xb)
    feats, cache = _reg_features_forward(ua, ub)
    w_name, b_name = f"{task}_w", f"{task}_b"
    z = feats @ params[w_name] + params[b_name][0]
    p = _sigmoid(z)
    diff = p - y
    losses = diff * diff
    dz = 2.0 * diff * p * (1.0 - p) / n
    grads: dict = {}
    grads[w_name] = feats.T @ dz
    grads[b_name] = np.array([dz.sum()])
    d_feats = dz[:, None] * params[w_name][None, :]
    d_ua, d_ub = _reg_features_backward(d_feats, cache, ua, ub)
    embed_backward(params, Xa, ha, d_ua, grads)
    embed_backward(params, Xb, hb, d_ub, grads)
    return losses, grads


def nli_batch(params: dict, Xa, Xb, y: np.ndarray):
    """Cross-entropy batch for the NLI head; returns (losses, grads)."""
    n = len(y)
    ua, ha = embed_forward(params, Xa)
    ub, hb = embed_forward(params, Xb)
    sign = np.sign(ua - ub)
    feats = np.concatenate([ua, ub, np.abs(ua - ub), ua * ub], axis=1)
    w = params["nli_w"]
    probs = _softmax_rows(feats @ w[:, :-1].T + w[:, -1])
    rows = np.arange(n)
    losses = -np.log(probs[rows, y])
    d_logits = probs.copy()
    d_logits[rows, y] -= 1.0
    d_logits /= n
    grads = {
        "nli_w": np.concatenate(
            [d_logits.T @ feats, d_logits.sum(axis=0)[:, None]], axis=1
        )
    }
    d_feats = d_logits @ w[:, :-1]
    dim = ua.shape[1]
    d_ua = d_feats[:, :dim] + sign * d_feats[:, 2 * dim : 3 * dim] + ub * d_feats[:, 3 * dim :]
    d_ub = d_feats[:, dim : 2 * dim] - sign * d_feats[:, 2 * dim : 3 * dim] + ua * d_feats[:, 3 * dim :]
    embed_backward(params, Xa, ha, d_ua, grads)
    embed_backward(params, Xb, hb, d_ub, grads)
    return losses, grads


def contrastive_batch(params: dict, Xa, Xb, y: np.ndarray, margin: float):
    """Contrastive batch over embedding cosines; returns (losses, grads)."""
    n = len(y)
    ua, ha = embed_forward(params, Xa)
    ub, hb = embed_forward(params, Xb)
    cos, cache = _cos_forward(ua, ub)
    hinge = np.maximum(0.0, margin - cos)
    losses = (1 - y) * 0.5 * cos * cos + y * 0.5 * hinge * hinge
    d_cos = ((1 - y) * cos - y * hinge) / n
    d_ua, d_ub = _cos_backward(d_cos, cache)
    grads: dict = {}
    embed_backward(params, Xa, ha, d_ua, grads)
    embed_backward(params, Xb, hb, d_ub, grads)
    return losses, grads


def alignment_batch(params: dict, X, targets: np.ndarray):
    """Alignment batch: mean (1 - cos(embedding, fixed target))."""
    n = targets.shape[0]
    u, hidden = embed_forward(params, X)
    cos, cache = _cos_forward(u, targets)
    losses = 1.0 - cos
    d_u, _ = _cos_backward(np.full(n, -1.0 / n), cache)
    grads: dict = {}
    embed_backward(params, X, hidden, d_u, grads)
    return losses, grads
