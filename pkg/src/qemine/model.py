"""The embedding network, its task heads, and the model file format.

The network maps a hashed n-gram vector x to an embedding
``e = W2 @ tanh(W1 @ x + b1) + b2``.  Three heads sit on top of pair
features built from the two sentence embeddings u and v:

    regression (QE, STS): logistic(w . [|u-v|, u*v, cos(u,v)] + b)
    inference (NLI):      softmax(N @ [u, v, |u-v|, u*v, 1])

Weights are stored as float32 (matching the file format exactly, so a
save/load round trip is bitwise); all arithmetic is done in float64.

Model file layout (little-endian): magic ``QEM1``, version u16, dims
(F, H, d) as u32, featurizer block (u32 order count, u32 orders, i64
hash seed), row-major float32 arrays W1, b1, W2, b2, the QE/STS/NLI head
blocks in that order, and finally the FNV-1a 64-bit checksum of all
preceding bytes as u64.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ModelCorruptionError, ModelFormatError
from .features import FeatureVector, FeaturizerConfig, featurize, fnv1a_64

__all__ = [
    "EncoderModel",
    "HeadSet",
    "EncoderConfig",
    "encode",
    "cosine_similarity",
    "forward_heads",
    "regression_features",
    "inference_features",
    "save_model",
    "load_model",
    "model_to_bytes",
    "model_from_bytes",
    "TASKS",
]

TASKS = ("qe", "sts", "nli")

MAGIC = b"QEM1"
VERSION = 1


def _f32(array) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(array), dtype=np.float32)


@dataclass(frozen=True)
class EncoderConfig:
    """Architecture of the embedding network."""

    featurizer: FeaturizerConfig = FeaturizerConfig()
    hidden_units: int = 256
    embedding_dim: int = 128

    def __post_init__(self):
        if self.hidden_units < 1 or self.embedding_dim < 1:
            raise ValueError("hidden_units and embedding_dim must be positive")


@dataclass(frozen=True)
class EncoderModel:
    """Featurizer config plus the four backbone weight arrays (float32)."""

    featurizer: FeaturizerConfig
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2"):
            object.__setattr__(self, name, _f32(getattr(self, name)))
        hidden, n_features = self.w1.shape
        dim = self.w2.shape[0]
        if n_features != self.featurizer.n_features:
            raise ValueError("W1 width disagrees with the featurizer")
        if self.b1.shape != (hidden,) or self.w2.shape != (dim, hidden) or self.b2.shape != (dim,):
            raise ValueError("backbone weight shapes are inconsistent")
        for name in ("w1", "b1", "w2", "b2"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite values in {name}")

    @property
    def hidden_units(self) -> int:
        return self.w1.shape[0]

    @property
    def embedding_dim(self) -> int:
        return self.w2.shape[0]

    def config(self) -> EncoderConfig:
        return EncoderConfig(self.featurizer, self.hidden_units, self.embedding_dim)


@dataclass(frozen=True)
class HeadSet:
    """Linear task heads: QE and STS weight/bias pairs plus the NLI matrix.

    The NLI matrix is 3 x (4d+1); its last column is the bias.
    """

    qe_w: np.ndarray
    qe_b: np.ndarray
    sts_w: np.ndarray
    sts_b: np.ndarray
    nli_w: np.ndarray

    def __post_init__(self):
        for name in ("qe_w", "qe_b", "sts_w", "sts_b", "nli_w"):
            object.__setattr__(self, name, _f32(getattr(self, name)))
        dim = (self.qe_w.shape[0] - 1) // 2
        if self.qe_w.shape != (2 * dim + 1,) or self.sts_w.shape != (2 * dim + 1,):
            raise ValueError("regression head shapes are inconsistent")
        if self.qe_b.shape != (1,) or self.sts_b.shape != (1,):
            raise ValueError("head biases must have shape (1,)")
        if self.nli_w.shape != (3, 4 * dim + 1):
            raise ValueError(f"NLI head must be 3 x (4d+1), got {self.nli_w.shape}")

    @classmethod
    def zeros(cls, embedding_dim: int) -> "HeadSet":
        reg = np.zeros(2 * embedding_dim + 1)
        return cls(reg, np.zeros(1), reg.copy(), np.zeros(1), np.zeros((3, 4 * embedding_dim + 1)))


def encode(model: EncoderModel, fv: FeatureVector) -> np.ndarray:
    """Embed one featurized sentence: W2 @ tanh(W1 @ x + b1) + b2."""
    if fv.n_features != model.featurizer.n_features:
        raise ValueError(
            f"feature vector has {fv.n_features} buckets, model expects "
            f"{model.featurizer.n_features}"
        )
    w1 = model.w1.astype(np.float64)
    pre = w1[:, fv.indices] @ fv.values + model.b1.astype(np.float64)
    hidden = np.tanh(pre)
    return model.w2.astype(np.float64) @ hidden + model.b2.astype(np.float64)


def encode_text(model: EncoderModel, text: str) -> np.ndarray:
    return encode(model, featurize(text, model.featurizer))


def cosine_similarity(u, v) -> float:
    """Cosine of two equal-length vectors; 0 by convention if either is zero."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.sqrt(u @ u)
    nv = np.sqrt(v @ v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float((u @ v) / (nu * nv))


def regression_features(u, v) -> np.ndarray:
    """Pair features for the regression heads: [|u-v|, u*v, cos(u,v)]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return np.concatenate([np.abs(u - v), u * v, [cosine_similarity(u, v)]])


def inference_features(u, v) -> np.ndarray:
    """Pair features for the NLI head: [u, v, |u-v|, u*v]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return np.concatenate([u, v, np.abs(u - v), u * v])


def _logistic(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    e = np.exp(shifted)
    return e / e.sum()


def forward_heads(model: EncoderModel, heads: HeadSet, pair, task: str):
    """Score one (textA, textB) pair with the requested head.

    QE and STS return a scalar in (0,1); NLI returns a probability triple.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}, expected one of {TASKS}")
    u = encode_text(model, pair[0])
    v = encode_text(model, pair[1])
    if task == "nli":
        feats = np.append(inference_features(u, v), 1.0)
        return _softmax(heads.nli_w.astype(np.float64) @ feats)
    feats = regression_features(u, v)
    if task == "qe":
        w, b = heads.qe_w, heads.qe_b
    else:
        w, b = heads.sts_w, heads.sts_b
    return _logistic(float(w.astype(np.float64) @ feats + float(b[0])))


def _pack_array(array: np.ndarray) -> bytes:
    return np.ascontiguousarray(array, dtype="<f4").tobytes()


def model_to_bytes(model: EncoderModel, heads: HeadSet | None = None) -> bytes:
    """Serialize to the model file layout; missing heads are stored as zeros."""
    if heads is None:
        heads = HeadSet.zeros(model.embedding_dim)
    cfg = model.featurizer
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<H", VERSION)
    blob += struct.pack(
        "<III", cfg.n_features, model.hidden_units, model.embedding_dim
    )
    blob += struct.pack("<I", len(cfg.ngram_orders))
    blob += struct.pack(f"<{len(cfg.ngram_orders)}I", *cfg.ngram_orders)
    blob += struct.pack("<q", cfg.hash_seed)
    for array in (model.w1, model.b1, model.w2, model.b2,
                  heads.qe_w, heads.qe_b, heads.sts_w, heads.sts_b, heads.nli_w):
        blob += _pack_array(array)
    blob += struct.pack("<Q", fnv1a_64(bytes(blob)))
    return bytes(blob)


def save_model(model: EncoderModel, heads: HeadSet, path) -> None:
    """Write the model file described in the module docstring."""
    with open(path, "wb") as handle:
        handle.write(model_to_bytes(model, heads))


def _take(blob: bytes, offset: int, size: int, path) -> tuple[bytes, int]:
    if offset + size > len(blob):
        raise ModelCorruptionError(f"{path}: file truncated at byte {offset}")
    return blob[offset : offset + size], offset + size


def model_from_bytes(blob: bytes, path="<bytes>") -> tuple[EncoderModel, HeadSet]:
    """Parse a serialized model; inverse of model_to_bytes."""
    chunk, offset = _take(blob, 0, 4, path)
    if chunk != MAGIC:
        raise ModelFormatError(f"{path}: bad magic bytes {chunk!r}")
    chunk, offset = _take(blob, offset, 2, path)
    version = struct.unpack("<H", chunk)[0]
    if version != VERSION:
        raise ModelFormatError(f"{path}: unsupported version {version}")
    chunk, offset = _take(blob, offset, 12, path)
    n_features, hidden, dim = struct.unpack("<III", chunk)
    chunk, offset = _take(blob, offset, 4, path)
    n_orders = struct.unpack("<I", chunk)[0]
    chunk, offset = _take(blob, offset, 4 * n_orders, path)
    orders = struct.unpack(f"<{n_orders}I", chunk)
    chunk, offset = _take(blob, offset, 8, path)
    hash_seed = struct.unpack("<q", chunk)[0]

    shapes = [
        (hidden, n_features),
        (hidden,),
        (dim, hidden),
        (dim,),
        (2 * dim + 1,),
        (1,),
        (2 * dim + 1,),
        (1,),
        (3, 4 * dim + 1),
    ]
    arrays = []
    for shape in shapes:
        count = int(np.prod(shape))
        chunk, offset = _take(blob, offset, 4 * count, path)
        arrays.append(np.frombuffer(chunk, dtype="<f4").reshape(shape))
    chunk, offset = _take(blob, offset, 8, path)
    declared = struct.unpack("<Q", chunk)[0]
    if offset != len(blob):
        raise ModelCorruptionError(f"{path}: {len(blob) - offset} trailing bytes")
    if fnv1a_64(blob[:-8]) != declared:
        raise ModelCorruptionError(f"{path}: checksum mismatch")

    featurizer = FeaturizerConfig(tuple(orders), n_features, hash_seed)
    model = EncoderModel(featurizer, *arrays[:4])
    heads = HeadSet(*arrays[4:])
    return model, heads


def load_model(path) -> tuple[EncoderModel, HeadSet]:
    """Read a model file back; inverse of save_model."""
    with open(path, "rb") as handle:
        blob = handle.read()
    return model_from_bytes(blob, path)
