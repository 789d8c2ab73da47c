"""Corpus mining inference: score matrices, similarity-search selection,
two-stage candidate mining with mutual-best intersection, threshold
tuning and the retrieval metrics.

Scorers are objects exposing ``score_pairs(texts_a, texts_b)`` (and
optionally a vectorized ``score_matrix``); filtration encoders expose
``embed(texts)``.  Tie-breaking is fixed everywhere: argmax ties go to
the lowest index / first occurrence, threshold ties to the largest
threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "ScoreMatrix",
    "MiningConfig",
    "MiningResult",
    "score_matrix",
    "mine_tatoeba",
    "tatoeba_accuracy",
    "embed_and_similarity",
    "topn_candidates",
    "mine_bucc",
    "tune_threshold",
    "f1_score",
]


@dataclass(frozen=True)
class ScoreMatrix:
    """Dense reference-by-hypothesis score matrix with row/column ids."""

    values: np.ndarray
    row_ids: tuple
    col_ids: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_ids", tuple(self.row_ids))
        object.__setattr__(self, "col_ids", tuple(self.col_ids))
        if values.shape != (len(self.row_ids), len(self.col_ids)):
            raise ValueError(
                f"matrix shape {values.shape} disagrees with id lists "
                f"({len(self.row_ids)} x {len(self.col_ids)})"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("score matrix contains non-finite entries")

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class MiningConfig:
    """Candidate count and selection threshold for two-stage mining."""

    top_n: int = 10
    threshold: float | str = "auto"

    def __post_init__(self):
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")
        if self.threshold != "auto" and not 0.0 <= float(self.threshold) <= 1.0:
            raise ValueError(f"threshold must be 'auto' or in [0,1], got {self.threshold}")


@dataclass(frozen=True)
class MiningResult:
    """Selected (idA, idB, score) pairs plus selection diagnostics."""

    pairs: tuple
    threshold: float
    n_forward: int
    n_backward: int
    n_candidates: int

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        seen = {(a, b) for a, b, _ in self.pairs}
        if len(seen) != len(self.pairs):
            raise ValueError("selected pairs must be unique")
        if any(score < self.threshold for _, _, score in self.pairs):
            raise ValueError("every selected pair must score at least the threshold")

    def pair_set(self) -> set:
        return {(a, b) for a, b, _ in self.pairs}


def score_matrix(scorer, references, hypotheses) -> ScoreMatrix:
    """Score every (reference, hypothesis) combination with the quality scorer."""
    references = list(references)
    hypotheses = list(hypotheses)
    if not references or not hypotheses:
        raise ValueError("reference and hypothesis lists must be non-empty")
    if hasattr(scorer, "score_matrix"):
        values = np.asarray(scorer.score_matrix(references, hypotheses), dtype=np.float64)
    else:
        texts_a = [r for r in references for _ in hypotheses]
        texts_b = hypotheses * len(references)
        values = np.asarray(scorer.score_pairs(texts_a, texts_b), dtype=np.float64)
        values = values.reshape(len(references), len(hypotheses))
    return ScoreMatrix(values, tuple(range(len(references))), tuple(range(len(hypotheses))))


def mine_tatoeba(matrix: ScoreMatrix) -> list[tuple[int, int]]:
    """Per reference row, the hypothesis column with the highest score.

    Ties resolve to the lowest column index.
    """
    return [(i, int(np.argmax(row))) for i, row in enumerate(matrix.values)]


def tatoeba_accuracy(predicted, size: int) -> float:
    """Fraction of rows whose selected column equals the row index."""
    rows = [row for row, _ in predicted]
    if sorted(rows) != list(range(size)):
        raise ValueError("predictions must cover every row exactly once")
    return sum(1 for row, col in predicted if row == col) / size


def embed_and_similarity(filter_model, side_a, side_b,
                         row_ids=None, col_ids=None) -> ScoreMatrix:
    """Pairwise cosine matrix from one embedding pass per side.

    Embeddings are L2-normalized (zero vectors stay zero) so the matrix
    is the plain inner product, clipped into [-1,1] against rounding.
    """
    side_a = list(side_a)
    side_b = list(side_b)
    ua = np.asarray(filter_model.embed(side_a), dtype=np.float64)
    ub = np.asarray(filter_model.embed(side_b), dtype=np.float64)

    def _normalize(u):
        norms = np.linalg.norm(u, axis=1, keepdims=True)
        return np.divide(u, norms, out=np.zeros_like(u), where=norms > 0)

    values = np.clip(_normalize(ua) @ _normalize(ub).T, -1.0, 1.0)
    if row_ids is None:
        row_ids = tuple(range(len(side_a)))
    if col_ids is None:
        col_ids = tuple(range(len(side_b)))
    return ScoreMatrix(values, row_ids, col_ids)


def _top_indices(values: np.ndarray, n: int) -> np.ndarray:
    order = np.argsort(-values, kind="stable")
    return np.sort(order[:n])


def topn_candidates(matrix: ScoreMatrix, n: int):
    """Indices of the n largest entries per row and per column (ascending).

    Ties resolve to the lowest index; n past the dimension returns all.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    values = matrix.values
    rows = [_top_indices(values[i], n) for i in range(values.shape[0])]
    cols = [_top_indices(values[:, j], n) for j in range(values.shape[1])]
    return rows, cols


def _mutual_best(scored_pairs, threshold: float):
    """Forward/backward best-above-threshold selection and its intersection.

    For each left id the best-scoring right partner at or above the
    threshold (first occurrence wins ties), symmetrically for each right
    id; the selection is the intersection of the two directed sets.
    """
    best_a: dict = {}
    best_b: dict = {}
    for a, b, score in scored_pairs:
        if score >= threshold:
            if a not in best_a or score > best_a[a][0]:
                best_a[a] = (score, b)
            if b not in best_b or score > best_b[b][0]:
                best_b[b] = (score, a)
    forward = {(a, b) for a, (_, b) in best_a.items()}
    backward = {(a, b) for b, (_, a) in best_b.items()}
    return forward, backward, forward & backward


def mine_bucc(corpus, filter_model, scorer, config: MiningConfig = MiningConfig(),
              train_gold=None) -> MiningResult:
    """Two-stage mining: embed, shortlist top-n per sentence in both
    directions, score the shortlisted pairs, then keep mutual best
    matches at or above the threshold.

    ``threshold='auto'`` tunes the threshold on ``train_gold`` (gold id
    pairs for this corpus's training split); without it the auto setting
    is a configuration error.
    """
    ids_a = list(corpus.side_a)
    ids_b = list(corpus.side_b)
    texts_a = [corpus.side_a[i] for i in ids_a]
    texts_b = [corpus.side_b[i] for i in ids_b]

    similarity = embed_and_similarity(filter_model, texts_a, texts_b)
    row_cands, col_cands = topn_candidates(similarity, config.top_n)
    candidates = {(i, int(j)) for i, row in enumerate(row_cands) for j in row}
    candidates |= {(int(i), j) for j, col in enumerate(col_cands) for i in col}
    candidates = sorted(candidates)

    scores = np.asarray(
        scorer.score_pairs([texts_a[i] for i, _ in candidates],
                           [texts_b[j] for _, j in candidates]),
        dtype=np.float64,
    )
    scored = [(ids_a[i], ids_b[j], float(s)) for (i, j), s in zip(candidates, scores)]

    if config.threshold == "auto":
        if train_gold is None:
            raise ConfigError("threshold 'auto' needs train_gold pairs to tune against")
        threshold = tune_threshold(scored, train_gold)
    else:
        threshold = float(config.threshold)

    forward, backward, selected = _mutual_best(scored, threshold)
    score_of = {(a, b): s for a, b, s in scored}
    pairs = tuple((a, b, score_of[(a, b)]) for a, b in sorted(selected))
    return MiningResult(pairs, threshold, len(forward), len(backward), len(scored))


def tune_threshold(scored_candidates, gold) -> float:
    """Threshold maximizing selection F1 over a grid of 0.01 steps plus
    every distinct candidate score; ties return the largest threshold."""
    gold = set(gold)
    if not gold:
        raise ConfigError("cannot tune a threshold against an empty gold set")
    scored = list(scored_candidates)
    grid = {k / 100.0 for k in range(101)}
    grid.update(float(s) for _, _, s in scored)
    best_threshold = 0.0
    best_f1 = -1.0
    for threshold in sorted(grid):
        _, _, selected = _mutual_best(scored, threshold)
        _, _, f1 = f1_score(selected, gold)
        if f1 >= best_f1:
            best_f1 = f1
            best_threshold = threshold
    return best_threshold


def f1_score(predicted, gold):
    """Precision, recall and F1 over exact id-pair matches.

    An empty prediction scores (0, 0, 0) by convention.
    """
    predicted = set(predicted)
    gold = set(gold)
    if not predicted:
        return 0.0, 0.0, 0.0
    hits = len(predicted & gold)
    precision = hits / len(predicted)
    recall = hits / len(gold) if gold else 0.0
    if precision + recall == 0.0:
        return precision, recall, 0.0
    return precision, recall, 2.0 * precision * recall / (precision + recall)
