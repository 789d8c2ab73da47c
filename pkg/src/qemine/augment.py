"""Negative data augmentation: mismatched sentence pairs with zero labels.

For every source sentence, ``n_negatives`` targets of other records are
sampled uniformly without replacement (never the source's own target).
Filtration mode additionally demotes originals whose quality score falls
below the cutoff: they leave the positive set and join the negatives.
Scorer mode keeps every original with its original score and only adds
the zero-scored mismatches.

Both modes produce QE records, so augmented sets serialize to the QE
TSV format unchanged (the label column carries the assigned label).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import QERecord
from .errors import ConfigError

__all__ = ["AugmentConfig", "AugmentedDataset", "augment_filtration", "augment_scorer"]

_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class AugmentConfig:
    n_negatives: int = 3
    quality_cutoff: float = 0.7
    seed: int = 42

    def __post_init__(self):
        if self.n_negatives < 1:
            raise ValueError("n_negatives must be >= 1")
        if not 0.0 <= self.quality_cutoff <= 1.0:
            raise ValueError("quality_cutoff must lie in [0,1]")


@dataclass(frozen=True)
class AugmentedDataset:
    """Positive set, negative set, and whether labels are binary or continuous."""

    positives: tuple
    negatives: tuple
    label_kind: str

    def __post_init__(self):
        if self.label_kind not in ("binary", "continuous"):
            raise ValueError(f"unknown label kind {self.label_kind!r}")
        object.__setattr__(self, "positives", tuple(self.positives))
        object.__setattr__(self, "negatives", tuple(self.negatives))

    def records(self) -> list[QERecord]:
        """All pairs, positives first, for QE TSV serialization."""
        return list(self.positives) + list(self.negatives)


def _sampled_negatives(records, config: AugmentConfig) -> list[QERecord]:
    total = len(records)
    if total < config.n_negatives + 1:
        raise ConfigError(
            f"need at least {config.n_negatives + 1} records to sample "
            f"{config.n_negatives} distinct negatives per source, got {total}"
        )
    rng = np.random.default_rng(config.seed & _MASK64)
    negatives = []
    for i, record in enumerate(records):
        # draw from 0..total-2 and skip over index i
        draws = rng.choice(total - 1, size=config.n_negatives, replace=False)
        for draw in draws:
            j = int(draw) if draw < i else int(draw) + 1
            negatives.append(QERecord(record.source, records[j].target, 0.0))
    return negatives


def augment_filtration(records, config: AugmentConfig = AugmentConfig()) -> AugmentedDataset:
    """Binary-labeled sets for contrastive filtration training.

    Positives are the originals scoring at least the cutoff, relabeled 1;
    negatives are the sampled mismatches followed by the demoted
    below-cutoff originals, all labeled 0.
    """
    records = list(records)
    negatives = _sampled_negatives(records, config)
    positives = [
        QERecord(r.source, r.target, 1.0) for r in records if r.score >= config.quality_cutoff
    ]
    negatives += [
        QERecord(r.source, r.target, 0.0) for r in records if r.score < config.quality_cutoff
    ]
    return AugmentedDataset(tuple(positives), tuple(negatives), "binary")


def augment_scorer(records, config: AugmentConfig = AugmentConfig()) -> AugmentedDataset:
    """Continuous-labeled augmentation for quality-scorer training.

    Every original keeps its quality score (no cutoff demotion); the
    sampled mismatches get a quality score of exactly 0.
    """
    records = list(records)
    negatives = _sampled_negatives(records, config)
    return AugmentedDataset(tuple(records), tuple(negatives), "continuous")
