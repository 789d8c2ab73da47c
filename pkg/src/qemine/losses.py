"""Scalar loss functions with their analytic derivatives.

These define the per-example objectives; the batched training engine in
``backprop`` must agree with them (the gradient checker enforces that).
"""

from __future__ import annotations

import logging
import math

import numpy as np

__all__ = ["task_loss", "contrastive_loss", "alignment_loss"]

logger = logging.getLogger(__name__)


def task_loss(task: str, prediction, label):
    """Per-example loss and d(loss)/d(prediction) for one task head.

    QE/STS use squared error on a scalar prediction; NLI uses cross
    entropy on a probability triple with an integer class label.
    """
    if task in ("qe", "sts"):
        p = float(prediction)
        y = float(label)
        if not 0.0 <= y <= 1.0:
            raise ValueError(f"{task} label must lie in [0,1], got {y}")
        diff = p - y
        return diff * diff, 2.0 * diff
    if task == "nli":
        probs = np.asarray(prediction, dtype=np.float64)
        y = int(label)
        if y not in (0, 1, 2):
            raise ValueError(f"nli label must be 0, 1 or 2, got {label}")
        loss = -math.log(probs[y])
        grad = np.zeros(3)
        grad[y] = -1.0 / probs[y]
        return loss, grad
    raise ValueError(f"unknown task {task!r}")


def contrastive_loss(distance: float, label: int, margin: float = 1.0):
    """Margin contrastive loss over a similarity value and its derivative.

    loss = (1-Y) * D^2/2 + Y * max(0, m-D)^2 / 2.  Positive pairs (Y=1)
    are pushed up to the margin, negatives (Y=0) down to zero.  At the
    hinge boundary D == m the subgradient 0 is used.
    """
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    if not 0.0 < margin <= 1.0:
        raise ValueError(f"margin must lie in (0,1], got {margin}")
    if not -1.0 <= distance <= 1.0:
        raise ValueError(f"similarity must lie in [-1,1], got {distance}")
    hinge = max(0.0, margin - distance)
    loss = (1 - label) * 0.5 * distance * distance + label * 0.5 * hinge * hinge
    grad = (1 - label) * distance - label * hinge
    return loss, grad


def alignment_loss(embedding_pairs):
    """Sum of (1 - cos(x, y)) over pairs, with gradients w.r.t. each x.

    The y vectors are fixed targets and receive no gradient.  A pair with
    a zero-norm member contributes loss 1 with zero gradient.
    """
    total = 0.0
    grads = []
    for x, y in embedding_pairs:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if x.shape != y.shape:
            raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
        nx = np.sqrt(x @ x)
        ny = np.sqrt(y @ y)
        if nx == 0.0 or ny == 0.0:
            logger.debug("zero-norm embedding in alignment pair; loss 1, zero gradient")
            total += 1.0
            grads.append(np.zeros_like(x))
            continue
        cos = (x @ y) / (nx * ny)
        total += 1.0 - cos
        grads.append(-(y / (nx * ny) - cos * x / (nx * nx)))
    return total, grads
