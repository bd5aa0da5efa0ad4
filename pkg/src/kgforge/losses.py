"""Loss functions for positive/negative triple pairs.

Scores follow the package-wide convention that higher means more
plausible. Both losses are computed in numerically stable closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from kgforge.errors import ConfigError

MARGIN_RANKING = "margin_ranking"
BINARY_CROSS_ENTROPY = "binary_cross_entropy"
LOSS_NAMES = (MARGIN_RANKING, BINARY_CROSS_ENTROPY)


@dataclass(frozen=True)
class LossSpec:
    """Which pairwise loss to apply; ``margin`` is used by margin ranking only."""

    kind: str
    margin: float = 1.0

    def __post_init__(self):
        if self.kind not in LOSS_NAMES:
            raise ConfigError(f"unknown loss {self.kind!r}, expected one of {LOSS_NAMES}")
        if self.margin < 0:
            raise ConfigError(f"margin must be non-negative, got {self.margin}")


def margin_loss(f_pos: float, f_neg: float, margin: float) -> float:
    """Hinge on the score gap: ``max(0, margin - f_pos + f_neg)``."""
    return max(0.0, margin - f_pos + f_neg)


def _softplus(x: float) -> float:
    # log(1 + e^x) without overflow for large |x|
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def bce_loss(score: float, label: int) -> float:
    """Binary cross entropy of a logistic unit, in log-sum-exp form.

    Equals ``-(label * log(sigmoid(score)) + (1-label) * log(1-sigmoid(score)))``
    but stays finite for arbitrarily large |score|.
    """
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    return _softplus(score) - label * score


def pair_loss_terms(f_pos: float, f_neg: float, spec: LossSpec) -> tuple[float, float, float]:
    """Loss of one (positive, negative) score pair plus its score derivatives.

    Returns ``(loss, dloss/df_pos, dloss/df_neg)``. On the flat region of
    the hinge (``margin - f_pos + f_neg <= 0``) both derivatives are zero.
    """
    if spec.kind == MARGIN_RANKING:
        gap = spec.margin - f_pos + f_neg
        if math.isnan(gap):
            # max(0, nan) would silently read as an inactive hinge; keep the
            # NaN visible so the training loop can abort
            return gap, 0.0, 0.0
        if gap > 0.0:
            return gap, -1.0, 1.0
        return 0.0, 0.0, 0.0
    loss = bce_loss(f_pos, 1) + bce_loss(f_neg, 0)
    return loss, sigmoid(f_pos) - 1.0, sigmoid(f_neg)
