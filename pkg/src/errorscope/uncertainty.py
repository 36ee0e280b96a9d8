"""Confidence-based "almost correct" tags and epistemic uncertainty.

Epistemic scores are computed from ingested stochastic prediction samples
(multiple forward passes per utterance): the disagreement score is the
entropy of the mean prediction minus the mean per-sample entropy, in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TooFewSamples
from .prediction import PostprocessedPrediction


@dataclass(frozen=True)
class EpistemicScore:
    bald: float
    predictive_entropy: float
    sample_count: int


def _entropy(p) -> float:
    """Shannon entropy in nats with 0 * ln 0 = 0; fsum keeps the result
    independent of term order."""
    return -math.fsum(x * math.log(x) for x in p if x > 0)


def epistemic_score(mc_samples: np.ndarray) -> EpistemicScore:
    """Disagreement across M stochastic probability vectors (M >= 2).

    Uses exact summation so permuting the samples cannot change the score.
    """
    samples = np.asarray(mc_samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] < 2:
        raise TooFewSamples("need at least 2 stochastic probability vectors")
    m = samples.shape[0]
    mean = [math.fsum(samples[:, c]) / m for c in range(samples.shape[1])]
    predictive = _entropy(mean)
    expected = math.fsum(_entropy(row) for row in samples) / m
    bald = max(0.0, predictive - expected)
    return EpistemicScore(bald=bald, predictive_entropy=predictive, sample_count=m)


def confidence_tags(
    label: str,
    raw_post: PostprocessedPrediction,
    thresholded_post: PostprocessedPrediction,
    rejection_class: str,
) -> frozenset[str]:
    """Tags for predictions that almost got it right.

    correct_top_3: the label sits at rank 2 or 3 of the raw ranking.
    correct_low_conf: the raw argmax is the label, but thresholding
    rejected it.
    """
    tags = set()
    ranked = raw_post.ranked_classes
    if label in ranked[1:3]:
        tags.add("correct_top_3")
    if (
        ranked
        and ranked[0] == label
        and label != rejection_class
        and thresholded_post.top_class == rejection_class
    ):
        tags.add("correct_low_conf")
    return frozenset(tags)
