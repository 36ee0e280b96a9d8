"""Ranked word importance behind the correct/incorrect word clouds.

Per-token saliency is summed additively into lowercased word buckets,
split by whether the utterance's post-processed prediction was correct.
Additivity makes the totals conserve the ingested saliency mass, which is
the module's main correctness check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import MissingSaliency
from .formats import SaliencyRow
from .syntax import is_word_token


@dataclass(frozen=True)
class WordImportance:
    word: str
    weight: float
    support: int


@dataclass
class WordBuckets:
    weight: dict[str, float]
    support: dict[str, int]

    def top(self, n: int) -> list[WordImportance]:
        ranked = sorted(self.weight.items(), key=lambda kv: (-kv[1], kv[0]))
        return [
            WordImportance(word, weight, self.support[word]) for word, weight in ranked[:n]
        ]


def aggregate_saliency(
    saliency_rows: dict[int, SaliencyRow],
    correctness: dict[int, bool],
    stopwords: frozenset[str],
) -> tuple[WordBuckets, WordBuckets]:
    """Sum token saliency into (correct, incorrect) word buckets.

    Stopwords and pure-punctuation tokens are dropped; support counts the
    distinct utterances that contributed to a word.  Per-word totals use
    exact summation, so the output is independent of utterance order.
    """
    scores: dict[tuple[bool, str], list[float]] = {}
    supports: dict[tuple[bool, str], set[int]] = {}
    for uid, row in saliency_rows.items():
        is_correct = correctness[uid]
        for token, score in zip(row.tokens, row.scores):
            word = token.lower()
            if word in stopwords or not is_word_token(word):
                continue
            key = (is_correct, word)
            scores.setdefault(key, []).append(float(score))
            supports.setdefault(key, set()).add(uid)
    correct = WordBuckets({}, {})
    incorrect = WordBuckets({}, {})
    for (is_correct, word), values in scores.items():
        bucket = correct if is_correct else incorrect
        bucket.weight[word] = math.fsum(values)
        bucket.support[word] = len(supports[(is_correct, word)])
    return correct, incorrect


def top_salient_words(
    saliency_rows: dict[int, SaliencyRow] | None,
    correctness: dict[int, bool],
    stopwords: frozenset[str],
    n: int,
) -> tuple[list[WordImportance], list[WordImportance]]:
    """Top-n words for correct and incorrect predictions over a
    population; ties rank lexicographically."""
    if saliency_rows is None:
        raise MissingSaliency("no saliency table loaded for this split and pipeline")
    correct, incorrect = aggregate_saliency(saliency_rows, correctness, stopwords)
    return correct.top(n), incorrect.top(n)
