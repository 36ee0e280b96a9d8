"""Robustness invariance tests over deterministic text perturbations.

Two families are generated: rule-based punctuation edits and seeded typo
swaps.  Generation is a pure function of (text, seed, utterance id), so
variant lists are byte-identical across runs, platforms, and external
exporters that honor the PRNG contract in ``rng``.

Predictions for perturbed texts come from a pluggable provider: a
pre-exported file table keyed by (id, test_name), or a remote HTTP
endpoint taking newline-delimited JSON strings and answering one JSON
probability vector per line.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Protocol

import numpy as np

from .errors import MissingPerturbedPrediction, ProviderUnavailable
from .prediction import postprocess
from .rng import SplitMix64
from .syntax import PUNCTUATION_CHARS

PUNCTUATION_FAMILY = "punctuation"
FUZZY_FAMILY = "fuzzy_matching"
TYPO_TEST_PREFIX = "typo_swap_"
PROVIDER_BATCH_SIZE = 128

_FIRST_CHUNK = re.compile(r"\S+")


@dataclass(frozen=True)
class PerturbedVariant:
    split: str
    id: int
    family: str
    test_name: str
    perturbed_text: str


@dataclass(frozen=True)
class InvarianceResult:
    variant: PerturbedVariant
    original_class: str
    perturbed_class: str
    confidence_delta: float
    passed: bool


def _ends_with_punctuation(text: str) -> bool:
    return bool(text) and text[-1] in PUNCTUATION_CHARS


def _punctuation_variants(text: str) -> list[tuple[str, str]]:
    variants: list[tuple[str, str]] = []
    if not _ends_with_punctuation(text):
        variants.append(("ending_period_add", text + "."))
    if _ends_with_punctuation(text):
        if text[-1] != "?":
            variants.append(("ending_question", text[:-1] + "?"))
    else:
        variants.append(("ending_question", text + "?"))
    stripped = text.rstrip("".join(PUNCTUATION_CHARS))
    if stripped != text and stripped:
        variants.append(("ending_strip", stripped))
    match = _FIRST_CHUNK.match(text)
    if match and match.end() < len(text) and text[match.end():].strip():
        variants.append(("inner_comma", text[: match.end()] + "," + text[match.end():]))
    return variants


def _chunk_offsets(text: str) -> list[tuple[int, int]]:
    return [(m.start(), m.end()) for m in re.finditer(r"\S+", text)]


def _core_bounds(chunk: str) -> tuple[int, int]:
    lead = 0
    while lead < len(chunk) and chunk[lead] in PUNCTUATION_CHARS:
        lead += 1
    trail = len(chunk)
    while trail > lead and chunk[trail - 1] in PUNCTUATION_CHARS:
        trail -= 1
    return lead, trail


def _typo_variant(text: str, rng: SplitMix64) -> str | None:
    """Swap two adjacent, differing interior characters of one word.

    Eligible words have a punctuation-stripped core of length >= 4 and at
    least one interior adjacent pair of distinct characters.  Two PRNG
    draws per variant: word choice, then pair choice.
    """
    candidates: list[tuple[int, int, list[int]]] = []  # (chunk start, core start, pair starts)
    for start, end in _chunk_offsets(text):
        chunk = text[start:end]
        lead, trail = _core_bounds(chunk)
        core = chunk[lead:trail]
        if len(core) < 4:
            continue
        pairs = [p for p in range(1, len(core) - 2) if core[p] != core[p + 1]]
        if pairs:
            candidates.append((start, lead, pairs))
    if not candidates:
        return None
    start, lead, pairs = candidates[rng.below(len(candidates))]
    p = pairs[rng.below(len(pairs))]
    i = start + lead + p
    return text[:i] + text[i + 1] + text[i] + text[i + 2:]


def generate_perturbations(
    text: str,
    utterance_id: int,
    split: str,
    seed: int,
    n_typo_variants: int = 3,
) -> list[PerturbedVariant]:
    """All perturbed variants for one utterance.

    Operates on the whitespace-trimmed text.  Variants whose precondition
    fails are skipped; no variant ever equals its source text.
    """
    base = text.strip()
    variants = [
        PerturbedVariant(split, utterance_id, PUNCTUATION_FAMILY, name, perturbed)
        for name, perturbed in _punctuation_variants(base)
        if perturbed != base
    ]
    for i in range(n_typo_variants):
        rng = SplitMix64(seed, utterance_id, i)
        perturbed = _typo_variant(base, rng)
        if perturbed is not None and perturbed != base:
            variants.append(
                PerturbedVariant(
                    split, utterance_id, FUZZY_FAMILY, f"{TYPO_TEST_PREFIX}{i + 1}", perturbed
                )
            )
    return variants


class PredictionProvider(Protocol):
    def predict_variants(self, variants: list[PerturbedVariant]) -> list[np.ndarray]:
        ...


class FileBackedProvider:
    """Serves perturbed predictions from an ingested table keyed by
    (utterance id, test name)."""

    def __init__(self, table: dict[tuple[int, str], np.ndarray]):
        self._table = table

    def predict_variants(self, variants: list[PerturbedVariant]) -> list[np.ndarray]:
        out = []
        for v in variants:
            key = (v.id, v.test_name)
            if key not in self._table:
                raise MissingPerturbedPrediction(
                    f"no perturbed prediction for (id={v.id}, test_name={v.test_name!r})"
                )
            out.append(self._table[key])
        return out


def post_texts_to_provider(url: str, texts: list[str], timeout: float = 30.0) -> list[list[float]]:
    """POST newline-delimited JSON strings; expect one JSON probability
    vector per response line."""
    import httpx

    body = "".join(json.dumps(t, ensure_ascii=False) + "\n" for t in texts)
    try:
        response = httpx.post(
            url, content=body.encode("utf-8"),
            headers={"content-type": "application/x-ndjson"}, timeout=timeout,
        )
    except httpx.HTTPError as exc:
        raise ProviderUnavailable(f"provider {url}: {exc}") from exc
    if response.status_code != 200:
        raise ProviderUnavailable(f"provider {url}: HTTP {response.status_code}")
    vectors = []
    for lineno, line in enumerate(response.text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            vectors.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ProviderUnavailable(f"provider {url}: bad line {lineno}: {exc}") from exc
    if len(vectors) != len(texts):
        raise ProviderUnavailable(
            f"provider {url}: sent {len(texts)} texts, got {len(vectors)} vectors"
        )
    return vectors


class RemoteProvider:
    """Fetches perturbed predictions from an HTTP endpoint in bounded
    batches."""

    def __init__(self, url: str, batch_size: int = PROVIDER_BATCH_SIZE):
        self.url = url
        self.batch_size = batch_size

    def predict_variants(self, variants: list[PerturbedVariant]) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for start in range(0, len(variants), self.batch_size):
            batch = variants[start : start + self.batch_size]
            vectors = post_texts_to_provider(self.url, [v.perturbed_text for v in batch])
            out.extend(np.asarray(v, dtype=np.float64) for v in vectors)
        return out


def evaluate_invariance(
    utterances: Iterable,
    base_predictions: np.ndarray,
    provider: PredictionProvider,
    threshold: float,
    rejection_class: str,
    classes: tuple[str, ...],
    seed: int,
    n_typo_variants: int,
    conf_delta_max: float,
) -> list[InvarianceResult]:
    """One result per generated variant; classes are compared after
    thresholding.  A test passes when the class is unchanged and the
    confidence moved by at most conf_delta_max."""
    all_variants: list[PerturbedVariant] = []
    originals = {}
    for u in utterances:
        post = postprocess(base_predictions[u.id], threshold, rejection_class, classes)
        originals[u.id] = post
        all_variants.extend(
            generate_perturbations(u.text, u.id, u.split, seed, n_typo_variants)
        )
    vectors = provider.predict_variants(all_variants)
    results = []
    for variant, probs in zip(all_variants, vectors):
        original = originals[variant.id]
        perturbed = postprocess(probs, threshold, rejection_class, classes)
        delta = perturbed.top_confidence - original.top_confidence
        passed = (
            perturbed.top_class == original.top_class and abs(delta) <= conf_delta_max
        )
        results.append(
            InvarianceResult(
                variant=variant,
                original_class=original.top_class,
                perturbed_class=perturbed.top_class,
                confidence_delta=delta,
                passed=passed,
            )
        )
    return results


@dataclass
class FamilyRate:
    failed: int
    total: int

    @property
    def rate(self) -> float:
        return self.failed / self.total if self.total else 0.0


def behavioral_tags_and_summary(
    results: list[InvarianceResult],
) -> tuple[dict[int, frozenset[str]], dict[str, FamilyRate]]:
    """Per-utterance any-fail tags plus per-family failure rates."""
    failed_by_utterance: dict[int, set[str]] = {}
    family_failed: dict[str, int] = {PUNCTUATION_FAMILY: 0, FUZZY_FAMILY: 0}
    family_total: dict[str, int] = {PUNCTUATION_FAMILY: 0, FUZZY_FAMILY: 0}
    for r in results:
        family = r.variant.family
        family_total[family] = family_total.get(family, 0) + 1
        if not r.passed:
            family_failed[family] = family_failed.get(family, 0) + 1
            failed_by_utterance.setdefault(r.variant.id, set()).add(f"failed_{family}")
    tags = {uid: frozenset(names) for uid, names in failed_by_utterance.items()}
    rates = {
        family: FamilyRate(family_failed.get(family, 0), total)
        for family, total in family_total.items()
    }
    return tags, rates
