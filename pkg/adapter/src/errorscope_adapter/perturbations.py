"""Perturbation generation matching the engine's documented registry.

The (id, test_name) keys of exported perturbed-prediction tables must
line up with engine-generated variants, so this module reproduces the
registry rules and the seeded typo draws bit for bit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .prng import ContractRng

PUNCTUATION = frozenset(".,!?;:'\"()")
PUNCTUATION_FAMILY = "punctuation"
FUZZY_FAMILY = "fuzzy_matching"

_FIRST_CHUNK = re.compile(r"\S+")


@dataclass(frozen=True)
class Variant:
    id: int
    family: str
    test_name: str
    perturbed_text: str


def _punctuation_edits(text: str) -> list[tuple[str, str]]:
    edits: list[tuple[str, str]] = []
    ends_punct = bool(text) and text[-1] in PUNCTUATION
    if not ends_punct:
        edits.append(("ending_period_add", text + "."))
        edits.append(("ending_question", text + "?"))
    elif text[-1] != "?":
        edits.append(("ending_question", text[:-1] + "?"))
    stripped = text.rstrip("".join(PUNCTUATION))
    if stripped != text and stripped:
        edits.append(("ending_strip", stripped))
    match = _FIRST_CHUNK.match(text)
    if match and match.end() < len(text) and text[match.end():].strip():
        edits.append(("inner_comma", text[: match.end()] + "," + text[match.end():]))
    return edits


def _typo_swap(text: str, rng: ContractRng) -> str | None:
    candidates = []
    for m in re.finditer(r"\S+", text):
        chunk = m.group()
        lead = 0
        while lead < len(chunk) and chunk[lead] in PUNCTUATION:
            lead += 1
        trail = len(chunk)
        while trail > lead and chunk[trail - 1] in PUNCTUATION:
            trail -= 1
        core = chunk[lead:trail]
        if len(core) < 4:
            continue
        pairs = [p for p in range(1, len(core) - 2) if core[p] != core[p + 1]]
        if pairs:
            candidates.append((m.start() + lead, pairs))
    if not candidates:
        return None
    start, pairs = candidates[rng.below(len(candidates))]
    p = pairs[rng.below(len(pairs))]
    i = start + p
    return text[:i] + text[i + 1] + text[i] + text[i + 2:]


def generate_variants(text: str, utterance_id: int, seed: int, n_typo_variants: int) -> list[Variant]:
    base = text.strip()
    variants = [
        Variant(utterance_id, PUNCTUATION_FAMILY, name, edited)
        for name, edited in _punctuation_edits(base)
        if edited != base
    ]
    for i in range(n_typo_variants):
        rng = ContractRng(seed, utterance_id, i)
        edited = _typo_swap(base, rng)
        if edited is not None and edited != base:
            variants.append(Variant(utterance_id, FUZZY_FAMILY, f"typo_swap_{i + 1}", edited))
    return variants
