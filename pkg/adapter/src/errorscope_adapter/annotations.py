"""Fallback annotators: hashed embeddings and heuristic syntax flags.

Used when the pipeline does not provide its own ``embed`` or
``syntax_flags`` capability.  The embedding is a deterministic hashed
bag-of-words projection (stable across runs and platforms); the syntax
tagger is a small lexicon heuristic, with spaCy used instead when it is
importable and has a model available.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

_WORD = re.compile(r"[a-z0-9']+")

_SUBJECT_WORDS = frozenset(
    "i you he she it we they who what this that my your there someone anyone".split()
)
_VERB_WORDS = frozenset(
    (
        "is are was were be been am do does did have has had can could will would "
        "shall should may might must need want tell show find get set go make take "
        "book cancel transfer check help give send pay order call play open close "
        "turn change update remind schedule spell mean say know think work report"
    ).split()
)
_VERB_SUFFIXES = ("ing", "ed", "ify", "ise", "ize")


def hashed_embedding(texts: list[str], dim: int = 64) -> np.ndarray:
    """Deterministic bag-of-words embedding: each word hashes to a signed
    coordinate; rows are L2-normalized."""
    out = np.zeros((len(texts), dim), dtype=np.float64)
    for i, text in enumerate(texts):
        for word in _WORD.findall(text.lower()):
            digest = hashlib.sha256(word.encode("utf-8")).digest()
            index = int.from_bytes(digest[:4], "little") % dim
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            out[i, index] += sign
        norm = np.linalg.norm(out[i])
        if norm > 0:
            out[i] /= norm
        else:
            out[i, 0] = 1.0
    return out


def _spacy_pipeline():
    try:
        import spacy
    except ImportError:
        return None
    for model in ("en_core_web_sm", "en_core_web_md"):
        try:
            return spacy.load(model)
        except Exception:
            continue
    return None


_SPACY = None
_SPACY_PROBED = False


def syntax_flags(texts: list[str]) -> list[tuple[bool, bool, bool]]:
    """(has_subject, has_verb, has_object) per text."""
    global _SPACY, _SPACY_PROBED
    if not _SPACY_PROBED:
        _SPACY = _spacy_pipeline()
        _SPACY_PROBED = True
    if _SPACY is not None:
        return [_spacy_flags(_SPACY, text) for text in texts]
    return [_heuristic_flags(text) for text in texts]


def _spacy_flags(nlp, text: str) -> tuple[bool, bool, bool]:
    doc = nlp(text)
    deps = {token.dep_ for token in doc}
    has_subject = bool(deps & {"nsubj", "nsubjpass", "csubj", "expl"})
    has_verb = any(token.pos_ in ("VERB", "AUX") for token in doc)
    has_object = bool(deps & {"dobj", "obj", "pobj", "iobj", "attr"})
    return has_subject, has_verb, has_object


def _heuristic_flags(text: str) -> tuple[bool, bool, bool]:
    words = _WORD.findall(text.lower())
    verb_positions = [
        i
        for i, w in enumerate(words)
        if w in _VERB_WORDS or (len(w) > 4 and w.endswith(_VERB_SUFFIXES))
    ]
    has_verb = bool(verb_positions)
    has_subject = any(w in _SUBJECT_WORDS for w in words)
    # crude: anything after the first verb that is not a function word
    has_object = False
    if verb_positions:
        tail = words[verb_positions[0] + 1 :]
        has_object = any(w not in _VERB_WORDS and w not in _SUBJECT_WORDS for w in tail)
    return has_subject, has_verb, has_object
