"""Pipeline loading and capability probing.

A pipeline is any object with a ``class_names`` sequence and a
``predict_proba(texts) -> (N, C)`` method.  Optional capabilities
(``predict_proba_stochastic``, ``embed``, ``token_saliency``,
``syntax_flags``) are used when present and replaced by documented
fallbacks otherwise.  Pipelines load from a ``module:attribute`` spec
(the attribute is called if callable) or ``hf:<model>`` when the
transformers stack is installed.
"""

from __future__ import annotations

import hashlib
import importlib
from dataclasses import dataclass, field

import numpy as np


@dataclass
class StubPipeline:
    """Deterministic text-hash classifier used in tests and dry runs."""

    class_names: list[str] = field(
        default_factory=lambda: ["greeting", "weather", "distance", "travel_alert"]
    )
    constant: list[float] | None = None
    stochastic_jitter: float = 0.0

    def _logits(self, text: str) -> np.ndarray:
        digest = hashlib.sha256(text.encode("utf-8")).digest()
        raw = np.frombuffer(digest[: 4 * len(self.class_names)], dtype="<u4")
        return raw.astype(np.float64) / 2**32

    def predict_proba(self, texts: list[str]) -> np.ndarray:
        if self.constant is not None:
            return np.tile(np.asarray(self.constant, dtype=np.float64), (len(texts), 1))
        rows = []
        for text in texts:
            scores = np.exp(self._logits(text) * 4.0)
            rows.append(scores / scores.sum())
        return np.asarray(rows)

    def predict_proba_stochastic(self, texts: list[str], samples: int) -> np.ndarray:
        base = self.predict_proba(texts)
        if self.stochastic_jitter <= 0:
            return np.repeat(base[:, None, :], samples, axis=1)
        out = np.empty((len(texts), samples, len(self.class_names)))
        for i, text in enumerate(texts):
            for m in range(samples):
                digest = hashlib.sha256(f"{text}\x1f{m}".encode("utf-8")).digest()
                noise = np.frombuffer(digest[: 4 * len(self.class_names)], dtype="<u4")
                noisy = base[i] + self.stochastic_jitter * (noise / 2**32)
                out[i, m] = noisy / noisy.sum()
        return out

    def token_saliency(self, texts: list[str]) -> list[tuple[list[str], list[float]]]:
        out = []
        for text in texts:
            tokens = text.split()
            if not tokens:
                out.append(([], []))
                continue
            raw = [1.0 + (len(t) % 5) for t in tokens]
            total = sum(raw)
            out.append((tokens, [s / total for s in raw]))
        return out


def load_pipeline(spec: str):
    """Resolve a pipeline spec: 'module:attribute' or 'hf:<model name>'."""
    if spec.startswith("hf:"):
        return _load_hf_pipeline(spec[3:])
    if spec == "stub":
        return StubPipeline()
    if ":" not in spec:
        raise ValueError(f"pipeline spec {spec!r} must be 'module:attribute', 'hf:<model>', or 'stub'")
    module_name, attribute = spec.split(":", 1)
    module = importlib.import_module(module_name)
    target = getattr(module, attribute)
    pipeline = target() if callable(target) and not hasattr(target, "predict_proba") else target
    if not hasattr(pipeline, "predict_proba") or not hasattr(pipeline, "class_names"):
        raise ValueError(f"{spec!r} does not provide class_names and predict_proba")
    return pipeline


def _load_hf_pipeline(model_name: str):
    try:
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer
    except ImportError as exc:
        raise RuntimeError("hf: pipeline specs need torch and transformers installed") from exc

    tokenizer = AutoTokenizer.from_pretrained(model_name)
    model = AutoModelForSequenceClassification.from_pretrained(model_name)
    model.eval()
    class_names = [model.config.id2label[i] for i in range(model.config.num_labels)]
    return TorchTextPipeline(model, tokenizer, class_names)


class TorchTextPipeline:
    """Wraps a torch sequence classifier; supports gradient saliency and
    MC-dropout sampling when the model carries dropout layers."""

    def __init__(self, model, tokenizer, class_names, batch_size: int = 16):
        self.model = model
        self.tokenizer = tokenizer
        self.class_names = list(class_names)
        self.batch_size = batch_size

    def _batches(self, texts):
        for start in range(0, len(texts), self.batch_size):
            yield texts[start : start + self.batch_size]

    def predict_proba(self, texts):
        import torch

        rows = []
        self.model.eval()
        with torch.no_grad():
            for batch in self._batches(texts):
                encoded = self.tokenizer(
                    batch, return_tensors="pt", padding=True, truncation=True
                )
                probs = torch.softmax(self.model(**encoded).logits, dim=-1)
                rows.append(probs.cpu().numpy())
        return np.concatenate(rows, axis=0).astype(np.float64)

    def predict_proba_stochastic(self, texts, samples):
        import torch

        self.model.train()  # activate dropout
        out = []
        with torch.no_grad():
            for _ in range(samples):
                out.append(self.predict_proba_train_mode(texts))
        self.model.eval()
        return np.stack(out, axis=1)

    def predict_proba_train_mode(self, texts):
        import torch

        rows = []
        with torch.no_grad():
            for batch in self._batches(texts):
                encoded = self.tokenizer(
                    batch, return_tensors="pt", padding=True, truncation=True
                )
                probs = torch.softmax(self.model(**encoded).logits, dim=-1)
                rows.append(probs.cpu().numpy())
        return np.concatenate(rows, axis=0).astype(np.float64)

    def token_saliency(self, texts):
        return [gradient_token_saliency(self.model, self.tokenizer, t) for t in texts]


def gradient_token_saliency(model, tokenizer, text: str) -> tuple[list[str], list[float]]:
    """L1-normalized |gradient . embedding| per input token for the
    predicted class."""
    import torch

    model.eval()
    encoded = tokenizer(text, return_tensors="pt", truncation=True)
    embedding_layer = model.get_input_embeddings()
    embeddings = embedding_layer(encoded["input_ids"]).detach()
    embeddings.requires_grad_(True)
    kwargs = {k: v for k, v in encoded.items() if k != "input_ids"}
    logits = model(inputs_embeds=embeddings, **kwargs).logits
    top = logits[0].argmax()
    logits[0, top].backward()
    scores = (embeddings.grad[0] * embeddings[0]).abs().sum(dim=-1)
    tokens = tokenizer.convert_ids_to_tokens(encoded["input_ids"][0])
    values = scores.detach().cpu().numpy().astype(np.float64)
    total = values.sum()
    if total > 0:
        values = values / total
    return list(tokens), [float(v) for v in values]
