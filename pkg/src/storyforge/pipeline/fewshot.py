"""Few-shot example bank for the translation stage.

The bank holds source/translated section pairs; each source text is embedded
once at load time. Selection ranks bank entries by cosine similarity against
the query embedding, breaking ties by bank index so runs are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .providers import EmbeddingProvider


@dataclass(frozen=True, eq=False)
class FewShotSample:
    source: str
    translated: str
    embedding: np.ndarray


class FewShotBank:
    """Immutable after load; size and embedding dimension are fixed."""

    def __init__(self, samples: list[FewShotSample]):
        if samples:
            dims = {s.embedding.shape for s in samples}
            if len(dims) != 1:
                raise ValueError(f"bank embeddings must share one dimension, got {dims}")
        self._samples = tuple(samples)
        self._matrix = (
            np.stack([s.embedding for s in samples])
            if samples else np.zeros((0, 0), dtype=np.float64)
        )

    def __len__(self) -> int:
        return len(self._samples)

    @property
    def samples(self) -> tuple[FewShotSample, ...]:
        return self._samples

    @classmethod
    def from_pairs(cls, pairs: list[dict], embedder: EmbeddingProvider) -> "FewShotBank":
        samples = [
            FewShotSample(
                source=p["source"],
                translated=p["translated"],
                embedding=np.asarray(embedder.embed(p["source"]), dtype=np.float64),
            )
            for p in pairs
        ]
        return cls(samples)

    @classmethod
    def load(cls, path: str | Path, embedder: EmbeddingProvider) -> "FewShotBank":
        pairs = json.loads(Path(path).read_text("utf-8"))["pairs"]
        return cls.from_pairs(pairs, embedder)

    @classmethod
    def bundled(cls, embedder: EmbeddingProvider) -> "FewShotBank":
        text = resources.files(__package__).joinpath("data/translation_bank.json").read_text("utf-8")
        return cls.from_pairs(json.loads(text)["pairs"], embedder)


def cosine_similarities(bank: FewShotBank, query: np.ndarray) -> np.ndarray:
    if len(bank) == 0:
        return np.zeros(0, dtype=np.float64)
    query = np.asarray(query, dtype=np.float64)
    matrix = bank._matrix
    norms = np.linalg.norm(matrix, axis=1) * np.linalg.norm(query)
    norms[norms == 0.0] = 1.0
    return matrix @ query / norms


def select_samples(bank: FewShotBank, query: np.ndarray, k: int) -> list[FewShotSample]:
    """The ``k`` most similar samples, ordered best first; ties keep bank order."""
    if k <= 0 or len(bank) == 0:
        return []
    sims = cosine_similarities(bank, query)
    order = sorted(range(len(bank)), key=lambda i: (-sims[i], i))
    return [bank.samples[i] for i in order[: min(k, len(bank))]]
