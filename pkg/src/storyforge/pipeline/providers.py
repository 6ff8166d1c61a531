"""Pluggable generation backends: text, image, and embedding providers.

Every request is a structured value with a stable content digest, so any
provider can be swapped for a deterministic replay mock keyed by that digest.
Providers must be safe to call from multiple threads.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Any, Mapping, Protocol

import numpy as np


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest_of(value: Any) -> str:
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TextRequest:
    """One structured-completion request.

    ``payload`` carries the machine-readable slots that were rendered into
    ``prompt``; ``schema_id`` names the response schema the output must obey.
    """

    stage: str
    prompt: str
    payload: Mapping[str, Any] = field(default_factory=dict)
    schema_id: str = ""

    @property
    def digest(self) -> str:
        return digest_of({"stage": self.stage, "prompt": self.prompt,
                          "payload": dict(self.payload)})


@dataclass(frozen=True)
class ImageRequest:
    """One illustration request; ``reference_images`` are content-addressed refs."""

    section_id: str
    prompt: str
    reference_images: tuple[str, ...] = ()

    @property
    def digest(self) -> str:
        return digest_of({"section_id": self.section_id, "prompt": self.prompt,
                          "reference_images": list(self.reference_images)})


class ProviderError(RuntimeError):
    """Transport-level provider failure (timeouts, refusals, outages)."""


class ResponseParseError(ValueError):
    """The provider answered, but not in the declared response shape."""


class TextProvider(Protocol):
    def complete(self, request: TextRequest) -> dict: ...


class ImageProvider(Protocol):
    def generate(self, request: ImageRequest) -> str: ...


class EmbeddingProvider(Protocol):
    def embed(self, text: str) -> np.ndarray: ...


@dataclass
class ProviderSuite:
    text: TextProvider
    image: ImageProvider
    embedding: EmbeddingProvider


class LiveTextProvider:
    """Chat-completion client for an OpenAI-compatible endpoint.

    Credentials come from the environment and are only required in live mode:
    ``STORYFORGE_API_KEY`` (required), ``STORYFORGE_API_BASE`` and
    ``STORYFORGE_TEXT_MODEL`` (optional).
    """

    def __init__(self, model: str | None = None, timeout: float = 120.0):
        self.api_key = os.environ.get("STORYFORGE_API_KEY")
        if not self.api_key:
            raise ProviderError(
                "live provider requires STORYFORGE_API_KEY; use the mock provider otherwise"
            )
        self.base_url = os.environ.get("STORYFORGE_API_BASE", "https://api.openai.com/v1")
        self.model = model or os.environ.get("STORYFORGE_TEXT_MODEL", "gpt-4o")
        self.timeout = timeout

    def complete(self, request: TextRequest) -> dict:
        import httpx

        response = httpx.post(
            f"{self.base_url}/chat/completions",
            headers={"Authorization": f"Bearer {self.api_key}"},
            json={
                "model": self.model,
                "messages": [{"role": "user", "content": request.prompt}],
                "response_format": {"type": "json_object"},
            },
            timeout=self.timeout,
        )
        if response.status_code != 200:
            raise ProviderError(f"text provider returned HTTP {response.status_code}")
        try:
            return json.loads(response.json()["choices"][0]["message"]["content"])
        except (KeyError, IndexError, json.JSONDecodeError) as err:
            raise ResponseParseError(f"unparseable completion: {err}") from err


class LiveImageProvider:
    """Image-generation client for an OpenAI-compatible endpoint."""

    def __init__(self, model: str | None = None, output_dir: str | None = None,
                 timeout: float = 300.0):
        self.api_key = os.environ.get("STORYFORGE_API_KEY")
        if not self.api_key:
            raise ProviderError(
                "live provider requires STORYFORGE_API_KEY; use the mock provider otherwise"
            )
        self.base_url = os.environ.get("STORYFORGE_API_BASE", "https://api.openai.com/v1")
        self.model = model or os.environ.get("STORYFORGE_IMAGE_MODEL", "gpt-image-1")
        self.output_dir = output_dir
        self.timeout = timeout

    def generate(self, request: ImageRequest) -> str:
        import base64

        import httpx

        response = httpx.post(
            f"{self.base_url}/images/generations",
            headers={"Authorization": f"Bearer {self.api_key}"},
            json={"model": self.model, "prompt": request.prompt},
            timeout=self.timeout,
        )
        if response.status_code != 200:
            raise ProviderError(f"image provider returned HTTP {response.status_code}")
        payload = response.json()["data"][0]["b64_json"]
        blob = base64.b64decode(payload)
        ref = "img-" + hashlib.sha256(blob).hexdigest()[:16]
        if self.output_dir:
            os.makedirs(self.output_dir, exist_ok=True)
            with open(os.path.join(self.output_dir, f"{ref}.png"), "wb") as fh:
                fh.write(blob)
        return ref


class LiveEmbeddingProvider:
    def __init__(self, model: str | None = None, timeout: float = 60.0):
        self.api_key = os.environ.get("STORYFORGE_API_KEY")
        if not self.api_key:
            raise ProviderError(
                "live provider requires STORYFORGE_API_KEY; use the mock provider otherwise"
            )
        self.base_url = os.environ.get("STORYFORGE_API_BASE", "https://api.openai.com/v1")
        self.model = model or os.environ.get("STORYFORGE_EMBED_MODEL", "text-embedding-3-small")
        self.timeout = timeout

    def embed(self, text: str) -> np.ndarray:
        import httpx

        response = httpx.post(
            f"{self.base_url}/embeddings",
            headers={"Authorization": f"Bearer {self.api_key}"},
            json={"model": self.model, "input": text},
            timeout=self.timeout,
        )
        if response.status_code != 200:
            raise ProviderError(f"embedding provider returned HTTP {response.status_code}")
        return np.asarray(response.json()["data"][0]["embedding"], dtype=np.float64)


def live_suite() -> ProviderSuite:
    return ProviderSuite(
        text=LiveTextProvider(),
        image=LiveImageProvider(),
        embedding=LiveEmbeddingProvider(),
    )
