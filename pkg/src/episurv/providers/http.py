"""HTTP-backed production providers.

Thin clients for the wire protocols the pipeline expects:
  classifier  POST {text, language}            -> {score}
  translator  POST {text, source_language}     -> {text_en}
  embeddings  POST {text}                      -> {vector}
  chat        POST {model, messages, temperature} -> {text}  (or an
              OpenAI-style chat/completions payload)

Credentials come from an environment variable named per provider; none of
these are exercised by the hermetic test suite.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import httpx
import numpy as np

from ..errors import ProviderUnavailable
from .base import Message


def _auth_headers(token_env: str | None) -> dict[str, str]:
    if not token_env:
        return {}
    token = os.environ.get(token_env)
    if not token:
        raise ProviderUnavailable(f"credential variable {token_env} is not set")
    return {"Authorization": f"Bearer {token}"}


def _post(url: str, payload: dict, token_env: str | None, timeout: float) -> dict:
    try:
        response = httpx.post(
            url, json=payload, headers=_auth_headers(token_env), timeout=timeout
        )
        response.raise_for_status()
        return response.json()
    except httpx.HTTPError as exc:
        raise ProviderUnavailable(str(exc)) from exc


@dataclass
class HttpClassifier:
    url: str
    name: str = "http-classifier"
    threshold: float = 0.5
    languages: frozenset[str] | None = None
    token_env: str | None = None
    timeout: float = 30.0

    def supports(self, language: str) -> bool:
        return self.languages is None or language in self.languages

    def score(self, text: str, language: str) -> float:
        body = _post(self.url, {"text": text, "language": language}, self.token_env, self.timeout)
        return float(body["score"])


@dataclass
class HttpTranslator:
    url: str
    name: str = "http-translator"
    supported_languages: frozenset[str] = frozenset(
        {"en", "hi", "te", "kn", "gu", "ta", "pa", "bn", "mr", "ml", "or", "as", "ur"}
    )
    token_env: str | None = None
    timeout: float = 60.0

    def translate(self, text: str, source_language: str) -> str:
        if source_language == "en":
            return text
        body = _post(
            self.url,
            {"text": text, "source_language": source_language},
            self.token_env,
            self.timeout,
        )
        return str(body["text_en"])


@dataclass
class HttpEmbedder:
    url: str
    dimension: int
    name: str = "http-embedder"
    token_env: str | None = None
    timeout: float = 60.0

    def embed(self, text: str) -> np.ndarray:
        body = _post(self.url, {"text": text}, self.token_env, self.timeout)
        vec = np.asarray(body["vector"], dtype=np.float64)
        if vec.shape != (self.dimension,):
            raise ProviderUnavailable(
                f"embedding endpoint returned shape {vec.shape}, expected ({self.dimension},)"
            )
        norm = np.linalg.norm(vec)
        return vec / norm if norm else vec


@dataclass
class HttpChat:
    """OpenAI-compatible chat completion endpoint."""

    url: str
    model: str
    name: str = "http-chat"
    temperature: float = 0.0
    token_env: str | None = "EPISURV_CHAT_TOKEN"
    timeout: float = 120.0
    extra_headers: dict[str, str] = field(default_factory=dict)

    def complete(self, messages: list[Message]) -> str:
        payload = {
            "model": self.model,
            "messages": list(messages),
            "temperature": self.temperature,
        }
        body = _post(self.url, payload, self.token_env, self.timeout)
        if "text" in body:
            return str(body["text"])
        try:
            return str(body["choices"][0]["message"]["content"])
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailable(f"unexpected chat payload: {exc}") from exc
