"""Provider contracts for every model the pipeline calls.

Production inference (classifiers, translation, QA/NLI, chat LLMs,
sentence embeddings, NER) lives behind these interfaces; the pipeline
never imports a model runtime. All providers must be deterministic for
fixed provider state.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence, TypeVar, runtime_checkable

import numpy as np

from ..errors import ProviderUnavailable

#: Chat message: {"role": "system"|"user"|"assistant", "content": str}
Message = dict[str, str]


@runtime_checkable
class ClassifierProvider(Protocol):
    name: str
    threshold: float

    def score(self, text: str, language: str) -> float:
        """Relevance score in [0, 1]."""
        ...

    def supports(self, language: str) -> bool: ...


@runtime_checkable
class TranslationProvider(Protocol):
    name: str
    supported_languages: frozenset[str]

    def translate(self, text: str, source_language: str) -> str:
        """English rendering of text; identity when already English."""
        ...


@dataclass(frozen=True)
class QaAnswer:
    span: str
    confidence: float


@runtime_checkable
class QaProvider(Protocol):
    name: str

    def answer(self, question: str, context: str) -> QaAnswer | None: ...


@runtime_checkable
class NliProvider(Protocol):
    name: str

    def entail(self, premise: str, hypothesis: str) -> float:
        """Entailment score in [0, 1]."""
        ...


@runtime_checkable
class ChatProvider(Protocol):
    name: str
    model: str
    temperature: float

    def complete(self, messages: Sequence[Message]) -> str: ...


@runtime_checkable
class EmbeddingProvider(Protocol):
    name: str
    dimension: int

    def embed(self, text: str) -> np.ndarray:
        """Unit-normalized vector of length dimension."""
        ...


@runtime_checkable
class NerProvider(Protocol):
    name: str

    def spans(self, text: str) -> list[str]: ...


T = TypeVar("T")


def with_retries(
    call: Callable[[], T],
    retries: int = 2,
    backoff: float = 0.05,
    sleep: Callable[[float], None] = time.sleep,
) -> T:
    """Run call, retrying ProviderUnavailable up to retries times."""
    attempt = 0
    while True:
        try:
            return call()
        except ProviderUnavailable:
            if attempt >= retries:
                raise
            sleep(backoff * (2**attempt))
            attempt += 1
