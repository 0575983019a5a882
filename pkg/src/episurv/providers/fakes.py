"""Deterministic offline providers.

These are not mocks: they are transparent, inspectable implementations
that make the full pipeline runnable and testable with no model runtime
or network. Production deployments swap in the HTTP providers.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ProviderUnavailable, UnsupportedLanguage
from ..models import collapse_ws
from .base import Message, QaAnswer

_DEFAULT_EVENT_TERMS = (
    "die", "dies", "died", "death", "deaths", "dead",
    "case", "cases", "infected", "infections", "outbreak",
    "admitted", "hospitalised", "hospitalized", "detected",
    "positive", "ill", "sick", "spread", "spreading", "rise", "rising",
    "toll", "reported",
)

_DEFAULT_INFO_TERMS = (
    "what is", "how does", "ways to", "tips", "prevention", "prevent",
    "symptoms", "treatment options", "stay safe", "explainer", "faq",
    "guidelines", "awareness",
)


@dataclass
class KeywordClassifier:
    """Transparent relevance scorer: event terms up, info terms down.

    Scores 0.5 baseline + 0.12 per event-term hit - 0.2 per info-term hit,
    clamped to [0, 1]. Term lists are per-deployment configuration.
    """

    name: str = "keyword-classifier"
    threshold: float = 0.5
    event_terms: tuple[str, ...] = _DEFAULT_EVENT_TERMS
    info_terms: tuple[str, ...] = _DEFAULT_INFO_TERMS
    languages: frozenset[str] | None = None

    def supports(self, language: str) -> bool:
        return self.languages is None or language in self.languages

    def score(self, text: str, language: str) -> float:
        if not self.supports(language):
            raise UnsupportedLanguage(f"{self.name} does not cover {language!r}")
        lowered = f" {collapse_ws(text).casefold()} "
        pos = sum(1 for term in self.event_terms if re.search(rf"\b{re.escape(term)}\b", lowered))
        neg = sum(1 for term in self.info_terms if term in lowered)
        return min(1.0, max(0.0, 0.5 + 0.12 * pos - 0.2 * neg))


@dataclass
class IdentityTranslator:
    """English-only provider: translate(text, en) == text."""

    name: str = "identity-translator"
    supported_languages: frozenset[str] = frozenset({"en"})

    def translate(self, text: str, source_language: str) -> str:
        if source_language not in self.supported_languages:
            raise UnsupportedLanguage(f"{self.name} does not cover {source_language!r}")
        return text


@dataclass
class EchoTranslator:
    """Tags text with the language pair; deterministic stand-in for tests."""

    name: str = "echo-translator"
    supported_languages: frozenset[str] = frozenset(
        {"en", "hi", "te", "kn", "gu", "ta", "pa", "bn", "mr", "ml", "or", "as", "ur"}
    )

    def translate(self, text: str, source_language: str) -> str:
        if source_language not in self.supported_languages:
            raise UnsupportedLanguage(f"{self.name} does not cover {source_language!r}")
        if source_language == "en":
            return text
        return f"[{source_language}->en] {text}"


@dataclass
class TableTranslator:
    """Replays recorded translations keyed by exact source text."""

    translations: dict[str, str]
    name: str = "table-translator"
    supported_languages: frozenset[str] = frozenset(
        {"en", "hi", "te", "kn", "gu", "ta", "pa", "bn", "mr", "ml", "or", "as", "ur"}
    )

    def translate(self, text: str, source_language: str) -> str:
        if source_language not in self.supported_languages:
            raise UnsupportedLanguage(f"{self.name} does not cover {source_language!r}")
        if source_language == "en":
            return text
        try:
            return self.translations[text]
        except KeyError:
            raise ProviderUnavailable(
                f"{self.name} has no recorded translation for this text"
            ) from None


@dataclass
class PatternQa:
    """Extractive-QA stand-in driven by (question predicate, context regex) rules.

    The first rule whose terms all occur in the question and whose pattern
    matches the context answers with the first capture group.
    """

    rules: tuple[tuple[tuple[str, ...], str, float], ...] = ()
    name: str = "pattern-qa"

    @classmethod
    def count_extractor(cls) -> "PatternQa":
        """Rules good enough for fixture articles phrased as news headlines."""
        return cls(
            rules=(
                (("new", "deaths"), r"(\d[\d,]*)\s+(?:new\s+)?(?:[\w-]+\s+)?deaths", 0.9),
                (("new", "deaths"), r"(\d[\d,]*)\s+(?:people|persons|patients)?\s*died", 0.85),
                (("total", "deaths"), r"death toll (?:rose|risen|increased|climbed) to (\d[\d,]*)", 0.9),
                (("total", "cases"), r"total (?:of|number of)?\s*(\d[\d,]*)\s+(?:[\w-]+\s+)?cases", 0.9),
                (("total", "cases"), r"tally (?:rose|risen|increased|climbed) to (\d[\d,]*)", 0.85),
                (("new", "cases"), r"(\d[\d,]*)\s+(?:new|fresh)\s+(?:[\w-]+\s+)?(?:cases|infections)", 0.9),
                (("new", "cases"), r"(\d[\d,]*)\s+(?:people|persons|children|villagers)\s+"
                                   r"(?:fell ill|fall ill|taken ill|admitted|hospitalised|hospitalized)", 0.8),
            ),
        )

    def answer(self, question: str, context: str) -> QaAnswer | None:
        q = question.casefold()
        for terms, pattern, confidence in self.rules:
            if all(term in q for term in terms):
                match = re.search(pattern, context, re.IGNORECASE)
                if match:
                    return QaAnswer(span=match.group(1), confidence=confidence)
        return None


@dataclass
class TableQa:
    """Answers from an exact question -> answer table; None when absent."""

    answers: dict[str, QaAnswer]
    name: str = "table-qa"

    def answer(self, question: str, context: str) -> QaAnswer | None:
        return self.answers.get(question)


@dataclass
class OverlapNli:
    """Entailment as stemmed content-word coverage of the hypothesis.

    Death predicates are load-bearing: a premise that never mentions dying
    cannot entail a deaths hypothesis, so those scores cap at the decision
    boundary.
    """

    name: str = "overlap-nli"
    stop_words: frozenset[str] = frozenset(
        {"a", "an", "the", "is", "are", "was", "were", "been", "has", "have",
         "had", "of", "by", "in", "on", "to", "due", "with", "from", "and"}
    )
    death_stems: frozenset[str] = frozenset({"dead", "deat", "die", "died", "dies", "dyin"})

    def _stems(self, text: str) -> set[str]:
        words = re.findall(r"[\w']+", text.casefold())
        return {w[:4] for w in words if w not in self.stop_words}

    def entail(self, premise: str, hypothesis: str) -> float:
        hypo = self._stems(hypothesis)
        if not hypo:
            return 0.0
        prem = self._stems(premise)
        coverage = len(hypo & prem) / len(hypo)
        if hypo & self.death_stems and not prem & self.death_stems:
            return min(coverage, 0.5)
        return coverage


@dataclass
class TableNli:
    """Entailment scores from an exact hypothesis -> score table."""

    scores: dict[str, float]
    default: float = 0.0
    name: str = "table-nli"

    def entail(self, premise: str, hypothesis: str) -> float:
        return self.scores.get(hypothesis, self.default)


@dataclass
class ScriptedChat:
    """Replays a fixed response sequence; raises when the script runs out."""

    responses: list[str]
    name: str = "scripted-chat"
    model: str = "scripted"
    temperature: float = 0.0
    calls: list[Sequence[Message]] = field(default_factory=list)

    def complete(self, messages: Sequence[Message]) -> str:
        self.calls.append(list(messages))
        if not self.responses:
            raise ProviderUnavailable(f"{self.name} script exhausted")
        return self.responses.pop(0)


@dataclass
class HashedNgramEmbedder:
    """Character 3-gram hashing embedder; unit-normalized and deterministic."""

    dimension: int = 256
    name: str = "hashed-ngram-embedder"

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=np.float64)
        padded = f" {collapse_ws(text).casefold()} "
        for i in range(len(padded) - 2):
            gram = padded[i : i + 3]
            digest = zlib.crc32(gram.encode("utf-8"))
            index = digest % self.dimension
            sign = 1.0 if (digest >> 16) & 1 else -1.0
            vec[index] += sign
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            vec[0] = 1.0
            return vec
        return vec / norm


@dataclass
class LexiconNer:
    """NER stand-in that spots a fixed list of surfaces."""

    surfaces: tuple[str, ...]
    name: str = "lexicon-ner"

    def spans(self, text: str) -> list[str]:
        found = []
        for surface in self.surfaces:
            if re.search(rf"\b{re.escape(surface)}\b", text, re.IGNORECASE):
                found.append(surface)
        return found
