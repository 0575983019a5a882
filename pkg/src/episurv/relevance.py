"""Relevance gates: binary classification and the disease+location filter.

Classification runs on source-language text (before translation); the
entity gate runs on English text after translation. The entity gate keeps
an article only when it mentions both a known disease and an Indian
location, and records what it found for the extraction stage.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import UnsupportedInput
from .gazetteer import Gazetteer, LocationMention
from .models import Article, collapse_ws
from .providers.base import ClassifierProvider, NerProvider

RELEVANT = "relevant"
IRRELEVANT = "irrelevant"


@dataclass(frozen=True)
class RelevanceResult:
    label: str
    score: float


def classify_relevance(article: Article, provider: ClassifierProvider) -> RelevanceResult:
    """Label relevant iff the provider's score clears its threshold."""
    if not collapse_ws(article.text):
        raise UnsupportedInput("article has no text to classify")
    score = provider.score(article.text, article.language)
    label = RELEVANT if score >= provider.threshold else IRRELEVANT
    return RelevanceResult(label=label, score=score)


@dataclass
class DiseaseLexicon:
    """Casefolded surface -> canonical disease name, word-boundary matched."""

    entries: dict[str, str]
    _pattern: re.Pattern | None = field(init=False, repr=False, default=None)

    def __post_init__(self) -> None:
        cleaned = {}
        for surface, canonical in self.entries.items():
            key = collapse_ws(surface).casefold()
            if not key:
                raise ValueError("lexicon contains an empty surface form")
            cleaned[key] = canonical
        self.entries = cleaned
        if cleaned:
            alternation = "|".join(
                re.escape(s) for s in sorted(cleaned, key=len, reverse=True)
            )
            self._pattern = re.compile(rf"\b(?:{alternation})\b", re.IGNORECASE)

    @classmethod
    def from_csv(cls, path: str | Path) -> "DiseaseLexicon":
        entries: dict[str, str] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                surface, canonical = row[0], row[1]
                entries[surface] = collapse_ws(canonical)
        return cls(entries)

    def lookup(self, surface: str) -> str | None:
        return self.entries.get(collapse_ws(surface).casefold())

    def find(self, text: str) -> set[str]:
        if self._pattern is None:
            return set()
        return {
            self.entries[collapse_ws(m.group(0)).casefold()]
            for m in self._pattern.finditer(text)
        }


def spot_diseases(
    text: str, lexicon: DiseaseLexicon, ner: NerProvider | None = None
) -> set[str]:
    """Union of lexicon matches and NER spans mapped through the lexicon.

    NER spans absent from the lexicon are returned verbatim so nothing the
    model found is silently lost.
    """
    found = lexicon.find(text)
    if ner is not None:
        for span in ner.spans(text):
            canonical = lexicon.lookup(span)
            found.add(canonical if canonical is not None else collapse_ws(span))
    return found


def spot_locations(text: str, gazetteer: Gazetteer) -> list[LocationMention]:
    """All gazetteer matches with their candidate node sets."""
    return gazetteer.spot(text)


@dataclass(frozen=True)
class GateResult:
    """Entity-gate decision plus the entities it found, reused downstream."""

    keep: bool
    diseases: frozenset[str]
    locations: tuple[LocationMention, ...]

    def pairs(self) -> list[tuple[str, str]]:
        """(disease, location surface) cross-product for template extraction."""
        return [
            (disease, mention.surface)
            for disease in sorted(self.diseases)
            for mention in self.locations
        ]


def entity_gate(
    article: Article,
    lexicon: DiseaseLexicon,
    gazetteer: Gazetteer,
    ner: NerProvider | None = None,
) -> GateResult:
    """Keep iff the English text names both a disease and an Indian location."""
    text = article.english_text
    diseases = spot_diseases(text, lexicon, ner)
    locations = spot_locations(text, gazetteer)
    return GateResult(
        keep=bool(diseases) and bool(locations),
        diseases=frozenset(diseases),
        locations=tuple(locations),
    )
