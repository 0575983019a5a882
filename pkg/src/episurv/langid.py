"""Character n-gram language identification for the 13 supported languages.

Profiles are trained at load time from small seed corpora bundled with the
package; scoring is cosine similarity between n-gram frequency vectors.
Deterministic for fixed profiles. Texts that resemble no profile (floor on
the best score) come back as "other".
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from . import asset_path
from .errors import EmptyText
from .models import SUPPORTED_LANGUAGES, collapse_ws

OTHER = "other"

_NGRAM_SIZES = (1, 2, 3)


@dataclass(frozen=True)
class LanguageGuess:
    language: str
    confidence: float


def _ngrams(text: str) -> Counter:
    text = " " + collapse_ws(text).casefold() + " "
    counts: Counter = Counter()
    for size in _NGRAM_SIZES:
        for i in range(len(text) - size + 1):
            gram = text[i : i + size]
            if gram.strip():  # whitespace-only grams carry no signal
                counts[gram] += 1
    return counts


def _cosine(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    dot = sum(count * b[gram] for gram, count in a.items())
    if dot == 0:
        return 0.0
    norm_a = math.sqrt(sum(c * c for c in a.values()))
    norm_b = math.sqrt(sum(c * c for c in b.values()))
    return dot / (norm_a * norm_b)


class LanguageIdentifier:
    """Nearest-profile classifier over character n-grams."""

    def __init__(self, profiles: dict[str, Counter], floor: float = 0.25):
        self.profiles = profiles
        self.floor = floor

    @classmethod
    def from_corpora(cls, corpora: dict[str, str], floor: float = 0.25) -> "LanguageIdentifier":
        return cls({lang: _ngrams(text) for lang, text in corpora.items()}, floor=floor)

    def identify(self, text: str) -> LanguageGuess:
        """Most probable supported language, or "other" below the floor."""
        if not collapse_ws(text):
            raise EmptyText("cannot identify the language of empty text")
        grams = _ngrams(text)
        scored = sorted(
            ((lang, _cosine(grams, profile)) for lang, profile in self.profiles.items()),
            key=lambda item: (-item[1], item[0]),
        )
        best_lang, best_score = scored[0]
        if best_score < self.floor:
            return LanguageGuess(OTHER, best_score)
        return LanguageGuess(best_lang, best_score)


@lru_cache(maxsize=1)
def bundled_identifier() -> LanguageIdentifier:
    """Identifier trained on the seed corpora shipped with the package."""
    corpora = {}
    for lang in sorted(SUPPORTED_LANGUAGES):
        corpora[lang] = asset_path("langid", f"{lang}.txt").read_text(encoding="utf-8")
    return LanguageIdentifier.from_corpora(corpora)


def identify_language(text: str) -> LanguageGuess:
    """Identify with the bundled profiles (provider hook: pass your own
    LanguageIdentifier to ingest instead)."""
    return bundled_identifier().identify(text)
