"""Translation of relevant articles into English through a provider."""

from __future__ import annotations

from .errors import UnsupportedLanguage
from .models import Article
from .providers.base import TranslationProvider, with_retries


def translate(article: Article, provider: TranslationProvider, retries: int = 2) -> Article:
    """Return the article with translated_text set; identity for English.

    UnsupportedLanguage propagates so the caller can quarantine the article
    (never drop it silently); ProviderUnavailable is retried a bounded
    number of times before propagating.
    """
    if article.language == "en":
        return article.with_translation(article.text)
    if article.language not in provider.supported_languages:
        raise UnsupportedLanguage(
            f"provider {provider.name} does not translate {article.language!r}"
        )
    text_en = with_retries(
        lambda: provider.translate(article.text, article.language), retries=retries
    )
    return article.with_translation(text_en)
