"""Shared fixtures: reference data, article builders, provider fakes."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import pytest

from episurv.clustering import ThresholdRules
from episurv.gazetteer import Gazetteer
from episurv.llm_extract import PromptConfig
from episurv.mapping import DiseaseSynonymTable
from episurv.models import Article
from episurv.pipeline import PipelineRuntime
from episurv.providers.fakes import (
    HashedNgramEmbedder,
    IdentityTranslator,
    KeywordClassifier,
    OverlapNli,
    PatternQa,
)
from episurv.relevance import DiseaseLexicon
from episurv.store import Store

FIXTURES = Path(__file__).parent / "fixtures"


def make_runtime(store_root, **overrides) -> PipelineRuntime:
    """PipelineRuntime on the fixture reference data and offline fakes."""
    defaults = dict(
        store=Store(store_root),
        classifier=KeywordClassifier(),
        translator=IdentityTranslator(),
        qa=PatternQa.count_extractor(),
        nli=OverlapNli(),
        embedder=HashedNgramEmbedder(),
        lexicon=DiseaseLexicon.from_csv(FIXTURES / "lexicon.csv"),
        gazetteer=Gazetteer.from_csv(FIXTURES / "gazetteer.csv"),
        synonyms=DiseaseSynonymTable.from_files(
            FIXTURES / "synonyms.csv", FIXTURES / "canonical_diseases.txt"
        ),
        rules=ThresholdRules.bundled(),
        prompt_config=PromptConfig.bundled(),
    )
    defaults.update(overrides)
    return PipelineRuntime(**defaults)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def gazetteer() -> Gazetteer:
    return Gazetteer.from_csv(FIXTURES / "gazetteer.csv")


@pytest.fixture(scope="session")
def lexicon() -> DiseaseLexicon:
    return DiseaseLexicon.from_csv(FIXTURES / "lexicon.csv")


@pytest.fixture()
def synonym_table() -> DiseaseSynonymTable:
    return DiseaseSynonymTable.from_files(
        FIXTURES / "synonyms.csv", FIXTURES / "canonical_diseases.txt"
    )


NOW = datetime(2024, 6, 21, 12, 0, 0, tzinfo=timezone.utc)


def build_article(
    text: str,
    url: str = "https://news.example.in/story",
    language: str = "en",
    published_at: datetime | None = NOW,
    translated: bool = True,
) -> Article:
    article = Article.build(
        url=url,
        title=text,
        description="",
        language=language,
        fetched_at=NOW,
        published_at=published_at,
    )
    if translated and language == "en":
        article = article.with_translation(article.text)
    return article


@pytest.fixture()
def make_article():
    return build_article


@pytest.fixture(scope="session")
def llm_behavior_cases() -> list[dict]:
    return json.loads((FIXTURES / "llm_behavior_cases.json").read_text(encoding="utf-8"))
