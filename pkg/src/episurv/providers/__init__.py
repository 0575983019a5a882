"""Provider contracts, deterministic fakes, HTTP clients and record/replay."""

from .base import (
    ChatProvider,
    ClassifierProvider,
    EmbeddingProvider,
    Message,
    NerProvider,
    NliProvider,
    QaAnswer,
    QaProvider,
    TranslationProvider,
    with_retries,
)
from .fakes import (
    EchoTranslator,
    HashedNgramEmbedder,
    IdentityTranslator,
    KeywordClassifier,
    LexiconNer,
    OverlapNli,
    PatternQa,
    ScriptedChat,
    TableNli,
    TableQa,
    TableTranslator,
)
from .replay import RecordingChatProvider, ReplayChatProvider, request_hash

__all__ = [
    "ChatProvider",
    "ClassifierProvider",
    "EchoTranslator",
    "EmbeddingProvider",
    "HashedNgramEmbedder",
    "IdentityTranslator",
    "KeywordClassifier",
    "LexiconNer",
    "Message",
    "NerProvider",
    "NliProvider",
    "OverlapNli",
    "PatternQa",
    "QaAnswer",
    "QaProvider",
    "RecordingChatProvider",
    "ReplayChatProvider",
    "ScriptedChat",
    "TableNli",
    "TableQa",
    "TableTranslator",
    "TranslationProvider",
    "request_hash",
    "with_retries",
]
