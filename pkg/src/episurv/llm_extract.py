"""LLM-based event extraction: prompt assembly, response parsing, grounding.

The chat provider sees a fixed system prompt plus few-shot example turns,
then the article text. Responses are parsed tolerantly (code fences,
prose wrappers, single-quoted pseudo-JSON, key spelling variants). An
empty first pass triggers a second, numberless-focused pass as a double
check. Counts that do not occur anywhere in the article text can be
flagged as ungrounded.
"""

from __future__ import annotations

import ast
import json
import logging
import re
from dataclasses import dataclass

from . import asset_text
from .errors import MalformedEvent, UnparseableResponse
from .models import Article, Extractor, RawEvent, collapse_ws, normalize_event
from .providers.base import ChatProvider, Message
from .qa_nli import number_words

log = logging.getLogger(__name__)

ZERO_SHOT = "zero_shot"
FEW_SHOT = "few_shot"

DEFAULT_MAX_RETRIES = 2

_SCHEMA_FIELDS = ("Disease", "Location", "Incident", "Number")


@dataclass(frozen=True)
class FewShotExample:
    input: str
    output: list[dict]


@dataclass(frozen=True)
class PromptConfig:
    """Prompt assets for the extraction chats."""

    system_prompt: str
    numberless_prompt: str
    few_shot: tuple[FewShotExample, ...] = ()
    mode: str = FEW_SHOT

    def __post_init__(self) -> None:
        if self.mode not in {ZERO_SHOT, FEW_SHOT}:
            raise ValueError(f"unknown prompt mode {self.mode!r}")
        if self.mode == FEW_SHOT and not self.few_shot:
            raise ValueError("few_shot mode requires at least one example")
        for fieldname in _SCHEMA_FIELDS:
            if fieldname not in self.system_prompt:
                raise ValueError(f"system prompt does not declare the {fieldname} field")

    @classmethod
    def bundled(cls, mode: str = FEW_SHOT) -> "PromptConfig":
        examples = tuple(
            FewShotExample(input=e["input"], output=e["output"])
            for e in json.loads(asset_text("prompts", "event_extractor_fewshot.json"))
        )
        return cls(
            system_prompt=asset_text("prompts", "event_extractor_system.txt").strip(),
            numberless_prompt=asset_text("prompts", "numberless_system.txt").strip(),
            few_shot=examples,
            mode=mode,
        )


def build_messages(article: Article, cfg: PromptConfig) -> list[Message]:
    """[system, (user, assistant) x few_shot, user(article text)]."""
    messages: list[Message] = [{"role": "system", "content": cfg.system_prompt}]
    if cfg.mode == FEW_SHOT:
        for example in cfg.few_shot:
            messages.append({"role": "user", "content": example.input})
            messages.append(
                {"role": "assistant", "content": json.dumps(example.output, ensure_ascii=False)}
            )
    messages.append({"role": "user", "content": article.english_text})
    return messages


def build_numberless_messages(article: Article, cfg: PromptConfig) -> list[Message]:
    """Second-pass chat: numberless-focused system prompt, no examples."""
    return [
        {"role": "system", "content": cfg.numberless_prompt},
        {"role": "user", "content": article.english_text},
    ]


_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def _candidate_arrays(text: str):
    stripped = text.strip()
    if stripped:
        yield stripped
    for match in _FENCE.finditer(text):
        yield match.group(1).strip()
    start = text.find("[")
    while start != -1:
        depth = 0
        for end in range(start, len(text)):
            if text[end] == "[":
                depth += 1
            elif text[end] == "]":
                depth -= 1
                if depth == 0:
                    yield text[start : end + 1]
                    break
        start = text.find("[", start + 1)


def _loads_any(candidate: str):
    for loader in (json.loads, ast.literal_eval):
        try:
            value = loader(candidate)
        except (ValueError, SyntaxError):
            continue
        if isinstance(value, list):
            return value
        if isinstance(value, dict):
            return [value]
    return None


def recover_json_array(text: str) -> list | None:
    """First JSON array (or bare object, as a 1-list) recoverable from text.

    Tolerates code fences, prose wrappers and single-quoted pseudo-JSON.
    None when nothing array-like parses.
    """
    for candidate in _candidate_arrays(text):
        items = _loads_any(candidate)
        if items is not None:
            return items
    return None


def _lookup(item: dict, kind: str):
    normalized = {collapse_ws(str(k)).casefold(): v for k, v in item.items()}
    if kind == "incident_type":
        for key, value in normalized.items():
            if key.startswith("incident type") or key.startswith("incident_type"):
                return value
        return None
    if kind == "incident":
        for key, value in normalized.items():
            if key.startswith("incident") and "type" not in key:
                return value
        return None
    for key, value in normalized.items():
        if key == kind or key.startswith(f"{kind} ") or key.startswith(f"{kind}("):
            return value
    return None


def parse_event_json(raw: str, article_id: str) -> list[RawEvent]:
    """Events from the first recoverable JSON array in a model response.

    Accepts the key spelling variants models produce ("Incident" vs
    "Incident (case or death)", "Incident Type" vs "Incident type (new or
    total)"); items that cannot be coerced are skipped. Raises
    UnparseableResponse when no array can be recovered at all.
    """
    items = recover_json_array(raw)
    if items is None:
        raise UnparseableResponse("no JSON event array recoverable from response")
    events: list[RawEvent] = []
    for item in items:
        if not isinstance(item, dict):
            log.warning("skipping non-object event item: %r", item)
            continue
        try:
            event = RawEvent(
                disease=str(_lookup(item, "disease") or ""),
                location=str(_lookup(item, "location") or ""),
                incident=_lookup(item, "incident") or "",
                incident_type=_lookup(item, "incident_type"),
                number=_lookup(item, "number"),
                article_id=article_id,
                extractor=Extractor.LLM,
            )
        except MalformedEvent as exc:
            log.warning("skipping malformed event %r: %s", item, exc)
            continue
        events.append(normalize_event(event))
    return events


@dataclass(frozen=True)
class LlmExtraction:
    """Result of the (up to) two-pass LLM extraction."""

    events: tuple[RawEvent, ...]
    parse_failed: bool = False
    double_checked: bool = False


def _attempt_pass(
    messages: list[Message], provider: ChatProvider, article_id: str, max_retries: int
) -> tuple[list[RawEvent], bool]:
    for attempt in range(max_retries + 1):
        text = provider.complete(messages)
        try:
            return parse_event_json(text, article_id), False
        except UnparseableResponse:
            log.warning("unparseable model response (attempt %d)", attempt + 1)
    return [], True


def _drop_international(events: list[RawEvent]) -> list[RawEvent]:
    kept = []
    for event in events:
        if event.location.casefold() == "international":
            log.info("dropping event outside the prompt's location contract: %r", event.disease)
            continue
        kept.append(event)
    return kept


def extract_events_llm(
    article: Article,
    cfg: PromptConfig,
    provider: ChatProvider,
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> LlmExtraction:
    """Two-pass extraction: main prompt, then numberless double check.

    Model-content problems never raise: unparseable responses exhaust
    max_retries and yield an empty result with parse_failed set.
    ProviderUnavailable propagates (retryable by the caller).
    """
    events, parse_failed = _attempt_pass(
        build_messages(article, cfg), provider, article.id, max_retries
    )
    double_checked = False
    if not events and not parse_failed:
        double_checked = True
        events, parse_failed = _attempt_pass(
            build_numberless_messages(article, cfg), provider, article.id, max_retries
        )
    events = _drop_international(events)
    deduped: list[RawEvent] = []
    seen = set()
    for event in events:
        if event.key() not in seen:
            seen.add(event.key())
            deduped.append(event)
    return LlmExtraction(
        events=tuple(deduped), parse_failed=parse_failed, double_checked=double_checked
    )


def _indian_grouping(value: int) -> str:
    digits = str(value)
    if len(digits) <= 3:
        return digits
    head, tail = digits[:-3], digits[-3:]
    parts = []
    while len(head) > 2:
        parts.insert(0, head[-2:])
        head = head[:-2]
    if head:
        parts.insert(0, head)
    return ",".join(parts + [tail])


def verify_grounding(event: RawEvent, article: Article) -> bool:
    """True iff the event's number occurs in the article text.

    Digit, Western-grouped, Indian-grouped and English word forms all
    count. Ungrounded events are for flagging, not dropping.
    """
    if event.number is None:
        raise ValueError("grounding applies to numbered events only")
    haystack = article.text
    if article.translated_text:
        haystack = f"{haystack}\n{article.translated_text}"
    digit_forms = {str(event.number), f"{event.number:,}", _indian_grouping(event.number)}
    for form in digit_forms:
        if re.search(rf"(?<![\d]){re.escape(form)}(?![\d])", haystack):
            return True
    words = number_words(event.number)
    if words is not None:
        pattern = re.escape(words).replace(r"\-", "[-\\s]")
        if re.search(rf"\b{pattern}\b", haystack, re.IGNORECASE):
            return True
    return False
