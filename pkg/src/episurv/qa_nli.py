"""Template-driven event extraction with extractive QA and NLI providers.

Questions and hypotheses are generated from (disease, location) pairs by
slot substitution into fixed template sets shipped as text assets. QA
answers yield numbered events; when an article produces none, entailment
over hypothesis templates yields numberless events.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import asset_text
from .models import Article, Extractor, Incident, IncidentType, RawEvent, normalize_event
from .providers.base import NliProvider, QaProvider

log = logging.getLogger(__name__)

DISEASE_SLOT = "DISEASE"
LOCATION_SLOT = "LOCATION"

#: Incident/incident-type implied by each question category.
QUESTION_CATEGORY_EVENTS = {
    "new_cases": (Incident.CASE, IncidentType.NEW),
    "new_deaths": (Incident.DEATH, IncidentType.NEW),
    "total_cases": (Incident.CASE, IncidentType.TOTAL),
    "total_deaths": (Incident.DEATH, IncidentType.TOTAL),
}

HYPOTHESIS_CATEGORY_EVENTS = {
    "cases": Incident.CASE,
    "deaths": Incident.DEATH,
}

_QUESTION_COUNTS = {"new_cases": 7, "new_deaths": 6, "total_cases": 4, "total_deaths": 5}
_HYPOTHESIS_COUNTS = {"cases": 16, "deaths": 6}

#: Entailment must be strictly greater than this to yield a numberless event.
ENTAILMENT_THRESHOLD = 0.5

DEFAULT_CONFIDENCE_FLOOR = 0.3


def _parse_sections(text: str) -> dict[str, tuple[str, ...]]:
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = sections.setdefault(line[1:-1], [])
        elif current is not None:
            current.append(line)
    return {name: tuple(lines) for name, lines in sections.items()}


def _validate_templates(
    sections: dict[str, tuple[str, ...]], expected_counts: dict[str, int], label: str
) -> None:
    if set(sections) != set(expected_counts):
        raise ValueError(f"{label} categories must be exactly {sorted(expected_counts)}")
    for category, templates in sections.items():
        if len(templates) != expected_counts[category]:
            raise ValueError(
                f"{label} category {category} must hold {expected_counts[category]} "
                f"templates, got {len(templates)}"
            )
        for template in templates:
            if DISEASE_SLOT not in template or LOCATION_SLOT not in template:
                raise ValueError(f"{label} template missing a slot: {template!r}")


@dataclass(frozen=True)
class QuestionTemplateSet:
    categories: dict[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        _validate_templates(self.categories, _QUESTION_COUNTS, "question")

    @classmethod
    def from_text(cls, text: str) -> "QuestionTemplateSet":
        return cls(_parse_sections(text))

    @classmethod
    def bundled(cls) -> "QuestionTemplateSet":
        return cls.from_text(asset_text("questions.txt"))


@dataclass(frozen=True)
class HypothesisTemplateSet:
    categories: dict[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        _validate_templates(self.categories, _HYPOTHESIS_COUNTS, "hypothesis")

    @classmethod
    def from_text(cls, text: str) -> "HypothesisTemplateSet":
        return cls(_parse_sections(text))

    @classmethod
    def bundled(cls) -> "HypothesisTemplateSet":
        return cls.from_text(asset_text("hypotheses.txt"))


def _substitute(template: str, disease: str, location: str) -> str:
    return template.replace(DISEASE_SLOT, disease).replace(LOCATION_SLOT, location)


def generate_questions(
    disease: str, location: str, templates: QuestionTemplateSet | None = None
) -> list[tuple[str, str]]:
    """All 22 (category, question) pairs for the pair, in template order."""
    if not disease or not location:
        raise ValueError("disease and location slots must be non-empty")
    templates = templates or QuestionTemplateSet.bundled()
    return [
        (category, _substitute(template, disease, location))
        for category in ("new_cases", "new_deaths", "total_cases", "total_deaths")
        for template in templates.categories[category]
    ]


def generate_hypotheses(
    disease: str, location: str, templates: HypothesisTemplateSet | None = None
) -> list[tuple[str, str]]:
    """All 22 (category, hypothesis) pairs for the pair, in template order."""
    if not disease or not location:
        raise ValueError("disease and location slots must be non-empty")
    templates = templates or HypothesisTemplateSet.bundled()
    return [
        (category, _substitute(template, disease, location))
        for category in ("cases", "deaths")
        for template in templates.categories[category]
    ]


_UNITS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
    "eleven": 11, "twelve": 12, "thirteen": 13, "fourteen": 14,
    "fifteen": 15, "sixteen": 16, "seventeen": 17, "eighteen": 18,
    "nineteen": 19,
}
_TENS = {
    "twenty": 20, "thirty": 30, "forty": 40, "fifty": 50,
    "sixty": 60, "seventy": 70, "eighty": 80, "ninety": 90,
}

_DIGIT_RUN = re.compile(r"\d(?:[\d,]*\d)?")
_WORD_NUMBER = re.compile(
    r"\b(?:(?P<tens>%s)(?:[-\s](?P<unit>%s))?|(?P<lone>%s))\b"
    % (
        "|".join(_TENS),
        "|".join(k for k, v in _UNITS.items() if 1 <= v <= 9),
        "|".join(_UNITS),
    ),
    re.IGNORECASE,
)


def parse_number(span: str) -> int | None:
    """First number in a QA answer span, or None.

    Handles Western and Indian digit grouping ("5,31,814" -> 531814) and
    English number words up to ninety-nine ("Four" -> 4).
    """
    match = _DIGIT_RUN.search(span)
    if match:
        return int(match.group(0).replace(",", ""))
    match = _WORD_NUMBER.search(span)
    if match:
        if match.group("lone") is not None:
            return _UNITS[match.group("lone").lower()]
        value = _TENS[match.group("tens").lower()]
        if match.group("unit"):
            value += _UNITS[match.group("unit").lower()]
        return value
    return None


def number_words(value: int) -> str | None:
    """English words for 0..99 (the inverse of parse_number's word range)."""
    if not 0 <= value <= 99:
        return None
    units_by_value = {v: k for k, v in _UNITS.items()}
    if value in units_by_value:
        return units_by_value[value]
    tens_by_value = {v: k for k, v in _TENS.items()}
    tens, unit = divmod(value, 10)
    word = tens_by_value[tens * 10]
    return f"{word}-{units_by_value[unit]}" if unit else word


@dataclass(frozen=True)
class _Answer:
    number: int
    confidence: float


def arbitrate(answers: Iterable[_Answer]) -> _Answer | None:
    """Highest-confidence answer wins; equal-confidence ties keep the
    larger count (and are logged)."""
    answers = list(answers)
    if not answers:
        return None
    best = max(answers, key=lambda a: (a.confidence, a.number))
    tied = {a.number for a in answers if a.confidence == best.confidence}
    if len(tied) > 1:
        log.info("tie at confidence %.3f between %s; keeping %d", best.confidence,
                 sorted(tied), best.number)
    return best


def extract_numbered(
    article: Article,
    pairs: Sequence[tuple[str, str]],
    qa: QaProvider,
    templates: QuestionTemplateSet | None = None,
    confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR,
) -> list[RawEvent]:
    """At most one numbered event per (pair, category), best answer winning."""
    templates = templates or QuestionTemplateSet.bundled()
    context = article.english_text
    events: list[RawEvent] = []
    for disease, location in pairs:
        questions = generate_questions(disease, location, templates)
        for category, (incident, incident_type) in QUESTION_CATEGORY_EVENTS.items():
            answers: list[_Answer] = []
            for cat, question in questions:
                if cat != category:
                    continue
                try:
                    answer = qa.answer(question, context)
                except Exception as exc:  # noqa: BLE001 - per-question best effort
                    log.warning("QA failed on %r: %s", question, exc)
                    continue
                if answer is None or answer.confidence < confidence_floor:
                    continue
                number = parse_number(answer.span)
                if number is None:
                    continue
                answers.append(_Answer(number=number, confidence=answer.confidence))
            best = arbitrate(answers)
            if best is not None:
                events.append(
                    RawEvent(
                        disease=disease,
                        location=location,
                        incident=incident,
                        incident_type=incident_type,
                        number=best.number,
                        article_id=article.id,
                        extractor=Extractor.QA_NLI,
                        confidence=best.confidence,
                    )
                )
    return _dedupe(events)


def extract_numberless(
    article: Article,
    pairs: Sequence[tuple[str, str]],
    nli: NliProvider,
    templates: HypothesisTemplateSet | None = None,
) -> list[RawEvent]:
    """Numberless events for hypotheses entailed strictly above 0.5.

    Only reachable when numbered extraction came back empty for the
    article; extract_events_qa_nli enforces that ordering.
    """
    templates = templates or HypothesisTemplateSet.bundled()
    premise = article.english_text
    events: list[RawEvent] = []
    for disease, location in pairs:
        hypotheses = generate_hypotheses(disease, location, templates)
        for category, incident in HYPOTHESIS_CATEGORY_EVENTS.items():
            best = 0.0
            for cat, hypothesis in hypotheses:
                if cat != category:
                    continue
                try:
                    score = nli.entail(premise, hypothesis)
                except Exception as exc:  # noqa: BLE001 - per-hypothesis best effort
                    log.warning("NLI failed on %r: %s", hypothesis, exc)
                    continue
                best = max(best, score)
            if best > ENTAILMENT_THRESHOLD:
                events.append(
                    RawEvent(
                        disease=disease,
                        location=location,
                        incident=incident,
                        incident_type=IncidentType.UNSPECIFIED,
                        number=None,
                        article_id=article.id,
                        extractor=Extractor.QA_NLI,
                        confidence=best,
                    )
                )
    return _dedupe(events)


def _dedupe(events: Iterable[RawEvent]) -> list[RawEvent]:
    seen: set[tuple] = set()
    unique: list[RawEvent] = []
    for event in (normalize_event(e) for e in events):
        if event.key() not in seen:
            seen.add(event.key())
            unique.append(event)
    return unique


def extract_events_qa_nli(
    article: Article,
    pairs: Sequence[tuple[str, str]],
    qa: QaProvider,
    nli: NliProvider,
    question_templates: QuestionTemplateSet | None = None,
    hypothesis_templates: HypothesisTemplateSet | None = None,
    confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR,
) -> list[RawEvent]:
    """Numbered events when any exist, else numberless events."""
    numbered = extract_numbered(article, pairs, qa, question_templates, confidence_floor)
    if numbered:
        return numbered
    return extract_numberless(article, pairs, nli, hypothesis_templates)
