"""Shared domain types: articles, events, clusters and review decisions.

Every type is an immutable value object with a canonical JSON rendering,
so records can be hashed, stored and shipped between stages without
coordination. No free-text NLP logic lives here.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timezone
from enum import Enum
from typing import Any
from urllib.parse import parse_qsl, urlencode, urlsplit, urlunsplit

from .errors import MalformedEvent

SUPPORTED_LANGUAGES = frozenset(
    {"en", "hi", "te", "kn", "gu", "ta", "pa", "bn", "mr", "ml", "or", "as", "ur"}
)

#: Sentinel for diseases that cannot be standardized (disease ambiguity).
OTHERS = "Others"

# Query parameters that only track campaigns and never identify content.
_TRACKING_PARAMS = re.compile(r"^(utm_\w+|fbclid|gclid|igshid|mc_cid|mc_eid|ref)$", re.I)

_WS = re.compile(r"\s+")


class Incident(str, Enum):
    CASE = "case"
    DEATH = "death"


class IncidentType(str, Enum):
    NEW = "new"
    TOTAL = "total"
    UNSPECIFIED = "unspecified"


class Extractor(str, Enum):
    QA_NLI = "qa_nli"
    LLM = "llm"


class MappingMethod(str, Enum):
    TABLE = "table"
    LLM = "llm"
    UNMAPPED = "unmapped"


class Decision(str, Enum):
    PENDING = "pending"
    SHORTLISTED = "shortlisted"
    REJECTED = "rejected"


def collapse_ws(text: str) -> str:
    """Trim and collapse any run of whitespace to a single space."""
    return _WS.sub(" ", text).strip()


def compose_text(title: str, description: str) -> str:
    """Join title and description with ". "; an empty side yields the other."""
    title = collapse_ws(title)
    description = collapse_ws(description)
    if not title:
        return description
    if not description:
        return title
    return f"{title}. {description}"


def normalize_url(url: str) -> str:
    """Lowercase scheme/host, drop fragments and tracking query parameters."""
    parts = urlsplit(url.strip())
    query = [(k, v) for k, v in parse_qsl(parts.query, keep_blank_values=True)
             if not _TRACKING_PARAMS.match(k)]
    return urlunsplit((
        parts.scheme.lower(),
        parts.netloc.lower(),
        parts.path,
        urlencode(query),
        "",
    ))


def domain_of(url: str) -> str:
    """Extract the lowercased host of a URL (empty string if there is none)."""
    host = urlsplit(url.strip()).hostname
    return host.lower() if host else ""


def content_id(*parts: str) -> str:
    """Stable content-addressed identifier from the given string parts."""
    digest = hashlib.sha256("\x1f".join(parts).encode("utf-8"))
    return digest.hexdigest()[:16]


def _rfc3339(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC-3339 timestamp into an aware UTC datetime."""
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


@dataclass(frozen=True)
class Article:
    """A fetched news item reduced to its title/description metadata."""

    id: str
    url: str
    domain: str
    fetched_at: datetime
    language: str
    title: str
    description: str
    text: str
    published_at: datetime | None = None
    translated_text: str | None = None

    @classmethod
    def build(
        cls,
        url: str,
        title: str,
        description: str,
        language: str,
        fetched_at: datetime,
        published_at: datetime | None = None,
    ) -> "Article":
        """Construct an article with derived id, domain and composed text."""
        return cls(
            id=content_id(normalize_url(url)),
            url=url,
            domain=domain_of(url),
            fetched_at=fetched_at,
            language=language,
            title=collapse_ws(title),
            description=collapse_ws(description),
            text=compose_text(title, description),
            published_at=published_at,
        )

    @property
    def english_text(self) -> str:
        """Text to feed English-only stages: the translation when present."""
        return self.translated_text if self.translated_text is not None else self.text

    def with_translation(self, text_en: str) -> "Article":
        return replace(self, translated_text=text_en)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "url": self.url,
            "domain": self.domain,
            "published_at": _rfc3339(self.published_at) if self.published_at else None,
            "fetched_at": _rfc3339(self.fetched_at),
            "language": self.language,
            "title": self.title,
            "description": self.description,
            "text": self.text,
            "translated_text": self.translated_text,
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "Article":
        return cls(
            id=d["id"],
            url=d["url"],
            domain=d["domain"],
            published_at=parse_timestamp(d["published_at"]) if d.get("published_at") else None,
            fetched_at=parse_timestamp(d["fetched_at"]),
            language=d["language"],
            title=d["title"],
            description=d["description"],
            text=d["text"],
            translated_text=d.get("translated_text"),
        )


def event_day(article: Article) -> date:
    """Day an article's events belong to: published date, else fetched date."""
    ts = article.published_at or article.fetched_at
    return ts.date()


_INCIDENT_ALIASES = {
    "case": Incident.CASE,
    "cases": Incident.CASE,
    "death": Incident.DEATH,
    "deaths": Incident.DEATH,
}

_TYPE_ALIASES = {
    "new": IncidentType.NEW,
    "total": IncidentType.TOTAL,
    "unspecified": IncidentType.UNSPECIFIED,
    "_": IncidentType.UNSPECIFIED,
    "": IncidentType.UNSPECIFIED,
}


def normalize_incident(value: Incident | str) -> Incident:
    """Coerce an incident spelling to its enum; raise MalformedEvent otherwise."""
    if isinstance(value, Incident):
        return value
    key = collapse_ws(str(value)).casefold()
    try:
        return _INCIDENT_ALIASES[key]
    except KeyError:
        raise MalformedEvent(f"incident not one of case/death: {value!r}") from None


def normalize_incident_type(value: IncidentType | str | None) -> IncidentType:
    """Coerce an incident-type spelling; "_", "" and absent mean unspecified."""
    if isinstance(value, IncidentType):
        return value
    if value is None:
        return IncidentType.UNSPECIFIED
    key = collapse_ws(str(value)).casefold()
    try:
        return _TYPE_ALIASES[key]
    except KeyError:
        raise MalformedEvent(f"incident type not one of new/total: {value!r}") from None


def normalize_number(value: int | str | None) -> int | None:
    """Coerce a count to a non-negative int; "_", "" and absent mean numberless."""
    if value is None:
        return None
    if isinstance(value, bool):
        raise MalformedEvent(f"number is not an integer: {value!r}")
    if isinstance(value, int):
        number = value
    else:
        text = collapse_ws(str(value)).replace(",", "")
        if text in {"", "_"}:
            return None
        try:
            number = int(text)
        except ValueError:
            raise MalformedEvent(f"number is not an integer: {value!r}") from None
    if number < 0:
        raise MalformedEvent(f"number is negative: {number}")
    return number


@dataclass(frozen=True)
class RawEvent:
    """One extracted (disease, location, incident, incident type, number) tuple.

    String spellings for incident/incident type/number are coerced at
    construction so provider outputs can be passed through directly.
    """

    disease: str
    location: str
    incident: Incident
    incident_type: IncidentType
    article_id: str
    extractor: Extractor
    number: int | None = None
    confidence: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "incident", normalize_incident(self.incident))
        object.__setattr__(self, "incident_type", normalize_incident_type(self.incident_type))
        object.__setattr__(self, "number", normalize_number(self.number))
        object.__setattr__(self, "extractor", Extractor(self.extractor))
        if not collapse_ws(self.disease):
            raise MalformedEvent("disease is empty")
        if not collapse_ws(self.location):
            raise MalformedEvent("location is empty")
        if self.incident_type is IncidentType.UNSPECIFIED and self.number is not None:
            raise MalformedEvent("a numbered event cannot have an unspecified incident type")
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            raise MalformedEvent(f"confidence outside [0,1]: {self.confidence}")

    def key(self) -> tuple[str, str, str, str, int | None]:
        """Casefolded comparison key over the full 5-tuple."""
        return (
            collapse_ws(self.disease).casefold(),
            collapse_ws(self.location).casefold(),
            self.incident.value,
            self.incident_type.value,
            self.number,
        )

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "disease": self.disease,
            "location": self.location,
            "incident": self.incident.value,
            "incident_type": self.incident_type.value,
            "number": self.number,
            "article_id": self.article_id,
            "extractor": self.extractor.value,
            "confidence": self.confidence,
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "RawEvent":
        return cls(
            disease=d["disease"],
            location=d["location"],
            incident=d["incident"],
            incident_type=d["incident_type"],
            number=d.get("number"),
            article_id=d["article_id"],
            extractor=d["extractor"],
            confidence=d.get("confidence"),
        )


def normalize_event(raw: RawEvent) -> RawEvent:
    """Collapse whitespace in the free-text fields; idempotent."""
    return replace(
        raw,
        disease=collapse_ws(raw.disease),
        location=collapse_ws(raw.location),
    )


def hierarchy_consistent(state: str, district: str, subdistrict: str) -> bool:
    """A non-blank level requires every level above it to be non-blank."""
    if district and not state:
        return False
    if subdistrict and not district:
        return False
    return True


@dataclass(frozen=True)
class MappedEvent:
    """A RawEvent standardized to the canonical disease list and gazetteer.

    Blank location levels and the "Others" disease mark ambiguity; both are
    legal and drive the clustering conflict rules.
    """

    raw: RawEvent
    standard_disease: str
    state: str = ""
    district: str = ""
    subdistrict: str = ""
    mapping_method: MappingMethod = MappingMethod.UNMAPPED
    international: bool = False
    id: str = field(default="")

    def __post_init__(self) -> None:
        object.__setattr__(self, "mapping_method", MappingMethod(self.mapping_method))
        if not hierarchy_consistent(self.state, self.district, self.subdistrict):
            raise ValueError(
                "location hierarchy inconsistent: "
                f"({self.state!r}, {self.district!r}, {self.subdistrict!r})"
            )
        if not self.id:
            object.__setattr__(
                self,
                "id",
                content_id(
                    self.raw.article_id,
                    *map(str, self.raw.key()),
                    self.standard_disease,
                    self.state,
                    self.district,
                    self.subdistrict,
                ),
            )

    @property
    def disease_ambiguous(self) -> bool:
        return self.standard_disease == OTHERS

    def location_levels(self) -> tuple[str, str, str]:
        return (self.state, self.district, self.subdistrict)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "raw": self.raw.to_json_dict(),
            "standard_disease": self.standard_disease,
            "state": self.state,
            "district": self.district,
            "subdistrict": self.subdistrict,
            "mapping_method": self.mapping_method.value,
            "international": self.international,
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "MappedEvent":
        return cls(
            id=d["id"],
            raw=RawEvent.from_json_dict(d["raw"]),
            standard_disease=d["standard_disease"],
            state=d["state"],
            district=d["district"],
            subdistrict=d["subdistrict"],
            mapping_method=d["mapping_method"],
            international=d["international"],
        )


@dataclass(frozen=True)
class Cluster:
    """A day-scoped set of mapped events judged to be one unique occurrence."""

    id: str
    day: date
    member_ids: tuple[str, ...]
    representative_id: str

    def __post_init__(self) -> None:
        if not self.member_ids:
            raise ValueError("cluster has no members")
        if len(set(self.member_ids)) != len(self.member_ids):
            raise ValueError("cluster members are not unique")
        if self.representative_id not in self.member_ids:
            raise ValueError("representative is not a member")

    @classmethod
    def build(cls, day: date, member_ids: tuple[str, ...], representative_id: str) -> "Cluster":
        return cls(
            id=content_id(day.isoformat(), *member_ids),
            day=day,
            member_ids=member_ids,
            representative_id=representative_id,
        )

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "day": self.day.isoformat(),
            "member_ids": list(self.member_ids),
            "representative_id": self.representative_id,
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "Cluster":
        return cls(
            id=d["id"],
            day=date.fromisoformat(d["day"]),
            member_ids=tuple(d["member_ids"]),
            representative_id=d["representative_id"],
        )


@dataclass(frozen=True)
class ReviewDecision:
    """An expert's verdict on a cluster."""

    cluster_id: str
    decision: Decision
    reviewer: str
    note: str
    decided_at: datetime

    def __post_init__(self) -> None:
        object.__setattr__(self, "decision", Decision(self.decision))

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "cluster_id": self.cluster_id,
            "decision": self.decision.value,
            "reviewer": self.reviewer,
            "note": self.note,
            "decided_at": _rfc3339(self.decided_at),
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "ReviewDecision":
        return cls(
            cluster_id=d["cluster_id"],
            decision=d["decision"],
            reviewer=d["reviewer"],
            note=d["note"],
            decided_at=parse_timestamp(d["decided_at"]),
        )


def canonical_dumps(payload: Any) -> str:
    """Deterministic JSON used for hashing and byte-stable exports."""
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
