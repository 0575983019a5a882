"""Standardization of extracted disease and location names.

Diseases map through a curated synonym table first (with generic-suffix
stripping), then an LLM nearest-name fallback whose accepted synonyms are
parked as pending until an expert promotes them. Locations map through
the gazetteer with forward assignment and reverse chaining; failures fall
back to a consistency-voted LLM that must return identical output k times
to be trusted.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import asset_text
from .errors import ProviderUnavailable
from .gazetteer import DISTRICT, STATE, Gazetteer
from .llm_extract import recover_json_array
from .models import (
    OTHERS,
    Article,
    MappedEvent,
    MappingMethod,
    RawEvent,
    collapse_ws,
    normalize_event,
)
from .providers.base import ChatProvider, Message

log = logging.getLogger(__name__)

MAPPED = "mapped"
AMBIGUOUS = "ambiguous"
UNMAPPED = "unmapped"

#: Trailing generic words stripped before synonym lookup, longest first.
DEFAULT_STRIP_SUFFIXES = ("infectious disease", "infection", "disease", "outbreak")

DEFAULT_VOTE_COUNT = 3


@dataclass
class DiseaseSynonymTable:
    """Curated synonym mapping plus the canonical disease list.

    pending holds LLM-proposed synonyms awaiting expert promotion; they are
    never consulted during mapping.
    """

    entries: dict[str, str]
    canonical_list: tuple[str, ...]
    pending: list[tuple[str, str]] = field(default_factory=list)
    strip_suffixes: tuple[str, ...] = DEFAULT_STRIP_SUFFIXES

    def __post_init__(self) -> None:
        canon = {c.casefold(): c for c in self.canonical_list}
        cleaned: dict[str, str] = {}
        for surface, canonical in self.entries.items():
            target = canon.get(canonical.casefold())
            if target is None:
                raise ValueError(f"synonym target {canonical!r} is not a canonical disease")
            cleaned[collapse_ws(surface).casefold()] = target
        self.entries = cleaned
        self._canonical_by_fold = canon

    @classmethod
    def from_files(
        cls,
        synonyms_csv: str | Path,
        canonical_path: str | Path,
        pending_csv: str | Path | None = None,
    ) -> "DiseaseSynonymTable":
        canonical = tuple(
            line.strip()
            for line in Path(canonical_path).read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.lstrip().startswith("#")
        )
        entries = dict(_read_pairs(synonyms_csv))
        pending = _read_pairs(pending_csv) if pending_csv and Path(pending_csv).exists() else []
        return cls(entries=entries, canonical_list=canonical, pending=pending)

    def canonical_spelling(self, name: str) -> str | None:
        return self._canonical_by_fold.get(collapse_ws(name).casefold())

    def add_pending(self, surface: str, canonical: str) -> None:
        pair = (collapse_ws(surface), canonical)
        if pair not in self.pending and collapse_ws(surface).casefold() not in self.entries:
            self.pending.append(pair)

    def promote(self, surface: str) -> str:
        """Move a pending synonym into the active table; returns the target."""
        key = collapse_ws(surface).casefold()
        for pending_surface, canonical in self.pending:
            if pending_surface.casefold() == key:
                self.entries[key] = canonical
                self.pending = [
                    (s, c) for s, c in self.pending if s.casefold() != key
                ]
                return canonical
        raise KeyError(f"no pending synonym for {surface!r}")

    def save(self, synonyms_csv: str | Path, pending_csv: str | Path | None = None) -> None:
        _write_pairs(synonyms_csv, sorted(self.entries.items()))
        if pending_csv is not None:
            _write_pairs(pending_csv, self.pending)


def _read_pairs(path: str | Path) -> list[tuple[str, str]]:
    pairs = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            pairs.append((row[0], row[1]))
    return pairs


def _write_pairs(path: str | Path, pairs) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for surface, canonical in pairs:
            writer.writerow([surface, canonical])


@dataclass(frozen=True)
class DiseaseMapping:
    standard: str
    method: str  # "table" | "miss"


def map_disease(name: str, table: DiseaseSynonymTable) -> DiseaseMapping:
    """Casefolded table lookup with trailing generic-word stripping."""
    candidate = collapse_ws(name).casefold()
    while candidate:
        canonical = table.canonical_spelling(candidate)
        if canonical is not None:
            return DiseaseMapping(standard=canonical, method="table")
        if candidate in table.entries:
            return DiseaseMapping(standard=table.entries[candidate], method="table")
        for suffix in table.strip_suffixes:
            if candidate.endswith(" " + suffix) or candidate == suffix:
                candidate = collapse_ws(candidate[: len(candidate) - len(suffix)])
                break
        else:
            break
    return DiseaseMapping(standard=OTHERS, method="miss")


@dataclass(frozen=True)
class DiseaseLlmResult:
    standard: str
    retry_later: bool = False


def _disease_messages(
    name: str, table: DiseaseSynonymTable, system: str, few_shot: list[dict]
) -> list[Message]:
    rendered = system.replace("{disease_list}", json.dumps(list(table.canonical_list)))
    messages: list[Message] = [{"role": "system", "content": rendered}]
    for example in few_shot:
        messages.append({"role": "user", "content": example["input"]})
        messages.append({"role": "assistant", "content": example["output"]})
    messages.append({"role": "user", "content": name})
    return messages


def map_disease_llm(
    name: str,
    table: DiseaseSynonymTable,
    provider: ChatProvider,
    system: str | None = None,
    few_shot: list[dict] | None = None,
) -> DiseaseLlmResult:
    """Nearest-canonical-name mapping via the chat provider.

    Output is validated against the canonical list; anything else is
    coerced to "Others". Accepted mappings are parked as pending synonyms
    for expert verification. Provider failure yields "Others" flagged for
    retry.
    """
    system = system or asset_text("prompts", "disease_mapper_system.txt").strip()
    if few_shot is None:
        few_shot = json.loads(asset_text("prompts", "disease_mapper_fewshot.json"))
    try:
        response = provider.complete(_disease_messages(name, table, system, few_shot))
    except ProviderUnavailable as exc:
        log.warning("disease mapper provider unavailable for %r: %s", name, exc)
        return DiseaseLlmResult(standard=OTHERS, retry_later=True)
    cleaned = collapse_ws(response).strip("\"'")
    if cleaned.casefold() == OTHERS.casefold():
        return DiseaseLlmResult(standard=OTHERS)
    canonical = table.canonical_spelling(cleaned)
    if canonical is None:
        log.info("disease mapper returned %r, not in the canonical list", cleaned)
        return DiseaseLlmResult(standard=OTHERS)
    table.add_pending(name, canonical)
    return DiseaseLlmResult(standard=canonical)


@dataclass(frozen=True)
class LocationMapping:
    state: str = ""
    district: str = ""
    subdistrict: str = ""
    status: str = UNMAPPED


def _distinct(nodes) -> list:
    seen = set()
    out = []
    for node in nodes:
        if node.path not in seen:
            seen.add(node.path)
            out.append(node)
    return out


def map_location(raw_location: str, gazetteer: Gazetteer) -> LocationMapping:
    """Forward/reverse assignment of comma-separated location text.

    Any level with multiple distinct candidates leaves that level and
    everything below blank with status ambiguous; levels above an
    ambiguity are kept when they are unique.
    """
    tokens = [collapse_ws(t) for t in raw_location.split(",")]
    tokens = [t for t in tokens if t]
    matched = [node for token in tokens for node in gazetteer.lookup(token)]
    if not matched:
        return LocationMapping(status=UNMAPPED)

    state_nodes = _distinct(n for n in matched if n.level == STATE)
    if len(state_nodes) > 1:
        return LocationMapping(status=AMBIGUOUS)

    if state_nodes:
        state = state_nodes[0].name
        districts = _distinct(n for n in matched if n.level == DISTRICT and n.state == state)
        if len(districts) > 1:
            return LocationMapping(state=state, status=AMBIGUOUS)
        if districts:
            district = districts[0].name
            subs = _distinct(
                n
                for n in matched
                if n.level not in {STATE, DISTRICT} and n.state == state and n.district == district
            )
            if len(subs) > 1:
                return LocationMapping(state=state, district=district, status=AMBIGUOUS)
            subdistrict = subs[0].name if subs else ""
            return LocationMapping(state, district, subdistrict, MAPPED)
        subs = _distinct(
            n for n in matched if n.level not in {STATE, DISTRICT} and n.state == state
        )
        if len(subs) > 1:
            return LocationMapping(state=state, status=AMBIGUOUS)
        if subs:
            return LocationMapping(state, subs[0].district, subs[0].name, MAPPED)
        return LocationMapping(state=state, status=MAPPED)

    districts = _distinct(n for n in matched if n.level == DISTRICT)
    if len(districts) > 1:
        return LocationMapping(status=AMBIGUOUS)
    if districts:
        state, district = districts[0].state, districts[0].name
        subs = _distinct(
            n
            for n in matched
            if n.level not in {STATE, DISTRICT} and n.state == state and n.district == district
        )
        if len(subs) > 1:
            return LocationMapping(state=state, district=district, status=AMBIGUOUS)
        subdistrict = subs[0].name if subs else ""
        return LocationMapping(state, district, subdistrict, MAPPED)

    subs = _distinct(n for n in matched if n.level not in {STATE, DISTRICT})
    if len(subs) > 1:
        return LocationMapping(status=AMBIGUOUS)
    node = subs[0]
    return LocationMapping(node.state, node.district, node.name, MAPPED)


@dataclass(frozen=True)
class LocationLlmResult:
    state: str = ""
    district: str = ""
    international: bool = False


_INTERNATIONAL = "international"


def _parse_location_response(text: str) -> tuple[str, str] | str | None:
    items = recover_json_array(text)
    if not items or not isinstance(items[0], dict):
        return None
    item = {collapse_ws(str(k)).casefold(): v for k, v in items[0].items()}
    state = collapse_ws(str(item.get("state") or ""))
    district = collapse_ws(str(item.get("district") or ""))
    if state.casefold() == _INTERNATIONAL:
        return _INTERNATIONAL
    return (state, district)


def map_location_llm(
    article: Article,
    provider: ChatProvider,
    gazetteer: Gazetteer,
    vote_count: int = DEFAULT_VOTE_COUNT,
    system: str | None = None,
    few_shot: list[dict] | None = None,
) -> LocationLlmResult:
    """State/district from the article via a consistency-voted LLM.

    The prompt runs vote_count times and the output is accepted only when
    all runs agree after casefolding; otherwise everything stays blank. A
    district the hierarchy does not know under the returned state is
    blanked while the state is kept.
    """
    system = system or asset_text("prompts", "location_extractor_system.txt").strip()
    if few_shot is None:
        few_shot = json.loads(asset_text("prompts", "location_extractor_fewshot.json"))
    messages: list[Message] = [{"role": "system", "content": system}]
    for example in few_shot:
        messages.append({"role": "user", "content": example["input"]})
        messages.append(
            {"role": "assistant", "content": json.dumps(example["output"], ensure_ascii=False)}
        )
    messages.append({"role": "user", "content": article.english_text})

    votes = []
    for _ in range(max(1, vote_count)):
        try:
            response = provider.complete(messages)
        except ProviderUnavailable as exc:
            log.warning("location mapper provider unavailable: %s", exc)
            return LocationLlmResult()
        votes.append(_parse_location_response(response))

    def fold(vote):
        if isinstance(vote, tuple):
            return (vote[0].casefold(), vote[1].casefold())
        return vote

    if any(v is None for v in votes) or len({fold(v) for v in votes}) != 1:
        log.info("location vote inconsistent: %r", votes)
        return LocationLlmResult()
    vote = votes[0]
    if vote == _INTERNATIONAL:
        return LocationLlmResult(international=True)
    state_raw, district_raw = vote
    if not state_raw:
        return LocationLlmResult()
    state_node = gazetteer.state_named(state_raw)
    if state_node is None:
        log.info("location mapper returned unknown state %r", state_raw)
        return LocationLlmResult()
    district = ""
    if district_raw:
        district_node = gazetteer.district_under(state_node.name, district_raw)
        if district_node is not None:
            district = district_node.name
        else:
            log.info(
                "district %r not under %s in the hierarchy; keeping state only",
                district_raw,
                state_node.name,
            )
    return LocationLlmResult(state=state_node.name, district=district)


def map_event(
    raw: RawEvent,
    table: DiseaseSynonymTable,
    gazetteer: Gazetteer,
    article: Article | None = None,
    chat: ChatProvider | None = None,
    vote_count: int = DEFAULT_VOTE_COUNT,
) -> MappedEvent:
    """Compose disease and location mapping into a MappedEvent.

    International events come back with international=True so the caller
    can exclude them from the emitted stream with a recorded reason.
    """
    raw = normalize_event(raw)
    disease_hit = map_disease(raw.disease, table)
    if disease_hit.method == "table":
        standard, method = disease_hit.standard, MappingMethod.TABLE
    elif chat is not None:
        llm = map_disease_llm(raw.disease, table, chat)
        standard = llm.standard
        method = MappingMethod.UNMAPPED if llm.retry_later else MappingMethod.LLM
    else:
        standard, method = OTHERS, MappingMethod.UNMAPPED

    location = map_location(raw.location, gazetteer)
    state, district, subdistrict = location.state, location.district, location.subdistrict
    international = False
    if location.status != MAPPED and chat is not None and article is not None:
        llm_location = map_location_llm(article, chat, gazetteer, vote_count)
        if llm_location.international:
            international = True
        elif llm_location.state:
            state, district, subdistrict = llm_location.state, llm_location.district, ""

    return MappedEvent(
        raw=raw,
        standard_disease=standard,
        state=state,
        district=district,
        subdistrict=subdistrict,
        mapping_method=method,
        international=international,
    )
