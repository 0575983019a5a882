"""Day-wise deduplication of mapped events.

Pipeline: sentence embeddings of each event's article text -> cosine
similarity matrix -> per-pair thresholds from an ordered rule ladder ->
binary match matrix -> DFS connected components -> conflict-aware
splitting of clusters chained through ambiguous events.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import asset_text
from .models import Cluster, MappedEvent
from .providers.base import EmbeddingProvider

#: Threshold meaning "these two events can never match".
NEVER = float("inf")

SAME = "same"
DIFFERENT = "different"
AMBIGUOUS = "ambiguous"  # disease relation when either side is "Others"
BLANK = "blank"  # location relation when either side is blank
ANY = "any"

_LOCATION_LEVELS = ("state", "district", "subdistrict")


@dataclass(frozen=True)
class PairFeatures:
    """Relational features the threshold rules can see for an event pair."""

    disease: str  # same | different | ambiguous
    state: str  # same | different | blank
    district: str
    subdistrict: str
    number_conflict: bool

    @classmethod
    def of(cls, a: MappedEvent, b: MappedEvent) -> "PairFeatures":
        if a.disease_ambiguous or b.disease_ambiguous:
            disease = AMBIGUOUS
        elif a.standard_disease == b.standard_disease:
            disease = SAME
        else:
            disease = DIFFERENT
        levels = {}
        for name, va, vb in zip(_LOCATION_LEVELS, a.location_levels(), b.location_levels()):
            if not va or not vb:
                levels[name] = BLANK
            elif va == vb:
                levels[name] = SAME
            else:
                levels[name] = DIFFERENT
        number_conflict = (
            a.raw.number is not None
            and b.raw.number is not None
            and a.raw.incident == b.raw.incident
            and a.raw.incident_type == b.raw.incident_type
            and a.raw.number != b.raw.number
        )
        return cls(
            disease=disease,
            state=levels["state"],
            district=levels["district"],
            subdistrict=levels["subdistrict"],
            number_conflict=number_conflict,
        )


@dataclass(frozen=True)
class Rule:
    """One ladder entry: a feature predicate and the threshold it sets."""

    when: dict
    threshold: float

    def matches(self, features: PairFeatures) -> bool:
        for key, expected in self.when.items():
            if expected in (None, ANY):
                continue
            if getattr(features, key) != expected:
                return False
        return True


@dataclass(frozen=True)
class ThresholdRules:
    """Ordered rule ladder; the first matching rule wins."""

    rules: tuple[Rule, ...]

    def __post_init__(self) -> None:
        if not self.rules or self.rules[-1].when:
            raise ValueError("the ladder must end with a catch-all default rule")

    @classmethod
    def from_dict(cls, payload: dict) -> "ThresholdRules":
        rules = []
        for record in payload["rules"]:
            threshold = record["threshold"]
            if isinstance(threshold, str):
                if threshold.lower() != "never":
                    raise ValueError(f"unknown threshold {threshold!r}")
                threshold = NEVER
            rules.append(Rule(when=dict(record.get("when", {})), threshold=float(threshold)))
        return cls(rules=tuple(rules))

    @classmethod
    def from_file(cls, path: str | Path) -> "ThresholdRules":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def bundled(cls) -> "ThresholdRules":
        return cls.from_dict(json.loads(asset_text("default_rules.json")))

    def to_dict(self) -> dict:
        return {
            "rules": [
                {
                    "when": dict(rule.when),
                    "threshold": "never" if rule.threshold == NEVER else rule.threshold,
                }
                for rule in self.rules
            ]
        }


def events_conflict(a: MappedEvent, b: MappedEvent) -> bool:
    """Two canonical diseases differing, or any location level where both
    are non-blank and differ."""
    if (
        not a.disease_ambiguous
        and not b.disease_ambiguous
        and a.standard_disease != b.standard_disease
    ):
        return True
    for va, vb in zip(a.location_levels(), b.location_levels()):
        if va and vb and va != vb:
            return True
    return False


def pair_threshold(a: MappedEvent, b: MappedEvent, rules: ThresholdRules) -> float:
    """First matching rule's threshold; NEVER for provable hard conflicts."""
    if (
        not a.disease_ambiguous
        and not b.disease_ambiguous
        and a.standard_disease != b.standard_disease
    ):
        return NEVER
    if a.state and b.state and a.state != b.state:
        return NEVER
    features = PairFeatures.of(a, b)
    for rule in rules.rules:
        if rule.matches(features):
            return rule.threshold
    raise AssertionError("unreachable: ladder always ends with a default rule")


def similarity_matrix(
    events: Sequence[MappedEvent],
    provider: EmbeddingProvider,
    text_of: Callable[[MappedEvent], str],
) -> np.ndarray:
    """Pairwise cosine similarity of each event's article text."""
    n = len(events)
    if n == 0:
        return np.zeros((0, 0))
    vectors = np.stack([provider.embed(text_of(event)) for event in events])
    sim = vectors @ vectors.T
    sim = np.clip(sim, -1.0, 1.0)
    np.fill_diagonal(sim, 1.0)
    return (sim + sim.T) / 2.0


def match_matrix(
    sim: np.ndarray, events: Sequence[MappedEvent], rules: ThresholdRules
) -> np.ndarray:
    """B[i][j] = 1 iff sim[i][j] clears the pair's rule threshold."""
    n = len(events)
    if sim.shape != (n, n):
        raise ValueError(f"similarity matrix shape {sim.shape} does not match {n} events")
    matches = np.eye(n, dtype=np.int8)
    for i in range(n):
        for j in range(i + 1, n):
            threshold = pair_threshold(events[i], events[j], rules)
            if threshold != NEVER and sim[i, j] >= threshold:
                matches[i, j] = matches[j, i] = 1
    return matches


def connected_components(matches: np.ndarray) -> list[list[int]]:
    """Maximal connected components of the match graph, via iterative DFS.

    Components are ordered by smallest member index; members ascend.
    """
    n = matches.shape[0]
    if matches.shape != (n, n):
        raise ValueError("match matrix must be square")
    seen = [False] * n
    components: list[list[int]] = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        component = []
        while stack:
            node = stack.pop()
            component.append(node)
            for neighbor in range(n - 1, -1, -1):
                if matches[node, neighbor] and not seen[neighbor]:
                    seen[neighbor] = True
                    stack.append(neighbor)
        components.append(sorted(component))
    return components


def _ambiguous_within(event: MappedEvent, members: Sequence[MappedEvent]) -> bool:
    """Ambiguous relative to the cluster: disease "Others", or blank at a
    location level where some other member is non-blank."""
    if event.disease_ambiguous:
        return True
    for level in range(3):
        if not event.location_levels()[level] and any(
            other is not event and other.location_levels()[level] for other in members
        ):
            return True
    return False


def conflict_split(
    cluster: Sequence[int], events: Sequence[MappedEvent], sim: np.ndarray
) -> list[list[int]]:
    """Break a cluster so no part holds a conflicting pair.

    Unambiguous members group by their (disease, location) signature; each
    ambiguous member attaches to the compatible part with the highest mean
    similarity (ties to the earliest part), or founds its own part.
    """
    members = sorted(cluster)
    member_events = [events[i] for i in members]
    ambiguous = [i for i in members if _ambiguous_within(events[i], member_events)]
    parts: list[list[int]] = []
    signature_part: dict[tuple, int] = {}
    for index in members:
        if index in ambiguous:
            continue
        event = events[index]
        signature = (event.standard_disease, *event.location_levels())
        if signature in signature_part:
            parts[signature_part[signature]].append(index)
        else:
            signature_part[signature] = len(parts)
            parts.append([index])
    for index in ambiguous:
        event = events[index]
        compatible = [
            part_index
            for part_index, part in enumerate(parts)
            if not any(events_conflict(event, events[member]) for member in part)
        ]
        if not compatible:
            parts.append([index])
            continue
        best = max(
            compatible,
            key=lambda part_index: (
                float(np.mean([sim[index, member] for member in parts[part_index]])),
                -part_index,
            ),
        )
        parts[best].append(index)
    return sorted((sorted(part) for part in parts), key=lambda part: part[0])


def representative_index(cluster: Sequence[int], events: Sequence[MappedEvent],
                         sim: np.ndarray) -> int:
    """Member with the highest mean similarity to the others (ties: smallest id)."""
    members = sorted(cluster)
    if len(members) == 1:
        return members[0]

    def mean_to_others(i: int) -> float:
        return float(np.mean([sim[i, j] for j in members if j != i]))

    return min(members, key=lambda i: (-mean_to_others(i), events[i].id))


def cluster_day(
    events: Sequence[MappedEvent],
    provider: EmbeddingProvider,
    rules: ThresholdRules,
    text_of: Callable[[MappedEvent], str],
    day: date,
) -> list[Cluster]:
    """Full clustering of one day's events into unique-occurrence clusters."""
    if not events:
        return []
    sim = similarity_matrix(events, provider, text_of)
    matches = match_matrix(sim, events, rules)
    clusters: list[Cluster] = []
    for component in connected_components(matches):
        for part in conflict_split(component, events, sim):
            rep = representative_index(part, events, sim)
            clusters.append(
                Cluster.build(
                    day=day,
                    member_ids=tuple(events[i].id for i in part),
                    representative_id=events[rep].id,
                )
            )
    return clusters
