"""Hierarchical gazetteer of Indian administrative locations.

The tree is State -> District -> Sub-district/ULB, loaded from a CSV with
one row per node: ``state,district,subdistrict,ulb,synonyms`` where the
deepest non-blank column names the node and synonyms are |-separated.
Lookups are case-insensitive; a surface that resolves to more than one
node is ambiguous.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .models import collapse_ws

STATE = "state"
DISTRICT = "district"
SUBDISTRICT = "subdistrict"
ULB = "ulb"


@dataclass(frozen=True)
class GazNode:
    """One node of the location tree, identified by its full path."""

    level: str
    name: str
    state: str
    district: str = ""
    subdistrict: str = ""

    @property
    def path(self) -> tuple[str, str, str]:
        return (self.state, self.district, self.subdistrict)


@dataclass(frozen=True)
class LocationMention:
    """A gazetteer match in free text with its candidate nodes."""

    surface: str
    candidates: tuple[GazNode, ...]

    @property
    def ambiguous(self) -> bool:
        return len(self.candidates) > 1


class Gazetteer:
    """Location tree with synonym lookup and reverse district/state indexes."""

    def __init__(self, nodes: Iterable[tuple[GazNode, tuple[str, ...]]]):
        self.nodes: list[GazNode] = []
        self._surface_index: dict[str, list[GazNode]] = {}
        self._children: dict[tuple[str, ...], list[GazNode]] = {}
        seen: set[tuple[str, str, str]] = set()
        for node, synonyms in nodes:
            if node.path in seen:
                raise ValueError(f"duplicate gazetteer node {node.path}")
            seen.add(node.path)
            self.nodes.append(node)
            for surface in (node.name, *synonyms):
                key = collapse_ws(surface).casefold()
                if not key:
                    continue
                bucket = self._surface_index.setdefault(key, [])
                if node not in bucket:
                    bucket.append(node)
            if node.level == STATE:
                self._children.setdefault((), []).append(node)
            elif node.level == DISTRICT:
                self._children.setdefault((node.state,), []).append(node)
            else:
                self._children.setdefault((node.state, node.district), []).append(node)
        self._pattern = _build_pattern(self._surface_index)

    @classmethod
    def from_csv(cls, path: str | Path) -> "Gazetteer":
        rows: list[tuple[GazNode, tuple[str, ...]]] = []
        seen: set[tuple[str, str, str]] = set()

        def ensure(node: GazNode, synonyms: tuple[str, ...] = ()) -> None:
            if node.path not in seen:
                seen.add(node.path)
                rows.append((node, synonyms))

        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                state = collapse_ws(row.get("state") or "")
                district = collapse_ws(row.get("district") or "")
                subdistrict = collapse_ws(row.get("subdistrict") or "")
                ulb = collapse_ws(row.get("ulb") or "")
                synonyms = tuple(
                    s for s in (collapse_ws(p) for p in (row.get("synonyms") or "").split("|")) if s
                )
                if not state:
                    continue
                if subdistrict and ulb:
                    raise ValueError("a row cannot name both a subdistrict and a ULB")
                leaf = subdistrict or ulb
                if leaf:
                    ensure(GazNode(STATE, state, state))
                    ensure(GazNode(DISTRICT, district, state, district))
                    ensure(
                        GazNode(ULB if ulb else SUBDISTRICT, leaf, state, district, leaf),
                        synonyms,
                    )
                elif district:
                    ensure(GazNode(STATE, state, state))
                    ensure(GazNode(DISTRICT, district, state, district), synonyms)
                else:
                    ensure(GazNode(STATE, state, state), synonyms)
        return cls(rows)

    def lookup(self, surface: str) -> list[GazNode]:
        """All nodes a surface resolves to (empty when unknown)."""
        return list(self._surface_index.get(collapse_ws(surface).casefold(), ()))

    def states(self) -> list[GazNode]:
        return list(self._children.get((), ()))

    def districts_under(self, state: str) -> list[GazNode]:
        return list(self._children.get((state,), ()))

    def subdivisions_under(self, state: str, district: str) -> list[GazNode]:
        return list(self._children.get((state, district), ()))

    def state_named(self, name: str) -> GazNode | None:
        hits = [n for n in self.lookup(name) if n.level == STATE]
        return hits[0] if len(hits) == 1 else None

    def district_under(self, state: str, name: str) -> GazNode | None:
        hits = [
            n
            for n in self.lookup(name)
            if n.level == DISTRICT and n.state.casefold() == state.casefold()
        ]
        return hits[0] if len(hits) == 1 else None

    def spot(self, text: str) -> list[LocationMention]:
        """All gazetteer surface matches in text, word-boundary anchored."""
        if self._pattern is None:
            return []
        mentions: dict[str, LocationMention] = {}
        for match in self._pattern.finditer(text):
            surface = match.group(0)
            key = collapse_ws(surface).casefold()
            if key not in mentions:
                mentions[key] = LocationMention(
                    surface=surface,
                    candidates=tuple(self._surface_index[key]),
                )
        return list(mentions.values())


def _build_pattern(index: dict[str, list[GazNode]]) -> re.Pattern | None:
    if not index:
        return None
    surfaces = sorted(index, key=len, reverse=True)
    alternation = "|".join(re.escape(s) for s in surfaces)
    return re.compile(rf"\b(?:{alternation})\b", re.IGNORECASE)


@dataclass
class GazetteerBuilder:
    """Programmatic construction helper used by tests and fixtures."""

    rows: list[tuple[GazNode, tuple[str, ...]]] = field(default_factory=list)
    _seen: set[tuple[str, str, str]] = field(default_factory=set)

    def _add(self, node: GazNode, synonyms: tuple[str, ...] = ()) -> None:
        if node.path not in self._seen:
            self._seen.add(node.path)
            self.rows.append((node, synonyms))

    def state(self, name: str, *synonyms: str) -> "GazetteerBuilder":
        self._add(GazNode(STATE, name, name), synonyms)
        return self

    def district(self, state: str, name: str, *synonyms: str) -> "GazetteerBuilder":
        self._add(GazNode(STATE, state, state))
        self._add(GazNode(DISTRICT, name, state, name), synonyms)
        return self

    def subdistrict(self, state: str, district: str, name: str, *synonyms: str,
                    ulb: bool = False) -> "GazetteerBuilder":
        self._add(GazNode(STATE, state, state))
        self._add(GazNode(DISTRICT, district, state, district))
        self._add(GazNode(ULB if ulb else SUBDISTRICT, name, state, district, name), synonyms)
        return self

    def build(self) -> Gazetteer:
        return Gazetteer(self.rows)
