"""Durable persistence: append-only NDJSON segments + in-memory indexes.

One log file per collection; every write appends one record and the
in-memory index is rebuilt by replay on open. Writes are atomic per
record (single line, flushed); a day's clusters are replaced atomically
by a single replace_day record. Referential integrity is enforced on
write: events need their article, clusters their events, reviews their
cluster.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Callable, Generic, Iterable, TypeVar

from .errors import IntegrityViolation, NotFound
from .ingestion import Blocklist
from .models import (
    Article,
    Cluster,
    Decision,
    MappedEvent,
    RawEvent,
    ReviewDecision,
    canonical_dumps,
    content_id,
    event_day,
    parse_timestamp,
)

log = logging.getLogger(__name__)

T = TypeVar("T")

COLLECTIONS = ("articles", "raw_events", "mapped_events", "clusters", "reviews", "source_flags")


def raw_event_id(event: RawEvent) -> str:
    return content_id(event.article_id, event.extractor.value, *map(str, event.key()))


@dataclass(frozen=True)
class StoredReview:
    review: ReviewDecision
    stale: bool = False


@dataclass(frozen=True)
class SourceFlag:
    domain: str
    reasons: tuple[str, ...]
    reviewers: tuple[str, ...]
    confirmed: bool
    updated_at: datetime

    def to_json_dict(self) -> dict:
        return {
            "domain": self.domain,
            "reasons": list(self.reasons),
            "reviewers": list(self.reviewers),
            "confirmed": self.confirmed,
            "updated_at": self.updated_at.astimezone(timezone.utc).isoformat(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SourceFlag":
        return cls(
            domain=d["domain"],
            reasons=tuple(d["reasons"]),
            reviewers=tuple(d["reviewers"]),
            confirmed=d["confirmed"],
            updated_at=parse_timestamp(d["updated_at"]),
        )


@dataclass(frozen=True)
class Page(Generic[T]):
    items: tuple[T, ...]
    page: int
    page_size: int
    total: int


def _paginate(items: list[T], page: int, page_size: int) -> Page[T]:
    if page < 1 or page_size < 1:
        raise ValueError("page and page_size are 1-based positive integers")
    start = (page - 1) * page_size
    return Page(
        items=tuple(items[start : start + page_size]),
        page=page,
        page_size=page_size,
        total=len(items),
    )


LAYOUT_VERSION = "1"


class Store:
    """Log-structured store over a directory; safe for concurrent readers
    with writes serialized behind one lock."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        version_file = self.root / "LAYOUT_VERSION"
        if version_file.exists():
            found = version_file.read_text(encoding="utf-8").strip()
            if found != LAYOUT_VERSION:
                raise IntegrityViolation(
                    f"store layout version {found} != supported {LAYOUT_VERSION}"
                )
        else:
            version_file.write_text(LAYOUT_VERSION + "\n", encoding="utf-8")
        self._lock = threading.RLock()
        self.articles: dict[str, Article] = {}
        self.raw_events: dict[str, RawEvent] = {}
        self.mapped_events: dict[str, MappedEvent] = {}
        self.clusters: dict[str, Cluster] = {}
        self.clusters_by_day: dict[date, list[str]] = {}
        self.reviews: dict[str, StoredReview] = {}
        self.source_flags: dict[str, SourceFlag] = {}
        self._replay()

    # -- log plumbing ---------------------------------------------------

    def _log_path(self, collection: str) -> Path:
        return self.root / f"{collection}.ndjson"

    def _append(self, collection: str, payload: dict) -> None:
        with open(self._log_path(collection), "a", encoding="utf-8") as fh:
            fh.write(canonical_dumps(payload) + "\n")
            fh.flush()

    def _replay(self) -> None:
        appliers: dict[str, Callable[[dict], None]] = {
            "articles": self._apply_article,
            "raw_events": self._apply_raw_event,
            "mapped_events": self._apply_mapped_event,
            "clusters": self._apply_cluster_op,
            "reviews": self._apply_review,
            "source_flags": self._apply_source_flag,
        }
        for collection, apply in appliers.items():
            path = self._log_path(collection)
            if not path.exists():
                continue
            for line in path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    apply(json.loads(line))

    def _apply_article(self, op: dict) -> None:
        article = Article.from_json_dict(op["record"])
        self.articles[article.id] = article

    def _apply_raw_event(self, op: dict) -> None:
        event = RawEvent.from_json_dict(op["record"])
        self.raw_events[op["id"]] = event

    def _apply_mapped_event(self, op: dict) -> None:
        event = MappedEvent.from_json_dict(op["record"])
        self.mapped_events[event.id] = event

    def _apply_cluster_op(self, op: dict) -> None:
        if op["op"] == "replace_day":
            day = date.fromisoformat(op["day"])
            for cluster_id in self.clusters_by_day.pop(day, []):
                del self.clusters[cluster_id]
            for record in op["records"]:
                self._index_cluster(Cluster.from_json_dict(record))
        else:
            self._index_cluster(Cluster.from_json_dict(op["record"]))

    def _index_cluster(self, cluster: Cluster) -> None:
        self.clusters[cluster.id] = cluster
        day_ids = self.clusters_by_day.setdefault(cluster.day, [])
        if cluster.id not in day_ids:
            day_ids.append(cluster.id)

    def _apply_review(self, op: dict) -> None:
        review = ReviewDecision.from_json_dict(op["record"])
        self.reviews[review.cluster_id] = StoredReview(
            review=review, stale=op["record"].get("stale", False)
        )

    def _apply_source_flag(self, op: dict) -> None:
        flag = SourceFlag.from_json_dict(op["record"])
        self.source_flags[flag.domain] = flag

    # -- articles ---------------------------------------------------------

    def put_article(self, article: Article) -> None:
        with self._lock:
            if self.articles.get(article.id) == article:
                return
            self.articles[article.id] = article
            self._append("articles", {"op": "put", "record": article.to_json_dict()})

    def get_article(self, article_id: str) -> Article:
        try:
            return self.articles[article_id]
        except KeyError:
            raise NotFound(f"article {article_id}") from None

    def list_articles(self, day: date | None = None, page: int = 1,
                      page_size: int = 50) -> Page[Article]:
        items = sorted(self.articles.values(), key=lambda a: a.id)
        if day is not None:
            items = [a for a in items if event_day(a) == day]
        return _paginate(items, page, page_size)

    # -- events -----------------------------------------------------------

    def put_raw_event(self, event: RawEvent) -> str:
        with self._lock:
            if event.article_id not in self.articles:
                raise IntegrityViolation(f"raw event references missing article {event.article_id}")
            event_id = raw_event_id(event)
            if self.raw_events.get(event_id) == event:
                return event_id
            self.raw_events[event_id] = event
            self._append(
                "raw_events", {"op": "put", "id": event_id, "record": event.to_json_dict()}
            )
            return event_id

    def get_raw_event(self, event_id: str) -> RawEvent:
        try:
            return self.raw_events[event_id]
        except KeyError:
            raise NotFound(f"raw event {event_id}") from None

    def put_mapped_event(self, event: MappedEvent) -> None:
        with self._lock:
            if event.raw.article_id not in self.articles:
                raise IntegrityViolation(
                    f"mapped event references missing article {event.raw.article_id}"
                )
            if self.mapped_events.get(event.id) == event:
                return
            self.mapped_events[event.id] = event
            self._append("mapped_events", {"op": "put", "record": event.to_json_dict()})

    def get_mapped_event(self, event_id: str) -> MappedEvent:
        try:
            return self.mapped_events[event_id]
        except KeyError:
            raise NotFound(f"mapped event {event_id}") from None

    def event_day_of(self, event: MappedEvent) -> date:
        return event_day(self.get_article(event.raw.article_id))

    def list_mapped_events(
        self,
        day: date | None = None,
        disease: str | None = None,
        state: str | None = None,
        include_international: bool = False,
        page: int = 1,
        page_size: int = 1000,
    ) -> Page[MappedEvent]:
        items = sorted(self.mapped_events.values(), key=lambda e: e.id)
        if not include_international:
            items = [e for e in items if not e.international]
        if day is not None:
            items = [e for e in items if self.event_day_of(e) == day]
        if disease is not None:
            items = [e for e in items if e.standard_disease.casefold() == disease.casefold()]
        if state is not None:
            items = [e for e in items if e.state.casefold() == state.casefold()]
        return _paginate(items, page, page_size)

    # -- clusters -----------------------------------------------------------

    def _check_cluster_refs(self, cluster: Cluster) -> None:
        for member_id in cluster.member_ids:
            if member_id not in self.mapped_events:
                raise IntegrityViolation(f"cluster references missing event {member_id}")

    def put_cluster(self, cluster: Cluster) -> None:
        with self._lock:
            self._check_cluster_refs(cluster)
            if self.clusters.get(cluster.id) == cluster:
                return
            self._index_cluster(cluster)
            self._append("clusters", {"op": "put", "record": cluster.to_json_dict()})

    def replace_day_clusters(self, day: date, clusters: Iterable[Cluster]) -> list[Cluster]:
        """Atomically swap a day's cluster set; reviews on replaced clusters
        that do not survive are marked stale (kept for audit)."""
        clusters = list(clusters)
        with self._lock:
            for cluster in clusters:
                if cluster.day != day:
                    raise IntegrityViolation(f"cluster {cluster.id} is not for day {day}")
                self._check_cluster_refs(cluster)
            previous = set(self.clusters_by_day.get(day, []))
            surviving = {c.id for c in clusters}
            self._append(
                "clusters",
                {
                    "op": "replace_day",
                    "day": day.isoformat(),
                    "records": [c.to_json_dict() for c in clusters],
                },
            )
            for cluster_id in previous:
                del self.clusters[cluster_id]
            self.clusters_by_day[day] = []
            for cluster in clusters:
                self._index_cluster(cluster)
            for cluster_id in previous - surviving:
                stored = self.reviews.get(cluster_id)
                if stored is not None and not stored.stale:
                    self._write_review(stored.review, stale=True)
            return clusters

    def get_cluster(self, cluster_id: str) -> Cluster:
        try:
            return self.clusters[cluster_id]
        except KeyError:
            raise NotFound(f"cluster {cluster_id}") from None

    def list_clusters(
        self,
        day: date,
        disease: str | None = None,
        state: str | None = None,
        page: int = 1,
        page_size: int = 50,
    ) -> Page[Cluster]:
        clusters = [self.clusters[cid] for cid in self.clusters_by_day.get(day, [])]
        if disease is not None or state is not None:
            filtered = []
            for cluster in clusters:
                rep = self.get_mapped_event(cluster.representative_id)
                if disease is not None and rep.standard_disease.casefold() != disease.casefold():
                    continue
                if state is not None and rep.state.casefold() != state.casefold():
                    continue
                filtered.append(cluster)
            clusters = filtered
        clusters.sort(key=lambda c: c.id)
        return _paginate(clusters, page, page_size)

    # -- reviews -----------------------------------------------------------

    def _write_review(self, review: ReviewDecision, stale: bool) -> None:
        record = review.to_json_dict()
        record["stale"] = stale
        self.reviews[review.cluster_id] = StoredReview(review=review, stale=stale)
        self._append("reviews", {"op": "put", "record": record})

    def put_review(self, review: ReviewDecision) -> None:
        """Record a decision; decided clusters only accept note updates."""
        with self._lock:
            if review.cluster_id not in self.clusters:
                raise NotFound(f"cluster {review.cluster_id}")
            if review.decision == Decision.PENDING:
                raise ValueError("a review decision must be shortlisted or rejected")
            existing = self.reviews.get(review.cluster_id)
            if existing is not None and not existing.stale:
                if existing.review.decision != review.decision:
                    raise IntegrityViolation(
                        f"cluster {review.cluster_id} already decided: "
                        f"{existing.review.decision.value}"
                    )
                if existing.review == review:
                    return
            self._write_review(review, stale=False)

    def get_review(self, cluster_id: str) -> StoredReview | None:
        return self.reviews.get(cluster_id)

    # -- source flags --------------------------------------------------------

    def flag_source(self, domain: str, reason: str, reviewer: str) -> SourceFlag:
        domain = domain.lower().strip()
        with self._lock:
            existing = self.source_flags.get(domain)
            reasons: tuple[str, ...] = (reason,)
            reviewers: tuple[str, ...] = (reviewer,)
            confirmed = False
            if existing is not None:
                reasons = existing.reasons + ((reason,) if reason not in existing.reasons else ())
                reviewers = existing.reviewers + (
                    (reviewer,) if reviewer not in existing.reviewers else ()
                )
                confirmed = existing.confirmed
            flag = SourceFlag(
                domain=domain,
                reasons=reasons,
                reviewers=reviewers,
                confirmed=confirmed,
                updated_at=datetime.now(timezone.utc),
            )
            self.source_flags[domain] = flag
            self._append("source_flags", {"op": "put", "record": flag.to_json_dict()})
            return flag

    def confirm_source(self, domain: str) -> SourceFlag:
        domain = domain.lower().strip()
        with self._lock:
            existing = self.source_flags.get(domain)
            if existing is None:
                raise NotFound(f"source flag {domain}")
            flag = SourceFlag(
                domain=domain,
                reasons=existing.reasons,
                reviewers=existing.reviewers,
                confirmed=True,
                updated_at=datetime.now(timezone.utc),
            )
            self.source_flags[domain] = flag
            self._append("source_flags", {"op": "put", "record": flag.to_json_dict()})
            return flag

    def export_blocklist(self) -> Blocklist:
        """Confirmed unreliable domains in ingestion Blocklist form."""
        return Blocklist(
            domains=frozenset(d for d, f in self.source_flags.items() if f.confirmed),
            updated_at=datetime.now(timezone.utc),
        )

    # -- stats and integrity ---------------------------------------------------

    def stats(self, start: date | None = None, end: date | None = None) -> dict:
        def in_range(day: date) -> bool:
            if start is not None and day < start:
                return False
            if end is not None and day > end:
                return False
            return True

        article_ids = {a.id for a in self.articles.values() if in_range(event_day(a))}
        raw = sum(1 for e in self.raw_events.values() if e.article_id in article_ids)
        mapped = sum(1 for e in self.mapped_events.values() if e.raw.article_id in article_ids)
        clusters = [c for c in self.clusters.values() if in_range(c.day)]
        shortlisted = sum(
            1
            for c in clusters
            if (stored := self.reviews.get(c.id)) is not None
            and not stored.stale
            and stored.review.decision == Decision.SHORTLISTED
        )
        return {
            "articles": len(article_ids),
            "raw_events": raw,
            "mapped_events": mapped,
            "clusters": len(clusters),
            "shortlisted": shortlisted,
        }

    def check_integrity(self) -> list[str]:
        """Full-scan referential check; returns human-readable violations."""
        problems = []
        for event_id, event in self.raw_events.items():
            if event.article_id not in self.articles:
                problems.append(f"raw event {event_id} -> missing article {event.article_id}")
        for event in self.mapped_events.values():
            if event.raw.article_id not in self.articles:
                problems.append(f"mapped event {event.id} -> missing article")
        for cluster in self.clusters.values():
            for member_id in cluster.member_ids:
                if member_id not in self.mapped_events:
                    problems.append(f"cluster {cluster.id} -> missing event {member_id}")
        for cluster_id in self.reviews:
            if cluster_id not in self.clusters and not self.reviews[cluster_id].stale:
                problems.append(f"review -> missing cluster {cluster_id}")
        return problems

    # -- export -------------------------------------------------------------

    def export_collection(self, collection: str) -> str:
        """Canonical NDJSON export of a collection's current state."""
        if collection == "articles":
            records = [a.to_json_dict() for _, a in sorted(self.articles.items())]
        elif collection == "raw_events":
            records = [
                {"id": event_id, **event.to_json_dict()}
                for event_id, event in sorted(self.raw_events.items())
            ]
        elif collection == "mapped_events":
            records = [e.to_json_dict() for _, e in sorted(self.mapped_events.items())]
        elif collection == "clusters":
            records = [
                self.clusters[cid].to_json_dict()
                for day in sorted(self.clusters_by_day)
                for cid in sorted(self.clusters_by_day[day])
            ]
        elif collection == "reviews":
            records = [
                {**stored.review.to_json_dict(), "stale": stored.stale}
                for _, stored in sorted(self.reviews.items())
            ]
        elif collection == "source_flags":
            records = [f.to_json_dict() for _, f in sorted(self.source_flags.items())]
        else:
            raise ValueError(f"unknown collection {collection!r}")
        return "".join(canonical_dumps(r) + "\n" for r in records)

    def import_collection(self, collection: str, ndjson: str) -> int:
        """Load exported NDJSON records back through the put contracts.

        Returns the record count. Order matters across collections:
        articles before events before clusters before reviews.
        """
        count = 0
        for line in ndjson.splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            if collection == "articles":
                self.put_article(Article.from_json_dict(record))
            elif collection == "raw_events":
                record.pop("id", None)
                self.put_raw_event(RawEvent.from_json_dict(record))
            elif collection == "mapped_events":
                self.put_mapped_event(MappedEvent.from_json_dict(record))
            elif collection == "clusters":
                self.put_cluster(Cluster.from_json_dict(record))
            elif collection == "reviews":
                stale = record.pop("stale", False)
                review = ReviewDecision.from_json_dict(record)
                with self._lock:
                    self._write_review(review, stale=stale)
            elif collection == "source_flags":
                flag = SourceFlag.from_json_dict(record)
                with self._lock:
                    self.source_flags[flag.domain] = flag
                    self._append("source_flags", {"op": "put", "record": flag.to_json_dict()})
            else:
                raise ValueError(f"unknown collection {collection!r}")
            count += 1
        return count
