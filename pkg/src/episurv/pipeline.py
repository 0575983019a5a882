"""Stage orchestration shared by the CLI and the API service.

A PipelineRuntime bundles the store, the provider set and the reference
data (lexicon, gazetteer, synonym table, clustering rules) so every stage
runs the same way from either entry point.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .clustering import ThresholdRules, cluster_day
from .errors import ProviderUnavailable, UnsupportedLanguage
from .ingestion import Blocklist, SourceAdapter, ingest
from .llm_extract import PromptConfig, extract_events_llm
from .mapping import DiseaseSynonymTable, map_event
from .metrics import (
    EvalEventSet,
    ExtractionReport,
    adjusted_rand_index,
    normalized_mutual_information,
    v_measure,
)
from .models import Article, Extractor, MappedEvent, RawEvent, event_day, normalize_event
from .gazetteer import Gazetteer
from .providers.base import (
    ChatProvider,
    ClassifierProvider,
    EmbeddingProvider,
    NerProvider,
    NliProvider,
    QaProvider,
    TranslationProvider,
)
from .qa_nli import DEFAULT_CONFIDENCE_FLOOR, extract_events_qa_nli
from .relevance import RELEVANT, DiseaseLexicon, classify_relevance, entity_gate
from .store import Store
from .translation import translate

log = logging.getLogger(__name__)

QA_NLI = "qa-nli"
LLM = "llm"


@dataclass
class PipelineRuntime:
    store: Store
    classifier: ClassifierProvider
    translator: TranslationProvider
    qa: QaProvider
    nli: NliProvider
    embedder: EmbeddingProvider
    lexicon: DiseaseLexicon
    gazetteer: Gazetteer
    synonyms: DiseaseSynonymTable
    rules: ThresholdRules
    prompt_config: PromptConfig
    chat: ChatProvider | None = None
    ner: NerProvider | None = None
    vote_count: int = 3
    confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR


@dataclass
class IngestReport:
    stored: int = 0


def run_ingest(runtime: PipelineRuntime, adapter: SourceAdapter, blocklist: Blocklist,
               **ingest_kwargs) -> IngestReport:
    report = IngestReport()
    for article in ingest(adapter, blocklist, **ingest_kwargs):
        runtime.store.put_article(article)
        report.stored += 1
    return report


@dataclass
class ProcessReport:
    day: date
    articles: int = 0
    relevant: int = 0
    quarantined: list[str] = field(default_factory=list)
    gated: int = 0
    raw_events: int = 0
    mapped_events: int = 0
    dropped_international: int = 0
    parse_failures: list[str] = field(default_factory=list)


def _extract(runtime: PipelineRuntime, article: Article, extractor: str,
             pairs: list[tuple[str, str]], report: ProcessReport) -> list[RawEvent]:
    if extractor == QA_NLI:
        return extract_events_qa_nli(
            article, pairs, runtime.qa, runtime.nli, confidence_floor=runtime.confidence_floor
        )
    if extractor == LLM:
        if runtime.chat is None:
            raise ValueError("no chat provider configured for the llm extractor")
        extraction = extract_events_llm(article, runtime.prompt_config, runtime.chat)
        if extraction.parse_failed:
            report.parse_failures.append(article.id)
        return list(extraction.events)
    raise ValueError(f"unknown extractor {extractor!r} (expected {QA_NLI} or {LLM})")


def run_process(runtime: PipelineRuntime, day: date, extractor: str = QA_NLI) -> ProcessReport:
    """Classify, translate, gate, extract and map one day's stored articles."""
    report = ProcessReport(day=day)
    articles = [
        article
        for article in sorted(runtime.store.articles.values(), key=lambda a: a.id)
        if event_day(article) == day
    ]
    for article in articles:
        report.articles += 1
        result = classify_relevance(article, runtime.classifier)
        if result.label != RELEVANT:
            continue
        report.relevant += 1
        try:
            article = translate(article, runtime.translator)
        except (UnsupportedLanguage, ProviderUnavailable) as exc:
            log.warning("quarantining article %s: %s", article.id, exc)
            report.quarantined.append(article.id)
            continue
        runtime.store.put_article(article)
        gate = entity_gate(article, runtime.lexicon, runtime.gazetteer, runtime.ner)
        if not gate.keep:
            continue
        report.gated += 1
        events = _extract(runtime, article, extractor, gate.pairs(), report)
        for raw in events:
            raw = normalize_event(raw)
            runtime.store.put_raw_event(raw)
            report.raw_events += 1
            mapped = map_event(
                raw,
                runtime.synonyms,
                runtime.gazetteer,
                article=article,
                chat=runtime.chat,
                vote_count=runtime.vote_count,
            )
            if mapped.international:
                log.info("dropping international event %s from %s", mapped.id, article.id)
                report.dropped_international += 1
                continue
            runtime.store.put_mapped_event(mapped)
            report.mapped_events += 1
    return report


def day_events(store: Store, day: date) -> list[MappedEvent]:
    """A day's clusterable (non-international) events in stable order."""
    return list(store.list_mapped_events(day=day, page_size=10**9).items)


def run_cluster(runtime: PipelineRuntime, day: date,
                rules: ThresholdRules | None = None) -> list:
    """(Re-)cluster one day; the day's cluster set is replaced atomically."""
    rules = rules or runtime.rules
    events = day_events(runtime.store, day)
    clusters = cluster_day(
        events,
        runtime.embedder,
        rules,
        text_of=lambda e: runtime.store.get_article(e.raw.article_id).english_text,
        day=day,
    )
    return runtime.store.replace_day_clusters(day, clusters)


# -- evaluation -------------------------------------------------------------


def load_extraction_gold(path: str | Path) -> list[dict]:
    """NDJSON rows {article_id, relevant, events: [5-tuple dicts]}."""
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rows.append(json.loads(line))
    return rows


def evaluate_extraction(runtime: PipelineRuntime, gold_path: str | Path) -> ExtractionReport:
    """Compare stored mapped events against a gold file, normalizing gold
    5-tuples through the same mapping pipeline (tables only)."""
    gold_rows = load_extraction_gold(gold_path)
    gold: dict[str, list[MappedEvent]] = {}
    relevance: dict[str, bool] = {}
    for row in gold_rows:
        article_id = row["article_id"]
        relevance[article_id] = bool(row["relevant"])
        mapped = []
        for item in row.get("events", []):
            raw = RawEvent(
                disease=item["disease"],
                location=item["location"],
                incident=item["incident"],
                incident_type=item.get("incident_type"),
                number=item.get("number"),
                article_id=article_id,
                extractor=item.get("extractor", Extractor.LLM),
            )
            mapped.append(map_event(raw, runtime.synonyms, runtime.gazetteer))
        gold[article_id] = mapped
    predicted: dict[str, list[MappedEvent]] = {article_id: [] for article_id in gold}
    for event in runtime.store.mapped_events.values():
        if event.raw.article_id in predicted and not event.international:
            predicted[event.raw.article_id].append(event)
    eval_set = EvalEventSet.align(gold, predicted, relevance)
    from .metrics import extraction_metrics

    return extraction_metrics(eval_set)


def load_clustering_gold(path: str | Path) -> dict[date, dict[str, str]]:
    """NDJSON rows {event_id, day, cluster_label} grouped by day."""
    by_day: dict[date, dict[str, str]] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        day = date.fromisoformat(row["day"])
        by_day.setdefault(day, {})[row["event_id"]] = str(row["cluster_label"])
    return by_day


def _predicted_labels(store: Store, day: date, event_ids: list[str]) -> list[str]:
    label_of: dict[str, str] = {}
    for cluster_id in store.clusters_by_day.get(day, []):
        for member_id in store.clusters[cluster_id].member_ids:
            label_of[member_id] = cluster_id
    return [label_of.get(event_id, f"unclustered:{event_id}") for event_id in event_ids]


@dataclass(frozen=True)
class ClusteringDayReport:
    day: date
    events: int
    clusters: int
    ari: float
    nmi: float
    homogeneity: float
    completeness: float
    v: float

    def to_json_dict(self) -> dict:
        record = dict(vars(self))
        record["day"] = self.day.isoformat()
        return record


def evaluate_clustering(store: Store, gold_path: str | Path) -> list[ClusteringDayReport]:
    reports = []
    for day, labels in sorted(load_clustering_gold(gold_path).items()):
        event_ids = sorted(labels)
        y = [labels[event_id] for event_id in event_ids]
        y_hat = _predicted_labels(store, day, event_ids)
        vm = v_measure(y, y_hat)
        reports.append(
            ClusteringDayReport(
                day=day,
                events=len(event_ids),
                clusters=len(set(y_hat)),
                ari=adjusted_rand_index(y, y_hat),
                nmi=normalized_mutual_information(y, y_hat),
                homogeneity=vm.homogeneity,
                completeness=vm.completeness,
                v=vm.v,
            )
        )
    return reports


def tune_rules(
    runtime: PipelineRuntime, gold_path: str | Path, grid: dict
) -> tuple[ThresholdRules, float]:
    """Grid-search the rule ladder maximizing mean ARI over the gold days.

    The grid lists ladder slots in order, each with candidate thresholds
    ("never" allowed); the last slot must be the catch-all default.
    """
    gold = load_clustering_gold(gold_path)
    slots = grid["rules"]
    candidate_lists = []
    for slot in slots:
        values = []
        for candidate in slot["candidates"]:
            values.append(float("inf") if candidate == "never" else float(candidate))
        candidate_lists.append(values)

    events_by_day = {day: day_events(runtime.store, day) for day in gold}
    text_by_event = {
        event.id: runtime.store.get_article(event.raw.article_id).english_text
        for events in events_by_day.values()
        for event in events
    }

    best_rules: ThresholdRules | None = None
    best_score = float("-inf")
    from .clustering import Rule

    for combo in itertools.product(*candidate_lists):
        rules = ThresholdRules(
            rules=tuple(
                Rule(when=dict(slot.get("when", {})), threshold=value)
                for slot, value in zip(slots, combo)
            )
        )
        scores = []
        for day, labels in gold.items():
            events = events_by_day[day]
            clusters = cluster_day(
                events,
                runtime.embedder,
                rules,
                text_of=lambda e: text_by_event[e.id],
                day=day,
            )
            label_of = {
                member_id: cluster.id
                for cluster in clusters
                for member_id in cluster.member_ids
            }
            event_ids = sorted(labels)
            y = [labels[event_id] for event_id in event_ids]
            y_hat = [label_of.get(event_id, f"unclustered:{event_id}") for event_id in event_ids]
            scores.append(adjusted_rand_index(y, y_hat))
        mean_score = sum(scores) / len(scores) if scores else 0.0
        if mean_score > best_score:
            best_score = mean_score
            best_rules = rules
    assert best_rules is not None
    return best_rules, best_score
