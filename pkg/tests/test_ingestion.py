"""Ingestion: metadata extraction, filters, adapters, deduplication."""

from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone

import pytest

from episurv.errors import AdapterUnavailable, NotHtml
from episurv.ingestion import (
    Blocklist,
    SourceAdapter,
    extract_meta,
    filter_domain,
    filter_recency,
    ingest,
)
from episurv.models import Article

NOW = datetime(2024, 6, 21, 12, 0, tzinfo=timezone.utc)


def article_for(url: str, published_at=None) -> Article:
    return Article.build(
        url=url, title="Dengue cases rise in the district", description="",
        language="en", fetched_at=NOW, published_at=published_at,
    )


class TestExtractMeta:
    def test_canonical_tags(self):
        html = '<html><head><title>T</title><meta name="description" content="D"></head></html>'
        assert extract_meta(html) == {"title": "T", "description": "D"}

    def test_og_fallbacks(self):
        html = (
            '<head><meta property="og:title" content="OT">'
            '<meta property="og:description" content="OD"></head>'
        )
        assert extract_meta(html) == {"title": "OT", "description": "OD"}

    def test_named_description_beats_og(self):
        html = (
            '<title>T</title><meta property="og:description" content="OD">'
            '<meta name="description" content="D">'
        )
        assert extract_meta(html)["description"] == "D"

    def test_entities_decoded(self):
        assert extract_meta("<title>A &amp; B</title>")["title"] == "A & B"

    def test_missing_tags_yield_empty_strings(self):
        assert extract_meta("<p>no metadata here</p>") == {"title": "", "description": ""}

    def test_malformed_html_never_raises(self):
        html = "<title>Open <meta name='description' content='D' <div><<<>"
        result = extract_meta(html)
        assert set(result) == {"title", "description"}

    def test_binary_payload_rejected(self):
        with pytest.raises(NotHtml):
            extract_meta(b"\x00\x01\x02PNG")
        with pytest.raises(NotHtml):
            extract_meta(bytes(range(128, 256)) * 10)

    def test_utf8_bytes_accepted(self):
        html = "<title>डेंगू</title>".encode("utf-8")
        assert extract_meta(html)["title"] == "डेंगू"


class TestFilterDomain:
    blocklist = Blocklist(domains=frozenset({"foreignnews.example"}))

    def test_listed_domain_dropped(self):
        decision = filter_domain(article_for("https://foreignnews.example/a"), self.blocklist)
        assert not decision.keep

    def test_unlisted_domain_kept(self):
        assert filter_domain(article_for("https://localnews.example/a"), self.blocklist).keep

    def test_subdomain_of_listed_registrable_domain_dropped(self):
        decision = filter_domain(article_for("https://m.foreignnews.example/a"), self.blocklist)
        assert not decision.keep

    def test_suffix_match_requires_label_boundary(self):
        assert filter_domain(
            article_for("https://notforeignnews.example/a"), self.blocklist
        ).keep

    def test_from_file_ignores_comments(self, tmp_path):
        path = tmp_path / "blocklist.txt"
        path.write_text("# comment\nforeignnews.example  # inline\n\nother.example\n")
        blocklist = Blocklist.from_file(path)
        assert blocklist.domains == frozenset({"foreignnews.example", "other.example"})


class TestFilterRecency:
    def test_recent_kept(self):
        art = article_for("https://a.example/x", published_at=NOW - timedelta(hours=2))
        assert filter_recency(art, NOW, timedelta(hours=48)).keep

    def test_stale_dropped(self):
        art = article_for("https://a.example/x", published_at=NOW - timedelta(days=30))
        assert not filter_recency(art, NOW, timedelta(hours=48)).keep

    def test_missing_published_at_kept(self):
        assert filter_recency(article_for("https://a.example/x"), NOW, timedelta(hours=48)).keep

    def test_future_dated_dropped(self):
        art = article_for("https://a.example/x", published_at=NOW + timedelta(hours=5))
        assert not filter_recency(art, NOW, timedelta(hours=48)).keep


def write_fixture(tmp_path, rows):
    path = tmp_path / "articles.ndjson"
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    return path


def candidate(url, title="Dengue cases rise in the city", **extra):
    return {"url": url, "title": title, "published_at": NOW.isoformat(), **extra}


class TestIngest:
    blocklist = Blocklist(domains=frozenset({"blocked.example"}))

    def adapter(self, path) -> SourceAdapter:
        return SourceAdapter(name="fixture", kind="url_list_file", config={"path": str(path)})

    def test_fixture_counts(self, tmp_path):
        rows = [
            candidate("https://ok.example/1"),
            candidate("https://ok.example/2"),
            candidate("https://ok.example/3"),
            candidate("https://ok.example/4"),
            candidate("https://ok.example/5"),
            candidate("https://ok.example/6"),
            candidate("https://blocked.example/a"),
            candidate("https://blocked.example/b"),
            candidate("https://m.blocked.example/c"),
            candidate("https://ok.example/1"),  # duplicate url
        ]
        articles = list(ingest(self.adapter(write_fixture(tmp_path, rows)), self.blocklist, now=NOW))
        assert len(articles) == 6

    def test_empty_fixture_is_empty_stream(self, tmp_path):
        path = tmp_path / "empty.ndjson"
        path.write_text("")
        assert list(ingest(self.adapter(path), self.blocklist, now=NOW)) == []

    def test_unsupported_language_dropped(self, tmp_path):
        rows = [candidate("https://ok.example/ru", title="Вспышка лихорадки в городе")]
        assert list(ingest(self.adapter(write_fixture(tmp_path, rows)), self.blocklist, now=NOW)) == []

    def test_language_identified_per_article(self, tmp_path):
        rows = [
            candidate("https://ok.example/hi", title="शहर में डेंगू के मामले बढ़ रहे हैं"),
            candidate("https://ok.example/en"),
        ]
        articles = list(ingest(self.adapter(write_fixture(tmp_path, rows)), self.blocklist, now=NOW))
        assert sorted(a.language for a in articles) == ["en", "hi"]

    def test_html_file_candidates(self, tmp_path):
        page = tmp_path / "page.html"
        page.write_text(
            '<title>Cholera outbreak reported</title>'
            '<meta name="description" content="Twelve cases in the district">'
        )
        rows = [{"url": "https://ok.example/html", "published_at": NOW.isoformat(),
                 "html_path": "page.html"}]
        articles = list(
            ingest(self.adapter(write_fixture(tmp_path, rows)), self.blocklist,
                   now=NOW, html_root=tmp_path)
        )
        assert len(articles) == 1
        assert articles[0].text == "Cholera outbreak reported. Twelve cases in the district"

    def test_idempotent_ids_across_runs(self, tmp_path):
        rows = [candidate("https://ok.example/1"), candidate("https://ok.example/2")]
        path = write_fixture(tmp_path, rows)
        first = [a.id for a in ingest(self.adapter(path), self.blocklist, now=NOW)]
        second = [a.id for a in ingest(self.adapter(path), self.blocklist, now=NOW)]
        assert first == second

    def test_per_item_failures_skipped(self, tmp_path):
        rows = [
            {"url": "https://ok.example/bad", "published_at": "not-a-date"},
            candidate("https://ok.example/good"),
        ]
        articles = list(ingest(self.adapter(write_fixture(tmp_path, rows)), self.blocklist, now=NOW))
        assert [a.url for a in articles] == ["https://ok.example/good"]

    def test_missing_fixture_is_adapter_unavailable(self, tmp_path):
        with pytest.raises(AdapterUnavailable):
            list(ingest(self.adapter(tmp_path / "nope.ndjson"), self.blocklist, now=NOW))

    def test_feed_adapter_retries_then_fails(self):
        calls = []

        def flaky_fetch():
            calls.append(1)
            raise TimeoutError("adapter timeout")

        adapter = SourceAdapter(name="feed", kind="feed_poll", config={"fetch": flaky_fetch})
        with pytest.raises(AdapterUnavailable):
            list(ingest(adapter, self.blocklist, now=NOW, retries=2))
        assert len(calls) == 3  # initial try + 2 retries

    def test_feed_adapter_success_path(self):
        payload = json.dumps(candidate("https://ok.example/feed"))
        adapter = SourceAdapter(name="feed", kind="feed_poll", config={"fetch": lambda: payload})
        articles = list(ingest(adapter, self.blocklist, now=NOW))
        assert [a.url for a in articles] == ["https://ok.example/feed"]

    def test_every_emitted_article_passes_all_filters(self, tmp_path):
        rows = [
            candidate("https://ok.example/1"),
            candidate("https://blocked.example/x"),
            candidate("https://ok.example/old",
                      **{"published_at": (NOW - timedelta(days=30)).isoformat()}),
            candidate("https://ok.example/ru", title="Вспышка лихорадки в городе"),
        ]
        articles = list(ingest(self.adapter(write_fixture(tmp_path, rows)), self.blocklist, now=NOW))
        for article in articles:
            assert not self.blocklist.matches(article.domain)
            assert article.language in {"en", "hi"}
            assert filter_recency(article, NOW).keep
        assert len(articles) == 1
