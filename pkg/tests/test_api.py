"""HTTP surface: auth, review loop, source flags, stats, pipeline run."""

from __future__ import annotations

from datetime import date

import pytest
from fastapi.testclient import TestClient

from conftest import build_article, make_runtime
from episurv.api import ApiConfig, create_app
from episurv.models import Cluster, Extractor, MappedEvent, RawEvent
from episurv.pipeline import PipelineRuntime
from episurv.store import Store

DAY = date(2024, 6, 21)
TOKEN = "test-token"


def seed_day(runtime: PipelineRuntime, n=3) -> list[Cluster]:
    store = runtime.store
    events = []
    for i in range(n):
        art = build_article(
            f"Dengue cases rise in Pune, {10 + i} admitted",
            url=f"https://outlet{i}.example/dengue-pune",
        )
        store.put_article(art)
        raw = RawEvent(
            disease="Dengue", location="Pune", incident="case", incident_type="new",
            number=10 + i, article_id=art.id, extractor=Extractor.LLM,
        )
        store.put_raw_event(raw)
        event = MappedEvent(
            raw=raw, standard_disease="Dengue", state="Maharashtra", district="Pune"
        )
        store.put_mapped_event(event)
        events.append(event)
    clusters = [
        Cluster.build(DAY, (events[0].id, events[1].id), events[0].id),
        Cluster.build(DAY, (events[2].id,), events[2].id),
    ]
    store.replace_day_clusters(DAY, clusters)
    return clusters


@pytest.fixture()
def runtime(tmp_path):
    return make_runtime(tmp_path / "store")


@pytest.fixture()
def client(runtime) -> TestClient:
    app = create_app(runtime, ApiConfig(token=TOKEN))
    client = TestClient(app)
    client.headers["Authorization"] = f"Bearer {TOKEN}"
    return client


class TestAuth:
    def test_refuses_to_start_without_token(self, runtime, monkeypatch):
        monkeypatch.delenv("EPISURV_API_TOKEN", raising=False)
        with pytest.raises(ValueError):
            create_app(runtime, ApiConfig())

    def test_open_mode_starts_without_token(self, runtime, monkeypatch):
        monkeypatch.delenv("EPISURV_API_TOKEN", raising=False)
        create_app(runtime, ApiConfig(open_mode=True))

    def test_requests_without_token_rejected(self, runtime):
        app = create_app(runtime, ApiConfig(token=TOKEN))
        bare = TestClient(app)
        assert bare.get(f"/days/{DAY}/clusters").status_code == 401
        bad = bare.get(f"/days/{DAY}/clusters", headers={"Authorization": "Bearer wrong"})
        assert bad.status_code == 401


class TestClusters:
    def test_day_listing_with_representative_and_count(self, runtime, client):
        clusters = seed_day(runtime)
        body = client.get(f"/days/{DAY}/clusters").json()
        assert body["total"] == 2
        by_id = {item["id"]: item for item in body["items"]}
        assert by_id[clusters[0].id]["member_count"] == 2
        assert by_id[clusters[0].id]["representative"]["standard_disease"] == "Dengue"

    def test_filters(self, runtime, client):
        seed_day(runtime)
        assert client.get(f"/days/{DAY}/clusters?disease=Dengue").json()["total"] == 2
        assert client.get(f"/days/{DAY}/clusters?disease=Cholera").json()["total"] == 0
        assert client.get(f"/days/{DAY}/clusters?state=Maharashtra").json()["total"] == 2

    def test_detail_members_articles_similarities(self, runtime, client):
        clusters = seed_day(runtime)
        body = client.get(f"/clusters/{clusters[0].id}").json()
        assert len(body["members"]) == 2
        member = body["members"][0]
        assert member["article"]["domain"].endswith(".example")
        assert member["grounded"] is True
        assert len(body["similarities"]) == 1
        assert 0.0 <= body["similarities"][0]["similarity"] <= 1.0

    def test_unknown_cluster_404(self, client):
        assert client.get("/clusters/doesnotexist").status_code == 404

    def test_etag_304(self, runtime, client):
        seed_day(runtime)
        first = client.get(f"/days/{DAY}/clusters")
        etag = first.headers["ETag"]
        again = client.get(f"/days/{DAY}/clusters", headers={"If-None-Match": etag})
        assert again.status_code == 304


class TestReviewLoop:
    def test_review_then_conflict_409(self, runtime, client):
        clusters = seed_day(runtime)
        ok = client.post(
            f"/clusters/{clusters[0].id}/review",
            json={"decision": "shortlisted", "reviewer": "ncdc", "note": "verified"},
        )
        assert ok.status_code == 200
        assert ok.json()["decision"] == "shortlisted"

        conflict = client.post(
            f"/clusters/{clusters[0].id}/review",
            json={"decision": "rejected", "reviewer": "other", "note": ""},
        )
        assert conflict.status_code == 409
        assert conflict.json()["review"]["decision"] == "shortlisted"

    def test_decision_persisted_before_response(self, runtime, client):
        clusters = seed_day(runtime)
        client.post(
            f"/clusters/{clusters[0].id}/review",
            json={"decision": "rejected", "reviewer": "ncdc", "note": ""},
        )
        reloaded = Store(runtime.store.root)
        assert reloaded.get_review(clusters[0].id).review.decision.value == "rejected"

    def test_invalid_decision_422(self, runtime, client):
        clusters = seed_day(runtime)
        bad = client.post(
            f"/clusters/{clusters[0].id}/review",
            json={"decision": "maybe", "reviewer": "x", "note": ""},
        )
        assert bad.status_code == 422

    def test_review_unknown_cluster_404(self, client):
        resp = client.post(
            "/clusters/ghost/review",
            json={"decision": "shortlisted", "reviewer": "x", "note": ""},
        )
        assert resp.status_code == 404


class TestSources:
    def test_flag_confirm_blocklist_flow(self, runtime, client):
        assert client.post(
            "/sources/shady.example/flag", json={"reason": "fabricated", "reviewer": "ncdc"}
        ).status_code == 200
        assert client.get("/sources/blocklist").json()["domains"] == []
        assert client.post("/sources/shady.example/confirm").status_code == 200
        assert client.get("/sources/blocklist").json()["domains"] == ["shady.example"]

    def test_pending_flag_visible(self, runtime, client):
        client.post("/sources/maybe.example/flag", json={"reason": "sensational"})
        flags = client.get("/sources").json()["items"]
        assert flags[0]["confirmed"] is False


class TestStatsAndRun:
    def test_stats_counts_equal_store_scan(self, runtime, client):
        seed_day(runtime)
        body = client.get(f"/stats?from={DAY}&to={DAY}").json()
        assert body == runtime.store.stats(DAY, DAY)
        assert body["articles"] == 3
        assert body["clusters"] == 2

    def test_pipeline_run_is_idempotent(self, runtime, client):
        seed_day(runtime)
        first = client.post("/pipeline/run", json={"date": DAY.isoformat()})
        assert first.status_code == 200
        listed = client.get(f"/days/{DAY}/clusters").json()
        second = client.post("/pipeline/run", json={"date": DAY.isoformat()})
        assert second.json() == first.json()
        assert client.get(f"/days/{DAY}/clusters").json() == listed
