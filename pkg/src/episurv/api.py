"""HTTP service exposing pipeline outputs and the expert review loop."""

from __future__ import annotations

import hashlib
import os
import threading
from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Literal

from fastapi import Depends, FastAPI, Header, HTTPException, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import IntegrityViolation, NotFound
from .llm_extract import verify_grounding
from .models import Cluster, Decision, MappedEvent, ReviewDecision, canonical_dumps
from .pipeline import PipelineRuntime, run_cluster

DEFAULT_TOKEN_ENV = "EPISURV_API_TOKEN"


@dataclass
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    token: str | None = None
    token_env: str = DEFAULT_TOKEN_ENV
    open_mode: bool = False
    page_size: int = 50
    cors_origins: tuple[str, ...] = ()
    static_dir: str | None = None

    def resolved_token(self) -> str | None:
        return self.token or os.environ.get(self.token_env)


class ReviewRequest(BaseModel):
    decision: Literal["shortlisted", "rejected"]
    reviewer: str
    note: str = ""


class FlagRequest(BaseModel):
    reason: str
    reviewer: str = ""


class RunRequest(BaseModel):
    date: date


def _etag_response(request: Request, payload) -> Response:
    body = canonical_dumps(payload)
    etag = '"' + hashlib.sha256(body.encode("utf-8")).hexdigest()[:32] + '"'
    if request.headers.get("if-none-match") == etag:
        return Response(status_code=304, headers={"ETag": etag})
    return Response(
        content=body,
        media_type="application/json",
        headers={"ETag": etag},
    )


def create_app(runtime: PipelineRuntime, config: ApiConfig | None = None) -> FastAPI:
    config = config or ApiConfig()
    token = config.resolved_token()
    if token is None and not config.open_mode:
        raise ValueError(
            f"refusing to start without an auth token; set {config.token_env} "
            "or enable open mode explicitly"
        )
    store = runtime.store
    app = FastAPI(title="episurv", version="0.1.0")
    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )
    day_locks: dict[date, threading.Lock] = {}
    day_locks_guard = threading.Lock()

    def require_auth(authorization: str = Header(default="")) -> None:
        if token is None:
            return
        if authorization != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid token")

    auth = Depends(require_auth)

    def _review_payload(cluster_id: str) -> dict | None:
        stored = store.get_review(cluster_id)
        if stored is None:
            return None
        return {**stored.review.to_json_dict(), "stale": stored.stale}

    def _cluster_summary(cluster: Cluster) -> dict:
        representative = store.get_mapped_event(cluster.representative_id)
        return {
            "id": cluster.id,
            "day": cluster.day.isoformat(),
            "member_count": len(cluster.member_ids),
            "representative": representative.to_json_dict(),
            "review": _review_payload(cluster.id),
        }

    def _grounded(event: MappedEvent) -> bool | None:
        if event.raw.number is None:
            return None
        return verify_grounding(event.raw, store.get_article(event.raw.article_id))

    @app.get("/days/{day}/clusters")
    def day_clusters(
        request: Request,
        day: date,
        disease: str | None = None,
        state: str | None = None,
        page: int = Query(default=1, ge=1),
        _: None = auth,
    ):
        result = store.list_clusters(
            day, disease=disease or None, state=state or None,
            page=page, page_size=config.page_size,
        )
        payload = {
            "items": [_cluster_summary(c) for c in result.items],
            "page": result.page,
            "page_size": result.page_size,
            "total": result.total,
        }
        return _etag_response(request, payload)

    @app.get("/clusters/{cluster_id}")
    def cluster_detail(request: Request, cluster_id: str, _: None = auth):
        try:
            cluster = store.get_cluster(cluster_id)
        except NotFound:
            raise HTTPException(status_code=404, detail="unknown cluster")
        events = [store.get_mapped_event(mid) for mid in cluster.member_ids]
        texts = {
            e.id: store.get_article(e.raw.article_id).english_text for e in events
        }
        similarities = []
        if len(events) > 1:
            vectors = {e.id: runtime.embedder.embed(texts[e.id]) for e in events}
            for i, a in enumerate(events):
                for b in events[i + 1 :]:
                    similarity = float(vectors[a.id] @ vectors[b.id])
                    similarities.append(
                        {"a": a.id, "b": b.id, "similarity": round(similarity, 6)}
                    )
        members = [
            {
                "event": event.to_json_dict(),
                "article": store.get_article(event.raw.article_id).to_json_dict(),
                "grounded": _grounded(event),
            }
            for event in events
        ]
        payload = {
            "id": cluster.id,
            "day": cluster.day.isoformat(),
            "representative_id": cluster.representative_id,
            "members": members,
            "similarities": similarities,
            "review": _review_payload(cluster.id),
        }
        return _etag_response(request, payload)

    @app.post("/clusters/{cluster_id}/review")
    def post_review(cluster_id: str, body: ReviewRequest, _: None = auth):
        review = ReviewDecision(
            cluster_id=cluster_id,
            decision=Decision(body.decision),
            reviewer=body.reviewer,
            note=body.note,
            decided_at=datetime.now(timezone.utc),
        )
        try:
            store.put_review(review)
        except NotFound:
            raise HTTPException(status_code=404, detail="unknown cluster")
        except IntegrityViolation as exc:
            existing = _review_payload(cluster_id)
            return JSONResponse(
                status_code=409,
                content={"detail": str(exc), "review": existing},
            )
        return _review_payload(cluster_id)

    @app.post("/sources/{domain}/flag")
    def flag_source(domain: str, body: FlagRequest, _: None = auth):
        flag = store.flag_source(domain, reason=body.reason, reviewer=body.reviewer)
        return flag.to_json_dict()

    @app.post("/sources/{domain}/confirm")
    def confirm_source(domain: str, _: None = auth):
        try:
            flag = store.confirm_source(domain)
        except NotFound:
            raise HTTPException(status_code=404, detail="domain was never flagged")
        return flag.to_json_dict()

    @app.get("/sources")
    def list_sources(request: Request, _: None = auth):
        payload = {
            "items": [flag.to_json_dict() for _, flag in sorted(store.source_flags.items())]
        }
        return _etag_response(request, payload)

    @app.get("/sources/blocklist")
    def blocklist(request: Request, _: None = auth):
        exported = store.export_blocklist()
        return _etag_response(request, {"domains": sorted(exported.domains)})

    @app.get("/stats")
    def stats(
        request: Request,
        from_: str | None = Query(default=None, alias="from"),
        to: str | None = None,
        _: None = auth,
    ):
        start = date.fromisoformat(from_) if from_ else None
        end = date.fromisoformat(to) if to else None
        return _etag_response(request, store.stats(start, end))

    @app.post("/pipeline/run")
    def pipeline_run(body: RunRequest, _: None = auth):
        with day_locks_guard:
            lock = day_locks.setdefault(body.date, threading.Lock())
        with lock:
            clusters = run_cluster(runtime, body.date)
        return {"date": body.date.isoformat(), "clusters": len(clusters)}

    if config.static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
