"""Event-based disease surveillance from online news metadata.

The pipeline turns raw article metadata into deduplicated, standardized,
reviewable health events: ingest -> classify -> translate -> entity gate ->
extract -> map -> cluster -> review. All model inference sits behind
pluggable provider contracts so the whole pipeline runs hermetically on
deterministic fakes.
"""

from importlib import resources


def asset_path(*parts: str):
    """Path-like handle to a bundled data asset."""
    root = resources.files(__name__) / "assets"
    for part in parts:
        root = root / part
    return root


def asset_text(*parts: str) -> str:
    return asset_path(*parts).read_text(encoding="utf-8")
