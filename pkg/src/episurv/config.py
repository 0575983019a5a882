"""Single YAML config driving the CLI and the API service identically.

Paths are resolved relative to the config file. String values may
reference environment variables as ${VAR}; EPISURV_STORE overrides the
store path wholesale.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .api import ApiConfig
from .clustering import ThresholdRules
from .gazetteer import Gazetteer
from .ingestion import URL_LIST_FILE, SourceAdapter
from .llm_extract import FEW_SHOT, PromptConfig
from .mapping import DiseaseSynonymTable
from .pipeline import PipelineRuntime
from .providers import fakes, http
from .providers.replay import ReplayChatProvider
from .relevance import DiseaseLexicon
from .store import Store

_ENV_REF = re.compile(r"\$\{(\w+)\}")


class ConfigError(Exception):
    """The config file is missing, malformed or inconsistent."""


def _expand_env(value):
    if isinstance(value, str):
        return _ENV_REF.sub(lambda m: os.environ.get(m.group(1), ""), value)
    if isinstance(value, dict):
        return {k: _expand_env(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_expand_env(v) for v in value]
    return value


@dataclass
class AppConfig:
    base_dir: Path
    store_path: Path
    reference: dict
    providers: dict
    sources: list[dict] = field(default_factory=list)
    extraction: dict = field(default_factory=dict)
    api: dict = field(default_factory=dict)

    def resolve(self, path_value: str) -> Path:
        path = Path(path_value)
        return path if path.is_absolute() else self.base_dir / path


def load_config(path: str | Path) -> AppConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    data = _expand_env(data)
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    try:
        store_path = os.environ.get("EPISURV_STORE") or data["store"]
        reference = data["reference"]
        providers = data["providers"]
    except KeyError as exc:
        raise ConfigError(f"config is missing the {exc.args[0]!r} section") from exc
    return AppConfig(
        base_dir=path.parent.resolve(),
        store_path=Path(store_path)
        if Path(store_path).is_absolute()
        else path.parent.resolve() / store_path,
        reference=reference,
        providers=providers,
        sources=data.get("sources", []),
        extraction=data.get("extraction", {}),
        api=data.get("api", {}),
    )


def _build_classifier(spec: dict):
    kind = spec.get("kind", "keyword")
    if kind == "keyword":
        return fakes.KeywordClassifier(threshold=float(spec.get("threshold", 0.5)))
    if kind == "http":
        return http.HttpClassifier(
            url=spec["url"],
            threshold=float(spec.get("threshold", 0.5)),
            token_env=spec.get("token_env"),
        )
    raise ConfigError(f"unknown classifier kind {kind!r}")


def _build_translator(spec: dict, cfg: AppConfig):
    kind = spec.get("kind", "identity")
    if kind == "identity":
        return fakes.IdentityTranslator()
    if kind == "echo":
        return fakes.EchoTranslator()
    if kind == "table":
        table = json.loads(cfg.resolve(spec["path"]).read_text(encoding="utf-8"))
        return fakes.TableTranslator(translations=table)
    if kind == "http":
        return http.HttpTranslator(url=spec["url"], token_env=spec.get("token_env"))
    raise ConfigError(f"unknown translator kind {kind!r}")


def _build_qa(spec: dict):
    kind = spec.get("kind", "pattern")
    if kind == "pattern":
        return fakes.PatternQa.count_extractor()
    raise ConfigError(f"unknown qa kind {kind!r}")


def _build_nli(spec: dict):
    kind = spec.get("kind", "overlap")
    if kind == "overlap":
        return fakes.OverlapNli()
    raise ConfigError(f"unknown nli kind {kind!r}")


def _build_chat(spec: dict | None, cfg: AppConfig):
    if spec is None or spec.get("kind") in (None, "none"):
        return None
    kind = spec["kind"]
    if kind == "replay":
        return ReplayChatProvider.from_file(cfg.resolve(spec["path"]))
    if kind == "http":
        return http.HttpChat(
            url=spec["url"],
            model=spec["model"],
            temperature=float(spec.get("temperature", 0.0)),
            token_env=spec.get("token_env", "EPISURV_CHAT_TOKEN"),
        )
    raise ConfigError(f"unknown chat kind {kind!r}")


def _build_embedder(spec: dict):
    kind = spec.get("kind", "hashed-ngram")
    if kind == "hashed-ngram":
        return fakes.HashedNgramEmbedder(dimension=int(spec.get("dimension", 256)))
    if kind == "http":
        return http.HttpEmbedder(
            url=spec["url"],
            dimension=int(spec["dimension"]),
            token_env=spec.get("token_env"),
        )
    raise ConfigError(f"unknown embedder kind {kind!r}")


def build_runtime(cfg: AppConfig) -> PipelineRuntime:
    try:
        lexicon = DiseaseLexicon.from_csv(cfg.resolve(cfg.reference["lexicon"]))
        gazetteer = Gazetteer.from_csv(cfg.resolve(cfg.reference["gazetteer"]))
        synonyms = DiseaseSynonymTable.from_files(
            cfg.resolve(cfg.reference["synonyms"]),
            cfg.resolve(cfg.reference["canonical_diseases"]),
            cfg.resolve(cfg.reference["pending_synonyms"])
            if cfg.reference.get("pending_synonyms")
            else None,
        )
    except KeyError as exc:
        raise ConfigError(f"reference section is missing {exc.args[0]!r}") from exc
    rules = (
        ThresholdRules.from_file(cfg.resolve(cfg.reference["rules"]))
        if cfg.reference.get("rules")
        else ThresholdRules.bundled()
    )
    extraction = cfg.extraction
    return PipelineRuntime(
        store=Store(cfg.store_path),
        classifier=_build_classifier(cfg.providers.get("classifier", {})),
        translator=_build_translator(cfg.providers.get("translator", {}), cfg),
        qa=_build_qa(cfg.providers.get("qa", {})),
        nli=_build_nli(cfg.providers.get("nli", {})),
        embedder=_build_embedder(cfg.providers.get("embedder", {})),
        lexicon=lexicon,
        gazetteer=gazetteer,
        synonyms=synonyms,
        rules=rules,
        prompt_config=PromptConfig.bundled(mode=extraction.get("prompt_mode", FEW_SHOT)),
        chat=_build_chat(cfg.providers.get("chat"), cfg),
        vote_count=int(extraction.get("vote_count", 3)),
        confidence_floor=float(extraction.get("confidence_floor", 0.3)),
    )


def adapter_by_name(cfg: AppConfig, name: str) -> SourceAdapter:
    for spec in cfg.sources:
        if spec.get("name") == name:
            kind = spec.get("kind", URL_LIST_FILE)
            config = {k: v for k, v in spec.items() if k not in {"name", "kind"}}
            if kind == URL_LIST_FILE and "path" in config:
                config["path"] = str(cfg.resolve(config["path"]))
            return SourceAdapter(name=name, kind=kind, config=config)
    raise ConfigError(f"no source named {name!r} in the config")


def api_config(cfg: AppConfig) -> ApiConfig:
    section = cfg.api
    return ApiConfig(
        host=section.get("host", "127.0.0.1"),
        port=int(section.get("port", 8000)),
        token=section.get("token"),
        token_env=section.get("token_env", "EPISURV_API_TOKEN"),
        open_mode=bool(section.get("open_mode", False)),
        page_size=int(section.get("page_size", 50)),
        cors_origins=tuple(section.get("cors_origins", ())),
        static_dir=str(cfg.resolve(section["static_dir"])) if section.get("static_dir") else None,
    )
