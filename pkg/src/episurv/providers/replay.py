"""Record/replay for chat providers.

A recording wraps a live provider and captures (request hash -> response
texts) into a JSON fixture; a replay serves those responses offline so
model behaviors become regression tests without live API calls. The
fixture carries the model id and temperature so replayed request hashes
match the recorded ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..errors import ProviderUnavailable
from ..models import canonical_dumps, content_id
from .base import ChatProvider, Message


def request_hash(model: str, messages: Sequence[Message], temperature: float) -> str:
    payload = canonical_dumps(
        {"model": model, "messages": list(messages), "temperature": temperature}
    )
    return content_id(payload)


def _load_fixture(path: Path) -> dict:
    data = json.loads(path.read_text(encoding="utf-8"))
    data.setdefault("model", "replay")
    data.setdefault("temperature", 0.0)
    data["responses"] = {
        key: value if isinstance(value, list) else [value]
        for key, value in data.get("responses", {}).items()
    }
    return data


@dataclass
class ReplayChatProvider:
    """Serves recorded responses; unknown requests raise ProviderUnavailable.

    Repeated calls with the same request walk through the recorded response
    list (sticking at the last one) so consistency-vote flows replay their
    per-call outputs.
    """

    responses: dict[str, list[str]]
    model: str = "replay"
    temperature: float = 0.0
    name: str = "replay-chat"
    _cursor: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "ReplayChatProvider":
        data = _load_fixture(Path(path))
        return cls(
            responses=data["responses"],
            model=data["model"],
            temperature=data["temperature"],
        )

    def complete(self, messages: Sequence[Message]) -> str:
        key = request_hash(self.model, messages, self.temperature)
        try:
            recorded = self.responses[key]
        except KeyError:
            raise ProviderUnavailable(f"no recorded response for request {key}") from None
        index = self._cursor.get(key, 0)
        self._cursor[key] = index + 1
        return recorded[min(index, len(recorded) - 1)]


@dataclass
class RecordingChatProvider:
    """Pass-through wrapper that appends responses to a fixture file."""

    inner: ChatProvider
    path: Path

    def __post_init__(self) -> None:
        self.path = Path(self.path)

    @property
    def name(self) -> str:
        return f"recording({self.inner.name})"

    @property
    def model(self) -> str:
        return self.inner.model

    @property
    def temperature(self) -> float:
        return self.inner.temperature

    def complete(self, messages: Sequence[Message]) -> str:
        response = self.inner.complete(messages)
        key = request_hash(self.inner.model, messages, self.inner.temperature)
        if self.path.exists():
            data = _load_fixture(self.path)
            if data["model"] != self.inner.model or data["temperature"] != self.inner.temperature:
                raise ValueError("fixture was recorded against a different model configuration")
        else:
            data = {
                "model": self.inner.model,
                "temperature": self.inner.temperature,
                "responses": {},
            }
        data["responses"].setdefault(key, []).append(response)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(
            json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        return response
