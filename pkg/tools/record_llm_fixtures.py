"""Regenerate the committed chat-replay fixtures under tests/fixtures/llm_replay/.

Run after changing prompt assets (request hashes depend on them):

    python3 tools/record_llm_fixtures.py
"""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from episurv.llm_extract import PromptConfig, extract_events_llm  # noqa: E402
from episurv.mapping import DiseaseSynonymTable, map_disease_llm  # noqa: E402
from episurv.models import Article  # noqa: E402
from episurv.providers.fakes import ScriptedChat  # noqa: E402
from episurv.providers.replay import RecordingChatProvider  # noqa: E402

FIXTURES = REPO / "tests" / "fixtures"
REPLAY = FIXTURES / "llm_replay"

NOW = datetime(2024, 6, 21, 12, 0, 0, tzinfo=timezone.utc)


def record_extraction() -> None:
    out = REPLAY / "extraction_behaviors.json"
    out.unlink(missing_ok=True)
    cases = json.loads((FIXTURES / "llm_behavior_cases.json").read_text(encoding="utf-8"))
    cfg = PromptConfig.bundled()
    for case in cases:
        article = Article.build(
            url=case["url"],
            title=case["text"],
            description="",
            language="en",
            fetched_at=NOW,
            published_at=NOW,
        ).with_translation(case["text"])
        scripted = ScriptedChat(responses=list(case["responses"]), model="fixture-extractor")
        recorder = RecordingChatProvider(inner=scripted, path=out)
        extraction = extract_events_llm(article, cfg, recorder)
        got = [
            (e.disease, e.location, e.incident.value, e.incident_type.value, e.number)
            for e in extraction.events
        ]
        expected = [
            (e["disease"], e["location"], e["incident"], e["incident_type"], e["number"])
            for e in case["expected"]
        ]
        if got != expected:
            raise SystemExit(f"{case['name']}: recorded behavior {got} != expected {expected}")
        print(f"recorded {case['name']}: {len(extraction.events)} events")


DISEASE_CASES = [
    ("Diarrhoea outbreak", "Acute Diarrhoeal Disease"),
    ("Bird flu (H5N1)", "Bird flu"),
    ("Cricket Fever", "Others"),
    ("sick after eating contaminated food", "Food Poisoning infection"),
]


def record_disease_mapper() -> None:
    out = REPLAY / "disease_mapper.json"
    out.unlink(missing_ok=True)
    table = DiseaseSynonymTable.from_files(
        FIXTURES / "synonyms.csv", FIXTURES / "canonical_diseases.txt"
    )
    for name, response in DISEASE_CASES:
        scripted = ScriptedChat(responses=[response], model="fixture-mapper")
        recorder = RecordingChatProvider(inner=scripted, path=out)
        result = map_disease_llm(name, table, recorder)
        expected = response if response != "Food Poisoning infection" else response
        if result.standard != expected:
            raise SystemExit(f"{name}: mapped to {result.standard}, expected {expected}")
        print(f"recorded disease mapping {name!r} -> {result.standard}")


if __name__ == "__main__":
    REPLAY.mkdir(parents=True, exist_ok=True)
    record_extraction()
    record_disease_mapper()
    print("fixtures written to", REPLAY)
