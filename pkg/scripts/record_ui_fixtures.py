#!/usr/bin/env python3
"""Record service API responses as fixtures for the frontend contract tests.

The UI must display only engine-computed results, so its tests replay real
responses: decision-graph steps, checklist/suggestion/status/trace payloads,
and the SSE event sequence of a KPI flipping to missed. Re-run after changing
the service or the fixtures:

    python3 scripts/record_ui_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
import threading
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from fastapi.testclient import TestClient  # noqa: E402

from saftoolkit.service import create_app  # noqa: E402

OUT = ROOT / "frontend" / "tests" / "fixtures"

HOT_BATCH = "\n".join(
    json.dumps(
        {
            "run_id": "hot",
            "timestamp": f"2024-05-01T{hour}:00:00Z",
            "metric": "cpu_util",
            "value": value,
            "unit": "%",
        }
    )
    for hour, value in (("13", 95.0), ("14", 99.0), ("15", 97.0))
)


def record_api(client: TestClient, conflict: TestClient) -> None:
    api = OUT / "api"
    api.mkdir(parents=True, exist_ok=True)

    (api / "workspace.json").write_text(json.dumps(client.get("/api/workspace").json(), indent=2))
    (api / "kpis.json").write_text(json.dumps(client.get("/api/kpis").json(), indent=2))
    (api / "checklist.json").write_text(
        json.dumps(client.get("/api/guidance/checklist").json(), indent=2)
    )
    (api / "kpi_status.json").write_text(
        json.dumps(
            client.get("/api/kpis/peak_utilization/status?at=2024-05-01T12:00:00Z").json(),
            indent=2,
        )
    )
    (api / "trace.json").write_text(
        json.dumps(client.get("/api/kpis/peak_utilization/trace").json(), indent=2)
    )
    (api / "suggestions.json").write_text(
        json.dumps(conflict.get("/api/suggestions?dm=conflict_demo").json(), indent=2)
    )
    (api / "validate.json").write_text(json.dumps(conflict.post("/api/validate").json(), indent=2))

    steps = {}
    for answers in ([], ["yes"], ["no"], ["no", "yes"], ["no", "no"], ["no", "no", "yes"], ["no", "no", "no"]):
        response = client.post("/api/guidance/decision-graph/step", json={"answers": answers})
        steps[",".join(answers)] = response.json()
    (api / "graph_steps.json").write_text(json.dumps(steps, indent=2))


def record_sse(client: TestClient) -> None:
    """Capture the event stream produced by an ingest that flips a KPI."""
    events: list[dict] = []

    def reader() -> None:
        with client.stream("GET", "/api/events?max_events=3&timeout=10") as stream:
            current = None
            for line in stream.iter_lines():
                if line.startswith("event: "):
                    current = line[len("event: "):]
                elif line.startswith("data: ") and current is not None:
                    events.append({"type": current, "data": json.loads(line[len("data: "):])})
                    current = None

    thread = threading.Thread(target=reader)
    thread.start()
    bus = client.app.state.saf.bus
    deadline = time.monotonic() + 10
    while time.monotonic() < deadline and not bus._subscribers:
        time.sleep(0.02)
    response = client.post("/api/measures?at=2024-05-01T15:00:00Z", content=HOT_BATCH)
    assert response.status_code == 200, response.text
    # a revision event closes the stream's third slot deterministically
    put = client.put(
        "/api/models/dm/extra",
        content=(
            'decision_map extra "Extra" system "S" {\n'
            '  qa response_time "Response time" dimension technical impact immediate\n'
            "}\n"
        ),
        headers={"content-type": "text/plain"},
    )
    assert put.status_code == 200, put.text
    thread.join(20)
    assert not thread.is_alive(), "SSE recording did not finish"
    (OUT / "sse_events.jsonl").write_text("\n".join(json.dumps(e) for e in events) + "\n")


def main() -> int:
    scratch = Path(tempfile.mkdtemp(prefix="saf-record-"))
    cloud = scratch / "cloud"
    shutil.copytree(ROOT / "tests" / "fixtures" / "cloud", cloud)
    conflict_dir = scratch / "conflict"
    shutil.copytree(ROOT / "tests" / "fixtures" / "conflict", conflict_dir)

    client = TestClient(create_app(cloud, cloud / "store"))
    conflict = TestClient(create_app(conflict_dir, scratch / "conflict-store"))
    OUT.mkdir(parents=True, exist_ok=True)
    record_api(client, conflict)
    record_sse(client)
    print(f"fixtures recorded under {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
