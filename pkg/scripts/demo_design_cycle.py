#!/usr/bin/env python3
"""End-to-end walkthrough of the design and monitor cycles on the cloud fixture.

Builds a scratch workspace, steps the guidance instruments, validates, renders,
ingests measures, evaluates the KPI, and traces a miss back to architecture
elements. Run from the repository root:

    python3 scripts/demo_design_cycle.py
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from saftoolkit import render  # noqa: E402
from saftoolkit.archtrace import trace_kpi  # noqa: E402
from saftoolkit.dsl import parse_workspace  # noqa: E402
from saftoolkit.guidance import (  # noqa: E402
    DEFAULT_DECISION_GRAPH,
    checklist_report,
    classify_impact,
    suggest_effects,
)
from saftoolkit.ingest import load_store  # noqa: E402
from saftoolkit.kpi import detect_transitions, evaluate_all  # noqa: E402
from saftoolkit.validation import consistency_summary, validate  # noqa: E402


def main() -> int:
    scratch = Path(tempfile.mkdtemp(prefix="saf-demo-"))
    workspace_dir = scratch / "workspace"
    shutil.copytree(ROOT / "tests" / "fixtures" / "cloud", workspace_dir)

    print("== Design cycle ==")
    outcome = classify_impact(DEFAULT_DECISION_GRAPH, ["yes"])
    print(f"decision graph, answers [yes] -> impact level: {outcome.level.value}")

    result = parse_workspace(workspace_dir)
    if result.document is None:
        for diag in result.diagnostics:
            print(diag.render())
        return 2
    ws = result.document

    print("\nchecklist:")
    for item in checklist_report(ws):
        print(f"  [{item.status:>14}] {item.item_id}")

    print("\nvalidation:")
    diags = validate(ws)
    print(f"  {len(diags)} diagnostic(s)")
    for diag in diags:
        print("  " + diag.render())
    print(f"  consistency: {consistency_summary(ws).to_json()}")

    dm = ws.decision_maps[0]
    suggestions = suggest_effects(dm, list(ws.matrices))
    print(f"\n{len(suggestions)} effect suggestion(s) from loaded matrices")

    svg_path = scratch / "cloud.svg"
    svg_path.write_text(render.render_svg(render.layout_dm(dm), dm))
    print(f"rendered decision map -> {svg_path}")

    print("\n== Monitor cycle ==")
    store, _ = load_store(workspace_dir / "store")
    as_of = datetime(2024, 5, 1, 12, 0, 0, tzinfo=timezone.utc)
    baseline = evaluate_all(ws.all_kpis(), store, as_of)
    for status in baseline:
        print(f"baseline {status.kpi_id}: {status.state.value} (value={status.value})")

    hot = "\n".join(
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
    outcome = store.ingest_batch(hot)
    print(f"ingested spike batch: accepted={outcome.accepted}")

    later = datetime(2024, 5, 1, 15, 0, 0, tzinfo=timezone.utc)
    current = evaluate_all(ws.all_kpis(), store, later)
    transitions = detect_transitions(baseline, current, {k.id: k for k in ws.all_kpis()})
    for status in current:
        print(f"now {status.kpi_id}: {status.state.value} (value={status.value})")
    for transition in transitions:
        print(f"transition into missed: {transition.kpi_id} fires {list(transition.fired_actions)}")
        trace = trace_kpi(ws, transition.kpi_id)
        print(f"  responsible elements: {list(trace.elements)}")

    print(f"\nscratch workspace kept at {scratch}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
