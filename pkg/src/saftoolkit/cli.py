"""saf: command-line face of the design and monitor cycles.

Exit codes: 0 success (warnings allowed), 1 warnings under --strict,
2 validation/parse errors, 3 usage errors. In JSON mode stdout carries data
only; human-mode diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import archtrace, guidance, render, validation
from .diagnostics import Diagnostic, SafError, sort_diagnostics
from .dsl import (
    parse_document,
    parse_matrix,
    parse_workspace,
    serialize,
)
from .ingest import MeasureStore, format_rfc3339, load_store, parse_rfc3339
from .kpi import KpiState, KpiStatus, detect_transitions, evaluate_all
from .model import DecisionMap
from .workspace import Workspace, resolve_workspace

EXIT_OK = 0
EXIT_WARNINGS = 1
EXIT_ERRORS = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


class SafArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def config_dir() -> Path | None:
    value = os.environ.get("SAF_CONFIG")
    return Path(value) if value else None


def _dump_json(payload) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _print_diagnostics(diags: list[Diagnostic], as_json: bool) -> None:
    if as_json:
        _dump_json([d.to_json() for d in sort_diagnostics(diags)])
    else:
        for d in sort_diagnostics(diags):
            print(d.render(), file=sys.stderr)


def _read_file(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p.read_text(encoding="utf-8")


def _load_workspace(directory: str, matrices_dir: str | None = None):
    root = Path(directory)
    if not root.is_dir():
        raise UsageError(f"no such workspace directory: {directory}")
    extra: tuple = ()
    matrices = matrices_dir or (
        str(config_dir() / "matrices") if config_dir() and (config_dir() / "matrices").is_dir() else None
    )
    if matrices:
        if not Path(matrices).is_dir():
            raise UsageError(f"no such matrices directory: {matrices}")
        extra = (matrices,)
    return parse_workspace(root, extra)


def status_payload(status: KpiStatus) -> dict:
    return {
        "kpi_id": status.kpi_id,
        "value": status.value,
        "state": status.state.value,
        "as_of": format_rfc3339(status.as_of),
        "inputs_used": status.inputs_used,
    }


def _parse_at(value: str | None) -> datetime:
    if value is None:
        return datetime.now(timezone.utc)
    try:
        return parse_rfc3339(value)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# --- commands ---------------------------------------------------------------


def cmd_check(args) -> int:
    as_json = args.format == "json"
    diags: list[Diagnostic] = []
    ws: Workspace | None = None

    if len(args.paths) == 1 and Path(args.paths[0]).is_dir():
        result = _load_workspace(args.paths[0], args.matrices)
        diags.extend(result.diagnostics)
        ws = result.document
    else:
        documents = []
        for path in args.paths:
            text = _read_file(path)
            result = parse_document(text, path)
            diags.extend(result.diagnostics)
            if result.document is not None:
                documents.append(result.document)
        if args.matrices:
            for mpath in sorted(Path(args.matrices).glob("*.matrix.csv")):
                result = parse_matrix(mpath.read_text(encoding="utf-8"), file=str(mpath))
                diags.extend(result.diagnostics)
                if result.document is not None:
                    documents.append(result.document)
        if not any(d.is_error for d in diags):
            resolved = resolve_workspace(documents)
            diags.extend(resolved.diagnostics)
            ws = resolved.workspace

    if ws is not None:
        config = validation.ValidationConfig(disabled=frozenset(args.disable or ()))
        diags.extend(validation.validate(ws, config))

    diags = sort_diagnostics(diags)
    _print_diagnostics(diags, as_json)
    code = validation.exit_code_for(diags, strict=args.strict)
    if not as_json:
        errors = sum(1 for d in diags if d.severity == "error")
        warnings = sum(1 for d in diags if d.severity == "warning")
        infos = sum(1 for d in diags if d.severity == "info")
        print(f"{errors} error(s), {warnings} warning(s), {infos} info(s)")
    return code


def cmd_fmt(args) -> int:
    for path in args.files:
        text = _read_file(path)
        result = parse_document(text, path)
        if result.document is None:
            _print_diagnostics(result.diagnostics, as_json=False)
            return EXIT_ERRORS
        Path(path).write_text(serialize(result.document), encoding="utf-8")
    return EXIT_OK


def cmd_render(args) -> int:
    text = _read_file(args.file)
    result = parse_document(text, args.file)
    if result.document is None or not isinstance(result.document, DecisionMap):
        _print_diagnostics(result.diagnostics, as_json=False)
        if result.document is not None:
            print("render expects a .dm.saf decision map", file=sys.stderr)
        return EXIT_ERRORS
    cfg = _render_config(args.config)
    layout = render.layout_dm(result.document, cfg)
    if args.format == "svg":
        output = render.render_svg(layout, result.document, cfg)
    elif args.format == "drawio":
        output = render.export_drawio(layout, result.document, cfg)
    else:
        output = json.dumps(render.layout_to_json(layout), indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return EXIT_OK


def _render_config(path: str | None) -> render.RenderConfig:
    candidate = path or (
        str(config_dir() / "render.conf") if config_dir() and (config_dir() / "render.conf").is_file() else None
    )
    if candidate:
        return render.load_render_config(_read_file(candidate))
    return render.RenderConfig()


def _decision_graph(path: str | None) -> guidance.DecisionGraphSpec:
    candidate = path or (
        str(config_dir() / "decision_graph.conf")
        if config_dir() and (config_dir() / "decision_graph.conf").is_file()
        else None
    )
    if candidate:
        return guidance.load_decision_graph(_read_file(candidate))
    return guidance.DEFAULT_DECISION_GRAPH


def _checklist(path: str | None) -> guidance.ChecklistSpec:
    candidate = path or (
        str(config_dir() / "checklist.conf")
        if config_dir() and (config_dir() / "checklist.conf").is_file()
        else None
    )
    if candidate:
        return guidance.load_checklist(_read_file(candidate))
    return guidance.DEFAULT_CHECKLIST


_ANSWER_ALIASES = {"y": "yes", "yes": "yes", "n": "no", "no": "no"}


def _normalize_answers(raw: str) -> list[str]:
    answers = []
    for token in raw.split(","):
        token = token.strip().lower()
        if not token:
            continue
        if token not in _ANSWER_ALIASES:
            raise UsageError(f"answers must be y/n, got {token!r}")
        answers.append(_ANSWER_ALIASES[token])
    return answers


def cmd_classify(args) -> int:
    graph = _decision_graph(args.graph)
    if args.answers is not None:
        outcome = guidance.classify_impact(graph, _normalize_answers(args.answers))
        if outcome.done:
            if args.format == "json":
                _dump_json({"level": outcome.level.value})
            else:
                print(outcome.level.value)
        else:
            if args.format == "json":
                _dump_json({"next_question": outcome.pending_question, "node": outcome.pending_node})
            else:
                print(f"next question: {outcome.pending_question}")
        return EXIT_OK
    # Interactive stepping: read y/n lines from stdin until a leaf.
    answers: list[str] = []
    while True:
        outcome = guidance.classify_impact(graph, answers)
        if outcome.done:
            print(outcome.level.value)
            return EXIT_OK
        print(f"{outcome.pending_question} [y/n] ", file=sys.stderr, flush=True, end="")
        line = sys.stdin.readline()
        if not line:
            print(file=sys.stderr)
            print(f"next question: {outcome.pending_question}")
            return EXIT_OK
        token = line.strip().lower()
        if token not in _ANSWER_ALIASES:
            print(f"please answer y or n (got {token!r})", file=sys.stderr)
            continue
        answers.append(_ANSWER_ALIASES[token])


def cmd_suggest(args) -> int:
    text = _read_file(args.file)
    result = parse_document(text, args.file)
    if result.document is None or not isinstance(result.document, DecisionMap):
        _print_diagnostics(result.diagnostics, as_json=False)
        return EXIT_ERRORS
    matrices = []
    matrices_dir = args.matrices or (
        str(config_dir() / "matrices") if config_dir() and (config_dir() / "matrices").is_dir() else None
    )
    if matrices_dir:
        for mpath in sorted(Path(matrices_dir).glob("*.matrix.csv")):
            mresult = parse_matrix(mpath.read_text(encoding="utf-8"), file=str(mpath))
            if mresult.document is None:
                _print_diagnostics(mresult.diagnostics, as_json=False)
                return EXIT_ERRORS
            matrices.append(mresult.document)
    suggestions = guidance.suggest_effects(result.document, matrices)
    if args.format == "json":
        _dump_json([s.to_json() for s in suggestions])
    else:
        for s in suggestions:
            print(f"{s.source_qa} -> {s.target_qa} {s.suggested_type.value}  [{s.rationale}]")
        print(f"{len(suggestions)} suggestion(s)")
    return EXIT_OK


def cmd_checklist(args) -> int:
    result = _load_workspace(args.dir, args.matrices)
    if result.document is None:
        _print_diagnostics(result.diagnostics, as_json=args.format == "json")
        return EXIT_ERRORS
    report = guidance.checklist_report(result.document, _checklist(args.checklist))
    if args.format == "json":
        _dump_json([{"item": r.item_id, "status": r.status, "evidence": r.evidence} for r in report])
    else:
        for r in report:
            print(f"[{r.status:>14}] {r.item_id}: {r.evidence}")
    return EXIT_OK


def _load_measures(path: str | None) -> MeasureStore:
    if path is None:
        return MeasureStore()
    p = Path(path)
    if p.is_dir():
        store, warnings = load_store(p)
    elif p.is_file():
        store = MeasureStore()
        store.ingest_batch(p.read_text(encoding="utf-8"))
        warnings = []
    else:
        raise UsageError(f"no such measures file or store directory: {path}")
    for warning in warnings:
        print(warning, file=sys.stderr)
    return store


def cmd_kpi_eval(args) -> int:
    result = _load_workspace(args.dir, args.matrices)
    if result.document is None:
        _print_diagnostics(result.diagnostics, as_json=args.format == "json")
        return EXIT_ERRORS
    ws: Workspace = result.document
    store = _load_measures(args.measures)
    as_of = _parse_at(args.at)
    kpis = ws.all_kpis()
    if args.kpi is not None:
        spec = ws.find_kpi(args.kpi)
        if spec is None:
            raise UsageError(f"unknown KPI: {args.kpi}")
        kpis = [spec]
    statuses = evaluate_all(kpis, store, as_of)

    transitions = None
    if args.prev:
        prev_payload = json.loads(_read_file(args.prev))
        previous = [
            KpiStatus(
                kpi_id=item["kpi_id"],
                value=item.get("value"),
                state=KpiState.from_text(item["state"]),
                as_of=parse_rfc3339(item["as_of"]),
                inputs_used=item.get("inputs_used", 0),
            )
            for item in prev_payload
        ]
        transitions = detect_transitions(previous, statuses, {k.id: k for k in kpis})

    if args.format == "json":
        if args.kpi is not None and transitions is None:
            _dump_json(status_payload(statuses[0]))
        elif transitions is None:
            _dump_json([status_payload(s) for s in statuses])
        else:
            _dump_json(
                {
                    "statuses": [status_payload(s) for s in statuses],
                    "transitions": [
                        {"kpi_id": t.kpi_id, "fired_actions": list(t.fired_actions)}
                        for t in transitions
                    ],
                }
            )
    else:
        for status in statuses:
            value = "n/a" if status.value is None else f"{status.value:g}"
            note = f"  ({status.note})" if status.note else ""
            print(f"{status.kpi_id}: {status.state.value} value={value} inputs={status.inputs_used}{note}")
        for t in transitions or ():
            fired = ", ".join(t.fired_actions) or "-"
            print(f"transition into missed: {t.kpi_id} fires [{fired}]")
    return EXIT_OK


def cmd_ingest(args) -> int:
    store_dir = Path(args.store)
    store, warnings = load_store(store_dir) if store_dir.exists() else (MeasureStore(store_dir), [])
    for warning in warnings:
        print(warning, file=sys.stderr)
    known = None
    units = None
    if args.workspace:
        result = _load_workspace(args.workspace)
        if result.document is None:
            _print_diagnostics(result.diagnostics, as_json=False)
            return EXIT_ERRORS
        specs = result.document.metric_specs()
        known = set(specs)
        units = {m.id: m.unit for m in specs.values()}
    elif args.strict:
        raise UsageError("--strict needs --workspace to know the declared metrics")
    text = sys.stdin.read() if args.file == "-" else _read_file(args.file)
    outcome = store.ingest_batch(text, strict=args.strict, known_metrics=known, metric_units=units)
    payload = {
        "accepted": outcome.accepted,
        "rejected": [{"line": r.line, "reason": r.reason} for r in outcome.rejected],
        "notes": outcome.notes,
    }
    if args.format == "json":
        _dump_json(payload)
    else:
        print(f"accepted {outcome.accepted}, rejected {len(outcome.rejected)}")
        for r in outcome.rejected:
            print(f"  line {r.line}: {r.reason}", file=sys.stderr)
        for note in outcome.notes:
            print(f"  note: {note}", file=sys.stderr)
    return EXIT_OK


def cmd_trace(args) -> int:
    result = _load_workspace(args.dir, args.matrices)
    if result.document is None:
        _print_diagnostics(result.diagnostics, as_json=args.format == "json")
        return EXIT_ERRORS
    try:
        if args.kpi:
            trace = archtrace.trace_kpi(result.document, args.kpi)
            payload = trace.to_json()
        else:
            impacts = archtrace.impacts_of_element(result.document, args.element)
            payload = impacts.to_json()
    except SafError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERRORS
    if args.format == "json":
        _dump_json(payload)
    else:
        for key, value in payload.items():
            if key == "edges":
                for edge in value:
                    print(f"  {edge['from']} -[{edge['relation']}]-> {edge['to']}")
            else:
                print(f"{key}: {value if isinstance(value, str) else ', '.join(value) or '-'}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(workspace_dir=args.workspace, store_dir=args.store, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> SafArgumentParser:
    parser = SafArgumentParser(prog="saf", description="Sustainability-aware architecture toolkit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("check", help="parse, resolve and validate documents or a workspace dir")
    p.add_argument("paths", nargs="+", help="document files or one workspace directory")
    p.add_argument("--matrices", help="extra directory of *.matrix.csv files")
    p.add_argument("--strict", action="store_true", help="exit 1 when warnings remain")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--disable", action="append", metavar="CODE", help="disable a lint code")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fmt", help="rewrite documents in canonical form")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_fmt)

    p = sub.add_parser("render", help="render a decision map")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=("svg", "drawio", "json"), default="svg")
    p.add_argument("--config", help="render config file")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("classify", help="step the impact-level decision graph")
    p.add_argument("--graph", help="decision graph config file")
    p.add_argument("--answers", help="comma-separated y/n answers; omit for interactive")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("suggest", help="suggest effects from dependency matrices")
    p.add_argument("file", help="a .dm.saf decision map")
    p.add_argument("--matrices", help="directory of *.matrix.csv files")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_suggest)

    p = sub.add_parser("checklist", help="run the creation checklist over a workspace")
    p.add_argument("dir")
    p.add_argument("--matrices")
    p.add_argument("--checklist", help="checklist config file")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_checklist)

    kpi_parser = sub.add_parser("kpi", help="KPI evaluation")
    kpi_sub = kpi_parser.add_subparsers(dest="kpi_command", metavar="SUBCOMMAND", required=True)
    p = kpi_sub.add_parser("eval", help="evaluate KPIs against a measure store")
    p.add_argument("dir", help="workspace directory")
    p.add_argument("--measures", help="measures JSONL file or store directory")
    p.add_argument("--matrices")
    p.add_argument("--at", help="pin evaluation time (RFC3339); wall clock otherwise")
    p.add_argument("--prev", help="previous status snapshot JSON for transition detection")
    p.add_argument("--kpi", help="evaluate a single KPI id")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_kpi_eval)

    p = sub.add_parser("ingest", help="ingest a measures JSONL batch into a store")
    p.add_argument("file", help="JSONL file ('-' for stdin)")
    p.add_argument("--store", required=True, help="store directory")
    p.add_argument("--strict", action="store_true", help="reject metrics unknown to the workspace")
    p.add_argument("--workspace", help="workspace directory for metric checks")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("trace", help="trace a KPI to architecture elements (or an element back)")
    p.add_argument("dir", help="workspace directory")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--kpi", help="KPI id to trace forward")
    group.add_argument("--element", help="element id to trace backward")
    p.add_argument("--matrices")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("serve", help="serve the HTTP API (and UI when built)")
    p.add_argument("--workspace", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--port", type=int, default=8021)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", help="directory of built UI assets to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"saf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SafError as exc:
        print(f"saf: {exc}", file=sys.stderr)
        return EXIT_ERRORS


if __name__ == "__main__":
    sys.exit(main())
