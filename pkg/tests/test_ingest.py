"""Measure store: batch ingestion, dedup, querying, persistence, resilience."""

from __future__ import annotations

import json
import random
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saftoolkit.diagnostics import SafError
from saftoolkit.ingest import (
    MeasureStore,
    format_rfc3339,
    load_store,
    parse_rfc3339,
)

T0 = datetime(2024, 5, 1, 12, 0, 0, tzinfo=timezone.utc)


def _line(run_id: str, minutes_before: int, metric: str = "ee_j", value: float = 870.5, unit: str = "J") -> str:
    stamp = format_rfc3339(T0 - timedelta(minutes=minutes_before))
    return json.dumps(
        {"run_id": run_id, "timestamp": stamp, "metric": metric, "value": value, "unit": unit}
    )


class TestTimestamps:
    def test_rfc3339_roundtrip(self):
        assert format_rfc3339(parse_rfc3339("2024-05-01T12:00:00Z")) == "2024-05-01T12:00:00Z"

    def test_offset_normalized_to_utc(self):
        assert parse_rfc3339("2024-05-01T14:00:00+02:00") == parse_rfc3339("2024-05-01T12:00:00Z")

    @pytest.mark.parametrize("bad", ["2024-05-01", "12:00:00", "yesterday", "2024-05-01T12:00:00"])
    def test_invalid_rejected(self, bad):
        with pytest.raises(ValueError):
            parse_rfc3339(bad)


class TestIngestBatch:
    def test_three_wellformed_lines(self):
        store = MeasureStore()
        lines = "\n".join(_line(f"run-{i}", i * 10, value=800.0 + i) for i in range(3))
        result = store.ingest_batch(lines)
        assert result.accepted == 3
        assert result.rejected == []
        assert len(store) == 3

    def test_empty_input(self):
        result = MeasureStore().ingest_batch("")
        assert result.accepted == 0
        assert result.rejected == []

    def test_reingest_rejects_all_as_duplicates(self):
        store = MeasureStore()
        lines = "\n".join(_line(f"run-{i}", i) for i in range(4))
        first = store.ingest_batch(lines)
        snapshot = store.records
        second = store.ingest_batch(lines)
        assert first.accepted == 4
        assert second.accepted == 0
        assert all(r.reason == "duplicate" for r in second.rejected)
        assert len(second.rejected) == 4
        assert store.records == snapshot  # idempotence: store unchanged

    def test_same_value_different_run_id_is_two_records(self):
        store = MeasureStore()
        assert store.ingest_batch(_line("a", 0) + "\n" + _line("b", 0)).accepted == 2

    def test_malformed_json_rejected_not_aborted(self):
        store = MeasureStore()
        lines = _line("a", 0) + "\n{nope\n" + _line("b", 1)
        result = store.ingest_batch(lines)
        assert result.accepted == 2
        assert [r.line for r in result.rejected] == [2]

    @pytest.mark.parametrize(
        "payload,expect",
        [
            ({"timestamp": "2024-05-01T12:00:00Z", "metric": "m", "value": 1, "unit": ""}, "run_id"),
            ({"run_id": "r", "metric": "m", "value": 1, "unit": ""}, "timestamp"),
            ({"run_id": "r", "timestamp": "bogus", "metric": "m", "value": 1, "unit": ""}, "RFC3339"),
            ({"run_id": "r", "timestamp": "2024-05-01T12:00:00Z", "metric": "M!", "value": 1, "unit": ""}, "identifier"),
            ({"run_id": "r", "timestamp": "2024-05-01T12:00:00Z", "metric": "m", "value": "x", "unit": ""}, "finite"),
            ({"run_id": "r", "timestamp": "2024-05-01T12:00:00Z", "metric": "m", "value": True, "unit": ""}, "finite"),
            ({"run_id": "r", "timestamp": "2024-05-01T12:00:00Z", "metric": "m", "value": 1}, "unit"),
        ],
    )
    def test_field_validation(self, payload, expect):
        result = MeasureStore().ingest_batch(json.dumps(payload))
        assert result.accepted == 0
        assert expect in result.rejected[0].reason

    def test_nonfinite_value_rejected(self):
        line = '{"run_id": "r", "timestamp": "2024-05-01T12:00:00Z", "metric": "m", "value": Infinity, "unit": ""}'
        result = MeasureStore().ingest_batch(line)
        assert result.accepted == 0

    def test_strict_rejects_unknown_metric(self):
        store = MeasureStore()
        result = store.ingest_batch(_line("a", 0), strict=True, known_metrics={"et_s"})
        assert result.accepted == 0
        assert "unknown_metric" in result.rejected[0].reason

    def test_nonstrict_accepts_unknown_metric_with_note(self):
        store = MeasureStore()
        result = store.ingest_batch(_line("a", 0), strict=False, known_metrics={"et_s"})
        assert result.accepted == 1
        assert any("ee_j" in note for note in result.notes)

    def test_unit_mismatch_notes_never_converts(self):
        store = MeasureStore()
        result = store.ingest_batch(
            _line("a", 0, unit="kJ"), known_metrics={"ee_j"}, metric_units={"ee_j": "J"}
        )
        assert result.accepted == 1
        assert any("kJ" in note and "J" in note for note in result.notes)
        assert store.records[0].value == 870.5  # value untouched


class TestQuery:
    def test_boundary_half_open(self):
        store = MeasureStore()
        store.ingest_batch(
            "\n".join(
                [
                    _line("at-asof", 0),
                    _line("at-window-edge", 24 * 60),
                    _line("inside", 60),
                    _line("future", -1),
                ]
            )
        )
        records = store.query("ee_j", "24h", T0)
        assert [r.run_id for r in records] == ["inside", "at-asof"]

    def test_all_window_is_everything_up_to_as_of(self):
        store = MeasureStore()
        store.ingest_batch("\n".join([_line("old", 10_000), _line("new", 1), _line("future", -5)]))
        assert [r.run_id for r in store.query("ee_j", "all", T0)] == ["old", "new"]

    def test_unknown_metric_empty(self):
        assert MeasureStore().query("nope", "all", T0) == []

    @given(
        st.lists(
            st.tuples(
                st.integers(-1000, 1000),
                st.sampled_from(["m_a", "m_b"]),
                st.floats(0, 100, allow_nan=False),
            ),
            max_size=50,
        ),
        st.sampled_from(["30m", "24h", "7d", "all"]),
    )
    @settings(max_examples=80, deadline=None)
    def test_query_matches_linear_scan(self, points, window):
        from saftoolkit.kpi import window_delta

        store = MeasureStore()
        lines = "\n".join(
            _line(f"r{i}", minutes, metric=metric, value=value)
            for i, (minutes, metric, value) in enumerate(points)
        )
        store.ingest_batch(lines)
        delta = window_delta(window)
        for metric in ("m_a", "m_b"):
            expected = sorted(
                (
                    r
                    for r in store.records
                    if r.metric == metric
                    and r.timestamp <= T0
                    and (delta is None or r.timestamp > T0 - delta)
                ),
                key=lambda r: r.timestamp,
            )
            got = store.query(metric, window, T0)
            assert [r.run_id for r in got] == [r.run_id for r in expected]


class TestPersistence:
    def test_persist_then_load_identity(self, tmp_path):
        store = MeasureStore(tmp_path)
        rng = random.Random(1)
        lines = "\n".join(
            _line(f"r{i}", rng.randint(0, 5000), value=round(rng.uniform(1, 999), 2))
            for i in range(100)
        )
        store.ingest_batch(lines)
        reloaded, warnings = load_store(tmp_path)
        assert warnings == []
        assert len(reloaded) == 100
        for window in ("all", "24h", "7d"):
            assert reloaded.query("ee_j", window, T0) == store.query("ee_j", window, T0)

    def test_empty_directory(self, tmp_path):
        store, warnings = load_store(tmp_path)
        assert len(store) == 0
        assert warnings == []

    def test_truncated_tail_tolerated(self, tmp_path):
        store = MeasureStore(tmp_path)
        lines = "\n".join(_line(f"r{i}", i) for i in range(100))
        store.ingest_batch(lines)
        log = tmp_path / "measures.jsonl"
        blob = log.read_bytes()
        log.write_bytes(blob[: len(blob) - 25])  # cut into the last record
        reloaded, warnings = load_store(tmp_path)
        assert len(reloaded) == 99
        assert len(warnings) == 1
        assert "corrupt" in warnings[0]

    def test_append_only_across_batches(self, tmp_path):
        store = MeasureStore(tmp_path)
        store.ingest_batch(_line("a", 2))
        store.ingest_batch(_line("b", 1))
        lines = (tmp_path / "measures.jsonl").read_text().strip().splitlines()
        assert len(lines) == 2
        reloaded, _ = load_store(tmp_path)
        assert [r.run_id for r in reloaded.records] == ["a", "b"]

    def test_unreadable_log_is_explicit_error(self, tmp_path):
        log = tmp_path / "measures.jsonl"
        log.mkdir()  # a directory where the file should be
        with pytest.raises(SafError):
            load_store(tmp_path)

    def test_subject_round_trips(self, tmp_path):
        store = MeasureStore(tmp_path)
        line = json.dumps(
            {
                "run_id": "r",
                "timestamp": "2024-05-01T12:00:00Z",
                "metric": "ee_j",
                "value": 1.5,
                "unit": "J",
                "subject": "zahori_engine",
            }
        )
        assert store.ingest_batch(line).accepted == 1
        reloaded, _ = load_store(tmp_path)
        assert reloaded.records[0].subject == "zahori_engine"
