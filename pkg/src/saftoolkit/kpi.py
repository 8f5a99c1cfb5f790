"""KPI model: goals, critical success factors, fitness expressions, evaluation.

The fitness expression language is a small closed arithmetic over aggregator
calls ``agg(metric_id, window)`` with agg in {avg, sum, min, max, last, count}
and window a duration literal (``7d``, ``24h``, ``30m``) or ``all``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Iterable, Mapping, Sequence, Union

from .diagnostics import Diagnostic, SourceLocation, diagnostic
from .ingest import MeasureStore
from .model import _enum_from_text

AGGREGATORS = ("avg", "sum", "min", "max", "last", "count")
COMPARATORS = ("<", "<=", ">", ">=")

WINDOW_RE = re.compile(r"(all|[0-9]+[dhm])")

_WINDOW_UNITS = {"d": timedelta(days=1), "h": timedelta(hours=1), "m": timedelta(minutes=1)}


def window_delta(window: str) -> timedelta | None:
    """Duration of a window literal; None means the unbounded ``all`` window."""
    if window == "all":
        return None
    if not WINDOW_RE.fullmatch(window):
        raise ValueError(f"malformed duration: {window!r}")
    return int(window[:-1]) * _WINDOW_UNITS[window[-1]]


# --- Expression AST ---------------------------------------------------------


@dataclass(frozen=True)
class NumberLiteral:
    value: float


@dataclass(frozen=True)
class Aggregation:
    fn: str
    metric: str
    window: str


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: ExprNode
    right: ExprNode


ExprNode = Union[NumberLiteral, Aggregation, BinaryOp]


@dataclass(frozen=True)
class FitnessExpression:
    root: ExprNode

    def metrics(self) -> tuple[str, ...]:
        """Metric ids referenced by the expression, in source order, deduplicated."""
        seen: list[str] = []
        for node in walk(self.root):
            if isinstance(node, Aggregation) and node.metric not in seen:
                seen.append(node.metric)
        return tuple(seen)

    def render(self) -> str:
        return _render(self.root, parent_prec=0)


def walk(node: ExprNode) -> Iterable[ExprNode]:
    yield node
    if isinstance(node, BinaryOp):
        yield from walk(node.left)
        yield from walk(node.right)


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def _render(node: ExprNode, parent_prec: int) -> str:
    if isinstance(node, NumberLiteral):
        return format_number(node.value)
    if isinstance(node, Aggregation):
        return f"{node.fn}({node.metric}, {node.window})"
    prec = _PRECEDENCE[node.op]
    text = f"{_render(node.left, prec)} {node.op} {_render(node.right, prec + 1)}"
    return f"({text})" if prec < parent_prec else text


def format_number(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


# --- Expression parsing -----------------------------------------------------

_EXPR_TOKEN_RE = re.compile(
    r"\s*(?:(?P<word>[0-9]+[a-z][a-z0-9]*)|(?P<number>[0-9]+(?:\.[0-9]+)?)"
    r"|(?P<ident>[a-z][a-z0-9_-]*)|(?P<op>[+\-*/()×÷,]))"
)

_OP_ALIASES = {"×": "*", "÷": "/"}


class _ExprParser:
    def __init__(self, text: str, known_metrics: set[str] | None, location: SourceLocation | None):
        self.text = text
        self.known = known_metrics
        self.location = location
        self.tokens = self._tokenize()
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []

    def _tokenize(self) -> list[tuple[str, str]] | None:
        tokens = []
        pos = 0
        while pos < len(self.text):
            m = _EXPR_TOKEN_RE.match(self.text, pos)
            if m is None:
                if self.text[pos:].strip():
                    return None
                break
            pos = m.end()
            for kind in ("word", "number", "ident", "op"):
                value = m.group(kind)
                if value is not None:
                    tokens.append((kind, _OP_ALIASES.get(value, value)))
                    break
        tokens.append(("eof", ""))
        return tokens

    def fail(self, code: str, message: str) -> None:
        self.diagnostics.append(diagnostic(code, message, location=self.location))

    def peek(self) -> tuple[str, str]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str]:
        tok = self.tokens[self.pos]
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def parse(self) -> ExprNode | None:
        if self.tokens is None:
            self.fail("E100", f"invalid character in expression: {self.text!r}")
            return None
        node = self.expression()
        if node is not None and self.peek()[0] != "eof":
            self.fail("E100", f"unexpected {self.peek()[1]!r} in expression")
            return None
        return node

    def expression(self) -> ExprNode | None:
        node = self.term()
        while node is not None and (self.peek() == ("op", "+") or self.peek() == ("op", "-")):
            op = self.take()[1]
            right = self.term()
            if right is None:
                return None
            node = BinaryOp(op, node, right)
        return node

    def term(self) -> ExprNode | None:
        node = self.factor()
        while node is not None and (self.peek() == ("op", "*") or self.peek() == ("op", "/")):
            op = self.take()[1]
            right = self.factor()
            if right is None:
                return None
            node = BinaryOp(op, node, right)
        return node

    def factor(self) -> ExprNode | None:
        kind, value = self.take()
        if kind == "op" and value == "-":
            inner = self.factor()
            if inner is None:
                return None
            if isinstance(inner, NumberLiteral):
                return NumberLiteral(-inner.value)
            return BinaryOp("-", NumberLiteral(0.0), inner)
        if kind == "number":
            return NumberLiteral(float(value))
        if kind == "op" and value == "(":
            node = self.expression()
            if node is None:
                return None
            if self.take() != ("op", ")"):
                self.fail("E100", "expected ')' in expression")
                return None
            return node
        if kind == "ident":
            return self.aggregation(value)
        self.fail("E100", f"expected number, aggregator or '(' in expression, found {value!r}")
        return None

    def aggregation(self, name: str) -> ExprNode | None:
        if name not in AGGREGATORS:
            self.fail("E102", f"unknown aggregator {name!r} (expected one of {', '.join(AGGREGATORS)})")
            return None
        if self.take() != ("op", "("):
            self.fail("E100", f"expected '(' after aggregator {name!r}")
            return None
        kind, metric = self.take()
        if kind != "ident":
            self.fail("E100", f"expected metric id in {name}(...), found {metric!r}")
            return None
        if self.take() != ("op", ","):
            self.fail("E100", f"expected ',' after metric id in {name}(...)")
            return None
        kind, window = self.take()
        if kind not in ("word", "ident", "number") or not WINDOW_RE.fullmatch(window):
            self.fail("E402", f"malformed duration {window!r} (expected e.g. 7d, 24h, 30m or all)")
            return None
        if self.take() != ("op", ")"):
            self.fail("E100", f"expected ')' to close {name}(...)")
            return None
        if self.known is not None and metric not in self.known:
            self.fail("E401", f"unknown metric {metric!r} in expression")
            return None
        return Aggregation(name, metric, window)


def parse_expression(
    text: str,
    known_metrics: set[str] | None = None,
    location: SourceLocation | None = None,
) -> tuple[FitnessExpression | None, list[Diagnostic]]:
    """Parse a fitness expression; unknown metrics are checked when known_metrics is given."""
    parser = _ExprParser(text, known_metrics, location)
    node = parser.parse()
    if node is None:
        return None, parser.diagnostics
    return FitnessExpression(node), parser.diagnostics


# --- Document types ---------------------------------------------------------


@dataclass(frozen=True)
class OrganizationalGoal:
    id: str
    statement: str
    sustainability_goal_ref: str | None = None
    location: SourceLocation | None = field(default=None, compare=False)


@dataclass(frozen=True)
class CriticalSuccessFactor:
    id: str
    statement: str
    goal_ref: str = ""
    location: SourceLocation | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Target:
    comparator: str
    threshold: float
    unit: str

    def __post_init__(self) -> None:
        if self.comparator not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.comparator!r}")
        if not _finite(self.threshold):
            raise ValueError("target threshold must be finite")

    def holds(self, value: float) -> bool:
        if self.comparator == "<":
            return value < self.threshold
        if self.comparator == "<=":
            return value <= self.threshold
        if self.comparator == ">":
            return value > self.threshold
        return value >= self.threshold


def _finite(value: float) -> bool:
    return math.isfinite(value)


@dataclass(frozen=True)
class KpiSpec:
    id: str
    name: str
    csf_ref: str
    expression: FitnessExpression
    target: Target
    concern_refs: tuple[str, ...]
    action_refs: tuple[str, ...] = ()
    location: SourceLocation | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ActionSpec:
    id: str
    description: str
    concern_refs: tuple[str, ...] = ()
    location: SourceLocation | None = field(default=None, compare=False)


@dataclass(frozen=True)
class KpiDocument:
    id: str
    goals: tuple[OrganizationalGoal, ...] = ()
    csfs: tuple[CriticalSuccessFactor, ...] = ()
    kpis: tuple[KpiSpec, ...] = ()
    actions: tuple[ActionSpec, ...] = ()

    def kpi(self, kpi_id: str) -> KpiSpec | None:
        for k in self.kpis:
            if k.id == kpi_id:
                return k
        return None


def canonicalize_kpi_document(doc: KpiDocument) -> KpiDocument:
    from dataclasses import replace

    return KpiDocument(
        id=doc.id,
        goals=tuple(sorted(doc.goals, key=lambda g: g.id)),
        csfs=tuple(sorted(doc.csfs, key=lambda c: c.id)),
        kpis=tuple(
            replace(
                k,
                concern_refs=tuple(sorted(k.concern_refs)),
                action_refs=tuple(sorted(k.action_refs)),
            )
            for k in sorted(doc.kpis, key=lambda k: k.id)
        ),
        actions=tuple(
            replace(a, concern_refs=tuple(sorted(a.concern_refs)))
            for a in sorted(doc.actions, key=lambda a: a.id)
        ),
    )


# --- Evaluation -------------------------------------------------------------


class KpiState(Enum):
    MET = "met"
    MISSED = "missed"
    UNKNOWN = "unknown"

    @classmethod
    def from_text(cls, text: str) -> KpiState:
        return _enum_from_text(cls, text, "kpi state")


@dataclass(frozen=True)
class KpiStatus:
    kpi_id: str
    value: float | None
    state: KpiState
    as_of: datetime
    inputs_used: int
    note: str | None = field(default=None, compare=False)


def _aggregate(fn: str, values: list[float]) -> float:
    if fn == "avg":
        return sum(values) / len(values)
    if fn == "sum":
        return sum(values)
    if fn == "min":
        return min(values)
    if fn == "max":
        return max(values)
    if fn == "last":
        return values[-1]
    raise ValueError(fn)


def evaluate(kpi: KpiSpec, store: MeasureStore, as_of: datetime) -> KpiStatus:
    """Evaluate one KPI against measures with timestamp in (as_of - window, as_of].

    The state is ``unknown`` when any non-count aggregator has zero inputs or
    a division by zero occurs (E403); otherwise met/missed per the target.
    """
    agg_values: dict[int, float] = {}
    inputs = 0
    missing: Aggregation | None = None
    for node in walk(kpi.expression.root):
        if not isinstance(node, Aggregation):
            continue
        records = store.query(node.metric, node.window, as_of)
        inputs += len(records)
        if node.fn == "count":
            agg_values[id(node)] = float(len(records))
        elif not records:
            missing = missing or node
        else:
            agg_values[id(node)] = _aggregate(node.fn, [r.value for r in records])
    if missing is not None:
        note = f"no measures for {missing.fn}({missing.metric}, {missing.window})"
        return KpiStatus(kpi.id, None, KpiState.UNKNOWN, as_of, inputs, note)

    def compute(node: ExprNode) -> float:
        if isinstance(node, NumberLiteral):
            return node.value
        if isinstance(node, Aggregation):
            return agg_values[id(node)]
        left, right = compute(node.left), compute(node.right)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        return left / right

    try:
        value = compute(kpi.expression.root)
    except ZeroDivisionError:
        note = f"E403: division by zero while evaluating {kpi.id}"
        return KpiStatus(kpi.id, None, KpiState.UNKNOWN, as_of, inputs, note)
    state = KpiState.MET if kpi.target.holds(value) else KpiState.MISSED
    return KpiStatus(kpi.id, value, state, as_of, inputs)


def evaluate_all(kpis: Iterable[KpiSpec], store: MeasureStore, as_of: datetime) -> list[KpiStatus]:
    """Evaluate KPIs in deterministic id order."""
    return [evaluate(k, store, as_of) for k in sorted(kpis, key=lambda k: k.id)]


@dataclass(frozen=True)
class Transition:
    kpi_id: str
    fired_actions: tuple[str, ...]


def detect_transitions(
    previous: Sequence[KpiStatus],
    current: Sequence[KpiStatus],
    kpis: Mapping[str, KpiSpec] | Iterable[KpiSpec] = (),
) -> list[Transition]:
    """Edge-triggered action firing: fires exactly on the transition into missed.

    A KPI absent from the previous snapshot counts as previously unknown, so a
    first evaluation landing on missed fires. Staying missed does not re-fire.
    """
    if not isinstance(kpis, Mapping):
        kpis = {k.id: k for k in kpis}
    prev_state = {s.kpi_id: s.state for s in previous}
    fired: list[Transition] = []
    for status in current:
        before = prev_state.get(status.kpi_id, KpiState.UNKNOWN)
        if status.state is KpiState.MISSED and before is not KpiState.MISSED:
            spec = kpis.get(status.kpi_id)
            fired.append(Transition(status.kpi_id, spec.action_refs if spec else ()))
    return fired
