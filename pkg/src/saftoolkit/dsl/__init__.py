"""Textual formats for every document kind: diagnostic-rich parsers and a
canonical serializer guaranteeing lossless round-trips."""

from .arch import parse_arch
from .dm import parse_dm
from .kpidoc import parse_kpi_document
from .loader import SUFFIXES, document_kind, parse_document, parse_workspace
from .matrix import parse_matrix
from .serialize import (
    serialize,
    serialize_arch,
    serialize_dm,
    serialize_kpi_document,
    serialize_matrix,
    serialize_sq,
)
from .sq import parse_sq

__all__ = [
    "SUFFIXES",
    "document_kind",
    "parse_arch",
    "parse_dm",
    "parse_document",
    "parse_kpi_document",
    "parse_matrix",
    "parse_sq",
    "parse_workspace",
    "serialize",
    "serialize_arch",
    "serialize_dm",
    "serialize_kpi_document",
    "serialize_matrix",
    "serialize_sq",
]
