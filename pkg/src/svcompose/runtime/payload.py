"""Tagged wire values: {"type": ..., "value": ...} JSON objects.

Payload kinds: number, string, boolean, matrix (rows of numbers, equal
length), labels (list of strings), handle (instance URL), null. The tagging
makes the encoding unambiguous in both directions and portable across the two
service-host implementations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PayloadError


@dataclass(frozen=True)
class Handle:
    """URL-valued reference to a service instance (or a static service)."""

    url: str

    def __str__(self) -> str:
        return self.url


class _SelfHandle:
    """Sentinel an instance method returns to mean 'my own handle'."""

    def __repr__(self) -> str:
        return "SELF_HANDLE"


SELF_HANDLE = _SelfHandle()


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def encode_value(value) -> dict:
    if value is None:
        return {"type": "null"}
    if isinstance(value, bool):
        return {"type": "boolean", "value": value}
    if _is_number(value):
        return {"type": "number", "value": value}
    if isinstance(value, str):
        return {"type": "string", "value": value}
    if isinstance(value, Handle):
        return {"type": "handle", "value": value.url}
    if isinstance(value, (list, tuple)):
        items = list(value)
        if all(isinstance(x, str) for x in items):
            return {"type": "labels", "value": items}
        if all(isinstance(row, (list, tuple)) for row in items):
            rows = [list(row) for row in items]
            _check_matrix(rows)
            return {"type": "matrix", "value": rows}
        raise PayloadError(f"list value is neither labels nor a matrix: {value!r}")
    raise PayloadError(f"value {value!r} has no payload encoding")


def _check_matrix(rows: list) -> None:
    width = None
    for i, row in enumerate(rows):
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise PayloadError(f"matrix row {i} has length {len(row)}, expected {width}")
        for j, x in enumerate(row):
            if not _is_number(x):
                raise PayloadError(f"matrix cell [{i}][{j}] is not a number: {x!r}")


def decode_value(doc):
    if not isinstance(doc, dict) or "type" not in doc:
        raise PayloadError(f"not a tagged payload: {doc!r}")
    kind = doc["type"]
    if kind == "null":
        return None
    if "value" not in doc:
        raise PayloadError(f"payload of type {kind} is missing a value")
    value = doc["value"]
    if kind == "boolean":
        if not isinstance(value, bool):
            raise PayloadError(f"boolean payload carries {value!r}")
        return value
    if kind == "number":
        if not _is_number(value):
            raise PayloadError(f"number payload carries {value!r}")
        return value
    if kind == "string":
        if not isinstance(value, str):
            raise PayloadError(f"string payload carries {value!r}")
        return value
    if kind == "handle":
        if not isinstance(value, str) or not value.startswith("http"):
            raise PayloadError(f"handle payload carries an invalid URL: {value!r}")
        return Handle(value)
    if kind == "labels":
        if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
            raise PayloadError(f"labels payload carries {value!r}")
        return list(value)
    if kind == "matrix":
        if not isinstance(value, list):
            raise PayloadError(f"matrix payload carries {value!r}")
        rows = [list(row) if isinstance(row, list) else row for row in value]
        if any(not isinstance(row, list) for row in rows):
            raise PayloadError("matrix payload rows must be lists")
        _check_matrix(rows)
        return rows
    raise PayloadError(f"unknown payload type: {kind!r}")


def encode_arguments(values: dict) -> dict:
    return {name: encode_value(v) for name, v in values.items()}


def decode_arguments(doc: dict) -> dict:
    if not isinstance(doc, dict):
        raise PayloadError(f"arguments must be an object, got {doc!r}")
    return {name: decode_value(v) for name, v in doc.items()}
