"""Deterministic JSON encoding for API responses.

Key order follows construction order and floats carry six significant
digits, so identical inputs always yield byte-identical bodies.
"""

from __future__ import annotations

import json
import math
from datetime import datetime

from .model import format_timestamp


def format_float(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"cannot encode non-finite float {value!r}")
    return format(value, ".6g")


def _encode(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, datetime):
        out.append('"' + format_timestamp(obj) + '"')
    elif isinstance(obj, dict):
        out.append("{")
        first = True
        for key, value in obj.items():
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(str(key), ensure_ascii=False))
            out.append(":")
            _encode(value, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for k, value in enumerate(obj):
            if k:
                out.append(",")
            _encode(value, out)
        out.append("]")
    else:
        raise TypeError(f"cannot encode {type(obj).__name__} on the wire")


def dumps(obj) -> str:
    """Serialize a response payload to canonical JSON text."""
    out: list[str] = []
    _encode(obj, out)
    return "".join(out)
