"""Canonical JSON for golden-file stability.

Keys are sorted, floats always print with six decimal places, output ends
with a newline. Byte-identical across runs and platforms for equal values.
"""

from __future__ import annotations

import json
import math


def _emit(value, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    close_pad = " " * (indent * level)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite float {value!r} has no canonical form")
        return f"{value:.6f}"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = []
        for key in sorted(value):
            if not isinstance(key, str):
                raise ValueError(f"canonical JSON requires string keys, got {key!r}")
            items.append(f"{pad}{json.dumps(key, ensure_ascii=False)}: {_emit(value[key], indent, level + 1)}")
        return "{\n" + ",\n".join(items) + "\n" + close_pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{pad}{_emit(item, indent, level + 1)}" for item in value]
        return "[\n" + ",\n".join(items) + "\n" + close_pad + "]"
    raise ValueError(f"cannot canonicalize {type(value).__name__}")


def canonical_json(value, indent: int = 2) -> str:
    return _emit(value, indent, 0) + "\n"


def canonical_json_bytes(value, indent: int = 2) -> bytes:
    return canonical_json(value, indent).encode("utf-8")
