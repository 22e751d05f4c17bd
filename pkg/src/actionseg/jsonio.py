"""Deterministic JSON writing with full double-precision floats.

Model and vocabulary files must round-trip exactly, so floats are written
with 17 significant digits (enough to reconstruct any IEEE-754 double).
Reading uses the standard library parser, which is already exact.
"""

import json
import math

from .errors import IoError, NumericalError


def format_float(value: float) -> str:
    if not math.isfinite(value):
        raise NumericalError(f"cannot serialize non-finite value {value!r}")
    text = format(float(value), ".17g")
    if "." not in text and "e" not in text and "n" not in text:
        text += ".0"
    return text


def _encode(obj, parts, indent, level):
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        for i, (key, val) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {type(key)}")
            parts.append(pad_in + json.dumps(key) + ": ")
            _encode(val, parts, indent, level + 1)
            parts.append(",\n" if i < len(obj) - 1 else "\n")
        parts.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, val in enumerate(obj):
            if i:
                parts.append(", ")
            _encode(val, parts, indent, level + 1)
        parts.append("]")
    elif isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(format_float(obj))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif obj is None:
        parts.append("null")
    else:
        raise TypeError(f"cannot serialize {type(obj)} to JSON")


def dumps(obj, indent: int = 2) -> str:
    parts: list[str] = []
    _encode(obj, parts, indent, 0)
    parts.append("\n")
    return "".join(parts)


def dump_file(obj, path, indent: int = 2) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps(obj, indent=indent))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        from .errors import FormatError

        raise FormatError(f"invalid JSON in {path}: {exc}") from exc
