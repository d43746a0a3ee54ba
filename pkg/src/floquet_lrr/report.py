"""Deterministic JSON output: sorted keys, 17 significant digits, no NaN."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


class NonFiniteValueError(ValueError):
    pass


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise NonFiniteValueError(f"refusing to serialize non-finite value {x!r}")
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _normalize(obj):
    if isinstance(obj, np.ndarray):
        return [_normalize(x) for x in obj.tolist()]
    if isinstance(obj, np.generic):
        return _normalize(obj.item())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (list, tuple)):
        return [_normalize(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    return obj


def _encode(obj, indent: int, level: int) -> str:
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(x, (list, dict)) for x in obj):
            return "[" + ", ".join(_encode(x, indent, level + 1) for x in obj) + "]"
        body = ",\n".join(inner + _encode(x, indent, level + 1) for x in obj)
        return "[\n" + body + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        body = ",\n".join(f"{inner}{json.dumps(k)}: {_encode(obj[k], indent, level + 1)}"
                          for k in sorted(obj))
        return "{\n" + body + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report, indent: int = 2) -> str:
    return _encode(_normalize(report), indent, 0) + "\n"


def emit_report(report, path) -> Path:
    """Write ``report`` as canonical JSON; the text is built before the file is touched."""
    text = dumps(report)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path
