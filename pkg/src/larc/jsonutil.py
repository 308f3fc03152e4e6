"""Deterministic JSON emission.

Reports must be byte-identical across runs with identical inputs, and
numeric writers must carry 17 significant digits so that doubles round-trip
exactly.  The stdlib encoder formats floats with ``repr`` (shortest
round-trip), so we emit JSON text ourselves; the structure grammar we need
is tiny (dict / list / str / numbers / bool / None).
"""

import json
import math
import hashlib

import numpy as np


def format_float(x: float) -> str:
    """17-significant-digit decimal form of a finite double."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be serialized")
    return f"{x:.17g}"


def dumps(obj, indent=None, sort_keys=False) -> str:
    """Serialize *obj* to JSON with 17-significant-digit floats.

    Deterministic: identical structures produce identical bytes.
    """
    pieces = []
    _emit(obj, pieces, indent, 0, sort_keys)
    return "".join(pieces)


def _emit(obj, out, indent, level, sort_keys):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, dict):
        items = sorted(obj.items()) if sort_keys else list(obj.items())
        _emit_seq(
            ("{", "}"),
            [(json.dumps(str(k)) + (": " if indent else ":"), v) for k, v in items],
            out,
            indent,
            level,
            sort_keys,
        )
    elif isinstance(obj, (list, tuple)):
        _emit_seq(("[", "]"), [("", v) for v in obj], out, indent, level, sort_keys)
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), out, indent, level, sort_keys)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit_seq(brackets, items, out, indent, level, sort_keys):
    open_b, close_b = brackets
    if not items:
        out.append(open_b + close_b)
        return
    out.append(open_b)
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    for i, (prefix, value) in enumerate(items):
        if i:
            out.append(",")
        out.append(pad)
        out.append(prefix)
        _emit(value, out, indent, level + 1, sort_keys)
    if indent:
        out.append("\n" + " " * (indent * level))
    out.append(close_b)


def write_json(path, obj, indent=1) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj, indent=indent))
        fh.write("\n")


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def structure_hash(obj) -> str:
    """SHA-256 of the canonical (sorted-keys, compact) serialization."""
    return hashlib.sha256(dumps(obj, sort_keys=True).encode("utf-8")).hexdigest()
