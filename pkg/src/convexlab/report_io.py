"""Deterministic report writers.

Reports must be byte-identical across reruns with the same config, so:
floats are serialized with 17 significant digits (full float64 round-trip),
keys are emitted in sorted order, and nothing time- or path-dependent goes
into a file.
"""

from __future__ import annotations

import dataclasses

import numpy as np

__all__ = ["fmt_float", "to_jsonable", "dumps_json", "dump_json", "write_csv"]


def fmt_float(x: float) -> str:
    if x != x:
        return "NaN"
    if x in (float("inf"), float("-inf")):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return format(float(x), ".17g")


def to_jsonable(obj):
    """Recursively reduce dataclasses/arrays/numpy scalars to plain values."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def dumps_json(obj, indent: int = 0) -> str:
    """JSON text with 17-significant-digit floats and sorted keys."""
    obj = to_jsonable(obj)
    pad = " " * indent
    nl = "\n" if indent else ""

    def render(o, depth):
        lead = pad * (depth + 1)
        close = pad * depth
        if o is None:
            return "null"
        if isinstance(o, bool):
            return "true" if o else "false"
        if isinstance(o, float):
            return fmt_float(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, str):
            import json as _json
            return _json.dumps(o)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{lead}{render(str(k), 0)}: {render(v, depth + 1)}"
                     for k, v in sorted(o.items())]
            return "{" + nl + ("," + nl).join(items) + nl + close + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            items = [f"{lead}{render(v, depth + 1)}" for v in o]
            return "[" + nl + ("," + nl).join(items) + nl + close + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return render(obj, 0) + "\n"


def dump_json(obj, path, indent: int = 2) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_json(obj, indent=indent))


def write_csv(path, header: list[str], rows) -> None:
    """CSV with the same float formatting contract as the JSON writer."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for cell in row:
                if isinstance(cell, (float, np.floating)):
                    cells.append(format(float(cell), ".17g"))
                else:
                    cells.append(str(cell))
            fh.write(",".join(cells) + "\n")
