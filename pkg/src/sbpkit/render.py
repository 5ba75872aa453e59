"""Deterministic JSON/CSV rendering with 17-significant-digit floats."""

from __future__ import annotations

import numpy as np


def format_float(value: float) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    v = float(value)
    if v != v:
        return "NaN"
    if v in (float("inf"), float("-inf")):
        return "Infinity" if v > 0 else "-Infinity"
    return f"{v:.17g}"


def render_json(obj, indent: int = 0) -> str:
    """JSON text with floats rendered to 17 significant digits, keys sorted."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = ", ".join(
            f'"{key}": {render_json(obj[key])}' for key in sorted(obj)
        )
        return pad + "{" + items + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        return pad + "[" + ", ".join(render_json(v) for v in seq) + "]"
    if obj is None:
        return pad + "null"
    if isinstance(obj, bool):
        return pad + ("true" if obj else "false")
    if isinstance(obj, str):
        return pad + f'"{obj}"'
    return pad + format_float(obj)


def render_csv(header, rows) -> str:
    """CSV text with comma separators, LF endings and 17-digit floats."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            cell if isinstance(cell, str) else format_float(cell) for cell in row
        ))
    return "\n".join(lines) + "\n"
