"""
JSON-Ausgabe mit 17 signifikanten Stellen.

Der Standard-Encoder von ``json`` schreibt Floats mit ``repr`` (kuerzeste
Darstellung). Fuer diffbare Artefakte (MDPs, Klassen, Reports) werden alle
Reals hier explizit mit ``%.17g`` formatiert. Unendlich wird wie beim
``json``-Modul als ``Infinity`` geschrieben und von ``json.loads`` gelesen.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Union

import numpy as np


def format_real(x: float) -> str:
    """Formatiert einen Float mit 17 signifikanten Stellen."""
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _encode(obj: Any, indent: int | None, level: int) -> str:
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_real(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)

    if indent is None:
        sep, pad, pad_close = ", ", "", ""
    else:
        sep = ",\n"
        pad = "\n" + " " * (indent * (level + 1))
        pad_close = "\n" + " " * (indent * level)

    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, indent, level + 1)}"
            for k, v in obj.items()
        ]
        if indent is None:
            return "{" + sep.join(items) + "}"
        inner = sep.join(" " * (indent * (level + 1)) + item for item in items)
        return "{\n" + inner + pad_close + "}"

    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [_encode(v, indent, level + 1) for v in obj]
        # Zahlen-Listen bleiben einzeilig, sonst werden Tabellen unlesbar lang
        if indent is None or all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(items) + "]"
        return "[" + pad + (sep + " " * (indent * (level + 1))).join(items) + pad_close + "]"

    raise TypeError(f"Nicht serialisierbarer Typ: {type(obj).__name__}")


def dumps(obj: Any, indent: int | None = 2) -> str:
    """Serialisiert ``obj`` als JSON-String (Reals mit 17 Stellen)."""
    return _encode(obj, indent, 0)


def write_json(obj: Any, path: Union[str, Path], indent: int | None = 2) -> Path:
    """Schreibt ``obj`` als UTF-8 JSON-Datei (mit abschliessendem Newline)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj, indent) + "\n", encoding="utf-8")
    return path


def read_json(path: Union[str, Path]) -> Any:
    """Liest eine JSON-Datei. Fehlende Dateien -> FileNotFoundError."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Datei nicht gefunden: {path}")
    return json.loads(path.read_text(encoding="utf-8"))
