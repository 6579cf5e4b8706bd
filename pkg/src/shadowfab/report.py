"""Key-value reports rendered both as aligned text and as JSON."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any


def fmt(value: Any) -> Any:
    """Normalize a report value: floats to 9 significant digits, non-finite to strings."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float) or hasattr(value, "__float__"):
        x = float(value)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.9g}")
    return str(value)


class Report:
    def __init__(self, title: str):
        self.title = title
        self.items: list[tuple[str, Any]] = []
        self.notes: list[str] = []

    def add(self, key: str, value: Any) -> "Report":
        self.items.append((key, fmt(value)))
        return self

    def note(self, text: str) -> "Report":
        self.notes.append(text)
        return self

    def as_dict(self) -> dict:
        d = dict(self.items)
        if self.notes:
            d["notes"] = list(self.notes)
        return d

    def text(self) -> str:
        width = max((len(k) for k, _ in self.items), default=0)
        lines = [self.title, "-" * len(self.title)]
        for key, value in self.items:
            shown = "absent" if value is None else (f"{value:.9g}" if isinstance(value, float) else value)
            lines.append(f"{key.ljust(width)} : {shown}")
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines) + "\n"

    def json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.json(), encoding="utf-8")
