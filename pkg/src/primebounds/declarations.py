"""External facts consumed as inputs, each with a citation, loaded from a versioned JSON file."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .analytic import lemma_B

SUPPORTED_VERSION = 1


class DeclarationError(ValueError):
    pass


@dataclass(frozen=True)
class TableRow:
    log_a: float
    log_b: float
    eps: float | None
    claimed: float
    citation: str

    def evaluate(self) -> float | None:
        """B bound on [e^log_a, e^log_b], or None when the external eps is not supplied."""
        return None if self.eps is None else lemma_B(self.log_a, self.log_b, self.eps)


@dataclass(frozen=True)
class Declarations:
    version: int
    entries: dict
    table_rows: list[TableRow]
    source: str

    def __getitem__(self, key: str) -> dict:
        try:
            return self.entries[key]
        except KeyError:
            raise DeclarationError(f"declaration {key!r} missing from {self.source}") from None


def load_declarations(path: str | Path | None = None) -> Declarations:
    """Load the shipped declarations, or those at ``path``."""
    if path is None:
        text = resources.files("primebounds").joinpath("data/declarations.json").read_text()
        source = "builtin"
    else:
        text = Path(path).read_text()
        source = str(path)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DeclarationError(f"{source}: {exc}") from exc
    if raw.get("version") != SUPPORTED_VERSION:
        raise DeclarationError(f"{source}: unsupported declarations version {raw.get('version')!r}")
    entries = raw.get("entries", {})
    for key, entry in entries.items():
        if not entry.get("citation"):
            raise DeclarationError(f"{source}: entry {key!r} has no citation")
    rows = [TableRow(r["log_a"], r["log_b"], r.get("eps"), r["claimed"], r["citation"]) for r in raw.get("table_rows", [])]
    return Declarations(raw["version"], entries, rows, source)
