"""Recognizer-output normalization.

Recognizers emit their own symbol alphabet; downstream scoring expects
the transform inventory. The bridge is a two-column UTF-8 text file,
raw symbol then TAB then mapped symbol. Anything the map does not
cover fails loudly instead of passing through.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .jobs import AdapterError


class UnmappedSymbolError(AdapterError):
    """A recognizer symbol with no entry in the map."""

    def __init__(self, symbol: str, index: int):
        super().__init__(f"unmapped recognizer symbol {symbol!r} at codepoint {index}")
        self.symbol = symbol
        self.index = index


def parse_symbol_map(text: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 2:
            raise AdapterError(f"symbol map line {lineno}: expected 2 tab-separated columns")
        raw, mapped = parts
        if not raw or not mapped:
            raise AdapterError(f"symbol map line {lineno}: empty column")
        if raw in mapping:
            raise AdapterError(f"symbol map line {lineno}: duplicate raw symbol {raw!r}")
        mapping[raw] = mapped
    if not mapping:
        raise AdapterError("symbol map has no entries")
    return mapping


def load_symbol_map(path: str | Path | None = None) -> dict[str, str]:
    """Read a map file; None loads the bundled default."""
    if path is None:
        text = resources.files("accentshift_adapters.data").joinpath(
            "symbol_map.tsv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_symbol_map(text)


def map_symbols(raw: str, mapping: dict[str, str]) -> str:
    """Rewrite a raw transcript symbol by symbol, longest raw key first.

    Plain spaces separate words and pass through unmapped.
    """
    max_len = max(len(k) for k in mapping)
    out: list[str] = []
    i = 0
    while i < len(raw):
        if raw[i] == " ":
            out.append(" ")
            i += 1
            continue
        for width in range(min(max_len, len(raw) - i), 0, -1):
            candidate = raw[i:i + width]
            if candidate in mapping:
                out.append(mapping[candidate])
                i += width
                break
        else:
            raise UnmappedSymbolError(raw[i], i)
    return "".join(out)
