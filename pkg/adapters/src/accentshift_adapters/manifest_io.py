"""Line-oriented JSON manifest access.

Rows are plain dicts. Keys the adapters do not own pass through
untouched, so upstream and downstream tools can share one file.
"""

from __future__ import annotations

import json
from pathlib import Path


class ManifestIoError(ValueError):
    """Raised when a manifest file cannot be read as rows."""


def read_rows(path: str | Path) -> list[dict]:
    """Parse one JSON object per line. Blank lines are skipped.

    Every row must carry a string utt_id; utt_ids must be unique.
    """
    rows: list[dict] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestIoError(f"line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise ManifestIoError(f"line {lineno}: expected an object")
            utt_id = obj.get("utt_id")
            if not isinstance(utt_id, str) or not utt_id:
                raise ManifestIoError(f"line {lineno}: missing utt_id")
            if utt_id in seen:
                raise ManifestIoError(f"line {lineno}: duplicate utt_id {utt_id!r}")
            seen.add(utt_id)
            rows.append(obj)
    return rows


def write_rows(path: str | Path, rows: list[dict]) -> None:
    # Sorted keys keep re-runs byte-identical regardless of fill order.
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def write_embeddings(path: str | Path, entries: list[dict]) -> None:
    """Sidecar rows of the form {"utt_id": ..., "embedding": [...]}."""
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
