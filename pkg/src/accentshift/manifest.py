"""Utterance manifest records and their JSONL serialization.

A manifest row carries one utterance through the pipeline: source IPA,
transformed IPA, recognizer output, classifier logits, embedding pointer,
and naturalness score.  Unknown keys round-trip untouched via ``extras``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .rules import RuleFamily


class ManifestError(ValueError):
    """Malformed manifest content."""


_FAMILY_VALUES = frozenset(f.value for f in RuleFamily)

_KNOWN_KEYS = (
    "utt_id",
    "text",
    "voice_label",
    "ipa_source",
    "ipa_transformed",
    "durations",
    "recognized_ipa",
    "logits",
    "embedding_ref",
    "utmos",
    "n1",
    "n2",
    "n1_by_family",
    "n2_by_family",
)


def _check_family_counts(label: str, counts: Mapping[str, int] | None) -> None:
    if counts is None:
        return
    for name, value in counts.items():
        if name not in _FAMILY_VALUES:
            raise ManifestError(f"{label}: unknown rule family {name!r}")
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise ManifestError(f"{label}: count for {name!r} must be a non-negative int")


@dataclass(frozen=True)
class ManifestRow:
    """One utterance's worth of pipeline state."""

    utt_id: str
    text: str
    voice_label: str
    ipa_source: str
    ipa_transformed: str | None = None
    durations: tuple[float, ...] | None = None
    recognized_ipa: str | None = None
    logits: tuple[float, float, float] | None = None
    embedding_ref: str | None = None
    utmos: float | None = None
    n1: int | None = None
    n2: int | None = None
    n1_by_family: Mapping[str, int] | None = None
    n2_by_family: Mapping[str, int] | None = None
    extras: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.utt_id:
            raise ManifestError("utt_id must be non-empty")
        if self.ipa_transformed is not None and len(self.ipa_transformed) != len(
            self.ipa_source
        ):
            raise ManifestError(
                f"{self.utt_id}: ipa_transformed spans {len(self.ipa_transformed)} "
                f"codepoints but ipa_source spans {len(self.ipa_source)}"
            )
        if self.logits is not None:
            if len(self.logits) != 3:
                raise ManifestError(f"{self.utt_id}: logits must have exactly 3 entries")
            if not all(np.isfinite(v) for v in self.logits):
                raise ManifestError(f"{self.utt_id}: logits must be finite")
        if self.utmos is not None and not (1.0 <= self.utmos <= 5.0):
            raise ManifestError(f"{self.utt_id}: utmos {self.utmos!r} outside [1, 5]")
        for label, value in (("n1", self.n1), ("n2", self.n2)):
            if value is not None and (
                not isinstance(value, int) or isinstance(value, bool) or value < 0
            ):
                raise ManifestError(f"{self.utt_id}: {label} must be a non-negative int")
        _check_family_counts(f"{self.utt_id}: n1_by_family", self.n1_by_family)
        _check_family_counts(f"{self.utt_id}: n2_by_family", self.n2_by_family)

    @property
    def embedding_key(self) -> str:
        """Lookup key into an embedding sidecar."""
        return self.embedding_ref if self.embedding_ref is not None else self.utt_id


def row_from_dict(data: Mapping[str, Any]) -> ManifestRow:
    """Build a row from one decoded JSONL object; unknown keys go to extras."""
    missing = [k for k in ("utt_id", "text", "voice_label", "ipa_source") if k not in data]
    if missing:
        raise ManifestError(f"row missing required keys: {', '.join(missing)}")
    extras = {k: v for k, v in data.items() if k not in _KNOWN_KEYS}
    durations = data.get("durations")
    logits = data.get("logits")
    return ManifestRow(
        utt_id=data["utt_id"],
        text=data["text"],
        voice_label=data["voice_label"],
        ipa_source=data["ipa_source"],
        ipa_transformed=data.get("ipa_transformed"),
        durations=tuple(durations) if durations is not None else None,
        recognized_ipa=data.get("recognized_ipa"),
        logits=tuple(logits) if logits is not None else None,
        embedding_ref=data.get("embedding_ref"),
        utmos=data.get("utmos"),
        n1=data.get("n1"),
        n2=data.get("n2"),
        n1_by_family=dict(data["n1_by_family"]) if data.get("n1_by_family") is not None else None,
        n2_by_family=dict(data["n2_by_family"]) if data.get("n2_by_family") is not None else None,
        extras=extras,
    )


def row_to_dict(row: ManifestRow) -> dict[str, Any]:
    """Serialize a row; fields keep a stable order, None fields are omitted."""
    out: dict[str, Any] = {}
    for key in _KNOWN_KEYS:
        value = getattr(row, key)
        if value is None:
            continue
        if key == "durations":
            value = list(value)
        elif key == "logits":
            value = list(value)
        elif key in ("n1_by_family", "n2_by_family"):
            value = {k: value[k] for k in sorted(value)}
        out[key] = value
    for key in sorted(row.extras):
        out[key] = row.extras[key]
    return out


def read_manifest(path: str | Path) -> list[ManifestRow]:
    """Read a JSONL manifest; duplicate utt_ids are an error."""
    rows: list[ManifestRow] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: invalid JSON ({exc})") from None
            if not isinstance(data, dict):
                raise ManifestError(f"{path}:{lineno}: row must be a JSON object")
            try:
                row = row_from_dict(data)
            except ManifestError as exc:
                raise ManifestError(f"{path}:{lineno}: {exc}") from None
            if row.utt_id in seen:
                raise ManifestError(f"{path}:{lineno}: duplicate utt_id {row.utt_id!r}")
            seen.add(row.utt_id)
            rows.append(row)
    return rows


def write_manifest(path: str | Path, rows: Iterable[ManifestRow]) -> None:
    """Write rows as UTF-8 JSONL with stable key order."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row_to_dict(row), ensure_ascii=False))
            fh.write("\n")


def read_embeddings(path: str | Path) -> dict[str, tuple[float, ...]]:
    """Read an embedding sidecar: JSONL rows of {"utt_id": key, "embedding": [...]}."""
    table: dict[str, tuple[float, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: invalid JSON ({exc})") from None
            if not isinstance(data, dict) or "utt_id" not in data or "embedding" not in data:
                raise ManifestError(
                    f"{path}:{lineno}: expected an object with utt_id and embedding"
                )
            key = data["utt_id"]
            if key in table:
                raise ManifestError(f"{path}:{lineno}: duplicate embedding key {key!r}")
            table[key] = tuple(float(v) for v in data["embedding"])
    return table


def write_embeddings(path: str | Path, table: Mapping[str, Sequence[float]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key in table:
            fh.write(json.dumps({"utt_id": key, "embedding": list(map(float, table[key]))}))
            fh.write("\n")


def read_references(path: str | Path) -> dict[str, np.ndarray]:
    """Read group reference embeddings: a JSON object with "na" and "b" vectors."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ManifestError(f"{path}: expected a JSON object of group vectors")
    for required in ("na", "b"):
        if required not in data:
            raise ManifestError(f"{path}: missing reference group {required!r}")
    refs = {name: np.asarray(vec, dtype=float) for name, vec in data.items()}
    dims = {v.shape for v in refs.values()}
    if len(dims) != 1 or refs["na"].ndim != 1:
        raise ManifestError(f"{path}: reference vectors must share one 1-d shape")
    return refs
