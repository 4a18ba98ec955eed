"""Job descriptions and the quarantine log shared by all stages."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class AdapterError(ValueError):
    """Raised for bad job specs, unknown models, or unusable inputs."""


@dataclass(frozen=True)
class AdapterJobSpec:
    """Everything a batch run needs: where the rows live, which models
    to call, and where synthesized audio goes.

    Model identifiers select backends by name. "stub" variants are
    self-contained and deterministic; real model names fail loudly with
    an install hint when their package is absent.
    """

    manifest: Path
    audio_dir: Path
    g2p_model: str = "stub"
    tts_voice: str = "stub"
    recognizer_model: str = "stub"
    classifier_model: str = "stub"
    utmos_model: str = "stub"
    symbol_map: Path | None = None
    batch_size: int = 8

    def __post_init__(self) -> None:
        object.__setattr__(self, "manifest", Path(self.manifest))
        object.__setattr__(self, "audio_dir", Path(self.audio_dir))
        if self.symbol_map is not None:
            object.__setattr__(self, "symbol_map", Path(self.symbol_map))
        if not self.manifest.is_file():
            raise AdapterError(f"manifest not found: {self.manifest}")
        if self.batch_size < 1:
            raise AdapterError(f"batch_size must be >= 1, got {self.batch_size}")
        try:
            self.audio_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise AdapterError(f"audio_dir not writable: {self.audio_dir}: {exc}") from exc


@dataclass(frozen=True)
class QuarantineEntry:
    utt_id: str
    stage: str
    reason: str


@dataclass
class QuarantineLog:
    """Per-stage record of rows that did not gain a field.

    Re-running a stage replaces that stage's entries, so the log stays
    in step with the manifest instead of accumulating duplicates.
    """

    entries: list[QuarantineEntry] = field(default_factory=list)

    def replace_stage(self, stage: str, new: list[QuarantineEntry]) -> None:
        kept = [e for e in self.entries if e.stage != stage]
        self.entries = kept + list(new)

    def ids_for_stage(self, stage: str) -> set[str]:
        return {e.utt_id for e in self.entries if e.stage == stage}

    def all_ids(self) -> set[str]:
        return {e.utt_id for e in self.entries}


def read_quarantine(path: str | Path) -> QuarantineLog:
    log = QuarantineLog()
    p = Path(path)
    if not p.exists():
        return log
    with open(p, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            for key in ("utt_id", "stage", "reason"):
                if key not in obj:
                    raise AdapterError(f"quarantine line {lineno}: missing {key!r}")
            log.entries.append(QuarantineEntry(obj["utt_id"], obj["stage"], obj["reason"]))
    return log


def write_quarantine(path: str | Path, log: QuarantineLog) -> None:
    ordered = sorted(log.entries, key=lambda e: (e.stage, e.utt_id))
    with open(path, "w", encoding="utf-8") as fh:
        for e in ordered:
            fh.write(json.dumps({"utt_id": e.utt_id, "stage": e.stage, "reason": e.reason},
                                ensure_ascii=False, sort_keys=True))
            fh.write("\n")
