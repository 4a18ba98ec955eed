"""Batch operations that fill manifest fields.

Each stage owns a fixed set of keys and touches nothing else. Rows
that already carry the stage's field pass through unchanged, which is
what makes re-runs idempotent; rows the stage cannot serve land in the
quarantine log with a reason. No stage ever drops a row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from . import backends, manifest_io
from .jobs import AdapterError, AdapterJobSpec, QuarantineEntry, QuarantineLog, read_quarantine, write_quarantine
from .symbol_map import load_symbol_map, map_symbols

STAGE_ORDER = ("g2p", "synth", "recognize", "classify", "utmos")


def _chunks(rows: Sequence[dict], size: int) -> Iterator[Sequence[dict]]:
    for start in range(0, len(rows), size):
        yield rows[start:start + size]


def _audio_path(job: AdapterJobSpec, utt_id: str) -> Path:
    return job.audio_dir / f"{utt_id}.wav"


def g2p_batch(rows: list[dict], job: AdapterJobSpec) -> list[QuarantineEntry]:
    """Fill ipa_source from text."""
    model = backends.get_g2p(job.g2p_model)
    bad: list[QuarantineEntry] = []
    for chunk in _chunks(rows, job.batch_size):
        for row in chunk:
            if "ipa_source" in row:
                continue
            text = row.get("text")
            if not isinstance(text, str):
                bad.append(QuarantineEntry(row["utt_id"], "g2p", "missing text"))
                continue
            try:
                row["ipa_source"] = model.phonemize(text)
            except AdapterError as exc:
                bad.append(QuarantineEntry(row["utt_id"], "g2p", str(exc)))
    return bad


def synth_batch(rows: list[dict], job: AdapterJobSpec) -> list[QuarantineEntry]:
    """Write one waveform per row, named by utt_id, and fill audio.

    Synthesizes ipa_transformed when present, otherwise ipa_source, so
    untransformed baselines flow through the same call.
    """
    model = backends.get_tts(job.tts_voice)
    bad: list[QuarantineEntry] = []
    for chunk in _chunks(rows, job.batch_size):
        for row in chunk:
            if "audio" in row:
                continue
            ipa = row.get("ipa_transformed") or row.get("ipa_source")
            if not isinstance(ipa, str) or not ipa:
                bad.append(QuarantineEntry(row["utt_id"], "synth", "no phoneme string"))
                continue
            durations = row.get("durations")
            out = _audio_path(job, row["utt_id"])
            try:
                model.synthesize(ipa, durations, out)
            except AdapterError as exc:
                bad.append(QuarantineEntry(row["utt_id"], "synth", str(exc)))
                continue
            row["audio"] = str(out)
    return bad


def recognize_batch(rows: list[dict], job: AdapterJobSpec) -> list[QuarantineEntry]:
    """Transcribe audio and rewrite it through the symbol map."""
    model = backends.get_recognizer(job.recognizer_model)
    mapping = load_symbol_map(job.symbol_map)
    bad: list[QuarantineEntry] = []
    for chunk in _chunks(rows, job.batch_size):
        for row in chunk:
            if "recognized_ipa" in row:
                continue
            audio = row.get("audio")
            if not isinstance(audio, str):
                bad.append(QuarantineEntry(row["utt_id"], "recognize", "missing audio"))
                continue
            try:
                raw = model.transcribe(Path(audio))
                row["recognized_ipa"] = map_symbols(raw, mapping)
            except (AdapterError, OSError) as exc:
                bad.append(QuarantineEntry(row["utt_id"], "recognize", str(exc)))
    return bad


def classify_batch(rows: list[dict], job: AdapterJobSpec,
                   embeddings: list[dict]) -> list[QuarantineEntry]:
    """Fill logits and append {"utt_id", "embedding"} sidecar entries.

    Embeddings are recomputed even for rows that already carry logits,
    so the sidecar always covers every servable row; logits themselves
    are never overwritten.
    """
    model = backends.get_classifier(job.classifier_model)
    bad: list[QuarantineEntry] = []
    for chunk in _chunks(rows, job.batch_size):
        for row in chunk:
            audio = row.get("audio")
            if not isinstance(audio, str):
                bad.append(QuarantineEntry(row["utt_id"], "classify", "missing audio"))
                continue
            try:
                logits, embedding = model.classify(Path(audio))
            except (AdapterError, OSError) as exc:
                bad.append(QuarantineEntry(row["utt_id"], "classify", str(exc)))
                continue
            if "logits" not in row:
                row["logits"] = list(logits)
            embeddings.append({"utt_id": row["utt_id"], "embedding": embedding})
    return bad


def utmos_batch(rows: list[dict], job: AdapterJobSpec) -> list[QuarantineEntry]:
    """Fill utmos with a naturalness score in [1, 5]."""
    model = backends.get_utmos(job.utmos_model)
    bad: list[QuarantineEntry] = []
    for chunk in _chunks(rows, job.batch_size):
        for row in chunk:
            if "utmos" in row:
                continue
            audio = row.get("audio")
            if not isinstance(audio, str):
                bad.append(QuarantineEntry(row["utt_id"], "utmos", "missing audio"))
                continue
            try:
                row["utmos"] = model.score(Path(audio))
            except (AdapterError, OSError) as exc:
                bad.append(QuarantineEntry(row["utt_id"], "utmos", str(exc)))
    return bad


@dataclass
class PipelineResult:
    rows: list[dict]
    log: QuarantineLog
    new_failures: int
    manifest_path: Path
    quarantine_path: Path
    embeddings_path: Path | None = None
    embeddings: list[dict] = field(default_factory=list)


def run_pipeline(job: AdapterJobSpec,
                 stages: Iterable[str] | None = None,
                 out_manifest: Path | None = None,
                 embeddings_out: Path | None = None,
                 quarantine_path: Path | None = None) -> PipelineResult:
    """Run the requested stages in canonical order and write results.

    The output manifest holds exactly the input rows; failures are
    visible only through missing fields plus the quarantine log.
    """
    chosen = STAGE_ORDER if stages is None else tuple(stages)
    unknown = [s for s in chosen if s not in STAGE_ORDER]
    if unknown:
        raise AdapterError(f"unknown stage(s): {', '.join(unknown)}")
    ordered = [s for s in STAGE_ORDER if s in chosen]

    out_path = Path(out_manifest) if out_manifest is not None else job.manifest
    q_path = (Path(quarantine_path) if quarantine_path is not None
              else out_path.with_name(out_path.stem + ".quarantine.jsonl"))
    e_path = (Path(embeddings_out) if embeddings_out is not None
              else out_path.with_name(out_path.stem + ".embeddings.jsonl"))

    rows = manifest_io.read_rows(job.manifest)
    n_in = len(rows)
    log = read_quarantine(q_path)

    embeddings: list[dict] = []
    new_failures = 0
    for stage in ordered:
        if stage == "g2p":
            entries = g2p_batch(rows, job)
        elif stage == "synth":
            entries = synth_batch(rows, job)
        elif stage == "recognize":
            entries = recognize_batch(rows, job)
        elif stage == "classify":
            entries = classify_batch(rows, job, embeddings)
        else:
            entries = utmos_batch(rows, job)
        log.replace_stage(stage, entries)
        new_failures += len(entries)

    if len(rows) != n_in:
        raise AdapterError("row count changed during pipeline; this is a bug")

    manifest_io.write_rows(out_path, rows)
    write_quarantine(q_path, log)
    result = PipelineResult(rows, log, new_failures, out_path, q_path)
    if "classify" in ordered:
        manifest_io.write_embeddings(e_path, embeddings)
        result.embeddings_path = e_path
        result.embeddings = embeddings
    return result
