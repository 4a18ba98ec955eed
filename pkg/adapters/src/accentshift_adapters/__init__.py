"""Batch adapters that fill accent-shift manifests with model outputs."""

from .backends import (
    StubClassifier,
    StubG2p,
    StubRecognizer,
    StubSynth,
    StubUtmos,
    decode_phonemes_wav,
    encode_phonemes_wav,
    get_classifier,
    get_g2p,
    get_recognizer,
    get_tts,
    get_utmos,
    register_classifier,
    register_g2p,
    register_recognizer,
    register_tts,
    register_utmos,
)
from .jobs import AdapterError, AdapterJobSpec, QuarantineEntry, QuarantineLog, read_quarantine, write_quarantine
from .manifest_io import ManifestIoError, read_rows, write_embeddings, write_rows
from .stages import (
    STAGE_ORDER,
    PipelineResult,
    classify_batch,
    g2p_batch,
    recognize_batch,
    run_pipeline,
    synth_batch,
    utmos_batch,
)
from .symbol_map import UnmappedSymbolError, load_symbol_map, map_symbols, parse_symbol_map

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "AdapterJobSpec",
    "ManifestIoError",
    "PipelineResult",
    "QuarantineEntry",
    "QuarantineLog",
    "STAGE_ORDER",
    "StubClassifier",
    "StubG2p",
    "StubRecognizer",
    "StubSynth",
    "StubUtmos",
    "UnmappedSymbolError",
    "classify_batch",
    "decode_phonemes_wav",
    "encode_phonemes_wav",
    "g2p_batch",
    "get_classifier",
    "get_g2p",
    "get_recognizer",
    "get_tts",
    "get_utmos",
    "load_symbol_map",
    "map_symbols",
    "parse_symbol_map",
    "read_quarantine",
    "read_rows",
    "recognize_batch",
    "register_classifier",
    "register_g2p",
    "register_recognizer",
    "register_tts",
    "register_utmos",
    "run_pipeline",
    "synth_batch",
    "utmos_batch",
    "write_embeddings",
    "write_quarantine",
    "write_rows",
]
