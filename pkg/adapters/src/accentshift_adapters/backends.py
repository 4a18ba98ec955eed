"""Model backends behind the batch stages.

Every backend family has a "stub" implementation that is deterministic
and dependency-free, so the full pipeline runs anywhere. Stub audio is
a lossless phoneme codec: each codepoint of the phoneme string becomes
a fixed-length block of samples holding its ordinal, which the stub
recognizer decodes back. That makes recognition exact and lets tests
reason about every downstream field.

Real model identifiers are registered by name and raise with an install
hint; wire one in with the register_* functions.
"""

from __future__ import annotations

import array
import sys
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .jobs import AdapterError

SAMPLE_RATE = 16000
SAMPLE_WIDTH = 2
SAMPLES_PER_UNIT = 100

# Hand-checked pronunciations for the fixture vocabulary; anything else
# falls back to a letter map so arbitrary test text still phonemizes.
_LEXICON = {
    "the": "ðə",
    "a": "ə",
    "water": "wɑɾɚ",
    "butter": "bʌɾɚ",
    "letter": "lɛɾɚ",
    "latter": "lɑɾɚ",
    "car": "kaɹ",
    "far": "faɹ",
    "bird": "bɝd",
    "better": "bɛɾɚ",
    "bath": "bæθ",
    "path": "pæθ",
    "cat": "kæt",
    "goat": "goʊt",
    "boat": "boʊt",
    "park": "paɹk",
    "port": "pɔɹt",
    "nurse": "nɝs",
    "sofa": "soʊfə",
    "red": "ɹɛd",
    "is": "ɪz",
    "in": "ɪn",
    "on": "ɑn",
    "my": "maj",
    "dance": "dæns",
    "natter": "næɾɚ",
}

_LETTER_FALLBACK = {
    "a": "æ", "b": "b", "c": "k", "d": "d", "e": "ɛ", "f": "f", "g": "g",
    "h": "h", "i": "ɪ", "j": "dʒ", "k": "k", "l": "l", "m": "m", "n": "n",
    "o": "ɑ", "p": "p", "q": "k", "r": "ɹ", "s": "s", "t": "t", "u": "ʌ",
    "v": "v", "w": "w", "x": "ks", "y": "j", "z": "z",
}


class StubG2p:
    """Lexicon-first grapheme-to-phoneme with a letter fallback."""

    def phonemize(self, text: str) -> str:
        words = text.casefold().split()
        if not words:
            raise AdapterError("empty text")
        out: list[str] = []
        for word in words:
            entry = _LEXICON.get(word)
            if entry is None:
                entry = self._spell(word)
            out.append(entry)
        return " ".join(out)

    def _spell(self, word: str) -> str:
        pieces: list[str] = []
        for ch in word:
            mapped = _LETTER_FALLBACK.get(ch)
            if mapped is None:
                raise AdapterError(f"no pronunciation for character {ch!r} in {word!r}")
            pieces.append(mapped)
        return "".join(pieces)


def encode_phonemes_wav(ipa: str, out_path: Path) -> None:
    samples = array.array("h")
    for ch in ipa:
        code = ord(ch)
        if code > 32767:
            raise AdapterError(f"codepoint U+{code:04X} does not fit the stub codec")
        samples.extend([code] * SAMPLES_PER_UNIT)
    if sys.byteorder == "big":
        samples.byteswap()
    with wave.open(str(out_path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(SAMPLE_WIDTH)
        wav.setframerate(SAMPLE_RATE)
        wav.writeframes(samples.tobytes())


def decode_phonemes_wav(path: Path) -> str:
    with wave.open(str(path), "rb") as wav:
        if wav.getnchannels() != 1 or wav.getsampwidth() != SAMPLE_WIDTH:
            raise AdapterError(f"unexpected audio layout in {path}")
        frames = wav.readframes(wav.getnframes())
    samples = array.array("h")
    samples.frombytes(frames)
    if sys.byteorder == "big":
        samples.byteswap()
    if len(samples) % SAMPLES_PER_UNIT != 0:
        raise AdapterError(f"audio length not block-aligned in {path}")
    chars = []
    for i in range(0, len(samples), SAMPLES_PER_UNIT):
        chars.append(chr(samples[i]))
    return "".join(chars)


class StubSynth:
    """Writes the phoneme codec described in the module docstring.

    Durations, when present, must have one entry per non-space
    codepoint; block length stays fixed either way.
    """

    def __init__(self, preset: str = "stub"):
        self.preset = preset

    def synthesize(self, ipa: str, durations: list[float] | None, out_path: Path) -> None:
        if not ipa:
            raise AdapterError("empty phoneme string")
        if durations is not None:
            units = sum(1 for ch in ipa if ch != " ")
            if len(durations) != units:
                raise AdapterError(
                    f"durations length {len(durations)} != {units} phoneme units")
        encode_phonemes_wav(ipa, out_path)


class StubRecognizer:
    """Reads the codec back; output is the raw recognizer alphabet,
    which the stage then passes through the symbol map."""

    def transcribe(self, path: Path) -> str:
        return decode_phonemes_wav(path)


class StubClassifier:
    """Surface-feature accent scorer over the decoded audio.

    Logit order: North American, British Isles, other. The embedding is
    a fixed 8-dim feature vector with a bias term so it never has zero
    norm.
    """

    EMBED_DIM = 8

    def classify(self, path: Path) -> tuple[tuple[float, float, float], list[float]]:
        raw = decode_phonemes_wav(path)
        na_feat = sum(raw.count(c) for c in "æɾɚɝ")
        b_feat = raw.count("ː") + raw.count("ə")
        logits = (0.6 * na_feat, 0.6 * b_feat, 0.1)
        embedding = [
            float(na_feat),
            float(b_feat),
            float(raw.count("ɹ")),
            float(raw.count("ɑ")),
            float(raw.count(" ") + 1),
            float(len(raw)),
            float(raw.count("ʊ")),
            1.0,
        ]
        return logits, embedding


class StubUtmos:
    """Length-keyed naturalness score, always inside [1, 5]."""

    def score(self, path: Path) -> float:
        with wave.open(str(path), "rb") as wav:
            n = wav.getnframes()
        return round(3.0 + 1.8 * ((n % 1201) / 1200.0), 4)


def _unavailable(name: str, hint: str) -> Callable[[str], object]:
    def factory(_ident: str) -> object:
        raise AdapterError(f"model unavailable: {name!r} needs {hint}; "
                           "install it and register a backend")
    return factory


@dataclass
class _Registry:
    factories: dict[str, Callable[[str], object]]
    kind: str

    def get(self, ident: str) -> object:
        base = ident.split(":", 1)[0]
        factory = self.factories.get(base)
        if factory is None:
            known = ", ".join(sorted(self.factories))
            raise AdapterError(f"unknown {self.kind} model {ident!r} (known: {known})")
        return factory(ident)


_G2P = _Registry({"stub": lambda _i: StubG2p(),
                  "misaki": _unavailable("misaki", "the misaki package")}, "g2p")
_TTS = _Registry({"stub": lambda i: StubSynth(i),
                  "kokoro": _unavailable("kokoro", "the kokoro package")}, "tts")
_RECOGNIZER = _Registry({"stub": lambda _i: StubRecognizer(),
                         "wav2vec2-phoneme": _unavailable(
                             "wav2vec2-phoneme", "transformers and torch")}, "recognizer")
_CLASSIFIER = _Registry({"stub": lambda _i: StubClassifier(),
                         "accent-xlsr": _unavailable(
                             "accent-xlsr", "transformers and torch")}, "classifier")
_UTMOS = _Registry({"stub": lambda _i: StubUtmos(),
                    "utmos22": _unavailable("utmos22", "torch and torch.hub access")}, "utmos")


def get_g2p(ident: str):
    return _G2P.get(ident)


def get_tts(ident: str):
    return _TTS.get(ident)


def get_recognizer(ident: str):
    return _RECOGNIZER.get(ident)


def get_classifier(ident: str):
    return _CLASSIFIER.get(ident)


def get_utmos(ident: str):
    return _UTMOS.get(ident)


def register_g2p(name: str, factory: Callable[[str], object]) -> None:
    _G2P.factories[name] = factory


def register_tts(name: str, factory: Callable[[str], object]) -> None:
    _TTS.factories[name] = factory


def register_recognizer(name: str, factory: Callable[[str], object]) -> None:
    _RECOGNIZER.factories[name] = factory


def register_classifier(name: str, factory: Callable[[str], object]) -> None:
    _CLASSIFIER.factories[name] = factory


def register_utmos(name: str, factory: Callable[[str], object]) -> None:
    _UTMOS.factories[name] = factory
