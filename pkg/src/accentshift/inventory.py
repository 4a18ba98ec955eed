"""IPA symbol inventory, tokenization, and phonological context predicates.

The inventory maps each symbol (1-3 Unicode codepoints) to a class:
vowel, consonant, length-mark, stress-mark, or other.  A plain space is
the implicit word separator and becomes a word-boundary token; it never
appears in the symbol table itself.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from enum import Enum

_DATA_DIR = Path(__file__).parent / "data"

MAX_SYMBOL_CODEPOINTS = 3
WORD_SEPARATOR = " "

SEQUENCE_START = "sequence-start"
SEQUENCE_END = "sequence-end"


class SymbolClass(Enum):
    """Classification of an inventory symbol."""

    VOWEL = "vowel"
    CONSONANT = "consonant"
    LENGTH_MARK = "length-mark"
    STRESS_MARK = "stress-mark"
    WORD_BOUNDARY = "word-boundary"
    OTHER = "other"


MARK_CLASSES = frozenset({SymbolClass.LENGTH_MARK, SymbolClass.STRESS_MARK})


class InventoryError(ValueError):
    """Malformed inventory definition."""


class TokenizeError(ValueError):
    """Input contains a codepoint no inventory symbol can cover.

    Carries the offending codepoint and its index in the input string.
    """

    def __init__(self, message: str, codepoint: str, index: int):
        super().__init__(message)
        self.codepoint = codepoint
        self.index = index


@dataclass(frozen=True)
class PhonemeInventory:
    """Immutable symbol table shared by the tokenizer and the rule engine."""

    class_of: Mapping[str, SymbolClass]

    def __post_init__(self) -> None:
        for symbol, cls in self.class_of.items():
            if symbol == "":
                raise InventoryError("empty symbol")
            if len(symbol) > MAX_SYMBOL_CODEPOINTS:
                raise InventoryError(
                    f"symbol {symbol!r} exceeds {MAX_SYMBOL_CODEPOINTS} codepoints"
                )
            if any(ch.isspace() for ch in symbol):
                raise InventoryError(f"symbol {symbol!r} contains whitespace")
            if not isinstance(cls, SymbolClass):
                raise InventoryError(f"symbol {symbol!r} has an invalid class {cls!r}")
            if cls is SymbolClass.WORD_BOUNDARY:
                raise InventoryError(
                    f"symbol {symbol!r}: word boundaries are implicit, not inventory entries"
                )

    @property
    def entries(self) -> frozenset[str]:
        return frozenset(self.class_of)

    @property
    def max_symbol_len(self) -> int:
        return max((len(s) for s in self.class_of), default=1)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.class_of

    def classify(self, symbol: str) -> SymbolClass:
        try:
            return self.class_of[symbol]
        except KeyError:
            raise InventoryError(f"symbol {symbol!r} not in inventory") from None


def load_inventory(definition_text: str) -> PhonemeInventory:
    """Parse an inventory definition: one ``symbol<TAB>class`` entry per line.

    Blank lines and ``#`` comments are skipped.  Raises InventoryError on
    duplicate symbols, unknown class labels, or empty symbols.
    """
    class_of: dict[str, SymbolClass] = {}
    for lineno, raw in enumerate(definition_text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise InventoryError(f"line {lineno}: expected 'symbol class', got {line!r}")
        symbol, label = fields
        try:
            cls = SymbolClass(label)
        except ValueError:
            raise InventoryError(f"line {lineno}: unknown class label {label!r}") from None
        if symbol in class_of:
            raise InventoryError(f"line {lineno}: duplicate symbol {symbol!r}")
        class_of[symbol] = cls
    return PhonemeInventory(class_of)


def load_inventory_file(path: str | Path) -> PhonemeInventory:
    return load_inventory(Path(path).read_text(encoding="utf-8"))


@functools.lru_cache(maxsize=1)
def default_inventory() -> PhonemeInventory:
    """The shipped General American + RP symbol table."""
    return load_inventory_file(_DATA_DIR / "inventory.tsv")


@dataclass(frozen=True)
class Token:
    """One inventory symbol occurrence (or a word boundary)."""

    symbol: str
    cls: SymbolClass

    @property
    def codepoint_len(self) -> int:
        return len(self.symbol)

    @property
    def kind(self) -> str:
        """Coarse token kind: phoneme, length-mark, stress-mark, or word-boundary."""
        if self.cls is SymbolClass.WORD_BOUNDARY:
            return "word-boundary"
        if self.cls is SymbolClass.LENGTH_MARK:
            return "length-mark"
        if self.cls is SymbolClass.STRESS_MARK:
            return "stress-mark"
        return "phoneme"

    @property
    def is_mark(self) -> bool:
        return self.cls in MARK_CLASSES

    @property
    def is_boundary(self) -> bool:
        return self.cls is SymbolClass.WORD_BOUNDARY

    @property
    def is_vowel(self) -> bool:
        return self.cls is SymbolClass.VOWEL


BOUNDARY_TOKEN = Token(WORD_SEPARATOR, SymbolClass.WORD_BOUNDARY)


@dataclass(frozen=True)
class WordSpan:
    """Half-open token-index range [start, end) covering one word."""

    start: int
    end: int
    word: str


@dataclass(frozen=True)
class PhonemeSequence:
    """Tokenized utterance; optionally carries word spans for lexicon gating."""

    tokens: tuple[Token, ...]
    word_spans: tuple[WordSpan, ...] | None = None

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(t.symbol for t in self.tokens)

    @property
    def codepoint_count(self) -> int:
        return sum(t.codepoint_len for t in self.tokens)

    @property
    def non_boundary_count(self) -> int:
        return sum(1 for t in self.tokens if not t.is_boundary)


@dataclass(frozen=True)
class PhonemeContext:
    """Phonological neighborhood of one token position.

    ``prev_class``/``next_class`` are the classes of the nearest non-mark
    neighbors (length- and stress-marks are transparent), or the
    ``sequence-start``/``sequence-end`` sentinels.
    """

    prev_class: SymbolClass | str
    next_class: SymbolClass | str
    is_post_vocalic: bool
    is_pre_vocalic: bool
    is_coda: bool


def tokenize(ipa: str, inventory: PhonemeInventory | None = None) -> PhonemeSequence:
    """Segment an IPA string by greedy longest match against the inventory.

    Spaces become word-boundary tokens and delimit word spans; the span's
    word label is the covered substring of ``ipa`` (see align_word_spans
    for attaching orthographic words).  Raises TokenizeError on the first
    codepoint no symbol can cover.
    """
    inv = inventory if inventory is not None else default_inventory()
    table = inv.class_of
    max_len = inv.max_symbol_len
    tokens: list[Token] = []
    spans: list[WordSpan] = []
    span_tok_start: int | None = None
    span_char_start = 0

    def close_span(char_end: int) -> None:
        nonlocal span_tok_start
        if span_tok_start is not None:
            spans.append(WordSpan(span_tok_start, len(tokens), ipa[span_char_start:char_end]))
            span_tok_start = None

    i = 0
    n = len(ipa)
    while i < n:
        if ipa[i] == WORD_SEPARATOR:
            close_span(i)
            tokens.append(BOUNDARY_TOKEN)
            i += 1
            continue
        matched: str | None = None
        for k in range(min(max_len, n - i), 0, -1):
            candidate = ipa[i : i + k]
            if candidate in table:
                matched = candidate
                break
        if matched is None:
            raise TokenizeError(
                f"unknown codepoint {ipa[i]!r} (U+{ord(ipa[i]):04X}) at index {i}",
                codepoint=ipa[i],
                index=i,
            )
        if span_tok_start is None:
            span_tok_start = len(tokens)
            span_char_start = i
        tokens.append(Token(matched, table[matched]))
        i += len(matched)
    close_span(n)
    return PhonemeSequence(tuple(tokens), tuple(spans))


def detokenize(seq: PhonemeSequence) -> str:
    """Concatenate token symbols; word boundaries render as single spaces."""
    return "".join(t.symbol for t in seq.tokens)


def align_word_spans(seq: PhonemeSequence, text: str) -> PhonemeSequence:
    """Replace span word labels with the whitespace-split words of ``text``.

    Word count must match the sequence's span count.
    """
    if seq.word_spans is None:
        raise ValueError("sequence has no word spans to align")
    words = text.split()
    if len(words) != len(seq.word_spans):
        raise ValueError(
            f"cannot align {len(words)} words with {len(seq.word_spans)} word spans"
        )
    spans = tuple(
        WordSpan(span.start, span.end, word) for span, word in zip(seq.word_spans, words)
    )
    return PhonemeSequence(seq.tokens, spans)


def _nearest_non_mark(tokens: Sequence[Token], start: int, step: int) -> tuple[SymbolClass | None, int]:
    j = start
    while 0 <= j < len(tokens):
        if not tokens[j].is_mark:
            return tokens[j].cls, j
        j += step
    return None, j


def context_of(tokens: Sequence[Token], index: int) -> PhonemeContext:
    """Context of ``tokens[index]``; marks are transparent to every predicate.

    The coda predicate looks through a following word boundary: a boundary
    followed by a consonant (or by nothing) still closes the syllable,
    while a following vowel keeps the position prevocalic even across the
    boundary.
    """
    if not 0 <= index < len(tokens):
        raise IndexError(f"token index {index} out of range for {len(tokens)} tokens")
    prev_cls, _ = _nearest_non_mark(tokens, index - 1, -1)
    next_cls, next_idx = _nearest_non_mark(tokens, index + 1, +1)

    if next_cls is None:
        is_coda = True
    elif next_cls is SymbolClass.CONSONANT:
        is_coda = True
    elif next_cls is SymbolClass.WORD_BOUNDARY:
        j = next_idx
        while j < len(tokens) and (tokens[j].is_mark or tokens[j].is_boundary):
            j += 1
        is_coda = j >= len(tokens) or tokens[j].cls is SymbolClass.CONSONANT
    else:
        is_coda = False

    return PhonemeContext(
        prev_class=prev_cls if prev_cls is not None else SEQUENCE_START,
        next_class=next_cls if next_cls is not None else SEQUENCE_END,
        is_post_vocalic=prev_cls is SymbolClass.VOWEL,
        is_pre_vocalic=next_cls is SymbolClass.VOWEL,
        is_coda=is_coda,
    )


def context_at(seq: PhonemeSequence, index: int) -> PhonemeContext:
    """Context of the token at ``index`` in ``seq``."""
    return context_of(seq.tokens, index)
