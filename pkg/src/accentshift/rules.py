"""Ordered substitution rules over phoneme sequences.

A rule rewrites a fixed window of tokens with a same-length (token count
and codepoint count) replacement, optionally gated by a phonological or
lexical condition.  Application is a single left-to-right pass with
first-match-wins over the rule order; the scan resumes after a replaced
window, so one pass reaches a fixpoint.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .inventory import (
    PhonemeInventory,
    PhonemeSequence,
    Token,
    WordSpan,
    context_of,
    default_inventory,
)

_DATA_DIR = Path(__file__).parent / "data"


class RuleFamily(Enum):
    FLAPPING = "flapping"
    RHOTICITY = "rhoticity"
    VOWEL = "vowel"


class ConditionKind(Enum):
    UNCONDITIONAL = "unconditional"
    POST_VOCALIC_CODA = "post-vocalic-coda"
    INTERVOCALIC = "intervocalic"
    LEXICON = "lexicon"


class RulesetError(ValueError):
    """Ruleset failed validation; ``violations`` lists every problem found."""

    def __init__(self, violations: Sequence[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class MissingWordSpansError(ValueError):
    """A lexicon-gated rule needs word spans the sequence does not carry."""


@dataclass(frozen=True)
class Condition:
    """Gate on a matched window; ``lexicon`` names a word set for LEXICON."""

    kind: ConditionKind
    lexicon: str | None = None

    @classmethod
    def parse(cls, text: str) -> "Condition":
        text = text.strip()
        if text.startswith("lexicon:"):
            name = text[len("lexicon:") :].strip()
            if not name:
                raise ValueError("lexicon condition needs a name after the colon")
            return cls(ConditionKind.LEXICON, name)
        return cls(ConditionKind(text))

    def format(self) -> str:
        if self.kind is ConditionKind.LEXICON:
            return f"lexicon:{self.lexicon}"
        return self.kind.value


UNCONDITIONAL = Condition(ConditionKind.UNCONDITIONAL)


@dataclass(frozen=True)
class SubstitutionRule:
    """One rewrite: ``pattern`` tokens become ``replacement`` tokens."""

    id: str
    family: RuleFamily
    pattern: tuple[str, ...]
    replacement: tuple[str, ...]
    condition: Condition = UNCONDITIONAL

    @property
    def pattern_codepoints(self) -> int:
        return sum(len(s) for s in self.pattern)

    @property
    def replacement_codepoints(self) -> int:
        return sum(len(s) for s in self.replacement)


@dataclass(frozen=True)
class RuleSet:
    """Ordered rules plus the lexicons their conditions may reference."""

    rules: tuple[SubstitutionRule, ...]
    direction_label: str = ""
    lexicons: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    @property
    def families(self) -> frozenset[RuleFamily]:
        return frozenset(r.family for r in self.rules)


@dataclass(frozen=True)
class RuleConfig:
    """Which rule families participate in a pass."""

    enabled_families: frozenset[RuleFamily]

    @classmethod
    def all_families(cls) -> "RuleConfig":
        return cls(frozenset(RuleFamily))

    @classmethod
    def none(cls) -> "RuleConfig":
        return cls(frozenset())

    @classmethod
    def of(cls, *families: RuleFamily | str) -> "RuleConfig":
        resolved = frozenset(
            f if isinstance(f, RuleFamily) else RuleFamily(f) for f in families
        )
        return cls(resolved)

    def __contains__(self, family: RuleFamily) -> bool:
        return family in self.enabled_families


@dataclass(frozen=True)
class TransformResult:
    """Output sequence plus an exact replay trace of what fired where."""

    output: PhonemeSequence
    trace: tuple[tuple[int, str], ...]
    count_by_family: Mapping[RuleFamily, int]

    @property
    def n_total(self) -> int:
        return len(self.trace)


@dataclass(frozen=True)
class ApplicableCounts:
    """How many rule applications a full pass performs."""

    n_total: int
    by_family: Mapping[RuleFamily, int]


def _window_span(spans: Sequence[WordSpan], start: int, end: int) -> WordSpan | None:
    for span in spans:
        if span.start <= start and end <= span.end:
            return span
    return None


def _condition_holds(
    rule: SubstitutionRule,
    tokens: Sequence[Token],
    start: int,
    end: int,
    ruleset: RuleSet,
    word_spans: Sequence[WordSpan] | None,
) -> bool:
    kind = rule.condition.kind
    if kind is ConditionKind.UNCONDITIONAL:
        return True
    if kind is ConditionKind.POST_VOCALIC_CODA:
        return (
            context_of(tokens, start).is_post_vocalic
            and context_of(tokens, end - 1).is_coda
        )
    if kind is ConditionKind.INTERVOCALIC:
        return (
            context_of(tokens, start).is_post_vocalic
            and context_of(tokens, end - 1).is_pre_vocalic
        )
    if kind is ConditionKind.LEXICON:
        if word_spans is None:
            raise MissingWordSpansError(
                f"rule {rule.id!r} is lexicon-gated but the sequence has no word spans"
            )
        span = _window_span(word_spans, start, end)
        if span is None:
            return False
        words = ruleset.lexicons.get(rule.condition.lexicon or "")
        return words is not None and span.word.casefold() in words
    raise AssertionError(f"unhandled condition kind {kind!r}")


def apply_rules(
    seq: PhonemeSequence,
    ruleset: RuleSet,
    config: RuleConfig | None = None,
    inventory: PhonemeInventory | None = None,
) -> TransformResult:
    """One deterministic left-to-right pass of the enabled rules over ``seq``.

    At each position the first enabled rule whose pattern matches the
    upcoming tokens and whose condition holds (evaluated on the working,
    partially rewritten sequence) fires; the scan resumes after the
    replaced window.  Marks and boundaries sit between pattern positions,
    so any mark inside a multi-token window blocks the match.
    """
    cfg = config if config is not None else RuleConfig.all_families()
    inv = inventory if inventory is not None else default_inventory()
    active = [r for r in ruleset.rules if r.family in cfg.enabled_families]
    tokens = list(seq.tokens)
    trace: list[tuple[int, str]] = []
    counts: dict[RuleFamily, int] = {f: 0 for f in RuleFamily}

    i = 0
    n = len(tokens)
    while i < n:
        fired = None
        for rule in active:
            m = len(rule.pattern)
            if i + m > n:
                continue
            if any(tokens[i + j].symbol != rule.pattern[j] for j in range(m)):
                continue
            if _condition_holds(rule, tokens, i, i + m, ruleset, seq.word_spans):
                fired = rule
                break
        if fired is None:
            i += 1
            continue
        for j, symbol in enumerate(fired.replacement):
            tokens[i + j] = Token(symbol, inv.classify(symbol))
        trace.append((i, fired.id))
        counts[fired.family] += 1
        i += len(fired.pattern)

    return TransformResult(
        output=PhonemeSequence(tuple(tokens), seq.word_spans),
        trace=tuple(trace),
        count_by_family=counts,
    )


def count_applicable(
    seq: PhonemeSequence,
    ruleset: RuleSet,
    config: RuleConfig | None = None,
    inventory: PhonemeInventory | None = None,
) -> ApplicableCounts:
    """Count applications a full pass would perform, without keeping output."""
    result = apply_rules(seq, ruleset, config, inventory)
    return ApplicableCounts(result.n_total, result.count_by_family)


def validate_ruleset(
    ruleset: RuleSet, inventory: PhonemeInventory | None = None
) -> list[str]:
    """Return every violation found; an empty list means the ruleset is sound.

    Checks: unique ids, non-empty patterns, token- and codepoint-length
    preservation, symbols known to the inventory, lexicon references
    resolvable, and pairwise disjoint pattern alphabets (so rule order
    never silently shadows a distinct rule's match).
    """
    inv = inventory if inventory is not None else default_inventory()
    violations: list[str] = []
    seen_ids: set[str] = set()
    for rule in ruleset.rules:
        if rule.id in seen_ids:
            violations.append(f"duplicate rule id {rule.id!r}")
        seen_ids.add(rule.id)
        if not rule.pattern:
            violations.append(f"rule {rule.id!r}: empty pattern")
            continue
        if len(rule.pattern) != len(rule.replacement):
            violations.append(
                f"rule {rule.id!r}: pattern has {len(rule.pattern)} tokens but "
                f"replacement has {len(rule.replacement)}"
            )
        if rule.pattern_codepoints != rule.replacement_codepoints:
            violations.append(
                f"rule {rule.id!r}: pattern spans {rule.pattern_codepoints} codepoints "
                f"but replacement spans {rule.replacement_codepoints}"
            )
        for symbol in rule.pattern:
            if symbol not in inv:
                violations.append(f"rule {rule.id!r}: pattern symbol {symbol!r} not in inventory")
        for symbol in rule.replacement:
            if symbol not in inv:
                violations.append(
                    f"rule {rule.id!r}: replacement symbol {symbol!r} not in inventory"
                )
        if rule.condition.kind is ConditionKind.LEXICON:
            name = rule.condition.lexicon or ""
            if name not in ruleset.lexicons:
                violations.append(f"rule {rule.id!r}: unknown lexicon {name!r}")
    for a_idx, a in enumerate(ruleset.rules):
        for b in ruleset.rules[a_idx + 1 :]:
            overlap = set(a.pattern) & set(b.pattern)
            if overlap:
                violations.append(
                    f"rules {a.id!r} and {b.id!r} share pattern symbols "
                    f"{sorted(overlap)!r}"
                )
    return violations


def load_lexicon(text: str) -> frozenset[str]:
    """One word per line, casefolded; blanks and ``#`` comments skipped."""
    words = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        words.add(line.casefold())
    return frozenset(words)


def parse_ruleset_file(path: str | Path) -> RuleSet:
    """Parse a rules TSV without validating it.

    Record lines are ``id<TAB>family<TAB>pattern<TAB>replacement<TAB>condition``
    with space-separated symbols inside pattern/replacement.  Pragmas:
    ``#: direction = LABEL`` and ``#: lexicon NAME = relative/path.txt``
    (resolved against the ruleset file's directory).
    """
    path = Path(path)
    rules: list[SubstitutionRule] = []
    direction = ""
    lexicons: dict[str, frozenset[str]] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#:"):
            body = line[2:].strip()
            key, _, value = body.partition("=")
            key = key.strip()
            value = value.strip()
            if key == "direction":
                direction = value
            elif key.startswith("lexicon "):
                name = key[len("lexicon ") :].strip()
                lexicons[name] = load_lexicon(
                    (path.parent / value).read_text(encoding="utf-8")
                )
            else:
                raise RulesetError([f"{path.name}:{lineno}: unknown pragma {key!r}"])
            continue
        if not line or line.startswith("#"):
            continue
        fields = raw.rstrip("\n").split("\t")
        if len(fields) != 5:
            raise RulesetError(
                [f"{path.name}:{lineno}: expected 5 tab-separated fields, got {len(fields)}"]
            )
        rule_id, family_label, pattern_text, replacement_text, condition_text = fields
        try:
            family = RuleFamily(family_label.strip())
        except ValueError:
            raise RulesetError(
                [f"{path.name}:{lineno}: unknown family {family_label.strip()!r}"]
            ) from None
        try:
            condition = Condition.parse(condition_text)
        except ValueError as exc:
            raise RulesetError([f"{path.name}:{lineno}: {exc}"]) from None
        rules.append(
            SubstitutionRule(
                id=rule_id.strip(),
                family=family,
                pattern=tuple(pattern_text.split()),
                replacement=tuple(replacement_text.split()),
                condition=condition,
            )
        )
    return RuleSet(tuple(rules), direction_label=direction, lexicons=lexicons)


def load_ruleset(
    path: str | Path, inventory: PhonemeInventory | None = None
) -> RuleSet:
    """Parse and validate a ruleset file; raises RulesetError on any violation."""
    ruleset = parse_ruleset_file(path)
    violations = validate_ruleset(ruleset, inventory)
    if violations:
        raise RulesetError(violations)
    return ruleset


@functools.lru_cache(maxsize=1)
def default_ruleset() -> RuleSet:
    """The shipped North American to British rule list."""
    return load_ruleset(_DATA_DIR / "rules_na_to_b.tsv")


@functools.lru_cache(maxsize=1)
def bath_gated_ruleset() -> RuleSet:
    """Variant whose trap-vowel backing only fires inside listed words."""
    return load_ruleset(_DATA_DIR / "rules_na_to_b_bath.tsv")
