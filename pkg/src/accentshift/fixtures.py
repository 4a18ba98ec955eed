"""Deterministic demo corpus and suite builder.

Thirteen short utterances with exactly 30 rule-applicable sites give the
ablation grid known corpus totals.  Simulated recognition starts from the
fully rewritten form and reverts a seeded subset of sites back to their
source form, so each condition's surviving-site count (and therefore its
shift rate) is exact by construction.
"""

from __future__ import annotations

import json
import random
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .harness import ExperimentConfig, ablation_suite, slugify
from .inventory import PhonemeSequence, Token, default_inventory, detokenize, tokenize
from .manifest import ManifestRow, write_embeddings, write_manifest
from .rules import RuleConfig, TransformResult, apply_rules, count_applicable, default_ruleset

# (utt_id, text, source IPA); 30 applicable sites in total.
DEMO_UTTERANCES: tuple[tuple[str, str, str], ...] = (
    ("utt-001", "the water", "ðə waɾɚ"),
    ("utt-002", "my car", "maɪ kaɹ"),
    ("utt-003", "bath path", "bæθ pæθ"),
    ("utt-004", "goat boat", "goʊt boʊt"),
    ("utt-005", "the letter", "ðə lɛɾɚ"),
    ("utt-006", "her bird", "hɝ bɝd"),
    ("utt-007", "far star", "fɑɹ stɑɹ"),
    ("utt-008", "red car", "ɹɛd kaɹ"),
    ("utt-009", "water bottle", "wɑɾɚ bɑɾəl"),
    ("utt-010", "pin", "pɪn"),
    ("utt-011", "more cars", "mɔɹ kɑɹz"),
    ("utt-012", "better butter", "bɛɾɚ bʌɾɚ"),
    ("utt-013", "the natter", "ðə næɾɚ"),
)

DEMO_VOICE = "demo-voice"

# Sites left in source form per condition (of the 30 total); lower means
# the simulated voice drifted further toward the target accent.
REVERT_TARGETS: dict[str, int] = {
    "baseline": 24,
    "+ Flapping": 23,
    "+ Rhoticity": 22,
    "+ Vowel": 20,
    "+ All": 18,
    "- Flapping": 19,
    "- Rhoticity": 20,
    "- Vowel": 21,
}

REFERENCE_NA = (0.9, 0.1, 0.3, 0.0, 0.5, 0.2, 0.0, 0.4)
REFERENCE_B = (0.1, 0.8, 0.2, 0.5, 0.0, 0.6, 0.3, 0.0)


def demo_rows() -> list[ManifestRow]:
    """Source rows only: id, text, voice, IPA, and a duration per token."""
    rows = []
    for utt_id, text, ipa in DEMO_UTTERANCES:
        n = tokenize(ipa).non_boundary_count
        durations = tuple(round(5.0 + 0.25 * (i % 4), 2) for i in range(n))
        rows.append(
            ManifestRow(
                utt_id=utt_id,
                text=text,
                voice_label=DEMO_VOICE,
                ipa_source=ipa,
                durations=durations,
            )
        )
    return rows


def _revert(tokens: list[Token], result_trace_entry: tuple[int, str], ruleset) -> None:
    index, rule_id = result_trace_entry
    rule = next(r for r in ruleset.rules if r.id == rule_id)
    inv = default_inventory()
    for j, symbol in enumerate(rule.pattern):
        tokens[index + j] = Token(symbol, inv.classify(symbol))


def simulate_recognition(
    full_results: Sequence[TransformResult],
    revert_count: int,
    rng: random.Random,
    ruleset,
) -> list[PhonemeSequence]:
    """Recognized sequences with exactly ``revert_count`` source-form sites.

    Starts from the fully rewritten output and undoes a sampled subset of
    trace entries, so counting applicable sites over the result recovers
    ``revert_count`` exactly.
    """
    entries = [
        (row_idx, trace_idx)
        for row_idx, result in enumerate(full_results)
        for trace_idx in range(result.n_total)
    ]
    if revert_count > len(entries):
        raise ValueError(f"cannot revert {revert_count} of {len(entries)} sites")
    chosen = set(rng.sample(range(len(entries)), revert_count))
    per_row: dict[int, list[int]] = {}
    for pos in chosen:
        row_idx, trace_idx = entries[pos]
        per_row.setdefault(row_idx, []).append(trace_idx)

    recognized = []
    for row_idx, result in enumerate(full_results):
        tokens = list(result.output.tokens)
        reverts = per_row.get(row_idx, [])
        for trace_idx in reverts:
            _revert(tokens, result.trace[trace_idx], ruleset)
        seq = PhonemeSequence(tuple(tokens), result.output.word_spans)
        got = count_applicable(seq, ruleset).n_total
        if got != len(reverts):
            raise AssertionError(
                f"row {row_idx}: reverted {len(reverts)} sites but {got} are applicable"
            )
        recognized.append(seq)
    return recognized


def _condition_embedding(
    rng: random.Random, source_share: float
) -> tuple[float, ...]:
    w = 1.0 - source_share
    return tuple(
        round((1.0 - w) * na + w * b + rng.uniform(-0.02, 0.02), 6)
        for na, b in zip(REFERENCE_NA, REFERENCE_B)
    )


def write_demo_suite(out_dir: str | Path, seed: int = 20260818) -> Path:
    """Write per-condition manifests, embeddings, references, and a suite
    config under ``out_dir``; returns the config path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ruleset = default_ruleset()
    rows = demo_rows()

    sources = [tokenize(r.ipa_source) for r in rows]
    full_results = [apply_rules(seq, ruleset) for seq in sources]
    total_sites = sum(r.n_total for r in full_results)
    if total_sites % 10 != 0:
        raise AssertionError(f"demo corpus has {total_sites} sites, expected a round total")

    embeddings: dict[str, tuple[float, ...]] = {}
    base = ExperimentConfig(name="baseline", families=frozenset(), voice_label=DEMO_VOICE)
    for cfg in ablation_suite(base):
        slug = slugify(cfg.name)
        rng = random.Random(f"{seed}:{cfg.name}")
        target = REVERT_TARGETS[cfg.name]
        recognized = simulate_recognition(full_results, target, rng, ruleset)

        out_rows = []
        for row, seq, rec in zip(rows, sources, recognized):
            applied = apply_rules(seq, ruleset, RuleConfig(cfg.families))
            counted = count_applicable(seq, ruleset)
            row_sites = counted.n_total
            row_reverts = count_applicable(rec, ruleset).n_total
            source_share = row_reverts / row_sites if row_sites else 0.5
            jitter = rng.uniform(-0.05, 0.05)
            ref = f"{slug}/{row.utt_id}"
            embeddings[ref] = _condition_embedding(rng, source_share)
            out_rows.append(
                replace(
                    row,
                    ipa_transformed=detokenize(applied.output),
                    recognized_ipa=detokenize(rec),
                    n1=row_sites,
                    n1_by_family={f.value: counted.by_family.get(f, 0)
                                  for f in sorted(counted.by_family, key=lambda x: x.value)},
                    logits=(
                        round(2.5 * source_share + jitter, 4),
                        round(2.5 * (1.0 - source_share) + jitter, 4),
                        round(0.3 + jitter, 4),
                    ),
                    utmos=round(4.0 + rng.uniform(-0.3, 0.3), 3),
                    embedding_ref=ref,
                )
            )
        write_manifest(out_dir / f"cond-{slug}.jsonl", out_rows)

    write_embeddings(out_dir / "embeddings.jsonl", embeddings)
    (out_dir / "references.json").write_text(
        json.dumps({"na": list(REFERENCE_NA), "b": list(REFERENCE_B)}, indent=2) + "\n",
        encoding="utf-8",
    )
    config = {
        "ruleset": None,
        "inventory": None,
        "voice_label": DEMO_VOICE,
        "count_scope": "full",
        "grid_points": 201,
        "references": "references.json",
        "embeddings": "embeddings.jsonl",
        "ablation": {"baseline_name": "baseline", "manifest_pattern": "cond-{slug}.jsonl"},
    }
    config_path = out_dir / "suite_config.json"
    config_path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return config_path
