"""Deterministic accent-shift rewriting over IPA phoneme sequences,
shift-rate metrics, and a manifest-driven evaluation harness."""

from .inventory import (
    InventoryError,
    PhonemeContext,
    PhonemeInventory,
    PhonemeSequence,
    SymbolClass,
    Token,
    TokenizeError,
    WordSpan,
    align_word_spans,
    context_at,
    default_inventory,
    detokenize,
    load_inventory,
    load_inventory_file,
    tokenize,
)
from .manifest import (
    ManifestError,
    ManifestRow,
    read_embeddings,
    read_manifest,
    read_references,
    row_from_dict,
    row_to_dict,
    write_embeddings,
    write_manifest,
)
from .metrics import (
    Accent,
    KdeCurve,
    PsrCounts,
    corpus_psr,
    cosine_similarity,
    group_reference,
    mean_target_prob,
    mean_utmos,
    psr_from_totals,
    silverman_bandwidth,
    softmax,
    utterance_changes_kde,
)
from .rules import (
    ApplicableCounts,
    Condition,
    ConditionKind,
    MissingWordSpansError,
    RuleConfig,
    RuleFamily,
    RuleSet,
    RulesetError,
    SubstitutionRule,
    TransformResult,
    apply_rules,
    bath_gated_ruleset,
    count_applicable,
    default_ruleset,
    load_ruleset,
    validate_ruleset,
)
from .harness import (
    ConditionReport,
    ExperimentConfig,
    HarnessError,
    RowDetail,
    RowFailure,
    ablation_suite,
    emit_reports,
    run_suite,
    score_manifest,
    slugify,
    transform_manifest,
)

__version__ = "0.1.0"

__all__ = [
    "Accent",
    "ApplicableCounts",
    "Condition",
    "ConditionKind",
    "ConditionReport",
    "ExperimentConfig",
    "HarnessError",
    "InventoryError",
    "KdeCurve",
    "ManifestError",
    "ManifestRow",
    "MissingWordSpansError",
    "PhonemeContext",
    "PhonemeInventory",
    "PhonemeSequence",
    "PsrCounts",
    "RowDetail",
    "RowFailure",
    "RuleConfig",
    "RuleFamily",
    "RuleSet",
    "RulesetError",
    "SubstitutionRule",
    "SymbolClass",
    "Token",
    "TokenizeError",
    "TransformResult",
    "WordSpan",
    "ablation_suite",
    "align_word_spans",
    "apply_rules",
    "bath_gated_ruleset",
    "context_at",
    "corpus_psr",
    "cosine_similarity",
    "count_applicable",
    "default_inventory",
    "default_ruleset",
    "detokenize",
    "emit_reports",
    "group_reference",
    "load_inventory",
    "load_inventory_file",
    "load_ruleset",
    "mean_target_prob",
    "mean_utmos",
    "psr_from_totals",
    "read_embeddings",
    "read_manifest",
    "read_references",
    "row_from_dict",
    "row_to_dict",
    "run_suite",
    "score_manifest",
    "silverman_bandwidth",
    "slugify",
    "softmax",
    "tokenize",
    "transform_manifest",
    "utterance_changes_kde",
    "validate_ruleset",
    "write_embeddings",
    "write_manifest",
]
