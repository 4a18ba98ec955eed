"""Manifest-driven evaluation harness.

Transforms utterance manifests with a rule configuration, scores recognized
output into per-condition reports (shift rate, classifier probabilities,
speaker similarity, naturalness), expands ablation grids, and emits the
report tables.  Bad rows are quarantined and reported, never fatal, unless
a whole condition becomes unscorable.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .inventory import (
    PhonemeInventory,
    TokenizeError,
    align_word_spans,
    default_inventory,
    detokenize,
    tokenize,
)
from .manifest import ManifestRow, read_embeddings, read_manifest, read_references
from .metrics import (
    Accent,
    cosine_similarity,
    mean_target_prob,
    mean_utmos,
    psr_from_totals,
    utterance_changes_kde,
)
from .rules import (
    ConditionKind,
    RuleConfig,
    RuleFamily,
    RuleSet,
    apply_rules,
    count_applicable,
    default_ruleset,
    load_ruleset,
)

log = logging.getLogger(__name__)

ALL_FAMILIES = frozenset(RuleFamily)
FAMILY_ORDER = (RuleFamily.FLAPPING, RuleFamily.RHOTICITY, RuleFamily.VOWEL)

COUNT_SCOPES = ("full", "enabled")


class HarnessError(ValueError):
    """Condition or suite cannot produce a report."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One synthesis/evaluation condition."""

    name: str
    families: frozenset[RuleFamily]
    voice_label: str = ""
    manifest: str | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise HarnessError("condition name must be non-empty")


@dataclass(frozen=True)
class RowFailure:
    """One quarantined row: which stage rejected it and why."""

    utt_id: str
    stage: str
    reason: str


@dataclass(frozen=True)
class RowDetail:
    """Per-utterance counts feeding the change-distribution outputs."""

    utt_id: str
    n1: int
    n2: int | None
    n1_by_family: Mapping[str, int]
    n2_by_family: Mapping[str, int] | None


@dataclass(frozen=True)
class ConditionReport:
    """Scored outcome of one condition over one manifest."""

    condition: str
    families: frozenset[RuleFamily]
    n_rows: int
    n_missing_recognition: int
    n1_total: int
    n2_total: int
    psr: float
    n1_by_family: Mapping[str, int]
    n2_by_family: Mapping[str, int]
    prob_b: float | None = None
    prob_na: float | None = None
    sim_b: float | None = None
    sim_na: float | None = None
    utmos: float | None = None
    details: tuple[RowDetail, ...] = ()
    failures: tuple[RowFailure, ...] = ()

    def __post_init__(self) -> None:
        if self.n_rows <= 0:
            raise HarnessError(f"{self.condition}: report covers no rows")
        if self.psr < 0.0:
            raise HarnessError(f"{self.condition}: negative shift rate")
        for label, value, lo, hi in (
            ("prob_b", self.prob_b, 0.0, 100.0),
            ("prob_na", self.prob_na, 0.0, 100.0),
            ("sim_b", self.sim_b, -1.0, 1.0),
            ("sim_na", self.sim_na, -1.0, 1.0),
            ("utmos", self.utmos, 1.0, 5.0),
        ):
            if value is not None and not (lo <= value <= hi):
                raise HarnessError(
                    f"{self.condition}: {label}={value!r} outside [{lo}, {hi}]"
                )

    def psr_for_family(self, family: RuleFamily) -> float | None:
        n1 = self.n1_by_family.get(family.value, 0)
        if n1 == 0:
            return None
        return self.n2_by_family.get(family.value, 0) / n1


def _resolve_families(families: frozenset[RuleFamily] | None) -> frozenset[RuleFamily]:
    return ALL_FAMILIES if families is None else families


def _count_config(
    enabled: frozenset[RuleFamily], count_scope: str
) -> RuleConfig:
    if count_scope not in COUNT_SCOPES:
        raise HarnessError(f"count_scope must be one of {COUNT_SCOPES}, got {count_scope!r}")
    return RuleConfig.all_families() if count_scope == "full" else RuleConfig(enabled)


def _needs_word_spans(ruleset: RuleSet, configs: Sequence[RuleConfig]) -> bool:
    wanted = frozenset().union(*(c.enabled_families for c in configs)) if configs else frozenset()
    return any(
        r.condition.kind is ConditionKind.LEXICON and r.family in wanted
        for r in ruleset.rules
    )


def _family_counts(by_family: Mapping[RuleFamily, int]) -> dict[str, int]:
    return {f.value: by_family.get(f, 0) for f in FAMILY_ORDER}


def transform_manifest(
    rows: Sequence[ManifestRow],
    ruleset: RuleSet,
    families: frozenset[RuleFamily] | None = None,
    count_scope: str = "full",
    inventory: PhonemeInventory | None = None,
) -> tuple[list[ManifestRow], list[RowFailure]]:
    """Apply the enabled rule families to every row's source IPA.

    Fills ipa_transformed, n1, and n1_by_family (counted under
    ``count_scope``).  Rows that fail to tokenize, carry a duration track
    of the wrong length, or cannot align word spans are quarantined:
    dropped from the output and returned as failures.
    """
    inv = inventory if inventory is not None else default_inventory()
    enabled = _resolve_families(families)
    apply_config = RuleConfig(enabled)
    count_config = _count_config(enabled, count_scope)
    want_spans = _needs_word_spans(ruleset, [apply_config, count_config])

    out: list[ManifestRow] = []
    failures: list[RowFailure] = []
    for row in rows:
        try:
            seq = tokenize(row.ipa_source, inv)
        except TokenizeError as exc:
            failures.append(RowFailure(row.utt_id, "tokenize", str(exc)))
            continue
        if row.durations is not None and len(row.durations) != seq.non_boundary_count:
            failures.append(
                RowFailure(
                    row.utt_id,
                    "durations",
                    f"{len(row.durations)} durations for "
                    f"{seq.non_boundary_count} non-boundary tokens",
                )
            )
            continue
        if want_spans:
            try:
                seq = align_word_spans(seq, row.text)
            except ValueError as exc:
                failures.append(RowFailure(row.utt_id, "align", str(exc)))
                continue
        result = apply_rules(seq, ruleset, apply_config, inv)
        counted = count_applicable(seq, ruleset, count_config, inv)
        out.append(
            dataclasses.replace(
                row,
                ipa_transformed=detokenize(result.output),
                n1=counted.n_total,
                n1_by_family=_family_counts(counted.by_family),
            )
        )
    for failure in failures:
        log.warning("quarantined %s at %s: %s", failure.utt_id, failure.stage, failure.reason)
    return out, failures


def score_manifest(
    rows: Sequence[ManifestRow],
    ruleset: RuleSet,
    *,
    condition: str,
    families: frozenset[RuleFamily] | None = None,
    count_scope: str = "full",
    inventory: PhonemeInventory | None = None,
    references: Mapping[str, np.ndarray] | None = None,
    embeddings: Mapping[str, Sequence[float]] | None = None,
) -> ConditionReport:
    """Score one condition's manifest into a report.

    The shift rate is the ratio of corpus totals: surviving rule sites in
    the recognized transcripts over applicable sites in the sources.  Rows
    without recognized_ipa are excluded from both totals (and counted in
    n_missing_recognition); rows that fail to tokenize are quarantined.
    """
    inv = inventory if inventory is not None else default_inventory()
    enabled = _resolve_families(families)
    count_config = _count_config(enabled, count_scope)
    want_spans = _needs_word_spans(ruleset, [count_config])

    details: list[RowDetail] = []
    failures: list[RowFailure] = []
    n_missing = 0
    n1_total = 0
    n2_total = 0
    n1_fam = {f.value: 0 for f in FAMILY_ORDER}
    n2_fam = {f.value: 0 for f in FAMILY_ORDER}
    logit_rows: list[tuple[float, float, float]] = []
    sims_b: list[float] = []
    sims_na: list[float] = []
    utmos_scores: list[float] = []

    for row in rows:
        if row.n1 is not None and row.n1_by_family is not None:
            n1 = row.n1
            n1_by_family = _family_counts(
                {RuleFamily(k): v for k, v in row.n1_by_family.items()}
            )
        else:
            try:
                seq = tokenize(row.ipa_source, inv)
                if want_spans:
                    seq = align_word_spans(seq, row.text)
            except (TokenizeError, ValueError) as exc:
                failures.append(RowFailure(row.utt_id, "source", str(exc)))
                continue
            counted = count_applicable(seq, ruleset, count_config, inv)
            n1 = counted.n_total
            n1_by_family = _family_counts(counted.by_family)

        if row.recognized_ipa is None:
            n_missing += 1
            detail = RowDetail(row.utt_id, n1, None, n1_by_family, None)
        else:
            try:
                rec = tokenize(row.recognized_ipa, inv)
                if want_spans:
                    rec = align_word_spans(rec, row.text)
            except (TokenizeError, ValueError) as exc:
                failures.append(RowFailure(row.utt_id, "recognized", str(exc)))
                continue
            counted2 = count_applicable(rec, ruleset, count_config, inv)
            n2_by_family = _family_counts(counted2.by_family)
            detail = RowDetail(row.utt_id, n1, counted2.n_total, n1_by_family, n2_by_family)
            n1_total += n1
            n2_total += counted2.n_total
            for f in FAMILY_ORDER:
                n1_fam[f.value] += n1_by_family[f.value]
                n2_fam[f.value] += n2_by_family[f.value]
        details.append(detail)

        if row.logits is not None:
            logit_rows.append(row.logits)
        if row.utmos is not None:
            utmos_scores.append(row.utmos)
        if references is not None and embeddings is not None:
            vec = embeddings.get(row.embedding_key)
            if vec is not None:
                sims_b.append(cosine_similarity(vec, references["b"]))
                sims_na.append(cosine_similarity(vec, references["na"]))

    if not details:
        raise HarnessError(f"{condition}: every row was quarantined")
    if n_missing == len(details):
        raise HarnessError(f"{condition}: no row carries recognized_ipa")
    if n_missing:
        log.warning("%s: %d rows lack recognized_ipa; excluded from shift totals",
                    condition, n_missing)

    return ConditionReport(
        condition=condition,
        families=enabled,
        n_rows=len(details),
        n_missing_recognition=n_missing,
        n1_total=n1_total,
        n2_total=n2_total,
        psr=psr_from_totals(n1_total, n2_total),
        n1_by_family=n1_fam,
        n2_by_family=n2_fam,
        prob_b=mean_target_prob(logit_rows, Accent.BRITISH_ISLES) if logit_rows else None,
        prob_na=mean_target_prob(logit_rows, Accent.NORTH_AMERICAN) if logit_rows else None,
        sim_b=float(np.mean(sims_b)) if sims_b else None,
        sim_na=float(np.mean(sims_na)) if sims_na else None,
        utmos=mean_utmos(utmos_scores) if utmos_scores else None,
        details=tuple(details),
        failures=tuple(failures),
    )


def ablation_suite(base: ExperimentConfig) -> tuple[ExperimentConfig, ...]:
    """The eight-condition family grid: baseline, each family alone, all,
    and all-minus-one."""
    F, R, V = RuleFamily.FLAPPING, RuleFamily.RHOTICITY, RuleFamily.VOWEL

    def member(name: str, fams: set[RuleFamily]) -> ExperimentConfig:
        return dataclasses.replace(base, name=name, families=frozenset(fams))

    return (
        dataclasses.replace(base, families=frozenset()),
        member("+ Flapping", {F}),
        member("+ Rhoticity", {R}),
        member("+ Vowel", {V}),
        member("+ All", {F, R, V}),
        member("- Flapping", {R, V}),
        member("- Rhoticity", {F, V}),
        member("- Vowel", {F, R}),
    )


def slugify(name: str) -> str:
    """File-system-safe condition name; + and - read as words."""
    text = name.casefold().replace("+", " plus ").replace("-", " minus ")
    parts = [p for p in re.split(r"[^a-z0-9]+", text) if p]
    if not parts:
        raise HarnessError(f"condition name {name!r} has no usable characters")
    return "-".join(parts)


def _fmt(value: float | None, spec: str) -> str:
    return "-" if value is None else format(value, spec)


def _family_label(family: RuleFamily | None) -> str:
    return "all" if family is None else family.value


def emit_reports(
    results: Sequence[ConditionReport],
    out_dir: str | Path,
    grid_points: int = 201,
) -> dict[str, Path]:
    """Write the per-condition tables, per-utterance counts, change-count
    density curves, and a plain-text summary.  Output is byte-stable for a
    given input: conditions sort by name, floats use fixed formats.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ordered = sorted(results, key=lambda r: r.condition)
    names = [r.condition for r in ordered]
    if len(set(names)) != len(names):
        raise HarnessError(f"duplicate condition names: {names}")

    paths = {
        "table1": out_dir / "table1.tsv",
        "table2": out_dir / "table2.tsv",
        "changes": out_dir / "changes.tsv",
        "kde": out_dir / "kde.tsv",
        "summary": out_dir / "summary.txt",
    }

    lines = ["condition\tpsr\tprob_b\tprob_na\tsim_b\tsim_na\tutmos"]
    for r in ordered:
        lines.append(
            "\t".join(
                (
                    r.condition,
                    f"{r.psr:.3f}",
                    _fmt(r.prob_b, ".1f"),
                    _fmt(r.prob_na, ".1f"),
                    _fmt(r.sim_b, ".2f"),
                    _fmt(r.sim_na, ".2f"),
                    _fmt(r.utmos, ".2f"),
                )
            )
        )
    paths["table1"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["condition\tfamily\tn1\tn2\tpsr"]
    for r in ordered:
        for family in FAMILY_ORDER:
            lines.append(
                "\t".join(
                    (
                        r.condition,
                        family.value,
                        str(r.n1_by_family[family.value]),
                        str(r.n2_by_family[family.value]),
                        _fmt(r.psr_for_family(family), ".3f"),
                    )
                )
            )
        lines.append(
            "\t".join(
                (r.condition, "all", str(r.n1_total), str(r.n2_total), f"{r.psr:.3f}")
            )
        )
    paths["table2"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["condition\tutt_id\tn1\tn2"]
    for r in ordered:
        for d in sorted(r.details, key=lambda d: d.utt_id):
            lines.append(
                "\t".join(
                    (
                        r.condition,
                        d.utt_id,
                        str(d.n1),
                        "-" if d.n2 is None else str(d.n2),
                    )
                )
            )
    paths["changes"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["condition\tfamily\tbandwidth\tx\tdensity"]
    for r in ordered:
        scored = [d for d in r.details if d.n2_by_family is not None]
        for family in (*FAMILY_ORDER, None):
            if family is None:
                values = [d.n1 - d.n2 for d in scored if d.n2 is not None]
            else:
                values = [
                    d.n1_by_family[family.value] - d.n2_by_family[family.value]
                    for d in scored
                ]
            if not values:
                continue
            curve = utterance_changes_kde(values, grid_points)
            label = _family_label(family)
            for x, y in zip(curve.grid, curve.density):
                lines.append(
                    "\t".join(
                        (
                            r.condition,
                            label,
                            format(curve.bandwidth, ".10g"),
                            format(float(x), ".10g"),
                            format(float(y), ".10g"),
                        )
                    )
                )
    paths["kde"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = []
    for r in ordered:
        fams = ", ".join(f.value for f in FAMILY_ORDER if f in r.families) or "none"
        lines.append(f"{r.condition}")
        lines.append(f"  families enabled: {fams}")
        lines.append(
            f"  rows: {r.n_rows}  missing recognition: {r.n_missing_recognition}  "
            f"quarantined: {len(r.failures)}"
        )
        lines.append(f"  shift sites: n1={r.n1_total} n2={r.n2_total} psr={r.psr:.3f}")
        lines.append(
            "  probs: b=" + _fmt(r.prob_b, ".1f") + "% na=" + _fmt(r.prob_na, ".1f") + "%"
            + "  sims: b=" + _fmt(r.sim_b, ".2f") + " na=" + _fmt(r.sim_na, ".2f")
            + "  utmos: " + _fmt(r.utmos, ".2f")
        )
        for failure in r.failures:
            lines.append(f"  dropped {failure.utt_id} ({failure.stage}): {failure.reason}")
        lines.append("")
    paths["summary"].write_text("\n".join(lines), encoding="utf-8")

    return paths


def _parse_member_families(raw: Any, where: str) -> frozenset[RuleFamily]:
    if not isinstance(raw, list):
        raise HarnessError(f"{where}: families must be a list of family names")
    try:
        return frozenset(RuleFamily(v) for v in raw)
    except ValueError as exc:
        raise HarnessError(f"{where}: {exc}") from None


def load_suite_config(path: str | Path) -> dict[str, Any]:
    """Read a suite config JSON and resolve its paths against the file's
    directory.

    Keys: ruleset, inventory, references, embeddings (paths or null),
    count_scope, grid_points, voice_label, and either members (a list of
    {name, families, manifest}) or ablation ({baseline_name,
    manifest_pattern} with a {slug} placeholder).
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise HarnessError(f"{path}: suite config must be a JSON object")
    base_dir = path.parent

    def resolve(key: str) -> Path | None:
        value = raw.get(key)
        return None if value is None else base_dir / value

    members: list[ExperimentConfig]
    voice_label = raw.get("voice_label", "")
    if "members" in raw:
        members = []
        for i, m in enumerate(raw["members"]):
            where = f"{path}: members[{i}]"
            if not isinstance(m, dict) or "name" not in m or "manifest" not in m:
                raise HarnessError(f"{where}: needs name, families, manifest")
            members.append(
                ExperimentConfig(
                    name=m["name"],
                    families=_parse_member_families(m.get("families", []), where),
                    voice_label=m.get("voice_label", voice_label),
                    manifest=str(base_dir / m["manifest"]),
                )
            )
    elif "ablation" in raw:
        ab = raw["ablation"]
        if not isinstance(ab, dict) or "manifest_pattern" not in ab:
            raise HarnessError(f"{path}: ablation needs a manifest_pattern")
        base = ExperimentConfig(
            name=ab.get("baseline_name", "baseline"),
            families=frozenset(),
            voice_label=voice_label,
        )
        members = [
            dataclasses.replace(
                cfg,
                manifest=str(base_dir / ab["manifest_pattern"].format(slug=slugify(cfg.name))),
            )
            for cfg in ablation_suite(base)
        ]
    else:
        raise HarnessError(f"{path}: config needs members or ablation")

    return {
        "members": members,
        "ruleset": resolve("ruleset"),
        "inventory": resolve("inventory"),
        "references": resolve("references"),
        "embeddings": resolve("embeddings"),
        "count_scope": raw.get("count_scope", "full"),
        "grid_points": int(raw.get("grid_points", 201)),
    }


def run_suite(config_path: str | Path, out_dir: str | Path) -> list[ConditionReport]:
    """Score every condition in a suite config and write the report files."""
    cfg = load_suite_config(config_path)
    ruleset = load_ruleset(cfg["ruleset"]) if cfg["ruleset"] else default_ruleset()
    inventory = None
    if cfg["inventory"]:
        from .inventory import load_inventory_file

        inventory = load_inventory_file(cfg["inventory"])
    references = read_references(cfg["references"]) if cfg["references"] else None
    embeddings = read_embeddings(cfg["embeddings"]) if cfg["embeddings"] else None

    reports = []
    for member in cfg["members"]:
        if member.manifest is None:
            raise HarnessError(f"{member.name}: no manifest path")
        rows = read_manifest(member.manifest)
        reports.append(
            score_manifest(
                rows,
                ruleset,
                condition=member.name,
                families=member.families,
                count_scope=cfg["count_scope"],
                inventory=inventory,
                references=references,
                embeddings=embeddings,
            )
        )
    emit_reports(reports, out_dir, grid_points=cfg["grid_points"])
    return reports
