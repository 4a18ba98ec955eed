"""Command-line front end.

Subcommands: validate a ruleset, transform or score a manifest, run a
full suite from a config, and turn a per-utterance change table into
density curves.  Exit codes: 0 success, 1 validation failure, 2 I/O
failure, 3 completed with quarantined rows.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import (
    HarnessError,
    emit_reports,
    run_suite,
    score_manifest,
    transform_manifest,
)
from .inventory import InventoryError, TokenizeError, load_inventory_file
from .manifest import (
    ManifestError,
    read_embeddings,
    read_manifest,
    read_references,
    row_to_dict,
    write_manifest,
)
from .metrics import utterance_changes_kde
from .rules import RuleFamily, RulesetError, default_ruleset, load_ruleset, validate_ruleset, parse_ruleset_file

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_PARTIAL = 3


def _parse_families(text: str) -> frozenset[RuleFamily] | None:
    if text == "all":
        return None
    if text == "none":
        return frozenset()
    try:
        return frozenset(RuleFamily(part.strip()) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise RulesetError([str(exc)]) from None


def _load_rules(path: str | None):
    return load_ruleset(path) if path else default_ruleset()


def _load_inventory(path: str | None):
    return load_inventory_file(path) if path else None


def _fmt(value, spec: str) -> str:
    return "-" if value is None else format(value, spec)


def cmd_validate(args: argparse.Namespace) -> int:
    ruleset = parse_ruleset_file(args.ruleset)
    inventory = _load_inventory(args.inventory)
    violations = validate_ruleset(ruleset, inventory)
    if violations:
        for v in violations:
            print(v, file=sys.stderr)
        return EXIT_VALIDATION
    print(f"ok: {len(ruleset)} rules, direction {ruleset.direction_label or '(unset)'}")
    return EXIT_OK


def cmd_transform(args: argparse.Namespace) -> int:
    rows = read_manifest(args.manifest)
    out_rows, failures = transform_manifest(
        rows,
        _load_rules(args.rules),
        families=_parse_families(args.families),
        count_scope=args.count_scope,
        inventory=_load_inventory(args.inventory),
    )
    if args.out:
        write_manifest(args.out, out_rows)
    else:
        for row in out_rows:
            print(json.dumps(row_to_dict(row), ensure_ascii=False))
    for f in failures:
        print(f"dropped {f.utt_id} ({f.stage}): {f.reason}", file=sys.stderr)
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    rows = read_manifest(args.manifest)
    report = score_manifest(
        rows,
        _load_rules(args.rules),
        condition=args.condition,
        families=_parse_families(args.families),
        count_scope=args.count_scope,
        inventory=_load_inventory(args.inventory),
        references=read_references(args.references) if args.references else None,
        embeddings=read_embeddings(args.embeddings) if args.embeddings else None,
    )
    print(f"{report.condition}: psr={report.psr:.3f} "
          f"(n1={report.n1_total} n2={report.n2_total})")
    print(f"  prob_b={_fmt(report.prob_b, '.1f')} prob_na={_fmt(report.prob_na, '.1f')} "
          f"sim_b={_fmt(report.sim_b, '.2f')} sim_na={_fmt(report.sim_na, '.2f')} "
          f"utmos={_fmt(report.utmos, '.2f')}")
    if report.n_missing_recognition:
        print(f"  rows without recognition: {report.n_missing_recognition}", file=sys.stderr)
    for f in report.failures:
        print(f"  dropped {f.utt_id} ({f.stage}): {f.reason}", file=sys.stderr)
    return EXIT_PARTIAL if report.failures else EXIT_OK


def cmd_suite(args: argparse.Namespace) -> int:
    reports = run_suite(args.config, args.out)
    for r in sorted(reports, key=lambda r: r.condition):
        print(f"{r.condition}: psr={r.psr:.3f}")
    if any(r.failures for r in reports):
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_hist(args: argparse.Namespace) -> int:
    lines = Path(args.detail).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split("\t")[:4] != ["condition", "utt_id", "n1", "n2"]:
        raise ManifestError(f"{args.detail}: expected a condition/utt_id/n1/n2 table")
    by_condition: dict[str, list[int]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ManifestError(f"{args.detail}:{lineno}: expected 4 columns")
        condition, _, n1, n2 = fields
        if n2 == "-":
            continue
        by_condition.setdefault(condition, []).append(int(n1) - int(n2))
    if not by_condition:
        raise ManifestError(f"{args.detail}: no scored rows to plot")
    out_lines = ["condition\tbandwidth\tx\tdensity"]
    for condition in sorted(by_condition):
        curve = utterance_changes_kde(by_condition[condition], args.grid_points)
        for x, y in zip(curve.grid, curve.density):
            out_lines.append(
                f"{condition}\t{curve.bandwidth:.10g}\t{float(x):.10g}\t{float(y):.10g}"
            )
    Path(args.out).write_text("\n".join(out_lines) + "\n", encoding="utf-8")
    print(f"wrote {args.out} ({len(by_condition)} conditions)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="accentshift",
        description="Accent-shift rewrite rules, shift-rate scoring, and suite reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a ruleset file")
    p.add_argument("ruleset")
    p.add_argument("--inventory", help="inventory TSV (defaults to the shipped table)")
    p.set_defaults(func=cmd_validate)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--rules", help="ruleset TSV (defaults to the shipped rules)")
        p.add_argument("--inventory", help="inventory TSV")
        p.add_argument("--families", default="all",
                       help="comma-separated families, or all/none (default all)")
        p.add_argument("--count-scope", default="full", choices=("full", "enabled"),
                       help="count shift sites under all families or only enabled ones")

    p = sub.add_parser("transform", help="rewrite a manifest's source IPA")
    p.add_argument("manifest")
    common(p)
    p.add_argument("--out", help="output manifest path (default stdout)")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("score", help="score one condition's manifest")
    p.add_argument("manifest")
    common(p)
    p.add_argument("--condition", default="condition", help="name used in the report")
    p.add_argument("--references", help="group reference embeddings JSON")
    p.add_argument("--embeddings", help="embedding sidecar JSONL")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("suite", help="score every condition in a suite config")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="report output directory")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("hist", help="density curves from a per-utterance change table")
    p.add_argument("detail", help="changes.tsv from a suite run")
    p.add_argument("--out", required=True)
    p.add_argument("--grid-points", type=int, default=201)
    p.set_defaults(func=cmd_hist)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RulesetError, InventoryError, TokenizeError, ManifestError, HarnessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
