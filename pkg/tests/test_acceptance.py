"""Acceptance gate: one test per shipped claim, tolerances pinned inline.

Each test prints a PASS line naming the claim; the pytest verdict for each
test is the pass/fail record.
"""

import dataclasses
import itertools
import random
import time

import pytest

from accentshift import (
    ExperimentConfig,
    RuleConfig,
    RuleFamily,
    apply_rules,
    cosine_similarity,
    count_applicable,
    default_inventory,
    default_ruleset,
    detokenize,
    psr_from_totals,
    score_manifest,
    softmax,
    tokenize,
    transform_manifest,
    utterance_changes_kde,
)
from accentshift.cli import main as cli_main
from accentshift.harness import ablation_suite
from accentshift.inventory import Token
from accentshift.fixtures import demo_rows, simulate_recognition, write_demo_suite

from conftest import random_ipa

F, R, V = RuleFamily.FLAPPING, RuleFamily.RHOTICITY, RuleFamily.VOWEL


def test_c1_psr_reproduces_reported_totals():
    """Corpus totals 221.4k vs {189.5k, 171.5k, 139.0k} give PSR
    {0.856, 0.775, 0.628} within 0.0005."""
    for n2, want in ((189500, 0.856), (171500, 0.775), (139000, 0.628)):
        got = psr_from_totals(221400, n2)
        assert abs(got - want) <= 0.0005, f"psr({n2}) = {got}"
    print("PASS: corpus shift-rate arithmetic matches the reported table")


def test_c2_rule_goldens_exact():
    """tokenize -> apply -> detokenize reproduces the five worked examples
    as exact strings."""
    goldens = {
        "bæθ": "bɑθ",
        "goʊt": "gəʊt",
        "kaɹ": "kɑː",
        "waɾɚ": "wɑtə",
        "læɾəɹ": "lɑtəː",
    }
    rs = default_ruleset()
    for src, want in goldens.items():
        got = detokenize(apply_rules(tokenize(src), rs).output)
        assert got == want, f"{src} -> {got}, wanted {want}"
    print("PASS: all five worked-example rewrites match exactly")


def test_c3_property_suite_1000_sequences_under_10s():
    """1000 seeded random sequences: roundtrip, codepoint and token-count
    preservation, fixpoint, family commutativity, count additivity, and
    trace replay; zero failures in under 10 seconds."""
    rng = random.Random(20260818)
    rs = default_ruleset()
    inv = default_inventory()
    by_id = {r.id: r for r in rs}
    started = time.monotonic()
    for _ in range(1000):
        text = random_ipa(rng)
        seq = tokenize(text)
        assert detokenize(seq) == text
        assert seq.codepoint_count == len(text)

        result = apply_rules(seq, rs)
        assert len(result.output) == len(seq)
        assert result.output.codepoint_count == seq.codepoint_count

        again = apply_rules(result.output, rs)
        assert again.n_total == 0 and again.output == result.output

        singles = {fam: apply_rules(seq, rs, RuleConfig.of(fam)) for fam in RuleFamily}
        assert result.n_total == sum(r.n_total for r in singles.values())
        for order in itertools.permutations(RuleFamily):
            chained = seq
            for fam in order:
                chained = apply_rules(chained, rs, RuleConfig.of(fam)).output
            assert chained.symbols == result.output.symbols

        replayed = list(seq.tokens)
        for index, rule_id in result.trace:
            for j, symbol in enumerate(by_id[rule_id].replacement):
                replayed[index + j] = Token(symbol, inv.classify(symbol))
        assert tuple(replayed) == result.output.tokens
    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"property suite took {elapsed:.1f}s"
    print(f"PASS: 1000-sequence property suite clean in {elapsed:.1f}s")


def test_c4_shift_rate_endpoints_exact():
    """Recognition identical to the rewritten form scores 0; identical to
    the source scores 1; a corpus-wide 30% reversion scores 0.300 exactly."""
    rs = default_ruleset()
    rows, failures = transform_manifest(demo_rows(), rs)
    assert failures == []

    low = [dataclasses.replace(r, recognized_ipa=r.ipa_transformed) for r in rows]
    assert score_manifest(low, rs, condition="low").psr == 0.0

    high = [dataclasses.replace(r, recognized_ipa=r.ipa_source) for r in rows]
    assert score_manifest(high, rs, condition="high").psr == 1.0

    sources = [tokenize(r.ipa_source) for r in rows]
    full = [apply_rules(s, rs) for s in sources]
    total = sum(r.n_total for r in full)
    assert total == 30
    recognized = simulate_recognition(full, total * 3 // 10, random.Random(4), rs)
    partial = [
        dataclasses.replace(row, recognized_ipa=detokenize(rec))
        for row, rec in zip(rows, recognized)
    ]
    report = score_manifest(partial, rs, condition="partial")
    assert report.psr == 0.300
    print("PASS: shift-rate endpoints 0, 1, and 0.300 hit exactly")


def test_c5_ablation_grid_structure():
    """ablation_suite yields exactly 8 conditions with the expected family
    sets: baseline, three singles, all, three leave-one-outs."""
    grid = ablation_suite(ExperimentConfig(name="base", families=frozenset()))
    assert len(grid) == 8
    families = {c.name: c.families for c in grid}
    assert families == {
        "base": frozenset(),
        "+ Flapping": {F},
        "+ Rhoticity": {R},
        "+ Vowel": {V},
        "+ All": {F, R, V},
        "- Flapping": {R, V},
        "- Rhoticity": {F, V},
        "- Vowel": {F, R},
    }
    print("PASS: ablation grid has the 8 expected conditions")


def test_c6_metric_units():
    """softmax sums to 1 within 1e-9 and matches the (2,1,0) oracle to 4
    decimals; cosine self/orthogonal identities hold; KDE mass stays
    within 0.01 of 1 on random count samples."""
    rng = random.Random(11)
    for _ in range(200):
        logits = [rng.uniform(-20, 20) for _ in range(3)]
        assert abs(float(softmax(logits).sum()) - 1.0) <= 1e-9
    probs = softmax([2.0, 1.0, 0.0])
    for got, want in zip(probs, (0.6652, 0.2447, 0.0900)):
        assert abs(float(got) - want) <= 5e-5

    assert cosine_similarity([2.0, 3.0], [2.0, 3.0]) == pytest.approx(1.0, abs=1e-12)
    assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0, abs=1e-12)
    assert cosine_similarity([1.0, 1.0], [1.0, 0.0]) == pytest.approx(0.7071, abs=1e-4)

    for _ in range(50):
        values = [rng.randrange(0, 40) for _ in range(rng.randrange(1, 60))]
        curve = utterance_changes_kde(values)
        assert abs(curve.integral - 1.0) <= 0.01
    print("PASS: metric unit checks (softmax, cosine, density mass) hold")


def test_c7_suite_runs_byte_identical(tmp_path):
    """Two suite runs over the bundled corpus produce byte-identical
    reports."""
    config = write_demo_suite(tmp_path / "demo")
    assert cli_main(["suite", str(config), "--out", str(tmp_path / "a")]) == 0
    assert cli_main(["suite", str(config), "--out", str(tmp_path / "b")]) == 0
    for name in ("table1.tsv", "table2.tsv", "changes.tsv", "kde.tsv", "summary.txt"):
        a = (tmp_path / "a" / name).read_bytes()
        b = (tmp_path / "b" / name).read_bytes()
        assert a == b, f"{name} differs between runs"
    print("PASS: suite reports byte-identical across runs")
