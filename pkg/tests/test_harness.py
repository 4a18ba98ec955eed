import dataclasses
import json
import random

import pytest

from accentshift import (
    ConditionReport,
    ExperimentConfig,
    HarnessError,
    RuleFamily,
    ablation_suite,
    apply_rules,
    count_applicable,
    default_ruleset,
    detokenize,
    emit_reports,
    read_manifest,
    run_suite,
    score_manifest,
    slugify,
    tokenize,
    transform_manifest,
)
from accentshift.fixtures import (
    REVERT_TARGETS,
    demo_rows,
    simulate_recognition,
    write_demo_suite,
)

F, R, V = RuleFamily.FLAPPING, RuleFamily.RHOTICITY, RuleFamily.VOWEL


@pytest.fixture(scope="session")
def demo_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo")
    config = write_demo_suite(out)
    return config.parent


def scored_rows(revert_count, seed=1):
    """Demo rows with recognized_ipa built by reverting ``revert_count`` of
    the 30 applicable sites."""
    rows = demo_rows()
    rs = default_ruleset()
    full = [apply_rules(tokenize(r.ipa_source), rs) for r in rows]
    recognized = simulate_recognition(full, revert_count, random.Random(seed), rs)
    return [
        dataclasses.replace(row, recognized_ipa=detokenize(rec))
        for row, rec in zip(rows, recognized)
    ]


# --- transform ---


def test_transform_fills_fields():
    rows, failures = transform_manifest(demo_rows(), default_ruleset())
    assert failures == []
    assert len(rows) == 13
    by_id = {r.utt_id: r for r in rows}
    assert by_id["utt-001"].ipa_transformed == "ðə wɑtə"
    assert by_id["utt-001"].n1 == 3
    assert by_id["utt-001"].n1_by_family == {"flapping": 1, "rhoticity": 1, "vowel": 1}
    assert sum(r.n1 for r in rows) == 30


def test_transform_respects_families():
    rows, _ = transform_manifest(demo_rows(), default_ruleset(), families=frozenset({R}))
    by_id = {r.utt_id: r for r in rows}
    assert by_id["utt-001"].ipa_transformed == "ðə waɾə"
    # n1 still counts all families by default
    assert by_id["utt-001"].n1 == 3


def test_transform_count_scope_enabled():
    rows, _ = transform_manifest(
        demo_rows(), default_ruleset(), families=frozenset({R}), count_scope="enabled"
    )
    by_id = {r.utt_id: r for r in rows}
    assert by_id["utt-001"].n1 == 1
    assert by_id["utt-001"].n1_by_family == {"flapping": 0, "rhoticity": 1, "vowel": 0}


def test_transform_rejects_bad_count_scope():
    with pytest.raises(HarnessError):
        transform_manifest(demo_rows(), default_ruleset(), count_scope="both")


def test_transform_quarantines_bad_ipa():
    rows = demo_rows()
    rows[3] = dataclasses.replace(rows[3], ipa_source="pxn")
    out, failures = transform_manifest(rows, default_ruleset())
    assert len(out) == 12
    assert [f.stage for f in failures] == ["tokenize"]
    assert failures[0].utt_id == rows[3].utt_id


def test_transform_quarantines_duration_mismatch():
    rows = demo_rows()
    rows[0] = dataclasses.replace(rows[0], durations=(1.0, 2.0))
    out, failures = transform_manifest(rows, default_ruleset())
    assert len(out) == 12
    assert failures[0].stage == "durations"


def test_transform_lexicon_ruleset_aligns_spans(tmp_path):
    from accentshift import bath_gated_ruleset

    rows, failures = transform_manifest(demo_rows(), bath_gated_ruleset())
    assert failures == []
    by_id = {r.utt_id: r for r in rows}
    # bath and path are listed words; natter is not
    assert by_id["utt-003"].ipa_transformed == "bɑθ pɑθ"
    assert by_id["utt-013"].ipa_transformed == "ðə nætə"


def test_transform_quarantines_unalignable_text():
    from accentshift import bath_gated_ruleset

    rows = demo_rows()
    rows[2] = dataclasses.replace(rows[2], text="bath")
    out, failures = transform_manifest(rows, bath_gated_ruleset())
    assert len(out) == 12
    assert failures[0].stage == "align"


# --- score ---


def test_score_psr_zero_when_recognition_matches_transform():
    rows, _ = transform_manifest(demo_rows(), default_ruleset())
    rows = [dataclasses.replace(r, recognized_ipa=r.ipa_transformed) for r in rows]
    report = score_manifest(rows, default_ruleset(), condition="endpoint-low")
    assert report.psr == 0.0
    assert report.n2_total == 0


def test_score_psr_one_when_recognition_matches_source():
    rows, _ = transform_manifest(demo_rows(), default_ruleset())
    rows = [dataclasses.replace(r, recognized_ipa=r.ipa_source) for r in rows]
    report = score_manifest(rows, default_ruleset(), condition="endpoint-high")
    assert report.psr == 1.0
    assert report.n1_total == report.n2_total == 30


def test_score_thirty_percent_reversion():
    report = score_manifest(scored_rows(9), default_ruleset(), condition="thirty pct")
    assert report.n1_total == 30
    assert report.n2_total == 9
    assert report.psr == 0.3


def test_score_recomputes_n1_when_missing():
    rows = scored_rows(9)
    assert all(r.n1 is None for r in rows)
    report = score_manifest(rows, default_ruleset(), condition="c")
    assert report.n1_total == 30


def test_score_family_totals():
    report = score_manifest(scored_rows(30), default_ruleset(), condition="c")
    assert report.n1_by_family == {"flapping": 7, "rhoticity": 14, "vowel": 9}
    assert report.n2_by_family == report.n1_by_family
    assert report.psr_for_family(F) == 1.0


def test_psr_for_family_none_when_no_sites():
    report = score_manifest(scored_rows(9), default_ruleset(), condition="c")
    fake = dataclasses.replace(
        report, n1_by_family={"flapping": 0, "rhoticity": 1, "vowel": 1}
    )
    assert fake.psr_for_family(F) is None


def test_score_excludes_rows_without_recognition():
    rows = scored_rows(9)
    # utt-001 carries 3 sites; dropping its recognition removes them from n1
    rows[0] = dataclasses.replace(rows[0], recognized_ipa=None)
    report = score_manifest(rows, default_ruleset(), condition="c")
    assert report.n_missing_recognition == 1
    assert report.n1_total == 27
    assert report.n_rows == 13


def test_score_errors_when_no_row_has_recognition():
    rows = [dataclasses.replace(r, recognized_ipa=None) for r in scored_rows(9)]
    with pytest.raises(HarnessError):
        score_manifest(rows, default_ruleset(), condition="c")


def test_score_quarantines_bad_recognition():
    rows = scored_rows(9)
    rows[1] = dataclasses.replace(rows[1], recognized_ipa="qqq")
    report = score_manifest(rows, default_ruleset(), condition="c")
    assert len(report.failures) == 1
    assert report.failures[0].stage == "recognized"
    assert report.n_rows == 12


def test_score_errors_when_every_row_quarantined():
    rows = [dataclasses.replace(r, ipa_source="qqq", n1=None) for r in demo_rows()]
    with pytest.raises(HarnessError):
        score_manifest(rows, default_ruleset(), condition="c")


def test_score_aggregates_model_outputs():
    import numpy as np

    from accentshift import softmax

    rows = scored_rows(9)
    rows = [
        dataclasses.replace(
            r,
            logits=(0.5, 1.5, -1.0),
            utmos=4.0,
            embedding_ref=f"c/{r.utt_id}",
        )
        for r in rows
    ]
    refs = {"na": np.asarray([1.0, 0.0]), "b": np.asarray([0.0, 1.0])}
    emb = {f"c/{r.utt_id}": (0.6, 0.8) for r in rows}
    report = score_manifest(
        rows, default_ruleset(), condition="c", references=refs, embeddings=emb
    )
    assert report.utmos == pytest.approx(4.0)
    assert report.sim_b == pytest.approx(0.8)
    assert report.sim_na == pytest.approx(0.6)
    assert report.prob_b == pytest.approx(100.0 * float(softmax([0.5, 1.5, -1.0])[1]))


def test_report_bounds_validated():
    with pytest.raises(HarnessError):
        ConditionReport(
            condition="c",
            families=frozenset(),
            n_rows=1,
            n_missing_recognition=0,
            n1_total=10,
            n2_total=1,
            psr=0.1,
            n1_by_family={},
            n2_by_family={},
            utmos=9.0,
        )


# --- ablation grid ---


def test_ablation_suite_members():
    base = ExperimentConfig(name="B Voice", families=frozenset(), voice_label="bv")
    grid = ablation_suite(base)
    assert len(grid) == 8
    by_name = {c.name: c.families for c in grid}
    assert by_name == {
        "B Voice": frozenset(),
        "+ Flapping": {F},
        "+ Rhoticity": {R},
        "+ Vowel": {V},
        "+ All": {F, R, V},
        "- Flapping": {R, V},
        "- Rhoticity": {F, V},
        "- Vowel": {F, R},
    }
    assert all(c.voice_label == "bv" for c in grid)


@pytest.mark.parametrize(
    "name, slug",
    [
        ("+ All", "plus-all"),
        ("- Flapping", "minus-flapping"),
        ("B Spk Emb", "b-spk-emb"),
        ("baseline", "baseline"),
    ],
)
def test_slugify(name, slug):
    assert slugify(name) == slug


def test_slugify_rejects_empty():
    assert slugify("++") == "plus-plus"
    with pytest.raises(HarnessError):
        slugify("!!")


# --- reports and suite ---


def test_emit_reports_formats(tmp_path):
    report = score_manifest(scored_rows(9), default_ruleset(), condition="only")
    paths = emit_reports([report], tmp_path)
    table1 = paths["table1"].read_text(encoding="utf-8").splitlines()
    assert table1[0] == "condition\tpsr\tprob_b\tprob_na\tsim_b\tsim_na\tutmos"
    assert table1[1] == "only\t0.300\t-\t-\t-\t-\t-"
    table2 = paths["table2"].read_text(encoding="utf-8").splitlines()
    assert table2[-1] == "only\tall\t30\t9\t0.300"
    changes = paths["changes"].read_text(encoding="utf-8").splitlines()
    assert len(changes) == 1 + 13


def test_emit_reports_rejects_duplicate_names(tmp_path):
    report = score_manifest(scored_rows(9), default_ruleset(), condition="dup")
    with pytest.raises(HarnessError):
        emit_reports([report, report], tmp_path)


def test_run_suite_psr_column(demo_dir, tmp_path):
    reports = run_suite(demo_dir / "suite_config.json", tmp_path)
    assert len(reports) == 8
    for report in reports:
        assert report.n1_total == 30
        assert report.n2_total == REVERT_TARGETS[report.condition]
        assert report.psr == REVERT_TARGETS[report.condition] / 30
        assert report.failures == ()


def test_run_suite_is_deterministic(demo_dir, tmp_path):
    names = ["table1.tsv", "table2.tsv", "changes.tsv", "kde.tsv", "summary.txt"]
    run_suite(demo_dir / "suite_config.json", tmp_path / "a")
    run_suite(demo_dir / "suite_config.json", tmp_path / "b")
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_suite_kde_long_format(demo_dir, tmp_path):
    run_suite(demo_dir / "suite_config.json", tmp_path)
    lines = (tmp_path / "kde.tsv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "condition\tfamily\tbandwidth\tx\tdensity"
    seen = {tuple(line.split("\t")[:2]) for line in lines[1:]}
    conditions = {c for c, _ in seen}
    assert len(conditions) == 8
    assert {f for _, f in seen} == {"flapping", "rhoticity", "vowel", "all"}


def test_members_mode_config(demo_dir, tmp_path):
    config = {
        "references": str(demo_dir / "references.json"),
        "embeddings": str(demo_dir / "embeddings.jsonl"),
        "members": [
            {
                "name": "solo",
                "families": ["rhoticity"],
                "manifest": str(demo_dir / "cond-baseline.jsonl"),
            }
        ],
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    reports = run_suite(path, tmp_path / "out")
    assert [r.condition for r in reports] == ["solo"]
    assert reports[0].families == {R}


def test_suite_config_requires_members_or_ablation(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{}", encoding="utf-8")
    with pytest.raises(HarnessError):
        run_suite(path, tmp_path / "out")


def test_suite_config_rejects_unknown_family(tmp_path, demo_dir):
    config = {
        "members": [
            {"name": "x", "families": ["nasal"],
             "manifest": str(demo_dir / "cond-baseline.jsonl")}
        ]
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    with pytest.raises(HarnessError):
        run_suite(path, tmp_path / "out")


def test_demo_manifests_roundtrip(demo_dir):
    rows = read_manifest(demo_dir / "cond-plus-all.jsonl")
    assert len(rows) == 13
    assert all(r.ipa_transformed is not None for r in rows)
    assert all(r.recognized_ipa is not None for r in rows)
    assert all(r.logits is not None and r.utmos is not None for r in rows)
    # per-row surviving sites recount exactly from the recognized transcript
    total = sum(
        count_applicable(tokenize(r.recognized_ipa), default_ruleset()).n_total
        for r in rows
    )
    assert total == REVERT_TARGETS["+ All"]
