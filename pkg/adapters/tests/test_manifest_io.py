import pytest

from accentshift_adapters import ManifestIoError, read_rows, write_rows


def test_roundtrip_preserves_foreign_keys(tmp_path):
    rows = [
        {"utt_id": "u1", "text": "hi", "n1": 5, "note": "keep me", "voice_label": "v"},
        {"utt_id": "u2", "text": "yo", "logits": [0.1, 0.2, 0.3]},
    ]
    path = tmp_path / "m.jsonl"
    write_rows(path, rows)
    back = read_rows(path)
    assert back == rows


def test_write_is_key_order_independent(tmp_path):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    write_rows(a, [{"utt_id": "u1", "zz": 1, "aa": 2}])
    write_rows(b, [{"aa": 2, "utt_id": "u1", "zz": 1}])
    assert a.read_bytes() == b.read_bytes()


def test_blank_lines_skipped(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text('{"utt_id": "u1"}\n\n{"utt_id": "u2"}\n', encoding="utf-8")
    assert [r["utt_id"] for r in read_rows(path)] == ["u1", "u2"]


def test_duplicate_utt_id_rejected(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text('{"utt_id": "u1"}\n{"utt_id": "u1"}\n', encoding="utf-8")
    with pytest.raises(ManifestIoError, match="duplicate"):
        read_rows(path)


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text('{"utt_id": "u1"}\n{oops\n', encoding="utf-8")
    with pytest.raises(ManifestIoError, match="line 2"):
        read_rows(path)


@pytest.mark.parametrize("line", ['[1, 2]', '"just a string"', '{"text": "no id"}',
                                  '{"utt_id": ""}', '{"utt_id": 7}'])
def test_rows_must_be_objects_with_utt_id(tmp_path, line):
    path = tmp_path / "m.jsonl"
    path.write_text(line + "\n", encoding="utf-8")
    with pytest.raises(ManifestIoError):
        read_rows(path)
