import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biasforge.align import align_words
from biasforge.errors import ManifestParseError, ManifestSchemaError
from biasforge.manifest import (
    AlignmentRecord,
    BiasingListRecord,
    TrainManifestRecord,
    UtteranceRecord,
    read_jsonl,
    write_jsonl,
)
from biasforge.textnorm import from_pretokenized

ids = st.text(alphabet="abcdefgh0123456789_", min_size=1, max_size=12)
texts = st.text(max_size=60).filter(lambda s: "\n" not in s)


def test_empty_file_empty_stream(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    assert list(read_jsonl(path, UtteranceRecord)) == []


def test_three_lines_in_order(tmp_path):
    path = tmp_path / "r.jsonl"
    records = [UtteranceRecord(id=f"u{i}", text=f"text {i}") for i in range(3)]
    write_jsonl(path, records)
    assert list(read_jsonl(path, UtteranceRecord)) == records


def test_malformed_line_names_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(
        '{"id":"a","text":"x"}\n{not json}\n{"id":"b","text":"y"}\n', encoding="utf-8"
    )
    with pytest.raises(ManifestParseError, match=":2:"):
        list(read_jsonl(path, UtteranceRecord))


def test_schema_error_distinct_from_parse_error(tmp_path):
    path = tmp_path / "schema.jsonl"
    path.write_text('{"id":"a"}\n', encoding="utf-8")
    with pytest.raises(ManifestSchemaError, match=":1:.*text"):
        list(read_jsonl(path, UtteranceRecord))
    with pytest.raises(FileNotFoundError):
        list(read_jsonl(tmp_path / "missing.jsonl", UtteranceRecord))


def test_non_object_line_is_schema_error(tmp_path):
    path = tmp_path / "arr.jsonl"
    path.write_text("[1,2,3]\n", encoding="utf-8")
    with pytest.raises(ManifestSchemaError, match="object"):
        list(read_jsonl(path, UtteranceRecord))


@settings(max_examples=100, deadline=None)
@given(records=st.lists(st.builds(UtteranceRecord, id=ids, text=texts), max_size=20))
def test_utterance_round_trip(tmp_path_factory, records):
    path = tmp_path_factory.mktemp("rt") / "u.jsonl"
    write_jsonl(path, records)
    assert list(read_jsonl(path, UtteranceRecord)) == records


def test_non_ascii_preserved(tmp_path):
    path = tmp_path / "u.jsonl"
    rec = UtteranceRecord(id="u1", text="das ist schön — 马铃薯")
    write_jsonl(path, [rec])
    assert "马铃薯" in path.read_text(encoding="utf-8")
    assert list(read_jsonl(path, UtteranceRecord)) == [rec]


def test_byte_stable_output(tmp_path):
    records = [UtteranceRecord(id="u1", text="a b"), UtteranceRecord(id="u2", text="c")]
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_jsonl(p1, records)
    write_jsonl(p2, records)
    assert p1.read_bytes() == p2.read_bytes()


def test_alignment_record_round_trip(tmp_path):
    alignment = align_words(
        from_pretokenized("a b c"), from_pretokenized("a x c d")
    )
    rec = AlignmentRecord(id="u1", ops=alignment.ops)
    path = tmp_path / "a.jsonl"
    write_jsonl(path, [rec])
    loaded = list(read_jsonl(path, AlignmentRecord))[0]
    assert loaded.alignment().ops == alignment.ops


def test_alignment_record_bad_op_shape(tmp_path):
    path = tmp_path / "a.jsonl"
    path.write_text('{"id":"u","ops":[["match","a"]]}\n', encoding="utf-8")
    with pytest.raises(ManifestSchemaError):
        list(read_jsonl(path, AlignmentRecord))


def test_biasing_list_record_round_trip(tmp_path):
    rec = BiasingListRecord(id="u", words=["b", "a"], true_bias=["a"])
    path = tmp_path / "l.jsonl"
    write_jsonl(path, [rec])
    loaded = list(read_jsonl(path, BiasingListRecord))[0]
    assert loaded == rec
    blist = loaded.to_biasing_list()
    assert blist.words == ["b", "a"]
    assert blist.true_bias == {"a"}


def test_train_record_weight_length_mismatch():
    with pytest.raises(ManifestSchemaError, match="weights"):
        TrainManifestRecord(
            id="u", prompt="", target_text="a", target_tokens=[1, 2], weights=[1.0]
        )


def test_train_record_round_trip_exact_floats(tmp_path):
    rec = TrainManifestRecord(
        id="u",
        prompt="tinnitus fjord",
        target_text="i hear tinnitus",
        target_tokens=[5, 6, 7],
        weights=[1.0, 1.1, 0.30000000000000004],
        true_bias_words=["tinnitus"],
    )
    path = tmp_path / "m.jsonl"
    write_jsonl(path, [rec])
    loaded = list(read_jsonl(path, TrainManifestRecord))[0]
    assert loaded.weights == rec.weights


def test_canonical_field_order(tmp_path):
    path = tmp_path / "u.jsonl"
    write_jsonl(path, [UtteranceRecord(id="u", text="t")])
    line = path.read_text(encoding="utf-8").strip()
    assert line == '{"id":"u","text":"t"}'
    assert json.loads(line) == {"id": "u", "text": "t"}


def test_blank_lines_skipped(tmp_path):
    path = tmp_path / "u.jsonl"
    path.write_text('{"id":"a","text":"x"}\n\n{"id":"b","text":"y"}\n', encoding="utf-8")
    assert len(list(read_jsonl(path, UtteranceRecord))) == 2
