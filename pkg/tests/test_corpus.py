import json

import pytest

from radstruct.corpus import (
    CorpusError,
    ReportRecord,
    agreement,
    assemble_input,
    export_prepared,
    import_predictions,
    import_prepared,
    load_corpus,
    load_manifest,
    save_corpus,
    save_manifest,
    split,
)
from radstruct.fixtures import EXAMPLE_STRUCTURED, make_synthetic_corpus
from radstruct.reportql import flatten, parse_report
from radstruct.schema import normalize_name, parse_schema


def write_jsonl(path, objs):
    path.write_text("\n".join(json.dumps(o) for o in objs) + "\n", encoding="utf-8")


def test_load_corpus_counts(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_jsonl(path, [
        {"id": f"r{i}", "report": "the liver is normal", "target": "liver { size { normal } }"}
        for i in range(88)
    ])
    records = load_corpus(str(path))
    assert len(records) == 88


def test_load_corpus_duplicate_id_names_line(tmp_path):
    path = tmp_path / "corpus.jsonl"
    objs = [{"id": f"r{i}", "report": "x"} for i in range(6)]
    objs.append({"id": "r3", "report": "x"})
    write_jsonl(path, objs)
    with pytest.raises(CorpusError, match=":7:"):
        load_corpus(str(path))


def test_load_corpus_target_canonicalized(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_jsonl(path, [{"id": "a", "report": "x", "target": "liver{size{normal}}"}])
    records = load_corpus(str(path))
    assert records[0].target == "liver { size { normal } }"


def test_load_corpus_unparseable_target(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_jsonl(path, [{"id": "a", "report": "x", "target": "liver { size {"}])
    with pytest.raises(CorpusError, match="unparseable target"):
        load_corpus(str(path))


def test_load_corpus_inference_only_record(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_jsonl(path, [{"id": "a", "report": "x"}])
    assert load_corpus(str(path))[0].target is None


def test_corpus_round_trip(tmp_path):
    records = make_synthetic_corpus(n=10)
    path = tmp_path / "corpus.jsonl"
    save_corpus(records, str(path))
    assert load_corpus(str(path)) == records


def make_records(n):
    return [ReportRecord(f"r{i}", "some text") for i in range(n)]


def test_split_88_at_80_percent():
    manifest = split(make_records(88), 0.8, seed=13)
    assert len(manifest.train_ids) == 70
    assert len(manifest.test_ids) == 18
    assert set(manifest.train_ids) | set(manifest.test_ids) == {f"r{i}" for i in range(88)}
    assert set(manifest.train_ids) & set(manifest.test_ids) == set()


def test_split_deterministic():
    a = split(make_records(88), 0.8, seed=13)
    b = split(make_records(88), 0.8, seed=13)
    assert a == b
    c = split(make_records(88), 0.8, seed=14)
    assert c != a


def test_split_degenerate_clamp():
    manifest = split(make_records(2), 0.8, seed=0)
    assert len(manifest.train_ids) == 1
    assert len(manifest.test_ids) == 1


def test_split_partition_invariants_random():
    import random

    rng = random.Random(0)
    for _ in range(100):
        n = rng.randint(2, 120)
        fraction = rng.uniform(0.05, 0.95)
        manifest = split(make_records(n), fraction, seed=rng.randint(0, 10**6))
        train, test = set(manifest.train_ids), set(manifest.test_ids)
        assert train | test == {f"r{i}" for i in range(n)}
        assert not train & test
        assert train and test


def test_split_input_validation():
    with pytest.raises(CorpusError):
        split(make_records(1), 0.8)
    with pytest.raises(CorpusError):
        split(make_records(10), 1.0)


def test_manifest_round_trip(tmp_path):
    manifest = split(make_records(20), 0.8, seed=4)
    path = tmp_path / "split.json"
    save_manifest(manifest, str(path))
    assert load_manifest(str(path)) == manifest


def test_assemble_input_structure(abdo_schema):
    record = ReportRecord("a", "the liver is normal", "liver { size { normal } }")
    example, warnings = assemble_input(record, abdo_schema)
    assert warnings == []
    assert example.input_text.count("[REPORT]") == 1
    schema_part, report_part = example.input_text.split(" [REPORT] ")
    assert "{" not in schema_part and "}" not in schema_part
    assert report_part == "the liver is normal"
    assert example.target_text == "liver { size { normal } }"


def test_assemble_input_organ_filter_prunes_target(abdo_schema):
    record = ReportRecord("a", "free text here", EXAMPLE_STRUCTURED)
    example, warnings = assemble_input(record, abdo_schema, organ_filter=["GB"])
    assert warnings == []
    assert example.target_text == (
        "GB { seen { yes } distention { well } stone { no } wall thickening { no } }"
    )
    assert "liver" not in example.input_text.split(" [REPORT] ")[0]


def test_assemble_input_filter_matches_nothing(abdo_schema):
    record = ReportRecord("a", "free text", "liver { size { normal } }")
    example, warnings = assemble_input(record, abdo_schema, organ_filter=["bladder"])
    assert example.target_text == ""
    assert warnings


def test_assemble_input_unknown_organ(abdo_schema):
    record = ReportRecord("a", "text")
    with pytest.raises(Exception, match="unknown organ"):
        assemble_input(record, abdo_schema, organ_filter=["brain"])


def test_prune_flatten_commutes(abdo_schema):
    # pruning then flattening == flattening then path-prefix filtering
    from radstruct.reportql import prune_to_organs

    doc, _ = parse_report(EXAMPLE_STRUCTURED)
    organs = ["liver", "left kidney"]
    pruned, _ = prune_to_organs(doc, organs)
    left = [(p.path, p.value) for p in flatten(pruned)[0]]
    wanted = {normalize_name(o) for o in organs}
    right = [
        (p.path, p.value)
        for p in flatten(doc)[0]
        if normalize_name(p.path[0]) in wanted
    ]
    assert left == right


def test_prepared_round_trip(tmp_path, abdo_schema):
    records = make_synthetic_corpus(n=5)
    examples = [assemble_input(r, abdo_schema)[0] for r in records]
    path = tmp_path / "prepared.jsonl"
    export_prepared(examples, str(path))
    assert import_prepared(str(path)) == examples


def test_import_predictions(tmp_path):
    path = tmp_path / "preds.jsonl"
    write_jsonl(path, [{"id": "a", "prediction": "liver { size { normal } }"}])
    assert import_predictions(str(path)) == [("a", "liver { size { normal } }")]
    assert import_predictions(str(path), known_ids={"a", "b"}) == [
        ("a", "liver { size { normal } }")
    ]
    with pytest.raises(CorpusError, match="unknown id 'a'"):
        import_predictions(str(path), known_ids={"b"})


def test_import_predictions_subset_allowed(tmp_path):
    path = tmp_path / "preds.jsonl"
    write_jsonl(path, [{"id": "a", "prediction": "x"}])
    # strict subset of the exported ids is accepted
    assert len(import_predictions(str(path), known_ids={"a", "b", "c"})) == 1


# -- agreement ----------------------------------------------------------------

BINARY_SCHEMA = parse_schema("organ gb\nslot seen = yes | no\n")


def _annotations(values):
    return [
        ReportRecord(f"r{i}", "text", f"gb {{ seen {{ {v} }} }}")
        for i, v in enumerate(values)
    ]


def test_agreement_identical():
    records = _annotations(["yes", "no", "yes", "no"])
    kappa, table = agreement(records, records, BINARY_SCHEMA)
    assert kappa == 1.0
    assert all(t.observed_agreement == 1.0 for t in table)


def test_agreement_hand_fixture():
    a = _annotations(["yes"] * 4 + ["no"] * 4 + ["yes", "no"])
    b = _annotations(["yes"] * 4 + ["no"] * 4 + ["no", "yes"])
    kappa, table = agreement(a, b, BINARY_SCHEMA)
    assert kappa == pytest.approx(0.6, abs=1e-12)
    assert table[0].n_items == 10
    assert table[0].observed_agreement == 0.8


def test_agreement_complementary():
    a = _annotations(["yes"] * 5 + ["no"] * 5)
    b = _annotations(["no"] * 5 + ["yes"] * 5)
    kappa, _ = agreement(a, b, BINARY_SCHEMA)
    assert kappa == -1.0


def test_agreement_id_mismatch():
    a = _annotations(["yes", "no"])
    b = [ReportRecord("other", "text", "gb { seen { yes } }")]
    with pytest.raises(CorpusError, match="different ids"):
        agreement(a, b, BINARY_SCHEMA)
