import json
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antnav.corpus import (
    Corpus,
    CorpusError,
    Document,
    build_corpus,
    bundled_corpus_path,
    dump_corpus,
    load_corpus,
    window_corpus,
)


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


def test_load_three_records_in_file_order(tmp_path):
    p = write_jsonl(tmp_path / "c.jsonl", [
        {"id": "z", "title": "Z", "keywords": ["a"]},
        {"id": "a", "title": "A", "keywords": ["b"]},
        {"id": "m", "title": "M", "keywords": ["c"]},
    ])
    corpus = load_corpus(p, "jsonl")
    assert corpus.ids == ["z", "a", "m"]


def test_keywords_are_case_folded_and_deduplicated(tmp_path):
    p = write_jsonl(tmp_path / "c.jsonl", [
        {"id": "x", "title": "X", "keywords": ["EU", "eu", "Economy"]},
    ])
    assert load_corpus(p)[0].keywords == {"eu", "economy"}


def test_empty_keyword_records_are_dropped_and_reported(tmp_path):
    recs = [{"id": f"r{i}", "title": "", "keywords": ["k"]} for i in range(5)]
    recs[2]["keywords"] = []
    corpus = load_corpus(write_jsonl(tmp_path / "c.jsonl", recs))
    assert len(corpus) == 4
    assert corpus.dropped == ("r2",)


def test_malformed_record_reports_line(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text('{"id": "a", "title": "", "keywords": ["x"]}\n{"id": "b", "title": ""}\n')
    with pytest.raises(CorpusError, match=r"c\.jsonl:2: missing field 'keywords'"):
        load_corpus(p)
    p.write_text('{"id": "a", "title": "", "keywords": ["x"]}\n\n{not json\n')
    with pytest.raises(CorpusError, match=r":3: invalid JSON"):
        load_corpus(p)


def test_duplicate_id_is_an_error(tmp_path):
    p = write_jsonl(tmp_path / "c.jsonl", [
        {"id": "a", "title": "", "keywords": ["x"]},
        {"id": "a", "title": "", "keywords": ["y"]},
    ])
    with pytest.raises(CorpusError, match="duplicate document id 'a'"):
        load_corpus(p)


def test_unreadable_file(tmp_path):
    with pytest.raises(CorpusError, match="cannot read"):
        load_corpus(tmp_path / "missing.jsonl")


def test_csv_format(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("id,title,keywords,published,url\n"
                 "a,Alpha,EU|Greece|eu,2014-03-01T10:00:00Z,http://x/a\n"
                 "b,Beta,football,,\n")
    corpus = load_corpus(p, "csv")
    assert corpus.ids == ["a", "b"]
    assert corpus[0].keywords == {"eu", "greece"}
    assert corpus[0].published == datetime(2014, 3, 1, 10, tzinfo=timezone.utc)
    assert corpus[1].published is None and corpus[1].url is None


@pytest.mark.parametrize("fmt", ["jsonl", "csv"])
def test_reload_of_own_output_is_identity(tmp_path, fmt):
    corpus = load_corpus(bundled_corpus_path())
    out = tmp_path / f"again.{fmt}"
    dump_corpus(corpus, out)
    assert load_corpus(out) == corpus


keyword = st.text(alphabet="abcXYZé ", min_size=1, max_size=6).filter(lambda s: s.strip())
document = st.builds(
    Document,
    id=st.text(alphabet="abcdef0123", min_size=1, max_size=5),
    title=st.text(alphabet="ab ,\"'é|\n", max_size=10),
    keywords=st.frozensets(keyword, min_size=1, max_size=4),
    published=st.one_of(st.none(), st.datetimes(
        min_value=datetime(2000, 1, 1), max_value=datetime(2030, 1, 1),
        timezones=st.just(timezone.utc)).map(lambda d: d.replace(microsecond=0))),
)


@settings(max_examples=50, deadline=None)
@given(st.lists(document, max_size=6, unique_by=lambda d: d.id))
def test_serialization_round_trip_property(tmp_path_factory, docs):
    docs = [d for d in docs if d.keywords and "|" not in "".join(d.keywords)]
    corpus = build_corpus(docs)
    for fmt in ("jsonl", "csv"):
        p = tmp_path_factory.mktemp("rt") / f"c.{fmt}"
        dump_corpus(corpus, p)
        assert load_corpus(p) == corpus


def ten_docs_over_three_days():
    base = datetime(2014, 3, 1, tzinfo=timezone.utc)
    hours = [1, 5, 23, 24, 30, 40, 47, 48, 60, 70]  # 3 on day 1, 4 on day 2, 3 on day 3
    return build_corpus([
        Document(f"n{i}", "", frozenset({"k"}), base + timedelta(hours=h))
        for i, h in enumerate(hours)
    ])


def test_window_covering_everything_is_identity():
    corpus = ten_docs_over_three_days()
    assert window_corpus(corpus, "2014-01-01", "2015-01-01") == corpus


def test_empty_window():
    corpus = ten_docs_over_three_days()
    assert len(window_corpus(corpus, "2014-03-02", "2014-03-02")) == 0


def test_one_day_window_matches_hand_count():
    corpus = ten_docs_over_three_days()
    assert window_corpus(corpus, "2014-03-02", "2014-03-03").ids == ["n3", "n4", "n5", "n6"]
    assert len(window_corpus(corpus, "2014-03-01", "2014-03-02")) == 3
    assert len(window_corpus(corpus, "2014-03-03", "2014-03-04")) == 3


def test_inverted_window_is_an_error():
    with pytest.raises(CorpusError, match="inverted"):
        window_corpus(ten_docs_over_three_days(), "2014-03-03", "2014-03-01")


def test_window_excludes_undated_and_keeps_order():
    dated = ten_docs_over_three_days()
    undated = Document("u", "", frozenset({"k"}))
    corpus = Corpus(dated.documents[:5] + (undated,) + dated.documents[5:])
    lo = min(d.published for d in dated)
    hi = max(d.published for d in dated) + timedelta(microseconds=1)
    out = window_corpus(corpus, lo, hi)
    assert out == dated
    ids = corpus.ids
    positions = [ids.index(i) for i in out.ids]
    assert positions == sorted(positions)


def test_bundled_fixture_window_has_nine_documents():
    corpus = load_corpus(bundled_corpus_path())
    assert len(corpus) == 20
    assert len(window_corpus(corpus, "2014-03-01", "2014-03-08")) == 9
