import pytest

from viscx.cli import main
from viscx.store import load_store

PAGES = {
    "d1": ('<html><body><img src="d1.jpg" alt="red roses in bloom">'
           '<p>These smooth roses grow near the fence.</p></body></html>',
           'vis vo1 { sem: flower@0.7; color: red=0.6; texture: uniform=0.8; spa: ; }\n'),
    "d2": ('<html><body><img src="d2.jpg" alt="a grey cathedral">'
           '<p>The old cathedral stands by the river.</p></body></html>',
           'vis vo1 { sem: building@0.75; color: grey=0.5; texture: bumpy=0.6; spa: ; }\n'),
    "d3": ('<html><body><img src="d3.jpg" alt="blue sky above the sea">'
           '<p>Holiday pictures.</p></body></html>',
           'vis vo1 { sem: sky@0.9; color: blue=0.8; texture: uniform=0.9; spa: ; }\n'),
}


@pytest.fixture()
def corpus(tmp_path):
    corpus_dir = tmp_path / "corpus"
    corpus_dir.mkdir()
    for stem, (html, vis) in PAGES.items():
        (corpus_dir / f"{stem}.html").write_text(html, encoding="utf-8")
        (corpus_dir / f"{stem}.vis").write_text(vis, encoding="utf-8")
    return corpus_dir


def test_ingest_and_enrich(corpus, tmp_path, capsys):
    index = tmp_path / "index.jsonl"
    assert main(["ingest", "--corpus", str(corpus), "--out", str(index)]) == 0
    store = load_store(index)
    assert sorted(store.records) == ["d1", "d2", "d3"]
    assert store.records["d1"].enriched is None

    assert main(["enrich", "--index", str(index)]) == 0
    store = load_store(index)
    enriched = store.records["d1"].enriched
    assert enriched is not None
    assert enriched[0].vsc == "rose"  # specialized from flower by the alt text
    assert store.records["d2"].enriched[0].vsc == "cathedral"


def test_ingest_skips_unpaired(corpus, tmp_path, capsys, caplog):
    (corpus / "orphan.html").write_text("<html></html>", encoding="utf-8")
    index = tmp_path / "index.jsonl"
    with caplog.at_level("WARNING"):
        assert main(["ingest", "--corpus", str(corpus), "--out", str(index)]) == 0
    assert any("orphan" in r.message for r in caplog.records)
    assert sorted(load_store(index).records) == ["d1", "d2", "d3"]


def test_ingest_skips_malformed_vis(corpus, tmp_path, caplog):
    (corpus / "bad.html").write_text('<img src="bad.jpg">', encoding="utf-8")
    (corpus / "bad.vis").write_text("vis oops {", encoding="utf-8")
    index = tmp_path / "index.jsonl"
    with caplog.at_level("WARNING"):
        assert main(["ingest", "--corpus", str(corpus), "--out", str(index)]) == 0
    assert any("malformed VIS" in r.message for r in caplog.records)
    assert sorted(load_store(index).records) == ["d1", "d2", "d3"]


def test_reingest_is_byte_identical(corpus, tmp_path):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    assert main(["ingest", "--corpus", str(corpus), "--out", str(a)]) == 0
    assert main(["ingest", "--corpus", str(corpus), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_enrich_is_idempotent(corpus, tmp_path):
    index = tmp_path / "index.jsonl"
    main(["ingest", "--corpus", str(corpus), "--out", str(index)])
    main(["enrich", "--index", str(index)])
    first = index.read_bytes()
    main(["enrich", "--index", str(index)])
    assert index.read_bytes() == first


def enriched_index(corpus, tmp_path):
    index = tmp_path / "index.jsonl"
    main(["ingest", "--corpus", str(corpus), "--out", str(index)])
    main(["enrich", "--index", str(index)])
    return index


def test_search_output_format(corpus, tmp_path, capsys):
    index = enriched_index(corpus, tmp_path)
    capsys.readouterr()
    assert main(["search", "--index", str(index), "--strategy", "vis+cx",
                 "--query", "Red Roses", "-k", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    rank_, doc_id, score = lines[0].split("\t")
    assert rank_ == "1" and doc_id == "d1"
    float(score)


def test_search_all_strategies(corpus, tmp_path, capsys):
    index = enriched_index(corpus, tmp_path)
    for strategy in ("vis", "cx", "vis+cx", "tfidf"):
        assert main(["search", "--index", str(index), "--strategy", strategy,
                     "--query", "grey cathedrals", "-k", "3"]) == 0
        out = capsys.readouterr().out
        assert "d2" in out, strategy


def test_search_unknown_strategy_is_usage_error(corpus, tmp_path, capsys):
    index = enriched_index(corpus, tmp_path)
    assert main(["search", "--index", str(index), "--strategy", "bogus",
                 "--query", "x"]) == 1


def test_search_unindexable_query_is_data_error(corpus, tmp_path, capsys):
    index = enriched_index(corpus, tmp_path)
    assert main(["search", "--index", str(index), "--strategy", "vis",
                 "--query", "zzz qqq"]) == 2
    assert "error" in capsys.readouterr().err


def test_search_empty_store(tmp_path, capsys):
    empty_dir = tmp_path / "empty"
    empty_dir.mkdir()
    index = tmp_path / "empty.jsonl"
    main(["ingest", "--corpus", str(empty_dir), "--out", str(index)])
    capsys.readouterr()
    assert main(["search", "--index", str(index), "--strategy", "tfidf",
                 "--query", "anything"]) == 0
    assert capsys.readouterr().out == ""


def test_missing_required_flag_is_usage_error(capsys):
    assert main(["search", "--strategy", "vis", "--query", "x"]) == 1


def test_eval_writes_reports(corpus, tmp_path, capsys):
    index = enriched_index(corpus, tmp_path)
    queries = tmp_path / "queries.tsv"
    queries.write_text("q1\tRed Roses\nq2\tBlue Sky\n", encoding="utf-8")
    qrels = tmp_path / "qrels.tsv"
    qrels.write_text("q1\td1\t2\nq1\td2\t0\nq2\td3\t2\nq2\tghost\t1\n",
                     encoding="utf-8")
    out_dir = tmp_path / "report"
    assert main(["eval", "--index", str(index), "--queries", str(queries),
                 "--qrels", str(qrels), "--out", str(out_dir)]) == 0
    summary = (out_dir / "summary.tsv").read_text()
    assert summary.startswith("strategy\tn\tmean_ndcg\n")
    # 4 strategies x 3 default cutoffs
    assert len(summary.strip().splitlines()) == 1 + 4 * 3
    per_query = (out_dir / "per_query.tsv").read_text()
    assert "q1" in per_query and "q2" in per_query
    stdout = capsys.readouterr().out
    assert "vis+cx" in stdout

    # second run is identical
    out2 = tmp_path / "report2"
    main(["eval", "--index", str(index), "--queries", str(queries),
          "--qrels", str(qrels), "--out", str(out2)])
    assert (out2 / "summary.tsv").read_text() == summary


def test_eval_missing_qrels_is_data_error(corpus, tmp_path, capsys):
    index = enriched_index(corpus, tmp_path)
    queries = tmp_path / "queries.tsv"
    queries.write_text("q1\tRed Roses\n", encoding="utf-8")
    assert main(["eval", "--index", str(index), "--queries", str(queries),
                 "--qrels", str(tmp_path / "missing.tsv"),
                 "--out", str(tmp_path / "r")]) == 2


def test_eval_malformed_qrels_is_data_error(corpus, tmp_path, capsys):
    index = enriched_index(corpus, tmp_path)
    queries = tmp_path / "queries.tsv"
    queries.write_text("q1\tRed Roses\n", encoding="utf-8")
    qrels = tmp_path / "qrels.tsv"
    qrels.write_text("q1\td1\tvery relevant\n", encoding="utf-8")
    assert main(["eval", "--index", str(index), "--queries", str(queries),
                 "--qrels", str(qrels), "--out", str(tmp_path / "r")]) == 2
    assert "grade must be an integer" in capsys.readouterr().err


def test_ingest_missing_corpus_is_data_error(tmp_path, capsys):
    assert main(["ingest", "--corpus", str(tmp_path / "nowhere"),
                 "--out", str(tmp_path / "x.jsonl")]) == 2


def test_search_unenriched_store_needs_enrich_for_cx(corpus, tmp_path, capsys):
    index = tmp_path / "index.jsonl"
    main(["ingest", "--corpus", str(corpus), "--out", str(index)])
    capsys.readouterr()
    for strategy in ("cx", "vis+cx"):
        assert main(["search", "--index", str(index), "--strategy", strategy,
                     "--query", "Red Roses"]) == 2
    assert "run enrich" in capsys.readouterr().err
    # vis and tfidf work straight off an ingested store
    assert main(["search", "--index", str(index), "--strategy", "vis",
                 "--query", "Red Roses"]) == 0
    assert main(["search", "--index", str(index), "--strategy", "tfidf",
                 "--query", "Red Roses"]) == 0


def test_config_file_roundtrip(corpus, tmp_path):
    config = tmp_path / "pipeline.cfg"
    config.write_text(
        "impact_alt = 0.8\nwindow = 300\ntconorm = max\nkernel = min\n"
        "t_mu = 0.2\nt_sim = 0.01\nfusion_literal = true\nndcg_n = 3,5\n",
        encoding="utf-8")
    index = tmp_path / "index.jsonl"
    assert main(["ingest", "--corpus", str(corpus), "--out", str(index),
                 "--config", str(config)]) == 0
    store = load_store(index)
    assert store.meta.config["impact_alt"] == 0.8
    assert store.meta.config["kernel"] == "min"
    assert store.meta.config["fusion_literal"] is True
    # enrich without --config picks the snapshot back up
    assert main(["enrich", "--index", str(index)]) == 0
    assert load_store(index).meta.config["kernel"] == "min"
