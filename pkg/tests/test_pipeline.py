from viscx import PipelineConfig, VisRecord
from viscx.context import AreaKind, ExtractionArea, tokenize
from viscx.pipeline import enrich_document, pair_corpus
from viscx.store import IndexRecord


def record_with(alt_text=None, vsc="flower", r=0.7):
    areas = ()
    if alt_text is not None:
        areas = (ExtractionArea(AreaKind.ALT_ATTRIBUTE, tokenize(alt_text),
                                0.9, alt_text),)
    return IndexRecord("doc", "doc.html", "doc.vis", areas,
                       (VisRecord("vo1", vsc, r, colors={"red": 0.5}),))


def test_enrich_without_context_keeps_records(base_lattice):
    enriched = enrich_document(record_with(None), base_lattice,
                               PipelineConfig())
    assert enriched.contextual == ()
    assert enriched.terms == ()
    e = enriched.enriched[0]
    assert e.vsc == "flower" and e.original_vsc == "flower"
    assert e.provenance.decision == "kept"
    # with no context the membership value is the visual evidence alone
    assert e.final_mu == 0.7


def test_enrich_specializes_from_alt(base_lattice):
    enriched = enrich_document(record_with("red roses"), base_lattice,
                               PipelineConfig())
    e = enriched.enriched[0]
    assert e.vsc == "rose" and e.original_vsc == "flower"
    assert e.provenance.decision == "replaced"
    assert any("replaced" in line for line in enriched.log)


def test_enrich_unknown_vsc_left_out_of_fusion(base_lattice):
    enriched = enrich_document(record_with("red roses", vsc="gizmo"),
                               base_lattice, PipelineConfig())
    e = enriched.enriched[0]
    assert e.vsc == "gizmo"
    assert e.provenance.branch == "unknown_concept"
    assert e.final_mu == 0.7
    assert any("not in taxonomy" in line for line in enriched.log)


def test_enrich_leaves_base_lattice_untouched(base_lattice):
    size = len(base_lattice)
    enrich_document(record_with("red roses"), base_lattice, PipelineConfig())
    assert len(base_lattice) == size


def test_enrich_is_pure_recompute(base_lattice):
    cfg = PipelineConfig()
    once = enrich_document(record_with("red roses"), base_lattice, cfg)
    twice = enrich_document(once, base_lattice, cfg)
    assert once == twice


def test_pair_corpus_warns_and_sorts(tmp_path, caplog):
    for stem in ("b", "a"):
        (tmp_path / f"{stem}.html").write_text("<html></html>")
        (tmp_path / f"{stem}.vis").write_text("")
    (tmp_path / "lonely.vis").write_text("")
    with caplog.at_level("WARNING"):
        pairs = pair_corpus(tmp_path)
    assert [stem for stem, _h, _v in pairs] == ["a", "b"]
    assert any("lonely" in r.message for r in caplog.records)
