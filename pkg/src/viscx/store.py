"""Persisted index store: one JSON record per line, preceded by a meta
line carrying the taxonomy path and a config snapshot so later commands
can run without re-supplying them.

Records are written sorted by document id with sorted keys, so the same
store content always produces the same bytes and load(save(store)) is the
identity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .context import AreaKind, ContextualConcept, ExtractionArea, SyntacticTerm
from .errors import StoreError
from .fusion import EnrichedVisRecord, FusionProvenance
from .vis import VisRecord

STORE_VERSION = 1


@dataclass(frozen=True)
class StoreMeta:
    taxonomy: str | None = None
    config: Mapping | None = None
    version: int = STORE_VERSION


@dataclass(frozen=True)
class IndexRecord:
    """Everything the pipeline knows about one document."""

    doc_id: str
    html_path: str
    vis_path: str
    areas: tuple[ExtractionArea, ...]
    vis_records: tuple[VisRecord, ...]
    contextual: tuple[ContextualConcept, ...] | None = None
    terms: tuple[SyntacticTerm, ...] | None = None
    enriched: tuple[EnrichedVisRecord, ...] | None = None
    log: tuple[str, ...] = ()


@dataclass
class IndexStore:
    meta: StoreMeta = field(default_factory=StoreMeta)
    records: dict[str, IndexRecord] = field(default_factory=dict)

    def add(self, record: IndexRecord) -> None:
        if record.doc_id in self.records:
            raise StoreError(f"duplicate document id {record.doc_id!r}")
        self.records[record.doc_id] = record


# -- encoding -------------------------------------------------------------


def _pairs_out(pairs: frozenset[tuple[str, float]]) -> list[list]:
    return [[name, imp] for name, imp in sorted(pairs)]


def _pairs_in(data) -> frozenset[tuple[str, float]]:
    return frozenset((name, float(imp)) for name, imp in data)


def _area_out(area: ExtractionArea) -> dict:
    return {"kind": area.kind.value, "tokens": list(area.tokens),
            "impact": area.base_impact, "text": area.text}


def _area_in(data) -> ExtractionArea:
    return ExtractionArea(AreaKind(data["kind"]), tuple(data["tokens"]),
                          float(data["impact"]), data.get("text", ""))


def _vis_out(record: VisRecord) -> dict:
    return {"vo": record.vo_id, "vsc": record.vsc, "r": record.r_vsc,
            "colors": dict(sorted(record.colors.items())),
            "textures": dict(sorted(record.textures.items())),
            "spatial": sorted(list(pair) for pair in record.spatial)}


def _vis_in(data) -> VisRecord:
    return VisRecord(data["vo"], data["vsc"], float(data["r"]),
                     {k: float(v) for k, v in data["colors"].items()},
                     {k: float(v) for k, v in data["textures"].items()},
                     frozenset((rel, target) for rel, target in data["spatial"]))


def _term_out(term: SyntacticTerm) -> dict:
    return {"head": list(term.head) if term.head is not None else None,
            "colors": _pairs_out(term.colors),
            "textures": _pairs_out(term.textures),
            "spatials": _pairs_out(term.spatials)}


def _term_in(data) -> SyntacticTerm:
    head = data.get("head")
    return SyntacticTerm(
        (head[0], float(head[1])) if head is not None else None,
        _pairs_in(data["colors"]), _pairs_in(data["textures"]),
        _pairs_in(data["spatials"]))


def _cx_out(cx: ContextualConcept) -> dict:
    return {"cx": cx.cx, "imp": cx.imp, "area": cx.area_kind.value}


def _cx_in(data) -> ContextualConcept:
    return ContextualConcept(data["cx"], float(data["imp"]), AreaKind(data["area"]))


def _enriched_out(record: EnrichedVisRecord) -> dict:
    out = _vis_out(record)
    prov = record.provenance
    out.update({
        "original_vsc": record.original_vsc,
        "final_mu": record.final_mu,
        "provenance": None if prov is None else {
            "decision": prov.decision, "branch": prov.branch,
            "matched_head": prov.matched_head,
            "mu_vsc": prov.mu_vsc, "mu_cx": prov.mu_cx},
    })
    return out


def _enriched_in(data) -> EnrichedVisRecord:
    prov = data.get("provenance")
    return EnrichedVisRecord(
        vo_id=data["vo"], vsc=data["vsc"], r_vsc=float(data["r"]),
        colors={k: float(v) for k, v in data["colors"].items()},
        textures={k: float(v) for k, v in data["textures"].items()},
        spatial=frozenset((rel, target) for rel, target in data["spatial"]),
        original_vsc=data["original_vsc"], final_mu=float(data["final_mu"]),
        provenance=None if prov is None else FusionProvenance(
            prov["decision"], prov["branch"], prov["matched_head"],
            float(prov["mu_vsc"]),
            float(prov["mu_cx"]) if prov["mu_cx"] is not None else None))


def record_to_dict(record: IndexRecord) -> dict:
    return {
        "type": "record",
        "doc_id": record.doc_id,
        "html_path": record.html_path,
        "vis_path": record.vis_path,
        "areas": [_area_out(a) for a in record.areas],
        "vis_records": [_vis_out(r) for r in record.vis_records],
        "contextual": None if record.contextual is None
        else [_cx_out(c) for c in record.contextual],
        "terms": None if record.terms is None
        else [_term_out(t) for t in record.terms],
        "enriched": None if record.enriched is None
        else [_enriched_out(e) for e in record.enriched],
        "log": list(record.log),
    }


def record_from_dict(data: Mapping) -> IndexRecord:
    return IndexRecord(
        doc_id=data["doc_id"],
        html_path=data["html_path"],
        vis_path=data["vis_path"],
        areas=tuple(_area_in(a) for a in data["areas"]),
        vis_records=tuple(_vis_in(r) for r in data["vis_records"]),
        contextual=None if data["contextual"] is None
        else tuple(_cx_in(c) for c in data["contextual"]),
        terms=None if data["terms"] is None
        else tuple(_term_in(t) for t in data["terms"]),
        enriched=None if data["enriched"] is None
        else tuple(_enriched_in(e) for e in data["enriched"]),
        log=tuple(data.get("log", ())),
    )


def save_store(store: IndexStore, path: str | Path) -> None:
    lines = [json.dumps(
        {"type": "meta", "version": store.meta.version,
         "taxonomy": store.meta.taxonomy, "config": store.meta.config},
        sort_keys=True, separators=(",", ":"))]
    for doc_id in sorted(store.records):
        lines.append(json.dumps(record_to_dict(store.records[doc_id]),
                                sort_keys=True, separators=(",", ":")))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_store(path: str | Path) -> IndexStore:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise StoreError(f"cannot read index store {p}: {exc}") from None
    store = IndexStore()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StoreError(f"{p}:{lineno}: bad JSON: {exc}") from None
        kind = data.get("type")
        try:
            if kind == "meta":
                store.meta = StoreMeta(data.get("taxonomy"), data.get("config"),
                                       int(data.get("version", STORE_VERSION)))
            elif kind == "record":
                store.add(record_from_dict(data))
            else:
                raise StoreError(f"{p}:{lineno}: unknown line type {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise StoreError(f"{p}:{lineno}: malformed record: {exc}") from None
    return store
