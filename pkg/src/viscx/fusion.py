"""Similarity between syntactic terms and visual index structures,
best-correspondence selection, and the fusion that produces enriched
records.

Similarity adds three facet sums (one per vocabulary, each normalized by
the vocabulary size 11) to a semantic part: the lattice path similarity of
the two head concepts weighted by the sum of their aggregated membership
values. Fusion then either keeps the visual concept, replaces it with a
more specific contextual one, or corrects it wholesale when the membership
values disagree beyond a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .context import SyntacticTerm, term_vectors
from .errors import ViscxError
from .membership import MembershipTable
from .taxonomy import SemanticLattice, SemRelation
from .vis import VOCAB_SIZE, VisRecord, facet_vectors


class FacetKernel(Enum):
    MAX = "max"
    MIN = "min"
    PRODUCT = "product"

    @classmethod
    def from_name(cls, name: str) -> "FacetKernel":
        for kind in cls:
            if kind.value == name:
                return kind
        raise ViscxError(f"unknown facet kernel {name!r} (use max|min|product)")


_KERNELS = {
    FacetKernel.MAX: max,
    FacetKernel.MIN: min,
    FacetKernel.PRODUCT: lambda a, b: a * b,
}


@dataclass(frozen=True)
class FusionConfig:
    """Thresholds and knobs of the correspondence/fusion stage.

    `t_mu` bounds the membership difference still read as semantic
    correspondence, `t_sim` is the similarity floor below which a pair is
    dropped, and `literal` switches the no-correspondence branch to keep
    the lower-valued concept (the printed rule) instead of the higher one.
    """

    t_mu: float = 0.1
    t_sim: float = 0.05
    kernel: FacetKernel = FacetKernel.MAX
    literal: bool = False

    def __post_init__(self):
        if not (0.0 <= self.t_mu <= 1.0):
            raise ViscxError(f"t_mu out of [0,1]: {self.t_mu!r}")
        if self.t_sim < 0.0:
            raise ViscxError(f"t_sim must be >= 0: {self.t_sim!r}")


@dataclass(frozen=True)
class FusionProvenance:
    """Everything needed to reconstruct one fusion decision."""

    decision: str  # kept | replaced | corrected
    branch: str
    matched_head: str | None
    mu_vsc: float
    mu_cx: float | None


@dataclass(frozen=True)
class EnrichedVisRecord(VisRecord):
    """A VisRecord after fusion: possibly respecialized or corrected
    semantic concept, the fused membership value, and provenance."""

    original_vsc: str = ""
    final_mu: float = 0.0
    provenance: FusionProvenance | None = None


def _head_and_vectors(unit: SyntacticTerm | VisRecord):
    if isinstance(unit, SyntacticTerm):
        head = unit.head[0] if unit.head is not None else None
        return head, term_vectors(unit)
    return unit.vsc, facet_vectors(unit)


def structure_similarity(st: SyntacticTerm, unit: SyntacticTerm | VisRecord,
                         table: MembershipTable, lattice: SemanticLattice,
                         kernel: FacetKernel = FacetKernel.MAX) -> float:
    """Similarity of a syntactic term to a VIS record (or, for term-term
    scoring, to another syntactic term).

    Non-negative; each facet sum lies in [0,1], the semantic part is
    path-similarity times the sum of the two heads' membership values and
    is 0 when either side has no semantic head.
    """
    st_head = st.head[0] if st.head is not None else None
    st_vec = term_vectors(st)
    unit_head, unit_vec = _head_and_vectors(unit)
    k = _KERNELS[kernel]
    total = 0.0
    for a, b in ((st_vec.textures, unit_vec.textures),
                 (st_vec.spatials, unit_vec.spatials),
                 (st_vec.colors, unit_vec.colors)):
        total += sum(k(x, y) for x, y in zip(a, b)) / VOCAB_SIZE
    if st_head is not None and unit_head is not None:
        a = lattice.require(st_head)
        b = lattice.require(unit_head)
        total += lattice.path_sim_epsilon(a, b) * (table.total(b) + table.total(a))
    return total


@dataclass(frozen=True)
class SimilarityMatrix:
    """All term-to-record similarities for one document; rows are terms,
    columns are records. Row head impacts drive tie-breaking."""

    values: tuple[tuple[float, ...], ...]
    head_imps: tuple[float, ...]

    @property
    def n_terms(self) -> int:
        return len(self.values)

    @property
    def n_units(self) -> int:
        return len(self.values[0]) if self.values else 0


def build_similarity_matrix(terms: Sequence[SyntacticTerm],
                            units: Sequence[VisRecord | SyntacticTerm],
                            table: MembershipTable, lattice: SemanticLattice,
                            kernel: FacetKernel = FacetKernel.MAX) -> SimilarityMatrix:
    values = tuple(
        tuple(structure_similarity(st, unit, table, lattice, kernel) for unit in units)
        for st in terms)
    head_imps = tuple(st.head[1] if st.head is not None else 0.0 for st in terms)
    return SimilarityMatrix(values, head_imps)


@dataclass(frozen=True)
class CorrespondencePair:
    """A term/record pair achieving the best correspondence for that
    record's column; indexes are 0-based."""

    term_index: int
    vis_index: int
    sim: float


def best_correspondences(matrix: SimilarityMatrix,
                         config: FusionConfig) -> list[CorrespondencePair]:
    """Per record column, the argmax term with similarity at or above the
    floor. One term may win several columns; near-ties (within 1e-9) break
    toward the higher head impact, then the lower term index."""
    pairs: list[CorrespondencePair] = []
    for k in range(matrix.n_units):
        column = [matrix.values[i][k] for i in range(matrix.n_terms)]
        if not column:
            continue
        best = max(column)
        if best < config.t_sim:
            continue
        floor = max(best - 1e-9, config.t_sim)
        candidates = [i for i, v in enumerate(column) if v >= floor]
        winner = min(candidates, key=lambda i: (-matrix.head_imps[i], i))
        pairs.append(CorrespondencePair(winner, k, column[winner]))
    return pairs


def _enrich(vis: VisRecord, vsc: str, final_mu: float,
            provenance: FusionProvenance) -> EnrichedVisRecord:
    return EnrichedVisRecord(
        vo_id=vis.vo_id, vsc=vsc, r_vsc=vis.r_vsc, colors=dict(vis.colors),
        textures=dict(vis.textures), spatial=vis.spatial,
        original_vsc=vis.vsc, final_mu=final_mu, provenance=provenance)


def keep_unmatched(vis: VisRecord, table: MembershipTable,
                   lattice: SemanticLattice) -> EnrichedVisRecord:
    """Pass a record through fusion unchanged (no correspondence found)."""
    mu_v = table.total(lattice.require(vis.vsc))
    return _enrich(vis, vis.vsc, mu_v,
                   FusionProvenance("kept", "unmatched", None, mu_v, None))


def fuse(pair: CorrespondencePair, vis: VisRecord, st: SyntacticTerm,
         table: MembershipTable, lattice: SemanticLattice,
         config: FusionConfig) -> EnrichedVisRecord:
    """Fuse one matched term into its record.

    Within the correspondence band (membership difference <= t_mu) the
    more specific of the two concepts is installed, never a more generic
    one, and unrelated concepts leave the record untouched. Outside the
    band the concept with the higher membership wins (or, in literal
    mode, the printed keep-if-negative-difference rule applies). The
    fused membership is always the max of the two values.
    """
    vsc = lattice.require(vis.vsc)
    mu_v = table.total(vsc)
    if st.head is None:
        return _enrich(vis, vis.vsc, mu_v,
                       FusionProvenance("kept", "headless", None, mu_v, None))
    cx = lattice.require(st.head[0])
    mu_c = table.total(cx)
    final_mu = max(mu_v, mu_c)

    if abs(mu_v - mu_c) <= config.t_mu:
        rel = lattice.relation(vsc, cx)
        if rel is SemRelation.GENERIC:
            decision, branch, new_vsc = "replaced", "correspondence_specialized", cx
        elif rel is SemRelation.UNRELATED:
            decision, branch, new_vsc = "kept", "correspondence_unrelated", vis.vsc
        else:
            decision, branch, new_vsc = "kept", "correspondence_kept", vis.vsc
    elif config.literal:
        if mu_v - mu_c < 0:
            decision, branch, new_vsc = "kept", "correction_literal_kept", vis.vsc
        else:
            decision, branch, new_vsc = "corrected", "correction_literal", cx
    elif mu_c > mu_v:
        decision, branch, new_vsc = "corrected", "correction_context", cx
    else:
        decision, branch, new_vsc = "kept", "correction_visual", vis.vsc

    return _enrich(vis, new_vsc, final_mu,
                   FusionProvenance(decision, branch, cx, mu_v, mu_c))


def enrich_records(records: Sequence[VisRecord], terms: Sequence[SyntacticTerm],
                   table: MembershipTable, lattice: SemanticLattice,
                   config: FusionConfig) -> tuple[list[EnrichedVisRecord],
                                                  list[CorrespondencePair]]:
    """Run the full correspondence-and-fusion stage for one document,
    returning enriched records in input order plus the matched pairs."""
    matrix = build_similarity_matrix(terms, records, table, lattice, config.kernel)
    pairs = best_correspondences(matrix, config)
    by_record = {pair.vis_index: pair for pair in pairs}
    enriched: list[EnrichedVisRecord] = []
    for k, record in enumerate(records):
        pair = by_record.get(k)
        if pair is None:
            enriched.append(keep_unmatched(record, table, lattice))
        else:
            enriched.append(
                fuse(pair, record, terms[pair.term_index], table, lattice, config))
    return enriched, pairs
