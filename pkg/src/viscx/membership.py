"""Fuzzy membership of concepts in the visual content.

Two membership functions score how likely a lattice concept describes the
content: one anchored on a contextual concept with its impact, one on a
visual semantic concept with its recognition probability. Evidence is
propagated unchanged to more generic concepts and reinforced (impact plus
normalized chain length, clamped at 1) toward more specific ones;
unrelated concepts score 0. Per-document evidence is folded with a
configurable t-conorm into a membership table over the concept universe.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .errors import UnknownConceptError, ViscxError
from .taxonomy import SemanticLattice, SemRelation


class TConormKind(Enum):
    MAX = "max"
    PROBABILISTIC_SUM = "psum"
    BOUNDED_SUM = "bsum"

    @classmethod
    def from_name(cls, name: str) -> "TConormKind":
        for kind in cls:
            if kind.value == name:
                return kind
        raise ViscxError(f"unknown t-conorm {name!r} (use max|psum|bsum)")


def _check_unit(value: float, what: str) -> None:
    if not (0.0 <= value <= 1.0):
        raise ViscxError(f"{what} out of [0,1]: {value!r}")


def tconorm(kind: TConormKind, a: float, b: float) -> float:
    """Apply one of the three supported t-conorms; inputs must lie in
    [0,1], the identity element is 0."""
    _check_unit(a, "t-conorm operand")
    _check_unit(b, "t-conorm operand")
    if kind is TConormKind.MAX:
        return a if a >= b else b
    if kind is TConormKind.PROBABILISTIC_SUM:
        return a + b - a * b
    return min(a + b, 1.0)


def _membership(c: str, anchor: str, value: float,
                lattice: SemanticLattice) -> float:
    rel = lattice.relation(c, anchor)
    if rel is SemRelation.EQUAL or rel is SemRelation.GENERIC:
        return value
    if rel is SemRelation.SPECIFIC:
        return min(value + lattice.path_length_norm(anchor, c), 1.0)
    return 0.0


def mu_cx(c: str, cx: str, imp: float, lattice: SemanticLattice) -> float:
    """Likelihood that concept c describes a visual entity also described
    by the contextual concept cx carrying impact imp."""
    _check_unit(imp, "impact")
    return _membership(c, cx, imp, lattice)


def mu_vsc(c: str, vsc: str, r: float, lattice: SemanticLattice) -> float:
    """Likelihood that concept c describes the content indexed by the
    visual semantic concept vsc recognized with probability r."""
    _check_unit(r, "recognition probability")
    return _membership(c, vsc, r, lattice)


@dataclass(frozen=True)
class MembershipTable:
    """Aggregated likelihoods over the document's concept universe:
    the visual-evidence column, the context-evidence column, and their
    t-conorm combination."""

    universe: tuple[str, ...]
    mu_tot_vis: Mapping[str, float]
    mu_tot_cx: Mapping[str, float]
    mu_tot: Mapping[str, float]

    def _get(self, table: Mapping[str, float], concept: str) -> float:
        try:
            return table[concept]
        except KeyError:
            raise UnknownConceptError(
                f"concept {concept!r} missing from membership table") from None

    def total(self, concept: str) -> float:
        return self._get(self.mu_tot, concept)

    def vis_side(self, concept: str) -> float:
        return self._get(self.mu_tot_vis, concept)

    def cx_side(self, concept: str) -> float:
        return self._get(self.mu_tot_cx, concept)


def aggregate_mu_tot(universe: Sequence[str],
                     vis_concepts: Sequence[tuple[str, float]],
                     cx_concepts: Sequence[tuple[str, float]],
                     lattice: SemanticLattice,
                     kind: TConormKind = TConormKind.PROBABILISTIC_SUM
                     ) -> MembershipTable:
    """Fold the two membership functions over the document evidence.

    For every universe concept the visual column folds mu_vsc over
    `vis_concepts` and the context column folds mu_cx over `cx_concepts`
    (left to right, identity 0); the combined value is their t-conorm.
    """
    ids: list[str] = []
    seen: set[str] = set()
    for token in universe:
        cid = lattice.require(token)
        if cid not in seen:
            seen.add(cid)
            ids.append(cid)
    vis_pairs = [(lattice.require(vsc), r) for vsc, r in vis_concepts]
    cx_pairs = [(lattice.require(cx), imp) for cx, imp in cx_concepts]

    vis_col: dict[str, float] = {}
    cx_col: dict[str, float] = {}
    tot_col: dict[str, float] = {}
    for cid in ids:
        acc_vis = 0.0
        for vsc, r in vis_pairs:
            acc_vis = tconorm(kind, acc_vis, mu_vsc(cid, vsc, r, lattice))
        acc_cx = 0.0
        for cx, imp in cx_pairs:
            acc_cx = tconorm(kind, acc_cx, mu_cx(cid, cx, imp, lattice))
        vis_col[cid] = acc_vis
        cx_col[cid] = acc_cx
        tot_col[cid] = tconorm(kind, acc_vis, acc_cx)
    return MembershipTable(tuple(ids), vis_col, cx_col, tot_col)
