"""The three pair-balancing strategies.

* exact brightness-difference matching with top-N selection,
* modality-grouping filter with shuffled multi-trial sampling,
* greedy unique assignment of four-image sets by descending set score.

All tie-breaks are lexicographic on pair ids so results are reproducible
across runs, platforms, and thread counts.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .datamodel import MatedPair, PairType
from .distsim import SetScoreStream
from .errors import InsufficientPairsError

__all__ = [
    "Strategy",
    "MatchedEntry",
    "MatchedPairList",
    "BalancedSubset",
    "BdmGrouping",
    "NON_UNI",
    "HAS_BI",
    "HAS_MULTI",
    "AssignedSet",
    "ScoreTable",
    "bvd_match",
    "take_top",
    "bdm_filter",
    "bdm_sample",
    "gather_scores",
    "bdiou_assign",
    "bdiou_top",
]


class Strategy(enum.Enum):
    BVD_TOP_N = "bvd_top_n"
    BDM_SAMPLE = "bdm_sample"
    BDIOU_TOP_N = "bdiou_top_n"


class MatchedEntry(NamedTuple):
    cf_pair_id: str
    af_pair_id: str
    bvd: float


class AssignedSet(NamedTuple):
    cf_pair_id: str
    af_pair_id: str
    bdiou: float


@dataclass(frozen=True)
class MatchedPairList:
    """Cross-cohort pairs matched on exactly equal brightness difference,
    sorted by that difference ascending; each pair id used at most once."""

    entries: tuple[MatchedEntry, ...]

    def __post_init__(self):
        cf_seen = set()
        af_seen = set()
        prev = -1.0
        for e in self.entries:
            if e.bvd < prev:
                raise ValueError("entries not sorted by bvd")
            prev = e.bvd
            if e.cf_pair_id in cf_seen or e.af_pair_id in af_seen:
                raise ValueError(f"pair id reused in matched list: {e}")
            cf_seen.add(e.cf_pair_id)
            af_seen.add(e.af_pair_id)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class BalancedSubset:
    """Equal-size per-cohort pair selections plus how they were chosen.

    ``factor_values`` carries the per-selection balancing factor (the
    matched brightness difference, or the set score) where the strategy
    has one; ``provenance`` records the strategy parameters.
    """

    strategy: Strategy
    n: int
    cf_pair_ids: tuple[str, ...]
    af_pair_ids: tuple[str, ...]
    provenance: dict = field(default_factory=dict)
    factor_values: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(self.cf_pair_ids) != self.n or len(self.af_pair_ids) != self.n:
            raise ValueError("id list lengths disagree with n")
        if len(set(self.cf_pair_ids)) != self.n or len(set(self.af_pair_ids)) != self.n:
            raise ValueError("duplicate pair id within a side")
        if self.factor_values is not None and len(self.factor_values) != self.n:
            raise ValueError("factor_values length disagrees with n")


@dataclass(frozen=True)
class BdmGrouping:
    """The pair types a modality-grouped experiment keeps."""

    allowed_types: frozenset[PairType]

    def __post_init__(self):
        if not self.allowed_types:
            raise ValueError("empty grouping")
        object.__setattr__(self, "allowed_types", frozenset(self.allowed_types))

    @classmethod
    def from_string(cls, text: str) -> "BdmGrouping":
        """Parse a comma list like ``bb,mm,bm`` (case-insensitive)."""
        names = [t.strip().upper() for t in text.split(",") if t.strip()]
        try:
            types = frozenset(PairType[n] for n in names)
        except KeyError as exc:
            raise ValueError(f"unknown pair type {exc.args[0]!r}") from None
        return cls(types)

    def __str__(self):
        # "+"-joined so the name stays a single field in delimited reports
        return "+".join(sorted(t.value for t in self.allowed_types))


# pairs with no Uni image
NON_UNI = BdmGrouping(frozenset({PairType.BB, PairType.MM, PairType.BM}))
# non-Uni pairs containing at least one Bi image
HAS_BI = BdmGrouping(frozenset({PairType.BB, PairType.BM}))
# non-Uni pairs containing at least one Multi image
HAS_MULTI = BdmGrouping(frozenset({PairType.MM, PairType.BM}))


def _require_bvd(pairs: Iterable[MatedPair], label: str) -> None:
    for p in pairs:
        if p.bvd is None:
            raise ValueError(f"{label} pair {p.pair_id!r} has no bvd annotation")


def bvd_match(cf: Sequence[MatedPair], af: Sequence[MatedPair]) -> MatchedPairList:
    """Match each cohort-A pair to an unused cohort-B pair of exactly equal
    brightness difference.

    Cohort-A pairs are processed in ascending (bvd, pair_id) order; each
    consumes the lexicographically first unused cohort-B pair with the same
    bvd.  Unmatchable pairs are skipped.  Equality is exact: bvd values are
    medians of integer pixels, hence exact multiples of 0.5.
    """
    _require_bvd(cf, "cf")
    _require_bvd(af, "af")
    af_buckets: dict[float, deque[str]] = {}
    for p in sorted(af, key=lambda p: (p.bvd, p.pair_id)):
        af_buckets.setdefault(p.bvd, deque()).append(p.pair_id)
    entries = []
    for p in sorted(cf, key=lambda p: (p.bvd, p.pair_id)):
        bucket = af_buckets.get(p.bvd)
        if bucket:
            entries.append(MatchedEntry(p.pair_id, bucket.popleft(), p.bvd))
    return MatchedPairList(entries=tuple(entries))


def take_top(matched: MatchedPairList, n: int) -> BalancedSubset:
    """First ``n`` matched entries, i.e. the n lowest-difference matches."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > len(matched):
        raise InsufficientPairsError(n, len(matched), side="matched")
    head = matched.entries[:n]
    return BalancedSubset(
        strategy=Strategy.BVD_TOP_N,
        n=n,
        cf_pair_ids=tuple(e.cf_pair_id for e in head),
        af_pair_ids=tuple(e.af_pair_id for e in head),
        provenance={"n": n, "max_bvd": head[-1].bvd},
        factor_values=tuple(e.bvd for e in head),
    )


def bdm_filter(pairs: Sequence[MatedPair], g: BdmGrouping) -> list[MatedPair]:
    """Keep pairs whose pair type is in the grouping, preserving order."""
    for p in pairs:
        if p.pair_type is None:
            raise ValueError(f"pair {p.pair_id!r} has no pair_type annotation")
    return [p for p in pairs if p.pair_type in g.allowed_types]


def bdm_sample(
    cf_filtered: Sequence[MatedPair],
    af_filtered: Sequence[MatedPair],
    n: int,
    trials: int = 10,
    seed: int = 0,
    grouping: BdmGrouping | None = None,
) -> list[BalancedSubset]:
    """Shuffle-and-take-n from each cohort's filtered pairs, once per trial.

    Trial t shuffles with an independent PRNG substream derived from
    (seed, t), cohort A drawn before cohort B, so every trial is
    reproducible in isolation.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    avail = min(len(cf_filtered), len(af_filtered))
    if n > avail:
        raise InsufficientPairsError(
            n, avail, side=f"cf={len(cf_filtered)}, af={len(af_filtered)}"
        )
    out = []
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        cf_take = [cf_filtered[i].pair_id for i in rng.permutation(len(cf_filtered))[:n]]
        af_take = [af_filtered[i].pair_id for i in rng.permutation(len(af_filtered))[:n]]
        prov = {"seed": seed, "trial": t, "trials": trials}
        if grouping is not None:
            prov["grouping"] = str(grouping)
        out.append(
            BalancedSubset(
                strategy=Strategy.BDM_SAMPLE,
                n=n,
                cf_pair_ids=tuple(cf_take),
                af_pair_ids=tuple(af_take),
                provenance=prov,
            )
        )
    return out


def _lex_ranks(ids: Sequence[str]) -> np.ndarray:
    """rank[i] = position of ids[i] in lexicographic order."""
    order = sorted(range(len(ids)), key=lambda i: ids[i])
    ranks = np.empty(len(ids), dtype=np.int64)
    for r, i in enumerate(order):
        ranks[i] = r
    return ranks


class ScoreTable(NamedTuple):
    """Kept set scores collected into flat arrays.

    Row ``k`` scores the set pairing ``cf_pair_ids[ci[k]]`` with
    ``af_pair_ids[ai[k]]`` at ``bdiou[k]``.
    """

    cf_pair_ids: tuple
    af_pair_ids: tuple
    ci: np.ndarray
    ai: np.ndarray
    bdiou: np.ndarray


def gather_scores(stream: SetScoreStream) -> ScoreTable:
    """Run the full scan once and keep the surviving sets as arrays."""
    cf_ids = tuple(p.pair_id for p in stream.cf_pairs)
    af_ids = tuple(p.pair_id for p in stream.af_pairs)
    ci_parts, ai_parts, bd_parts = [], [], []
    for blk in stream.blocks():
        ci, ai = np.nonzero(blk.keep)
        if ci.size == 0:
            continue
        ci_parts.append(ci + blk.cf_offset)
        ai_parts.append(ai)
        bd_parts.append(blk.bdiou[ci, ai])
    if not ci_parts:
        idx = np.empty(0, dtype=np.int64)
        return ScoreTable(cf_ids, af_ids, idx, idx.copy(), np.empty(0))
    return ScoreTable(
        cf_ids,
        af_ids,
        np.concatenate(ci_parts),
        np.concatenate(ai_parts),
        np.concatenate(bd_parts),
    )


def bdiou_assign(set_scores) -> list[AssignedSet]:
    """Greedily accept sets by descending score with per-side uniqueness.

    Sets are visited from high to low bdiou (ties broken by cf pair id,
    then af pair id); a set is accepted iff neither of its pairs was
    already taken.  Returns accepted sets in acceptance order.  Accepts a
    :class:`SetScoreStream`, a pre-collected :class:`ScoreTable` (array
    fast path), or any iterable of :class:`SetScore`.
    """
    if isinstance(set_scores, SetScoreStream):
        return _assign_from_table(gather_scores(set_scores))
    if isinstance(set_scores, ScoreTable):
        return _assign_from_table(set_scores)
    scores = list(set_scores)
    cf_ids = sorted({s.cf_pair_id for s in scores})
    af_ids = sorted({s.af_pair_id for s in scores})
    scores.sort(key=lambda s: (-s.bdiou, s.cf_pair_id, s.af_pair_id))
    used_cf: set[str] = set()
    used_af: set[str] = set()
    cap = min(len(cf_ids), len(af_ids))
    out: list[AssignedSet] = []
    for s in scores:
        if s.cf_pair_id in used_cf or s.af_pair_id in used_af:
            continue
        used_cf.add(s.cf_pair_id)
        used_af.add(s.af_pair_id)
        out.append(AssignedSet(s.cf_pair_id, s.af_pair_id, s.bdiou))
        if len(out) == cap:
            break
    return out


def _assign_from_table(table: ScoreTable) -> list[AssignedSet]:
    if table.bdiou.size == 0:
        return []
    cf_rank = _lex_ranks(table.cf_pair_ids)
    af_rank = _lex_ranks(table.af_pair_ids)
    # lexsort is stable with the last key primary: bdiou desc, then ids
    order = np.lexsort(
        (af_rank[table.ai], cf_rank[table.ci], -table.bdiou)
    )
    accepted = _kernels.greedy_unique(
        table.ci[order],
        table.ai[order],
        len(table.cf_pair_ids),
        len(table.af_pair_ids),
    )
    take = order[accepted]
    return [
        AssignedSet(
            table.cf_pair_ids[table.ci[k]],
            table.af_pair_ids[table.ai[k]],
            float(table.bdiou[k]),
        )
        for k in take
    ]


def bdiou_top(assigned: Sequence[AssignedSet], n: int) -> BalancedSubset:
    """First ``n`` accepted sets, i.e. the n highest-score unique sets."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > len(assigned):
        raise InsufficientPairsError(n, len(assigned), side="assigned sets")
    head = list(assigned[:n])
    return BalancedSubset(
        strategy=Strategy.BDIOU_TOP_N,
        n=n,
        cf_pair_ids=tuple(a.cf_pair_id for a in head),
        af_pair_ids=tuple(a.af_pair_id for a in head),
        provenance={"n": n, "min_bdiou": head[-1].bdiou},
        factor_values=tuple(a.bdiou for a in head),
    )
