"""Bottom-up output indicators from publications, staff rosters and journal impact factors.

Author tokens are linked to roster entries, publications are credited to
(university, disciplinary area) units, and three outputs are computed per
unit and year:

* PU, publications with at least one author from the unit;
* PC, sum over those publications of (unit authors / total authors);
* SS, sum over those publications of the journal's category-normalised IF.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dea import DEFAULT_STAFF_THRESHOLD, DmuPanel, InputBundle, OutputBundle, natural_key
from .errors import (
    EmptyPeriod,
    InvalidPolicy,
    MalformedRecord,
    MissingAuthorCount,
    MissingJournal,
    ZeroCategoryMean,
)

RANKS = ("FP", "AP", "RF")
UDAS = range(1, 10)

UnitKey = tuple[str, int]  # (university_id, uda)


class HomonymPolicy(str, enum.Enum):
    REJECT = "reject"
    SPLIT_EQUALLY = "split_equally"
    FIRST_BY_ID = "first_by_id"


@dataclass(frozen=True)
class StaffMember:
    staff_id: str
    last_name: str
    first_initial: str
    university_id: str
    uda: int
    rank: str
    year: int

    def __post_init__(self):
        if self.rank not in RANKS:
            raise MalformedRecord(f"staff {self.staff_id}: rank must be one of {RANKS}, got {self.rank!r}")
        if self.uda not in UDAS:
            raise MalformedRecord(f"staff {self.staff_id}: uda must be 1-9, got {self.uda}")
        if len(self.first_initial) != 1 or not self.first_initial.isalpha():
            raise MalformedRecord(f"staff {self.staff_id}: first_initial must be a single letter")
        if not self.last_name.strip():
            raise MalformedRecord(f"staff {self.staff_id}: empty last name")


@dataclass(frozen=True)
class PublicationRecord:
    pub_id: str
    year: int
    journal_id: str
    author_tokens: tuple[tuple[str, str], ...]
    claimed_universities: tuple[str, ...]
    total_author_count: int | None

    def __post_init__(self):
        if not self.claimed_universities:
            raise MalformedRecord(f"publication {self.pub_id}: no claimed universities")
        if self.total_author_count is not None and self.total_author_count < 1:
            raise MalformedRecord(f"publication {self.pub_id}: total_author_count must be >= 1")


@dataclass(frozen=True)
class JournalRecord:
    journal_id: str
    category: str
    impact_factor: float

    def __post_init__(self):
        if not self.category:
            raise MalformedRecord(f"journal {self.journal_id}: empty category")
        if not (self.impact_factor >= 0):
            raise MalformedRecord(f"journal {self.journal_id}: impact factor must be >= 0")


@dataclass(frozen=True)
class Attribution:
    pub_id: str
    staff_id: str
    university_id: str
    uda: int
    credit_share: float = 1.0


@dataclass(frozen=True)
class NormalizedIF:
    journal_id: str
    value: float


@dataclass
class AmbiguityReport:
    policy: HomonymPolicy
    ambiguous: list[dict] = field(default_factory=list)
    unattributed_publications: list[str] = field(default_factory=list)
    unmatched_tokens: int = 0

    def to_dict(self) -> dict:
        return {
            "policy": self.policy.value,
            "ambiguous": self.ambiguous,
            "unattributed_publications": self.unattributed_publications,
            "unmatched_tokens": self.unmatched_tokens,
        }


def _norm(name: str) -> str:
    return name.strip().casefold()


def match_authors(
    publications: Iterable[PublicationRecord],
    roster: Iterable[StaffMember],
    policy: HomonymPolicy | str = HomonymPolicy.REJECT,
) -> tuple[list[Attribution], AmbiguityReport]:
    """Link publication author tokens to roster entries.

    A token matches a staff member when last name (case-insensitive) and
    initial agree, the member's university is among the publication's claimed
    universities, and the roster year equals the publication year. Tokens with
    several candidates are resolved by ``policy``.
    """
    try:
        policy = HomonymPolicy(policy)
    except ValueError:
        raise InvalidPolicy(
            f"unknown homonym policy {policy!r}; expected one of "
            f"{[p.value for p in HomonymPolicy]}"
        ) from None

    index: dict[tuple[str, str, int], list[StaffMember]] = defaultdict(list)
    for s in roster:
        index[(_norm(s.last_name), _norm(s.first_initial), s.year)].append(s)
    for members in index.values():
        members.sort(key=lambda s: natural_key(s.staff_id))

    report = AmbiguityReport(policy)
    credits: dict[tuple[str, str], float] = {}
    owners: dict[tuple[str, str], StaffMember] = {}

    for pub in sorted(publications, key=lambda p: natural_key(p.pub_id)):
        claimed = set(pub.claimed_universities)
        attributed = False
        for last, initial in pub.author_tokens:
            candidates = [
                s
                for s in index.get((_norm(last), _norm(initial), pub.year), ())
                if s.university_id in claimed
            ]
            if not candidates:
                report.unmatched_tokens += 1
                continue
            if len(candidates) == 1:
                chosen = [(candidates[0], 1.0)]
            else:
                entry = {
                    "pub_id": pub.pub_id,
                    "token": f"{last},{initial}",
                    "candidates": [s.staff_id for s in candidates],
                    "resolution": policy.value,
                }
                report.ambiguous.append(entry)
                if policy is HomonymPolicy.REJECT:
                    chosen = []
                elif policy is HomonymPolicy.SPLIT_EQUALLY:
                    share = 1.0 / len(candidates)
                    chosen = [(s, share) for s in candidates]
                else:
                    chosen = [(candidates[0], 1.0)]
                    entry["chosen"] = candidates[0].staff_id
            for s, share in chosen:
                key = (pub.pub_id, s.staff_id)
                # a repeated token cannot credit one person more than once
                credits[key] = min(1.0, credits.get(key, 0.0) + share)
                owners[key] = s
                attributed = True
        if not attributed:
            report.unattributed_publications.append(pub.pub_id)

    attributions = [
        Attribution(pub_id, staff_id, owners[(pub_id, staff_id)].university_id,
                    owners[(pub_id, staff_id)].uda, share)
        for (pub_id, staff_id), share in credits.items()
    ]
    return attributions, report


def normalize_impact_factors(journals: Iterable[JournalRecord]) -> dict[str, NormalizedIF]:
    by_cat: dict[str, list[JournalRecord]] = defaultdict(list)
    for j in journals:
        by_cat[j.category].append(j)
    out: dict[str, NormalizedIF] = {}
    for cat in sorted(by_cat, key=natural_key):
        members = by_cat[cat]
        mean = float(np.mean([j.impact_factor for j in members]))
        if mean <= 0:
            raise ZeroCategoryMean(f"category {cat!r} has mean impact factor 0")
        for j in members:
            out[j.journal_id] = NormalizedIF(j.journal_id, j.impact_factor / mean)
    return out


def compute_outputs(
    attributions: Iterable[Attribution],
    publications: Iterable[PublicationRecord],
    normalized_if: Mapping[str, NormalizedIF],
    year: int | None = None,
) -> dict[UnitKey, OutputBundle]:
    """PU, PC and SS per (university, uda) for publications of ``year`` (all years if None)."""
    pubs = {p.pub_id: p for p in publications}
    share_by_unit: dict[str, dict[UnitKey, float]] = defaultdict(lambda: defaultdict(float))
    for a in attributions:
        if a.pub_id not in pubs:
            raise MalformedRecord(f"attribution references unknown publication {a.pub_id!r}")
        share_by_unit[a.pub_id][(a.university_id, a.uda)] += a.credit_share

    pu: dict[UnitKey, float] = defaultdict(float)
    pc: dict[UnitKey, float] = defaultdict(float)
    ss: dict[UnitKey, float] = defaultdict(float)
    for pub_id in sorted(share_by_unit, key=natural_key):
        pub = pubs[pub_id]
        if year is not None and pub.year != year:
            continue
        if pub.total_author_count is None:
            raise MissingAuthorCount(f"publication {pub_id!r} has no total author count")
        if pub.journal_id not in normalized_if:
            raise MissingJournal(f"publication {pub_id!r} cites journal {pub.journal_id!r} with no impact factor")
        c = pub.total_author_count
        impact = normalized_if[pub.journal_id].value
        for unit, b in sorted(share_by_unit[pub_id].items(), key=lambda kv: (natural_key(kv[0][0]), kv[0][1])):
            if b > c + 1e-12:
                raise MalformedRecord(
                    f"publication {pub_id!r}: {b:g} attributed authors exceed total count {c}"
                )
            pu[unit] += 1.0
            pc[unit] += b / c
            ss[unit] += impact
    return {u: OutputBundle(pu[u], pc[u], ss[u]) for u in sorted(pu, key=lambda u: (natural_key(u[0]), u[1]))}


def staff_counts(roster: Iterable[StaffMember], year: int) -> dict[UnitKey, InputBundle]:
    counts: dict[UnitKey, list[float]] = defaultdict(lambda: [0.0, 0.0, 0.0])
    for s in roster:
        if s.year == year:
            counts[(s.university_id, s.uda)][RANKS.index(s.rank)] += 1.0
    return {u: InputBundle(*v) for u, v in counts.items()}


def average_over_period(
    yearly_inputs: Mapping[int, Mapping[UnitKey, Sequence[float]]],
    yearly_outputs: Mapping[int, Mapping[UnitKey, Sequence[float]]],
    years: Sequence[int],
    min_staff_threshold: float = DEFAULT_STAFF_THRESHOLD,
) -> dict[int, DmuPanel]:
    """Average inputs and outputs over ``years``; one panel per disciplinary area.

    A unit missing from a year contributes zeros for that year, so the
    divisor is always ``len(years)``.
    """
    years = list(dict.fromkeys(years))
    if not years:
        raise EmptyPeriod("at least one year is required")
    units: set[UnitKey] = set()
    for y in years:
        units.update(yearly_inputs.get(y, {}))
        units.update(yearly_outputs.get(y, {}))
    sums: dict[UnitKey, np.ndarray] = {u: np.zeros(6) for u in units}
    for y in years:
        for u, v in yearly_inputs.get(y, {}).items():
            sums[u][:3] += np.asarray(v, dtype=float)
        for u, v in yearly_outputs.get(y, {}).items():
            sums[u][3:] += np.asarray(v, dtype=float)

    by_uda: dict[int, list[tuple[str, np.ndarray]]] = defaultdict(list)
    for (uni, uda), total in sums.items():
        by_uda[uda].append((uni, total / len(years)))
    panels = {}
    for uda in sorted(by_uda):
        rows = sorted(by_uda[uda], key=lambda r: natural_key(r[0]))
        panels[uda] = DmuPanel(
            uda,
            tuple(r[0] for r in rows),
            np.array([r[1][:3] for r in rows]),
            np.array([r[1][3:] for r in rows]),
            min_staff_threshold,
        )
    return panels


def build_panels(
    roster: Sequence[StaffMember],
    publications: Sequence[PublicationRecord],
    journals: Sequence[JournalRecord],
    years: Sequence[int],
    policy: HomonymPolicy | str = HomonymPolicy.REJECT,
    min_staff_threshold: float = DEFAULT_STAFF_THRESHOLD,
) -> tuple[dict[int, DmuPanel], AmbiguityReport]:
    """Full bibliometric chain: matching, IF normalisation, yearly outputs, period averages."""
    year_set = set(years)
    in_period = [p for p in publications if p.year in year_set]
    attributions, report = match_authors(in_period, roster, policy)
    nif = normalize_impact_factors(journals)
    yearly_outputs = {y: compute_outputs(attributions, in_period, nif, y) for y in years}
    yearly_inputs = {y: staff_counts(roster, y) for y in years}
    return average_over_period(yearly_inputs, yearly_outputs, years, min_staff_threshold), report
