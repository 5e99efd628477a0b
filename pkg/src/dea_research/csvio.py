"""CSV ingestion and validation.

All readers expect UTF-8, a header row and comma separators (RFC 4180
quoting). Errors name the file and, where possible, the 1-based line.
"""

from __future__ import annotations

import csv
import hashlib
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .bibliometrics import JournalRecord, PublicationRecord, StaffMember
from .dea import DEFAULT_STAFF_THRESHOLD, INPUT_NAMES, OUTPUT_NAMES, DmuPanel, natural_key
from .errors import MalformedPanel, MalformedRecord, ParseError, ReferentialError, SchemaError

STAFF_COLUMNS = ("staff_id", "last_name", "first_initial", "university_id", "uda", "rank", "year")
PUBLICATION_COLUMNS = (
    "pub_id", "year", "journal_id", "total_author_count", "authors", "claimed_universities",
)
JOURNAL_COLUMNS = ("journal_id", "category", "impact_factor")
PANEL_COLUMNS = ("university_id", "uda", *INPUT_NAMES, *OUTPUT_NAMES)


@dataclass
class Dataset:
    roster: list[StaffMember]
    publications: list[PublicationRecord]
    journals: list[JournalRecord]


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _rows(path: str | Path, required: Sequence[str]) -> Iterator[tuple[int, dict[str, str]]]:
    path = str(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot open file: {exc.strerror}", path) from None
    with fh:
        reader = csv.DictReader(fh, strict=True)
        try:
            header = reader.fieldnames
            if header is None:
                raise SchemaError("missing header row", path, 1)
            missing = [c for c in required if c not in header]
            if missing:
                raise SchemaError(f"missing columns: {', '.join(missing)}", path, 1)
            for row in reader:
                line = reader.line_num
                if None in row or any(v is None for v in row.values()):
                    raise ParseError("wrong number of fields", path, line)
                yield line, {k: v.strip() for k, v in row.items()}
        except csv.Error as exc:
            raise ParseError(f"CSV syntax error: {exc}", path, reader.line_num) from None
        except UnicodeDecodeError:
            raise ParseError("file is not valid UTF-8", path) from None


def _field(row: dict[str, str], name: str, conv: Callable, path, line, optional=False):
    raw = row[name]
    if raw == "":
        if optional:
            return None
        raise SchemaError(f"empty value in column {name!r}", path, line)
    try:
        return conv(raw)
    except ValueError:
        raise ParseError(f"column {name!r}: cannot parse {raw!r}", path, line) from None


def _finite_float(raw: str) -> float:
    v = float(raw)
    if not np.isfinite(v):
        raise ValueError(raw)
    return v


def read_staff(path: str | Path) -> list[StaffMember]:
    out = []
    seen: dict[tuple[str, int], int] = {}
    for line, row in _rows(path, STAFF_COLUMNS):
        try:
            member = StaffMember(
                staff_id=_field(row, "staff_id", str, path, line),
                last_name=_field(row, "last_name", str, path, line),
                first_initial=_field(row, "first_initial", str, path, line),
                university_id=_field(row, "university_id", str, path, line),
                uda=_field(row, "uda", int, path, line),
                rank=_field(row, "rank", str.upper, path, line),
                year=_field(row, "year", int, path, line),
            )
        except MalformedRecord as exc:
            raise SchemaError(str(exc), str(path), line) from None
        key = (member.staff_id, member.year)
        if key in seen:
            raise SchemaError(
                f"duplicate (staff_id, year) {key} (first seen on line {seen[key]})", str(path), line
            )
        seen[key] = line
        out.append(member)
    return out


def _split_list(raw: str) -> list[str]:
    return [t.strip() for t in raw.split(";") if t.strip()]


def _parse_token(token: str) -> tuple[str, str]:
    last, sep, initial = token.rpartition(",")
    if not sep or not last.strip() or len(initial.strip()) != 1:
        raise ValueError(token)
    return last.strip(), initial.strip()


def read_publications(path: str | Path) -> list[PublicationRecord]:
    out = []
    seen: set[str] = set()
    for line, row in _rows(path, PUBLICATION_COLUMNS):
        pub_id = _field(row, "pub_id", str, path, line)
        if pub_id in seen:
            raise SchemaError(f"duplicate pub_id {pub_id!r}", str(path), line)
        seen.add(pub_id)
        try:
            tokens = tuple(_parse_token(t) for t in _split_list(row["authors"]))
        except ValueError as exc:
            raise ParseError(f"bad author token {exc.args[0]!r}; expected 'LAST,I'", str(path), line) from None
        try:
            out.append(PublicationRecord(
                pub_id=pub_id,
                year=_field(row, "year", int, path, line),
                journal_id=_field(row, "journal_id", str, path, line),
                author_tokens=tokens,
                claimed_universities=tuple(_split_list(row["claimed_universities"])),
                total_author_count=_field(row, "total_author_count", int, path, line, optional=True),
            ))
        except MalformedRecord as exc:
            raise SchemaError(str(exc), str(path), line) from None
    return out


def read_journals(path: str | Path) -> list[JournalRecord]:
    out = []
    seen: set[str] = set()
    for line, row in _rows(path, JOURNAL_COLUMNS):
        jid = _field(row, "journal_id", str, path, line)
        if jid in seen:
            raise SchemaError(f"duplicate journal_id {jid!r}", str(path), line)
        seen.add(jid)
        try:
            out.append(JournalRecord(
                journal_id=jid,
                category=_field(row, "category", str, path, line),
                impact_factor=_field(row, "impact_factor", _finite_float, path, line),
            ))
        except MalformedRecord as exc:
            raise SchemaError(str(exc), str(path), line) from None
    return out


def ingest(staff_path, publications_path, journals_path) -> Dataset:
    """Read and cross-validate the three bibliometric input files."""
    roster = read_staff(staff_path)
    publications = read_publications(publications_path)
    journals = read_journals(journals_path)
    known = {j.journal_id for j in journals}
    for pub in publications:
        if pub.journal_id not in known:
            raise ReferentialError(
                f"publication {pub.pub_id!r} references unknown journal_id {pub.journal_id!r}",
                str(publications_path),
            )
    return Dataset(roster, publications, journals)


def read_panel_csv(path: str | Path, min_staff_threshold: float = DEFAULT_STAFF_THRESHOLD) -> dict[int, DmuPanel]:
    """Read pre-aggregated per-unit inputs and outputs; one panel per UDA."""
    rows: dict[int, list[tuple[str, list[float]]]] = defaultdict(list)
    seen: set[tuple[str, int]] = set()
    for line, row in _rows(path, PANEL_COLUMNS):
        uni = _field(row, "university_id", str, path, line)
        uda = _field(row, "uda", int, path, line)
        if (uni, uda) in seen:
            raise SchemaError(f"duplicate unit ({uni!r}, {uda})", str(path), line)
        seen.add((uni, uda))
        values = [_field(row, c, _finite_float, path, line) for c in INPUT_NAMES + OUTPUT_NAMES]
        if any(v < 0 for v in values):
            raise SchemaError("inputs and outputs must be nonnegative", str(path), line)
        rows[uda].append((uni, values))
    if not rows:
        raise SchemaError("panel file has no rows", str(path))
    panels = {}
    for uda in sorted(rows):
        units = sorted(rows[uda], key=lambda r: natural_key(r[0]))
        data = np.array([v for _, v in units])
        try:
            panels[uda] = DmuPanel(
                uda, tuple(u for u, _ in units), data[:, :3], data[:, 3:], min_staff_threshold
            )
        except MalformedPanel as exc:
            raise SchemaError(str(exc), str(path)) from None
    return panels


def write_panel_csv(panels: Mapping[int, DmuPanel], path: str | Path) -> None:
    """Write panels at full precision (``repr`` floats) so re-reading is lossless."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PANEL_COLUMNS)
        for uda in sorted(panels):
            p = panels[uda]
            for dmu_id, x, y in zip(p.dmu_ids, p.inputs, p.outputs):
                w.writerow([dmu_id, uda, *(repr(float(v)) for v in (*x, *y))])
