"""Raw citing-pair data -> per-paper monthly cumulative series.

Input is two CSV files, one with paper metadata and one with citing
pairs. Month arithmetic is calendar-based (year*12 + month); an event's
month index is the whole-month difference between the citing date and
the cited paper's publication date. Events dated before publication are
clock skew (online-first vs issue dates) and clamp to month 0; identical
citing/cited ids are data errors and are dropped with a tally.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

from .errors import DomainError, IngestionError, SchemaError
from .series import CitationSeries

logger = logging.getLogger(__name__)

META_HEADER = ["paper_id", "journal", "pub_year", "pub_month"]
CITATIONS_HEADER = ["citing_id", "cited_id", "citing_year", "citing_month"]
MALFORMED_THRESHOLD = 0.01
_SAMPLE_LIMIT = 5
_YEAR_RANGE = (1500, 3000)


@dataclass(frozen=True)
class PaperMeta:
    paper_id: str
    journal: str
    pub_year: int
    pub_month: int

    def __post_init__(self):
        if not self.paper_id:
            raise DomainError("paper_id must be non-empty")
        if not self.journal:
            raise DomainError("journal must be non-empty")
        if not 1 <= self.pub_month <= 12:
            raise DomainError(f"pub_month out of range: {self.pub_month}")
        if not _YEAR_RANGE[0] <= self.pub_year <= _YEAR_RANGE[1]:
            raise DomainError(f"pub_year out of range: {self.pub_year}")

    def month_index(self) -> int:
        return self.pub_year * 12 + (self.pub_month - 1)


@dataclass(frozen=True)
class CitationEvent:
    citing_id: str
    cited_id: str
    citing_year: int
    citing_month: int

    def __post_init__(self):
        if not self.citing_id or not self.cited_id:
            raise DomainError("citing_id and cited_id must be non-empty")
        if self.citing_id == self.cited_id:
            raise DomainError(f"self-citation pair for id {self.citing_id!r}")
        if not 1 <= self.citing_month <= 12:
            raise DomainError(f"citing_month out of range: {self.citing_month}")
        if not _YEAR_RANGE[0] <= self.citing_year <= _YEAR_RANGE[1]:
            raise DomainError(f"citing_year out of range: {self.citing_year}")

    def month_index(self) -> int:
        return self.citing_year * 12 + (self.citing_month - 1)


@dataclass(frozen=True)
class IngestReport:
    rows_read: int
    malformed: int
    self_pairs: int
    clock_skew: int
    malformed_samples: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {"rows_read": self.rows_read, "malformed": self.malformed,
                "self_pairs": self.self_pairs, "clock_skew": self.clock_skew}


def _check_header(header, expected, label):
    if header is None:
        raise SchemaError(f"{label}: file is empty, expected header "
                          f"{','.join(expected)!r}")
    got = [h.strip() for h in header]
    if got != expected:
        missing = [c for c in expected if c not in got]
        if missing:
            raise SchemaError(f"{label}: missing required column(s) "
                              f"{', '.join(missing)} (got header {got!r})")
        raise SchemaError(f"{label}: header {got!r} does not match "
                          f"{expected!r}")


def _parse_csv(path, expected_header, build_row):
    """Shared row loop: returns (records, rows_read, malformed, samples, extra)."""
    path = Path(path)
    records = []
    rows_read = 0
    malformed = 0
    samples: list[str] = []
    extra = {"self_pairs": 0}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), expected_header, str(path))
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            rows_read += 1
            try:
                record = build_row(row, extra)
            except (DomainError, ValueError) as exc:
                malformed += 1
                if len(samples) < _SAMPLE_LIMIT:
                    samples.append(f"{path.name}:{lineno}: {','.join(row)!r} ({exc})")
                continue
            if record is not None:
                records.append(record)
    if rows_read and malformed / rows_read > MALFORMED_THRESHOLD:
        raise IngestionError(
            f"{path}: {malformed} of {rows_read} rows malformed "
            f"({100.0 * malformed / rows_read:.1f}%), above the "
            f"{100 * MALFORMED_THRESHOLD:.0f}% threshold; first offenders: "
            + "; ".join(samples),
            samples=tuple(samples))
    return records, rows_read, malformed, samples, extra


def _build_meta(row, extra):
    if len(row) != 4:
        raise DomainError(f"expected 4 fields, got {len(row)}")
    return PaperMeta(paper_id=row[0].strip(), journal=row[1].strip(),
                     pub_year=int(row[2]), pub_month=int(row[3]))


def _build_event(row, extra):
    if len(row) != 4:
        raise DomainError(f"expected 4 fields, got {len(row)}")
    citing = row[0].strip()
    cited = row[1].strip()
    if citing and citing == cited:
        extra["self_pairs"] += 1
        return None
    return CitationEvent(citing_id=citing, cited_id=cited,
                         citing_year=int(row[2]), citing_month=int(row[3]))


def parse_events(meta_path, citations_path):
    """Parse both input files.

    Returns (metas, events, IngestReport). Malformed rows are tolerated
    up to 1% per file; beyond that an IngestionError carries row samples.
    The report's clock_skew field is filled in later by series building
    (skew is a property of event-vs-publication dates, not of one file).
    """
    metas, meta_rows, meta_bad, meta_samples, _ = _parse_csv(
        meta_path, META_HEADER, _build_meta)
    events, cit_rows, cit_bad, cit_samples, extra = _parse_csv(
        citations_path, CITATIONS_HEADER, _build_event)
    report = IngestReport(
        rows_read=meta_rows + cit_rows,
        malformed=meta_bad + cit_bad,
        self_pairs=extra["self_pairs"],
        clock_skew=0,
        malformed_samples=tuple(meta_samples + cit_samples))
    return metas, events, report


def _bin_events(paper: PaperMeta, events, horizon: int) -> tuple[list[int], int]:
    """Monthly increments for one paper; returns (per-month counts, skew tally)."""
    pub = paper.month_index()
    increments = [0] * (horizon + 1)
    skew = 0
    for event in events:
        if event.cited_id != paper.paper_id:
            continue
        offset = event.month_index() - pub
        if offset < 0:
            skew += 1
            offset = 0
        if offset > horizon:
            continue
        increments[offset] += 1
    return increments, skew


def build_series(paper: PaperMeta, events, horizon: int = 180) -> CitationSeries:
    """Cumulative monthly series for one paper from its citation events."""
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    increments, _ = _bin_events(paper, events, horizon)
    counts = []
    running = 0
    for inc in increments:
        running += inc
        counts.append(running)
    return CitationSeries(paper_id=paper.paper_id, journal=paper.journal,
                          counts=tuple(counts))


def build_all_series(metas, events, horizon: int = 180):
    """Series for every paper in `metas`; returns (series list, clock-skew tally).

    Events whose cited_id matches no known paper are ignored.
    """
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    by_cited: dict[str, list[CitationEvent]] = {}
    known = {m.paper_id for m in metas}
    if len(known) != len(metas):
        raise DomainError("duplicate paper_id in metadata")
    for event in events:
        if event.cited_id in known:
            by_cited.setdefault(event.cited_id, []).append(event)
    all_series = []
    skew_total = 0
    for meta in metas:
        increments, skew = _bin_events(meta, by_cited.get(meta.paper_id, ()), horizon)
        skew_total += skew
        counts = []
        running = 0
        for inc in increments:
            running += inc
            counts.append(running)
        all_series.append(CitationSeries(paper_id=meta.paper_id,
                                         journal=meta.journal,
                                         counts=tuple(counts)))
    return all_series, skew_total


def select_hit_papers(metas, series_list, journal: str,
                      pub_window: tuple[int, int], k: int) -> list[str]:
    """The journal's k most-cited papers published inside the year window.

    Ranking is by final cumulative count descending; ties break toward
    the earlier publication date, then the lexicographically smaller
    paper_id. If fewer than k papers are eligible, all of them are
    returned and a shortfall warning is logged.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if pub_window[0] > pub_window[1]:
        raise DomainError(f"empty publication window {pub_window!r}")
    finals = {s.paper_id: s.final for s in series_list}
    eligible = [m for m in metas
                if m.journal == journal
                and pub_window[0] <= m.pub_year <= pub_window[1]]
    eligible.sort(key=lambda m: (-finals.get(m.paper_id, 0),
                                 (m.pub_year, m.pub_month), m.paper_id))
    if len(eligible) < k:
        logger.warning("journal %r: only %d eligible papers for k=%d",
                       journal, len(eligible), k)
        return [m.paper_id for m in eligible]
    return [m.paper_id for m in eligible[:k]]
