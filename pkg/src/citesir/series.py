"""Per-paper monthly cumulative citation series and its CSV form.

The on-disk schema is shared by the ingestion output and the synthetic
cohort export: header `paper_id,journal,month,cumulative_citations`,
months 0..horizon inclusive per paper.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError, SchemaError

SERIES_HEADER = ["paper_id", "journal", "month", "cumulative_citations"]


@dataclass(frozen=True)
class CitationSeries:
    """Cumulative citation counts at months 0..horizon for one paper."""

    paper_id: str
    journal: str
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) == 0:
            raise DataError(f"empty series for paper {self.paper_id!r}")
        normalized = []
        for month, c in enumerate(self.counts):
            value = int(c)
            if value != c:
                raise DataError(
                    f"paper {self.paper_id!r}: non-integer count {c!r} at month {month}")
            normalized.append(value)
        if normalized[0] < 0:
            raise DataError(f"paper {self.paper_id!r}: negative count at month 0")
        for month in range(1, len(normalized)):
            if normalized[month] < normalized[month - 1]:
                raise DataError(
                    f"paper {self.paper_id!r}: counts decrease at month {month}")
        object.__setattr__(self, "counts", tuple(normalized))

    @property
    def horizon(self) -> int:
        return len(self.counts) - 1

    @property
    def final(self) -> int:
        return self.counts[-1]


def write_series_csv(series_list, path) -> None:
    """Write series sorted by paper_id, months ascending (byte-deterministic)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SERIES_HEADER)
        for series in sorted(series_list, key=lambda s: s.paper_id):
            for month, count in enumerate(series.counts):
                writer.writerow([series.paper_id, series.journal, month, count])


def read_series_csv(path) -> list[CitationSeries]:
    """Read a series CSV back into CitationSeries values, ordered by paper_id.

    Raises SchemaError for a bad header and DataError for rows that do
    not assemble into complete month-0..horizon series.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != SERIES_HEADER:
            raise SchemaError(
                f"{path}: expected header {','.join(SERIES_HEADER)!r}, got {header!r}")
        rows: dict[str, tuple[str, list[tuple[int, int]]]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            paper_id = row[0].strip()
            journal = row[1].strip()
            try:
                month = int(row[2])
                count = int(row[3])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            if paper_id not in rows:
                rows[paper_id] = (journal, [])
            elif rows[paper_id][0] != journal:
                raise DataError(f"{path}:{lineno}: journal changes within paper "
                                f"{paper_id!r}")
            rows[paper_id][1].append((month, count))
    out = []
    for paper_id in sorted(rows):
        journal, pairs = rows[paper_id]
        pairs.sort()
        months = [m for m, _ in pairs]
        if months != list(range(len(months))):
            raise DataError(f"{path}: paper {paper_id!r} months are not a complete "
                            f"0..{len(months) - 1} run")
        out.append(CitationSeries(paper_id=paper_id, journal=journal,
                                  counts=tuple(c for _, c in pairs)))
    return out
