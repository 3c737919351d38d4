"""Journal-level aggregation of per-paper fits, ranks, and rank agreement.

Per-journal summaries are column-wise medians of the fitted parameter
distributions. Medians do not commute with the final-size equation, so
the summary's R0 and upsilon columns are aggregated independently and no
cross-field identity is assumed. Rank agreement uses Kendall's tau with
the plain pair-count definition, computed exactly in integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import median

import numpy as np

from .errors import DomainError, InsufficientDataError

_METRIC_FIELDS = {
    "s0": "median_s0",
    "beta": "median_beta",
    "gamma": "median_gamma",
    "r0": "median_r0",
    "upsilon": "median_upsilon",
}
_NO_GROWTH_SLOPE = 1e-12


@dataclass(frozen=True)
class CohortSummary:
    journal: str
    n_papers: int
    median_s0: float
    median_beta: float
    median_gamma: float
    median_r0: float
    median_upsilon: float


@dataclass(frozen=True)
class RankTable:
    """Journals ordered by one summary metric, descending.

    ranks are 1-based competition ranks: ties share the smaller rank and
    are marked in `tied`.
    """

    metric: str
    journals: tuple[str, ...]
    ranks: tuple[int, ...]
    tied: tuple[bool, ...]

    def rank_of(self, journal: str) -> int:
        try:
            return self.ranks[self.journals.index(journal)]
        except ValueError:
            raise DomainError(f"journal {journal!r} not in rank table") from None


@dataclass(frozen=True)
class GrowthFit:
    """Exponential growth law count(x) = a * exp((x - 1900) / b).

    b is the e-folding time in years; math.inf signals no growth.
    residual is the rms of the log-space fit residuals.
    """

    a: float
    b: float
    residual: float

    def __post_init__(self):
        if not self.a > 0 or not self.b > 0:
            raise DomainError(f"growth fit needs a > 0 and b > 0, "
                              f"got a={self.a!r} b={self.b!r}")


def summarize(journal: str, fits) -> CohortSummary:
    """Column-wise medians of a journal's fitted papers.

    Median convention: for even n, the mean of the two central order
    statistics.
    """
    fits = list(fits)
    if not fits:
        raise DomainError(f"journal {journal!r}: cannot summarize zero fits")
    return CohortSummary(
        journal=journal,
        n_papers=len(fits),
        median_s0=float(median(f.params.s0 for f in fits)),
        median_beta=float(median(f.params.beta for f in fits)),
        median_gamma=float(median(f.params.gamma for f in fits)),
        median_r0=float(median(f.impact.r0 for f in fits)),
        median_upsilon=float(median(f.impact.upsilon_rel for f in fits)),
    )


def rank_journals(summaries, metric: str) -> RankTable:
    """Rank journals by one summary metric, descending.

    `metric` is one of s0, beta, gamma, r0, upsilon (a median_ prefix is
    accepted). Ties get the same (smaller) rank, are flagged, and order
    alphabetically within the tie for determinism.
    """
    key = metric.removeprefix("median_")
    if key not in _METRIC_FIELDS:
        raise DomainError(f"unknown metric {metric!r}; expected one of "
                          f"{sorted(_METRIC_FIELDS)}")
    summaries = list(summaries)
    if len(summaries) < 2:
        raise DomainError("need >= 2 journals to rank")
    labels = [s.journal for s in summaries]
    if len(set(labels)) != len(labels):
        raise DomainError("duplicate journal labels in summaries")
    field = _METRIC_FIELDS[key]
    rows = sorted(((getattr(s, field), s.journal) for s in summaries),
                  key=lambda pair: (-pair[0], pair[1]))
    values = [v for v, _ in rows]
    ranks = []
    tied = []
    for idx, value in enumerate(values):
        ranks.append(1 + sum(1 for other in values if other > value))
        tied.append(values.count(value) > 1)
    return RankTable(metric=key,
                     journals=tuple(j for _, j in rows),
                     ranks=tuple(ranks),
                     tied=tuple(tied))


def kendall_counts(a: RankTable, b: RankTable) -> tuple[int, int, int]:
    """(concordant, discordant, total) journal pairs between two rank tables.

    Pairs tied in either table contribute to neither concordant nor
    discordant, only to the total.
    """
    set_a, set_b = set(a.journals), set(b.journals)
    if set_a != set_b:
        raise DomainError(f"rank tables cover different journals: "
                          f"{sorted(set_a ^ set_b)}")
    journals = sorted(set_a)
    ra = {j: a.rank_of(j) for j in journals}
    rb = {j: b.rank_of(j) for j in journals}
    concordant = discordant = 0
    n = len(journals)
    for i in range(n):
        for j in range(i + 1, n):
            da = ra[journals[i]] - ra[journals[j]]
            db = rb[journals[i]] - rb[journals[j]]
            product = da * db
            if product > 0:
                concordant += 1
            elif product < 0:
                discordant += 1
    return concordant, discordant, n * (n - 1) // 2


def rank_correlation(a: RankTable, b: RankTable) -> float:
    """Kendall tau between two rank tables over the same journals.

    tau = (concordant - discordant) / total pairs; for untied inputs this
    is the plain no-ties statistic.
    """
    concordant, discordant, total = kendall_counts(a, b)
    return (concordant - discordant) / total


def fit_exponential_growth(yearly_counts) -> GrowthFit:
    """Least-squares fit of log(count) against (year - 1900).

    Rows with non-positive counts are excluded; at least 3 usable rows
    are required. A slope at or below 1e-12 is reported as the no-growth
    sentinel b = inf with a = exp(mean log count).
    """
    usable = [(year, count) for year, count in yearly_counts if count > 0]
    if len(usable) < 3:
        raise InsufficientDataError(
            f"need >= 3 years with positive counts, got {len(usable)}")
    x = np.array([year - 1900.0 for year, _ in usable])
    y = np.log([count for _, count in usable])
    slope, intercept = np.polyfit(x, y, 1)
    predicted = intercept + slope * x
    residual = float(np.sqrt(np.mean((y - predicted) ** 2)))
    if slope <= _NO_GROWTH_SLOPE:
        flat = float(np.mean(y))
        return GrowthFit(a=float(math.exp(flat)), b=math.inf,
                         residual=float(np.sqrt(np.mean((y - flat) ** 2))))
    return GrowthFit(a=float(math.exp(intercept)), b=float(1.0 / slope),
                     residual=residual)
