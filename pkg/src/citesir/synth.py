"""Synthetic citation histories: deterministic samples and exact-event runs.

Two generators share the model of the `sir` module. `sample_series`
rounds the deterministic curve to integer counts; `simulate_stochastic`
runs the continuous-time Markov chain with the Gillespie algorithm, so
monthly reporting is just a view on exact event times. Cohort generation
draws per-paper parameters from per-journal log-normal distributions and
keeps the ground truth next to every series.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import DomainError, SchemaError
from .series import CitationSeries, write_series_csv
from .sir import EpidemicParams, integrate_upsilon

_DIST_PARAMS = ("s0", "beta", "gamma")


@dataclass(frozen=True)
class SyntheticCohortSpec:
    """Recipe for a labeled synthetic cohort.

    param_distributions maps journal -> {"s0"|"beta"|"gamma": (mu, sigma)}
    where mu and sigma parameterize the underlying normal of a log-normal
    draw. sigma = 0 is allowed and gives a point mass at exp(mu).
    """

    papers_per_journal: int
    journals: tuple[str, ...]
    param_distributions: Mapping[str, Mapping[str, tuple[float, float]]]
    horizon: int = 180
    seed: int = 0

    def __post_init__(self):
        if self.papers_per_journal < 1:
            raise DomainError("papers_per_journal must be >= 1")
        if self.horizon < 12:
            raise DomainError("horizon must be >= 12 months")
        if not self.journals:
            raise DomainError("at least one journal is required")
        if len(set(self.journals)) != len(self.journals):
            raise DomainError("journal labels must be unique")
        object.__setattr__(self, "journals", tuple(self.journals))
        for journal in self.journals:
            dists = self.param_distributions.get(journal)
            if dists is None:
                raise DomainError(f"no parameter distribution for journal {journal!r}")
            for name in _DIST_PARAMS:
                if name not in dists:
                    raise DomainError(f"journal {journal!r} is missing the "
                                      f"{name!r} distribution")
                mu, sigma = dists[name]
                if not (math.isfinite(mu) and math.isfinite(sigma)) or sigma < 0:
                    raise DomainError(f"journal {journal!r}, parameter {name!r}: "
                                      f"bad log-normal (mu, sigma) = {(mu, sigma)!r}")


@dataclass(frozen=True)
class SyntheticPaper:
    """One generated series together with the parameters that produced it."""

    series: CitationSeries
    truth: EpidemicParams


def sample_series(params: EpidemicParams, horizon: int,
                  paper_id: str = "sample", journal: str = "synthetic") -> CitationSeries:
    """Deterministic monthly sample of the model, rounded to integer counts.

    Rounding can locally break monotonicity at the half-count level, so a
    cumulative-max repair is applied afterwards.
    """
    if horizon < 12:
        raise DomainError(f"horizon must be >= 12 months, got {horizon}")
    upsilon = integrate_upsilon(params, horizon=horizon, sample_step=1.0)
    counts = np.maximum.accumulate(np.rint(upsilon).astype(np.int64))
    return CitationSeries(paper_id=paper_id, journal=journal,
                          counts=tuple(int(c) for c in counts))


def simulate_stochastic(params: EpidemicParams, horizon: int, seed,
                        paper_id: str = "stochastic",
                        journal: str = "synthetic") -> CitationSeries:
    """Exact-event (Gillespie) run of the integer-valued epidemic.

    Event rates are beta*S*I/N (one citation: S -> I) and gamma*I
    (removal: I -> R); S + I + R = S0 + I0 holds exactly throughout.
    The returned series reports the cumulative citation count at each
    whole month 0..horizon.

    `seed` may be an int, a SeedSequence, or a Generator, so callers can
    hand each simulation its own independent stream.
    """
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1 month, got {horizon}")
    s0, i0 = params.s0, params.i0
    if s0 != int(s0) or i0 != int(i0):
        raise DomainError("stochastic simulation needs integer S0 and I0")
    rng = np.random.default_rng(seed)

    s = int(s0)
    i = int(i0)
    n = float(s + i)
    counts = [0] * (horizon + 1)
    cum = 0
    t = 0.0
    month = 1
    while i > 0:
        rate_c = params.beta * s * i / n
        rate_r = params.gamma * i
        total = rate_c + rate_r
        if total <= 0.0:
            break
        t += rng.exponential(1.0 / total)
        while month <= horizon and month <= t:
            counts[month] = cum
            month += 1
        if t >= horizon:
            break
        if rng.random() * total < rate_c:
            s -= 1
            i += 1
            cum += 1
        else:
            i -= 1
    for m in range(month, horizon + 1):
        counts[m] = cum
    return CitationSeries(paper_id=paper_id, journal=journal, counts=tuple(counts))


def generate_cohort(spec: SyntheticCohortSpec) -> tuple[SyntheticPaper, ...]:
    """Draw a deterministic labeled cohort from per-journal distributions.

    Paper k (in journal-major order) owns the k-th child of the spec's
    seed sequence, so serial and parallel generation agree bit for bit.
    """
    total = len(spec.journals) * spec.papers_per_journal
    streams = np.random.SeedSequence(spec.seed).spawn(total)
    papers = []
    index = 0
    for journal in spec.journals:
        dists = spec.param_distributions[journal]
        for k in range(spec.papers_per_journal):
            rng = np.random.default_rng(streams[index])
            drawn = {name: float(rng.lognormal(*dists[name])) for name in _DIST_PARAMS}
            truth = EpidemicParams(s0=drawn["s0"], beta=drawn["beta"],
                                   gamma=drawn["gamma"], i0=1.0)
            series = sample_series(truth, spec.horizon,
                                   paper_id=f"{journal}-{k:04d}", journal=journal)
            papers.append(SyntheticPaper(series=series, truth=truth))
            index += 1
    return tuple(papers)


def load_cohort_spec(path) -> SyntheticCohortSpec:
    """Parse a cohort spec from JSON (see SyntheticCohortSpec for the fields)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from None
    try:
        journals = tuple(str(j) for j in raw["journals"])
        dists = {
            journal: {name: (float(pair[0]), float(pair[1]))
                      for name, pair in mapping.items()}
            for journal, mapping in raw["param_distributions"].items()
        }
        return SyntheticCohortSpec(
            papers_per_journal=int(raw["papers_per_journal"]),
            journals=journals,
            param_distributions=dists,
            horizon=int(raw.get("horizon", 180)),
            seed=int(raw.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: bad cohort spec: {exc!r}") from None


def write_cohort(papers, series_path, truth_path) -> None:
    """Export a cohort: the shared series CSV plus a ground-truth CSV."""
    write_series_csv([p.series for p in papers], series_path)
    ordered = sorted(papers, key=lambda p: p.series.paper_id)
    with open(truth_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("paper_id,s0,beta,gamma\n")
        for paper in ordered:
            t = paper.truth
            fh.write(f"{paper.series.paper_id},{t.s0!r},{t.beta!r},{t.gamma!r}\n")
