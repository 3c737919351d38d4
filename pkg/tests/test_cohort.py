"""Cohort aggregation tests: medians, rank tables, Kendall tau, growth law."""

import math

import numpy as np
import pytest

from citesir import (
    CohortSummary,
    DomainError,
    EpidemicParams,
    FitResult,
    ImpactEstimate,
    InsufficientDataError,
    fit_exponential_growth,
    kendall_counts,
    rank_correlation,
    rank_journals,
    summarize,
)

# Six journals with the characteristic inversion: audience size and the
# per-contact rates rank one way, reproductive number and relative
# ultimate impact rank almost exactly the other way.
JOURNAL_ROWS = [
    # journal, s0, beta, gamma, r0, upsilon
    ("PRL", 19350.0, 1.400, 1.385, 1.008, 0.021),
    ("PRD", 9325.0, 0.915, 0.910, 1.012, 0.031),
    ("PRB", 4750.0, 0.730, 0.715, 1.026, 0.059),
    ("PRA", 2900.0, 0.570, 0.550, 1.031, 0.072),
    ("PRE", 1900.0, 0.455, 0.445, 1.028, 0.070),
    ("PRC", 1600.0, 0.355, 0.340, 1.037, 0.084),
]

SIZE_ORDER = ("PRL", "PRD", "PRB", "PRA", "PRE", "PRC")
IMPACT_ORDER = ("PRC", "PRA", "PRE", "PRB", "PRD", "PRL")


def _summaries():
    return [CohortSummary(journal=j, n_papers=40, median_s0=s0,
                          median_beta=beta, median_gamma=gamma,
                          median_r0=r0, median_upsilon=upsilon)
            for j, s0, beta, gamma, r0, upsilon in JOURNAL_ROWS]


def _fit_result(s0, beta, gamma, upsilon_rel=0.1):
    params = EpidemicParams(s0=s0, beta=beta, gamma=gamma)
    impact = ImpactEstimate(upsilon_inf=upsilon_rel * s0,
                            upsilon_rel=upsilon_rel,
                            r0=beta / gamma, rho=gamma / beta)
    return FitResult(params=params, loss=0.0, rmse=0.0, impact=impact,
                     converged=True, restarts_used=1)


def test_summarize_medians_odd():
    fits = [_fit_result(100.0, 0.5, 0.4, upsilon_rel=0.2),
            _fit_result(400.0, 0.7, 0.3, upsilon_rel=0.6),
            _fit_result(200.0, 0.6, 0.5, upsilon_rel=0.4)]
    summary = summarize("J", fits)
    assert summary.journal == "J"
    assert summary.n_papers == 3
    assert summary.median_s0 == 200.0
    assert summary.median_beta == 0.6
    assert summary.median_gamma == 0.4
    assert summary.median_upsilon == 0.4
    assert summary.median_r0 == 0.5 / 0.4


def test_summarize_medians_even():
    fits = [_fit_result(s0, 0.5, 0.4) for s0 in (100.0, 200.0, 400.0, 800.0)]
    summary = summarize("J", fits)
    assert summary.n_papers == 4
    assert summary.median_s0 == 300.0


def test_summarize_rejects_empty():
    with pytest.raises(DomainError):
        summarize("J", [])


def test_rank_orders_per_metric():
    summaries = _summaries()
    for metric in ("s0", "beta", "gamma"):
        table = rank_journals(summaries, metric)
        assert table.journals == SIZE_ORDER
        assert table.ranks == (1, 2, 3, 4, 5, 6)
        assert table.tied == (False,) * 6
    for metric in ("r0", "upsilon"):
        table = rank_journals(summaries, metric)
        assert table.journals == IMPACT_ORDER
        assert table.ranks == (1, 2, 3, 4, 5, 6)


def test_rank_inversion_tau():
    summaries = _summaries()
    by_size = rank_journals(summaries, "s0")
    by_impact = rank_journals(summaries, "upsilon")
    assert kendall_counts(by_size, by_impact) == (1, 14, 15)
    assert rank_correlation(by_size, by_impact) == (1 - 14) / 15
    by_beta = rank_journals(summaries, "beta")
    assert kendall_counts(by_size, by_beta) == (15, 0, 15)
    assert rank_correlation(by_size, by_beta) == 1.0


def test_rank_accepts_median_prefix():
    summaries = _summaries()
    assert rank_journals(summaries, "median_s0") == rank_journals(summaries, "s0")


def test_rank_validation():
    summaries = _summaries()
    with pytest.raises(DomainError):
        rank_journals(summaries, "h_index")
    with pytest.raises(DomainError):
        rank_journals(summaries[:1], "s0")
    with pytest.raises(DomainError):
        rank_journals(summaries + summaries[:1], "s0")


def test_rank_ties_share_smaller_rank():
    summaries = [
        CohortSummary("Y", 5, 5.0, 1.0, 1.0, 1.0, 1.0),
        CohortSummary("Z", 5, 3.0, 1.0, 1.0, 1.0, 1.0),
        CohortSummary("X", 5, 5.0, 1.0, 1.0, 1.0, 1.0),
    ]
    table = rank_journals(summaries, "s0")
    assert table.journals == ("X", "Y", "Z")
    assert table.ranks == (1, 1, 3)
    assert table.tied == (True, True, False)
    assert table.rank_of("Z") == 3
    with pytest.raises(DomainError):
        table.rank_of("W")


def test_kendall_excludes_tied_pairs():
    tied = rank_journals([
        CohortSummary("X", 5, 5.0, 1.0, 1.0, 1.0, 1.0),
        CohortSummary("Y", 5, 5.0, 1.0, 1.0, 1.0, 2.0),
        CohortSummary("Z", 5, 3.0, 1.0, 1.0, 1.0, 3.0),
    ], "s0")
    untied = rank_journals([
        CohortSummary("X", 5, 5.0, 1.0, 1.0, 1.0, 1.0),
        CohortSummary("Y", 5, 5.0, 1.0, 1.0, 1.0, 2.0),
        CohortSummary("Z", 5, 3.0, 1.0, 1.0, 1.0, 3.0),
    ], "upsilon")
    # X-Y is tied by size, so it counts toward neither tally
    assert kendall_counts(tied, untied) == (0, 2, 3)
    assert rank_correlation(tied, untied) == -2 / 3


def test_kendall_rejects_journal_mismatch():
    summaries = _summaries()
    by_size = rank_journals(summaries, "s0")
    by_impact = rank_journals(summaries[:4], "upsilon")
    with pytest.raises(DomainError):
        kendall_counts(by_size, by_impact)


def test_rank_invariant_under_monotone_transform():
    rng = np.random.default_rng(42)
    labels = [f"J{k}" for k in range(6)]
    for _ in range(20):
        values = rng.permutation(np.linspace(1.0, 2.0, 6))
        raw = [CohortSummary(j, 5, float(v), 1.0, 1.0, 1.0, 1.0)
               for j, v in zip(labels, values)]
        warped = [CohortSummary(j, 5, float(math.exp(3.0 * v)), 1.0, 1.0,
                                1.0, 1.0)
                  for j, v in zip(labels, values)]
        assert rank_journals(raw, "s0") == rank_journals(warped, "s0")


def test_growth_fit_exact_recovery():
    years = range(1950, 1995, 5)
    counts = [(year, 63.0 * math.exp((year - 1900) / 18.0)) for year in years]
    fit = fit_exponential_growth(counts)
    assert fit.a == pytest.approx(63.0, rel=1e-9)
    assert fit.b == pytest.approx(18.0, rel=1e-9)
    assert fit.residual < 1e-9


def test_growth_fit_skips_non_positive_rows():
    counts = [(year, 63.0 * math.exp((year - 1900) / 18.0))
              for year in range(1950, 1995, 5)]
    counts += [(1945, 0.0), (1940, -7.0)]
    fit = fit_exponential_growth(counts)
    assert fit.a == pytest.approx(63.0, rel=1e-9)
    assert fit.b == pytest.approx(18.0, rel=1e-9)


def test_growth_fit_needs_three_positive_rows():
    with pytest.raises(InsufficientDataError):
        fit_exponential_growth([(1950, 10.0), (1955, 12.0), (1960, 0.0)])


def test_growth_fit_flat_and_decreasing_report_no_growth():
    flat = fit_exponential_growth([(y, 63.0) for y in range(1950, 1990, 5)])
    assert flat.b == math.inf
    assert flat.a == pytest.approx(63.0, rel=1e-12)
    assert flat.residual == pytest.approx(0.0, abs=1e-12)

    decreasing = fit_exponential_growth(
        [(y, 100.0 * math.exp(-(y - 1900) / 30.0))
         for y in range(1950, 1990, 5)])
    assert decreasing.b == math.inf
    logs = [math.log(100.0) - (y - 1900) / 30.0 for y in range(1950, 1990, 5)]
    assert decreasing.a == pytest.approx(math.exp(sum(logs) / len(logs)))
