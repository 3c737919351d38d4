"""Synthetic data tests: deterministic sampling, event simulation, cohorts."""

import json
import math

import numpy as np
import pytest

from citesir import (
    DomainError,
    EpidemicParams,
    SchemaError,
    SyntheticCohortSpec,
    generate_cohort,
    integrate_upsilon,
    load_cohort_spec,
    read_series_csv,
    sample_series,
    simulate_stochastic,
    write_cohort,
)

MIDDLE = EpidemicParams(3150.0, 0.48, 0.47)


def test_sample_series_frozen_values():
    series = sample_series(MIDDLE, 180, paper_id="mid", journal="J")
    assert len(series.counts) == 181
    assert series.counts[0] == 0
    assert series.counts[1] == 0
    assert series.counts[12] == 6
    assert series.counts[180] == 122


def test_sample_series_monotone_integer_counts():
    rng = np.random.default_rng(52)
    for _ in range(20):
        params = EpidemicParams(
            s0=float(10.0 ** rng.uniform(1.5, 4.5)),
            beta=float(10.0 ** rng.uniform(-1.5, 0.5)),
            gamma=float(10.0 ** rng.uniform(-1.5, 0.5)),
        )
        series = sample_series(params, 60)
        assert all(isinstance(c, int) for c in series.counts)
        assert all(a <= b for a, b in zip(series.counts, series.counts[1:]))
        assert series.counts[-1] <= params.s0


def test_sample_series_tracks_the_model_curve():
    curve = integrate_upsilon(MIDDLE, horizon=180.0, sample_step=1.0)
    series = sample_series(MIDDLE, 180)
    for month, count in enumerate(series.counts):
        assert abs(count - curve[month]) <= 1.0


def test_sample_series_horizon_validation():
    with pytest.raises(DomainError):
        sample_series(MIDDLE, 11)


def test_stochastic_determinism_and_seed_types():
    params = EpidemicParams(1000.0, 2.0, 1.0, i0=5.0)
    a = simulate_stochastic(params, horizon=24, seed=7)
    b = simulate_stochastic(params, horizon=24, seed=7)
    c = simulate_stochastic(params, horizon=24, seed=np.random.SeedSequence(7))
    other = simulate_stochastic(params, horizon=24, seed=8)
    assert a.counts == b.counts == c.counts
    assert a.counts != other.counts


def test_stochastic_counts_are_monotone_and_bounded():
    params = EpidemicParams(1000.0, 2.0, 1.0, i0=5.0)
    series = simulate_stochastic(params, horizon=36, seed=3)
    assert series.counts[0] == 0
    assert all(a <= b for a, b in zip(series.counts, series.counts[1:]))
    assert series.counts[-1] <= 1000


def test_stochastic_without_flow_stays_zero():
    no_seed = simulate_stochastic(EpidemicParams(100.0, 2.0, 1.0, i0=0.0),
                                  horizon=12, seed=1)
    assert set(no_seed.counts) == {0}
    no_transmission = simulate_stochastic(EpidemicParams(100.0, 0.0, 1.0, i0=5.0),
                                          horizon=12, seed=1)
    assert set(no_transmission.counts) == {0}


def test_stochastic_rejects_fractional_populations():
    with pytest.raises(DomainError):
        simulate_stochastic(EpidemicParams(10.5, 1.0, 0.5), horizon=12, seed=0)
    with pytest.raises(DomainError):
        simulate_stochastic(EpidemicParams(10.0, 1.0, 0.5, i0=0.5),
                            horizon=12, seed=0)
    with pytest.raises(DomainError):
        simulate_stochastic(EpidemicParams(10.0, 1.0, 0.5), horizon=0, seed=0)


def test_stochastic_mean_matches_ode_at_scale():
    """Mean-field check in the regime where it holds: a well-seeded
    supercritical epidemic (R0 = 2, one initial influential paper per
    thousand susceptible). 30 runs give a standard error near 0.2%."""
    params = EpidemicParams(20000.0, 2.0, 1.0, i0=20.0)
    reference = float(integrate_upsilon(params, horizon=60.0)[-1])
    assert reference == pytest.approx(15939.0, abs=1.0)
    finals = []
    for child in np.random.SeedSequence(1234).spawn(30):
        series = simulate_stochastic(params, horizon=60, seed=child)
        finals.append(series.counts[-1])
    mean = sum(finals) / len(finals)
    assert abs(mean - reference) <= 0.01 * reference


def _point_mass_spec(**overrides):
    fields = dict(
        papers_per_journal=3,
        journals=("JA", "JB"),
        param_distributions={
            "JA": {"s0": (math.log(800.0), 0.0), "beta": (math.log(0.9), 0.0),
                   "gamma": (math.log(0.6), 0.0)},
            "JB": {"s0": (math.log(300.0), 0.0), "beta": (math.log(0.5), 0.0),
                   "gamma": (math.log(0.4), 0.0)},
        },
        horizon=24,
        seed=5,
    )
    fields.update(overrides)
    return SyntheticCohortSpec(**fields)


def test_generate_cohort_point_mass_and_layout():
    papers = generate_cohort(_point_mass_spec())
    assert len(papers) == 6
    assert [p.series.paper_id for p in papers] == [
        "JA-0000", "JA-0001", "JA-0002", "JB-0000", "JB-0001", "JB-0002"]
    for paper in papers[:3]:
        assert paper.series.journal == "JA"
        assert paper.truth.s0 == pytest.approx(800.0, rel=1e-12)
        assert paper.truth.beta == pytest.approx(0.9, rel=1e-12)
        assert paper.truth.gamma == pytest.approx(0.6, rel=1e-12)
        assert paper.truth.i0 == 1.0
        regenerated = sample_series(paper.truth, 24,
                                    paper_id=paper.series.paper_id,
                                    journal="JA")
        assert paper.series == regenerated


def test_generate_cohort_deterministic():
    spec = _point_mass_spec(seed=77)
    assert generate_cohort(spec) == generate_cohort(spec)


def test_generate_cohort_spread_draws_vary():
    spec = _point_mass_spec(param_distributions={
        "JA": {"s0": (7.0, 0.4), "beta": (0.0, 0.3), "gamma": (0.0, 0.3)},
        "JB": {"s0": (6.0, 0.4), "beta": (-0.5, 0.3), "gamma": (-0.5, 0.3)},
    })
    papers = generate_cohort(spec)
    assert len({p.truth.s0 for p in papers}) == len(papers)


def test_cohort_spec_validation():
    with pytest.raises(DomainError):
        _point_mass_spec(papers_per_journal=0)
    with pytest.raises(DomainError):
        _point_mass_spec(horizon=11)
    with pytest.raises(DomainError):
        _point_mass_spec(journals=("JA", "JA"))
    with pytest.raises(DomainError):
        _point_mass_spec(journals=("JA", "JB", "JC"))
    with pytest.raises(DomainError):
        _point_mass_spec(param_distributions={
            "JA": {"s0": (7.0, 0.1), "beta": (0.0, 0.1)},
            "JB": {"s0": (6.0, 0.1), "beta": (0.0, 0.1),
                   "gamma": (0.0, 0.1)},
        })
    with pytest.raises(DomainError):
        _point_mass_spec(param_distributions={
            "JA": {"s0": (7.0, -0.1), "beta": (0.0, 0.1),
                   "gamma": (0.0, 0.1)},
            "JB": {"s0": (6.0, 0.1), "beta": (0.0, 0.1),
                   "gamma": (0.0, 0.1)},
        })


def test_load_cohort_spec_round_trip(tmp_path):
    payload = {
        "papers_per_journal": 4,
        "journals": ["JX", "JY"],
        "param_distributions": {
            "JX": {"s0": [8.0, 0.5], "beta": [0.0, 0.2], "gamma": [0.0, 0.2]},
            "JY": {"s0": [7.0, 0.5], "beta": [-0.3, 0.2], "gamma": [-0.3, 0.2]},
        },
        "horizon": 60,
        "seed": 9,
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    spec = load_cohort_spec(path)
    assert spec.papers_per_journal == 4
    assert spec.journals == ("JX", "JY")
    assert spec.param_distributions["JY"]["beta"] == (-0.3, 0.2)
    assert spec.horizon == 60
    assert spec.seed == 9

    del payload["horizon"], payload["seed"]
    path.write_text(json.dumps(payload), encoding="utf-8")
    defaults = load_cohort_spec(path)
    assert defaults.horizon == 180
    assert defaults.seed == 0


def test_load_cohort_spec_errors(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(SchemaError):
        load_cohort_spec(path)

    path.write_text(json.dumps({"papers_per_journal": 2}), encoding="utf-8")
    with pytest.raises(SchemaError):
        load_cohort_spec(path)

    bad_shape = {
        "papers_per_journal": 2,
        "journals": ["JX"],
        "param_distributions": {
            "JX": {"s0": {"mu": 8.0, "sigma": 0.5}, "beta": [0.0, 0.2],
                   "gamma": [0.0, 0.2]},
        },
    }
    path.write_text(json.dumps(bad_shape), encoding="utf-8")
    with pytest.raises(SchemaError):
        load_cohort_spec(path)

    bad_sigma = {
        "papers_per_journal": 2,
        "journals": ["JX"],
        "param_distributions": {
            "JX": {"s0": [8.0, -0.5], "beta": [0.0, 0.2], "gamma": [0.0, 0.2]},
        },
    }
    path.write_text(json.dumps(bad_sigma), encoding="utf-8")
    with pytest.raises(SchemaError):
        load_cohort_spec(path)


def test_write_cohort_files(tmp_path):
    papers = generate_cohort(_point_mass_spec())
    series_path = tmp_path / "series.csv"
    truth_path = tmp_path / "ground_truth.csv"
    write_cohort(papers, series_path, truth_path)

    read_back = read_series_csv(series_path)
    assert [s.paper_id for s in read_back] == sorted(
        p.series.paper_id for p in papers)
    by_id = {p.series.paper_id: p.series for p in papers}
    for series in read_back:
        assert series == by_id[series.paper_id]

    truth_by_id = {p.series.paper_id: p.truth for p in papers}
    lines = truth_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "paper_id,s0,beta,gamma"
    assert len(lines) == 1 + len(papers)
    for line in lines[1:]:
        paper_id, s0_text, beta_text, gamma_text = line.split(",")
        truth = truth_by_id[paper_id]
        assert float(s0_text) == truth.s0
        assert float(beta_text) == truth.beta
        assert float(gamma_text) == truth.gamma
