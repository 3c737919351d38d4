"""Epidemic modeling of citation histories.

Per-paper citation counts are treated as the cumulative new-infection
curve of an SIR process: susceptible authors, currently citing
(infectious) authors, and authors who have moved on. The package fits
the three free parameters per paper, converts them to an ultimate
impact estimate, and aggregates fits into journal-level rankings.
"""
from .cohort import (
    CohortSummary,
    GrowthFit,
    RankTable,
    fit_exponential_growth,
    kendall_counts,
    rank_correlation,
    rank_journals,
    summarize,
)
from .errors import (
    CiteSirError,
    ConvergenceError,
    DataError,
    DomainError,
    InsufficientDataError,
    IngestionError,
    NumericalError,
    SampleNotFoundError,
    SchemaError,
)
from .fitting import (
    FitConfig,
    FitResult,
    IdentifiabilityReport,
    ParameterProfile,
    fit,
    loss,
    profile_identifiability,
    result_record,
)
from .impact import (
    ImpactEstimate,
    basic_reproductive_number,
    solve_ultimate_impact,
    solve_upsilon,
)
from .ingest import (
    CitationEvent,
    IngestReport,
    PaperMeta,
    build_all_series,
    build_series,
    parse_events,
    select_hit_papers,
)
from .series import CitationSeries, read_series_csv, write_series_csv
from .sir import (
    EpidemicParams,
    EpidemicState,
    Trajectory,
    cumulative_citations,
    integrate,
    integrate_upsilon,
    rhs,
    write_trajectory,
)
from .synth import (
    SyntheticCohortSpec,
    SyntheticPaper,
    generate_cohort,
    load_cohort_spec,
    sample_series,
    simulate_stochastic,
    write_cohort,
)

__version__ = "0.1.0"

__all__ = [
    "CitationEvent",
    "CitationSeries",
    "CiteSirError",
    "CohortSummary",
    "ConvergenceError",
    "DataError",
    "DomainError",
    "EpidemicParams",
    "EpidemicState",
    "FitConfig",
    "FitResult",
    "GrowthFit",
    "IdentifiabilityReport",
    "ImpactEstimate",
    "IngestReport",
    "IngestionError",
    "InsufficientDataError",
    "NumericalError",
    "PaperMeta",
    "ParameterProfile",
    "RankTable",
    "SampleNotFoundError",
    "SchemaError",
    "SyntheticCohortSpec",
    "SyntheticPaper",
    "Trajectory",
    "basic_reproductive_number",
    "build_all_series",
    "build_series",
    "cumulative_citations",
    "fit",
    "fit_exponential_growth",
    "generate_cohort",
    "integrate",
    "integrate_upsilon",
    "kendall_counts",
    "load_cohort_spec",
    "loss",
    "parse_events",
    "profile_identifiability",
    "rank_correlation",
    "rank_journals",
    "read_series_csv",
    "result_record",
    "rhs",
    "sample_series",
    "select_hit_papers",
    "simulate_stochastic",
    "solve_ultimate_impact",
    "solve_upsilon",
    "summarize",
    "write_cohort",
    "write_series_csv",
    "write_trajectory",
]
