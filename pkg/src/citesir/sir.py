"""Deterministic SIR dynamics for citation histories.

A hit paper recruits citations the way an infection recruits cases:
S(t) counts papers that could still cite it, I(t) counts recent citers
that still prompt new citations, R(t) counts citers whose influence has
lapsed. With N = S0 + I0 constant,

    dS/dt = -beta * S * I / N
    dI/dt =  beta * S * I / N - gamma * I
    dR/dt =  gamma * I

and the cumulative citation count is Upsilon(t) = S0 - S(t).

Rates are per month; the monthly sampling grid matches how citation
counts are reported. Integration is classical fixed-step RK4 (internal
step 0.05 month), which is bit-reproducible and plenty accurate for the
smooth, non-stiff regimes the fitter explores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError, SampleNotFoundError

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, belt and braces
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def decorate(func):
            return func

        return decorate


DEFAULT_INTERNAL_STEP = 0.05  # months


@dataclass(frozen=True)
class EpidemicParams:
    """Model parameters for one paper.

    s0: initial pool of potential citing papers (> 0).
    beta: transmission rate, 1/month (>= 0; zero means no citation flow).
    gamma: removal rate, 1/month (> 0).
    i0: initially influential papers (>= 0; the fitted model uses 1).
    """

    s0: float
    beta: float
    gamma: float
    i0: float = 1.0

    def __post_init__(self):
        for name in ("s0", "beta", "gamma", "i0"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.s0 <= 0:
            raise DomainError(f"s0 must be positive, got {self.s0!r}")
        if self.beta < 0:
            raise DomainError(f"beta must be non-negative, got {self.beta!r}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be positive, got {self.gamma!r}")
        if self.i0 < 0:
            raise DomainError(f"i0 must be non-negative, got {self.i0!r}")

    def n(self) -> float:
        """Total population N = s0 + i0, conserved by the dynamics."""
        return self.s0 + self.i0

    def r0(self) -> float:
        """Basic reproductive number beta/gamma."""
        return self.beta / self.gamma

    def rho(self) -> float:
        """Inverse reproductive number gamma/beta."""
        if self.beta == 0:
            raise DomainError("rho is undefined for beta = 0")
        return self.gamma / self.beta


@dataclass(frozen=True)
class EpidemicState:
    """Compartment sizes at one instant (papers are real-valued here)."""

    t: float
    s: float
    i: float
    r: float


@dataclass(frozen=True)
class Trajectory:
    """Integrated model path sampled on a fixed time grid.

    states holds one EpidemicState per sample time; upsilon holds the
    matching cumulative citation counts S0 - S(t).
    """

    params: EpidemicParams
    states: tuple[EpidemicState, ...]
    upsilon: tuple[float, ...]

    def times(self) -> tuple[float, ...]:
        return tuple(state.t for state in self.states)


def rhs(state: EpidemicState, params: EpidemicParams) -> tuple[float, float, float]:
    """Right-hand side of the model at `state`: (dS/dt, dI/dt, dR/dt).

    The three components describe a pure flow S -> I -> R, so they sum
    to zero (conservation of N).
    """
    for name in ("t", "s", "i", "r"):
        if not math.isfinite(getattr(state, name)):
            raise DomainError(f"state.{name} must be finite")
    transmission = params.beta * state.s * state.i / params.n()
    removal = params.gamma * state.i
    return (-transmission, transmission - removal, removal)


@njit(cache=True)
def _rk4_core(s0, i0, beta, gamma, n_samples, dt, n_sub):
    """Fixed-step RK4 over n_samples output intervals of width dt.

    Returns (status, S, I, R) arrays of length n_samples + 1. status is
    0 on success, 1 when a compartment fell below the failure threshold
    (-1e-6 * N), signalling genuine instability rather than roundoff.

    Stage derivatives clamp tiny negative S or I to zero so that the
    computed S is non-increasing (and R non-decreasing) even once a
    compartment has decayed to the roundoff floor.
    """
    n = s0 + i0
    out_s = np.empty(n_samples + 1)
    out_i = np.empty(n_samples + 1)
    out_r = np.empty(n_samples + 1)
    s = s0
    i = i0
    r = 0.0
    out_s[0] = s
    out_i[0] = i
    out_r[0] = r
    h = dt / n_sub
    fail_below = -1e-6 * n
    for k in range(n_samples):
        for _ in range(n_sub):
            s1 = s if s > 0.0 else 0.0
            i1 = i if i > 0.0 else 0.0
            a = beta * s1 * i1 / n
            b = gamma * i1
            k1s, k1i, k1r = -a, a - b, b

            s2 = s + 0.5 * h * k1s
            i2 = i + 0.5 * h * k1i
            if s2 < 0.0:
                s2 = 0.0
            if i2 < 0.0:
                i2 = 0.0
            a = beta * s2 * i2 / n
            b = gamma * i2
            k2s, k2i, k2r = -a, a - b, b

            s3 = s + 0.5 * h * k2s
            i3 = i + 0.5 * h * k2i
            if s3 < 0.0:
                s3 = 0.0
            if i3 < 0.0:
                i3 = 0.0
            a = beta * s3 * i3 / n
            b = gamma * i3
            k3s, k3i, k3r = -a, a - b, b

            s4 = s + h * k3s
            i4 = i + h * k3i
            if s4 < 0.0:
                s4 = 0.0
            if i4 < 0.0:
                i4 = 0.0
            a = beta * s4 * i4 / n
            b = gamma * i4
            k4s, k4i, k4r = -a, a - b, b

            s = s + (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
            i = i + (h / 6.0) * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
            r = r + (h / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)

            if s < fail_below or i < fail_below or r < fail_below:
                return 1, out_s, out_i, out_r
            if s < 0.0:
                s = 0.0
            if i < 0.0:
                i = 0.0
            if r < 0.0:
                r = 0.0
        out_s[k + 1] = s
        out_i[k + 1] = i
        out_r[k + 1] = r
    return 0, out_s, out_i, out_r


def _grid(params: EpidemicParams, horizon: float, sample_step: float,
          internal_step: float) -> tuple[int, int]:
    """Validate the sampling request and pick (n_samples, n_sub)."""
    if not (math.isfinite(horizon) and horizon > 0):
        raise DomainError(f"horizon must be positive, got {horizon!r}")
    if not (math.isfinite(sample_step) and sample_step > 0):
        raise DomainError(f"sample_step must be positive, got {sample_step!r}")
    if not (math.isfinite(internal_step) and internal_step > 0):
        raise DomainError(f"internal_step must be positive, got {internal_step!r}")
    n_samples = round(horizon / sample_step)
    if n_samples < 1 or abs(n_samples * sample_step - horizon) > 1e-9 * horizon:
        raise DomainError(
            f"sample_step {sample_step!r} does not divide horizon {horizon!r}")
    n_sub = max(1, round(sample_step / internal_step))
    # RK4 is only stable for h * rate below ~2.8; refine the internal step
    # deterministically when rates exceed the nominal design envelope
    # (~10/month) so the fitter can probe its full rate bounds.
    max_rate = max(params.beta, params.gamma)
    if max_rate > 0:
        n_sub = max(n_sub, math.ceil(2.0 * sample_step * max_rate))
    if sample_step / n_sub <= 0:
        raise NumericalError("internal step underflow")
    return n_samples, n_sub


def _integrate_arrays(params: EpidemicParams, horizon: float, sample_step: float,
                      internal_step: float):
    n_samples, n_sub = _grid(params, horizon, sample_step, internal_step)
    status, s, i, r = _rk4_core(
        float(params.s0), float(params.i0), float(params.beta),
        float(params.gamma), n_samples, float(sample_step), n_sub)
    if status != 0:
        raise NumericalError(
            f"integration unstable for params {params!r} (compartment below -1e-6*N)")
    return s, i, r


def integrate_upsilon(params: EpidemicParams, horizon: float,
                      sample_step: float = 1.0,
                      internal_step: float = DEFAULT_INTERNAL_STEP) -> np.ndarray:
    """Cumulative citations Upsilon on the sample grid, as a float array.

    Cheap path for the fitter: identical arithmetic to `integrate` but
    skips building state objects.
    """
    s, _, _ = _integrate_arrays(params, horizon, sample_step, internal_step)
    return params.s0 - s


def integrate(params: EpidemicParams, horizon: float, sample_step: float = 1.0,
              internal_step: float = DEFAULT_INTERNAL_STEP) -> Trajectory:
    """Integrate the model and sample it at t = 0, step, 2*step, ..., horizon.

    Args:
        params: model parameters.
        horizon: final time in months (> 0).
        sample_step: output spacing in months; must divide horizon.
        internal_step: nominal RK4 step (months). Exposed so tests can
            verify step-halving convergence; leave at the default otherwise.

    Returns:
        Trajectory with conservation |S+I+R-N| <= 1e-6*N at every sample.

    Raises:
        DomainError: invalid horizon/steps.
        NumericalError: integration left the physical region.
    """
    s, i, r = _integrate_arrays(params, horizon, sample_step, internal_step)
    states = tuple(
        EpidemicState(t=k * sample_step, s=float(s[k]), i=float(i[k]), r=float(r[k]))
        for k in range(len(s)))
    upsilon = tuple(float(params.s0 - sk) for sk in s)
    return Trajectory(params=params, states=states, upsilon=upsilon)


def cumulative_citations(traj: Trajectory, t: float) -> float:
    """Upsilon(t) = S0 - S(t) for a sampled time t of the trajectory."""
    times = traj.times()
    step = times[1] - times[0] if len(times) > 1 else 1.0
    k = round(t / step) if step > 0 else 0
    if 0 <= k < len(times) and abs(times[k] - t) <= 1e-9 * max(1.0, abs(t)):
        return traj.upsilon[k]
    raise SampleNotFoundError(f"t={t!r} is not one of the trajectory's sample times")


def write_trajectory(traj: Trajectory, path) -> None:
    """Export (t_month, upsilon) as two-column plain text for plotting."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# t_month upsilon\n")
        for state, u in zip(traj.states, traj.upsilon):
            fh.write(f"{state.t!r} {u!r}\n")
