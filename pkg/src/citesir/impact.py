"""Ultimate-impact quantities from the final-size fixed point.

Letting the epidemic run forever, the total number of citations
Upsilon_inf solves the transcendental equation

    Upsilon_inf = S0 * (1 - exp(-(Upsilon_inf + I0) / (N * rho)))

with rho = gamma/beta and N = S0 + I0. In the reduced form
upsilon = Upsilon_inf / S0 with I0 << N this becomes

    upsilon = 1 - exp(-upsilon / rho)

which has a nonzero root exactly when R0 = 1/rho > 1. The production
solver is bisection plus a short Newton polish; the closed-form
Lambert-W expression is used only as an oracle in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NumericalError
from .sir import EpidemicParams

_NEWTON_STEPS = 3
_BISECT_MAX = 200


@dataclass(frozen=True)
class ImpactEstimate:
    """Derived impact quantities for one parameter set.

    upsilon_inf: total citations ever acquired (the fixed-point root).
    upsilon_rel: upsilon_inf / S0, the fraction of the potential audience.
    r0: basic reproductive number beta/gamma.
    rho: gamma/beta.
    """

    upsilon_inf: float
    upsilon_rel: float
    r0: float
    rho: float

    def __post_init__(self):
        if not 0.0 <= self.upsilon_rel <= 1.0:
            raise DomainError(f"upsilon_rel outside [0, 1]: {self.upsilon_rel!r}")
        if self.upsilon_inf < 0:
            raise DomainError(f"upsilon_inf must be >= 0, got {self.upsilon_inf!r}")
        if self.r0 < 0 or self.rho <= 0:
            raise DomainError("r0 must be >= 0 and rho positive")
        if abs(self.r0 * self.rho - 1.0) > 1e-12:
            raise DomainError("r0 and rho are not reciprocal")


def basic_reproductive_number(params: EpidemicParams) -> float:
    """R0 = beta/gamma (gamma > 0 is enforced by EpidemicParams)."""
    return params.beta / params.gamma


def solve_upsilon(rho: float) -> float:
    """Largest root upsilon in [0, 1) of upsilon = 1 - exp(-upsilon/rho).

    Returns 0 for rho >= 1 (the only root at or below threshold). Near
    threshold, |R0 - 1| < 1e-12 also returns 0: the nonzero root has
    merged with zero.
    """
    try:
        rho = float(rho)
    except (TypeError, ValueError):
        raise DomainError(f"rho must be a positive finite number, got {rho!r}") from None
    if not math.isfinite(rho) or rho <= 0:
        raise DomainError(f"rho must be a positive finite number, got {rho!r}")
    if rho >= 1.0 or abs(1.0 / rho - 1.0) < 1e-12:
        return 0.0

    def f(u: float) -> float:
        # -expm1 avoids cancellation in 1 - exp(-u/rho) for tiny u
        return -math.expm1(-u / rho) - u

    lo, hi = 1e-15, 1.0
    # f(lo) ~ lo*(1/rho - 1) > 0 and f(1) = -exp(-1/rho) < 0
    for _ in range(_BISECT_MAX):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    u = 0.5 * (lo + hi)
    for _ in range(_NEWTON_STEPS):
        fprime = math.exp(-u / rho) / rho - 1.0
        if fprime == 0.0:
            break
        step = f(u) / fprime
        candidate = u - step
        if 0.0 < candidate < 1.0:
            u = candidate
    return u


def solve_ultimate_impact(params: EpidemicParams) -> ImpactEstimate:
    """Solve the final-size equation for Upsilon_inf.

    For I0 > 0 the root is unique in (0, S0] and strictly positive even
    at R0 <= 1. For I0 = 0 the problem reduces exactly to solve_upsilon.

    Raises:
        DomainError: beta = 0 (rho and R0 are undefined).
        NumericalError: residual above 1e-9 * S0 (should not happen for
            valid parameters; kept as a tripwire).
    """
    if params.beta == 0:
        raise DomainError("ultimate impact requires beta > 0")
    s0 = params.s0
    rho = params.rho()
    r0 = params.r0()

    if params.i0 == 0:
        u = solve_upsilon(rho)
        return ImpactEstimate(upsilon_inf=u * s0, upsilon_rel=u, r0=r0, rho=rho)

    n_rho = params.n() * rho

    def f(y: float) -> float:
        return y + s0 * math.expm1(-(y + params.i0) / n_rho)

    lo = 1e-9 * s0
    # f(0+) < 0 always (the I0 term), but for very large rho the root can
    # sit below the nominal bracket start; walk lo down until it brackets.
    while f(lo) >= 0.0 and lo > 1e-300:
        lo *= 0.0625
    hi = s0
    for _ in range(_BISECT_MAX):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * s0:
            break
    y = 0.5 * (lo + hi)
    for _ in range(_NEWTON_STEPS):
        fprime = 1.0 - (s0 / n_rho) * math.exp(-(y + params.i0) / n_rho)
        if fprime == 0.0:
            break
        candidate = y - f(y) / fprime
        if 0.0 < candidate <= s0:
            y = candidate
    if abs(f(y)) > 1e-9 * s0:
        raise NumericalError(
            f"final-size residual {f(y)!r} exceeds 1e-9*S0 for params {params!r}")
    return ImpactEstimate(upsilon_inf=y, upsilon_rel=y / s0, r0=r0, rho=rho)
