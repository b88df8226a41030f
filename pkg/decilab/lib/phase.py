"""Closed-form evaluators for the phase diagram of decimated random k-SAT.

Everything is parametrized by the clause width k, the rescaled density
rho = k*r/2^k and the free-variable fraction theta = 1 - t/n. Evaluators
are pure and use scipy's special functions so endpoint limits are exact.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import cache
import logging
from math import ceil, exp, inf, log, nan

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import entr, gammaln, xlogy

from ..types import PhaseConstants, Regime
from ..utils.validation import ValidationError, validate_int

logger = logging.getLogger(__name__)

SUPREMUM_RESOLUTION = 1e-4
SUPREMUM_TOLERANCE = 1e-6
MIN_GRID_POINTS = 10_001
LN2 = log(2.0)


# ============================================================================
# Parameter conversions
# ============================================================================


def rho_from_r(k: int, r: float) -> float:
    """rho = k*r/2^k.

    Examples:
        >>> rho_from_r(4, 2.0)
        0.5
    """
    return k * r / 2**k


def r_from_rho(k: int, rho: float) -> float:
    return rho * 2**k / k


def theta_from_t(n: int, t: int) -> float:
    """Free-variable fraction 1 - t/n."""
    validate_int("n", n, minimum=1)
    if not 0 <= t <= n:
        raise ValidationError(f"t must lie in [0, {n}] (got {t})")
    return 1.0 - t / n


def overlap_threshold(k: int, rho: float) -> float:
    """Smallest theta at which the average distance is expected to exceed 0.49*theta*n."""
    return rho / (k * LN2) * (1.0 + rho**-2 + k / 2 ** (k - 2))


def condensation_diameter(n: int, k: int, rho: float) -> float:
    """Diameter scale exp(2 - rho)*n/k of a condensed solution set."""
    return exp(2.0 - rho) * n / k


# ============================================================================
# Entropy-type functions
# ============================================================================


def entropy_h(x: float) -> float:
    """h(x) = -x ln x - (1-x) ln(1-x), with h(0) = h(1) = 0.

    Examples:
        >>> round(entropy_h(0.5), 12) == round(log(2), 12)
        True
    """
    if not 0.0 <= x <= 1.0:
        raise ValidationError(f"h is defined on [0, 1] (got {x})")
    return float(entr(x) + entr(1.0 - x))


def chernoff_phi(x: float) -> float:
    """phi(x) = (1+x) ln(1+x) - x for x > -1.

    Examples:
        >>> chernoff_phi(0.0)
        0.0
    """
    if not x > -1.0:
        raise ValidationError(f"phi is defined for x > -1 (got {x})")
    return float(xlogy(1.0 + x, 1.0 + x) - x)


def _clause_factor(overlap: np.ndarray, k: int) -> np.ndarray:
    """ln(1 - (1 - (1 - overlap)^k) / (2^k - 1))."""
    with np.errstate(divide="ignore"):
        hit = -np.expm1(k * np.log1p(-overlap))
    return np.log1p(-hit / (2**k - 1))


def psi(alpha: float | np.ndarray, theta: float, k: int, r: float) -> float | np.ndarray:
    """Exponential rate of E X_alpha, the solutions at distance alpha*theta*n from the planted one.

    psi(alpha) = theta*h(alpha) + r ln(1 - (1 - (1 - alpha*theta)^k) / (2^k - 1))

    Raises:
        ValidationError: If alpha leaves [0, 1] or alpha*theta exceeds 1
    """
    values = np.asarray(alpha, dtype=float)
    if np.any((values < 0.0) | (values > 1.0)):
        raise ValidationError("alpha must lie in [0, 1]")
    if theta <= 0.0 or np.any(values * theta > 1.0):
        raise ValidationError("theta must be positive with alpha*theta <= 1")
    result = theta * (entr(values) + entr(1.0 - values)) + r * _clause_factor(values * theta, k)
    return float(result) if result.ndim == 0 else result


@dataclass(frozen=True, slots=True)
class Supremum:
    value: float
    argmax: float


def psi_supremum(lo: float, hi: float, theta: float, k: int, r: float) -> Supremum:
    """sup of psi over [lo, hi]: a dense grid followed by bounded refinement.

    The grid spacing is at most 1e-4 and the refinement tolerance 1e-6 in alpha.
    """
    hi = min(hi, 1.0, 1.0 / theta)
    if not 0.0 <= lo < hi:
        raise ValidationError(f"empty supremum range [{lo}, {hi}]")
    points = max(MIN_GRID_POINTS, ceil((hi - lo) / SUPREMUM_RESOLUTION) + 1)
    grid = np.linspace(lo, hi, points)
    values = psi(grid, theta, k, r)
    assert isinstance(values, np.ndarray)
    best = int(np.argmax(values))
    left, right = grid[max(best - 1, 0)], grid[min(best + 1, points - 1)]
    refined = minimize_scalar(
        lambda a: -psi(a, theta, k, r),
        bounds=(left, right),
        method="bounded",
        options={"xatol": SUPREMUM_TOLERANCE},
    )
    if -refined.fun > values[best]:
        return Supremum(float(-refined.fun), float(refined.x))
    return Supremum(float(values[best]), float(grid[best]))


# ============================================================================
# Moment and counting bounds
# ============================================================================


@dataclass(frozen=True, slots=True)
class FirstMomentBound:
    """ln of the binomial-form bound on E X_alpha next to n*psi(alpha)."""

    log_bound: float
    psi_rate: float
    free: int
    distance: int

    def gap(self, n: int) -> float:
        return self.log_bound - n * self.psi_rate


def first_moment_bound(alpha: float, theta: float, k: int, n: int, m: int) -> FirstMomentBound:
    """ln[ C(theta*n, alpha*theta*n) * (1 - (1 - (1 - alpha*theta)^k)/(2^k - 1))^m ].

    theta*n and alpha*theta*n are rounded to the nearest integers and psi is
    evaluated at the rounded distance.
    """
    validate_int("n", n, minimum=1)
    validate_int("m", m)
    free = round(theta * n)
    distance = round(alpha * free)
    binomial = gammaln(free + 1) - gammaln(distance + 1) - gammaln(free - distance + 1)
    clause = _clause_factor(np.asarray(distance / n), k)
    effective_alpha = distance / free if free else 0.0
    return FirstMomentBound(
        log_bound=float(binomial + m * clause),
        psi_rate=float(psi(effective_alpha, free / n, k, m / n)) if free else 0.0,
        free=free,
        distance=distance,
    )


@dataclass(frozen=True, slots=True)
class CountBound:
    """Lower bounds on (1/n) ln |S| before and after decimation."""

    undecimated: float
    decimated: float
    in_range: bool


def count_lower_bound(k: int, r: float, theta: float) -> CountBound:
    """ln2 + r ln(1-2^-k) - 0.99 rho/2^k and theta ln2 + r ln(1-2^-k) - k r/4^k.

    Out-of-range parameters (k < 4 or rho > k ln2 - k^2/2^k) still get
    values, with a warning.
    """
    rho = rho_from_r(k, r)
    clause = r * log(1.0 - 2.0**-k)
    in_range = k >= 4 and rho <= k * LN2 - k**2 / 2**k
    if not in_range:
        logger.warning("count bound evaluated outside its range: k=%d rho=%.4g", k, rho)
    return CountBound(
        undecimated=LN2 + clause - 0.99 * rho / 2**k,
        decimated=theta * LN2 + clause - k * r / 4**k,
        in_range=in_range,
    )


@dataclass(frozen=True, slots=True)
class MomentConstants:
    """Constants of the random-support argument at (k, rho, theta)."""

    mu: float
    zeta_main: float
    zeta_apx: float
    lambda_: float
    gamma: float
    b: float
    condition_value: float
    condition: bool
    degenerate: bool

    @property
    def zeta_condition(self) -> bool:
        return 0.0 < self.zeta_apx < 1.0


def moment_constants(k: int, rho: float, theta: float) -> MomentConstants:
    """mu, both zetas, lambda, gamma and b; the Poisson condition uses zeta_apx.

    The condition is theta*(zeta ln gamma + h(zeta)) + rho/2^k < 0. A
    non-positive gamma or 3*theta*zeta > 1 is reported as degenerate.
    """
    if k < 1 or rho <= 0.0 or theta <= 0.0:
        raise ValidationError("moment constants need k >= 1, rho > 0 and theta > 0")
    mu = rho * 2**k / (2**k - 1)
    zeta_main = rho**2 / exp(rho)
    zeta = (1.0 + mu + mu**2 / 2.0) / exp(mu)
    base = 1.0 - 3.0 * theta * zeta
    lambda_ = 1.0 - base ** (k - 1) if base >= 0.0 else nan
    gamma = mu * (exp(lambda_ * mu) - 1.0 - lambda_ * mu) / ((1.0 - zeta) * exp(mu))
    b = theta * LN2 + 2**k * rho * log(1.0 - 2.0**-k) / k - rho / 2**k
    degenerate = not gamma > 0.0 or not 0.0 < zeta < 1.0
    if degenerate:
        value = nan
    else:
        value = theta * (zeta * log(gamma) + entropy_h(zeta)) + rho / 2**k
    return MomentConstants(
        mu=mu,
        zeta_main=zeta_main,
        zeta_apx=zeta,
        lambda_=lambda_,
        gamma=gamma,
        b=b,
        condition_value=value,
        condition=not degenerate and value < 0.0,
        degenerate=degenerate,
    )


# ============================================================================
# Regime classification
# ============================================================================


@dataclass(frozen=True, slots=True)
class PhasePoint:
    """A point (k, rho, theta) of the phase diagram."""

    k: int
    rho: float
    theta: float
    n: int | None = None

    def __post_init__(self) -> None:
        validate_int("k", self.k, minimum=2)
        if not self.rho > 0.0:
            raise ValidationError(f"rho must be positive (got {self.rho})")
        if not 0.0 <= self.theta <= 1.0:
            raise ValidationError(f"theta must lie in [0, 1] (got {self.theta})")

    @property
    def r(self) -> float:
        return r_from_rho(self.k, self.rho)

    @property
    def k_theta(self) -> float:
        return self.k * self.theta

    @property
    def t(self) -> int | None:
        return None if self.n is None else round((1.0 - self.theta) * self.n)


@dataclass(frozen=True, slots=True)
class InequalityCheck:
    """lower < k*theta < upper (or <=, per regime), with both sides evaluated."""

    lower: float
    value: float
    upper: float
    holds: bool


@dataclass(frozen=True, slots=True)
class RegimeVerdict:
    point: PhasePoint
    labels: frozenset[Regime]
    checks: dict[Regime, InequalityCheck] = field(default_factory=dict)
    in_theorem_range: bool = False


@cache
def _warn_default_constants() -> None:
    logger.warning("phase constants k0, rho0, c0, c are working defaults, not derived values")


def in_theorem_range(point: PhasePoint, constants: PhaseConstants | None = None) -> bool:
    """k >= k0 and rho0 <= rho <= k ln2 - 2 ln k."""
    constants = constants or PhaseConstants()
    upper = point.k * LN2 - 2 * log(point.k)
    return point.k >= constants.k0 and constants.rho0 <= point.rho <= upper


def _saturating_exp(x: float) -> float:
    return exp(x) if x < 700.0 else inf


def _checks(point: PhasePoint, constants: PhaseConstants) -> dict[Regime, InequalityCheck]:
    rho, value = point.rho, point.k_theta
    ln_rho = log(rho)
    symmetric = _saturating_exp(rho + log(ln_rho) + 10.0) if rho > 1.0 else nan
    shattered = (rho / LN2 * (1.0 + 2.0 / rho**2), _saturating_exp(rho - ln_rho - 2.0))
    condensed = (ln_rho, (1.0 - rho**-2) * rho / LN2)
    forced_upper = ln_rho - 10.0
    mismatch = (constants.c0 * ln_rho, rho / LN2)
    return {
        Regime.SYMMETRIC: InequalityCheck(symmetric, value, float("inf"), value > symmetric),
        Regime.SHATTERED: InequalityCheck(
            shattered[0], value, shattered[1], shattered[0] <= value <= shattered[1]
        ),
        Regime.CONDENSED: InequalityCheck(
            condensed[0], value, condensed[1], condensed[0] < value < condensed[1]
        ),
        Regime.FORCED: InequalityCheck(0.0, value, forced_upper, 0.0 < value < forced_upper),
        Regime.BP_MISMATCH: InequalityCheck(
            mismatch[0], value, mismatch[1], mismatch[0] < value < mismatch[1]
        ),
    }


def classify_regime(
    point: PhasePoint, constants: PhaseConstants | None = None
) -> RegimeVerdict:
    """Every regime whose defining inequality in k*theta holds; UNCLASSIFIED if none.

    Regimes leave gaps, so UNCLASSIFIED is a regular outcome. The theorem
    range is reported separately and never filters labels.
    """
    if constants is None:
        _warn_default_constants()
        constants = PhaseConstants()
    checks = _checks(point, constants)
    labels = frozenset(regime for regime, check in checks.items() if check.holds)
    return RegimeVerdict(
        point=point,
        labels=labels or frozenset({Regime.UNCLASSIFIED}),
        checks=checks,
        in_theorem_range=in_theorem_range(point, constants),
    )


@dataclass(frozen=True, slots=True)
class ConditionReport:
    """Shattering and condensation conditions on psi at cut-off ``a``."""

    a: float
    psi_at_a: float
    below: Supremum
    above: Supremum
    b: float
    shatters: bool
    condenses: bool


def shatter_condensation_conditions(point: PhasePoint, a: float) -> ConditionReport:
    """Shattering: psi(a) + rho/2^k < 0 and sup_{alpha<a} psi < b.

    Condensation: sup_{a<alpha<=1} psi + rho/2^k < 0.
    """
    if not 0.0 < a < 1.0:
        raise ValidationError(f"a must lie in (0, 1) (got {a})")
    k, rho, theta, r = point.k, point.rho, point.theta, point.r
    offset = rho / 2**k
    psi_a = float(psi(a, theta, k, r))
    below = psi_supremum(0.0, a, theta, k, r)
    above = psi_supremum(a, 1.0, theta, k, r)
    b = theta * LN2 + r * log(1.0 - 2.0**-k) - offset
    return ConditionReport(
        a=a,
        psi_at_a=psi_a,
        below=below,
        above=above,
        b=b,
        shatters=psi_a + offset < 0.0 and below.value < b,
        condenses=above.value + offset < 0.0,
    )


PHASE_FIELDS = (
    "k",
    "rho",
    "theta",
    "k_theta",
    "labels",
    "in_theorem_range",
    "symmetric_lower",
    "shattered_lower",
    "shattered_upper",
    "condensed_lower",
    "condensed_upper",
    "forced_upper",
    "mismatch_lower",
    "mismatch_upper",
)


def verdict_row(verdict: RegimeVerdict) -> dict[str, object]:
    """Flatten a verdict into one row keyed by PHASE_FIELDS."""
    checks = verdict.checks
    labels = "|".join(sorted(label.value for label in verdict.labels))
    return {
        "k": verdict.point.k,
        "rho": verdict.point.rho,
        "theta": verdict.point.theta,
        "k_theta": verdict.point.k_theta,
        "labels": labels,
        "in_theorem_range": verdict.in_theorem_range,
        "symmetric_lower": checks[Regime.SYMMETRIC].lower,
        "shattered_lower": checks[Regime.SHATTERED].lower,
        "shattered_upper": checks[Regime.SHATTERED].upper,
        "condensed_lower": checks[Regime.CONDENSED].lower,
        "condensed_upper": checks[Regime.CONDENSED].upper,
        "forced_upper": checks[Regime.FORCED].upper,
        "mismatch_lower": checks[Regime.BP_MISMATCH].lower,
        "mismatch_upper": checks[Regime.BP_MISMATCH].upper,
    }


def phase_grid(
    k: int,
    rhos: Iterable[float],
    thetas: Iterable[float],
    constants: PhaseConstants | None = None,
) -> list[dict[str, object]]:
    """Verdict rows over the product of ``rhos`` and ``thetas``, rho-major."""
    theta_values = list(thetas)
    return [
        verdict_row(classify_regime(PhasePoint(k, rho, theta), constants))
        for rho in rhos
        for theta in theta_values
    ]
