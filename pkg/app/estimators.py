"""
Classical and parametric-Bayesian estimators of the offspring average m.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy import special, stats

from app.constants import PROBABILITY_THRESHOLD, SUPERCRITICAL_THRESHOLD
from app.logger import get_logger
from app.process import GenerationSeries, OffspringCounts, pool_counts
from app.rng import RngLike, as_generator
from app.settings import settings
from app.types import InvalidDataError, InvalidDistributionError

logger = get_logger("estimators")


class Classification(str, Enum):
    SUBCRITICAL_OR_CRITICAL = "subcritical_or_critical"
    SUPERCRITICAL = "supercritical"

    def __str__(self):
        return str(self.value)


class PriorVariant(str, Enum):
    A = "A"
    B = "B"

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True, eq=False)
class DirichletParams:
    alpha: np.ndarray = field(repr=False)

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float)
        if alpha.ndim != 1 or alpha.size < 2:
            raise InvalidDistributionError("A Dirichlet needs at least two parameters")
        if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0.0):
            raise InvalidDistributionError(f"Dirichlet parameters must be positive: {alpha}")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def k(self) -> int:
        return self.alpha.size - 1

    @property
    def total(self) -> float:
        return float(self.alpha.sum())

    def mean_vector(self) -> np.ndarray:
        return self.alpha / self.total

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirichletParams):
            return NotImplemented
        return self.alpha.shape == other.alpha.shape and bool(np.all(self.alpha == other.alpha))

    def __hash__(self) -> int:
        return hash(self.alpha.tobytes())

    def __repr__(self) -> str:
        return f"DirichletParams({self.alpha.tolist()})"


@dataclass(frozen=True)
class MDensityParams:
    """Non-standard beta law of m on [c, d] with shapes a and b."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.a <= 0.0 or self.b <= 0.0:
            raise InvalidDistributionError(f"Shapes must be positive: a={self.a}, b={self.b}")
        if not self.c < self.d:
            raise InvalidDistributionError(f"Support must satisfy c < d: [{self.c}, {self.d}]")

    def frozen(self):
        return stats.beta(self.a, self.b, loc=self.c, scale=self.d - self.c)

    def pdf(self, m):
        return self.frozen().pdf(m)

    def median(self) -> float:
        return float(self.frozen().median())


@dataclass(frozen=True)
class PosteriorSummary:
    m_hat: Optional[float]
    m_var: Optional[float]
    p_supercritical: Optional[float]
    classification: Classification


class MMoments(NamedTuple):
    mean: float
    variance: float


def classify(
    m_hat: Optional[float] = None, p_supercritical: Optional[float] = None
) -> Classification:
    """
    Threshold rule: m_hat >= 1 or P(m > 1) >= 0.5 is supercritical.

    Exactly one of the two decision statistics must be given.
    """
    if (m_hat is None) == (p_supercritical is None):
        raise ValueError("Pass exactly one of m_hat or p_supercritical")
    if m_hat is not None:
        value, threshold = m_hat, SUPERCRITICAL_THRESHOLD
    else:
        value, threshold = p_supercritical, PROBABILITY_THRESHOLD
    if not math.isfinite(value):
        raise ValueError(f"Decision statistic must be finite, got {value}")
    if value >= threshold:
        return Classification.SUPERCRITICAL
    return Classification.SUBCRITICAL_OR_CRITICAL


def _require_parents(series: GenerationSeries) -> None:
    if series.n < 1 or sum(series.parents) == 0:
        raise InvalidDataError(f"Series {series.z} records no reproduction step")


def mle_ratio(series: GenerationSeries) -> Fraction:
    """Total children over total parents, exactly."""
    _require_parents(series)
    return Fraction(sum(series.children), sum(series.parents))


def mle_mean(series: GenerationSeries) -> float:
    return float(mle_ratio(series))


def mle_offspring_probs(counts: OffspringCounts) -> List[Fraction]:
    totals = counts.column_totals()
    parents = int(totals.sum())
    if parents == 0:
        raise InvalidDataError("No parents recorded")
    return [Fraction(int(t), parents) for t in totals]


def mle_mean_complete(counts: OffspringCounts) -> Fraction:
    return sum(
        (j * p for j, p in enumerate(mle_offspring_probs(counts))), Fraction(0)
    )


def chi_square_survival(x: float, df: float) -> float:
    """P(chi2_df > x) as the regularized upper incomplete gamma Q(df/2, x/2)."""
    if df <= 0:
        return 0.0
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


def heyde_p_supercritical(series: GenerationSeries, cumulative: bool = False) -> float:
    """
    Chi-square approximation of P(m > 1) under the improper prior 1/m.

    By default Z_n, Z_{n-1} and Z_0 are single generation totals. With
    ``cumulative`` the degrees of freedom use total children and the
    threshold uses total parents.
    """
    _require_parents(series)
    if cumulative:
        df = 2 * sum(series.children)
        x = 2 * sum(series.parents)
    else:
        z = series.z
        df = 2 * (z[-1] - z[0])
        x = 2 * z[-2]
    return chi_square_survival(x, df)


def dirichlet_posterior(
    prior: DirichletParams, *counts: OffspringCounts
) -> DirichletParams:
    """Conjugate update: beta_j = alpha_j + sum_i Z_ij over every realization."""
    totals = pool_counts(counts)
    nonzero = np.nonzero(totals)[0]
    if nonzero.size and nonzero[-1] > prior.k:
        raise InvalidDataError(
            f"Observed offspring size {nonzero[-1]} lies outside the prior support 0..{prior.k}"
        )
    beta = prior.alpha.copy()
    width = min(totals.size, beta.size)
    beta[:width] += totals[:width]
    return DirichletParams(beta)


def posterior_m_moments(params: DirichletParams) -> MMoments:
    """Mean h'mu and variance h'Sigma h of m = sum_j j pi_j."""
    h = np.arange(params.k + 1, dtype=float)
    mu = params.mean_vector()
    m = float(h @ mu)
    second = float((h * h) @ mu)
    variance = max(0.0, (second - m * m) / (params.total + 1.0))
    return MMoments(m, variance)


def sample_m(params: DirichletParams, size: int, rng: RngLike) -> np.ndarray:
    """Draws of m = h'pi with pi ~ Dirichlet(params)."""
    generator = as_generator(rng)
    pi = generator.dirichlet(params.alpha, size=size)
    return pi @ np.arange(params.k + 1)


def dirichlet_summary(
    params: DirichletParams, rng: Optional[RngLike] = None, draws: int = 10_000
) -> PosteriorSummary:
    moments = posterior_m_moments(params)
    p_super = None
    if rng is not None:
        p_super = float(np.mean(sample_m(params, draws, rng) > SUPERCRITICAL_THRESHOLD))
    return PosteriorSummary(
        m_hat=moments.mean,
        m_var=moments.variance,
        p_supercritical=p_super,
        classification=classify(m_hat=moments.mean),
    )


def agnostic_dirichlet_prior(
    k: int,
    variant: Union[PriorVariant, str] = PriorVariant.A,
    eps: Optional[float] = None,
) -> DirichletParams:
    """
    Dirichlet prior whose induced law on m has median one.

    Variant A fixes alpha_0 = 1 and solves alpha_k = log 2 / log k; variant B
    fixes alpha_k = 1 and solves alpha_0 = log 2 / log(k/(k-1)). The
    interior parameters, zero in the limit, are set to ``eps``.
    """
    if k < 2:
        raise InvalidDistributionError(f"The agnostic Dirichlet prior needs k >= 2, got {k}")
    eps = settings.dirichlet_eps if eps is None else eps
    variant = PriorVariant(variant)
    alpha = np.full(k + 1, eps, dtype=float)
    if variant is PriorVariant.A:
        alpha[0] = 1.0
        alpha[k] = math.log(2.0) / math.log(k)
    else:
        alpha[0] = math.log(2.0) / math.log(k / (k - 1.0))
        alpha[k] = 1.0
    return DirichletParams(alpha)


def induced_m_density(params: DirichletParams) -> MDensityParams:
    k = params.k
    alpha = params.alpha
    total = params.total
    interior = np.arange(1, k)
    c = float(np.sum(interior * alpha[1:k]) / total)
    d = float(k - np.sum((k - interior) * alpha[1:k]) / total)
    return MDensityParams(a=float(alpha[k]), b=float(alpha[0]), c=c, d=d)


def sample_max_k(counts: Sequence[OffspringCounts], floor: int = 2) -> int:
    """Support size estimated by the sample maximum, at least ``floor``."""
    return max([floor] + [c.max_offspring for c in counts])
