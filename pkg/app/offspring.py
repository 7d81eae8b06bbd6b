"""
Offspring distributions of a Galton-Watson process.

Three families are supported: a finite PMF on {0..k}, Poisson(lambda) and
Geometric(p) with P(X=j) = p(1-p)^j on j >= 0. All values are immutable.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial
from scipy import stats

from app.constants import (
    BASE_TAIL_TOL,
    GEOMETRIC_AGNOSTIC_P,
    MEDIAN_CDF_TOL,
    PMF_SUM_TOL,
    POISSON_AGNOSTIC_LAMBDA,
)
from app.logger import get_logger
from app.types import InvalidDistributionError

logger = get_logger("offspring")

ArrayOrFloat = Union[float, np.ndarray]


class OffspringDistribution(ABC):
    """Common interface of the offspring law pi."""

    @abstractmethod
    def pmf(self, j: int) -> float: ...

    @abstractmethod
    def cdf(self, j: int) -> float: ...

    @abstractmethod
    def mean(self) -> float: ...

    @abstractmethod
    def variance(self) -> float: ...

    @abstractmethod
    def _pgf(self, s: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray: ...

    @abstractmethod
    def support_bound(self, tail: float = BASE_TAIL_TOL) -> int:
        """Smallest J with P(X > J) below ``tail``."""

    @abstractmethod
    def spec(self) -> str:
        """Textual form accepted by ``parse_offspring_spec``."""

    def pgf(self, s: ArrayOrFloat) -> ArrayOrFloat:
        s_arr = np.asarray(s, dtype=float)
        if np.any((s_arr < 0.0) | (s_arr > 1.0)):
            raise ValueError("The PGF is evaluated on [0, 1] only")
        values = np.where(s_arr == 1.0, 1.0, self._pgf(s_arr))
        if values.ndim == 0:
            return float(values)
        return values

    def median(self) -> int:
        """Smallest M with CDF(M) >= 1/2, from the exact CDF."""
        m = 0
        while self.cdf(m) < 0.5 - MEDIAN_CDF_TOL:
            m += 1
        return m

    def pmf_vector(self, upto: int) -> np.ndarray:
        return np.array([self.pmf(j) for j in range(upto + 1)])


@dataclass(frozen=True)
class FinitePmf(OffspringDistribution):
    probs: Tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if not probs:
            raise InvalidDistributionError("A finite PMF needs at least one entry")
        if any(not math.isfinite(p) or p < 0.0 for p in probs):
            raise InvalidDistributionError(f"Negative or non-finite probability in {probs}")
        total = math.fsum(probs)
        if abs(total - 1.0) > PMF_SUM_TOL:
            raise InvalidDistributionError(f"Probabilities sum to {total!r}, not 1")
        # trailing zeros do not belong to the support
        last = max(j for j, p in enumerate(probs) if p > 0.0)
        object.__setattr__(self, "probs", probs[: last + 1])

    @property
    def k(self) -> int:
        return len(self.probs) - 1

    def pmf(self, j: int) -> float:
        if j < 0 or j > self.k:
            return 0.0
        return self.probs[j]

    def cdf(self, j: int) -> float:
        if j < 0:
            return 0.0
        return math.fsum(self.probs[: j + 1])

    def mean(self) -> float:
        return math.fsum(j * p for j, p in enumerate(self.probs))

    def variance(self) -> float:
        second = math.fsum(j * j * p for j, p in enumerate(self.probs))
        return second - self.mean() ** 2

    def _pgf(self, s: np.ndarray) -> np.ndarray:
        return polynomial.polyval(s, self.probs)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.k == 0:
            return np.zeros(size, dtype=np.int64)
        return rng.choice(self.k + 1, size=size, p=np.asarray(self.probs))

    def support_bound(self, tail: float = BASE_TAIL_TOL) -> int:
        return self.k

    def spec(self) -> str:
        return "finite:" + ",".join(repr(p) for p in self.probs)


@dataclass(frozen=True)
class Poisson(OffspringDistribution):
    rate: float

    def __post_init__(self):
        if not math.isfinite(self.rate) or self.rate <= 0.0:
            raise InvalidDistributionError(f"Poisson rate must be positive, got {self.rate}")

    def pmf(self, j: int) -> float:
        return float(stats.poisson.pmf(j, self.rate))

    def cdf(self, j: int) -> float:
        return float(stats.poisson.cdf(j, self.rate))

    def mean(self) -> float:
        return self.rate

    def variance(self) -> float:
        return self.rate

    def _pgf(self, s: np.ndarray) -> np.ndarray:
        return np.exp(self.rate * (s - 1.0))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.poisson(self.rate, size=size)

    def support_bound(self, tail: float = BASE_TAIL_TOL) -> int:
        return int(stats.poisson.isf(tail, self.rate))

    def spec(self) -> str:
        return f"poisson:{self.rate!r}"


@dataclass(frozen=True)
class Geometric(OffspringDistribution):
    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise InvalidDistributionError(f"Geometric p must lie in (0, 1), got {self.p}")

    def pmf(self, j: int) -> float:
        if j < 0:
            return 0.0
        return self.p * (1.0 - self.p) ** j

    def cdf(self, j: int) -> float:
        if j < 0:
            return 0.0
        return 1.0 - (1.0 - self.p) ** (j + 1)

    def mean(self) -> float:
        return (1.0 - self.p) / self.p

    def variance(self) -> float:
        return (1.0 - self.p) / self.p**2

    def _pgf(self, s: np.ndarray) -> np.ndarray:
        return self.p / (1.0 - (1.0 - self.p) * s)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # numpy counts trials up to the first success
        return rng.geometric(self.p, size=size) - 1

    def support_bound(self, tail: float = BASE_TAIL_TOL) -> int:
        return max(0, math.ceil(math.log(tail) / math.log1p(-self.p)) - 1)

    def spec(self) -> str:
        return f"geometric:{self.p!r}"


def pmf(dist: OffspringDistribution, j: int) -> float:
    if j < 0:
        raise ValueError(f"Offspring counts are nonnegative, got {j}")
    return dist.pmf(j)


def mean(dist: OffspringDistribution) -> float:
    return dist.mean()


def pgf(dist: OffspringDistribution, s: ArrayOrFloat) -> ArrayOrFloat:
    return dist.pgf(s)


def median(dist: OffspringDistribution) -> int:
    return dist.median()


def median_approximation(rate: float) -> int:
    """Printed floor approximation of the Poisson median; cross-check only."""
    return math.floor(rate + 1.0 / 3.0 - 1.0 / (50.0 * rate))


class AgnosticFamily(str, Enum):
    POISSON = "poisson"
    GEOMETRIC = "geometric"
    DISCRETE = "discrete"

    def __str__(self):
        return str(self.value)


class AgnosticBase(NamedTuple):
    """Base measure calibrated to median one, plus the concentration when fixed."""

    base: OffspringDistribution
    concentration: Optional[float] = None


def calibrate_agnostic_base(
    family: Union[AgnosticFamily, str], k: Optional[int] = None
) -> AgnosticBase:
    family = AgnosticFamily(family)
    if family is AgnosticFamily.POISSON:
        return AgnosticBase(Poisson(POISSON_AGNOSTIC_LAMBDA))
    if family is AgnosticFamily.GEOMETRIC:
        return AgnosticBase(Geometric(GEOMETRIC_AGNOSTIC_P))

    if k is None or k < 2:
        raise InvalidDistributionError(
            f"The discrete agnostic base needs k >= 2, got {k}"
        )
    a = 1.0 + math.log(2.0) / math.log(k)
    probs = [0.0] * (k + 1)
    probs[0] = 1.0 / a
    probs[k] = (a - 1.0) / a
    logger.debug(f"Discrete agnostic base for k={k}: a={a}")
    return AgnosticBase(FinitePmf(tuple(probs)), a)


def parse_offspring_spec(text: str) -> OffspringDistribution:
    """
    Parse ``poisson:<lambda>``, ``geometric:<p>``, ``finite:<p0,...,pk>``,
    ``poisson:agnostic``, ``geometric:agnostic`` or ``discrete:agnostic:<k>``.
    """
    family, _, rest = text.strip().partition(":")
    family = family.lower()
    try:
        if family in ("poisson", "geometric") and rest == "agnostic":
            return calibrate_agnostic_base(family).base
        if family == "discrete" and rest.startswith("agnostic:"):
            return calibrate_agnostic_base(
                AgnosticFamily.DISCRETE, int(rest.split(":", 1)[1])
            ).base
        if family == "poisson":
            return Poisson(float(rest))
        if family == "geometric":
            return Geometric(float(rest))
        if family == "finite":
            return FinitePmf(tuple(float(p) for p in rest.split(",")))
    except ValueError as e:
        raise InvalidDistributionError(f"Invalid offspring spec '{text}': {e}") from e
    raise InvalidDistributionError(f"Unknown offspring spec '{text}'")
