"""
Extinction probability: the smallest root of G(q) = q on [0, 1].
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from scipy import optimize

from app.constants import CRITICAL_MEAN_TOL
from app.logger import get_logger
from app.offspring import Geometric, OffspringDistribution, Poisson
from app.settings import settings
from app.types import ConvergenceError

logger = get_logger("extinction")


class ExtinctionMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    BISECTION = "bisection"

    def __str__(self):
        return str(self.value)


class FittedFamily(str, Enum):
    GEOMETRIC = "geometric"
    POISSON = "poisson"

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class ExtinctionResult:
    q: float
    residual: float
    iterations: int
    method: ExtinctionMethod


def extinction_probability(
    dist: OffspringDistribution,
    tol: Optional[float] = None,
    force_bisection: bool = False,
) -> ExtinctionResult:
    """
    Extinction probability of a process started from one individual.

    Closed forms cover m <= 1 (q = 1) and geometric laws (q = 1/m); any
    other supercritical law is solved by bisection on [0, 1 - delta], where
    the PGF is convex and crosses the diagonal exactly once.

    Raises:
        ConvergenceError: if bisection fails within the iteration cap or the
            residual exceeds ``tol``.
    """
    tol = settings.extinction_tol if tol is None else tol
    if tol <= 0.0:
        raise ValueError(f"Tolerance must be positive, got {tol}")

    m = dist.mean()
    if m <= 1.0 + CRITICAL_MEAN_TOL:
        return ExtinctionResult(1.0, 0.0, 0, ExtinctionMethod.CLOSED_FORM)

    if dist.pmf(0) == 0.0:
        return ExtinctionResult(0.0, 0.0, 0, ExtinctionMethod.CLOSED_FORM)

    if isinstance(dist, Geometric) and not force_bisection:
        q = dist.p / (1.0 - dist.p)
        return ExtinctionResult(
            q, abs(dist.pgf(q) - q), 0, ExtinctionMethod.CLOSED_FORM
        )

    def excess(s: float) -> float:
        return dist.pgf(s) - s

    upper = 1.0 - settings.extinction_delta
    try:
        q, info = optimize.bisect(
            excess,
            0.0,
            upper,
            xtol=tol,
            maxiter=settings.extinction_max_iter,
            full_output=True,
            disp=False,
        )
    except ValueError as e:
        raise ConvergenceError(f"Cannot bracket the extinction root of {dist}: {e}") from e

    residual = abs(excess(q))
    if not info.converged or residual > tol:
        raise ConvergenceError(
            f"Bisection for {dist} stopped after {info.iterations} iterations "
            f"with residual {residual:.3e}"
        )
    logger.debug(f"Extinction root {q} for {dist} in {info.iterations} iterations")
    return ExtinctionResult(q, residual, info.iterations, ExtinctionMethod.BISECTION)


def extinction_for_mean(
    m_hat: float, family: Union[FittedFamily, str] = FittedFamily.GEOMETRIC
) -> float:
    """Extinction probability of the ``family`` law whose mean is ``m_hat``."""
    family = FittedFamily(family)
    if m_hat <= 1.0:
        return 1.0
    if family is FittedFamily.GEOMETRIC:
        return min(1.0, 1.0 / m_hat)
    return extinction_probability(Poisson(m_hat)).q
