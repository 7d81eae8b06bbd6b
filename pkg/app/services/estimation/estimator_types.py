from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

from app.estimators import PosteriorSummary
from app.models import EstimatorConfig
from app.process import GenerationSeries, OffspringCounts, collapse
from app.rng import RngLike
from app.types import InvalidDataError


@dataclass(frozen=True)
class Observation:
    """One observed realization: generation totals, plus Z_ij when complete."""

    series: GenerationSeries
    counts: Optional[OffspringCounts] = None

    @classmethod
    def from_counts(cls, counts: OffspringCounts) -> "Observation":
        return cls(collapse(counts), counts)

    @property
    def complete(self) -> bool:
        return self.counts is not None

    def require_counts(self, who: str) -> OffspringCounts:
        if self.counts is None:
            raise InvalidDataError(f"{who} needs complete offspring counts")
        return self.counts


@dataclass(frozen=True)
class EstimateOutcome:
    summary: PosteriorSummary
    support_size: Optional[int] = None


class BaseEstimator(ABC):
    """Abstract base class for estimators of the offspring average"""

    def __init__(self, config: EstimatorConfig):
        self.config = config

    @property
    def name(self) -> str:
        return self.config.name

    @abstractmethod
    def estimate(self, obs: Observation, rng: RngLike = None) -> EstimateOutcome:
        """
        Estimate m from one realization

        Args:
            obs (Observation): the observed realization
            rng (RngLike): random stream for Monte Carlo based estimators

        Returns:
            EstimateOutcome: posterior summary and, when requested, support size

        Raises:
            GaltonWatsonError: if the data do not suit the estimator or a
                numerical step fails
        """
        pass
