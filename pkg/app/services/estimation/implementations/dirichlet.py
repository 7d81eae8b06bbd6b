import numpy as np

from app.estimators import (
    DirichletParams,
    agnostic_dirichlet_prior,
    dirichlet_posterior,
    dirichlet_summary,
    sample_max_k,
)
from app.models import DirichletPriorKind, EstimatorConfig
from app.rng import RngLike

from ..estimator_types import BaseEstimator, EstimateOutcome, Observation


def build_dirichlet_prior(config: EstimatorConfig, k: int) -> DirichletParams:
    if config.prior is DirichletPriorKind.FLAT:
        return DirichletParams(np.ones(k + 1))
    return agnostic_dirichlet_prior(k, config.variant)


class DirichletEstimator(BaseEstimator):
    """Conjugate Dirichlet analysis of complete data; ``k="auto"`` uses the sample maximum."""

    def resolve_k(self, obs: Observation) -> int:
        k = self.config.k
        if k is None or k == "auto":
            return sample_max_k([obs.require_counts(self.name)])
        return k

    def estimate(self, obs: Observation, rng: RngLike = None) -> EstimateOutcome:
        counts = obs.require_counts(self.name)
        prior = build_dirichlet_prior(self.config, self.resolve_k(obs))
        return EstimateOutcome(dirichlet_summary(dirichlet_posterior(prior, counts)))
