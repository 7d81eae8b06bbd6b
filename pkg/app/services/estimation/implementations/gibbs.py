from app.dp import DpPrior
from app.gibbs import GibbsConfig, chain_summary, run_chain
from app.models import EstimatorKind
from app.offspring import parse_offspring_spec
from app.rng import RngLike
from app.settings import settings

from ..estimator_types import BaseEstimator, EstimateOutcome, Observation
from .dirichlet import build_dirichlet_prior


class GibbsEstimator(BaseEstimator):
    """Blocked Gibbs sampler on generation totals, Dirichlet or DP prior."""

    def gibbs_config(self) -> GibbsConfig:
        config = self.config
        k = config.k_trunc or settings.gibbs_k_trunc
        if config.kind is EstimatorKind.GIBBS_DP:
            prior = DpPrior(config.a, parse_offspring_spec(config.base))
        else:
            prior = build_dirichlet_prior(config, k)

        overrides = {
            name: value
            for name, value in (
                ("iterations", config.iterations),
                ("burn_in", config.burn_in),
                ("max_tries", config.max_tries),
            )
            if value is not None
        }
        return GibbsConfig(prior=prior, k_trunc=k, **overrides)

    def estimate(self, obs: Observation, rng: RngLike = None) -> EstimateOutcome:
        chain = run_chain(obs.series, self.gibbs_config(), rng)
        return EstimateOutcome(chain_summary(chain))
