from app.dp import DpPrior, dp_posterior, dp_summary, support_size_estimate
from app.logger import get_logger
from app.offspring import parse_offspring_spec
from app.rng import RngLike

from ..estimator_types import BaseEstimator, EstimateOutcome, Observation

logger = get_logger("estimation")


class DpEstimator(BaseEstimator):
    """Posterior mean of m under DP(a, G_0); optionally the modal support size."""

    def prior(self) -> DpPrior:
        return DpPrior(self.config.a, parse_offspring_spec(self.config.base))

    def estimate(self, obs: Observation, rng: RngLike = None) -> EstimateOutcome:
        post = dp_posterior(self.prior(), obs.require_counts(self.name))
        support = None
        if self.config.support_size:
            support = support_size_estimate(post, rng=rng)
            logger.debug(f"{self.name}: modal support size {support} from N={post.n_obs}")
        return EstimateOutcome(dp_summary(post), support_size=support)
