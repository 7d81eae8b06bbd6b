from app.estimators import PosteriorSummary, classify, mle_mean
from app.logger import get_logger
from app.rng import RngLike

from ..estimator_types import BaseEstimator, EstimateOutcome, Observation

logger = get_logger("estimation")


class MleEstimator(BaseEstimator):
    """Total children over total parents; identical on complete and incomplete data."""

    def estimate(self, obs: Observation, rng: RngLike = None) -> EstimateOutcome:
        m_hat = mle_mean(obs.series)
        logger.debug(f"mle on {obs.series.z}: {m_hat}")
        return EstimateOutcome(
            PosteriorSummary(
                m_hat=m_hat,
                m_var=None,
                p_supercritical=None,
                classification=classify(m_hat=m_hat),
            )
        )
