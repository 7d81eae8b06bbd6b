from app.estimators import PosteriorSummary, classify, heyde_p_supercritical
from app.rng import RngLike

from ..estimator_types import BaseEstimator, EstimateOutcome, Observation


class HeydeEstimator(BaseEstimator):
    def estimate(self, obs: Observation, rng: RngLike = None) -> EstimateOutcome:
        p = heyde_p_supercritical(obs.series, cumulative=self.config.cumulative)
        return EstimateOutcome(
            PosteriorSummary(
                m_hat=None,
                m_var=None,
                p_supercritical=p,
                classification=classify(p_supercritical=p),
            )
        )
