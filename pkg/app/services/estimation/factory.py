from typing import Dict, List, Sequence, Type

from app.models import EstimateResponse, EstimatorConfig, EstimatorKind, SummaryModel
from app.rng import RngLike

from .estimator_types import BaseEstimator, Observation
from .implementations import (
    DirichletEstimator,
    DpEstimator,
    GibbsEstimator,
    HeydeEstimator,
    MleEstimator,
)

ESTIMATORS: Dict[EstimatorKind, Type[BaseEstimator]] = {
    EstimatorKind.MLE: MleEstimator,
    EstimatorKind.HEYDE: HeydeEstimator,
    EstimatorKind.DIRICHLET: DirichletEstimator,
    EstimatorKind.DP: DpEstimator,
    EstimatorKind.GIBBS_DIR: GibbsEstimator,
    EstimatorKind.GIBBS_DP: GibbsEstimator,
}


def build_estimator(config: EstimatorConfig) -> BaseEstimator:
    return ESTIMATORS[config.kind](config)


def build_estimators(configs: Sequence[EstimatorConfig]) -> List[BaseEstimator]:
    return [build_estimator(c) for c in configs]


def estimate_response(
    config: EstimatorConfig, obs: Observation, rng: RngLike = None
) -> EstimateResponse:
    outcome = build_estimator(config).estimate(obs, rng)
    summary = outcome.summary
    return EstimateResponse(
        estimator=config.name,
        params=config.params(),
        summary=SummaryModel(
            m_hat=summary.m_hat,
            m_var=summary.m_var,
            p_supercritical=summary.p_supercritical,
            classification=summary.classification,
        ),
        support_size=outcome.support_size,
    )
