from .estimator_types import BaseEstimator, EstimateOutcome, Observation
from .factory import build_estimator, build_estimators, estimate_response

__all__ = [
    "BaseEstimator",
    "EstimateOutcome",
    "Observation",
    "build_estimator",
    "build_estimators",
    "estimate_response",
]
