from .dirichlet import DirichletEstimator
from .dp import DpEstimator
from .gibbs import GibbsEstimator
from .heyde import HeydeEstimator
from .mle import MleEstimator

__all__ = [
    "DirichletEstimator",
    "DpEstimator",
    "GibbsEstimator",
    "HeydeEstimator",
    "MleEstimator",
]
