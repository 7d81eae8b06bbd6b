"""
Dirichlet Process prior and posterior over the offspring distribution.

The posterior after observing complete data is again a DP with concentration
a + N and base measure the mixture of the empirical offspring counts with
G_0, weighted N/(a+N) and a/(a+N).
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from app.constants import BASE_TAIL_TOL, SUPERCRITICAL_THRESHOLD
from app.estimators import DirichletParams, PosteriorSummary, classify
from app.logger import get_logger
from app.offspring import FinitePmf, OffspringDistribution
from app.process import OffspringCounts, pool_counts
from app.rng import RngLike, as_generator
from app.settings import settings
from app.types import InvalidDataError, InvalidDistributionError

logger = get_logger("dp")


def _trimmed(totals: np.ndarray) -> Tuple[int, ...]:
    return tuple(int(t) for t in np.trim_zeros(np.asarray(totals), "b"))


@dataclass(frozen=True)
class DpPrior:
    a: float
    base: OffspringDistribution

    def __post_init__(self):
        if not math.isfinite(self.a) or self.a <= 0.0:
            raise InvalidDistributionError(f"Concentration must be positive, got {self.a}")


@dataclass(frozen=True)
class DpPosterior:
    """
    Updated DP. ``atoms[j]`` is the multiplicity of offspring value j among
    the N recorded parents.
    """

    prior_a: float
    atoms: Tuple[int, ...]
    base: OffspringDistribution

    def __post_init__(self):
        if any(m < 0 for m in self.atoms):
            raise InvalidDataError(f"Atom multiplicities must be nonnegative: {self.atoms}")
        object.__setattr__(self, "atoms", _trimmed(np.array(self.atoms, dtype=np.int64)))

    @property
    def n_obs(self) -> int:
        return sum(self.atoms)

    @property
    def concentration(self) -> float:
        return self.prior_a + self.n_obs

    @property
    def data_weight(self) -> float:
        return self.n_obs / self.concentration

    def multiplicity(self, j: int) -> int:
        return self.atoms[j] if 0 <= j < len(self.atoms) else 0

    def update(self, *counts: OffspringCounts) -> "DpPosterior":
        totals = pool_counts(counts)
        width = max(totals.size, len(self.atoms))
        merged = np.zeros(width, dtype=np.int64)
        merged[: totals.size] += totals
        merged[: len(self.atoms)] += np.asarray(self.atoms, dtype=np.int64)
        return DpPosterior(self.prior_a, tuple(merged), self.base)


def dp_posterior(prior: DpPrior, *counts: OffspringCounts) -> DpPosterior:
    post = DpPosterior(prior.a, (), prior.base).update(*counts)
    logger.debug(f"DP posterior: a={prior.a}, N={post.n_obs}, atoms={post.atoms}")
    return post


def posterior_mean_pmf(post: DpPosterior, j: int) -> float:
    """E[G({j}) | data], the updated base measure at j."""
    if j < 0:
        raise ValueError(f"Offspring counts are nonnegative, got {j}")
    return (post.multiplicity(j) + post.prior_a * post.base.pmf(j)) / post.concentration


def posterior_mean_m(post: DpPosterior) -> float:
    children = sum(j * m for j, m in enumerate(post.atoms))
    return (children + post.prior_a * post.base.mean()) / post.concentration


def posterior_m_variance(post: DpPosterior) -> float:
    """Var(m | data) = Var_H(X) / (a + N + 1), H the updated base measure."""
    base_second = post.base.variance() + post.base.mean() ** 2
    second = (
        sum(j * j * m for j, m in enumerate(post.atoms)) + post.prior_a * base_second
    ) / post.concentration
    mean = posterior_mean_m(post)
    return max(0.0, second - mean * mean) / (post.concentration + 1.0)


def dirichlet_equivalent(
    prior: DpPrior, k: int, eps: Optional[float] = None
) -> DirichletParams:
    """
    Dirichlet(a G_0(0), ..., a G_0(k)) implied by a base supported on {0..k}.

    Cells where G_0 has no mass get ``eps`` so the parameters stay positive.
    """
    if k < 1:
        raise InvalidDistributionError(f"Support size k must be at least 1, got {k}")
    outside = 1.0 - prior.base.cdf(k)
    if outside > BASE_TAIL_TOL:
        raise InvalidDistributionError(
            f"Base {prior.base} puts mass {outside:.3e} outside 0..{k}"
        )
    eps = settings.dirichlet_eps if eps is None else eps
    alpha = prior.a * prior.base.pmf_vector(k)
    return DirichletParams(np.where(alpha > 0.0, alpha, eps))


def posterior_partition_params(
    post: DpPosterior, k: int, eps: Optional[float] = None
) -> DirichletParams:
    """Dirichlet marginal of the posterior on the cells {0}, ..., {k-1}, [k, inf)."""
    if k < 1:
        raise InvalidDistributionError(f"Partition needs k >= 1, got {k}")
    eps = settings.dirichlet_eps if eps is None else eps
    a = post.prior_a
    alpha = np.empty(k + 1, dtype=float)
    for j in range(k):
        alpha[j] = post.multiplicity(j) + a * post.base.pmf(j)
    tail_atoms = sum(post.atoms[k:])
    alpha[k] = tail_atoms + a * max(0.0, 1.0 - post.base.cdf(k - 1))
    return DirichletParams(np.where(alpha > 0.0, alpha, eps))


def sample_base_mixture(post: DpPosterior, size: int, rng: RngLike) -> np.ndarray:
    """Draws from the updated base measure (the posterior predictive)."""
    generator = as_generator(rng)
    values = np.asarray(post.base.sample(generator, size), dtype=np.int64)
    if post.n_obs:
        from_data = generator.random(size) < post.data_weight
        hits = int(from_data.sum())
        if hits:
            weights = np.asarray(post.atoms, dtype=float) / post.n_obs
            values[from_data] = generator.choice(len(post.atoms), size=hits, p=weights)
    return values


def _single_value(post: DpPosterior) -> Optional[int]:
    if not isinstance(post.base, FinitePmf):
        return None
    support = [j for j, p in enumerate(post.base.probs) if p > 0.0]
    observed = [j for j, m in enumerate(post.atoms) if m > 0]
    if len(support) == 1 and set(observed) <= set(support):
        return support[0]
    return None


def _point_mass(value: int) -> FinitePmf:
    probs = [0.0] * (value + 1)
    probs[value] = 1.0
    return FinitePmf(tuple(probs))


def sample_realization(
    post: DpPosterior, truncation_tol: Optional[float] = None, rng: RngLike = None
) -> FinitePmf:
    """
    One random offspring law from the posterior by truncated stick-breaking.

    Sticks V ~ Beta(1, a + N) are broken until the unassigned mass drops
    below ``truncation_tol``; that remainder goes to one final atom.
    """
    tol = settings.truncation_tol if truncation_tol is None else truncation_tol
    if not 0.0 < tol < 1.0:
        raise ValueError(f"Truncation tolerance must lie in (0, 1), got {tol}")
    generator = as_generator(rng)

    single = _single_value(post)
    if single is not None:
        return _point_mass(single)

    c = post.concentration
    batch = max(16, math.ceil(math.log(tol) / -math.log1p(1.0 / c)) + 1)
    pieces = []
    remaining = 1.0
    while remaining >= tol:
        v = generator.beta(1.0, c, size=batch)
        left = remaining * np.cumprod(1.0 - v)
        before = np.concatenate(([remaining], left[:-1]))
        below = np.nonzero(left < tol)[0]
        cut = int(below[0]) + 1 if below.size else batch
        pieces.append(before[:cut] * v[:cut])
        remaining = float(left[cut - 1])

    weights = np.concatenate(pieces + [np.array([remaining])])
    atoms = sample_base_mixture(post, weights.size, generator)
    probs = np.bincount(atoms, weights=weights)
    return FinitePmf(tuple(probs / probs.sum()))


def support_size_estimate(
    post: DpPosterior,
    draws: Optional[int] = None,
    sample_size: Optional[int] = None,
    rng: RngLike = None,
) -> int:
    """
    Modal number of distinct values in samples from posterior realizations.

    Ties go to the smaller size.
    """
    draws = settings.support_draws if draws is None else draws
    size = post.n_obs if sample_size is None else sample_size
    if size < 1:
        raise InvalidDataError("Support-size inference needs sample_size >= 1 or observed data")
    if draws < 1:
        raise ValueError(f"draws must be positive, got {draws}")
    generator = as_generator(rng)

    distinct = np.empty(draws, dtype=np.int64)
    for r in range(draws):
        realization = sample_realization(post, rng=generator)
        distinct[r] = np.unique(realization.sample(generator, size)).size
    # argmax returns the first, i.e. smallest, mode
    return int(np.bincount(distinct).argmax())


def dp_summary(
    post: DpPosterior, rng: RngLike = None, draws: int = 0
) -> PosteriorSummary:
    m_hat = posterior_mean_m(post)
    p_super = None
    if draws > 0:
        generator = as_generator(rng)
        means = [sample_realization(post, rng=generator).mean() for _ in range(draws)]
        p_super = float(np.mean(np.asarray(means) > SUPERCRITICAL_THRESHOLD))
    return PosteriorSummary(
        m_hat=m_hat,
        m_var=posterior_m_variance(post),
        p_supercritical=p_super,
        classification=classify(m_hat=m_hat),
    )
