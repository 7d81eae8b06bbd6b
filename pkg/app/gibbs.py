"""
Blocked Gibbs sampler for incomplete data.

Each iteration imputes the offspring counts Z_ij of every generation given
the current offspring law (a multinomial conditioned on the next generation
total), then draws a new offspring law from its posterior given the imputed
counts, under either a Dirichlet or a truncated DP prior.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from app.constants import SUPERCRITICAL_THRESHOLD
from app.dp import DpPosterior, DpPrior, posterior_partition_params
from app.estimators import DirichletParams, PosteriorSummary, classify
from app.logger import get_logger
from app.process import GenerationSeries, OffspringCounts
from app.rng import RngLike, as_generator
from app.settings import settings
from app.types import InfeasibleRowError, InvalidDataError, RetryExhaustedError

logger = get_logger("gibbs")

Prior = Union[DirichletParams, DpPrior]

_MIN_BATCH = 64
_MAX_BATCH = 65_536


@dataclass(frozen=True)
class GibbsConfig:
    prior: Prior
    iterations: int = field(default_factory=lambda: settings.gibbs_iterations)
    burn_in: int = field(default_factory=lambda: settings.gibbs_burn_in)
    k_trunc: Optional[int] = None
    max_tries: int = field(default_factory=lambda: settings.gibbs_max_tries)
    keep_pi: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be positive, got {self.iterations}")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError(
                f"burn_in must lie in [0, iterations), got {self.burn_in} of {self.iterations}"
            )
        if self.max_tries < 1:
            raise ValueError(f"max_tries must be positive, got {self.max_tries}")

        k = self.k_trunc
        if isinstance(self.prior, DirichletParams):
            if k is not None and k != self.prior.k:
                raise ValueError(
                    f"k_trunc={k} does not match the Dirichlet prior support 0..{self.prior.k}"
                )
            k = self.prior.k
        elif k is None:
            k = settings.gibbs_k_trunc
        if k < 1:
            raise ValueError(f"k_trunc must be positive, got {k}")
        object.__setattr__(self, "k_trunc", k)

    @property
    def uses_dp(self) -> bool:
        return isinstance(self.prior, DpPrior)


@dataclass(frozen=True, eq=False)
class GibbsChain:
    m_samples: np.ndarray
    acceptance_stats: np.ndarray
    pi_samples: Optional[np.ndarray] = None
    burn_in: int = 0

    def trace(self) -> pd.DataFrame:
        """Retained draws of m, one row per post burn-in iteration."""
        return pd.DataFrame(
            {
                "iteration": np.arange(self.burn_in, self.burn_in + self.m_samples.size),
                "m": self.m_samples,
            }
        )


def _check_feasible(z_i: int, z_next: int, k: int) -> None:
    if z_i < 0 or z_next < 0:
        raise InfeasibleRowError(f"Generation sizes must be nonnegative: ({z_i}, {z_next})")
    if z_i == 0 and z_next > 0:
        raise InfeasibleRowError(f"No parents cannot produce {z_next} children")
    if z_next > k * z_i:
        raise InfeasibleRowError(
            f"{z_i} parents with at most {k} offspring each cannot produce {z_next} children"
        )


def _forced_row(z_i: int, z_next: int, k: int) -> Optional[np.ndarray]:
    row = np.zeros(k + 1, dtype=np.int64)
    if z_i == 0:
        return row
    if z_next == 0:
        row[0] = z_i
        return row
    if z_next == k * z_i:
        row[k] = z_i
        return row
    if z_i == 1:
        row[z_next] = 1
        return row
    return None


def _constrained_rows(
    z_i: int,
    z_next: int,
    probs: np.ndarray,
    generator: np.random.Generator,
    max_tries: int,
    size: int,
) -> Tuple[np.ndarray, int]:
    k = probs.size - 1
    _check_feasible(z_i, z_next, k)
    forced = _forced_row(z_i, z_next, k)
    if forced is not None:
        return np.tile(forced, (size, 1)), size

    pvals = probs / probs.sum()
    h = np.arange(k + 1)
    accepted: List[np.ndarray] = []
    needed = size
    attempts = 0
    batch = _MIN_BATCH
    while needed > 0:
        if attempts >= max_tries:
            raise RetryExhaustedError(
                f"Accept-reject for ({z_i}, {z_next}) found {size - needed} of {size} "
                f"rows in {attempts} attempts",
                attempts=attempts,
            )
        draw = min(batch, max_tries - attempts)
        rows = generator.multinomial(z_i, pvals, size=draw)
        hits = np.nonzero(rows @ h == z_next)[0]
        if hits.size >= needed:
            # keep the attempt count of the row that completed the batch
            attempts += int(hits[needed - 1]) + 1
            hits = hits[:needed]
        else:
            attempts += draw
        accepted.append(rows[hits])
        needed -= hits.size
        batch = min(batch * 2, _MAX_BATCH)
    return np.concatenate(accepted), attempts


def constrained_multinomial(
    z_i: int,
    z_next: int,
    probs,
    rng: RngLike,
    max_tries: Optional[int] = None,
    size: Optional[int] = None,
) -> np.ndarray:
    """
    Multinomial(z_i, probs) conditioned on sum_j j * row_j == z_next.

    Returns one row, or a ``(size, k+1)`` array when ``size`` is given.

    Raises:
        InfeasibleRowError: if no row can satisfy the constraint.
        RetryExhaustedError: if accept-reject needs more than ``max_tries`` draws.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size < 2 or np.any(probs < 0) or probs.sum() <= 0:
        raise ValueError(f"probs must be a nonnegative vector over 0..k, got {probs}")
    max_tries = settings.gibbs_max_tries if max_tries is None else max_tries
    rows, _ = _constrained_rows(
        int(z_i), int(z_next), probs, as_generator(rng), max_tries, 1 if size is None else size
    )
    return rows[0] if size is None else rows


def _sum_log_pmf(log_probs: np.ndarray, parents: int, children: int) -> np.ndarray:
    """table[r, c] = log P(r parents have c children in total), r <= parents, c <= children."""
    k = log_probs.size - 1
    table = np.full((parents + 1, children + 1), -np.inf)
    table[0, 0] = 0.0
    shifted = np.full((k + 1, children + 1), -np.inf)
    for r in range(1, parents + 1):
        shifted.fill(-np.inf)
        for j in range(min(k, children) + 1):
            shifted[j, j:] = log_probs[j] + table[r - 1, : children + 1 - j]
        table[r] = logsumexp(shifted, axis=0)
    return table


def exact_constrained_rows(
    z_i: int,
    z_next: int,
    log_probs,
    rng: RngLike,
    size: int = 1,
) -> np.ndarray:
    """
    Exact draws from Multinomial(z_i, probs) conditioned on sum_j j * row_j == z_next.

    Parents are assigned one at a time from the law of their offspring given
    the children still to be placed, using the log-space convolution table.
    Works when some probabilities are far below floating point resolution.
    """
    log_probs = np.asarray(log_probs, dtype=float)
    k = log_probs.size - 1
    _check_feasible(z_i, z_next, k)
    forced = _forced_row(z_i, z_next, k)
    if forced is not None:
        return np.tile(forced, (size, 1))

    generator = as_generator(rng)
    table = _sum_log_pmf(log_probs, z_i, z_next)
    if not np.isfinite(table[z_i, z_next]):
        raise InfeasibleRowError(
            f"No row for ({z_i}, {z_next}) has positive probability under {np.exp(log_probs)}"
        )
    rows = np.zeros((size, k + 1), dtype=np.int64)
    for s in range(size):
        left = z_next
        for r in range(z_i, 0, -1):
            top = min(k, left)
            weights = log_probs[: top + 1] + table[r - 1, left - np.arange(top + 1)]
            p = np.exp(weights - logsumexp(weights))
            j = int(generator.choice(top + 1, p=p / p.sum()))
            rows[s, j] += 1
            left -= j
    return rows


def _chain_row(
    z_i: int,
    z_next: int,
    log_pi: np.ndarray,
    generator: np.random.Generator,
    max_tries: int,
) -> Tuple[np.ndarray, int]:
    """
    One imputed row: accept-reject first, the exact sampler once the
    rejection budget is spent. Either branch draws from the conditional law.
    Rows too large for the exact table keep the full ``max_tries``.
    """
    exact_ok = (z_i + 1) * (z_next + 1) <= settings.gibbs_exact_cells
    budget = min(settings.gibbs_reject_budget, max_tries) if exact_ok else max_tries
    try:
        rows, tries = _constrained_rows(z_i, z_next, np.exp(log_pi), generator, budget, 1)
    except RetryExhaustedError:
        if not exact_ok:
            raise
        return exact_constrained_rows(z_i, z_next, log_pi, generator)[0], budget
    return rows[0], tries


def _prior_cells(config: GibbsConfig) -> np.ndarray:
    """Prior Dirichlet parameters on {0}, ..., {k-1}, [k, inf); empty cells get the Dirichlet floor."""
    if isinstance(config.prior, DirichletParams):
        return config.prior.alpha.copy()
    empty = DpPosterior(config.prior.a, (), config.prior.base)
    return posterior_partition_params(empty, config.k_trunc).alpha


def _draw_log_pi(
    cells: np.ndarray, totals: np.ndarray, eps: float, generator: np.random.Generator
) -> np.ndarray:
    """
    log pi for pi ~ Dirichlet(cells + totals), via log G = log Gamma(alpha + 1) + log(U) / alpha.

    Shapes near ``eps`` give cells far below double precision; their logs stay finite.
    """
    alpha = cells + totals
    alpha = np.where(alpha > 0.0, alpha, eps)
    # 1 - U lies in (0, 1]
    log_u = np.log1p(-generator.random(alpha.size))
    log_g = np.log(generator.standard_gamma(alpha + 1.0)) + log_u / alpha
    return log_g - logsumexp(log_g)


def run_chain(series: GenerationSeries, config: GibbsConfig, rng: RngLike) -> GibbsChain:
    """
    Run the blocked Gibbs sampler on generation totals.

    Raises:
        InfeasibleRowError: if a generation pair cannot be explained with
            offspring sizes up to ``k_trunc``; carries the generation index.
        RetryExhaustedError: if accept-reject gives up on a row too large
            for the exact sampler.
    """
    k = config.k_trunc
    generator = as_generator(rng)
    pairs = list(zip(series.parents, series.children))
    if not pairs:
        raise InvalidDataError(f"Series {series.z} records no reproduction step")
    for i, (z_i, z_next) in enumerate(pairs):
        try:
            _check_feasible(z_i, z_next, k)
        except InfeasibleRowError as e:
            raise e.at_generation(i) from e

    h = np.arange(k + 1)
    cells = _prior_cells(config)
    eps = settings.dirichlet_eps
    log_pi = _draw_log_pi(cells, np.zeros(k + 1), eps, generator)

    kept = config.iterations - config.burn_in
    m_samples = np.empty(kept)
    pi_samples = np.empty((kept, k + 1)) if config.keep_pi else None
    attempts = np.zeros(len(pairs), dtype=np.int64)

    logger.info(
        f"Gibbs chain on {len(pairs)} generations: k={k}, "
        f"{'DP' if config.uses_dp else 'Dirichlet'} prior, {config.iterations} iterations"
    )
    for it in range(config.iterations):
        rows = np.empty((len(pairs), k + 1), dtype=np.int64)
        for i, (z_i, z_next) in enumerate(pairs):
            try:
                rows[i], tries = _chain_row(z_i, z_next, log_pi, generator, config.max_tries)
            except (RetryExhaustedError, InfeasibleRowError) as e:
                logger.warning(f"Iteration {it}, generation {i}: {e.message}")
                raise e.at_generation(i) from e
            attempts[i] += tries

        counts = OffspringCounts(rows)
        log_pi = _draw_log_pi(cells, counts.column_totals(), eps, generator)
        pi = np.exp(log_pi)
        pi /= pi.sum()

        if it >= config.burn_in:
            slot = it - config.burn_in
            m_samples[slot] = float(pi @ h)
            if pi_samples is not None:
                pi_samples[slot] = pi

    logger.debug(f"Accept-reject attempts per generation: {attempts.tolist()}")
    return GibbsChain(
        m_samples=m_samples,
        acceptance_stats=attempts,
        pi_samples=pi_samples,
        burn_in=config.burn_in,
    )


def chain_summary(chain: GibbsChain) -> PosteriorSummary:
    m = chain.m_samples
    if m.size == 0:
        raise InvalidDataError("Cannot summarize an empty chain")
    m_hat = float(m.mean())
    return PosteriorSummary(
        m_hat=m_hat,
        m_var=float(m.var(ddof=1)) if m.size > 1 else 0.0,
        p_supercritical=float(np.mean(m > SUPERCRITICAL_THRESHOLD)),
        classification=classify(m_hat=m_hat),
    )
