"""
Monte Carlo comparison of estimators on simulated realizations.

Replication r draws from stream r of the run seed: child stream 0 simulates
the realization, child stream e + 1 feeds estimator e. Outcomes are reduced
in replication order, so results do not depend on the number of workers.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from app.constants import CRITICAL_MEAN_TOL, SUPERCRITICAL_THRESHOLD
from app.estimators import Classification
from app.logger import get_logger
from app.models import BenchResult, DataMode, EstimatorResult, Scenario
from app.offspring import FinitePmf, OffspringDistribution
from app.process import collapse, simulate_complete
from app.rng import SeedSpec
from app.services.estimation import Observation, build_estimators
from app.types import GaltonWatsonError

logger = get_logger("bench")


@dataclass(frozen=True)
class EstimatorOutcome:
    correct: Optional[bool] = None
    m_hat: Optional[float] = None
    support_ok: Optional[bool] = None
    error: Optional[str] = None


def ground_truth(dist: OffspringDistribution) -> Classification:
    """Critical laws are scored together with subcritical ones."""
    if dist.mean() > SUPERCRITICAL_THRESHOLD + CRITICAL_MEAN_TOL:
        return Classification.SUPERCRITICAL
    return Classification.SUBCRITICAL_OR_CRITICAL


def true_support_size(dist: OffspringDistribution) -> Optional[int]:
    if isinstance(dist, FinitePmf):
        return sum(1 for p in dist.probs if p > 0.0)
    return None


def run_replication(scenario: Scenario, seed: int, replication: int) -> List[EstimatorOutcome]:
    spec = SeedSpec(seed, stream=replication)
    law = scenario.law()
    truth = ground_truth(law)
    support = true_support_size(law)
    estimators = build_estimators(scenario.estimators)

    try:
        counts = simulate_complete(law, scenario.z0, scenario.generations, spec.spawn(0))
    except GaltonWatsonError as e:
        logger.warning(f"{scenario.name} replication {replication}: {e.message}")
        return [EstimatorOutcome(error=e.code) for _ in estimators]

    if scenario.data_mode is DataMode.COMPLETE:
        obs = Observation.from_counts(counts)
    else:
        obs = Observation(collapse(counts))

    outcomes = []
    for index, estimator in enumerate(estimators):
        try:
            result = estimator.estimate(obs, spec.spawn(index + 1))
        except GaltonWatsonError as e:
            logger.warning(
                f"{scenario.name} replication {replication}, {estimator.name}: {e.message}"
            )
            outcomes.append(EstimatorOutcome(error=e.code))
            continue
        support_ok = None
        if result.support_size is not None and support is not None:
            support_ok = result.support_size == support
        outcomes.append(
            EstimatorOutcome(
                correct=result.summary.classification is truth,
                m_hat=result.summary.m_hat,
                support_ok=support_ok,
            )
        )
    return outcomes


def _replication_task(task: Tuple[Scenario, int, int]) -> List[EstimatorOutcome]:
    return run_replication(*task)


def _proportion(flags: Sequence[bool]) -> Optional[float]:
    return float(np.mean(flags)) if flags else None


def aggregate(
    scenario: Scenario,
    seed: int,
    replications: int,
    outcomes: Iterable[List[EstimatorOutcome]],
) -> BenchResult:
    per_estimator = list(zip(*outcomes)) or [() for _ in scenario.estimators]
    results = []
    for config, column in zip(scenario.estimators, per_estimator):
        ok = [o for o in column if o.error is None]
        m_hats = [o.m_hat for o in ok if o.m_hat is not None]
        supports = [o.support_ok for o in ok if o.support_ok is not None]
        results.append(
            EstimatorResult(
                name=config.name,
                params=config.params(),
                proportion_correct=_proportion([o.correct for o in ok]),
                se_mhat=float(np.std(m_hats, ddof=1)) if len(m_hats) > 1 else None,
                support_correct=_proportion(supports),
                successes=len(ok),
                failures=len(column) - len(ok),
            )
        )
    law = scenario.law()
    return BenchResult(
        scenario=scenario.name,
        m_true=law.mean(),
        truth=ground_truth(law),
        replications=replications,
        seed=seed,
        generations=scenario.generations,
        data_mode=scenario.data_mode,
        estimators=results,
    )


def run_scenario(
    scenario: Scenario,
    seed: int,
    replications: Optional[int] = None,
    workers: int = 1,
    progress: bool = False,
) -> BenchResult:
    """
    Proportion of correct classifications per estimator over replications.

    Estimator failures are counted in ``failures`` and excluded from the
    proportions.
    """
    reps = scenario.replications if replications is None else replications
    if reps < 1:
        raise ValueError(f"replications must be positive, got {reps}")
    if workers < 1:
        raise ValueError(f"workers must be positive, got {workers}")

    logger.info(f"Running {scenario.name}: {reps} replications, seed {seed}, {workers} worker(s)")
    tasks = [(scenario, seed, r) for r in range(reps)]
    bar = dict(total=reps, desc=scenario.name, disable=not progress, leave=False)
    if workers == 1:
        outcomes = [run_replication(*t) for t in tqdm(tasks, **bar)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = list(
                tqdm(
                    executor.map(_replication_task, tasks, chunksize=max(1, reps // (4 * workers))),
                    **bar,
                )
            )

    result = aggregate(scenario, seed, reps, outcomes)
    logger.info(
        f"Finished {scenario.name}: "
        + ", ".join(f"{e.name}={e.proportion_correct}" for e in result.estimators)
    )
    return result
