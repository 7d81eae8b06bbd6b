import numpy as np
import pytest

from app.estimators import Classification
from app.models import EstimatorConfig, Scenario
from app.offspring import FinitePmf, Poisson
from app.scenarios import ScenarioCatalog
from app.services.bench import ground_truth, run_replication, run_scenario, true_support_size
from app.settings import settings
from app.types import ErrorCodes


@pytest.fixture
def catalog(tmp_path) -> ScenarioCatalog:
    return ScenarioCatalog(str(tmp_path / "missing.yaml"))


@pytest.fixture
def small_scenario() -> Scenario:
    return Scenario(
        name="small",
        offspring="finite:0.25,0.25,0.25,0.25",
        generations=5,
        replications=6,
        estimators=[
            EstimatorConfig(kind="mle"),
            EstimatorConfig(kind="heyde"),
            EstimatorConfig(kind="dirichlet", k=3),
            EstimatorConfig(kind="dp", a=1.0),
        ],
    )


class TestTruth:
    def test_critical_counts_as_subcritical(self, critical_law):
        assert ground_truth(critical_law) is Classification.SUBCRITICAL_OR_CRITICAL
        assert ground_truth(Poisson(1.2)) is Classification.SUPERCRITICAL

    def test_support_size(self, critical_law):
        assert true_support_size(critical_law) == 4
        assert true_support_size(FinitePmf((0.5, 0.0, 0.5))) == 2
        assert true_support_size(Poisson(1.0)) is None


class TestRunScenario:
    def test_single_replication_scores_zero_or_one(self, small_scenario):
        result = run_scenario(small_scenario, seed=3, replications=1)
        assert result.replications == 1
        for e in result.estimators:
            assert e.successes + e.failures == 1
            assert e.proportion_correct in (0.0, 1.0)
            assert e.se_mhat is None

    def test_result_header(self, small_scenario):
        result = run_scenario(small_scenario, seed=3)
        assert result.scenario == "small"
        assert result.m_true == pytest.approx(1.5)
        assert result.truth is Classification.SUPERCRITICAL
        assert result.replications == 6
        assert [e.name for e in result.estimators] == ["mle", "heyde", "dirichlet", "dp(a=1)"]

    def test_reproducible(self, small_scenario):
        assert run_scenario(small_scenario, seed=11) == run_scenario(small_scenario, seed=11)

    def test_workers_do_not_change_results(self, small_scenario):
        serial = run_scenario(small_scenario, seed=5, workers=1)
        parallel = run_scenario(small_scenario, seed=5, workers=2)
        assert serial == parallel

    def test_heyde_has_no_standard_error(self, small_scenario):
        result = run_scenario(small_scenario, seed=3)
        heyde = next(e for e in result.estimators if e.name == "heyde")
        assert heyde.se_mhat is None
        mle = next(e for e in result.estimators if e.name == "mle")
        assert mle.se_mhat is not None and mle.se_mhat >= 0.0

    @pytest.mark.parametrize("reps, workers", [(0, 1), (2, 0)])
    def test_bad_arguments(self, small_scenario, reps, workers):
        with pytest.raises(ValueError):
            run_scenario(small_scenario, seed=1, replications=reps, workers=workers)


class TestFailures:
    def test_population_explosion_fails_every_estimator(self, monkeypatch):
        monkeypatch.setattr(settings, "explosion_cap", 100)
        scenario = Scenario(
            name="boom",
            offspring="finite:0,0,1",
            generations=10,
            replications=3,
            estimators=[EstimatorConfig(kind="mle"), EstimatorConfig(kind="heyde")],
        )
        outcomes = run_replication(scenario, 0, 0)
        assert [o.error for o in outcomes] == [ErrorCodes.POPULATION_EXPLOSION] * 2

        result = run_scenario(scenario, seed=0)
        for e in result.estimators:
            assert e.failures == 3
            assert e.successes == 0
            assert e.proportion_correct is None

    def test_estimator_failures_are_counted_separately(self):
        scenario = Scenario(
            name="doubling",
            offspring="finite:0,0,1",
            generations=2,
            replications=4,
            data_mode="incomplete",
            estimators=[
                EstimatorConfig(kind="mle"),
                EstimatorConfig(
                    kind="gibbs-dir", prior="flat", k_trunc=1, iterations=5, burn_in=0
                ),
            ],
        )
        mle, gibbs = run_scenario(scenario, seed=2).estimators
        assert mle.proportion_correct == 1.0
        assert mle.failures == 0
        assert gibbs.failures == 4
        assert gibbs.proportion_correct is None


def extinct_and_single(law: FinitePmf, generations: int):
    """P(Z_n = 0) and P(Z_n = 1) from one ancestor: the iterated PGF and its slope at 0."""
    probs = np.asarray(law.probs)
    q, slope = 0.0, 1.0
    for _ in range(generations):
        slope *= sum(j * p * q ** (j - 1) for j, p in enumerate(probs) if j)
        q = law.pgf(q)
    return q, slope


def shortened(scenario: Scenario, *estimators: EstimatorConfig) -> Scenario:
    return scenario.model_copy(update={"estimators": list(estimators)})


def test_extinct_and_single_for_certain_death():
    assert extinct_and_single(FinitePmf((1.0,)), 3) == (1.0, 0.0)
    q, single = extinct_and_single(FinitePmf((0.5, 0.5)), 2)
    assert q == pytest.approx(0.75)
    assert single == pytest.approx(0.25)


@pytest.mark.slow
class TestRegression:
    def test_critical_law_classification_rates(self, catalog):
        scenario = catalog.get("complete-known-m1.0")
        # mle is right iff Z_10 = 0, dp(a=1) iff Z_10 <= 1, dp(a=100) iff Z_10 <= 31
        q, single = extinct_and_single(scenario.law(), scenario.generations)
        result = run_scenario(scenario, seed=2024, replications=200)
        by_name = {e.name: e for e in result.estimators}
        assert by_name["mle"].proportion_correct == pytest.approx(q, abs=0.08)
        assert by_name["dp(a=1)"].proportion_correct == pytest.approx(q + single, abs=0.08)
        assert by_name["dp(a=1)"].proportion_correct == pytest.approx(0.858, abs=0.07)
        assert by_name["dp(a=1)"].proportion_correct >= by_name["mle"].proportion_correct
        assert by_name["dp(a=100)"].proportion_correct >= 0.99

    def test_supercritical_rates_are_nested(self, catalog):
        # right iff Z_10 >= 1 for mle, >= 2 for dp(a=1), >= 32 for dp(a=100)
        result = run_scenario(catalog.get("complete-known-m1.5"), seed=7, replications=200)
        by_name = {e.name: e.proportion_correct for e in result.estimators}
        assert by_name["dp(a=100)"] <= by_name["dp(a=1)"] <= by_name["mle"]
        assert by_name["dp(a=100)"] < by_name["mle"]

    def test_samplers_on_generation_totals(self, catalog):
        scenario = shortened(
            catalog.get("incomplete-known-m1.0"),
            EstimatorConfig(kind="gibbs-dir", k_trunc=3, iterations=700, burn_in=200),
            EstimatorConfig(kind="gibbs-dp", a=1.0, k_trunc=3, iterations=700, burn_in=200),
        )
        # the chain mean of m depends on the data only through Z_10:
        # gibbs-dir is right iff Z_10 = 0, gibbs-dp iff Z_10 <= 1
        q, single = extinct_and_single(scenario.law(), scenario.generations)
        gibbs_dir, gibbs_dp = run_scenario(scenario, seed=31, replications=200).estimators
        assert gibbs_dir.failures == 0
        assert gibbs_dp.failures == 0
        assert gibbs_dir.proportion_correct == pytest.approx(q, abs=0.08)
        assert gibbs_dp.proportion_correct == pytest.approx(q + single, abs=0.08)

    def test_support_recovery_improves_with_growth(self, catalog):
        rates = []
        for law in ("m0.9", "m1.0", "m1.2", "m1.5"):
            scenario = shortened(
                catalog.get(f"complete-unknown-{law}"),
                EstimatorConfig(kind="dp", a=1.0, support_size=True),
            )
            result = run_scenario(scenario, seed=99, replications=200)
            rates.append(result.estimators[0].support_correct)
        assert all(later >= earlier - 0.08 for earlier, later in zip(rates, rates[1:]))
        assert rates[-1] > rates[0]
