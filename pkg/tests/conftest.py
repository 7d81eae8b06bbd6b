from pathlib import Path

import pytest

from app.offspring import FinitePmf, Poisson
from app.process import OffspringCounts
from app.rng import SeedSpec

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def seed() -> SeedSpec:
    return SeedSpec(20240601)


@pytest.fixture
def critical_law() -> FinitePmf:
    return FinitePmf((0.4, 0.3, 0.2, 0.1))


@pytest.fixture
def agnostic_poisson() -> Poisson:
    return Poisson(0.6954)


@pytest.fixture
def small_counts() -> OffspringCounts:
    """One parent with two children, one of whom has a child; column totals (2, 1, 1)."""
    return OffspringCounts.from_rows([[0, 0, 1], [1, 1, 0], [1, 0, 0]])


@pytest.fixture
def case_fixture() -> Path:
    return DATA_DIR / "covid_fixture.csv"
