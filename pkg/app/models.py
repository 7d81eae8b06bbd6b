"""
Pydantic models for configuration entries, reports and the HTTP API.
"""

from enum import Enum
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from app.estimators import Classification, PriorVariant
from app.extinction import ExtinctionMethod, FittedFamily
from app.offspring import OffspringDistribution, parse_offspring_spec


class DataMode(str, Enum):
    COMPLETE = "complete"
    INCOMPLETE = "incomplete"

    def __str__(self):
        return str(self.value)


class EstimatorKind(str, Enum):
    MLE = "mle"
    HEYDE = "heyde"
    DIRICHLET = "dirichlet"
    DP = "dp"
    GIBBS_DIR = "gibbs-dir"
    GIBBS_DP = "gibbs-dp"

    def __str__(self):
        return str(self.value)


class DirichletPriorKind(str, Enum):
    AGNOSTIC = "agnostic"
    FLAT = "flat"

    def __str__(self):
        return str(self.value)


class EstimatorConfig(BaseModel):
    kind: EstimatorKind
    label: Optional[str] = None
    # Dirichlet family
    k: Optional[Union[int, Literal["auto"]]] = None
    prior: DirichletPriorKind = DirichletPriorKind.AGNOSTIC
    variant: PriorVariant = PriorVariant.A
    # DP family
    a: float = Field(default=1.0, gt=0)
    base: str = "poisson:agnostic"
    support_size: bool = False
    # Heyde
    cumulative: bool = False
    # Gibbs
    k_trunc: Optional[int] = Field(default=None, ge=1)
    iterations: Optional[int] = Field(default=None, ge=1)
    burn_in: Optional[int] = Field(default=None, ge=0)
    max_tries: Optional[int] = Field(default=None, ge=1)

    @field_validator("base")
    @classmethod
    def _valid_base(cls, value: str) -> str:
        parse_offspring_spec(value)
        return value

    @field_validator("k")
    @classmethod
    def _valid_k(cls, value):
        if isinstance(value, int) and value < 1:
            raise ValueError(f"k must be at least 1, got {value}")
        return value

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind in (EstimatorKind.DP, EstimatorKind.GIBBS_DP):
            return f"{self.kind}(a={self.a:g})"
        return str(self.kind)

    @property
    def complete_only(self) -> bool:
        return self.kind in (EstimatorKind.DIRICHLET, EstimatorKind.DP)

    def params(self) -> dict:
        """Settings that matter for this kind, for audit trails in reports."""
        fields = {
            EstimatorKind.MLE: (),
            EstimatorKind.HEYDE: ("cumulative",),
            EstimatorKind.DIRICHLET: ("k", "prior", "variant"),
            EstimatorKind.DP: ("a", "base", "support_size"),
            EstimatorKind.GIBBS_DIR: ("k_trunc", "prior", "variant", "iterations", "burn_in", "max_tries"),
            EstimatorKind.GIBBS_DP: ("a", "base", "k_trunc", "iterations", "burn_in", "max_tries"),
        }[self.kind]
        dumped = self.model_dump(mode="json")
        return {f: dumped[f] for f in fields}


class Scenario(BaseModel):
    name: str
    offspring: str
    group: str = "custom"
    description: str = ""
    z0: int = Field(default=1, ge=1)
    generations: int = Field(default=10, ge=1)
    replications: int = Field(default=500, ge=1)
    known_k: bool = True
    data_mode: DataMode = DataMode.COMPLETE
    estimators: List[EstimatorConfig] = Field(default_factory=list)

    @field_validator("offspring")
    @classmethod
    def _valid_offspring(cls, value: str) -> str:
        parse_offspring_spec(value)
        return value

    @model_validator(mode="after")
    def _estimators_fit_data(self):
        if self.data_mode is DataMode.INCOMPLETE:
            bad = [e.name for e in self.estimators if e.complete_only]
            if bad:
                raise ValueError(f"Estimators {bad} need complete data")
        return self

    def law(self) -> OffspringDistribution:
        return parse_offspring_spec(self.offspring)


class EstimatorResult(BaseModel):
    name: str
    params: dict
    proportion_correct: Optional[float]
    se_mhat: Optional[float]
    support_correct: Optional[float] = None
    successes: int
    failures: int


class BenchResult(BaseModel):
    scenario: str
    m_true: float
    truth: Classification
    replications: int
    seed: int
    generations: int
    data_mode: DataMode
    estimators: List[EstimatorResult]


class SummaryModel(BaseModel):
    m_hat: Optional[float] = None
    m_var: Optional[float] = None
    p_supercritical: Optional[float] = None
    classification: Classification


class ExtinctionRequest(BaseModel):
    offspring: str
    tol: Optional[float] = Field(default=None, gt=0)


class ExtinctionResponse(BaseModel):
    offspring: str
    q: float
    residual: float
    iterations: int
    method: ExtinctionMethod


class EstimateRequest(BaseModel):
    series: Optional[List[int]] = None
    rows: Optional[List[List[int]]] = None
    estimator: EstimatorConfig
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _one_data_source(self):
        if (self.series is None) == (self.rows is None):
            raise ValueError("Provide exactly one of 'series' or 'rows'")
        return self


class EstimateResponse(BaseModel):
    estimator: str
    params: dict
    summary: SummaryModel
    support_size: Optional[int] = None


class CaseReportRow(BaseModel):
    day: int
    estimator: str
    params: dict
    available: bool
    m_hat: Optional[float] = None
    p_supercritical: Optional[float] = None
    classification: Optional[Classification] = None
    extinction_q: Optional[float] = None
    note: Optional[str] = None


class CaseReport(BaseModel):
    wave: str
    start: Optional[str] = None
    offspring_family: FittedFamily
    rows: List[CaseReportRow]


class CovidReportRequest(BaseModel):
    counts: List[int] = Field(min_length=1)
    days: List[int] = Field(default_factory=lambda: [2, 4, 6, 8, 10])
    offspring_family: FittedFamily = FittedFamily.GEOMETRIC
    estimators: Optional[List[EstimatorConfig]] = None
    seed: int = Field(default=0, ge=0)
