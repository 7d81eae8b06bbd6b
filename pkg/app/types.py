from typing import Optional, Sequence


class ErrorCodes:
    INVALID_DISTRIBUTION = "invalid_distribution"
    INVALID_DATA = "invalid_data"
    POPULATION_EXPLOSION = "population_explosion"
    NO_CONVERGENCE = "no_convergence"
    INFEASIBLE_ROW = "infeasible_row"
    RETRY_EXHAUSTED = "retry_exhausted"
    CASE_DATA = "case_data"
    UNKNOWN_SCENARIO = "unknown_scenario"


class GaltonWatsonError(Exception):
    """Base class for every domain error raised by the package."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class InvalidDistributionError(GaltonWatsonError, ValueError):
    code = ErrorCodes.INVALID_DISTRIBUTION


class InvalidDataError(GaltonWatsonError, ValueError):
    code = ErrorCodes.INVALID_DATA


class UnknownScenarioError(GaltonWatsonError, KeyError):
    code = ErrorCodes.UNKNOWN_SCENARIO

    def __str__(self) -> str:
        return self.message


class PopulationExplosionError(GaltonWatsonError):
    code = ErrorCodes.POPULATION_EXPLOSION

    def __init__(self, generation: int, size: int, cap: int):
        super().__init__(
            f"Generation {generation} reached {size} individuals, above the cap of {cap}"
        )
        self.generation = generation
        self.size = size
        self.cap = cap


class ConvergenceError(GaltonWatsonError, ArithmeticError):
    code = ErrorCodes.NO_CONVERGENCE


class InfeasibleRowError(GaltonWatsonError, ValueError):
    code = ErrorCodes.INFEASIBLE_ROW

    def __init__(self, message: str, generation: Optional[int] = None):
        super().__init__(message)
        self.generation = generation

    def at_generation(self, generation: int) -> "InfeasibleRowError":
        return InfeasibleRowError(
            f"Generation {generation}: {self.message}", generation=generation
        )


class RetryExhaustedError(GaltonWatsonError):
    code = ErrorCodes.RETRY_EXHAUSTED

    def __init__(self, message: str, attempts: int, generation: Optional[int] = None):
        super().__init__(message)
        self.attempts = attempts
        self.generation = generation

    def at_generation(self, generation: int) -> "RetryExhaustedError":
        return RetryExhaustedError(
            f"Generation {generation}: {self.message}",
            attempts=self.attempts,
            generation=generation,
        )


class CaseDataError(GaltonWatsonError, ValueError):
    code = ErrorCodes.CASE_DATA

    def __init__(self, message: str, problems: Sequence[str] = ()):
        detail = message
        if problems:
            detail += ": " + "; ".join(problems)
        super().__init__(detail)
        self.problems = list(problems)
