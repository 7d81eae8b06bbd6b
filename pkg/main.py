from typing import List

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from app.decorators import track_run
from app.deps import CatalogDep
from app.extinction import extinction_probability
from app.logger import get_logger
from app.models import (
    CaseReport,
    CovidReportRequest,
    EstimateRequest,
    EstimateResponse,
    ExtinctionRequest,
    ExtinctionResponse,
    Scenario,
)
from app.offspring import parse_offspring_spec
from app.process import GenerationSeries, OffspringCounts
from app.rng import SeedSpec
from app.services.covid import CaseSeries, early_detection_report
from app.services.estimation import Observation, estimate_response
from app.types import GaltonWatsonError

logger = get_logger("api")

app = FastAPI(
    title="Galton-Watson Inference",
    description="API for extinction probabilities and criticality estimates of branching processes",
    version="1.0.0",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)


def domain_error(e: GaltonWatsonError) -> HTTPException:
    logger.warning(f"Rejected request: {e.code}: {e.message}")
    return HTTPException(status_code=422, detail={"code": e.code, "message": e.message})


@app.get("/")
async def root():
    return {"message": "Galton-Watson inference API is running"}


@app.get("/scenarios/", response_model=List[Scenario])
async def list_scenarios(catalog: CatalogDep):
    return catalog.scenarios()


@app.post("/extinction/", response_model=ExtinctionResponse)
@track_run
def extinction_endpoint(request: ExtinctionRequest):
    """Extinction probability of a process started from one individual"""
    try:
        dist = parse_offspring_spec(request.offspring)
        result = extinction_probability(dist, tol=request.tol)
    except GaltonWatsonError as e:
        raise domain_error(e)
    except Exception as e:
        logger.error(f"Unexpected error in extinction: {str(e)}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"Error computing extinction: {str(e)}")
    return ExtinctionResponse(
        offspring=dist.spec(),
        q=result.q,
        residual=result.residual,
        iterations=result.iterations,
        method=result.method,
    )


@app.post("/estimate/", response_model=EstimateResponse)
@track_run
def estimate_endpoint(request: EstimateRequest):
    """Estimate m from one realization, complete (rows) or incomplete (series)"""
    try:
        if request.rows is not None:
            obs = Observation.from_counts(OffspringCounts.from_rows(request.rows))
        else:
            obs = Observation(GenerationSeries(tuple(request.series)))
        return estimate_response(request.estimator, obs, SeedSpec(request.seed))
    except GaltonWatsonError as e:
        raise domain_error(e)
    except Exception as e:
        logger.error(f"Unexpected error in estimate: {str(e)}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"Error estimating: {str(e)}")


@app.post("/covid/report/", response_model=CaseReport)
@track_run
def covid_report_endpoint(request: CovidReportRequest):
    """Early-detection table for one wave of daily counts"""
    try:
        return early_detection_report(
            CaseSeries.from_counts(request.counts),
            days=request.days,
            estimators=request.estimators,
            offspring_family=request.offspring_family,
            seed=request.seed,
        )
    except GaltonWatsonError as e:
        raise domain_error(e)
    except Exception as e:
        logger.error(f"Unexpected error in covid report: {str(e)}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"Error building report: {str(e)}")
