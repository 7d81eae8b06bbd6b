import json
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd
from pydantic import BaseModel

from app.logger import get_logger
from app.models import BenchResult, CaseReport

logger = get_logger("reporting")


class OutputFormat(str, Enum):
    JSON = "json"
    TEXT = "text"
    CSV = "csv"

    def __str__(self):
        return str(self.value)


def bench_frame(results: Sequence[BenchResult]) -> pd.DataFrame:
    records = []
    for result in results:
        for e in result.estimators:
            records.append(
                {
                    "scenario": result.scenario,
                    "m_true": result.m_true,
                    "estimator": e.name,
                    "proportion_correct": e.proportion_correct,
                    "se_mhat": e.se_mhat,
                    "support_correct": e.support_correct,
                    "failures": e.failures,
                    "replications": result.replications,
                    "params": json.dumps(e.params, sort_keys=True),
                }
            )
    return pd.DataFrame.from_records(records)


def case_report_frame(reports: Sequence[CaseReport]) -> pd.DataFrame:
    records = []
    for report in reports:
        for row in report.rows:
            records.append(
                {
                    "wave": report.wave,
                    "day": row.day,
                    "estimator": row.estimator,
                    "m_hat": row.m_hat,
                    "p_supercritical": row.p_supercritical,
                    "classification": None if row.classification is None else str(row.classification),
                    f"q_{report.offspring_family}": row.extinction_q,
                    "note": row.note,
                    "params": json.dumps(row.params, sort_keys=True),
                }
            )
    return pd.DataFrame.from_records(records)


def to_frame(items: Sequence[BaseModel]) -> pd.DataFrame:
    if items and isinstance(items[0], BenchResult):
        return bench_frame(items)
    if items and isinstance(items[0], CaseReport):
        return case_report_frame(items)
    return pd.DataFrame.from_records([i.model_dump(mode="json") for i in items])


def render(
    items: Union[BaseModel, Sequence[BaseModel]],
    fmt: Union[OutputFormat, str] = OutputFormat.JSON,
) -> str:
    """JSON keeps the full nested models; text and CSV flatten to one row per cell."""
    fmt = OutputFormat(fmt)
    many: List[BaseModel] = list(items) if isinstance(items, (list, tuple)) else [items]
    if fmt is OutputFormat.JSON:
        payload = [m.model_dump(mode="json") for m in many]
        return json.dumps(payload if isinstance(items, (list, tuple)) else payload[0], indent=2)
    frame = to_frame(many)
    if fmt is OutputFormat.CSV:
        return frame.to_csv(index=False)
    with pd.option_context("display.max_colwidth", 60, "display.width", 200):
        return frame.to_string(index=False, float_format=lambda v: f"{v:.3f}")


def emit(text: str, out: Optional[Union[str, Path]] = None) -> None:
    if out is None:
        print(text)
        return
    Path(out).write_text(text if text.endswith("\n") else text + "\n")
    logger.info(f"Wrote {out}")
