"""
Early outbreak detection from daily case counts.

Each day is treated as one generation: the first n days of a wave are the
generation totals Z_0..Z_{n-1}.
"""

from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import backoff
import httpx
import pandas as pd

from app.extinction import FittedFamily, extinction_for_mean
from app.logger import get_logger
from app.models import CaseReport, CaseReportRow, EstimatorConfig, EstimatorKind
from app.process import GenerationSeries
from app.rng import SeedSpec
from app.services.estimation import Observation, build_estimator
from app.settings import settings
from app.types import CaseDataError, GaltonWatsonError

logger = get_logger("covid")

DEFAULT_DAYS = (2, 4, 6, 8, 10)


def default_report_estimators() -> List[EstimatorConfig]:
    return [
        EstimatorConfig(kind=EstimatorKind.MLE),
        EstimatorConfig(kind=EstimatorKind.HEYDE),
        EstimatorConfig(kind=EstimatorKind.GIBBS_DIR),
        EstimatorConfig(kind=EstimatorKind.GIBBS_DP, a=1.0, base="poisson:agnostic"),
    ]


@dataclass(frozen=True)
class CaseSeries:
    """Daily counts with wave windows as half-open index ranges."""

    counts: Tuple[int, ...]
    waves: Tuple[Tuple[int, int], ...]
    dates: Optional[Tuple[date, ...]] = None

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise CaseDataError("Daily counts must be nonnegative")
        if self.dates is not None and len(self.dates) != len(self.counts):
            raise CaseDataError("Dates and counts differ in length")
        for start, end in self.waves:
            if not 0 <= start < end <= len(self.counts):
                raise CaseDataError(
                    f"Wave window [{start}, {end}) is outside the {len(self.counts)} recorded days"
                )
            if self.counts[start] < 1:
                raise CaseDataError(f"Wave starting at day {start} has no cases on its first day")

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "CaseSeries":
        counts = tuple(int(c) for c in counts)
        return cls(counts, ((0, len(counts)),))

    def wave_label(self, index: int) -> str:
        start = self.waves[index][0]
        if self.dates is None:
            return f"wave {index + 1}"
        return f"wave {index + 1} ({self.dates[start].isoformat()})"

    def wave_counts(self, index: int) -> Tuple[int, ...]:
        start, end = self.waves[index]
        window = self.counts[start:end]
        if 0 in window:
            # extinction is absorbing
            window = window[: window.index(0) + 1]
        return window

    def wave_series(self, index: int, days: Optional[int] = None) -> GenerationSeries:
        window = self.wave_counts(index)
        if days is not None:
            window = window[:days]
        return GenerationSeries(window)


def load_case_series(
    path: Union[str, Path],
    wave_starts: Sequence[Union[str, date]] = (),
    wave_days: Optional[Union[int, Sequence[int]]] = None,
    wave_ends: Optional[Sequence[Union[str, date]]] = None,
    date_format: Optional[str] = None,
    date_column: str = "date",
    count_column: str = "count",
) -> CaseSeries:
    """
    Read a ``date,count`` CSV and cut it into wave windows.

    A wave runs for ``wave_days`` days from its start date, or up to and
    including its end date. Without start dates the whole file is one wave.

    Raises:
        CaseDataError: listing every unparseable, missing or negative row by
            line number, or a window outside the data.
    """
    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise CaseDataError(f"Cannot read {path}: {e}") from e

    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in (date_column, count_column) if c not in frame.columns]
    if missing:
        raise CaseDataError(f"{path}: missing column(s) {missing}")

    dates = pd.to_datetime(frame[date_column], format=date_format, errors="coerce")
    counts = pd.to_numeric(frame[count_column], errors="coerce")
    problems = []
    for i in range(len(frame)):
        line = i + 2
        if pd.isna(dates.iloc[i]):
            problems.append(f"line {line}: bad date {frame[date_column].iloc[i]!r}")
        value = counts.iloc[i]
        if pd.isna(value) or value < 0 or value != round(value):
            problems.append(f"line {line}: bad count {frame[count_column].iloc[i]!r}")
    if problems:
        raise CaseDataError(f"{path} has invalid rows", problems)
    if len(frame) == 0:
        raise CaseDataError(f"{path} holds no rows")
    if not dates.is_monotonic_increasing or dates.duplicated().any():
        raise CaseDataError(f"{path}: dates must be strictly increasing")

    day_list = tuple(d.date() for d in dates)
    waves = _wave_windows(day_list, wave_starts, wave_days, wave_ends)
    logger.info(f"Loaded {len(day_list)} days of case counts from {path}, {len(waves)} wave(s)")
    return CaseSeries(tuple(int(c) for c in counts), waves, day_list)


def _as_date(value: Union[str, date]) -> date:
    if isinstance(value, date):
        return value
    try:
        return date.fromisoformat(value)
    except ValueError as e:
        raise CaseDataError(f"Invalid date {value!r}") from e


def _wave_windows(
    days: Tuple[date, ...],
    wave_starts: Sequence[Union[str, date]],
    wave_days: Optional[Union[int, Sequence[int]]],
    wave_ends: Optional[Sequence[Union[str, date]]],
) -> Tuple[Tuple[int, int], ...]:
    if not wave_starts:
        return ((0, len(days)),)
    index = {d: i for i, d in enumerate(days)}
    starts = []
    for s in wave_starts:
        d = _as_date(s)
        if d not in index:
            raise CaseDataError(f"Wave start {d} is not in the data")
        starts.append(index[d])

    if wave_ends is not None:
        if len(wave_ends) != len(starts):
            raise CaseDataError("Give one end date per wave start")
        ends = []
        for e in wave_ends:
            d = _as_date(e)
            if d not in index:
                raise CaseDataError(f"Wave end {d} is not in the data")
            ends.append(index[d] + 1)
    else:
        if wave_days is None:
            lengths = [len(days) - s for s in starts]
        elif isinstance(wave_days, int):
            lengths = [wave_days] * len(starts)
        else:
            lengths = list(wave_days)
        if len(lengths) != len(starts) or any(n < 1 for n in lengths):
            raise CaseDataError("Wave lengths must be positive, one per wave start")
        ends = [s + n for s, n in zip(starts, lengths)]

    for s, e in zip(starts, ends):
        if e <= s:
            raise CaseDataError(f"Wave starting {days[s]} is empty")
        if e > len(days):
            raise CaseDataError(
                f"Wave starting {days[s]} runs {e - len(days)} day(s) past the end of the data"
            )
    return tuple(zip(starts, ends))


def _is_transient(e: Exception) -> bool:
    if isinstance(e, httpx.HTTPStatusError):
        return e.response.status_code >= 500
    return True


@backoff.on_exception(
    backoff.expo,
    (httpx.TransportError, httpx.HTTPStatusError),
    max_tries=lambda: settings.http_max_retries,
    giveup=lambda e: not _is_transient(e),
)
def _download(client: httpx.Client, url: str) -> bytes:
    response = client.get(url)
    response.raise_for_status()
    return response.content


def fetch_case_csv(
    dest: Union[str, Path],
    url: Optional[str] = None,
    client: Optional[httpx.Client] = None,
) -> Path:
    """Download a case-count CSV, retrying transient failures."""
    url = url or settings.case_data_url
    dest = Path(dest)
    owns_client = client is None
    client = client or httpx.Client(timeout=settings.http_timeout, follow_redirects=True)
    try:
        logger.info(f"Downloading case data from {url}")
        content = _download(client, url)
    except httpx.HTTPError as e:
        logger.error(f"Download from {url} failed: {str(e)}", exc_info=True)
        raise CaseDataError(f"Cannot download {url}: {e}") from e
    finally:
        if owns_client:
            client.close()
    dest.write_bytes(content)
    logger.info(f"Saved {len(content)} bytes to {dest}")
    return dest


def early_detection_report(
    cs: CaseSeries,
    days: Sequence[int] = DEFAULT_DAYS,
    estimators: Optional[Sequence[EstimatorConfig]] = None,
    offspring_family: Union[FittedFamily, str] = FittedFamily.GEOMETRIC,
    wave: int = 0,
    seed: int = 0,
) -> CaseReport:
    """
    Estimates from the first n days of a wave for each n in ``days``.

    Cells that cannot be computed (too few days, a failed estimator) are
    marked unavailable; the report is still produced.
    """
    family = FittedFamily(offspring_family)
    configs = list(estimators) if estimators is not None else default_report_estimators()
    built = [build_estimator(c) for c in configs]
    window = cs.wave_counts(wave)

    rows: List[CaseReportRow] = []
    for n in days:
        for index, (config, estimator) in enumerate(zip(configs, built)):
            base = dict(day=n, estimator=config.name, params=config.params())
            if n < 2 or n > len(window):
                note = f"wave has {len(window)} usable day(s)" if n > len(window) else "need two days"
                logger.warning(f"{cs.wave_label(wave)}, day {n}, {config.name}: {note}")
                rows.append(CaseReportRow(available=False, note=note, **base))
                continue
            obs = Observation(cs.wave_series(wave, n))
            try:
                outcome = estimator.estimate(obs, SeedSpec(seed, stream=n).spawn(index))
            except GaltonWatsonError as e:
                logger.warning(f"{cs.wave_label(wave)}, day {n}, {config.name}: {e.message}")
                rows.append(CaseReportRow(available=False, note=e.message, **base))
                continue
            summary = outcome.summary
            q = None
            if summary.m_hat is not None:
                q = extinction_for_mean(summary.m_hat, family)
            rows.append(
                CaseReportRow(
                    available=True,
                    m_hat=summary.m_hat,
                    p_supercritical=summary.p_supercritical,
                    classification=summary.classification,
                    extinction_q=q,
                    **base,
                )
            )

    start = cs.dates[cs.waves[wave][0]].isoformat() if cs.dates is not None else None
    logger.info(f"Early detection report for {cs.wave_label(wave)}: {len(rows)} cells")
    return CaseReport(wave=cs.wave_label(wave), start=start, offspring_family=family, rows=rows)
