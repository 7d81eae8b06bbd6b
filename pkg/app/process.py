"""
Galton-Watson realizations under the two observation schemes.

Complete data are the counts Z_ij of generation-i parents with exactly j
offspring; incomplete data are the generation totals Z_0..Z_n only.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.logger import get_logger
from app.offspring import OffspringDistribution
from app.rng import RngLike, as_generator
from app.settings import settings
from app.types import InvalidDataError, PopulationExplosionError

logger = get_logger("process")


@dataclass(frozen=True)
class GenerationSeries:
    z: Tuple[int, ...]

    def __post_init__(self):
        z = tuple(int(v) for v in self.z)
        if not z:
            raise InvalidDataError("A generation series needs at least Z_0")
        if z[0] < 1:
            raise InvalidDataError(f"Z_0 must be at least 1, got {z[0]}")
        if any(v < 0 for v in z):
            raise InvalidDataError(f"Generation sizes must be nonnegative: {z}")
        for i, v in enumerate(z):
            if v == 0 and any(z[i + 1 :]):
                raise InvalidDataError(
                    f"Generation {i} is extinct but a later generation is not: {z}"
                )
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        """Number of observed reproduction steps (index of the last generation)."""
        return len(self.z) - 1

    @property
    def parents(self) -> Tuple[int, ...]:
        return self.z[:-1]

    @property
    def children(self) -> Tuple[int, ...]:
        return self.z[1:]

    def truncate(self, generations: int) -> "GenerationSeries":
        return GenerationSeries(self.z[: generations + 1])

    def __len__(self) -> int:
        return len(self.z)


@dataclass(frozen=True, eq=False)
class OffspringCounts:
    """Rows (Z_i0, ..., Z_ik) for parent generations i = 0..n-1."""

    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.int64)
        if rows.ndim == 1 and rows.size == 0:
            rows = rows.reshape(0, 1)
        if rows.ndim != 2 or rows.shape[1] < 1:
            raise InvalidDataError(f"Offspring counts must be a matrix, got shape {rows.shape}")
        if np.any(rows < 0):
            raise InvalidDataError("Offspring counts must be nonnegative")
        h = np.arange(rows.shape[1])
        children = rows @ h
        totals = rows.sum(axis=1)
        mismatch = np.nonzero(children[:-1] != totals[1:])[0]
        if mismatch.size:
            i = int(mismatch[0])
            raise InvalidDataError(
                f"Generation {i} has {children[i]} children but generation {i + 1} "
                f"has {totals[i + 1]} parents"
            )
        if rows.shape[0] and totals[0] < 1:
            raise InvalidDataError("Generation 0 must have at least one parent")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "OffspringCounts":
        width = max((len(r) for r in rows), default=1)
        padded = np.zeros((len(rows), width), dtype=np.int64)
        for i, r in enumerate(rows):
            padded[i, : len(r)] = r
        return cls(padded)

    @classmethod
    def empty(cls, k: int = 0) -> "OffspringCounts":
        return cls(np.zeros((0, k + 1), dtype=np.int64))

    @property
    def k(self) -> int:
        return self.rows.shape[1] - 1

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def max_offspring(self) -> int:
        """Largest offspring size actually observed."""
        observed = np.nonzero(self.rows.sum(axis=0))[0]
        return int(observed[-1]) if observed.size else 0

    def column_totals(self) -> np.ndarray:
        return self.rows.sum(axis=0)

    def padded(self, k: int) -> "OffspringCounts":
        if k < self.max_offspring:
            raise InvalidDataError(
                f"Cannot restrict counts with offspring size {self.max_offspring} to k={k}"
            )
        out = np.zeros((self.n, k + 1), dtype=np.int64)
        width = min(k, self.k) + 1
        out[:, :width] = self.rows[:, :width]
        return OffspringCounts(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OffspringCounts):
            return NotImplemented
        return self.rows.shape == other.rows.shape and bool(np.all(self.rows == other.rows))

    def __hash__(self) -> int:
        return hash((self.rows.shape, self.rows.tobytes()))


def simulate_complete(
    dist: OffspringDistribution,
    z0: int,
    max_generations: int,
    rng: RngLike,
    explosion_cap: Optional[int] = None,
) -> OffspringCounts:
    """
    Simulate a realization parent by parent.

    Stops after ``max_generations`` reproduction steps or at extinction,
    whichever comes first.

    Raises:
        PopulationExplosionError: if a generation exceeds ``explosion_cap``.
    """
    if z0 < 1:
        raise InvalidDataError(f"Z_0 must be at least 1, got {z0}")
    if max_generations < 1:
        raise InvalidDataError(f"max_generations must be positive, got {max_generations}")
    cap = settings.explosion_cap if explosion_cap is None else explosion_cap
    generator = as_generator(rng)

    rows: List[np.ndarray] = []
    size = z0
    for generation in range(max_generations):
        offspring = dist.sample(generator, size)
        rows.append(np.bincount(offspring))
        size = int(offspring.sum())
        if size > cap:
            raise PopulationExplosionError(generation + 1, size, cap)
        if size == 0:
            break

    logger.debug(f"Simulated {len(rows)} generations, final size {size}")
    return OffspringCounts.from_rows(rows)


def collapse(counts: OffspringCounts) -> GenerationSeries:
    """Generation totals Z_0..Z_n implied by complete data."""
    if counts.n == 0:
        raise InvalidDataError("Cannot collapse counts with no recorded generation")
    totals = counts.rows.sum(axis=1)
    last_children = int(counts.rows[-1] @ np.arange(counts.k + 1))
    return GenerationSeries(tuple(int(t) for t in totals) + (last_children,))


def total_parents(data: Union[OffspringCounts, GenerationSeries]) -> int:
    """
    Individuals whose offspring are recorded, sum of Z_0..Z_{n-1}.

    The generation-n individuals are not counted: their offspring lie beyond
    the observation window.
    """
    if isinstance(data, OffspringCounts):
        return int(data.rows.sum())
    return sum(data.parents)


def pool_counts(counts: Iterable[OffspringCounts]) -> np.ndarray:
    """Column totals summed over independent realizations."""
    totals = np.zeros(1, dtype=np.int64)
    for c in counts:
        col = c.column_totals()
        if col.size > totals.size:
            totals = np.pad(totals, (0, col.size - totals.size))
        totals[: col.size] += col
    return totals


def write_counts_csv(counts: OffspringCounts, path: Union[str, Path]) -> None:
    frame = pd.DataFrame(counts.rows, columns=[f"j{j}" for j in range(counts.k + 1)])
    frame.insert(0, "generation", range(counts.n))
    frame.to_csv(path, index=False)


def write_series_csv(series: GenerationSeries, path: Union[str, Path]) -> None:
    frame = pd.DataFrame({"generation": range(len(series)), "count": series.z})
    frame.to_csv(path, index=False)


def _integer_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    values = pd.to_numeric(frame[column], errors="coerce")
    bad = values.isna() | (values < 0) | (values != values.round())
    if bad.any():
        # header is line 1
        lines = ", ".join(str(i + 2) for i in np.nonzero(bad.to_numpy())[0])
        raise InvalidDataError(
            f"Column '{column}' has missing, negative or non-integer values on line(s) {lines}"
        )
    return values.to_numpy(dtype=np.int64)


def read_observations(
    path: Union[str, Path],
) -> Union[OffspringCounts, GenerationSeries]:
    """
    Read either CSV layout, recognised by its header.

    ``generation,count`` is incomplete data; ``generation,j0,...,jk`` is
    complete data.
    """
    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InvalidDataError(f"Cannot read {path}: {e}") from e

    columns = [c.strip() for c in frame.columns]
    frame.columns = columns
    if not columns or columns[0] != "generation":
        raise InvalidDataError(f"{path}: first column must be 'generation', got {columns}")
    if columns[1:] == ["count"]:
        return GenerationSeries(tuple(_integer_column(frame, "count")))

    expected = [f"j{j}" for j in range(len(columns) - 1)]
    if columns[1:] != expected or not expected:
        raise InvalidDataError(f"{path}: expected columns {['generation'] + expected}")
    rows = np.column_stack([_integer_column(frame, c) for c in expected])
    return OffspringCounts(rows)
