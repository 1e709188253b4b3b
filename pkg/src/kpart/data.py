"""
Observation types, crime-rate computation and CSV ingestion.

A series is one locality's yearly record of population and violent crime.
Rates are per capita: offenses in a year divided by that year's population.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .exceptions import DataFormatError, DomainError, EmptySeriesError

RATE_RTOL = 1e-12


def compute_rate(crime_count: float, population: float, year: Optional[int] = None) -> float:
    """Return the per-capita crime rate ``crime_count / population``.

    Parameters
    ----------
    crime_count : float
        Offenses recorded in the year. Must be nonnegative.
    population : float
        Resident population for the same year. Must be positive.
    year : int, optional
        Only used to name the offending row in error messages.

    Raises
    ------
    DomainError
        If ``population <= 0`` or ``crime_count < 0``.
    """
    where = f" (year {year})" if year is not None else ""
    if not population > 0:
        raise DomainError(f"population must be positive{where}, got {population!r}")
    if crime_count < 0:
        raise DomainError(f"crime count must be nonnegative{where}, got {crime_count!r}")
    return crime_count / population


@dataclass(frozen=True)
class Observation:
    """One locality-year."""

    year: int
    population: float
    crime_count: Optional[float] = None
    rate: Optional[float] = None

    def __post_init__(self):
        if not self.population > 0:
            raise DomainError(f"population must be positive (year {self.year})")
        if self.crime_count is None and self.rate is None:
            raise DomainError(f"year {self.year}: need a crime count or a rate")
        if self.crime_count is not None and self.crime_count < 0:
            raise DomainError(f"crime count must be nonnegative (year {self.year})")
        if self.rate is not None and self.rate < 0:
            raise DomainError(f"rate must be nonnegative (year {self.year})")
        if self.crime_count is not None:
            derived = compute_rate(self.crime_count, self.population, self.year)
            if self.rate is None:
                object.__setattr__(self, "rate", derived)
            elif not math.isclose(self.rate, derived, rel_tol=RATE_RTOL, abs_tol=0.0):
                raise DomainError(
                    f"year {self.year}: rate {self.rate!r} disagrees with "
                    f"count/population = {derived!r}"
                )


@dataclass(frozen=True)
class CrimeSeries:
    """Year-ordered observations for a single locality."""

    name: str
    observations: tuple

    def __post_init__(self):
        obs = tuple(self.observations)
        object.__setattr__(self, "observations", obs)
        if not obs:
            raise EmptySeriesError(f"series {self.name!r} has no observations")
        years = [o.year for o in obs]
        if any(b <= a for a, b in zip(years, years[1:])):
            raise DomainError(f"series {self.name!r}: years must be strictly increasing")

    def __len__(self):
        return len(self.observations)

    @property
    def years(self) -> np.ndarray:
        return np.array([o.year for o in self.observations], dtype=int)

    @property
    def population(self) -> np.ndarray:
        return np.array([o.population for o in self.observations], dtype=float)

    @property
    def rate(self) -> np.ndarray:
        return np.array([o.rate for o in self.observations], dtype=float)

    @property
    def has_counts(self) -> bool:
        return all(o.crime_count is not None for o in self.observations)


@dataclass(frozen=True)
class ScaleTransform:
    """Affine map ``x = (u - shift) / scale`` used to condition the predictor."""

    shift: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale!r}")

    def forward(self, u):
        return (np.asarray(u, dtype=float) - self.shift) / self.scale

    def inverse(self, x):
        return np.asarray(x, dtype=float) * self.scale + self.shift


def make_scale(x: Sequence[float]) -> ScaleTransform:
    """Build the transform that maps ``x`` onto ``[0, 1]``.

    A constant vector (including a single value) gets ``scale = 1``.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise DomainError("cannot build a scale transform from an empty vector")
    lo, hi = float(x.min()), float(x.max())
    return ScaleTransform(shift=lo, scale=(hi - lo) if hi > lo else 1.0)


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColumnMap:
    """Header names for the CSV columns kpart reads."""

    year: str = "year"
    population: str = "population"
    count: str = "count"
    rate: str = "rate"


@dataclass
class LoadReport:
    """What happened while reading a series file."""

    path: str
    rows_read: int = 0
    skipped_rows: list = field(default_factory=list)
    value_column: str = ""

    @property
    def n_skipped(self) -> int:
        return len(self.skipped_rows)

    def __str__(self):
        return f"{self.n_skipped} rows skipped"


def _parse_number(cell, column, row_number, path):
    try:
        return float(cell)
    except ValueError:
        raise DataFormatError(
            f"{path}: row {row_number}: column {column!r} is not numeric: {cell!r}"
        ) from None


def load_series(path, columns: ColumnMap = ColumnMap(), name: Optional[str] = None):
    """Read one locality's series from a CSV file.

    The header must contain the year and population columns plus a count
    column or a rate column. When a count column exists it is used and rates
    are derived from it; otherwise rates are read directly. Rows whose crime
    value is blank are skipped, everything else must parse as a number.

    Parameters
    ----------
    path : str or Path
        UTF-8 CSV file with a header row.
    columns : ColumnMap
        Header names to look for.
    name : str, optional
        Series label. Defaults to the file stem.

    Returns
    -------
    series : CrimeSeries
        Observations sorted by year.
    report : LoadReport
        Row accounting, including the 1-based row numbers that were skipped.
    """
    path = Path(path)
    report = LoadReport(path=str(path))
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        reader.fieldnames = header
        for col in (columns.year, columns.population):
            if col not in header:
                raise DataFormatError(f"{path}: missing column {col!r}")
        if columns.count in header:
            value_col, is_count = columns.count, True
        elif columns.rate in header:
            value_col, is_count = columns.rate, False
        else:
            raise DataFormatError(
                f"{path}: missing column {columns.count!r} (or {columns.rate!r})"
            )
        report.value_column = value_col

        observations = []
        # header is row 1
        for row_number, row in enumerate(reader, start=2):
            report.rows_read += 1
            value = (row.get(value_col) or "").strip()
            if not value:
                report.skipped_rows.append(row_number)
                continue
            year_cell = (row.get(columns.year) or "").strip()
            try:
                year = int(year_cell)
            except ValueError:
                year = _parse_number(year_cell, columns.year, row_number, path)
                if not float(year).is_integer():
                    raise DataFormatError(
                        f"{path}: row {row_number}: year {year_cell!r} is not an integer"
                    ) from None
                year = int(year)
            pop = _parse_number(
                (row.get(columns.population) or "").strip(), columns.population, row_number, path
            )
            crime = _parse_number(value, value_col, row_number, path)
            if is_count:
                observations.append(Observation(year=year, population=pop, crime_count=crime))
            else:
                observations.append(Observation(year=year, population=pop, rate=crime))

    if not observations:
        raise EmptySeriesError(f"{path}: no usable rows")
    observations.sort(key=lambda o: o.year)
    return CrimeSeries(name=name or path.stem, observations=tuple(observations)), report


def write_series(series: CrimeSeries, path, columns: ColumnMap = ColumnMap()):
    """Write ``series`` as CSV in the layout :func:`load_series` reads.

    Counts are written when every observation has one, rates otherwise.
    Floats use ``repr`` so a reload reproduces them bit for bit.
    """
    use_counts = series.has_counts
    value_col = columns.count if use_counts else columns.rate
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([columns.year, columns.population, value_col])
        for o in series.observations:
            value = o.crime_count if use_counts else o.rate
            writer.writerow([o.year, repr(float(o.population)), repr(float(value))])
