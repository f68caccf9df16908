"""Time-series data model, CSV ingestion, normalisation, and PAA downsampling.

All samples are kept on a uniform time grid: the time of index ``i`` is
``t0 + i * dt``. Series are immutable after construction and every operation
here is a pure function returning a new object.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyAfterCleaning,
    IndexOutOfRange,
    MissingColumn,
    NonEquidistantTimestamps,
    ZeroVariance,
)

#: relative tolerance used when checking that timestamps sit on a uniform grid
EQUIDISTANCE_RTOL = 1e-6


@dataclass(frozen=True)
class TimeSeries:
    """Equidistant univariate samples with time metadata.

    Attributes:
        values: float samples, read-only, length >= 2, all finite.
        dt: positive time step between consecutive samples.
        t0: time of the first sample.
        label: human-readable identifier (e.g. ``"Air In 1"``).
    """

    values: np.ndarray
    dt: float = 1.0
    t0: float = 0.0
    label: str = ""

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1:
            raise ValueError("TimeSeries values must be one-dimensional")
        if arr.shape[0] < 2:
            raise ValueError("TimeSeries needs at least two samples")
        if not np.all(np.isfinite(arr)):
            raise ValueError("TimeSeries values must be finite")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def times(self) -> np.ndarray:
        """Time stamps of every sample."""
        return self.t0 + self.dt * np.arange(self.n)

    def replace_values(self, values: np.ndarray, dt: float | None = None,
                       t0: float | None = None) -> "TimeSeries":
        return TimeSeries(values, dt=self.dt if dt is None else dt,
                          t0=self.t0 if t0 is None else t0, label=self.label)


@dataclass(frozen=True)
class ChangePointSet:
    """Sorted intermediate change points plus the implicit endpoint ``n``.

    ``intermediate`` holds strictly increasing indices in the open interval
    ``(0, n)``; index ``tau`` splits the data into ``y[:tau]`` and ``y[tau:]``.
    The artificial final change point at ``n`` is not stored but is included
    in reported counts (``k_reported``) to match the usual table convention.
    """

    intermediate: tuple[int, ...]
    n: int

    def __post_init__(self):
        pts = tuple(int(p) for p in self.intermediate)
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("change points must be strictly increasing")
        if pts and (pts[0] <= 0 or pts[-1] >= self.n):
            raise ValueError("change points must lie strictly inside (0, n)")
        if self.n < 2:
            raise ValueError("series length must be at least 2")
        object.__setattr__(self, "intermediate", pts)

    @classmethod
    def from_points(cls, points: Iterable[int], n: int) -> "ChangePointSet":
        """Build from an unsorted, possibly duplicated iterable."""
        return cls(tuple(sorted(set(int(p) for p in points))), n)

    @property
    def k(self) -> int:
        """Number of intermediate change points."""
        return len(self.intermediate)

    @property
    def k_reported(self) -> int:
        """Prediction count including the artificial endpoint."""
        return self.k + 1

    def boundaries(self) -> tuple[int, ...]:
        return (0, *self.intermediate, self.n)

    def segments(self) -> list[tuple[int, int]]:
        """Consecutive half-open segments ``[a, b)`` covering the series."""
        bounds = self.boundaries()
        return list(zip(bounds[:-1], bounds[1:]))

    def points_with_endpoint(self) -> np.ndarray:
        """Evaluation set: the intermediates plus the endpoint ``n``."""
        return np.array([*self.intermediate, self.n], dtype=int)

    def labels(self) -> np.ndarray:
        """Segment label of every sample index (0-based segments)."""
        return np.searchsorted(np.asarray(self.intermediate, dtype=int),
                               np.arange(self.n), side="right")

    def add(self, index: int) -> "ChangePointSet":
        if not 0 < index < self.n:
            raise IndexOutOfRange(f"change point {index} outside (0, {self.n})")
        return ChangePointSet.from_points((*self.intermediate, index), self.n)

    def remove(self, index: int) -> "ChangePointSet":
        if index not in self.intermediate:
            raise IndexOutOfRange(f"change point {index} not in set")
        return ChangePointSet(tuple(p for p in self.intermediate if p != index), self.n)


@dataclass(frozen=True)
class SignalBundle:
    """A group of series sharing one index grid, with optional ground truth."""

    series: tuple[TimeSeries, ...]
    truth: ChangePointSet | None = None
    dropped_rows: int = 0

    def __post_init__(self):
        series = tuple(self.series)
        if not series:
            raise ValueError("SignalBundle needs at least one series")
        n, dt = series[0].n, series[0].dt
        for ts in series[1:]:
            if ts.n != n or ts.dt != dt:
                raise ValueError("all series in a bundle must share length and dt")
        if self.truth is not None and self.truth.n != n:
            raise ValueError("truth refers to a different series length")
        object.__setattr__(self, "series", series)

    @property
    def n(self) -> int:
        return self.series[0].n

    @property
    def dt(self) -> float:
        return self.series[0].dt


def _parse_time(cell: str) -> float:
    """Seconds from a plain real or an ISO-8601 timestamp."""
    try:
        return float(cell)
    except ValueError:
        return datetime.fromisoformat(cell).timestamp()


def _parse_value(cell: str | None) -> float | None:
    """Float from a cell, or None when the cell is missing/unusable."""
    if cell is None:
        return None
    cell = cell.strip()
    if not cell:
        return None
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def load_csv(path: str | Path, time_column: str,
             value_columns: Sequence[str]) -> SignalBundle:
    """Read a UTF-8, comma-delimited CSV into one series per value column.

    Rows with any missing or unparseable value are dropped and counted in
    ``SignalBundle.dropped_rows``. Timestamps must be strictly increasing and
    equidistant within a relative tolerance of 1e-6.

    Raises:
        MissingColumn: a requested column is absent from the header.
        NonEquidistantTimestamps: grid violation, reporting the first bad row.
        EmptyAfterCleaning: fewer than two complete rows remain.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        return read_csv_stream(fh, time_column, value_columns, name=path.name)


def read_csv_stream(fh, time_column: str, value_columns: Sequence[str],
                    name: str = "<stream>") -> SignalBundle:
    """`load_csv` over an already-open text stream (uploads, tests)."""
    reader = csv.DictReader(fh)
    header = reader.fieldnames or []
    for col in (time_column, *value_columns):
        if col not in header:
            raise MissingColumn(f"column {col!r} not found in {name}")
    times: list[float] = []
    rows: list[list[float]] = []
    dropped = 0
    for record in reader:
        parsed = [_parse_value(record[c]) for c in value_columns]
        t_cell = (record[time_column] or "").strip()
        if not t_cell or any(v is None for v in parsed):
            dropped += 1
            continue
        times.append(_parse_time(t_cell))
        rows.append(parsed)  # type: ignore[arg-type]

    if len(rows) < 2:
        raise EmptyAfterCleaning(f"{name}: {len(rows)} usable rows after cleaning")

    t = np.asarray(times)
    dt = t[1] - t[0]
    if dt <= 0:
        raise NonEquidistantTimestamps(2)
    steps = np.diff(t)
    bad = np.nonzero(np.abs(steps - dt) > EQUIDISTANCE_RTOL * abs(dt))[0]
    if bad.size:
        raise NonEquidistantTimestamps(int(bad[0]) + 2)

    data = np.asarray(rows)
    series = tuple(
        TimeSeries(data[:, j], dt=float(dt), t0=float(t[0]), label=col)
        for j, col in enumerate(value_columns)
    )
    return SignalBundle(series, dropped_rows=dropped)


def write_csv(bundle: SignalBundle, path: str | Path,
              time_column: str = "time") -> None:
    """Write a bundle in the same dialect ``load_csv`` reads."""
    path = Path(path)
    times = bundle.series[0].times()
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([time_column, *(ts.label or f"value{i}"
                                        for i, ts in enumerate(bundle.series))])
        columns = [ts.values for ts in bundle.series]
        for i in range(bundle.n):
            writer.writerow([repr(float(times[i])),
                             *(repr(float(col[i])) for col in columns)])


def normalise(ts: TimeSeries) -> TimeSeries:
    """Z-score a series to sample mean 0 and standard deviation 1.

    Uses the biased (maximum-likelihood) standard deviation, matching the
    variance convention of the segment costs. Raises ZeroVariance when all
    samples are equal.
    """
    mean = float(np.mean(ts.values))
    std = float(np.std(ts.values))
    if std == 0.0:
        raise ZeroVariance("cannot normalise a constant series")
    return ts.replace_values((ts.values - mean) / std)


def paa(ts: TimeSeries, window: int) -> TimeSeries:
    """Piecewise aggregate approximation: mean of consecutive windows.

    Output length is ``ceil(n / window)``; a ragged final window is averaged
    as-is. The time step is multiplied by ``window`` and the start time moves
    to the centre of the first window, so downsampled samples are anchored at
    window centres.
    """
    if window < 1:
        raise ValueError("window must be a positive integer")
    if window == 1:
        return ts
    n = ts.n
    out_len = -(-n // window)
    sums = np.zeros(out_len)
    full = n // window
    if full:
        sums[:full] = ts.values[: full * window].reshape(full, window).sum(axis=1)
    counts = np.full(out_len, window, dtype=float)
    if out_len > full:
        sums[-1] = ts.values[full * window:].sum()
        counts[-1] = n - full * window
    if out_len < 2:
        raise ValueError("window too large: downsampled series needs >= 2 samples")
    values = sums / counts
    return ts.replace_values(values, dt=ts.dt * window,
                             t0=ts.t0 + ts.dt * (window - 1) / 2.0)


def jump(ts: TimeSeries, i: int) -> float:
    """Discrete jump of the signal at index ``i``.

    Symmetric difference ``y[i+1] - y[i-1]`` where both neighbours exist,
    falling back to the one-sided difference at the boundaries.
    """
    n = ts.n
    if not 0 <= i < n:
        raise IndexOutOfRange(f"index {i} outside [0, {n})")
    lo = max(i - 1, 0)
    hi = min(i + 1, n - 1)
    return float(ts.values[hi] - ts.values[lo])
