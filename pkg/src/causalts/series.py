"""Core time-series types, z-normalization, and spectral period detection.

Positions and subsequence starts are 1-based everywhere a caller sees them;
array indexing stays 0-based internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyDataset,
    EmptyInput,
    NoDominantFrequency,
    TooShort,
    WindowTooLong,
)

# Below this standard deviation a sequence is treated as constant.
VARIANCE_EPS = 1e-12

# A spectral peak carrying less than this fraction of the total off-DC
# power does not count as a dominant frequency.
SPECTRAL_EPS = 1e-9

# Shortest period worth reporting; anything finer is indistinguishable
# from noise at the window sizes we mine.
MIN_PERIOD = 4


def _as_float_array(values, *, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise EmptyInput(f"{what} must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite samples")
    return arr


def znormalize(values) -> np.ndarray:
    """Return a zero-mean, unit-variance copy of ``values``.

    Standard deviation is the population one (divisor ``n``).  Sequences
    whose deviation does not exceed ``VARIANCE_EPS`` come back as all
    zeros instead of exploding.
    """
    arr = _as_float_array(values, what="input")
    sd = float(arr.std())
    if sd <= VARIANCE_EPS:
        return np.zeros_like(arr)
    return (arr - arr.mean()) / sd


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A univariate series with an optional class label and an opaque id."""

    values: np.ndarray
    label: int | None = None
    id: str = ""

    def __post_init__(self):
        arr = _as_float_array(self.values, what="series values")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        if self.label is not None:
            if int(self.label) != self.label or self.label < 0:
                raise ValueError("label must be a non-negative integer")
            object.__setattr__(self, "label", int(self.label))

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True, eq=False)
class Subsequence:
    """A contiguous window of a source series.

    ``start`` is 1-based: the first window of a series starts at 1.
    """

    source: str
    start: int
    values: np.ndarray

    def __post_init__(self):
        if self.start < 1:
            raise ValueError("subsequence start is 1-based")
        arr = _as_float_array(self.values, what="subsequence values")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def length(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ordered collection of series with unique ids.

    Either every series carries a label or none does; a mixed dataset is
    rejected because downstream encoding cannot represent it.
    """

    series: tuple[TimeSeries, ...]

    def __post_init__(self):
        items = tuple(self.series)
        object.__setattr__(self, "series", items)
        ids = [s.id for s in items]
        if len(set(ids)) != len(ids):
            raise ValueError("series ids must be unique within a dataset")
        labeled = [s.label is not None for s in items]
        if any(labeled) and not all(labeled):
            raise ValueError("dataset mixes labeled and unlabeled series")

    def __len__(self) -> int:
        return len(self.series)

    def __iter__(self):
        return iter(self.series)

    @property
    def labeled(self) -> bool:
        return bool(self.series) and self.series[0].label is not None

    @property
    def class_count(self) -> int:
        """Count of distinct labels observed (0 for unlabeled data)."""
        if not self.labeled:
            return 0
        return len({s.label for s in self.series})


def dominant_period(series: TimeSeries) -> int:
    """Length, in samples, of the strongest periodic component.

    The mean-removed series goes through a real FFT; the candidate
    frequency bins are those implying a period between ``MIN_PERIOD``
    and half the series length, and the winner is the bin with the
    largest magnitude.  The reported period is ``round(n / bin)``
    clamped back into that range.

    Raises
    ------
    TooShort
        If the series has fewer than 8 samples.
    NoDominantFrequency
        If the series is constant, or the best peak carries less than
        ``SPECTRAL_EPS`` of the total off-DC power.
    """
    n = series.n
    if n < 8:
        raise TooShort(f"period detection needs at least 8 samples, got {n}")
    x = series.values - series.values.mean()
    power = np.abs(np.fft.rfft(x)) ** 2
    total = float(power[1:].sum())
    if total <= 0.0:
        raise NoDominantFrequency("series is constant")
    # Bin b corresponds to period n / b; keep 4 <= n/b <= n/2.
    b_lo, b_hi = 2, n // 4
    band = power[b_lo : b_hi + 1]
    best = int(np.argmax(band)) + b_lo
    if power[best] < SPECTRAL_EPS * total:
        raise NoDominantFrequency("no spectral peak stands out")
    period = int(round(n / best))
    return int(min(max(period, MIN_PERIOD), n // 2))


def unified_length(dataset: Dataset) -> int:
    """Largest dominant period across the dataset.

    Taking the max means every series' strongest structure fits inside
    one shared window, at the cost of oversized windows for the rest.
    """
    if len(dataset) == 0:
        raise EmptyDataset("cannot unify window length over zero series")
    best = 0
    for s in dataset:
        try:
            best = max(best, dominant_period(s))
        except NoDominantFrequency as err:
            raise NoDominantFrequency(f"series {s.id!r}: {err}") from err
    return best


def subsequences(series: TimeSeries, m: int) -> list[Subsequence]:
    """All n - m + 1 windows of length ``m``, starts 1-based."""
    if m < 1:
        raise ValueError("window length must be positive")
    n = series.n
    if m > n:
        raise WindowTooLong(f"window {m} exceeds series length {n}")
    vals = series.values
    return [
        Subsequence(source=series.id, start=i + 1, values=vals[i : i + m])
        for i in range(n - m + 1)
    ]
