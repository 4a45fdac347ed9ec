"""Missing-value recovery, outlier winsorization and min-max scaling.

Stages run in this order for every consumer independently:

1. :func:`fill_missing` replaces a missing day with the mean of the observed
   readings on the same weekday of the same calendar month; when none exist
   the day becomes the sentinel (-1).
2. :func:`winsorize` clamps non-sentinel readings into per-consumer
   empirical quantile bounds.
3. :func:`minmax_scale` maps non-sentinel readings onto [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .dataset import CalendarIndex, ConsumerSeries, Dataset, Label

SENTINEL = -1.0


@dataclass(frozen=True)
class PreprocessConfig:
    winsor_low_q: float = 0.0
    winsor_high_q: float = 0.99
    sentinel: float = SENTINEL
    scaling_scope: str = "per_consumer"

    def __post_init__(self):
        if not 0.0 <= self.winsor_low_q < 0.5:
            raise ValueError("winsor_low_q must lie in [0, 0.5)")
        if not 0.5 < self.winsor_high_q <= 1.0:
            raise ValueError("winsor_high_q must lie in (0.5, 1]")
        if not self.sentinel < 0:
            raise ValueError("sentinel must be negative")
        if self.scaling_scope != "per_consumer":
            raise ValueError(f"unsupported scaling_scope {self.scaling_scope!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ProcessedSeries:
    consumer_id: str
    label: Label
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "label", Label.parse(self.label))
        values = np.array(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProcessedSeries):
            return NotImplemented
        return (
            self.consumer_id == other.consumer_id
            and self.label == other.label
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def _group_keys(cal: CalendarIndex) -> np.ndarray:
    # one integer per (year, month, weekday)
    return ((cal.year - cal.year.min()) * 12 + (cal.month - 1)) * 7 + cal.weekday


def fill_missing(
    series: ConsumerSeries, cal: CalendarIndex, sentinel: float = SENTINEL
) -> ConsumerSeries:
    values = series.values
    if values.size != len(cal):
        raise ValueError(
            f"{series.consumer_id}: series length {values.size} != calendar length {len(cal)}"
        )
    missing = np.isnan(values)
    if not missing.any():
        return series
    keys = _group_keys(cal)
    observed = ~missing
    # only original observations feed the group means
    n_groups = int(keys.max()) + 1
    sums = np.bincount(keys[observed], weights=values[observed], minlength=n_groups)
    counts = np.bincount(keys[observed], minlength=n_groups)
    out = values.copy()
    k = keys[missing]
    with np.errstate(invalid="ignore", divide="ignore"):
        out[missing] = np.where(counts[k] > 0, sums[k] / counts[k], sentinel)
    return series.with_values(out)


def winsorize(series: ConsumerSeries, cfg: PreprocessConfig = PreprocessConfig()) -> ConsumerSeries:
    values = series.values
    if np.isnan(values).any():
        raise ValueError(f"{series.consumer_id}: winsorize requires missing values to be filled")
    real = values != cfg.sentinel
    if real.sum() < 2:
        return series
    lo, hi = np.quantile(values[real], [cfg.winsor_low_q, cfg.winsor_high_q], method="linear")
    out = values.copy()
    out[real] = np.clip(values[real], lo, hi)
    return series.with_values(out)


def minmax_scale(series, cfg: PreprocessConfig = PreprocessConfig()) -> ProcessedSeries:
    values = np.asarray(series.values, dtype=np.float64)
    if np.isnan(values).any():
        raise ValueError(f"{series.consumer_id}: cannot scale a series with missing values")
    real = values != cfg.sentinel
    out = values.copy()
    if real.any():
        lo, hi = values[real].min(), values[real].max()
        if hi > lo:
            out[real] = (values[real] - lo) / (hi - lo)
        else:
            out[real] = 0.0
    return ProcessedSeries(series.consumer_id, series.label, out)


def preprocess_series(
    series: ConsumerSeries, cal: CalendarIndex, cfg: PreprocessConfig = PreprocessConfig()
) -> ProcessedSeries:
    filled = fill_missing(series, cal, cfg.sentinel)
    return minmax_scale(winsorize(filled, cfg), cfg)


def run_pipeline(ds: Dataset, cfg: PreprocessConfig = PreprocessConfig()) -> list[ProcessedSeries]:
    return [preprocess_series(s, ds.calendar, cfg) for s in ds.series]
