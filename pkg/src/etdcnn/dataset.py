"""Calendar-aligned daily consumption data in the wide-CSV layout.

File layout (one consumer per row)::

    CONS_NO,FLAG,2014/1/1,2014/1/2,...
    u1,0,3.5,,...

Empty cells and ``NaN``/``nan`` tokens are missing readings. FLAG 1 marks theft.
Missing readings are held as NaN inside float64 arrays; use
:attr:`ConsumerSeries.missing` rather than comparing values.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Label",
    "ConsumerSeries",
    "CalendarIndex",
    "Dataset",
    "DatasetError",
    "load_csv",
    "write_csv",
    "save_dataset",
    "build_calendar",
    "stratified_split",
    "round_half_up",
]

MISSING_TOKENS = frozenset({"", "NaN", "nan"})


class DatasetError(ValueError):
    """Raised for malformed input files or inconsistent datasets."""


class Label(enum.IntEnum):
    NORMAL = 0
    THEFT = 1

    @classmethod
    def parse(cls, value) -> "Label":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().upper()
            if key in cls.__members__:
                return cls[key]
            if key == "ATTACK":
                return cls.THEFT
            value = key
        return cls(int(value))


def round_half_up(x: float) -> int:
    # 1e-9 absorbs products like 0.7 * 5 = 3.4999999999999996
    return int(math.floor(x + 0.5 + 1e-9))


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ConsumerSeries:
    consumer_id: str
    label: Label
    values: np.ndarray
    start_date: dt.date

    def __post_init__(self):
        object.__setattr__(self, "label", Label.parse(self.label))
        object.__setattr__(self, "values", _frozen(self.values))
        if self.values.ndim != 1 or self.values.size < 1:
            raise DatasetError(f"{self.consumer_id}: values must be a non-empty 1-D sequence")

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def __len__(self) -> int:
        return self.values.size

    def with_values(self, values) -> "ConsumerSeries":
        return ConsumerSeries(self.consumer_id, self.label, values, self.start_date)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConsumerSeries):
            return NotImplemented
        return (
            self.consumer_id == other.consumer_id
            and self.label == other.label
            and self.start_date == other.start_date
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class CalendarIndex:
    """Per-day weekday (0 = Monday), month (1-12) and year."""

    start_date: dt.date
    weekday: np.ndarray
    month: np.ndarray
    year: np.ndarray

    def __eq__(self, other) -> bool:
        if not isinstance(other, CalendarIndex):
            return NotImplemented
        return self.start_date == other.start_date and all(
            np.array_equal(a, b)
            for a, b in zip(
                (self.weekday, self.month, self.year), (other.weekday, other.month, other.year)
            )
        )

    __hash__ = None

    def __len__(self) -> int:
        return self.weekday.size

    def dates(self) -> list[dt.date]:
        return [self.start_date + dt.timedelta(days=d) for d in range(len(self))]


def build_calendar(start_date: dt.date, n_days: int) -> CalendarIndex:
    if n_days < 1:
        raise ValueError("n_days must be >= 1")
    days = [start_date + dt.timedelta(days=d) for d in range(n_days)]
    weekday = np.array([d.weekday() for d in days], dtype=np.int64)
    month = np.array([d.month for d in days], dtype=np.int64)
    year = np.array([d.year for d in days], dtype=np.int64)
    for a in (weekday, month, year):
        a.setflags(write=False)
    return CalendarIndex(start_date, weekday, month, year)


@dataclass(frozen=True)
class Dataset:
    series: tuple[ConsumerSeries, ...]
    calendar: CalendarIndex = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))
        n_days = len(self.calendar)
        seen = set()
        for s in self.series:
            if len(s) != n_days:
                raise DatasetError(
                    f"{s.consumer_id}: length {len(s)} does not match day count {n_days}"
                )
            if s.start_date != self.calendar.start_date:
                raise DatasetError(f"{s.consumer_id}: start date differs from dataset")
            if s.consumer_id in seen:
                raise DatasetError(f"duplicate consumer id {s.consumer_id!r}")
            seen.add(s.consumer_id)

    @classmethod
    def from_series(cls, series: Iterable[ConsumerSeries]) -> "Dataset":
        series = tuple(series)
        if not series:
            raise DatasetError("cannot build a calendar for an empty dataset")
        first = series[0]
        return cls(series, build_calendar(first.start_date, len(first)))

    def __len__(self) -> int:
        return len(self.series)

    def __iter__(self):
        return iter(self.series)

    def __getitem__(self, i) -> ConsumerSeries:
        return self.series[i]

    @property
    def n_days(self) -> int:
        return len(self.calendar)

    @property
    def labels(self) -> np.ndarray:
        return np.array([int(s.label) for s in self.series], dtype=np.int64)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(tuple(self.series[i] for i in indices), self.calendar)


def _parse_date(text: str, column: int) -> dt.date:
    try:
        y, m, d = (int(p) for p in text.strip().split("/"))
        return dt.date(y, m, d)
    except (ValueError, TypeError):
        raise DatasetError(
            f"header column {column + 1} ({text!r}) is not a YYYY/M/D date"
        ) from None


def _format_date(d: dt.date) -> str:
    return f"{d.year}/{d.month}/{d.day}"


def load_csv(path) -> Dataset:
    path = Path(path)
    with path.open("r", encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        if len(header) < 3:
            raise DatasetError(f"{path}: header needs CONS_NO, FLAG and at least one date")
        if header[0].strip() != "CONS_NO":
            raise DatasetError(f"header column 1 must be 'CONS_NO', got {header[0]!r}")
        if header[1].strip() != "FLAG":
            raise DatasetError(f"header column 2 must be 'FLAG', got {header[1]!r}")
        dates = [_parse_date(h, j) for j, h in enumerate(header[2:], start=2)]
        for j in range(1, len(dates)):
            if dates[j] - dates[j - 1] != dt.timedelta(days=1):
                raise DatasetError(
                    f"header column {j + 3} ({header[j + 2]!r}) does not follow "
                    f"{header[j + 1]!r} by exactly one day"
                )
        start, n_days = dates[0], len(dates)
        width = n_days + 2

        series = []
        seen = set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise DatasetError(
                    f"row {lineno}: expected {width} fields, found {len(row)}"
                )
            cid = row[0].strip()
            if cid in seen:
                raise DatasetError(f"row {lineno}: duplicate consumer id {cid!r}")
            seen.add(cid)
            flag = row[1].strip()
            if flag not in ("0", "1"):
                raise DatasetError(f"row {lineno}, column 2: FLAG must be 0 or 1, got {flag!r}")
            values = np.empty(n_days)
            for j, cell in enumerate(row[2:]):
                cell = cell.strip()
                if cell in MISSING_TOKENS:
                    values[j] = np.nan
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    v = math.nan
                if not math.isfinite(v) or v < 0:
                    raise DatasetError(
                        f"row {lineno}, column {j + 3}: invalid reading {cell!r}"
                    )
                values[j] = v
            series.append(ConsumerSeries(cid, Label(int(flag)), values, start))
    return Dataset(tuple(series), build_calendar(start, n_days))


def _format_value(v: float) -> str:
    if math.isnan(v):
        return ""
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def write_csv(rows: Iterable, path, start_date: dt.date, n_days: int) -> None:
    """Write series-like rows (``consumer_id``, ``label``, ``values``) to ``path``.

    Works for raw :class:`ConsumerSeries` and for preprocessed rows, whose
    sentinel entries are written literally.
    """
    header = ["CONS_NO", "FLAG"] + [
        _format_date(start_date + dt.timedelta(days=d)) for d in range(n_days)
    ]
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for s in rows:
            writer.writerow(
                [s.consumer_id, int(s.label)] + [_format_value(v) for v in s.values]
            )


def save_dataset(ds: Dataset, path) -> None:
    write_csv(ds.series, path, ds.calendar.start_date, ds.n_days)


def stratified_split(ds: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split per label, putting ``round(train_fraction * count)`` of each label in train.

    Both halves keep the original row order.
    """
    if len(ds) == 0:
        raise DatasetError("cannot split an empty dataset")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    labels = ds.labels
    train_mask = np.zeros(len(ds), dtype=bool)
    for lab in (Label.NORMAL, Label.THEFT):
        idx = np.flatnonzero(labels == lab)
        if idx.size == 0:
            continue
        k = round_half_up(train_fraction * idx.size)
        train_mask[rng.permutation(idx)[:k]] = True
    train_idx = np.flatnonzero(train_mask)
    test_idx = np.flatnonzero(~train_mask)
    return ds.subset(train_idx), ds.subset(test_idx)
