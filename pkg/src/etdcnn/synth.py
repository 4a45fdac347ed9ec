"""Synthetic smart-meter data: seasonal household profiles plus injected theft.

Normal consumers follow ``base + weekend offset + annual sinusoid + noise``.
Theft consumers are normal profiles transformed by one of three attacks:

* ``uniform_scale``: every day multiplied by one alpha ~ U(0.1, 0.8)
* ``interval_zero``: a contiguous window of 10-40% of the days set to zero
* ``daily_scale``: each day multiplied by its own beta ~ U(0.1, 1.0)

``uniform_scale`` leaves the per-consumer min-max scaled profile exactly
unchanged, so a shape-only detector cannot see it; the default attack mix
therefore gives it weight 0. Turn it on through ``attack_mix``.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass, asdict, field
from pathlib import Path

import numpy as np

from .dataset import ConsumerSeries, Dataset, Label, build_calendar, round_half_up, save_dataset

ATTACKS = ("uniform_scale", "interval_zero", "daily_scale")


@dataclass(frozen=True)
class SynthConfig:
    n_consumers: int = 2000
    n_days: int = 365
    start_date: dt.date = dt.date(2014, 1, 1)
    theft_fraction: float = 0.08
    missing_rate: float = 0.05
    attack_mix: dict = field(
        default_factory=lambda: {"uniform_scale": 0.0, "interval_zero": 1.0, "daily_scale": 1.0}
    )
    seed: int = 0
    base_range: tuple = (5.0, 25.0)
    noise_frac: float = 0.10
    weekend_frac: float = 0.15
    seasonal_frac: float = 0.25

    def __post_init__(self):
        if isinstance(self.start_date, str):
            object.__setattr__(self, "start_date", dt.date.fromisoformat(self.start_date))
        object.__setattr__(self, "base_range", tuple(self.base_range))
        if self.n_consumers < 1 or self.n_days < 1:
            raise ValueError("n_consumers and n_days must be >= 1")
        if not 0.0 < self.theft_fraction < 1.0:
            raise ValueError("theft_fraction must lie in (0, 1)")
        if not 0.0 <= self.missing_rate < 1.0:
            raise ValueError("missing_rate must lie in [0, 1)")
        unknown = set(self.attack_mix) - set(ATTACKS)
        if unknown:
            raise ValueError(f"unknown attack types {sorted(unknown)}")
        weights = [self.attack_mix.get(a, 0.0) for a in ATTACKS]
        if min(weights) < 0 or sum(weights) <= 0:
            raise ValueError("attack_mix weights must be non-negative and not all zero")

    def attack_weights(self) -> np.ndarray:
        w = np.array([float(self.attack_mix.get(a, 0.0)) for a in ATTACKS])
        return w / w.sum()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["start_date"] = self.start_date.isoformat()
        d["base_range"] = list(self.base_range)
        d["attack_mix"] = {a: float(self.attack_mix.get(a, 0.0)) for a in ATTACKS}
        return d


def _rng(cfg: SynthConfig, *stream: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, *stream])


def consumer_id(index: int) -> str:
    return f"C{index:06d}"


def generate_normal(cfg: SynthConfig, consumer_index: int) -> ConsumerSeries:
    rng = _rng(cfg, 0, consumer_index)
    cal = build_calendar(cfg.start_date, cfg.n_days)
    base = rng.uniform(*cfg.base_range)
    weekend = rng.uniform(-cfg.weekend_frac, cfg.weekend_frac) * base
    phase = rng.uniform(0.0, 2.0 * math.pi)
    amp = rng.uniform(0.5, 1.0) * cfg.seasonal_frac * base
    noise = rng.normal(0.0, cfg.noise_frac * base, size=cfg.n_days)
    day_of_year = np.array(
        [d.timetuple().tm_yday for d in cal.dates()], dtype=np.float64
    )
    values = (
        base
        + weekend * (cal.weekday >= 5)
        + amp * np.sin(2.0 * math.pi * day_of_year / 365.25 + phase)
        + noise
    )
    values = np.maximum(values, 0.0)
    if cfg.missing_rate > 0:
        values[rng.random(cfg.n_days) < cfg.missing_rate] = np.nan
    return ConsumerSeries(consumer_id(consumer_index), Label.NORMAL, values, cfg.start_date)


def scale_uniform(values, alpha: float) -> np.ndarray:
    return np.asarray(values, dtype=np.float64) * alpha


def zero_interval(values, start: int, stop: int) -> np.ndarray:
    out = np.array(values, dtype=np.float64)
    window = out[start:stop]
    window[~np.isnan(window)] = 0.0
    return out


def scale_daily(values, betas) -> np.ndarray:
    return np.asarray(values, dtype=np.float64) * np.asarray(betas, dtype=np.float64)


def apply_attack(series: ConsumerSeries, attack: str, seed) -> ConsumerSeries:
    """Return a theft-labelled copy of ``series`` transformed by ``attack``."""
    rng = np.random.default_rng(seed)
    v = series.values
    if np.any(v[~np.isnan(v)] < 0):
        raise ValueError("attacks expect non-negative readings")
    n = v.size
    if attack == "uniform_scale":
        out = scale_uniform(v, rng.uniform(0.1, 0.8))
    elif attack == "interval_zero":
        lo = max(1, math.ceil(0.1 * n))
        hi = max(lo, math.floor(0.4 * n))
        length = int(rng.integers(lo, hi + 1))
        start = int(rng.integers(0, n - length + 1))
        out = zero_interval(v, start, start + length)
    elif attack == "daily_scale":
        out = scale_daily(v, rng.uniform(0.1, 1.0, size=n))
    else:
        raise ValueError(f"unknown attack {attack!r}; expected one of {ATTACKS}")
    return ConsumerSeries(series.consumer_id, Label.THEFT, out, series.start_date)


def theft_assignment(cfg: SynthConfig) -> dict[int, str]:
    """Map attacked consumer index -> attack type."""
    rng = _rng(cfg, 1)
    n_theft = round_half_up(cfg.n_consumers * cfg.theft_fraction)
    chosen = np.sort(rng.choice(cfg.n_consumers, size=n_theft, replace=False))
    kinds = rng.choice(len(ATTACKS), size=n_theft, p=cfg.attack_weights())
    return {int(i): ATTACKS[k] for i, k in zip(chosen, kinds)}


def generate_dataset(cfg: SynthConfig = SynthConfig(), path=None) -> Dataset:
    """Build the dataset; when ``path`` is given also write the CSV and a JSON manifest."""
    thefts = theft_assignment(cfg)
    series = []
    for i in range(cfg.n_consumers):
        s = generate_normal(cfg, i)
        if i in thefts:
            s = apply_attack(s, thefts[i], [cfg.seed, 2, i])
        series.append(s)
    ds = Dataset(tuple(series), build_calendar(cfg.start_date, cfg.n_days))
    if path is not None:
        path = Path(path)
        save_dataset(ds, path)
        manifest = {
            "config": cfg.to_dict(),
            "n_theft": len(thefts),
            "attacks": {consumer_id(i): a for i, a in sorted(thefts.items())},
        }
        manifest_path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return ds


def manifest_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".manifest.json")
