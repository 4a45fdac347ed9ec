"""Random under-bagging: turn an imbalanced label vector into balanced bags."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Label


@dataclass(frozen=True, eq=False)
class Bag:
    minority_indices: np.ndarray
    majority_indices: np.ndarray

    @property
    def indices(self) -> np.ndarray:
        return np.concatenate([self.minority_indices, self.majority_indices])

    def __len__(self) -> int:
        return self.minority_indices.size + self.majority_indices.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Bag):
            return NotImplemented
        return np.array_equal(self.minority_indices, other.minority_indices) and np.array_equal(
            self.majority_indices, other.majority_indices
        )

    __hash__ = None


@dataclass(frozen=True)
class BaggingPlan:
    bags: tuple[Bag, ...]
    seed: int
    minority_label: Label

    @property
    def n_bags(self) -> int:
        return len(self.bags)

    def to_text(self) -> str:
        lines = [
            f"seed {self.seed}",
            f"bags {self.n_bags}",
            f"minority {self.minority_label.name}",
        ]
        for i, bag in enumerate(self.bags):
            lines.append(f"bag {i} minority " + " ".join(map(str, bag.minority_indices)))
            lines.append(f"bag {i} majority " + " ".join(map(str, bag.majority_indices)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BaggingPlan":
        lines = text.strip().splitlines()
        seed = int(lines[0].split()[1])
        n = int(lines[1].split()[1])
        minority_label = Label[lines[2].split()[1]]

        def parse(line):
            return np.array([int(t) for t in line.split()[3:]], dtype=np.int64)

        bags = tuple(
            Bag(parse(lines[3 + 2 * i]), parse(lines[4 + 2 * i])) for i in range(n)
        )
        return cls(bags, seed, minority_label)


def _majority_stream(majority: np.ndarray, n_bags: int, m: int, rng: np.random.Generator):
    """Yield ``n_bags`` chunks of ``m`` majority indices.

    Draws from consecutive shuffles of the majority list, so no sample repeats
    before all have been used. Samples left at the tail of one shuffle are
    pushed to the back of the next so a chunk never holds duplicates.
    """
    current = rng.permutation(majority)
    pos = 0
    for _ in range(n_bags):
        chunk = list(current[pos : pos + m])
        pos += len(chunk)
        if len(chunk) < m:
            tail = set(chunk)
            fresh = rng.permutation(majority)
            keep = fresh[[i not in tail for i in fresh]]
            deferred = fresh[[i in tail for i in fresh]]
            current = np.concatenate([keep, deferred])
            need = m - len(chunk)
            chunk.extend(current[:need])
            pos = need
        yield np.array(chunk, dtype=np.int64)


def make_bags(labels: Sequence, n_bags: int = 9, seed: int = 0) -> BaggingPlan:
    """Build ``n_bags`` bags, each holding every minority sample plus as many majority ones."""
    if n_bags < 1 or n_bags % 2 == 0:
        raise ValueError(f"number of bags must be a positive odd integer, got {n_bags}")
    y = np.array([int(Label.parse(v)) for v in labels], dtype=np.int64)
    theft = np.flatnonzero(y == Label.THEFT)
    normal = np.flatnonzero(y == Label.NORMAL)
    if theft.size == 0 or normal.size == 0:
        raise ValueError("both classes must be present to build bags")
    if theft.size <= normal.size:
        minority_label, minority, majority = Label.THEFT, theft, normal
    else:
        minority_label, minority, majority = Label.NORMAL, normal, theft

    rng = np.random.default_rng(seed)
    m = minority.size
    bags = tuple(
        Bag(minority.copy(), np.sort(chunk))
        for chunk in _majority_stream(majority, n_bags, m, rng)
    )
    for bag in bags:
        bag.minority_indices.setflags(write=False)
        bag.majority_indices.setflags(write=False)
    return BaggingPlan(bags, seed, minority_label)
