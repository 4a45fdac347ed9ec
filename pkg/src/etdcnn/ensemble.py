"""Train one CNN per balanced bag and combine them by majority vote."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import Label
from .neuralnet import (
    LayerSpec,
    Model,
    TrainConfig,
    default_architecture,
    dumps_model,
    load_model,
    reshape_3d,
    spec_from_dict,
    spec_to_dict,
    train,
)
from .sampler import BaggingPlan, make_bags

MANIFEST_VERSION = 1


def derive_bagging_seed(master_seed: int) -> int:
    return int(np.random.SeedSequence([master_seed, 0xBA6]).generate_state(1)[0])


def model_seed(master_seed: int, i: int) -> int:
    return master_seed ^ i


@dataclass(frozen=True, eq=False)
class EnsemblePrediction:
    per_model_proba: np.ndarray
    votes_attack: int
    votes_normal: int
    label: Label
    score: float

    @property
    def vote_fraction(self) -> float:
        return self.votes_attack / (self.votes_attack + self.votes_normal)


def vote(per_model_proba: Sequence[float], threshold: float = 0.5) -> EnsemblePrediction:
    """Hard majority vote; a model votes theft when its probability exceeds ``threshold``."""
    proba = np.asarray(per_model_proba, dtype=np.float64).reshape(-1)
    n = proba.size
    if n < 1 or n % 2 == 0:
        raise ValueError(f"voting needs an odd number of models, got {n}")
    x = int(np.sum(proba > threshold))
    y = n - x
    label = Label.THEFT if x > y else Label.NORMAL
    return EnsemblePrediction(proba, x, y, label, float(proba.mean()))


@dataclass
class Ensemble:
    models: list[Model]
    plan: BaggingPlan
    threshold: float = 0.5
    master_seed: int = 0
    train_config: TrainConfig = dataclasses.field(default_factory=TrainConfig)

    def __post_init__(self):
        if len(self.models) % 2 == 0:
            raise ValueError("an ensemble needs an odd number of models")
        lengths = {m.input_length for m in self.models}
        if len(lengths) != 1:
            raise ValueError(f"models disagree on input length: {sorted(lengths)}")

    @property
    def n_models(self) -> int:
        return len(self.models)

    @property
    def input_length(self) -> int:
        return self.models[0].input_length

    @property
    def specs(self) -> list[LayerSpec]:
        return self.models[0].specs

    def proba_matrix(self, x) -> np.ndarray:
        """(L, N) matrix of per-model theft probabilities, in model order."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] == 0:
            return np.zeros((self.n_models, 0))
        return np.stack([m.predict_proba(x).reshape(-1) for m in self.models])

    def classify(self, x) -> tuple[list[EnsemblePrediction], np.ndarray]:
        """Vote per sample; also returns the mean-probability score vector."""
        probs = self.proba_matrix(x)
        preds = [vote(probs[:, j], self.threshold) for j in range(probs.shape[1])]
        scores = np.array([p.score for p in preds], dtype=np.float64)
        return preds, scores

    def manifest(self) -> dict:
        return {
            "version": MANIFEST_VERSION,
            "n_models": self.n_models,
            "threshold": self.threshold,
            "master_seed": self.master_seed,
            "bagging_seed": self.plan.seed,
            "model_seeds": [m.seed for m in self.models],
            "input_length": self.input_length,
            "specs": [spec_to_dict(s) for s in self.specs],
            "train_config": self.train_config.to_dict(),
            "models": [f"model_{i:02d}.bin" for i in range(self.n_models)],
            "plan": "bags.txt",
        }

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        manifest = self.manifest()
        for name, model in zip(manifest["models"], self.models):
            (d / name).write_bytes(dumps_model(model))
        (d / manifest["plan"]).write_text(self.plan.to_text(), encoding="utf-8")
        (d / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, directory) -> "Ensemble":
        d = Path(directory)
        path = d / "manifest.json"
        if not path.is_file():
            raise FileNotFoundError(f"no ensemble manifest at {path}")
        manifest = json.loads(path.read_text(encoding="utf-8"))
        if manifest.get("version") != MANIFEST_VERSION:
            raise ValueError(f"unsupported ensemble manifest version {manifest.get('version')}")
        models = [load_model(d / name) for name in manifest["models"]]
        specs = [spec_from_dict(s) for s in manifest["specs"]]
        if any(m.specs != specs for m in models):
            raise ValueError("model files disagree with the manifest architecture")
        plan = BaggingPlan.from_text((d / manifest["plan"]).read_text(encoding="utf-8"))
        return cls(
            models,
            plan,
            threshold=manifest["threshold"],
            master_seed=manifest["master_seed"],
            train_config=TrainConfig(**manifest["train_config"]),
        )


def fit(
    train_series,
    n_bags: int = 9,
    specs: Sequence[LayerSpec] | None = None,
    train_cfg: TrainConfig = TrainConfig(),
    master_seed: int = 0,
    threshold: float = 0.5,
) -> Ensemble:
    """Bag the training series, train one model per bag, return the ensemble.

    Model ``i`` uses ``master_seed ^ i`` for both initialization and shuffling.
    """
    specs = list(specs) if specs is not None else default_architecture()
    x, y = reshape_3d(train_series)
    plan = make_bags(y, n_bags, derive_bagging_seed(master_seed))
    models = []
    for i, bag in enumerate(plan.bags):
        idx = bag.indices
        seed = model_seed(master_seed, i)
        cfg = dataclasses.replace(train_cfg, shuffle_seed=seed)
        models.append(train(specs, x[idx], y[idx], cfg, seed=seed))
    return Ensemble(models, plan, threshold, master_seed, train_cfg)


def classify(ens: Ensemble, batch) -> tuple[list[EnsemblePrediction], np.ndarray]:
    return ens.classify(batch)
