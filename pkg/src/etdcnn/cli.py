"""Command-line front end: ``etdcnn {synth,preprocess,train,eval,predict}``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .dataset import DatasetError, Label, load_csv, stratified_split, write_csv
from .ensemble import Ensemble, fit
from .metrics import evaluate, write_roc_csv
from .neuralnet import TrainConfig, default_architecture, reshape_3d, spec_from_dict, spec_to_dict
from .preprocess import PreprocessConfig, run_pipeline
from .synth import SynthConfig, generate_dataset

log = logging.getLogger("etdcnn")

DEFAULTS = {
    "seed": 0,
    "bags": 9,
    "train_fraction": 0.7,
    "threshold": 0.5,
    "positive_class": "normal",
    "preprocess": PreprocessConfig().to_dict(),
    "train": TrainConfig().to_dict(),
    "architecture": [spec_to_dict(s) for s in default_architecture()],
    "synth": SynthConfig().to_dict(),
}


class UsageError(Exception):
    """Invalid configuration or arguments (exit status 2)."""


@dataclasses.dataclass
class RunConfig:
    seed: int
    bags: int
    train_fraction: float
    threshold: float
    positive_class: Label
    preprocess: PreprocessConfig
    train: TrainConfig
    architecture: list
    synth: SynthConfig

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "bags": self.bags,
            "train_fraction": self.train_fraction,
            "threshold": self.threshold,
            "positive_class": self.positive_class.name.lower(),
            "preprocess": self.preprocess.to_dict(),
            "train": self.train.to_dict(),
            "architecture": [spec_to_dict(s) for s in self.architecture],
            "synth": self.synth.to_dict(),
        }


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if k not in base:
            raise UsageError(f"unknown config key {k!r}")
        if isinstance(base[k], dict) and isinstance(v, dict) and k != "attack_mix":
            out[k] = _merge(base[k], v)
        else:
            out[k] = v
    return out


def resolve_config(args) -> RunConfig:
    raw = json.loads(json.dumps(DEFAULTS))
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            raw = _merge(raw, json.loads(path.read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.bags is not None:
        raw["bags"] = args.bags
    if args.epochs is not None:
        raw["train"]["epochs"] = args.epochs
    if args.positive_class is not None:
        raw["positive_class"] = args.positive_class
    try:
        bags = int(raw["bags"])
        if bags < 1 or bags % 2 == 0:
            raise ValueError(f"bags must be a positive odd integer, got {bags}")
        fraction = float(raw["train_fraction"])
        if not 0.0 < fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        cfg = RunConfig(
            seed=int(raw["seed"]),
            bags=bags,
            train_fraction=fraction,
            threshold=float(raw["threshold"]),
            positive_class=Label.parse(raw["positive_class"]),
            preprocess=PreprocessConfig(**raw["preprocess"]),
            train=TrainConfig(**raw["train"]),
            architecture=[spec_from_dict(d) for d in raw["architecture"]],
            synth=SynthConfig(**raw["synth"]),
        )
    except (TypeError, ValueError, KeyError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None
    return cfg


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _require_file(path, what):
    if path is None:
        raise UsageError(f"--{what} is required")
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} path not found: {p}")
    return p


def _load_and_split(args, cfg: RunConfig):
    ds = load_csv(_require_file(args.data, "data"))
    train_ds, test_ds = stratified_split(ds, cfg.train_fraction, cfg.seed)
    return ds, train_ds, test_ds


def cmd_synth(args, cfg: RunConfig, out: Path) -> None:
    synth_cfg = cfg.synth
    if args.seed is not None:
        synth_cfg = dataclasses.replace(synth_cfg, seed=cfg.seed)
    path = out / "dataset.csv"
    ds = generate_dataset(synth_cfg, path)
    log.info("wrote %d consumers x %d days to %s", len(ds), ds.n_days, path)


def cmd_preprocess(args, cfg: RunConfig, out: Path) -> None:
    ds = load_csv(_require_file(args.data, "data"))
    processed = run_pipeline(ds, cfg.preprocess)
    path = out / "processed.csv"
    write_csv(processed, path, ds.calendar.start_date, ds.n_days)
    log.info("wrote %s", path)


def cmd_train(args, cfg: RunConfig, out: Path) -> None:
    _, train_ds, _ = _load_and_split(args, cfg)
    processed = run_pipeline(train_ds, cfg.preprocess)
    ens = fit(processed, cfg.bags, cfg.architecture, cfg.train, cfg.seed, cfg.threshold)
    model_dir = out / "ensemble"
    ens.save(model_dir)
    report = {
        "version": __version__,
        "config": cfg.to_dict(),
        "data": str(args.data),
        "n_train": len(train_ds),
        "bagging_seed": ens.plan.seed,
        "minority_label": ens.plan.minority_label.name.lower(),
        "bag_sizes": [len(b) for b in ens.plan.bags],
        "models": [
            {"seed": m.seed, "n_params": m.n_params, "history": m.history} for m in ens.models
        ],
    }
    _write_json(out / "run_report.json", report)
    log.info("trained %d models; ensemble saved to %s", ens.n_models, model_dir)


def _load_ensemble(args) -> Ensemble:
    return Ensemble.load(_require_file(args.model, "model"))


def cmd_eval(args, cfg: RunConfig, out: Path) -> None:
    ens = _load_ensemble(args)
    _, _, test_ds = _load_and_split(args, cfg)
    x, y = reshape_3d(run_pipeline(test_ds, cfg.preprocess))
    preds, scores = ens.classify(x)
    report = evaluate(y, [p.label for p in preds], scores, cfg.positive_class)
    (out / "metrics.json").write_text(report.to_json(), encoding="utf-8")
    write_roc_csv(out / "roc.csv", scores, y)
    log.info("AUC %.4f, f1 (%s positive) %.4f", report.auc, cfg.positive_class.name.lower(), report.f1)


def cmd_predict(args, cfg: RunConfig, out: Path) -> None:
    ens = _load_ensemble(args)
    ds = load_csv(_require_file(args.data, "data"))
    processed = run_pipeline(ds, cfg.preprocess)
    x, _ = reshape_3d(processed)
    preds, _ = ens.classify(x)
    path = out / "predictions.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["CONS_NO", "label", "votes_attack", "votes_normal", "score"])
        for s, p in zip(processed, preds):
            w.writerow([s.consumer_id, p.label.name.lower(), p.votes_attack, p.votes_normal, repr(p.score)])
    log.info("wrote %s", path)


COMMANDS = {
    "synth": cmd_synth,
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; keys mirror the run report")
    common.add_argument("--seed", type=int)
    common.add_argument("--bags", type=int, help="number of bags / models (odd)")
    common.add_argument("--epochs", type=int)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--positive-class", choices=["normal", "theft"])
    common.add_argument("--data", help="dataset CSV")
    common.add_argument("--model", help="ensemble directory written by `train`")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="etdcnn", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args, cfg, out)
    except UsageError as exc:
        print(f"etdcnn {args.command}: {exc}", file=sys.stderr)
        return 2
    except (DatasetError, ValueError, FloatingPointError, OSError) as exc:
        origin = type(exc).__module__.split(".")[-1]
        print(f"etdcnn {args.command}: [{origin}] {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
