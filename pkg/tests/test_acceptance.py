"""Exit criteria for the package, one test per criterion.

Criteria 7-9 share one desk-scale end-to-end run (2000 consumers x 365 days),
which takes a few minutes on a single CPU core.
"""

import datetime as dt
import time

import numpy as np
import pytest

from etdcnn.dataset import ConsumerSeries, Label, build_calendar, stratified_split
from etdcnn.ensemble import fit
from etdcnn.metrics import ConfusionMatrix, evaluate, f1_from, prf_accuracy, roc_auc
from etdcnn.neuralnet import (
    Conv1D,
    Dense,
    Flatten,
    MaxPool1D,
    Model,
    TrainConfig,
    default_architecture,
    gradient_check,
    reshape_3d,
    train,
)
from etdcnn.preprocess import fill_missing, run_pipeline
from etdcnn.sampler import make_bags
from etdcnn.synth import SynthConfig, generate_dataset

from oracles import brute_force_fill, calendar_table, pair_auc


def test_c1_confusion_table_reproduction(acceptance):
    cm = ConfusionMatrix(tp=11536, fn=140, fp=109, tn=1085, positive_class=Label.NORMAL)
    _, _, f1, acc = prf_accuracy(cm)
    ok = abs(f1 - 0.9893) <= 0.0005 and abs(acc - 0.9807) <= 0.0005
    assert acceptance("C1 confusion-table metrics", ok, f"f1={f1:.5f} accuracy={acc:.5f}")


def test_c2_f1_cross_check(acceptance):
    f1 = f1_from(0.988, 0.990)
    ok = abs(f1 - 0.98899) < 1e-5 and round(f1, 3) == 0.989
    assert acceptance("C2 F1 from P=0.988, R=0.990", ok, f"f1={f1:.6f}")


GRAD_CASES = {
    "conv1d-relu": ([Conv1D(4, 3, "relu"), Flatten(), Dense(1, "sigmoid")], 12),
    "conv1d-sigmoid": ([Conv1D(3, 4, "sigmoid"), Flatten(), Dense(1, "sigmoid")], 12),
    "maxpool1d": ([Conv1D(3, 2, "linear"), MaxPool1D(2), Flatten(), Dense(1, "sigmoid")], 13),
    "dense-relu": ([Flatten(), Dense(8, "relu"), Dense(1, "sigmoid")], 10),
    "dense-sigmoid-head": ([Flatten(), Dense(1, "sigmoid")], 10),
    "default-architecture": (default_architecture(), 14),
}


def test_c3_gradient_suite(acceptance):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = {}
    for name, (specs, length) in GRAD_CASES.items():
        model = Model(specs, length, seed=int(rng.integers(1 << 31)))
        # all-distinct inputs keep max-pool windows off tie points
        x = (rng.permutation(8 * length).reshape(8, length, 1) + rng.uniform(0, 0.5, (8, length, 1))) / (8 * length)
        y = np.r_[np.zeros(4), np.ones(4)]
        worst[name] = gradient_check(model, x, y, h=1e-5)
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) < 1e-4 and elapsed < 30
    detail = ", ".join(f"{k}={v:.1e}" for k, v in worst.items()) + f"; {elapsed:.1f}s"
    assert acceptance("C3 gradient check < 1e-4", ok, detail)


def test_c4_auc_oracle(acceptance):
    rng = np.random.default_rng(4)
    worst = 0.0
    for i in range(100):
        n = int(rng.integers(2, 201))
        levels = (0, 5, 20)[i % 3]
        s = rng.integers(0, levels, n) / levels if levels else rng.normal(size=n)
        y = rng.integers(0, 2, n)
        y[rng.choice(n, 2, replace=False)] = [0, 1]
        worst = max(worst, abs(roc_auc(s, y) - pair_auc(s.tolist(), (y == 1).tolist())))
    assert acceptance("C4 trapezoid AUC == pair-count AUC", worst < 1e-9, f"max diff {worst:.2e}")


def test_c5_imputation_oracle(acceptance):
    rng = np.random.default_rng(5)
    mismatches = sentinel_hits = 0
    for _ in range(100):
        start = dt.date(2014, 1, 1) + dt.timedelta(days=int(rng.integers(0, 365)))
        v = rng.gamma(2.0, 5.0, 730)
        v[rng.random(730) < 0.2] = np.nan
        got = fill_missing(ConsumerSeries("c", 0, v, start), build_calendar(start, 730)).values
        want = brute_force_fill(v.tolist(), calendar_table(start, 730))
        mismatches += int(got.tolist() != want)
        sentinel_hits += int(np.sum(got == -1.0))
    ok = mismatches == 0 and sentinel_hits > 0
    detail = f"{mismatches} mismatching series, {sentinel_hits} sentinel imputations exercised"
    assert acceptance("C5 imputation matches group-scan oracle", ok, detail)


def test_c6_bagging_invariants(acceptance):
    problems = []
    for n, seed in [(1000, 0), (1400, 1), (250, 2), (5000, 3)]:
        rng = np.random.default_rng(seed)
        y = np.zeros(n, dtype=int)
        y[rng.choice(n, round(0.08 * n), replace=False)] = 1
        plan = make_bags(y, 9, seed)
        minority = np.flatnonzero(y == 1)
        m, M = minority.size, n - minority.size
        for bag in plan.bags:
            if bag.majority_indices.size != m or not np.array_equal(bag.minority_indices, minority):
                problems.append(f"n={n}: unbalanced or incomplete bag")
        union = np.unique(np.concatenate([b.majority_indices for b in plan.bags]))
        if union.size != min(M, 9 * m):
            problems.append(f"n={n}: coverage {union.size} != {min(M, 9 * m)}")
        if make_bags(y, 9, seed).bags != plan.bags:
            problems.append(f"n={n}: not deterministic")
    ok = not problems
    assert acceptance("C6 bagging invariants", ok, "; ".join(problems) or "4 label sets, L=9")


E2E_SYNTH = SynthConfig(n_consumers=2000, n_days=365, theft_fraction=0.08, missing_rate=0.05, seed=0)
MASTER_SEED = 0


def desk_scale_run():
    t0 = time.perf_counter()
    ds = generate_dataset(E2E_SYNTH)
    train_ds, test_ds = stratified_split(ds, 0.7, MASTER_SEED)
    train_p, test_p = run_pipeline(train_ds), run_pipeline(test_ds)
    ens = fit(train_p, 9, default_architecture(), TrainConfig(), MASTER_SEED)
    x_test, y_test = reshape_3d(test_p)
    preds, scores = ens.classify(x_test)
    report = evaluate(y_test, [p.label for p in preds], scores)
    return {"ensemble": ens, "report": report, "seconds": time.perf_counter() - t0,
            "train": train_p, "x_test": x_test, "y_test": y_test}


@pytest.fixture(scope="module")
def e2e():
    return desk_scale_run()


def test_c7_end_to_end(acceptance, e2e):
    report = e2e["report"]
    theft_f1 = report.oriented(Label.THEFT).f1
    # baseline: one network on the raw, imbalanced training split, same architecture and budget
    x, y = reshape_3d(e2e["train"])
    single = train(default_architecture(), x, y, TrainConfig(shuffle_seed=MASTER_SEED), seed=MASTER_SEED)
    p = single.predict_proba(e2e["x_test"]).ravel()
    single_report = evaluate(e2e["y_test"], (p > 0.5).astype(int), p)
    single_f1 = single_report.oriented(Label.THEFT).f1
    ok = report.auc >= 0.95 and theft_f1 >= 0.90 and theft_f1 >= single_f1 and e2e["seconds"] <= 600
    detail = (
        f"AUC={report.auc:.4f} theft-F1={theft_f1:.4f} single-DCNN theft-F1={single_f1:.4f} "
        f"ensemble run {e2e['seconds']:.0f}s"
    )
    assert acceptance("C7 desk-scale ensemble run", ok, detail)


def test_c8_training_curves(acceptance, e2e):
    problems = []
    for i, model in enumerate(e2e["ensemble"].models):
        losses = [h["loss"] for h in model.history]
        if not losses[19] < losses[0]:
            problems.append(f"bag {i}: epoch-20 loss {losses[19]:.4f} >= epoch-1 {losses[0]:.4f}")
        jumps = np.diff(losses[24:])
        if jumps.size and jumps.max() > 0.5 * losses[0]:
            problems.append(f"bag {i}: loss rose by {jumps.max():.4f} after epoch 25")
    ok = not problems
    assert acceptance("C8 training-loss behaviour", ok, "; ".join(problems) or "all 9 bags")


def test_c9_determinism(acceptance, e2e, tmp_path):
    again = desk_scale_run()
    e2e["ensemble"].save(tmp_path / "first")
    again["ensemble"].save(tmp_path / "second")
    names = sorted(p.name for p in (tmp_path / "first").iterdir())
    same_files = all(
        (tmp_path / "first" / n).read_bytes() == (tmp_path / "second" / n).read_bytes() for n in names
    )
    same_report = e2e["report"].to_json() == again["report"].to_json()
    ok = same_files and same_report
    assert acceptance("C9 determinism", ok, f"{len(names)} ensemble files identical={same_files}, report identical={same_report}")
