"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Reference values come either from hand arithmetic carried out in exact
rational arithmetic or from the brute-force oracles in ``oracles.py``.
"""
import csv
import io
import math
import time
import warnings
from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from coarcta.bc import (
    BC_TYPES,
    NOT_ADJUSTED,
    FluidProperties,
    MassFlowProfile,
    VesselGeometry,
    build_bc_sets,
    export_bc,
    parse_bc,
)
from coarcta.config import config_from_dict
from coarcta.domain import BOUNDARY_VESSELS, VesselId
from coarcta.features import split_dataset, standardize, target_log_transform
from coarcta.oracle import coarct_velocity, continuity_residual, percent_error, simplified_bernoulli
from coarcta.pipeline import load_bc_sets
from coarcta.regression import ModelSpec, fit_model, load_artifact, save_artifact
from coarcta.regression.ensemble import GradientBoostingRegressor
from coarcta.traces import estimate_heart_rate, period_from_heart_rate
import oracles


def verdict(capsys, number, title, ok, detail=""):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {number} failed: {detail}"


def random_peaks(rng):
    return {v: float(rng.uniform(0.0, 0.3)) for v in BOUNDARY_VESSELS}


# -- 1 ---------------------------------------------------------------------

def test_heart_rate_period_pairing(capsys):
    start = time.perf_counter()
    period = period_from_heart_rate(135.6)
    peaks = np.arange(6) * period
    hr_back = estimate_heart_rate(peaks)
    elapsed = time.perf_counter() - start
    ok = abs(period - 0.442) <= 0.001 and abs(period - 0.4425) < 5e-5 and abs(hr_back - 135.6) < 1e-9
    verdict(capsys, 1, "135.6 BPM <-> 0.442 s period", ok and elapsed < 1.0,
            f"period {period:.6f} s, back to {hr_back:.6f} BPM")


# -- 2 ---------------------------------------------------------------------

def test_continuity_exact(capsys, pipeline_run):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    residuals = []
    for _ in range(500):
        for s in build_bc_sets(random_peaks(rng), "prop").values():
            residuals.append(continuity_residual(s))
    out, _ = pipeline_run
    generated = load_bc_sets(config_from_dict({"traces_dir": str(out / "traces"), "output_dir": str(out)}))
    residuals += [continuity_residual(s) for s in generated]
    elapsed = time.perf_counter() - start
    worst = max(abs(r) for r in residuals)
    verdict(capsys, 2, "inlet - sum(outlets) == 0 bitwise", worst == 0.0 and elapsed < 1.0,
            f"{len(residuals)} sets incl. {len(generated)} from bcgen, max |residual| {worst!r}")


# -- 3 ---------------------------------------------------------------------

def test_oracle_arithmetic(capsys):
    flow, area, rho = 0.2, 5e-5, 1060.0
    v_exact = Fraction("0.2") / (Fraction(1060) * Fraction("5e-5"))  # 200/53
    dp_exact = 4 * v_exact ** 2
    peaks = {v: 0.0 for v in BOUNDARY_VESSELS}
    peaks[VesselId.DESCENDING_AORTA] = flow
    bc = build_bc_sets(peaks, "hand")["BC3"]
    v = coarct_velocity(bc, VesselGeometry({VesselId.ASCENDING_AORTA: 1e-3}, area), FluidProperties(rho))
    dp = simplified_bernoulli(v)
    rel_v = abs(v - float(v_exact)) / float(v_exact)
    rel_dp = abs(dp - float(dp_exact)) / float(dp_exact)
    ok = rel_v <= 1e-9 and rel_dp <= 1e-9 and round(v, 4) == 3.7736 and round(dp, 2) == 56.96
    verdict(capsys, 3, "v = m/(rho A), dP = 4 v^2", ok, f"v {v:.6f} m/s, dP {dp:.4f} mmHg")


# -- 4 ---------------------------------------------------------------------

def test_percent_error_headline(capsys):
    e = percent_error(3.3197, 3.49)
    verdict(capsys, 4, "percent_error(3.3197, 3.49) = 4.88 +- 0.01", abs(e - 4.88) <= 0.01, f"{e:.4f} %")


# -- 5 ---------------------------------------------------------------------

N_DATASETS = 120


def oracle_cases():
    rng = np.random.default_rng(5)
    for i in range(N_DATASETS):
        p = int(rng.integers(1, 4))
        n = int(rng.integers(p + 2, 11))
        X = rng.normal(size=(n, p))
        if i % 4 == 0:
            X = np.round(X, 1)  # repeated feature values
        y = rng.normal(size=n)
        Q = np.vstack([X, rng.normal(size=(5, p))])
        yield i, X, y, Q


def family_checks(i, X, y, Q, transform):
    """(family, ours, reference) triples for dataset ``i``."""
    n, p = X.shape

    def ours(spec):
        return fit_model(spec, X, y, transform).predict_log(Q)

    k = 1 + i % n
    third = max(1, math.ceil(p / 3))
    yield "linear", ours(ModelSpec("linear")), oracles.normal_equations_oracle(X, y, Q)
    yield "knn", ours(ModelSpec("knn", {"k": k})), oracles.knn_oracle(X, y, Q, k)
    yield ("decision_tree", ours(ModelSpec("decision_tree", {"max_depth": 1})),
           oracles.tree_predict_oracle(oracles.tree_oracle(X, y, list(range(n)), max_depth=1), Q))
    yield ("decision_tree_full", ours(ModelSpec("decision_tree")),
           oracles.tree_predict_oracle(oracles.tree_oracle(X, y, list(range(n))), Q))
    yield ("random_forest", ours(ModelSpec("random_forest", {"n_trees": 8, "max_depth": 1, "max_features": "all"}, 3)),
           oracles.stump_forest_oracle(X, y, Q, 8, 3, p))
    yield ("random_forest_third",
           ours(ModelSpec("random_forest", {"n_trees": 8, "max_depth": 1, "max_features": "third"}, 4)),
           oracles.stump_forest_oracle(X, y, Q, 8, 4, third))
    yield ("gradient_boosted",
           ours(ModelSpec("gradient_boosted", {"n_stages": 10, "learning_rate": 0.1, "max_depth": 1})),
           oracles.stump_boosting_oracle(X, y, Q, 10, 0.1))
    yield ("gradient_boosted_leafwise",
           ours(ModelSpec("gradient_boosted_leafwise", {"n_stages": 10, "learning_rate": 0.1, "max_leaves": 2})),
           oracles.stump_boosting_oracle(X, y, Q, 10, 0.1))
    svr = {"C": 1.0, "epsilon": 0.01, "n_iter": 60, "learning_rate": 0.5}
    yield "svr", ours(ModelSpec("svr", svr)), oracles.svr_oracle(X, y, **svr)(Q)


def test_model_oracle_equivalence(capsys, unit_transform):
    start = time.perf_counter()
    worst = {}
    voting_err = 0.0
    for i, X, y, Q in oracle_cases():
        for family, got, ref in family_checks(i, X, y, Q, unit_transform):
            err = float(np.max(np.abs(got - ref) / np.maximum(1.0, np.abs(ref))))
            worst[family] = max(worst.get(family, 0.0), err)
        vote = fit_model(ModelSpec("voting", {"members": [
            {"family": "knn", "hyperparameters": {"k": 2}},
            {"family": "random_forest", "hyperparameters": {"n_trees": 5}}]}, seed=1), X, y, unit_transform)
        members = np.mean([m.predict_velocity(Q) for m in vote.members], axis=0)
        voting_err = max(voting_err, float(np.max(np.abs(vote.predict_velocity(Q) - members))))
    elapsed = time.perf_counter() - start
    ok = all(e <= 1e-9 for e in worst.values()) and voting_err <= 1e-12 and elapsed < 60.0
    detail = ", ".join(f"{f} {e:.1e}" for f, e in worst.items())
    verdict(capsys, 5, f"{N_DATASETS} datasets, every family matches its oracle", ok,
            f"{detail}; voting {voting_err:.1e}; {elapsed:.1f} s")


# -- 6 ---------------------------------------------------------------------

def test_boosting_monotone(capsys):
    rng = np.random.default_rng(6)
    start = time.perf_counter()
    worst_rise = 0.0
    runs = 0
    for _ in range(20):
        n = int(rng.integers(20, 80))
        X = rng.normal(size=(n, 3))
        y = np.sin(2 * X[:, 0]) + X[:, 1] ** 2 + 0.3 * rng.normal(size=n)
        for lr in (0.05, 0.1):
            for growth in ("depthwise", "leafwise"):
                m = GradientBoostingRegressor(n_stages=60, learning_rate=lr, max_depth=3, growth=growth,
                                              max_leaves=8).fit(X, y)
                worst_rise = max(worst_rise, float(np.max(np.diff(m.train_rmse_))))
                runs += 1
    elapsed = time.perf_counter() - start
    verdict(capsys, 6, "training RMSE non-increasing over stages", worst_rise <= 0.0 and elapsed < 30.0,
            f"{runs} runs, largest stage-to-stage change {worst_rise:.2e}, {elapsed:.1f} s")


# -- 7 ---------------------------------------------------------------------

def test_transform_suite(capsys):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    inv_err = mean_err = std_err = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 500))
        # columns shaped like the model inputs: time, two codes, heart rate
        X = np.column_stack([rng.uniform(0, 1.5, n), rng.integers(0, 6, n), rng.integers(0, 2, n),
                             rng.uniform(60, 200, n)]).astype(float)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            Z, params = standardize(X)
        back, _ = standardize(Z, params, "inverse")
        inv_err = max(inv_err, float(np.max(np.abs(back - X))))
        fitted = ~params.constant
        if fitted.any():
            mean_err = max(mean_err, float(np.max(np.abs(Z[:, fitted].mean(axis=0)))))
            std_err = max(std_err, float(np.max(np.abs(Z[:, fitted].std(axis=0) - 1.0))))
    v = np.linspace(0.0, 10.0, 100001)
    log_err = float(np.max(np.abs(target_log_transform(target_log_transform(v), "inverse") - v)))
    elapsed = time.perf_counter() - start
    ok = inv_err <= 1e-12 and mean_err <= 1e-10 and std_err <= 1e-10 and log_err <= 1e-12 and elapsed < 5.0
    verdict(capsys, 7, "standardize / log transform round trips", ok,
            f"inverse {inv_err:.1e}, mean {mean_err:.1e}, std {std_err:.1e}, log {log_err:.1e}")


# -- 8 ---------------------------------------------------------------------

def test_split_fidelity(capsys, corpus_dataset):
    start = time.perf_counter()
    n = len(corpus_dataset)
    ok = n == 3650
    for seed in range(50):
        s = split_dataset(corpus_dataset, (0.6, 0.2, 0.2), seed=seed)
        parts = [set(s.train.tolist()), set(s.validation.tolist()), set(s.test.tolist())]
        ok &= s.sizes == (2190, 730, 730)
        ok &= not (parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2])
        ok &= parts[0] | parts[1] | parts[2] == set(range(n))
    elapsed = time.perf_counter() - start
    verdict(capsys, 8, "3650 rows -> 2190/730/730, disjoint and exhaustive, 50 seeds", ok and elapsed < 5.0,
            f"{elapsed:.2f} s")


# -- 9 ---------------------------------------------------------------------

# kinds per bc_type, written out independently of the package table
TABLE_1 = {
    "BC1": ("zero_pressure", "zero_pressure"),
    "BC2": ("mass_flow", "zero_pressure"),
    "BC3": ("zero_pressure_target_mass_flow", "zero_pressure_target_mass_flow"),
    "BC4": ("mass_flow", "zero_pressure_target_mass_flow"),
}


def read_csv(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_end_to_end(capsys, pipeline_run):
    out, codes = pipeline_run
    rmse = {r["model"]: float(r["rmse_m_per_s"]) for r in read_csv(out / "evaluation.csv")}
    ordering = (rmse["knn"] < rmse["linear"] and rmse["random_forest"] < rmse["linear"]
                and rmse["random_forest_optimized"] < rmse["linear"])

    top5 = sorted(rmse, key=rmse.get)[:5]
    files_ok = True
    for provenance in top5 + [NOT_ADJUSTED]:
        for bc_type in BC_TYPES:
            path = out / "bc" / f"{provenance}_{bc_type}.bc"
            if not path.is_file():
                files_ok = False
                continue
            bc, _ = parse_bc(path.read_text())
            arch, dao = TABLE_1[bc_type]
            files_ok &= bc.inlet.kind == "mass_flow" and bc.provenance == provenance
            for b in bc.outlets:
                files_ok &= b.kind == (dao if b.vessel == VesselId.DESCENDING_AORTA else arch)
    n_files = len(list((out / "bc").glob("*.bc")))

    deviation = {r["vessel"]: float(r["percent_deviation"]) for r in read_csv(out / "report" / "deviation.csv")}
    dev_ok = len(deviation) >= 4 and all(math.isfinite(p) and p >= 0 for p in deviation.values())

    ok = codes == {"synth": 0, "all": 0} and ordering and files_ok and n_files == 24 and dev_ok
    verdict(capsys, 9, "synthetic end-to-end reproduction", ok,
            f"RMSE knn {rmse['knn']:.4f}, rf {rmse['random_forest']:.4f}, linear {rmse['linear']:.4f}; "
            f"{n_files} BC files; deviation % " + ", ".join(f"{k} {v:.1f}" for k, v in deviation.items()))


# -- 10 --------------------------------------------------------------------

SERIAL_SPECS = [
    ModelSpec("linear"),
    ModelSpec("knn", {"k": 3}),
    ModelSpec("decision_tree", {"max_depth": 5}),
    ModelSpec("random_forest", {"n_trees": 10}, seed=7),
    ModelSpec("gradient_boosted", {"n_stages": 20}),
    ModelSpec("gradient_boosted_leafwise", {"n_stages": 20, "max_leaves": 6}),
    ModelSpec("svr", {"n_iter": 100}),
    ModelSpec("voting", {"members": [{"family": "knn"}, {"family": "random_forest", "hyperparameters": {"n_trees": 5}}]}),
]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 0.5, allow_subnormal=False), min_size=5, max_size=5),
       st.sampled_from(BC_TYPES), st.booleans(), st.integers(2, 30))
def test_bc_file_round_trip(values, bc_type, transient, n_points):
    peaks = dict(zip(BOUNDARY_VESSELS, values))
    bc = build_bc_sets(peaks, "prop")[bc_type]
    profiles = None
    if transient:
        t = np.linspace(0.0, 0.44, n_points)
        profiles = {v: MassFlowProfile(t, np.sin(t * (i + 1)) ** 2 * 0.1, v) for i, v in enumerate(BOUNDARY_VESSELS)}
    text = export_bc(bc, "transient" if transient else "snapshot", profiles)
    back, back_profiles = parse_bc(text)
    assert back == bc
    assert [b.value for b in back.boundaries] == [b.value for b in bc.boundaries]
    if transient:
        for b in bc.boundaries:
            if b.value is not None:
                assert np.array_equal(back_profiles[b.vessel].mass_flow, profiles[b.vessel].mass_flow)
                assert np.array_equal(back_profiles[b.vessel].times, profiles[b.vessel].times)
    else:
        assert back_profiles is None
    assert export_bc(back, "transient" if transient else "snapshot", back_profiles) == text


def test_serialization(capsys, tmp_path, unit_transform, pipeline_run):
    start = time.perf_counter()
    rng = np.random.default_rng(10)
    X = rng.normal(size=(120, 4))
    y = np.log1p(rng.uniform(0.0, 2.0, 120))
    Q = rng.normal(size=(60, 4))
    identical = []
    for spec in SERIAL_SPECS:
        model = fit_model(spec, X, y, unit_transform)
        path = tmp_path / f"{spec.family}.json"
        save_artifact(model, path)
        back = load_artifact(path)
        identical.append(np.array_equal(back.predict_velocity(Q), model.predict_velocity(Q))
                         and np.array_equal(back.predict_log(Q), model.predict_log(Q)))
    # trained pipeline artifacts survive a second save/load unchanged
    out, _ = pipeline_run
    for path in sorted((out / "models").glob("*.json")):
        model = load_artifact(path)
        save_artifact(model, tmp_path / "again.json")
        identical.append((tmp_path / "again.json").read_bytes() == path.read_bytes())

    bc_ok = True
    for bc_type, bc in build_bc_sets(random_peaks(rng), "rt").items():
        for mode in ("snapshot", "transient"):
            t = np.linspace(0, 0.44, 200)
            profiles = {v: MassFlowProfile(t, rng.uniform(0, 0.3, 200), v) for v in BOUNDARY_VESSELS}
            text = export_bc(bc, mode, profiles if mode == "transient" else None)
            back, _ = parse_bc(text)
            bc_ok &= back == bc and export_bc(back, mode, profiles if mode == "transient" else None) == text
    elapsed = time.perf_counter() - start
    verdict(capsys, 10, "artifact and BC file round trips are lossless", all(identical) and bc_ok and elapsed < 10.0,
            f"{len(identical)} artifacts, 8 BC files, {elapsed:.1f} s")
