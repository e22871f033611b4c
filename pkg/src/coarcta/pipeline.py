"""End-to-end steps behind the CLI commands.

Every step reads its inputs from, and writes its outputs under, the
configured output directory:

    traces/           synthetic digitizer CSVs + manifest.csv     (synth)
    dataset.csv                                                    (ingest)
    models/*.json, grid_search.csv, timings.csv                    (train)
    evaluation.csv                                                 (evaluate)
    bc/*.bc, bc/peak_flows.csv                                     (bcgen)
    oracle.csv                                                     (oracle)
    report/bc_values.csv, deviation.csv, bc_values.svg             (report)
"""
import csv
import io
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from coarcta import bc as bcmod
from coarcta.config import ROSTER, TUNED, VOTING_MEMBERS
from coarcta.corpus import synthetic_corpus, trace_to_csv
from coarcta.domain import BOUNDARY_VESSELS, INLET, OUTLETS, as_case, as_vessel
from coarcta.errors import ConfigError, DataError, ParseError
from coarcta.features import build_matrices, fit_encodings, split_dataset, SplitIndices
from coarcta.oracle import evaluate_bc_set, reports_to_csv
from coarcta.regression.models import (
    ModelSpec,
    compute_rmse,
    fit_model,
    load_artifact,
    make_voting_ensemble,
    predict_velocity_profile,
    save_artifact,
)
from coarcta.regression.search import grid_search
from coarcta.traces import (
    Dataset,
    assemble_dataset,
    choose_step_count,
    clean_trace,
    estimate_heart_rate,
    parse_digitizer_csv,
    period_from_heart_rate,
    resample_trace,
)

log = logging.getLogger(__name__)

MANIFEST = "manifest.csv"
MANIFEST_COLUMNS = ("file", "vessel", "case", "peak_times_s")


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def _read(path, what):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{what} not found at {path}; run the earlier pipeline step first")
    return path.read_text(encoding="utf-8")


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def geometry_for(config):
    if config.geometry is None:
        return bcmod.VesselGeometry.placeholder()
    if not Path(config.geometry).is_file():
        raise ConfigError(f"config field 'geometry': file {config.geometry} not found")
    return bcmod.VesselGeometry.load(config.geometry)


def fluid_for(config):
    return bcmod.FluidProperties(config.density, config.viscosity)


# -- synth / ingest ----------------------------------------------------------

def run_synth(config):
    out = config.out / "traces"
    rows = []
    for label, raw, peaks in synthetic_corpus(seed=config.seed, noise_amplitude=config.synth_noise):
        name = f"{label}.csv"
        _write(out / name, trace_to_csv(raw))
        rows.append((name, raw.vessel.value, raw.case.value, " ".join(repr(float(p)) for p in peaks)))
    return [_write(out / MANIFEST, _csv_text(MANIFEST_COLUMNS, rows))] + [out / r[0] for r in rows]


def read_manifest(traces_dir):
    text = _read(Path(traces_dir) / MANIFEST, "trace manifest")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != MANIFEST_COLUMNS:
        raise ParseError(f"{MANIFEST} header must be {','.join(MANIFEST_COLUMNS)}", row=1)
    entries = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise ParseError(f"{MANIFEST}: expected 4 columns", row=lineno)
        try:
            peaks = [float(x) for x in row[3].split()]
            entries.append((row[0], as_vessel(row[1]), as_case(row[2]), peaks))
        except ValueError as exc:
            raise ParseError(f"{MANIFEST}: {exc}", row=lineno) from None
    return entries


def ingest_traces(config):
    traces = []
    for fname, vessel, case, peaks in read_manifest(config.traces_dir):
        content = _read(Path(config.traces_dir) / fname, f"trace {fname}")
        raw = clean_trace(parse_digitizer_csv(content, vessel, case, source=fname), config.diastole_fraction)
        hr = estimate_heart_rate(peaks)
        n = choose_step_count(raw, hr) if config.resample_steps == "auto" else int(config.resample_steps)
        traces.append(resample_trace(raw, n, hr))
    return traces


def run_ingest(config):
    dataset = assemble_dataset(ingest_traces(config))
    log.info("dataset shape %s", dataset.shape)
    return [_write(config.out / "dataset.csv", dataset.to_csv())]


def load_dataset(config):
    return Dataset.from_csv(_read(config.out / "dataset.csv", "dataset"))


# -- train / evaluate --------------------------------------------------------

@dataclass(frozen=True)
class EvaluationRow:
    model: str
    rmse: float
    hyperparameters: dict
    train_seconds: float = None


def final_split(split):
    """Train+validation merged for the final refit; test unchanged."""
    merged = np.sort(np.concatenate([split.train, split.validation]))
    return SplitIndices(merged, split.validation[:0], split.test, split.seed)


def train_models(dataset, config, models=None):
    """Grid-search, refit on train+validation and score on test.

    Returns ``(artifacts, search_rows, timings)`` with artifacts keyed by roster name.
    """
    names = list(models or config.models)
    split = split_dataset(dataset, seed=config.seed)
    maps = fit_encodings(dataset)
    mats, transform = build_matrices(dataset, split, maps)
    specs, search_rows, timings = {}, [], {}
    need = set(names)
    if "voting" in need:
        need.update(VOTING_MEMBERS)
    for name in [n for n in ROSTER if n in need and n != "voting"]:
        family = ROSTER[name]
        t0 = time.perf_counter()
        if name in TUNED:
            result = grid_search(family, config.grids[family], mats["train"], mats["validation"], transform,
                                 seed=config.seed)
            specs[name] = result.best_spec
            for hp, rmse, _ in result.results:
                search_rows.append((name, json.dumps(hp, sort_keys=True), "" if rmse is None else repr(rmse)))
        else:
            specs[name] = ModelSpec(family, {}, config.seed)
        timings[name] = time.perf_counter() - t0

    final_mats, final_transform = build_matrices(dataset, final_split(split), maps)
    train, test = final_mats["train"], final_mats["test"]
    artifacts = {}
    for name, spec in specs.items():
        t0 = time.perf_counter()
        model = fit_model(spec, train.X, train.y, final_transform, name=name)
        timings[name] = timings.get(name, 0.0) + time.perf_counter() - t0
        artifacts[name] = model
    if "voting" in names:
        artifacts["voting"] = make_voting_ensemble([artifacts[m] for m in VOTING_MEMBERS], name="voting")
    artifacts = {n: artifacts[n] for n in names}
    for name, model in artifacts.items():
        rmse = compute_rmse(model.predict_velocity(test.X), test.velocity)
        artifacts[name] = model.with_metrics(test_rmse_m_per_s=rmse, split_seed=config.seed,
                                             n_train=len(train), n_test=len(test))
    return artifacts, search_rows, timings


def run_train(config, models=None):
    dataset = load_dataset(config)
    artifacts, search_rows, timings = train_models(dataset, config, models)
    paths = []
    for name, model in artifacts.items():
        path = config.out / "models" / f"{name}.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        save_artifact(model, path)
        paths.append(path)
    paths.append(_write(config.out / "grid_search.csv",
                        _csv_text(("model", "hyperparameters", "validation_rmse_m_per_s"), search_rows)))
    # wall-clock times are the only non-deterministic output
    paths.append(_write(config.out / "timings.csv",
                        _csv_text(("model", "train_seconds"), [(k, f"{v:.3f}") for k, v in timings.items()])))
    return paths


def load_models(config, names=None):
    model_dir = config.out / "models"
    if not model_dir.is_dir():
        raise DataError(f"no trained models in {model_dir}; run 'train' first")
    available = sorted(p.stem for p in model_dir.glob("*.json"))
    names = names or available
    missing = [n for n in names if n not in available]
    if missing:
        raise DataError(f"models not trained: {missing}")
    return {n: load_artifact(model_dir / f"{n}.json") for n in names}


def evaluate_models(dataset, models, seed):
    split = split_dataset(dataset, seed=seed)
    test = dataset.take(split.test)
    rows = []
    for name, model in models.items():
        X = model.transform.dataset_features(test)
        rmse = compute_rmse(model.predict_velocity(X), test.velocity)
        rows.append(EvaluationRow(name, rmse, model.spec.to_dict()["hyperparameters"]))
    # worst first, as in the usual results table
    rows.sort(key=lambda r: (-r.rmse, r.model))
    return rows


def evaluation_to_csv(rows):
    return _csv_text(("model", "rmse_m_per_s", "hyperparameters"),
                     [(r.model, repr(r.rmse), json.dumps(r.hyperparameters, sort_keys=True)) for r in rows])


def read_evaluation(config):
    text = _read(config.out / "evaluation.csv", "evaluation table")
    reader = csv.DictReader(io.StringIO(text))
    return [(row["model"], float(row["rmse_m_per_s"])) for row in reader]


def run_evaluate(config, models=None):
    rows = evaluate_models(load_dataset(config), load_models(config, models), config.seed)
    return [_write(config.out / "evaluation.csv", evaluation_to_csv(rows))]


# -- boundary conditions -----------------------------------------------------

def select_bc_models(config, override=None):
    if override:
        return list(override)
    if config.bc_models:
        return list(config.bc_models)
    ranked = sorted(read_evaluation(config), key=lambda r: (r[1], r[0]))
    return [name for name, _ in ranked[:config.top_k]]


def model_profiles(model, config, geometry, fluid):
    """Mass-flow profiles of the five boundary vessels at the evaluation heart rate."""
    out = {}
    for vessel in BOUNDARY_VESSELS:
        trace = predict_velocity_profile(model, vessel, config.eval_case, config.eval_heart_rate,
                                         config.profile_steps)
        out[vessel] = bcmod.velocity_to_massflow(trace, geometry, fluid)
    return out


def measured_profiles(dataset, config, geometry, fluid):
    """Not-adjusted baseline from the measured traces of the evaluation case.

    Snapshot values are each vessel's measured peak flow at its own heart
    rate. Transient profiles take each vessel's first measured cycle and
    stretch it onto the evaluation period.
    """
    case = as_case(config.eval_case).value
    period = period_from_heart_rate(config.eval_heart_rate)
    grid = np.linspace(0.0, period, config.profile_steps)
    peaks, profiles = {}, {}
    vessels = np.array(dataset.vessel)
    cases = np.array(dataset.case)
    for vessel in BOUNDARY_VESSELS:
        mask = (vessels == vessel.value) & (cases == case)
        if not mask.any():
            raise DataError(f"no measured {case} trace for {vessel}; cannot build the not-adjusted baseline")
        area = geometry.area(vessel)
        peaks[vessel] = fluid.density * area * float(dataset.velocity[mask].max())
        hr = dataset.heart_rate[mask]
        first = mask & (dataset.heart_rate == hr.min())
        t, v = dataset.time[first], dataset.velocity[first]
        cycle = t <= period_from_heart_rate(hr.min())
        scaled_t = t[cycle] * (hr.min() / config.eval_heart_rate)
        profiles[vessel] = bcmod.MassFlowProfile(grid, fluid.density * area * np.interp(grid, scaled_t, v[cycle]),
                                                 vessel)
    return peaks, profiles


def bc_sets_from_profiles(profiles, provenance):
    snap = bcmod.peak_snapshot(profiles[INLET], [profiles[v] for v in BOUNDARY_VESSELS])
    return snap, bcmod.build_bc_sets(snap.values, provenance)


def transient_profiles(profiles):
    outlets = {v: profiles[v] for v in OUTLETS}
    return {INLET: bcmod.continuity_profile(outlets), **outlets}


def run_bcgen(config, models=None, mode=None):
    mode = mode or config.bc_mode
    geometry, fluid = geometry_for(config), fluid_for(config)
    names = select_bc_models(config, models)
    loaded = load_models(config, names)
    out = config.out / "bc"
    paths, peak_rows = [], []

    def emit(provenance, sets, t_peak, profiles):
        for bc_type, s in sets.items():
            text = bcmod.export_bc(s, mode, transient_profiles(profiles) if mode == "transient" else None)
            paths.append(_write(out / bcmod.bc_filename(provenance, bc_type), text))
        for vessel in BOUNDARY_VESSELS:
            peak_rows.append((provenance, vessel.value, repr(sets["BC1"].reference_flows[vessel]),
                              "" if t_peak is None else repr(t_peak)))

    for name in names:
        profiles = model_profiles(loaded[name], config, geometry, fluid)
        snap, sets = bc_sets_from_profiles(profiles, name)
        emit(name, sets, snap.t_peak, profiles)
    peaks, profiles = measured_profiles(load_dataset(config), config, geometry, fluid)
    emit(bcmod.NOT_ADJUSTED, bcmod.build_bc_sets(peaks, bcmod.NOT_ADJUSTED), None, profiles)
    paths.append(_write(out / "peak_flows.csv",
                        _csv_text(("provenance", "vessel", "kg_per_s", "t_peak_s"), peak_rows)))
    return paths


def load_bc_sets(config):
    """All exported BC sets, with reference peak flows re-attached."""
    bc_dir = config.out / "bc"
    refs = {}
    reader = csv.DictReader(io.StringIO(_read(bc_dir / "peak_flows.csv", "peak flow table")))
    for row in reader:
        refs.setdefault(row["provenance"], {})[as_vessel(row["vessel"])] = float(row["kg_per_s"])
    sets = []
    for path in sorted(bc_dir.glob("*.bc")):
        s, _ = bcmod.parse_bc(path.read_text(encoding="utf-8"))
        sets.append(bcmod.BoundaryConditionSet(s.bc_type, s.inlet, s.outlets, s.provenance,
                                               refs.get(s.provenance)))
    if not sets:
        raise DataError(f"no BC files in {bc_dir}; run 'bcgen' first")
    return sets


def run_oracle(config):
    geometry, fluid = geometry_for(config), fluid_for(config)
    reports = [evaluate_bc_set(s, geometry, fluid, config.measured_coarct_velocity) for s in load_bc_sets(config)]
    return [_write(config.out / "oracle.csv", reports_to_csv(reports))]


def run_report(config):
    from coarcta.report import bar_chart_svg

    sets = [s for s in load_bc_sets(config) if s.bc_type == "BC3"]
    ml_sets = [s for s in sets if s.provenance != bcmod.NOT_ADJUSTED]
    stats = bcmod.bc_deviation_stats(ml_sets)
    values = [(s.provenance, v.value, repr(val)) for s in sets for v, val in s.numeric_values().items()]
    out = config.out / "report"
    return [
        _write(out / "bc_values.csv", _csv_text(("provenance", "vessel", "kg_per_s"), values)),
        _write(out / "deviation.csv", _csv_text(("vessel", "percent_deviation"),
                                                [(v.value, repr(p)) for v, p in stats.items()])),
        _write(out / "bc_values.svg", bar_chart_svg(sets)),
    ]


COMMANDS = ("synth", "ingest", "train", "evaluate", "bcgen", "oracle", "report")
