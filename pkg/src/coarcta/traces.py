"""Digitized Doppler velocity traces: parsing, cleaning, resampling, dataset assembly."""
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from coarcta.domain import CaseId, VesselId, as_case, as_vessel
from coarcta.errors import (
    DegenerateTraceError,
    EmptyDatasetError,
    InsufficientDataError,
    InsufficientPeaksError,
    InvalidStepCountError,
    ParseError,
)

STEP_COUNTS = (200, 350)
DEFAULT_DIASTOLE_FRACTION = 0.05
DATASET_COLUMNS = ("time_s", "velocity_m_per_s", "case", "vessel", "heart_rate_bpm")


@dataclass(frozen=True)
class RawTrace:
    times: np.ndarray
    velocities: np.ndarray
    vessel: VesselId
    case: CaseId
    source: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.velocities, dtype=np.float64)
        if t.shape != v.shape or t.ndim != 1:
            raise InsufficientDataError("times and velocities must be 1-D arrays of equal length")
        if t.size < 2:
            raise InsufficientDataError(f"trace needs at least 2 points, got {t.size}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ParseError("non-finite value in trace")
        if np.any(np.diff(t) <= 0):
            raise ParseError("trace times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "velocities", v)
        object.__setattr__(self, "vessel", as_vessel(self.vessel))
        object.__setattr__(self, "case", as_case(self.case))

    @property
    def duration(self):
        return float(self.times[-1] - self.times[0])

    def __len__(self):
        return self.times.size


@dataclass(frozen=True)
class VelocityTrace:
    """Uniformly sampled single-vessel velocity waveform starting at t = 0."""

    times: np.ndarray
    velocities: np.ndarray
    vessel: VesselId
    case: CaseId
    heart_rate: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.velocities, dtype=np.float64)
        if t.shape != v.shape:
            raise ValueError("times and velocities differ in length")
        if self.heart_rate <= 0:
            raise ValueError("heart_rate must be positive")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "velocities", v)
        object.__setattr__(self, "vessel", as_vessel(self.vessel))
        object.__setattr__(self, "case", as_case(self.case))
        object.__setattr__(self, "heart_rate", float(self.heart_rate))

    @property
    def n(self):
        return self.times.size


def _to_float(cell):
    value = float(cell)
    if not math.isfinite(value):
        raise ValueError(cell)
    return value


def parse_digitizer_csv(content, vessel, case, source=""):
    """Parse two-column ``time,velocity`` digitizer output.

    A single leading header line (both cells non-numeric) is skipped. Rows are
    sorted by time; repeated time stamps keep their first occurrence.
    """
    rows = []
    reader = csv.reader(io.StringIO(content))
    for lineno, row in enumerate(reader, start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells):
            continue
        if len(cells) < 2:
            raise ParseError(f"expected 2 columns, got {len(cells)}", row=lineno)
        try:
            rows.append((_to_float(cells[0]), _to_float(cells[1])))
        except ValueError:
            numeric = []
            for c in cells[:2]:
                try:
                    float(c)
                    numeric.append(True)
                except ValueError:
                    numeric.append(False)
            if lineno == 1 and not any(numeric):
                continue  # header
            raise ParseError(f"non-numeric value in {cells[:2]!r}", row=lineno) from None
    if len(rows) < 2:
        raise InsufficientDataError(f"need at least 2 data rows, got {len(rows)}")
    data = np.array(rows, dtype=np.float64)
    order = np.argsort(data[:, 0], kind="stable")
    data = data[order]
    keep = np.ones(len(data), dtype=bool)
    keep[1:] = data[1:, 0] != data[:-1, 0]
    data = data[keep]
    if len(data) < 2:
        raise InsufficientDataError("fewer than 2 distinct time stamps")
    return RawTrace(data[:, 0], data[:, 1], vessel, case, source)


def clean_trace(raw, diastole_fraction=DEFAULT_DIASTOLE_FRACTION):
    """Zero the time axis, flip away-from-probe traces and clamp diastole.

    Velocities with magnitude below ``diastole_fraction * max|v|`` are set to
    exactly zero; any remaining negative values are clamped to zero.
    """
    if not 0.0 <= diastole_fraction < 1.0:
        raise ValueError("diastole_fraction must lie in [0, 1)")
    v = raw.velocities.copy()
    peak = np.max(np.abs(v))
    if peak == 0.0:
        raise DegenerateTraceError(f"{raw.vessel} trace is identically zero")
    if v.mean() < 0.0:
        v = -v
    v[np.abs(v) < diastole_fraction * peak] = 0.0
    v[v < 0.0] = 0.0
    return RawTrace(raw.times - raw.times[0], v, raw.vessel, raw.case, raw.source)


def estimate_heart_rate(peak_times):
    """Heart rate in beats/minute from successive peak (or R-wave) times in seconds."""
    t = np.asarray(peak_times, dtype=np.float64)
    if t.size < 2:
        raise InsufficientPeaksError(f"need at least 2 peak times, got {t.size}")
    intervals = np.diff(t)
    if np.any(intervals <= 0):
        raise InsufficientPeaksError("peak times must be strictly increasing")
    return 60.0 / float(np.mean(intervals))


def period_from_heart_rate(heart_rate):
    if heart_rate <= 0:
        raise ValueError("heart_rate must be positive")
    return 60.0 / heart_rate


def interpolate_uniform(times, values, n):
    """Piecewise-linear resampling at ``n`` uniform points over ``[times[0], times[-1]]``."""
    times = np.asarray(times, dtype=np.float64)
    grid = np.linspace(times[0], times[-1], n)
    return grid, np.interp(grid, times, np.asarray(values, dtype=np.float64))


def choose_step_count(raw, heart_rate):
    """200 samples for a single cardiac cycle, 350 for longer recordings."""
    period = period_from_heart_rate(heart_rate)
    return 350 if raw.duration > 1.5 * period else 200


def resample_trace(raw, n, heart_rate):
    if n not in STEP_COUNTS:
        raise InvalidStepCountError(f"step count must be one of {STEP_COUNTS}, got {n}")
    if heart_rate <= 0:
        raise ValueError("heart_rate must be positive")
    if raw.duration <= 0:
        raise InsufficientDataError("trace spans no time")
    grid, v = interpolate_uniform(raw.times, raw.velocities, n)
    return VelocityTrace(grid - grid[0], v, raw.vessel, raw.case, heart_rate)


@dataclass(frozen=True)
class Dataset:
    """Flat training table with columns (time, velocity, case, vessel, heart rate)."""

    time: np.ndarray
    velocity: np.ndarray
    case: tuple
    vessel: tuple
    heart_rate: np.ndarray
    columns: tuple = field(default=DATASET_COLUMNS, repr=False)

    def __post_init__(self):
        n = len(self.time)
        if not (len(self.velocity) == len(self.case) == len(self.vessel) == len(self.heart_rate) == n):
            raise ValueError("dataset columns differ in length")
        if n == 0:
            raise EmptyDatasetError("dataset has no rows")
        object.__setattr__(self, "time", np.asarray(self.time, dtype=np.float64))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=np.float64))
        object.__setattr__(self, "heart_rate", np.asarray(self.heart_rate, dtype=np.float64))
        object.__setattr__(self, "case", tuple(as_case(c).value for c in self.case))
        object.__setattr__(self, "vessel", tuple(as_vessel(v).value for v in self.vessel))
        if np.any(self.velocity < 0):
            raise ValueError("dataset velocities must be non-negative")
        if np.any(self.heart_rate <= 0):
            raise ValueError("dataset heart rates must be positive")
        for col in (self.time, self.velocity, self.heart_rate):
            if not np.all(np.isfinite(col)):
                raise ValueError("dataset contains non-finite values")

    def __len__(self):
        return self.time.size

    @property
    def shape(self):
        return (len(self), len(self.columns))

    def take(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.time[indices],
            self.velocity[indices],
            tuple(self.case[i] for i in indices),
            tuple(self.vessel[i] for i in indices),
            self.heart_rate[indices],
        )

    def rows(self):
        for i in range(len(self)):
            yield (self.time[i], self.velocity[i], self.case[i], self.vessel[i], self.heart_rate[i])

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for t, v, c, vessel, hr in self.rows():
            writer.writerow((repr(float(t)), repr(float(v)), c, vessel, repr(float(hr))))
        return buf.getvalue()

    @classmethod
    def from_csv(cls, content):
        reader = csv.reader(io.StringIO(content))
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != DATASET_COLUMNS:
            raise ParseError(f"dataset header must be {','.join(DATASET_COLUMNS)}", row=1)
        t, v, c, vs, hr = [], [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ParseError(f"expected 5 columns, got {len(row)}", row=lineno)
            try:
                t.append(float(row[0]))
                v.append(float(row[1]))
                c.append(as_case(row[2]))
                vs.append(as_vessel(row[3]))
                hr.append(float(row[4]))
            except ValueError as exc:
                raise ParseError(str(exc), row=lineno) from None
        if not t:
            raise EmptyDatasetError("dataset file has no rows")
        return cls(np.array(t), np.array(v), tuple(c), tuple(vs), np.array(hr))


def assemble_dataset(traces):
    traces = list(traces)
    if not traces:
        raise EmptyDatasetError("no traces to assemble")
    return Dataset(
        np.concatenate([tr.times for tr in traces]),
        np.concatenate([tr.velocities for tr in traces]),
        tuple(tr.case for tr in traces for _ in range(tr.n)),
        tuple(tr.vessel for tr in traces for _ in range(tr.n)),
        np.concatenate([np.full(tr.n, tr.heart_rate) for tr in traces]),
    )


def synth_waveform(t, heart_rate, peak_velocity, systole_fraction):
    """Noise-free periodic half-sine systolic pulse, zero in diastole."""
    period = 60.0 / heart_rate
    systole = systole_fraction * period
    phase = np.mod(np.asarray(t, dtype=np.float64), period)
    return np.where(phase < systole, peak_velocity * np.sin(np.pi * phase / systole), 0.0)


def synth_trace(
    heart_rate,
    peak_velocity,
    systole_fraction,
    n_cycles=1,
    vessel=VesselId.ASCENDING_AORTA,
    case=CaseId.PRE_INTERVENTION,
    noise_amplitude=0.0,
    seed=0,
    points_per_cycle=200,
    sign=1.0,
):
    """Synthetic Doppler trace standing in for digitized patient recordings.

    Noise is uniform on ``[-noise_amplitude/2, noise_amplitude/2]`` so two
    samples one period apart differ by at most ``noise_amplitude``. ``sign=-1``
    mimics flow directed away from the probe.
    """
    if heart_rate <= 0 or peak_velocity <= 0:
        raise ValueError("heart_rate and peak_velocity must be positive")
    if not 0.0 < systole_fraction < 1.0:
        raise ValueError("systole_fraction must lie in (0, 1)")
    if n_cycles < 1:
        raise ValueError("n_cycles must be at least 1")
    period = 60.0 / heart_rate
    n_points = int(points_per_cycle * n_cycles) + 1
    t = np.arange(n_points) * (period / points_per_cycle)
    v = synth_waveform(t, heart_rate, peak_velocity, systole_fraction)
    if noise_amplitude > 0:
        rng = np.random.default_rng(seed)
        v = v + rng.uniform(-0.5, 0.5, size=n_points) * noise_amplitude
    return RawTrace(t, sign * v, vessel, case, source=f"synthetic seed={seed}")
