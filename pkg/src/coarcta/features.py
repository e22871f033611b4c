"""Categorical encoding, standardization, target transform and data splitting."""
import warnings
from dataclasses import dataclass

import numpy as np

from coarcta.domain import as_case, as_vessel
from coarcta.errors import DomainError, EncodingError, SplitError, TransformMismatchError

FEATURE_NAMES = ("time_s", "vessel", "case", "heart_rate_bpm")
DEFAULT_RATIOS = (0.6, 0.2, 0.2)
TRANSFORM_VERSION = 1


@dataclass(frozen=True)
class EncodingMap:
    column: str
    categories: tuple

    @property
    def codes(self):
        return {name: i for i, name in enumerate(self.categories)}

    def encode(self, values):
        lookup = self.codes
        out = np.empty(len(values), dtype=np.int64)
        for i, value in enumerate(values):
            key = str(value)
            if key not in lookup:
                raise EncodingError(f"unseen {self.column} category {key!r}")
            out[i] = lookup[key]
        return out

    def to_dict(self):
        return {"column": self.column, "categories": list(self.categories)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["column"], tuple(d["categories"]))


def label_encode(values, column):
    """Integer codes by lexicographic order of the distinct names."""
    values = [str(v) for v in values]
    if not values:
        raise ValueError("label_encode needs at least one value")
    mapping = EncodingMap(column, tuple(sorted(set(values))))
    return mapping.encode(values), mapping


@dataclass(frozen=True)
class ScalerParams:
    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray  # bool mask of pass-through columns

    def to_dict(self):
        return {
            "mean": [float(x) for x in self.mean],
            "std": [float(x) for x in self.std],
            "constant": [bool(x) for x in self.constant],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.array(d["mean"], dtype=np.float64),
            np.array(d["std"], dtype=np.float64),
            np.array(d["constant"], dtype=bool),
        )

    def __eq__(self, other):
        if not isinstance(other, ScalerParams):
            return NotImplemented
        return (
            np.array_equal(self.mean, other.mean)
            and np.array_equal(self.std, other.std)
            and np.array_equal(self.constant, other.constant)
        )

    __hash__ = None


def standardize(matrix, params=None, mode="fit_apply"):
    """Column-wise z-scoring with population standard deviation.

    ``mode`` is ``"fit_apply"``, ``"apply"`` or ``"inverse"``. Zero-variance
    columns found during fitting pass through unchanged and are flagged in
    the returned params.
    """
    x = np.asarray(matrix, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    if mode == "fit_apply":
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        constant = ~(std > 0)
        if constant.any():
            warnings.warn(
                f"zero-variance column(s) {np.flatnonzero(constant).tolist()} passed through unscaled",
                RuntimeWarning,
                stacklevel=2,
            )
        mean = np.where(constant, 0.0, mean)
        std = np.where(constant, 1.0, std)
        params = ScalerParams(mean, std, constant)
    elif mode in ("apply", "inverse"):
        if params is None:
            raise ValueError(f"mode {mode!r} requires fitted params")
    else:
        raise ValueError(f"unknown standardize mode {mode!r}")
    if mode == "inverse":
        out = x * params.std + params.mean
    else:
        out = (x - params.mean) / params.std
    if squeeze:
        out = out[:, 0]
    return out, params


def target_log_transform(velocities, direction="forward"):
    v = np.asarray(velocities, dtype=np.float64)
    if direction == "forward":
        if np.any(v <= -1.0):
            raise DomainError("log1p transform undefined for values <= -1")
        return np.log1p(v)
    if direction == "inverse":
        return np.expm1(v)
    raise ValueError(f"unknown direction {direction!r}")


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    seed: int

    @property
    def sizes(self):
        return (self.train.size, self.validation.size, self.test.size)


def split_dataset(dataset, ratios=DEFAULT_RATIOS, seed=0):
    """Seeded random partition into train / validation / test index sets."""
    n = len(dataset)
    if n < 3:
        raise SplitError(f"need at least 3 rows to split, got {n}")
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f"ratios must be three positive fractions summing to 1, got {ratios}")
    n_val = max(1, int(round(ratios[1] * n)))
    n_test = max(1, int(round(ratios[2] * n)))
    n_train = n - n_val - n_test
    if n_train < 1:
        raise SplitError(f"{n} rows too few for ratios {ratios}")
    perm = np.random.default_rng(seed).permutation(n)
    return SplitIndices(
        np.sort(perm[:n_train]),
        np.sort(perm[n_train:n_train + n_val]),
        np.sort(perm[n_train + n_val:]),
        int(seed),
    )


def _names(parse, values, column):
    out = []
    for v in values:
        try:
            out.append(parse(v).value)
        except ValueError:
            raise EncodingError(f"unseen {column} category {v!r}") from None
    return out


@dataclass(frozen=True)
class FeatureTransform:
    """Everything needed to map raw rows into model space and back."""

    vessel_map: EncodingMap
    case_map: EncodingMap
    scaler: ScalerParams
    log_target: bool = True

    def raw_features(self, time, vessel, case, heart_rate):
        return np.column_stack([
            np.asarray(time, dtype=np.float64),
            self.vessel_map.encode(_names(as_vessel, vessel, "vessel")).astype(np.float64),
            self.case_map.encode(_names(as_case, case, "case")).astype(np.float64),
            np.asarray(heart_rate, dtype=np.float64),
        ])

    def features(self, time, vessel, case, heart_rate):
        x, _ = standardize(self.raw_features(time, vessel, case, heart_rate), self.scaler, "apply")
        return x

    def dataset_features(self, dataset):
        return self.features(dataset.time, dataset.vessel, dataset.case, dataset.heart_rate)

    def target(self, velocities):
        v = np.asarray(velocities, dtype=np.float64)
        return target_log_transform(v) if self.log_target else v

    def inverse_target(self, values):
        u = np.asarray(values, dtype=np.float64)
        return target_log_transform(u, "inverse") if self.log_target else u

    def to_dict(self):
        return {
            "version": TRANSFORM_VERSION,
            "feature_names": list(FEATURE_NAMES),
            "vessel_map": self.vessel_map.to_dict(),
            "case_map": self.case_map.to_dict(),
            "scaler": self.scaler.to_dict(),
            "log_target": self.log_target,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("version") != TRANSFORM_VERSION:
            raise TransformMismatchError(f"unsupported transform version {d.get('version')!r}")
        return cls(
            EncodingMap.from_dict(d["vessel_map"]),
            EncodingMap.from_dict(d["case_map"]),
            ScalerParams.from_dict(d["scaler"]),
            bool(d["log_target"]),
        )


@dataclass(frozen=True)
class FeatureMatrix:
    X: np.ndarray
    y: np.ndarray
    velocity: np.ndarray  # untransformed targets, m/s
    rows: np.ndarray  # source dataset row indices

    def __len__(self):
        return self.X.shape[0]


def fit_encodings(dataset):
    _, vessel_map = label_encode(dataset.vessel, "vessel")
    _, case_map = label_encode(dataset.case, "case")
    return vessel_map, case_map


def build_matrices(dataset, split, maps=None, scaler=None, log_target=True):
    """Per-split model matrices plus the fitted transform.

    The scaler is fitted on the training rows only unless one is passed in.
    Returns ``({"train": FeatureMatrix, "validation": ..., "test": ...}, FeatureTransform)``.
    """
    if maps is None:
        maps = fit_encodings(dataset)
    vessel_map, case_map = maps
    probe = FeatureTransform(vessel_map, case_map, ScalerParams(np.zeros(4), np.ones(4), np.zeros(4, bool)), log_target)
    raw = probe.raw_features(dataset.time, dataset.vessel, dataset.case, dataset.heart_rate)
    if scaler is None:
        _, scaler = standardize(raw[split.train], mode="fit_apply")
    transform = FeatureTransform(vessel_map, case_map, scaler, log_target)
    X_all, _ = standardize(raw, scaler, "apply")
    y_all = transform.target(dataset.velocity)
    out = {}
    for name in ("train", "validation", "test"):
        idx = np.asarray(getattr(split, name), dtype=np.int64)
        out[name] = FeatureMatrix(X_all[idx], y_all[idx], dataset.velocity[idx], idx)
    return out, transform
