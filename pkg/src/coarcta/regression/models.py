"""Model specs, trained artifacts and the raw-row prediction path."""
import json
from dataclasses import dataclass, field, replace

import numpy as np

from coarcta.errors import ModelSpecError, TransformMismatchError
from coarcta.features import FeatureTransform
from coarcta.regression.ensemble import GradientBoostingRegressor, RandomForestRegressor
from coarcta.regression.knn import KNeighborsRegressor
from coarcta.regression.linear import LinearRegression
from coarcta.regression.svr import LinearSVR
from coarcta.regression.trees import DecisionTreeRegressor
from coarcta.traces import STEP_COUNTS, VelocityTrace, period_from_heart_rate

ARTIFACT_FORMAT = "coarcta-model"
ARTIFACT_VERSION = 1

FAMILIES = (
    "linear",
    "knn",
    "decision_tree",
    "random_forest",
    "gradient_boosted",
    "gradient_boosted_leafwise",
    "svr",
    "voting",
)

DEFAULTS = {
    "linear": {},
    "knn": {"k": 5},
    "decision_tree": {"max_depth": None, "min_samples_leaf": 1},
    "random_forest": {"n_trees": 100, "max_depth": None, "max_features": "third", "min_samples_leaf": 1,
                      "bootstrap": True},
    "gradient_boosted": {"n_stages": 100, "learning_rate": 0.1, "max_depth": 3, "min_samples_leaf": 1},
    "gradient_boosted_leafwise": {"n_stages": 100, "learning_rate": 0.1, "max_leaves": 31, "max_depth": None,
                                  "min_samples_leaf": 1},
    "svr": {"C": 1.0, "epsilon": 0.01, "n_iter": 1000, "learning_rate": 0.5},
    "voting": {"members": [{"family": "knn"}, {"family": "random_forest"}]},
}


def _check_int(name, value, minimum, allow_none=False):
    if value is None and allow_none:
        return
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < minimum:
        raise ModelSpecError(f"{name} must be an integer >= {minimum}, got {value!r}")


def _check_params(family, hp):
    if family == "knn":
        _check_int("k", hp["k"], 1)
    if family in ("decision_tree", "random_forest", "gradient_boosted", "gradient_boosted_leafwise"):
        _check_int("max_depth", hp["max_depth"], 1, allow_none=True)
        _check_int("min_samples_leaf", hp["min_samples_leaf"], 1)
    if family == "random_forest":
        _check_int("n_trees", hp["n_trees"], 1)
        mf = hp["max_features"]
        if mf not in ("third", "all", None):
            _check_int("max_features", mf, 1)
    if family in ("gradient_boosted", "gradient_boosted_leafwise"):
        _check_int("n_stages", hp["n_stages"], 0)
        lr = hp["learning_rate"]
        if not (isinstance(lr, (int, float)) and 0.0 < lr <= 1.0):
            raise ModelSpecError(f"learning_rate must lie in (0, 1], got {lr!r}")
    if family == "gradient_boosted_leafwise":
        _check_int("max_leaves", hp["max_leaves"], 2)
    if family == "svr":
        if not hp["epsilon"] >= 0:
            raise ModelSpecError("epsilon must be >= 0")
        if not hp["C"] > 0:
            raise ModelSpecError("C must be > 0")
        _check_int("n_iter", hp["n_iter"], 1)
    if family == "voting":
        members = hp["members"]
        if len(members) < 2:
            raise ModelSpecError("voting needs at least 2 members")


@dataclass(frozen=True)
class ModelSpec:
    family: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ModelSpecError(f"unknown model family {self.family!r}; choose from {FAMILIES}")
        unknown = set(self.hyperparameters) - set(DEFAULTS[self.family])
        if unknown:
            raise ModelSpecError(f"unknown {self.family} hyperparameter(s): {sorted(unknown)}")
        merged = {**DEFAULTS[self.family], **self.hyperparameters}
        _check_params(self.family, merged)
        object.__setattr__(self, "hyperparameters", merged)

    def to_dict(self):
        return {"family": self.family, "hyperparameters": dict(self.hyperparameters), "seed": self.seed}

    @classmethod
    def from_dict(cls, d):
        return cls(d["family"], dict(d.get("hyperparameters", {})), int(d.get("seed", 0)))


def make_estimator(spec):
    hp = spec.hyperparameters
    f = spec.family
    if f == "linear":
        return LinearRegression()
    if f == "knn":
        return KNeighborsRegressor(k=hp["k"])
    if f == "decision_tree":
        return DecisionTreeRegressor(max_depth=hp["max_depth"], min_samples_leaf=hp["min_samples_leaf"])
    if f == "random_forest":
        return RandomForestRegressor(seed=spec.seed, **hp)
    if f == "gradient_boosted":
        return GradientBoostingRegressor(growth="depthwise", **hp)
    if f == "gradient_boosted_leafwise":
        return GradientBoostingRegressor(growth="leafwise", **hp)
    if f == "svr":
        return LinearSVR(**hp)
    raise ModelSpecError(f"{f} has no single estimator")


@dataclass(frozen=True)
class ModelArtifact:
    """A trained regressor together with the transforms it was trained under."""

    name: str
    spec: ModelSpec
    transform: FeatureTransform
    estimator: object = None
    members: tuple = ()
    metrics: dict = field(default_factory=dict)

    def with_metrics(self, **metrics):
        return replace(self, metrics={**self.metrics, **metrics})

    def predict_log(self, X):
        """Model-space prediction for standardized features."""
        if self.spec.family == "voting":
            return self.transform.target(self.predict_velocity(X))
        return self.estimator.predict(X)

    def predict_velocity(self, X):
        """Velocity in m/s for standardized features, clamped at zero."""
        if self.spec.family == "voting":
            acc = np.zeros(np.asarray(X).shape[0])
            for member in self.members:
                acc += member.predict_velocity(X)
            return acc / len(self.members)
        return np.maximum(self.transform.inverse_target(self.estimator.predict(X)), 0.0)


def fit_model(spec, X, y, transform=None, name=None):
    """Train ``spec`` on model-space matrices. Voting specs fit each member spec."""
    if transform is None:
        raise TransformMismatchError("fit_model needs the FeatureTransform the matrices were built with")
    name = name or spec.family
    if spec.family == "voting":
        members = []
        for i, member in enumerate(spec.hyperparameters["members"]):
            mspec = member if isinstance(member, ModelSpec) else ModelSpec.from_dict({"seed": spec.seed, **member})
            members.append(fit_model(mspec, X, y, transform, name=f"{name}_member{i}"))
        return make_voting_ensemble(members, name=name)
    estimator = make_estimator(spec).fit(np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.float64))
    return ModelArtifact(name, spec, transform, estimator)


def make_voting_ensemble(members, name="voting"):
    members = tuple(members)
    if len(members) < 2:
        raise ModelSpecError("voting ensemble needs at least 2 members")
    ref = members[0].transform.to_dict()
    for m in members[1:]:
        if m.transform.to_dict() != ref:
            raise TransformMismatchError(f"member {m.name!r} was trained under different transforms")
    spec = ModelSpec("voting", {"members": [m.spec.to_dict() for m in members]},
                     seed=members[0].spec.seed)
    return ModelArtifact(name, spec, members[0].transform, None, members)


def _as_columns(rows):
    rows = list(rows)
    if not rows:
        return [], [], [], []
    time, vessel, case, hr = zip(*rows)
    return list(time), list(vessel), list(case), list(hr)


def predict(model, rows):
    """Velocities (m/s) for raw ``(time, vessel, case, heart_rate)`` rows."""
    time, vessel, case, hr = _as_columns(rows)
    if not time:
        return np.zeros(0)
    X = model.transform.features(time, vessel, case, hr)
    return model.predict_velocity(X)


def compute_rmse(predictions, truth):
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("rmse of empty arrays")
    return float(np.sqrt(np.mean((p - t) ** 2)))


def predict_velocity_profile(model, vessel, case, heart_rate, n=200):
    """Model velocity over one cardiac cycle at ``heart_rate`` (beats/minute)."""
    if n not in STEP_COUNTS:
        raise ValueError(f"n must be one of {STEP_COUNTS}")
    period = period_from_heart_rate(heart_rate)
    times = np.linspace(0.0, period, n)
    v = predict(model, [(t, vessel, case, heart_rate) for t in times])
    return VelocityTrace(times, v, vessel, case, heart_rate)


# -- serialization ---------------------------------------------------------

def artifact_to_dict(model):
    d = {
        "format": ARTIFACT_FORMAT,
        "version": ARTIFACT_VERSION,
        "name": model.name,
        "spec": model.spec.to_dict(),
        "transform": model.transform.to_dict(),
        "metrics": dict(model.metrics),
    }
    if model.spec.family == "voting":
        d["members"] = [artifact_to_dict(m) for m in model.members]
    else:
        d["state"] = model.estimator.get_state()
    return d


def artifact_from_dict(d):
    if d.get("format") != ARTIFACT_FORMAT or d.get("version") != ARTIFACT_VERSION:
        raise ValueError(f"not a {ARTIFACT_FORMAT} v{ARTIFACT_VERSION} file")
    spec = ModelSpec.from_dict(d["spec"])
    transform = FeatureTransform.from_dict(d["transform"])
    if spec.family == "voting":
        members = tuple(artifact_from_dict(m) for m in d["members"])
        return ModelArtifact(d["name"], spec, transform, None, members, dict(d["metrics"]))
    estimator = make_estimator(spec).set_state(d["state"])
    return ModelArtifact(d["name"], spec, transform, estimator, (), dict(d["metrics"]))


def dumps_artifact(model):
    # float repr round-trips exactly, so reloaded models predict bit-identically
    return json.dumps(artifact_to_dict(model), sort_keys=True, separators=(",", ":")) + "\n"


def loads_artifact(text):
    return artifact_from_dict(json.loads(text))


def save_artifact(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_artifact(model))


def load_artifact(path):
    with open(path, encoding="utf-8") as fh:
        return loads_artifact(fh.read())
