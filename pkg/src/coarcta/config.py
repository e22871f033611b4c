"""Pipeline configuration (YAML key-value file)."""
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from coarcta.errors import ConfigError
from coarcta.regression.search import DEFAULT_GRIDS

# roster name -> model family; "random_forest" is kept at defaults, the
# "_optimized" entry and the other tunable families are grid searched
ROSTER = {
    "linear": "linear",
    "svr": "svr",
    "gradient_boosted": "gradient_boosted",
    "gradient_boosted_leafwise": "gradient_boosted_leafwise",
    "random_forest": "random_forest",
    "random_forest_optimized": "random_forest",
    "voting": "voting",
    "knn": "knn",
}
TUNED = ("svr", "gradient_boosted", "gradient_boosted_leafwise", "random_forest_optimized", "knn")
VOTING_MEMBERS = ("knn", "random_forest_optimized")

REQUIRED = ("traces_dir", "output_dir")


@dataclass
class PipelineConfig:
    traces_dir: str
    output_dir: str
    geometry: str = None  # path to a geometry file; None -> synthetic placeholder areas
    density: float = 1060.0
    viscosity: float = 0.004
    seed: int = 0
    models: list = field(default_factory=lambda: list(ROSTER))
    grids: dict = field(default_factory=lambda: {k: dict(v) for k, v in DEFAULT_GRIDS.items()})
    diastole_fraction: float = 0.05
    resample_steps: str = "auto"  # "auto", 200 or 350
    eval_heart_rate: float = 135.6
    eval_case: str = "pre_intervention"
    measured_coarct_velocity: float = 3.49
    bc_mode: str = "snapshot"
    bc_models: list = None  # None -> the top_k models by test RMSE
    top_k: int = 5
    profile_steps: int = 200
    synth_noise: float = 0.02

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(name, why):
            raise ConfigError(f"config field '{name}': {why}")

        for name in REQUIRED:
            if not isinstance(getattr(self, name), str) or not getattr(self, name):
                bad(name, "must be a non-empty path")
        for name in ("density", "eval_heart_rate", "measured_coarct_velocity"):
            if not _is_number(getattr(self, name)) or not getattr(self, name) > 0:
                bad(name, "must be a positive number")
        if not _is_number(self.viscosity) or self.viscosity < 0:
            bad("viscosity", "must be a non-negative number")
        if not _is_number(self.diastole_fraction) or not 0 <= self.diastole_fraction < 1:
            bad("diastole_fraction", "must lie in [0, 1)")
        if self.resample_steps not in ("auto", 200, 350):
            bad("resample_steps", "must be 'auto', 200 or 350")
        if self.profile_steps not in (200, 350):
            bad("profile_steps", "must be 200 or 350")
        if self.bc_mode not in ("snapshot", "transient"):
            bad("bc_mode", "must be 'snapshot' or 'transient'")
        if self.eval_case not in ("pre_intervention", "post_intervention"):
            bad("eval_case", "must be pre_intervention or post_intervention")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            bad("seed", "must be an integer")
        if isinstance(self.top_k, bool) or not isinstance(self.top_k, int) or self.top_k < 1:
            bad("top_k", "must be a positive integer")
        if not _is_number(self.synth_noise) or self.synth_noise < 0:
            bad("synth_noise", "must be a non-negative number")
        if not isinstance(self.models, list) or not self.models:
            bad("models", "must be a non-empty list")
        unknown = [m for m in self.models if m not in ROSTER]
        if unknown:
            bad("models", f"unknown model name(s) {unknown}; choose from {list(ROSTER)}")
        if self.bc_models is not None and not isinstance(self.bc_models, list):
            bad("bc_models", "must be a list of model names")
        if not isinstance(self.grids, dict):
            bad("grids", "must map model family to a hyperparameter grid")
        for family, grid in self.grids.items():
            if family not in DEFAULT_GRIDS:
                bad("grids", f"no tunable family {family!r}")
            if not isinstance(grid, dict) or not grid or not all(isinstance(v, list) and v for v in grid.values()):
                bad("grids", f"{family} grid must map names to non-empty value lists")

    @property
    def out(self):
        return Path(self.output_dir)

    def to_dict(self):
        return asdict(self)


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def config_from_dict(data, base_dir=None):
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    known = {f.name for f in fields(PipelineConfig)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown config key '{key}'")
    for key in REQUIRED:
        if key not in data:
            raise ConfigError(f"missing required config key '{key}'")
    data = dict(data)
    if "grids" in data:
        # partial grids override per family
        grids = {k: dict(v) for k, v in DEFAULT_GRIDS.items()}
        if not isinstance(data["grids"], dict):
            raise ConfigError("config field 'grids': must be a mapping")
        grids.update(data["grids"])
        data["grids"] = grids
    if base_dir is not None:
        for key in ("traces_dir", "output_dir", "geometry"):
            value = data.get(key)
            if isinstance(value, str) and not Path(value).is_absolute():
                data[key] = str(Path(base_dir) / value)
    return PipelineConfig(**data)


def load_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML ({exc})") from None
    return config_from_dict(data or {}, base_dir=path.parent)


def dump_config(config, path=None):
    text = yaml.safe_dump(config.to_dict(), sort_keys=False)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
