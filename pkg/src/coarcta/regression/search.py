import itertools
import time
import warnings
from dataclasses import dataclass

import numpy as np

from coarcta.errors import CoarctaError
from coarcta.regression.models import ModelSpec, compute_rmse, fit_model

DEFAULT_GRIDS = {
    "knn": {"k": list(range(1, 16))},
    "random_forest": {"n_trees": [50, 100, 200], "max_depth": [4, 8, None]},
    "gradient_boosted": {"n_stages": [100, 300], "learning_rate": [0.05, 0.1], "max_depth": [2, 3]},
    "gradient_boosted_leafwise": {"n_stages": [100, 300], "learning_rate": [0.05, 0.1], "max_leaves": [15, 31]},
    "svr": {"C": [0.1, 1.0, 10.0]},
}


@dataclass(frozen=True)
class GridSearchResult:
    best_spec: ModelSpec
    best_rmse: float
    results: tuple  # (hyperparameters, validation rmse or None, seconds) in grid order


def iter_grid(grid):
    """Cartesian product in enumeration order: keys as given, last key varying fastest."""
    keys = list(grid)
    for values in itertools.product(*(grid[k] for k in keys)):
        yield dict(zip(keys, values))


def grid_search(family, grid, train, validation, transform, seed=0, base=None):
    """Exhaustive search minimising validation RMSE in m/s.

    Grid points whose fit fails are skipped with a warning. Ties keep the
    earliest grid point.
    """
    points = list(iter_grid(grid))
    if not points:
        raise ValueError("empty hyperparameter grid")
    best = None
    results = []
    for hp in points:
        t0 = time.perf_counter()
        try:
            spec = ModelSpec(family, {**(base or {}), **hp}, seed)
            model = fit_model(spec, train.X, train.y, transform)
            rmse = compute_rmse(model.predict_velocity(validation.X), validation.velocity)
        except (CoarctaError, np.linalg.LinAlgError) as exc:
            warnings.warn(f"{family} {hp} skipped: {exc}", RuntimeWarning, stacklevel=2)
            results.append((hp, None, time.perf_counter() - t0))
            continue
        results.append((hp, rmse, time.perf_counter() - t0))
        if best is None or rmse < best[1]:
            best = (spec, rmse)
    if best is None:
        raise CoarctaError(f"every {family} grid point failed to fit")
    return GridSearchResult(best[0], best[1], tuple(results))
