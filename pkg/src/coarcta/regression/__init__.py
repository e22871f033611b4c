"""From-scratch regressors, training, grid search and velocity-profile prediction."""
from coarcta.regression.models import (
    FAMILIES,
    ModelArtifact,
    ModelSpec,
    compute_rmse,
    fit_model,
    load_artifact,
    make_voting_ensemble,
    predict,
    predict_velocity_profile,
    save_artifact,
)
from coarcta.regression.search import DEFAULT_GRIDS, GridSearchResult, grid_search

__all__ = [
    "DEFAULT_GRIDS",
    "FAMILIES",
    "GridSearchResult",
    "ModelArtifact",
    "ModelSpec",
    "compute_rmse",
    "fit_model",
    "grid_search",
    "load_artifact",
    "make_voting_ensemble",
    "predict",
    "predict_velocity_profile",
    "save_artifact",
]
