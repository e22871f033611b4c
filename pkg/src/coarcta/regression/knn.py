import numpy as np

from coarcta import kernels
from coarcta.errors import ModelSpecError


class KNeighborsRegressor:
    """Uniform-weight k-NN on Euclidean distance; ties go to the lower training index."""

    def __init__(self, k=5):
        if k < 1:
            raise ModelSpecError("k must be at least 1")
        self.k = int(k)
        self.X_ = None
        self.y_ = None

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        if self.k > X.shape[0]:
            raise ModelSpecError(f"k={self.k} exceeds the {X.shape[0]} training rows")
        self.X_ = X
        self.y_ = np.ascontiguousarray(y, dtype=np.float64)
        return self

    def predict(self, X):
        return kernels.knn_predict(self.X_, self.y_, X, self.k)

    def get_state(self):
        return {"X": self.X_.tolist(), "y": self.y_.tolist()}

    def set_state(self, state):
        self.X_ = np.ascontiguousarray(state["X"], dtype=np.float64).reshape(len(state["y"]), -1)
        self.y_ = np.ascontiguousarray(state["y"], dtype=np.float64)
        return self
