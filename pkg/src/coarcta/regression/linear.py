import numpy as np

from coarcta.errors import SingularDesignError

_RANK_TOL = 1e-10


class LinearRegression:
    """Ordinary least squares with intercept, solved through a QR factorization."""

    def __init__(self):
        self.coef_ = None
        self.intercept_ = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n, p = X.shape
        if n < p + 1:
            raise SingularDesignError(
                f"{n} rows cannot determine {p + 1} coefficients; add rows or use a regularized model"
            )
        A = np.column_stack([np.ones(n), X])
        Q, R = np.linalg.qr(A)
        d = np.abs(np.diag(R))
        if d.min() <= _RANK_TOL * d.max():
            raise SingularDesignError(
                "design matrix is rank deficient (collinear or constant columns); consider ridge regularization"
            )
        beta = np.linalg.solve(R, Q.T @ y)
        self.intercept_ = float(beta[0])
        self.coef_ = beta[1:]
        return self

    def predict(self, X):
        return np.asarray(X, dtype=np.float64) @ self.coef_ + self.intercept_

    def get_state(self):
        return {"coef": self.coef_.tolist(), "intercept": self.intercept_}

    def set_state(self, state):
        self.coef_ = np.array(state["coef"], dtype=np.float64)
        self.intercept_ = float(state["intercept"])
        return self
