import numpy as np


def svr_objective(w, b, X, y, C, epsilon):
    """0.5*|w|^2 + C * mean(max(0, |y - Xw - b| - epsilon))."""
    r = y - (X @ w + b)
    return 0.5 * float(w @ w) + C * float(np.mean(np.maximum(np.abs(r) - epsilon, 0.0)))


class LinearSVR:
    """Linear epsilon-insensitive support vector regression.

    Trained by full-batch subgradient descent on the primal with step size
    ``learning_rate / sqrt(t + 1)``, starting from ``w = 0`` and the median
    target as intercept. The iterate with the lowest objective is kept, so
    training is deterministic.
    """

    def __init__(self, C=1.0, epsilon=0.01, n_iter=1000, learning_rate=0.5):
        self.C = C
        self.epsilon = epsilon
        self.n_iter = n_iter
        self.learning_rate = learning_rate
        self.coef_ = None
        self.intercept_ = None
        self.objective_ = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n, p = X.shape
        w = np.zeros(p)
        b = float(np.median(y))
        best = (svr_objective(w, b, X, y, self.C, self.epsilon), w.copy(), b)
        scale = self.C / n
        for t in range(self.n_iter):
            r = y - (X @ w + b)
            s = np.where(np.abs(r) > self.epsilon, np.sign(r), 0.0)
            grad_w = w - scale * (X.T @ s)
            grad_b = -scale * float(np.sum(s))
            eta = self.learning_rate / np.sqrt(t + 1.0)
            w = w - eta * grad_w
            b = b - eta * grad_b
            obj = svr_objective(w, b, X, y, self.C, self.epsilon)
            if obj < best[0]:
                best = (obj, w.copy(), b)
        self.objective_, self.coef_, self.intercept_ = best[0], best[1], float(best[2])
        return self

    def predict(self, X):
        return np.asarray(X, dtype=np.float64) @ self.coef_ + self.intercept_

    def get_state(self):
        return {"coef": self.coef_.tolist(), "intercept": self.intercept_, "objective": self.objective_}

    def set_state(self, state):
        self.coef_ = np.array(state["coef"], dtype=np.float64)
        self.intercept_ = float(state["intercept"])
        self.objective_ = state.get("objective")
        return self
