"""Decoders mapping lag-embedded EEG rows to 3-D positions.

Two families: multivariable linear regression solved in closed form, and
neural networks (a dense stack and a convolutional-recurrent stack) built
on the gradkit layers. Design-matrix rows feed the dense stack directly;
the recurrent stack first unfolds each row back into its [lag, channels]
window with time ascending.
"""
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular

from .errors import CorruptModel, SequenceTooShort, ShapeError, SingularSystem
from .gradkit import BatchNorm, Conv1d, Dense, Dropout, Lstm, MaxPool1d, Network
from .gradkit.tensor import Tensor, no_grad

MLR_FORMAT = "mlr-model"


@dataclass
class MlrModel:
    """Per-axis linear regression with an unpenalized intercept."""
    weights: np.ndarray          # [features, axes]
    intercept: np.ndarray        # [axes]
    ridge: float = 0.0

    @staticmethod
    def fit(X: np.ndarray, Y: np.ndarray, ridge: float = 0.0) -> "MlrModel":
        """Normal equations via Cholesky; the intercept column is never shrunk."""
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
            raise ShapeError(f"incompatible design {X.shape} and targets {Y.shape}")
        if ridge < 0:
            raise ShapeError(f"ridge strength must be >= 0, got {ridge}")
        T, F = X.shape
        A = np.hstack([X, np.ones((T, 1))])
        G = A.T @ A
        if ridge:
            G[np.arange(F), np.arange(F)] += ridge
        rhs = A.T @ Y
        try:
            L = np.linalg.cholesky(G)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(
                "normal equations are singular; collinear features need ridge > 0"
            ) from exc
        z = solve_triangular(L, rhs, lower=True)
        W = solve_triangular(L.T, z, lower=False)
        return MlrModel(weights=W[:-1], intercept=W[-1], ridge=float(ridge))

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.weights.shape[0]:
            raise ShapeError(
                f"model expects {self.weights.shape[0]} features, got {X.shape}")
        return X @ self.weights + self.intercept

    def to_json(self) -> str:
        payload = {
            "format": MLR_FORMAT,
            "version": 1,
            "ridge": self.ridge,
            "weights": self.weights.tolist(),
            "intercept": self.intercept.tolist(),
        }
        return json.dumps(payload, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "MlrModel":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorruptModel(f"not valid JSON: {exc}") from exc
        if not isinstance(payload, dict) or payload.get("format") != MLR_FORMAT:
            raise CorruptModel("not a linear decoder file")
        try:
            weights = np.asarray(payload["weights"], dtype=np.float64)
            intercept = np.asarray(payload["intercept"], dtype=np.float64)
            ridge = float(payload["ridge"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptModel(f"malformed linear decoder payload: {exc}") from exc
        if weights.ndim != 2 or intercept.shape != (weights.shape[1],):
            raise CorruptModel("weight/intercept shapes are inconsistent")
        return MlrModel(weights=weights, intercept=intercept, ridge=ridge)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @staticmethod
    def load(path) -> "MlrModel":
        p = Path(path)
        if not p.is_file():
            raise CorruptModel(f"model file {p} not found")
        return MlrModel.from_json(p.read_text())


# --------------------------------------------------------------------------
# neural decoders
# --------------------------------------------------------------------------

NETWORK_KINDS = ("mlp", "cnnlstm")
MIN_SEQUENCE_LAG = 15     # two pooling stages (5 then 3) need at least 15 steps


def build_decoder(kind: str, lag: int, n_channels: int, seed: int) -> Network:
    """Fresh decoder network with seeded initialization."""
    if lag < 1 or n_channels < 1:
        raise ShapeError(f"lag {lag} and channels {n_channels} must be positive")
    rng = np.random.default_rng(seed)
    if kind == "mlp":
        features = lag * n_channels
        return Network([
            BatchNorm(features),
            Dense(features, 128, activation="relu", rng=rng),
            Dense(128, 128, activation="relu", rng=rng),
            Dense(128, 128, activation="relu", rng=rng),
            Dense(128, 16, activation="relu", rng=rng),
            Dense(16, 3, activation="linear", rng=rng),
        ])
    if kind == "cnnlstm":
        if lag < MIN_SEQUENCE_LAG:
            raise SequenceTooShort(
                f"convolutional-recurrent decoder needs lag >= {MIN_SEQUENCE_LAG}, got {lag}")
        return Network([
            BatchNorm(n_channels),
            Conv1d(n_channels, 256, 7, activation="relu", rng=rng),
            MaxPool1d(5),
            Conv1d(256, 128, 5, activation="relu", rng=rng),
            MaxPool1d(3),
            Dropout(0.25),
            Lstm(128, 128, activation="relu", rng=rng),
            Dense(128, 128, activation="relu", rng=rng),
            Dense(128, 3, activation="linear", rng=rng),
        ])
    raise ShapeError(f"unknown decoder kind {kind!r}; pick one of {NETWORK_KINDS}")


def needs_sequence_input(net: Network) -> bool:
    return any(s["kind"] in ("conv1d", "lstm") for s in net.specs())


def rows_to_sequence(X: np.ndarray, lag: int, n_channels: int) -> np.ndarray:
    """Unfold design rows into [batch, lag, channels], oldest sample first."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != lag * n_channels:
        raise ShapeError(
            f"rows of width {lag}*{n_channels} expected, got {X.shape}")
    seq = X.reshape(X.shape[0], n_channels, lag)[:, :, ::-1].transpose(0, 2, 1)
    return np.ascontiguousarray(seq)


def net_predict(net: Network, X: np.ndarray, lag: int,
                batch_size: int = 4096) -> np.ndarray:
    """Evaluation-mode forward over row batches; returns [rows, 3]."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"expected a row matrix, got shape {X.shape}")
    sequence = needs_sequence_input(net)
    if sequence:
        if X.shape[1] % lag:
            raise ShapeError(f"row width {X.shape[1]} is not a multiple of lag {lag}")
        n_channels = X.shape[1] // lag
    outs = []
    with no_grad():
        for start in range(0, X.shape[0], batch_size):
            chunk = X[start:start + batch_size]
            if sequence:
                chunk = rows_to_sequence(chunk, lag, n_channels)
            outs.append(net.forward(Tensor(chunk), train=False).data)
    return np.concatenate(outs, axis=0)
