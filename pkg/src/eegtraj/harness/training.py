"""Minibatch training with early stopping and best-weight restore.

Every epoch reshuffles the pooled rows with an rng derived from
(seed, epoch), and every dropout draw comes from that same stream, so a
(seed, data) pair fully determines the trained weights. Validation loss
is monitored after each epoch; when it fails to improve `patience` epochs
in a row, training stops and the best epoch's parameters and batchnorm
statistics are restored.
"""
from dataclasses import dataclass, field

import numpy as np

from ..decoders import needs_sequence_input, net_predict, rows_to_sequence
from ..errors import DivergedTraining, NonFiniteGradient, ShapeError
from ..gradkit import Adam, Tensor, mse
from ..gradkit.layers import Network


@dataclass
class TrainConfig:
    lr: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0


class EarlyStopper:
    """Stop after `patience` consecutive epochs without improvement."""

    def __init__(self, patience: int):
        if patience < 1:
            raise ShapeError(f"patience must be >= 1, got {patience}")
        self.patience = patience
        self.best = np.inf
        self.best_epoch = 0
        self.streak = 0
        self.epoch = 0

    def update(self, loss: float) -> bool:
        """Record one epoch's validation loss; True means stop now."""
        self.epoch += 1
        if loss < self.best:
            self.best = loss
            self.best_epoch = self.epoch
            self.streak = 0
            return False
        self.streak += 1
        return self.streak >= self.patience


@dataclass
class TrainResult:
    history: list                 # (epoch, train_loss, val_loss)
    best_epoch: int
    stopped_epoch: int
    best_val_loss: float
    config: TrainConfig = field(repr=False, default=None)


def _snapshot(net: Network) -> list:
    return [a.copy() for a in net.state_arrays()]


def _restore(net: Network, snap: list) -> None:
    for a, s in zip(net.state_arrays(), snap):
        np.copyto(a, s)


def train(net: Network, X_train, Y_train, X_val, Y_val,
          config: TrainConfig, lag: int) -> TrainResult:
    """Adam on minibatch MSE; mutates `net` in place and returns the history."""
    X_train = np.asarray(X_train, dtype=np.float64)
    Y_train = np.asarray(Y_train, dtype=np.float64)
    if X_train.shape[0] != Y_train.shape[0] or X_train.shape[0] == 0:
        raise ShapeError(f"bad training shapes {X_train.shape} / {Y_train.shape}")
    sequence = needs_sequence_input(net)
    n_channels = X_train.shape[1] // lag if sequence else 0

    opt = Adam(net.params(), lr=config.lr)
    stopper = EarlyStopper(config.patience)
    best = _snapshot(net)
    history = []
    n = X_train.shape[0]

    for epoch in range(1, config.max_epochs + 1):
        rng = np.random.default_rng([config.seed, epoch])
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            take = perm[start:start + config.batch_size]
            xb = X_train[take]
            if sequence:
                xb = rows_to_sequence(xb, lag, n_channels)
            opt.zero_grad()
            loss = mse(net.forward(Tensor(xb), train=True, rng=rng), Y_train[take])
            if not np.isfinite(loss.data):
                raise DivergedTraining(epoch, f"training loss became {loss.data} "
                                              f"in epoch {epoch}")
            loss.backward()
            try:
                opt.step()
            except NonFiniteGradient as exc:
                raise DivergedTraining(epoch, f"gradient blew up in epoch {epoch}") from exc
            epoch_loss += float(loss.data) * len(take)
        epoch_loss /= n

        val_pred = net_predict(net, X_val, lag)
        val_loss = float(np.mean((val_pred - np.asarray(Y_val)) ** 2))
        if not np.isfinite(val_loss):
            raise DivergedTraining(epoch, f"validation loss became {val_loss} "
                                          f"in epoch {epoch}")
        history.append((epoch, epoch_loss, val_loss))
        improved = val_loss < stopper.best
        stop = stopper.update(val_loss)
        if improved:
            best = _snapshot(net)
        if stop:
            break

    _restore(net, best)
    return TrainResult(history=history, best_epoch=stopper.best_epoch,
                       stopped_epoch=stopper.epoch,
                       best_val_loss=stopper.best, config=config)
