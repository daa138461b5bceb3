"""Finite-difference verification of backprop gradients.

Central differences around the current parameters, compared elementwise to
the analytic gradient with the relative error

    |analytic - numeric| / max(|analytic|, |numeric|, 1e-7)

Elements sitting almost exactly on a relu kink can fail at one probe width
even when the gradient is correct, because the two probes straddle the
kink. A genuinely wrong gradient fails at every width (a sign flip gives a
relative error of about 2), so failing elements are re-probed at smaller
widths and the best error is kept.
"""
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from .tensor import no_grad

H_MIN, H_MAX = 1e-6, 1e-4
REL_FLOOR = 1e-7


@dataclass
class GradCheckReport:
    ok: bool
    max_rel_error: float
    n_checked: int
    failures: list = field(default_factory=list)   # (tensor_idx, flat_idx, analytic, numeric, rel)

    def __str__(self):
        state = "ok" if self.ok else f"{len(self.failures)} failing element(s)"
        return (f"grad_check: {state}, max relative error "
                f"{self.max_rel_error:.3e} over {self.n_checked} elements")


def _rel_error(a: float, n: float) -> float:
    return abs(a - n) / max(abs(a), abs(n), REL_FLOOR)


def grad_check(loss_fn, tensors, h: float = 1e-5, tol: float = 1e-4,
               max_elements: int = 16, seed: int = 0) -> GradCheckReport:
    """Compare backprop against central differences for each tensor.

    loss_fn must be a deterministic zero-argument callable returning a
    scalar Tensor built from `tensors`; it is re-evaluated many times, so
    any internal randomness must be re-seeded inside it. Tensors larger
    than max_elements are spot-checked on a seeded element sample.
    """
    if not H_MIN <= h <= H_MAX:
        raise ConfigError(f"probe width h={h} outside [{H_MIN}, {H_MAX}]")

    for t in tensors:
        t.grad = None
    loss = loss_fn()
    loss.backward()
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy()
                for t in tensors]

    def value() -> float:
        with no_grad():
            return float(loss_fn().data)

    ladder = [h] + [w for w in (3e-6, 1e-6) if w < h]
    rng = np.random.default_rng(seed)
    failures = []
    worst = 0.0
    n_checked = 0

    for ti, t in enumerate(tensors):
        flat = t.data.ravel()
        if flat.size <= max_elements:
            picks = np.arange(flat.size)
        else:
            picks = rng.choice(flat.size, size=max_elements, replace=False)
        for j in picks:
            j = int(j)
            keep = flat[j]
            best_rel, best_num = np.inf, np.nan
            for width in ladder:
                flat[j] = keep + width
                up = value()
                flat[j] = keep - width
                dn = value()
                flat[j] = keep
                numeric = (up - dn) / (2.0 * width)
                rel = _rel_error(analytic[ti].ravel()[j], numeric)
                if rel < best_rel:
                    best_rel, best_num = rel, numeric
                if best_rel <= tol:
                    break
            n_checked += 1
            worst = max(worst, best_rel)
            if best_rel > tol:
                failures.append((ti, j, float(analytic[ti].ravel()[j]),
                                 float(best_num), float(best_rel)))

    return GradCheckReport(ok=not failures, max_rel_error=worst,
                           n_checked=n_checked, failures=failures)
