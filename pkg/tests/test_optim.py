"""Adam against a hand-rolled reference and its documented first step."""
import numpy as np
import pytest

from eegtraj.errors import NonFiniteGradient
from eegtraj.gradkit import Adam, Tensor, adam_step
from eegtraj.gradkit.optim import AdamState


def reference_adam(params, grads, lr=1e-3, b1=0.9, b2=0.999, eps=1e-8):
    """Independent loop over a whole gradient sequence."""
    theta = params.copy()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1 ** t)
        vhat = v / (1 - b2 ** t)
        theta = theta - lr * mhat / (np.sqrt(vhat) + eps)
    return theta


def test_first_step_with_unit_gradient_moves_by_documented_amount():
    p = np.zeros(1)
    adam_step(p, np.ones(1), AdamState(np.zeros(1), np.zeros(1)))
    assert p[0] == pytest.approx(-1e-3 / (1 + 1e-8), abs=1e-18)
    assert p[0] == pytest.approx(-9.9999999e-4, abs=1e-12)


def test_matches_reference_over_many_steps():
    rng = np.random.default_rng(0)
    p0 = rng.standard_normal(12)
    grads = [rng.standard_normal(12) * 10 ** rng.uniform(-3, 2) for _ in range(50)]

    p = p0.copy()
    state = AdamState(np.zeros_like(p), np.zeros_like(p))
    for g in grads:
        adam_step(p, g, state)
    assert np.max(np.abs(p - reference_adam(p0, grads))) < 1e-15


def test_custom_hyperparameters_respected():
    rng = np.random.default_rng(1)
    p0 = rng.standard_normal(5)
    grads = [rng.standard_normal(5) for _ in range(10)]
    p = p0.copy()
    state = AdamState(np.zeros_like(p), np.zeros_like(p))
    for g in grads:
        adam_step(p, g, state, lr=0.01, beta1=0.8, beta2=0.99, eps=1e-6)
    want = reference_adam(p0, grads, lr=0.01, b1=0.8, b2=0.99, eps=1e-6)
    assert np.max(np.abs(p - want)) < 1e-15


def test_non_finite_gradient_raises_and_leaves_state_alone():
    p = np.ones(3)
    state = AdamState(np.zeros(3), np.zeros(3))
    adam_step(p, np.ones(3), state)
    snap = (p.copy(), state.m.copy(), state.v.copy(), state.t)
    bad = np.array([1.0, np.nan, 1.0])
    with pytest.raises(NonFiniteGradient):
        adam_step(p, bad, state)
    assert np.array_equal(p, snap[0])
    assert np.array_equal(state.m, snap[1])
    assert np.array_equal(state.v, snap[2])
    assert state.t == snap[3]
    with pytest.raises(NonFiniteGradient):
        adam_step(p, np.array([np.inf, 0.0, 0.0]), state)


def test_optimizer_wrapper_skips_gradless_params_and_is_deterministic():
    def run():
        rng = np.random.default_rng(2)
        a = Tensor(rng.standard_normal(4), requires_grad=True)
        b = Tensor(rng.standard_normal(4), requires_grad=True)
        opt = Adam([a, b], lr=0.05)
        for step in range(20):
            opt.zero_grad()
            loss = (a * a).sum()          # b never participates
            loss.backward()
            opt.step()
        return a.data.copy(), b.data.copy()

    a1, b1 = run()
    a2, b2 = run()
    assert np.array_equal(a1, a2)
    assert np.array_equal(b1, b2)
    rng = np.random.default_rng(2)
    rng.standard_normal(4)
    assert np.array_equal(b1, rng.standard_normal(4))   # untouched

    # descent actually happened on the live parameter
    assert np.all(np.abs(a1) < np.abs(np.random.default_rng(2).standard_normal(4)))
