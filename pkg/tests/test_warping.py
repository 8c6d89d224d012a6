import dataclasses

import numpy as np
import pytest
from pytest_check import check

from protowarp.exceptions import (
    LengthMismatch,
    NonFiniteInput,
    NonPositiveRatio,
)
from protowarp.settings import WarpConfig
from protowarp.warping import (
    WarpResult,
    constant_start,
    interpolate,
    loss_and_gradient,
    loss_terms,
    merge_pair,
    warp,
)
from test_infrastructure import make_beat

METHODS = ["lbfgs", "descent"]


def textured_beat(**kwargs):
    return make_beat(texture=0.3, **kwargs)


def test_interpolate_is_exact_on_the_grid():
    g = textured_beat()
    values, _ = interpolate(g, np.arange(g.size, dtype=float))
    assert np.array_equal(values, g)


def test_interpolate_clamps_at_the_edges():
    g = np.array([1.0, 2.0, 4.0])
    values, slope = interpolate(g, np.array([-3.0, 0.5, 1.5, 7.0]))
    assert values.tolist() == [1.0, 1.5, 3.0, 4.0]
    assert slope.tolist() == [0.0, 1.0, 2.0, 0.0]


@pytest.mark.parametrize("seed", range(10))
def test_warp_of_identical_beats_is_the_identity(seed):
    rng = np.random.default_rng(seed)
    f = textured_beat(
        r_amplitude=rng.uniform(0.5, 2.0), t_amplitude=rng.uniform(0.1, 0.5)
    ) + 0.01 * rng.standard_normal(500)

    result = warp(f, f)

    assert result.loss == 0
    assert result.iters == 0
    assert np.all(result.r == 1)
    assert np.all(result.s == 0)


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("texture", [0.0, 0.3])
@pytest.mark.parametrize("alpha", [0.5, 1.5, 2.0])
def test_warp_recovers_amplitude(alpha, texture, method):
    f = make_beat(texture=texture)
    result = warp(f, alpha * f, WarpConfig(method=method))

    with check:
        assert np.mean(result.r) == pytest.approx(alpha, abs=0.05)
    with check:
        assert np.max(np.abs(result.s)) < 2


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("texture", [0.0, 0.3])
@pytest.mark.parametrize("delay", [-15, 10, 20])
def test_warp_recovers_shift(delay, texture, method):
    f = make_beat(texture=texture)
    g = make_beat(texture=texture, delay=delay)

    result = warp(f, g, WarpConfig(method=method))

    with check:
        assert np.mean(result.s) == pytest.approx(delay, abs=1.5)
    with check:
        assert np.mean(result.r) == pytest.approx(1, abs=0.05)


@pytest.mark.parametrize("delay", [-30, 0, 7])
def test_constant_start_finds_ratio_and_shift(delay):
    f = make_beat()
    g = 1.3 * make_beat(delay=delay)

    ratio, shift = constant_start(f, g)

    assert shift == delay
    assert ratio == pytest.approx(1.3, abs=0.02)


def test_constant_start_stays_inside_bounds():
    f = make_beat()
    g = make_beat(delay=60)
    cfg = WarpConfig(s_min=-20.0, s_max=20.0)

    _, shift = constant_start(f, g, cfg)

    assert -20 <= shift <= 20


def test_constant_start_floors_the_ratio():
    ratio, _ = constant_start(make_beat(), -np.ones(500))
    assert ratio == WarpConfig().r_floor


def test_identity_start_when_global_start_is_off():
    cfg = WarpConfig(global_start=False)
    f = textured_beat()
    g = 1.5 * f

    result = warp(f, g, cfg)
    identity_loss, _, _ = loss_and_gradient(
        f, g, np.ones(500), np.zeros(500), cfg
    )

    assert result.history[0] == identity_loss
    assert result.loss < identity_loss


def test_warp_lowers_the_loss():
    f = textured_beat()
    g = textured_beat(r_amplitude=1.6, delay=4)
    result = warp(f, g)
    assert result.loss < result.history[0]
    assert result.iters > 0


def test_gradient_matches_finite_differences():
    cfg = WarpConfig()
    rng = np.random.default_rng(42)
    f = make_beat(length=60, texture=0.3)
    g = make_beat(length=60, texture=0.3, r_amplitude=1.5, delay=2)
    h = 1e-5

    for _ in range(10):
        r = rng.uniform(0.5, 1.5, f.size)
        s = rng.uniform(-5, 5, f.size)
        _, grad_r, grad_s = loss_and_gradient(f, g, r, s, cfg)

        numeric = []
        for values, other, is_r in ((r, s, True), (s, r, False)):
            for i in range(f.size):
                up = values.copy()
                down = values.copy()
                up[i] += h
                down[i] -= h
                if is_r:
                    plus = loss_and_gradient(f, g, up, other, cfg)[0]
                    minus = loss_and_gradient(f, g, down, other, cfg)[0]
                else:
                    plus = loss_and_gradient(f, g, other, up, cfg)[0]
                    minus = loss_and_gradient(f, g, other, down, cfg)[0]
                numeric.append((plus - minus) / (2 * h))

        analytic = np.concatenate([grad_r, grad_s])
        numeric = np.asarray(numeric)
        error = np.linalg.norm(numeric - analytic) / np.linalg.norm(analytic)
        assert error < 1e-4


def test_descent_history_never_increases():
    cfg = WarpConfig(method="descent", max_iters=200)
    f = textured_beat()
    g = textured_beat(r_amplitude=1.4, delay=3)

    result = warp(f, g, cfg)

    history = np.asarray(result.history)
    assert np.all(np.diff(history) <= 0)
    assert result.iters == len(history) - 1
    assert result.loss == history[-1]
    assert np.all(result.r >= cfg.r_floor)


def test_descent_and_lbfgs_agree_on_identity():
    f = textured_beat()
    result = warp(f, f, WarpConfig(method="descent"))
    assert result.loss == 0
    assert result.iters == 0


def test_warp_rejects_non_finite_beats():
    f = textured_beat()
    g = f.copy()
    g[100] = np.nan
    with pytest.raises(NonFiniteInput):
        warp(f, g)


def test_warp_rejects_unequal_lengths():
    with pytest.raises(LengthMismatch):
        warp(textured_beat(), textured_beat(length=400))


def test_loss_terms_are_zero_at_identity():
    f = textured_beat()
    terms = loss_terms(f, f, np.ones(500), np.zeros(500))
    assert terms == (0, 0, 0, 0)


def test_bound_penalty_beyond_shift_limit():
    f = textured_beat()
    terms = loss_terms(f, f, np.ones(500), np.full(500, 150.0))
    assert terms.bound_penalty == pytest.approx(1.25e6)
    assert terms.s_smooth == 0


def test_constant_ratio_is_smooth():
    f = textured_beat()
    terms = loss_terms(f, f, np.full(500, 2.0), np.zeros(500))
    assert terms.r_smooth == 0
    assert terms.misfit == pytest.approx(np.sum(f**2))


def test_loss_terms_sum_to_the_loss(rng):
    cfg = WarpConfig()
    f = textured_beat()
    g = textured_beat(r_amplitude=0.8, delay=-6)
    r = rng.uniform(0.7, 1.3, 500)
    s = rng.uniform(-120, 120, 500)

    terms = loss_terms(f, g, r, s, cfg)
    loss, _, _ = loss_and_gradient(f, g, r, s, cfg)

    assert min(terms) >= 0
    assert terms.total(cfg) == pytest.approx(loss, rel=1e-9)


def test_loss_terms_length_mismatch():
    f = textured_beat()
    with pytest.raises(LengthMismatch):
        loss_terms(f, f, np.ones(499), np.zeros(500))


def identity_result(length=500, r=1.0, s=0.0):
    return WarpResult(
        r=np.full(length, r),
        s=np.full(length, s),
        loss=0.0,
        converged=True,
        iters=0,
    )


def test_merge_of_identical_beats():
    f = textured_beat()
    assert np.allclose(merge_pair(f, f, identity_result()), f, atol=1e-12)


def test_merge_meets_halfway_in_amplitude():
    f = textured_beat()
    merged = merge_pair(f, 4 * f, identity_result(r=4.0))
    assert np.allclose(merged, 2 * f, atol=1e-12)


def test_merge_is_nearly_symmetric():
    f = textured_beat()
    g = textured_beat(r_amplitude=1.5, delay=3)

    forward = merge_pair(f, g, warp(f, g))
    backward = merge_pair(g, f, warp(g, f))

    amplitude = max(f.max(), g.max()) - min(f.min(), g.min())
    rms = np.sqrt(np.mean((forward - backward) ** 2))
    assert rms < 0.05 * amplitude


def test_merge_rejects_non_positive_ratio():
    f = textured_beat()
    result = dataclasses.replace(identity_result(), r=np.r_[np.ones(499), 0.0])
    with pytest.raises(NonPositiveRatio):
        merge_pair(f, f, result)


def test_merge_rejects_mismatched_result():
    f = textured_beat()
    with pytest.raises(LengthMismatch):
        merge_pair(f, f, identity_result(length=400))


def test_warp_result_is_read_only():
    result = identity_result()
    with pytest.raises(ValueError):
        result.r[0] = 2.0
