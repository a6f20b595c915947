import math

import numpy as np
import pytest

from aircomp.channel import (
    ChannelParams,
    draw_impairments,
    rotate,
    sigma_from_snr,
    superpose,
    symbol_power,
    transmit,
)


def test_symbol_power_examples():
    assert math.isclose(symbol_power(3), 2 / 27)
    assert math.isclose(symbol_power(5), 2 / 25)


def test_sigma_from_snr():
    assert math.isclose(sigma_from_snr(0, 2, 3) ** 2, 2 / 27)
    assert math.isclose(sigma_from_snr(10, 2, 5) ** 2, 2 / 250)
    assert sigma_from_snr(float("inf"), 2, 3) == 0.0
    with pytest.raises(ValueError):
        sigma_from_snr(float("nan"), 2, 3)


def test_noiseless_superposition():
    rng = np.random.default_rng(0)
    a, b = rng.uniform(-0.5, 0.5, (2, 10, 1))
    y = transmit([a, b], ChannelParams(K=2, sigma_w=0.0))
    assert np.array_equal(y, a + b)


def test_noise_variance():
    sigma = 0.3
    x = np.zeros((100_000, 2))
    y = transmit([x], ChannelParams(K=1, sigma_w=sigma, D=2, seed=4))
    var = y.var(axis=0)
    assert np.all(np.abs(var / sigma**2 - 1) < 0.02)
    assert abs(np.mean(y[:, 0] * y[:, 1])) < 0.02 * sigma**2


def test_rotation_quarter_turn():
    x = np.array([[1 / 3, 0.0]])
    y = transmit([x], ChannelParams(K=1, sigma_w=0.0, D=2, theta_max=math.pi), thetas=[math.pi / 2])
    assert np.allclose(y, [[0.0, 1 / 3]], atol=1e-15)
    assert np.allclose(rotate(np.array([1.0, 0.0]), math.pi), [-1.0, 0.0])


def test_phase_draws_bounded():
    p = ChannelParams(K=3, sigma_w=0.1, D=2, theta_max=0.2)
    u, _ = draw_impairments(np.random.default_rng(0), p, 5)
    assert u.shape == (3,) and np.all(np.abs(u) <= 1)
    p2 = ChannelParams(K=3, sigma_w=0.1, D=2, theta_max=0.2, phase_per_symbol=True)
    assert draw_impairments(np.random.default_rng(0), p2, 5)[0].shape == (3, 5)


def test_noise_stream_independent_of_theta():
    x = np.zeros((2, 6, 2))
    y0 = transmit(x, ChannelParams(K=2, sigma_w=0.1, D=2, seed=1))
    y1 = transmit(x, ChannelParams(K=2, sigma_w=0.1, D=2, seed=1, theta_max=0.3))
    # zero symbols are rotation invariant, so only the noise remains
    assert np.array_equal(y0, y1)


def test_superposition_linear():
    rng = np.random.default_rng(2)
    x = rng.uniform(-0.5, 0.5, (3, 4, 8, 2))
    y = superpose(x, None, np.zeros((3, 8, 2)), 0.0)
    assert np.allclose(y, x.sum(axis=1))


def test_same_seed_reproducible():
    x = np.random.default_rng(0).uniform(-0.5, 0.5, (2, 16, 2))
    p = ChannelParams(K=2, sigma_w=0.2, D=2, theta_max=0.3, seed=11)
    assert np.array_equal(transmit(x, p), transmit(x, p))
    q = ChannelParams(K=2, sigma_w=0.2, D=2, theta_max=0.3, seed=12)
    assert not np.array_equal(transmit(x, p), transmit(x, q))


def test_invalid_configurations():
    with pytest.raises(ValueError, match="D=2"):
        ChannelParams(K=2, sigma_w=0.1, theta_max=0.1, D=1)
    with pytest.raises(ValueError, match="unequal"):
        transmit([np.zeros(3), np.zeros(4)], ChannelParams(K=2, sigma_w=0.0))
    with pytest.raises(ValueError):
        ChannelParams(K=0, sigma_w=0.1)
    with pytest.raises(ValueError):
        transmit([np.zeros((3, 1))], ChannelParams(K=1, sigma_w=0.0), thetas=[0.1])
