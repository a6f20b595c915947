"""Pre-compensated multiple-access channel.

Channel gains are assumed perfectly inverted at every transmitter, so the
only impairments are a residual phase rotation per transmitter (D=2 only)
and additive white Gaussian noise at the receiver.

SNR convention: ``snr = P_sym / sigma_w^2`` where ``P_sym`` is the average
per-dimension power of a single transmitter's lattice symbol under uniformly
distributed symbols, and ``sigma_w^2`` is the noise variance per real
dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import mod1


def symbol_power(q: int) -> float:
    x = mod1(np.arange(q) / q)
    return float(np.mean(x**2))


def sigma_from_snr(snr_db: float, K: int | None = None, q: int = 3, D: int = 1) -> float:
    """Noise std per real dimension.  ``snr_db = inf`` gives a noiseless channel.

    K and D are accepted for signature symmetry; under the per-transmitter,
    per-dimension convention neither changes the result.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite or +inf, got {snr_db}")
    return math.sqrt(symbol_power(q) / 10 ** (snr_db / 10))


@dataclass(frozen=True)
class ChannelParams:
    K: int
    sigma_w: float
    theta_max: float = 0.0
    D: int = 1
    seed: int | None = None
    snr_db: float | None = None
    phase_per_symbol: bool = False

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.sigma_w < 0:
            raise ValueError("sigma_w must be >= 0")
        if self.theta_max < 0:
            raise ValueError("theta_max must be >= 0")
        if self.theta_max > 0 and self.D != 2:
            raise ValueError("phase shift is only defined for D=2 (complex) symbols")

    @classmethod
    def from_snr(cls, K: int, snr_db: float, q: int, D: int = 1, **kw) -> "ChannelParams":
        return cls(K=K, sigma_w=sigma_from_snr(snr_db, K, q, D), D=D, snr_db=snr_db, **kw)


def rotate(x: np.ndarray, theta) -> np.ndarray:
    """Rotate D=2 points, read as complex numbers, by ``theta`` radians."""
    c, s = np.cos(theta), np.sin(theta)
    re, im = x[..., 0], x[..., 1]
    return np.stack([c * re - s * im, s * re + c * im], axis=-1)


def draw_impairments(rng: np.random.Generator, params: ChannelParams, I: int):
    """Draw (unit phase draws, unit noise) consuming the generator in a fixed order.

    Phase draws are uniform on [-1, 1] and scaled by theta_max later; they are
    drawn even when theta_max = 0 so the noise stream does not depend on it.
    """
    phase_shape = (params.K, I) if params.phase_per_symbol else (params.K,)
    u = rng.uniform(-1.0, 1.0, size=phase_shape)
    z = rng.standard_normal((I, params.D))
    return u, z


def superpose(symbols: np.ndarray, thetas, noise: np.ndarray, sigma_w: float) -> np.ndarray:
    """``y_i = sum_k rot(x_{k,i}, theta_k) + sigma_w * noise_i``.

    ``symbols`` has shape (..., K, I, D); ``thetas`` (..., K) or (..., K, I) or
    None; ``noise`` (..., I, D) standard normal.
    """
    x = np.asarray(symbols, dtype=float)
    if thetas is not None:
        th = np.asarray(thetas, dtype=float)
        if th.ndim == x.ndim - 2:
            th = th[..., None]
        if np.any(th != 0):
            x = rotate(x, th)
    return x.sum(axis=-3) + sigma_w * noise


def transmit(symbols_per_tx, params: ChannelParams, rng: np.random.Generator | None = None, thetas=None) -> np.ndarray:
    """Superpose K transmitters' symbol streams, each of shape (I, D).

    ``thetas`` overrides the random phase draw (radians, one per transmitter
    or one per transmitter and subcarrier).
    """
    if not len(symbols_per_tx):
        raise ValueError("no transmitters")
    lengths = {len(s) for s in symbols_per_tx}
    if len(lengths) != 1:
        raise ValueError(f"transmitters send unequal symbol counts {sorted(lengths)}")
    x = np.asarray(symbols_per_tx, dtype=float)
    if x.ndim == 2:
        x = x[..., None]
    K, I, D = x.shape
    if K != params.K or D != params.D:
        raise ValueError(f"expected K={params.K}, D={params.D}; got K={K}, D={D}")
    if rng is None:
        rng = np.random.default_rng(params.seed)
    u, z = draw_impairments(rng, params, I)
    if thetas is None:
        thetas = params.theta_max * u
    elif np.any(np.asarray(thetas) != 0) and D != 2:
        raise ValueError("phase shift is only defined for D=2 (complex) symbols")
    return superpose(x, thetas, z, params.sigma_w)
