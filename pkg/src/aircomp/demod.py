"""Demodulation of the superposed lattice signal into channel LLRVs.

The receiver folds ``y`` back into ``[-1/2, 1/2)^D`` and scores each candidate
codebook point with a Gaussian kernel summed over the nine (D=2) or three
(D=1) nearest coarse-lattice replicas, because noise that pushed ``y`` across
a region boundary reappears on the far side after folding.  ``folded=False``
keeps only the central replica.

Information positions carry the prior of a sum of K uniform digits in
[0, p-1]; parity positions are uniform.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product

import numpy as np

from .bp import L_MAX
from .field import check_no_wrap
from .lattice import LatticeConfig, mod1

# noiseless mode still needs finite log-likelihoods
_SIGMA_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class PriorProfile:
    """Digit-sum prior plus the info/parity layout of a codeword.

    ``gamma[alpha]`` counts the K-tuples of digits in [0, p-1] summing to
    alpha.  Positions ``[0, n_info)`` are information positions; the rest of
    the ``length`` positions are parity.
    """

    gamma: np.ndarray
    K: int
    p: int
    n_info: int = 0
    length: int = 0

    @property
    def q(self) -> int:
        return self.gamma.size

    def with_layout(self, n_info: int, length: int) -> "PriorProfile":
        if not 0 <= n_info <= length:
            raise ValueError("need 0 <= n_info <= length")
        return replace(self, n_info=n_info, length=length)

    def is_info(self, n: int) -> bool:
        return n < self.n_info

    def log_ratio(self, info: bool) -> np.ndarray:
        """ln(prior(alpha) / prior(0)) for alpha = 1..q-1 (may contain -inf)."""
        if not info:
            return np.zeros(self.q - 1)
        with np.errstate(divide="ignore"):
            return np.log(self.gamma[1:] / self.gamma[0])

    def log_prior(self, info: bool) -> np.ndarray:
        """Unnormalised log prior over all q values."""
        return np.concatenate([[0.0], self.log_ratio(info)])

    def position_log_ratios(self) -> np.ndarray:
        """(length, q-1) array of log prior ratios per codeword position."""
        out = np.zeros((self.length, self.q - 1))
        out[: self.n_info] = self.log_ratio(True)
        return out


def gamma_profile(K: int, p: int, q: int) -> PriorProfile:
    check_no_wrap(K, p, q)
    counts = np.array([1], dtype=np.int64)
    for _ in range(K):
        counts = np.convolve(counts, np.ones(p, dtype=np.int64))
    gamma = np.zeros(q, dtype=np.int64)
    gamma[: counts.size] = counts
    return PriorProfile(gamma=gamma, K=K, p=p)


def fold(y) -> np.ndarray:
    return mod1(y)


def _replicas(D: int, folded: bool) -> np.ndarray:
    if not folded:
        return np.zeros((1, D))
    return np.array(list(product((-1.0, 0.0, 1.0), repeat=D)))


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    with np.errstate(invalid="ignore"):
        out = m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))
    out = np.where(np.isneginf(m), -np.inf, out)
    return np.squeeze(out, axis=axis)


def saturate(scores: np.ndarray) -> np.ndarray:
    """Unnormalised log scores over q values (last axis) -> clamped LLRVs.

    Scores are first floored at ``-L_MAX`` below their maximum and only then
    taken relative to value 0.  A plain clip of the ratios would let two
    large ratios both hit ``+L_MAX`` and lose which value is most likely.
    """
    rel = np.maximum(scores - scores.max(axis=-1, keepdims=True), -L_MAX)
    return rel[..., 1:] - rel[..., :1]


def symbol_llrs(
    t,
    profile: PriorProfile,
    sigma_w: float,
    cfg: LatticeConfig,
    kinds=None,
    folded: bool = True,
) -> np.ndarray:
    """Per-dimension LLRVs of one folded symbol, shape (D, q-1).

    Enumerates all q^D codebook points jointly.  ``kinds`` gives, per
    dimension, whether that coordinate is an information position (default:
    all parity).  When marginalising over the companion coordinate its own
    prior is applied.
    """
    t = np.asarray(t, dtype=float).reshape(cfg.D)
    q, D = cfg.q, cfg.D
    if profile.q != q:
        raise ValueError("profile and lattice use different q")
    kinds = [False] * D if kinds is None else list(kinds)
    sigma = max(sigma_w, _SIGMA_FLOOR)
    labels = cfg.labels()
    points = cfg.codebook()
    z = _replicas(D, folded)
    diff = t[None, None, :] - points[:, None, :] - z[None, :, :]
    log_g = _logsumexp(-np.sum(diff**2, axis=-1) / (2 * sigma**2), axis=1)
    priors = [profile.log_prior(bool(k)) for k in kinds]
    out = np.empty((D, q - 1))
    for d in range(D):
        companion = np.zeros(labels.shape[0])
        for j in range(D):
            if j != d:
                companion = companion + priors[j][labels[:, j]]
        score = log_g + companion
        per_value = np.array([_logsumexp(score[labels[:, d] == a], axis=0) for a in range(q)])
        out[d] = saturate(per_value + profile.log_prior(bool(kinds[d])))
    return out


def _per_dim_loglik(t: np.ndarray, q: int, sigma: float, folded: bool) -> np.ndarray:
    """log kernel per coordinate and candidate value: shape t.shape + (q,)."""
    x = mod1(np.arange(q) / q)
    z = np.array([-1.0, 0.0, 1.0]) if folded else np.array([0.0])
    diff = t[..., None, None] - x[:, None] - z[None, :]
    return _logsumexp(-(diff**2) / (2 * sigma**2), axis=-1)


def codeword_llrs(
    received,
    profile: PriorProfile,
    sigma_w: float,
    cfg: LatticeConfig,
    folded: bool = True,
) -> np.ndarray:
    """Channel LLRVs for a whole codeword: (..., I, D) signals -> (..., N, q-1).

    Subcarrier i, dimension d feeds codeword position ``i*D + d``.  The cubic
    lattice and white noise make the kernel factor across dimensions, so each
    coordinate is scored on its own; the companion marginal cancels exactly.
    """
    y = np.asarray(received, dtype=float)
    if y.shape[-1] != cfg.D:
        raise ValueError(f"received vectors must have last dimension {cfg.D}")
    N = y.shape[-2] * cfg.D
    if profile.length != N:
        raise ValueError(f"profile layout covers {profile.length} positions, signal carries {N}")
    t = fold(y)
    sigma = max(sigma_w, _SIGMA_FLOOR)
    lg = _per_dim_loglik(t, cfg.q, sigma, folded)
    lg = lg.reshape(*lg.shape[:-3], N, cfg.q)
    prior = np.concatenate([np.zeros((N, 1)), profile.position_log_ratios()], axis=1)
    return saturate(lg + prior)
