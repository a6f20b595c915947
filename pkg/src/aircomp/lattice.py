"""Nested cubic lattice modulation.

The fine lattice is ``Z^D / q`` and the coarse (shaping) lattice is ``Z^D``,
so the codebook is the q^D points of the fine lattice inside
``[-1/2, 1/2)^D``.  Everything works coordinate-wise on arrays whose last
axis has length D.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np


@dataclass(frozen=True)
class LatticeConfig:
    D: int
    q: int

    def __post_init__(self):
        if self.D not in (1, 2):
            raise ValueError(f"lattice dimension must be 1 or 2, got {self.D}")
        if self.q < 2:
            raise ValueError("q must be >= 2")

    @property
    def codebook_size(self) -> int:
        return self.q**self.D

    def labels(self) -> np.ndarray:
        """All q^D symbol groups, shape (q^D, D), in lexicographic order."""
        return np.array(list(product(range(self.q), repeat=self.D)), dtype=np.int64)

    def codebook(self) -> np.ndarray:
        return map_point(self.labels(), self)


def quantize(x) -> np.ndarray:
    """Nearest point of the integer lattice; ties round up."""
    return np.floor(np.asarray(x, dtype=float) + 0.5)


def mod1(x) -> np.ndarray:
    """Reduce into [-1/2, 1/2): ``x - quantize(x)``."""
    x = np.asarray(x, dtype=float)
    return x - quantize(x)


def map_point(u, cfg: LatticeConfig) -> np.ndarray:
    u = np.asarray(u, dtype=np.int64)
    if u.shape[-1:] != (cfg.D,):
        raise ValueError(f"symbol groups must have last dimension {cfg.D}")
    if u.size and (u.min() < 0 or u.max() >= cfg.q):
        raise ValueError(f"symbol values must lie in [0, {cfg.q - 1}]")
    return mod1(u / cfg.q)


def demap_hard(t, cfg: LatticeConfig) -> np.ndarray:
    """Nearest fine-lattice label of a folded point."""
    t = np.asarray(t, dtype=float)
    return (np.floor(cfg.q * t + 0.5).astype(np.int64)) % cfg.q


def segment(c, D: int) -> np.ndarray:
    """Split a length-N codeword into N/D consecutive groups of D symbols."""
    c = np.asarray(c)
    N = c.shape[-1]
    if N % D:
        raise ValueError(f"codeword length {N} not divisible by D={D}")
    return c.reshape(*c.shape[:-1], N // D, D)


def desegment(groups) -> np.ndarray:
    groups = np.asarray(groups)
    return groups.reshape(*groups.shape[:-2], -1)
