"""Base-p digit decomposition of application integers.

Digits are stored most-significant first.  Received digit vectors hold
per-position sums over K transmitters, so :func:`compose` never reduces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class DigitVector:
    digits: tuple[int, ...]
    p: int

    @property
    def l(self) -> int:
        return len(self.digits)

    def __add__(self, other: "DigitVector") -> "DigitVector":
        if self.p != other.p or self.l != other.l:
            raise ValueError("digit vectors differ in radix or length")
        return DigitVector(tuple(a + b for a, b in zip(self.digits, other.digits)), self.p)


def _weights(p: int, l: int) -> np.ndarray:
    return p ** np.arange(l - 1, -1, -1, dtype=np.int64)


def decompose(s: int, p: int, l: int) -> DigitVector:
    if p < 2:
        raise ValueError(f"radix must be >= 2, got {p}")
    if s < 0 or s >= p**l:
        raise ValueError(f"value out of range: {s} not in [0, {p**l - 1}]")
    digits = []
    for _ in range(l):
        s, r = divmod(s, p)
        digits.append(r)
    return DigitVector(tuple(reversed(digits)), p)


def compose(v: DigitVector | Sequence[int], p: int | None = None) -> int:
    if isinstance(v, DigitVector):
        digits, p = v.digits, v.p
    else:
        if p is None:
            raise ValueError("radix required for a bare digit sequence")
        digits = tuple(v)
    if any(d < 0 for d in digits):
        raise ValueError("digits must be non-negative")
    total = 0
    for d in digits:
        total = total * p + int(d)
    return total


def pack_block(values: Sequence[int], p: int, l: int, B: int) -> np.ndarray:
    """Concatenate the digit vectors of ``B // l`` values into one info block."""
    if B % l:
        raise ValueError(f"block length {B} not divisible by digit count {l}")
    if len(values) != B // l:
        raise ValueError(f"expected {B // l} values for B={B}, l={l}; got {len(values)}")
    out = np.empty(B, dtype=np.int64)
    for i, s in enumerate(values):
        out[i * l : (i + 1) * l] = decompose(int(s), p, l).digits
    return out


def unpack_block(digits: Sequence[int] | np.ndarray, p: int, l: int) -> list[int]:
    digits = np.asarray(digits, dtype=np.int64)
    if digits.shape[-1] % l:
        raise ValueError(f"block length {digits.shape[-1]} not divisible by {l}")
    groups = digits.reshape(*digits.shape[:-1], -1, l)
    values = groups @ _weights(p, l)
    return values.tolist()
