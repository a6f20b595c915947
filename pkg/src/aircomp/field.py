"""Prime-field arithmetic over Z_q and the field-size rule for digit sums.

The scalar :class:`FieldElement` API is what the small, exact parts of the
package use (alist parsing, hand-checked fixtures).  Hot loops work on plain
integer numpy arrays reduced ``% q`` and only borrow :class:`PrimeField` for
its precomputed tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class FieldError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or self.q < 2:
            raise FieldError(f"field order must be an integer >= 2, got {self.q!r}")
        if not is_prime(int(self.q)):
            raise FieldError(f"field order {self.q} is not prime")
        object.__setattr__(self, "q", int(self.q))

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(int(value) % self.q, self)

    def elements(self) -> list["FieldElement"]:
        return [FieldElement(v, self) for v in range(self.q)]

    def add(self, a: "FieldElement", b: "FieldElement") -> "FieldElement":
        self._check(a, b)
        return FieldElement((a.value + b.value) % self.q, self)

    def sub(self, a: "FieldElement", b: "FieldElement") -> "FieldElement":
        self._check(a, b)
        return FieldElement((a.value - b.value) % self.q, self)

    def neg(self, a: "FieldElement") -> "FieldElement":
        self._check(a)
        return FieldElement((-a.value) % self.q, self)

    def mul(self, a: "FieldElement", b: "FieldElement") -> "FieldElement":
        self._check(a, b)
        return FieldElement((a.value * b.value) % self.q, self)

    def inv(self, a: "FieldElement") -> "FieldElement":
        self._check(a)
        return FieldElement(self.inv_int(a.value), self)

    def inv_int(self, a: int) -> int:
        a = int(a) % self.q
        if a == 0:
            raise ZeroDivisionError("no inverse of zero")
        # Fermat: a^(q-2) is the inverse for prime q
        return pow(a, self.q - 2, self.q)

    @cached_property
    def inverse_table(self) -> np.ndarray:
        """``inverse_table[a]`` is the inverse of ``a``; entry 0 is unused (0)."""
        table = np.zeros(self.q, dtype=np.int64)
        for a in range(1, self.q):
            table[a] = self.inv_int(a)
        return table

    def _check(self, *elems: "FieldElement") -> None:
        for e in elems:
            if not isinstance(e, FieldElement):
                raise TypeError(f"expected FieldElement, got {type(e).__name__}")
            if e.field != self:
                raise FieldError(f"element of Z_{e.field.q} used in Z_{self.q}")


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: PrimeField

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise FieldError(f"value {self.value} outside [0, {self.field.q - 1}]")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return self.field.add(self, other)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        return self.field.sub(self, other)

    def __neg__(self) -> "FieldElement":
        return self.field.neg(self)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return self.field.mul(self, other)

    def inverse(self) -> "FieldElement":
        return self.field.inv(self)

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.q})"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    if a.field != b.field:
        raise FieldError("operands belong to different fields")
    return a.field.add(a, b)


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    if a.field != b.field:
        raise FieldError("operands belong to different fields")
    return a.field.mul(a, b)


def inv(a: FieldElement) -> FieldElement:
    return a.field.inv(a)


def smallest_valid_q(K: int, p: int) -> int:
    """Smallest prime q with K*(p-1) <= q-1.

    With this q, adding K digits from [0, p-1] modulo q never wraps, so the
    modular sum recovered by the decoder equals the natural sum.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    q = K * (p - 1) + 1
    q = max(q, 2)
    while not is_prime(q):
        q += 1
    return q


def check_no_wrap(K: int, p: int, q: int) -> None:
    """Raise if digit sums of K transmitters with radix p can wrap modulo q."""
    if K * (p - 1) > q - 1:
        raise FieldError(
            f"K(p-1) = {K * (p - 1)} exceeds q-1 = {q - 1}; natural sums would wrap"
        )
