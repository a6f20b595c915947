from itertools import product

import pytest

from aircomp.field import (
    FieldError,
    PrimeField,
    add,
    inv,
    is_prime,
    mul,
    smallest_valid_q,
)


@pytest.mark.parametrize(
    "q, a, b, expected",
    [(3, 2, 2, 1), (5, 0, 4, 4), (3, 1, 2, 0)],
)
def test_add_examples(q, a, b, expected):
    F = PrimeField(q)
    assert add(F(a), F(b)).value == expected


@pytest.mark.parametrize(
    "q, a, b, expected",
    [(5, 3, 4, 2), (3, 2, 0, 0), (3, 2, 2, 1)],
)
def test_mul_examples(q, a, b, expected):
    F = PrimeField(q)
    assert mul(F(a), F(b)).value == expected


@pytest.mark.parametrize("q, a, expected", [(5, 3, 2), (3, 2, 2), (7, 4, 2)])
def test_inv_examples(q, a, expected):
    F = PrimeField(q)
    assert inv(F(a)).value == expected


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError, match="no inverse of zero"):
        inv(PrimeField(5)(0))


def test_mismatched_fields_rejected():
    with pytest.raises(FieldError):
        add(PrimeField(3)(1), PrimeField(5)(1))
    with pytest.raises(FieldError):
        mul(PrimeField(3)(1), PrimeField(5)(1))


@pytest.mark.parametrize("q", [0, 1, 4, 9, 15])
def test_non_prime_orders_rejected(q):
    with pytest.raises(FieldError):
        PrimeField(q)


def test_element_range_enforced():
    from aircomp.field import FieldElement

    with pytest.raises(FieldError):
        FieldElement(3, PrimeField(3))


@pytest.mark.parametrize("q", [3, 5, 7, 11])
def test_inverse_exhaustive(q):
    F = PrimeField(q)
    for a in range(1, q):
        assert (F(a) * F(a).inverse()).value == 1
        assert F.inverse_table[a] == F(a).inverse().value


@pytest.mark.parametrize("q", [3, 5, 7])
def test_field_axioms_exhaustive(q):
    F = PrimeField(q)
    E = F.elements()
    for a, b in product(E, E):
        assert a + b == b + a
        assert a * b == b * a
    for a, b, c in product(E, E, E):
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c


@pytest.mark.parametrize("K, p, expected", [(2, 2, 3), (3, 2, 5), (2, 3, 5), (4, 2, 5), (7, 2, 11)])
def test_smallest_valid_q_examples(K, p, expected):
    assert smallest_valid_q(K, p) == expected


@pytest.mark.parametrize("K", range(1, 9))
@pytest.mark.parametrize("p", range(2, 6))
def test_smallest_valid_q_is_minimal_prime(K, p):
    q = smallest_valid_q(K, p)
    assert is_prime(q) and K * (p - 1) <= q - 1
    assert not any(is_prime(r) and K * (p - 1) <= r - 1 for r in range(2, q))


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_natural_sum_equals_modular_sum(K, p):
    q = smallest_valid_q(K, p)
    for digits in product(range(p), repeat=K):
        assert sum(digits) % q == sum(digits)
