import numpy as np
import pytest

from flagopp.fields import (
    FiniteField,
    NonPrimeError,
    OddDegreeFieldError,
    TooLargeError,
    is_irreducible,
    least_irreducible,
    make_field,
)


def test_prime_field_basics():
    f2 = make_field(2, 1)
    assert f2.q == 2 and f2.add(1, 1) == 0
    f3 = make_field(3, 1)
    assert f3.add(1, 2) == 0
    assert f3.mul(2, 2) == 1


def test_gf4_multiplicative_group():
    f4 = make_field(2, 2)
    for a in f4.nonzero():
        assert f4.pow(a, 3) == 1
    # conjugation fixes the prime subfield and is the Frobenius on the rest
    assert f4.conj(0) == 0 and f4.conj(1) == 1
    omega = f4.generator
    assert f4.conj(omega) == f4.mul(omega, omega)
    for a in f4.elements():
        assert f4.conj(f4.conj(a)) == a


def test_gf9_norm_lands_in_base_field():
    f9 = make_field(3, 2)
    base = {0, 1, 2}
    for a in f9.elements():
        assert f9.mul(a, f9.conj(a)) in base
        assert f9.conj(f9.conj(a)) == a


@pytest.mark.parametrize("p,k", [(2, 1), (2, 2), (3, 1), (2, 3), (13, 1), (2, 4)])
def test_field_axioms_exhaustive(p, k):
    f = FiniteField(p, k)
    q = f.q
    assert q <= 16
    for a in range(q):
        assert f.add(a, f.neg(a)) == 0
        if a:
            assert f.mul(a, f.inv(a)) == 1
        for b in range(q):
            assert f.add(a, b) == f.add(b, a)
            assert f.mul(a, b) == f.mul(b, a)
            for c in range(q):
                assert f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
                assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
                assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))


def test_field_axioms_sampled_larger_orders():
    rng = np.random.default_rng(0)
    for p, k in [(2, 6), (5, 2), (3, 3)]:
        f = FiniteField(p, k)
        sample = rng.integers(0, f.q, size=(200, 3))
        for a, b, c in sample.tolist():
            assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
            assert f.add(f.add(a, b), c) == f.add(a, f.add(b, c))


def test_generator_has_full_multiplicative_order():
    for p, k in [(2, 2), (3, 2), (2, 4), (5, 1)]:
        f = FiniteField(p, k)
        x, order = f.generator, 1
        while x != 1:
            x = f.mul(x, f.generator)
            order += 1
        assert order == f.q - 1


def test_modulus_is_deterministic_and_least():
    assert make_field(2, 2).modulus == (1, 1, 1)          # x^2 + x + 1
    assert make_field(3, 2).modulus == (1, 0, 1)          # x^2 + 1
    assert FiniteField(2, 4).modulus == FiniteField(2, 4).modulus
    # every smaller monic polynomial of that degree is reducible
    f = FiniteField(2, 3)
    enc = sum(c << i for i, c in enumerate(f.modulus[:-1]))
    for idx in range(enc):
        coeffs = [(idx >> i) & 1 for i in range(3)] + [1]
        assert not is_irreducible(coeffs, 2)


def test_errors():
    with pytest.raises(NonPrimeError):
        FiniteField(6, 1)
    with pytest.raises(TooLargeError):
        FiniteField(2, 17)
    with pytest.raises(OddDegreeFieldError):
        make_field(3, 1).conj(1)
    with pytest.raises(ZeroDivisionError):
        make_field(2, 2).inv(0)
    with pytest.raises(ValueError):
        FiniteField(2, 2, modulus=(0, 0, 1))              # x^2 is reducible


def test_numpy_tables_match_scalar_ops():
    for p, k in [(2, 2), (3, 1), (2, 4)]:
        f = make_field(p, k)
        t = f.np_tables
        q = f.q
        for a in range(q):
            assert t["neg"][a] == f.neg(a)
            if a:
                assert t["inv"][a] == f.inv(a)
            for b in range(q):
                assert t["add"][a, b] == f.add(a, b)
                assert t["sub"][a, b] == f.sub(a, b)
                assert t["mul"][a, b] == f.mul(a, b)
        if k % 2 == 0:
            assert [int(x) for x in t["conj"]] == [f.conj(a) for a in range(q)]


def test_least_irreducible_degree_one():
    assert least_irreducible(5, 1) == (0, 1)
