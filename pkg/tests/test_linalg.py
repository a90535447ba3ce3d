import numpy as np
import pytest

from flagopp.fields import make_field
from flagopp.linalg import (
    BudgetExceeded,
    ModularEliminator,
    PrimeDisagreement,
    PrimeTooSmall,
    auto_primes,
    in_span_gf,
    invert_gf,
    kernel_gf,
    matmul_gf,
    nullity_for_eigenvalue,
    rank_exact,
    rank_modular,
    rref_gf,
)


def random_gf_matrix(rng, f, m, n):
    return [[int(x) for x in rng.integers(0, f.q, size=n)] for _ in range(m)]


def test_rref_is_canonical_under_row_mixing():
    rng = np.random.default_rng(5)
    for field in (make_field(2, 1), make_field(3, 1), make_field(2, 2)):
        for _ in range(25):
            rows = random_gf_matrix(rng, field, 3, 5)
            red, piv = rref_gf(field, rows)
            # random invertible recombination of the rows spans the same space
            mixed = list(rows)
            for _ in range(6):
                i, j = rng.integers(0, len(mixed), size=2)
                c = int(rng.integers(1, field.q))
                if i != j:
                    mixed[i] = [field.add(x, field.mul(c, y))
                                for x, y in zip(mixed[i], mixed[j])]
            red2, piv2 = rref_gf(field, mixed)
            assert red == red2 and piv == piv2


def test_rref_membership_and_kernel():
    f = make_field(2, 2)
    rows = [[1, 0, 2, 1], [0, 1, 1, 0]]
    red, piv = rref_gf(f, rows)
    assert in_span_gf(f, red, piv, rows[0])
    ker = kernel_gf(f, rows, 4)
    assert len(ker) == 2
    for v in ker:
        for row in rows:
            acc = 0
            for x, y in zip(row, v):
                acc = f.add(acc, f.mul(x, y))
            assert acc == 0


def test_invert_and_matmul():
    f = make_field(3, 1)
    m = ((1, 2, 0), (0, 1, 1), (1, 0, 2))
    inv = invert_gf(f, m)
    prod = matmul_gf(f, m, inv)
    assert prod == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    with pytest.raises(ValueError):
        invert_gf(f, ((1, 2), (2, 1)))  # singular over GF(3)


def test_rank_exact_basics():
    assert rank_exact(np.eye(7, dtype=int).tolist()) == 7
    assert rank_exact(np.ones((6, 6), dtype=int).tolist()) == 1
    # points scheme idempotent of PG(3,2): 15*E_1 = 15*I - J has rank 14
    e1 = 15 * np.eye(15, dtype=int) - np.ones((15, 15), dtype=int)
    assert rank_exact(e1.tolist()) == 14
    from fractions import Fraction
    rows = [[Fraction(1, 2), Fraction(1, 3)], [Fraction(3, 2), Fraction(2, 1)]]
    assert rank_exact(rows) == 2


def test_rank_modular_per_prime_behavior():
    # diag(2, 4): rank 0 mod 2, rank 2 mod 5; the reported value is the max
    rank, per_prime = rank_modular(np.diag([2, 4]), primes=(2, 5), entry_bound=0)
    assert per_prime == {2: 0, 5: 2}
    assert rank == 2


def test_rank_exact_equals_rank_modular_random():
    rng = np.random.default_rng(11)
    for _ in range(15):
        m, n = rng.integers(2, 25, size=2)
        r = int(rng.integers(1, min(m, n) + 1))
        a = rng.integers(-6, 7, size=(m, r)) @ rng.integers(-6, 7, size=(r, n))
        exact = rank_exact(a.tolist())
        modular, _ = rank_modular(a)
        assert exact == modular
        assert exact == rank_exact(a.T.tolist())


def test_eliminator_float_and_int_paths_agree():
    rng = np.random.default_rng(2)
    a = rng.integers(-100, 100, size=(40, 23))
    for p in (17327423, 1_000_000_007):
        elim = ModularEliminator(23, p)
        for start in range(0, 40, 7):
            elim.add_rows(a[start:start + 7])
        assert elim.rank == rank_exact(a.tolist())
    assert ModularEliminator(23, 17327423).float_path
    assert not ModularEliminator(23, 1_000_000_007).float_path


def test_auto_primes_window():
    primes = auto_primes(362880, 2835)
    assert primes is not None and len(primes) == 2
    for p in primes:
        assert p > 362880
        assert 2835 * p * p + p < 2 ** 53
    assert auto_primes(10 ** 9, 2835) is None


def test_nullity_complete_graphs():
    # K_v at eigenvalue -1 has nullity v - 1
    for v in (5, 15):
        a = np.ones((v, v), dtype=np.int64) - np.eye(v, dtype=np.int64)
        nullity, per_prime = nullity_for_eigenvalue(
            lambda s, t: a[s:t], v, -1)
        assert nullity == v - 1
        assert len(per_prime) == 2 and len(set(per_prime.values())) == 1


def test_nullity_guards():
    with pytest.raises(BudgetExceeded):
        nullity_for_eigenvalue(lambda s, t: None, 5000, -1)
    a = np.zeros((2, 2), dtype=np.int64)
    with pytest.raises(PrimeTooSmall):
        nullity_for_eigenvalue(lambda s, t: a[s:t], 2, -1, primes=(3, 5),
                               entry_bound=100)
    with pytest.raises(PrimeDisagreement):
        # entries divisible by 3 hide rank mod 3 but not mod a large prime
        b = np.array([[3]], dtype=np.int64)
        nullity_for_eigenvalue(lambda s, t: b[s:t], 1, 0, primes=(3, 1_000_003),
                               entry_bound=0)
