"""Exact arithmetic in small finite fields GF(p^k).

Elements are plain integer indices in [0, p^k): the index encodes the
coefficient vector of the representing polynomial in base p (index 0 is the
zero element, index 1 the one element).  Multiplication runs over exp/log
tables built from a fixed primitive element, so all arithmetic is exact and
deterministic.  The reducing polynomial is chosen canonically (the least
irreducible monic polynomial in the base-p encoding), which makes serialized
data reproducible across runs and machines.
"""

from __future__ import annotations

import numpy as np

ORDER_CAP = 1 << 16


class NonPrimeError(ValueError):
    """Characteristic is not a prime number."""


class TooLargeError(ValueError):
    """Requested field order exceeds the supported cap."""


class OddDegreeFieldError(ValueError):
    """Conjugation x -> x^(p^(k/2)) needs an even extension degree."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# -- polynomial helpers over GF(p), coefficient lists are little-endian ------


def _poly_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mulmod(a, b, mod, p):
    res = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            res[i + j] = (res[i + j] + ai * bj) % p
    return _poly_modred(res, mod, p)


def _poly_modred(a, mod, p):
    a = list(a)
    deg_m = len(mod) - 1
    inv_lead = pow(mod[-1], -1, p)
    for i in range(len(a) - 1, deg_m - 1, -1):
        if a[i] == 0:
            continue
        f = (a[i] * inv_lead) % p
        for j, mj in enumerate(mod):
            a[i - deg_m + j] = (a[i - deg_m + j] - f * mj) % p
    del a[deg_m:]
    return _poly_trim(a)


def _poly_powmod(base, e, mod, p):
    result = [1]
    acc = _poly_modred(base, mod, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, acc, mod, p)
        acc = _poly_mulmod(acc, acc, mod, p)
        e >>= 1
    return result


def _poly_sub(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _poly_trim([(x - y) % p for x, y in zip(a, b)])


def _poly_rem(a, b, p):
    r = list(a)
    deg_b = len(b) - 1
    inv_lead = pow(b[-1], -1, p)
    _poly_trim(r)
    while len(r) - 1 >= deg_b:
        if r[-1] == 0:
            r.pop()
            continue
        f = (r[-1] * inv_lead) % p
        shift = len(r) - 1 - deg_b
        for j, bj in enumerate(b):
            r[shift + j] = (r[shift + j] - f * bj) % p
        _poly_trim(r)
    return r


def _poly_gcd(a, b, p):
    a, b = _poly_trim(list(a)), _poly_trim(list(b))
    while b:
        a, b = b, _poly_rem(a, b, p)
    return a


def _prime_factors(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(coeffs, p: int) -> bool:
    """Rabin test for a monic polynomial over GF(p), little-endian coeffs."""
    k = len(coeffs) - 1
    if k < 1 or coeffs[-1] != 1:
        return False
    if k == 1:
        return True
    x = [0, 1]
    # x^(p^k) == x (mod f)
    xq = x
    for _ in range(k):
        xq = _poly_powmod(xq, p, coeffs, p)
    if _poly_sub(xq, x, p):
        return False
    # gcd(x^(p^(k/r)) - x, f) == 1 for every prime r | k
    for r in _prime_factors(k):
        xq = x
        for _ in range(k // r):
            xq = _poly_powmod(xq, p, coeffs, p)
        g = _poly_gcd(coeffs, _poly_sub(xq, x, p), p)
        if len(g) != 1:
            return False
    return True


def least_irreducible(p: int, k: int):
    """Least monic irreducible of degree k in the base-p index ordering."""
    if k == 1:
        return (0, 1)
    for idx in range(p ** k):
        coeffs = _digits(idx, p, k) + [1]
        if is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise RuntimeError("no irreducible polynomial found")  # unreachable


def _digits(idx: int, p: int, k: int):
    out = []
    for _ in range(k):
        out.append(idx % p)
        idx //= p
    return out


class FiniteField:
    """GF(p^k) with integer-indexed elements and exp/log multiplication."""

    def __init__(self, p: int, k: int, modulus=None):
        if not is_prime(p):
            raise NonPrimeError(f"p = {p} is not prime")
        if k < 1 or p ** k > ORDER_CAP:
            raise TooLargeError(f"order p^k = {p}^{k} outside (0, {ORDER_CAP}]")
        self.p = p
        self.k = k
        self.q = p ** k
        if modulus is None:
            modulus = least_irreducible(p, k)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or not is_irreducible(list(modulus), p):
            raise ValueError(f"modulus {modulus} is not monic irreducible of degree {k}")
        self.modulus = modulus
        self._build_tables()
        self._np_tables = None

    # -- construction -------------------------------------------------------

    def _build_tables(self):
        p, k, q = self.p, self.k, self.q
        self.generator = self._find_generator()
        exp = [1] * (q - 1)
        log = [0] * q
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = self._mul_poly(x, self.generator)
        if x != 1:
            raise RuntimeError("generator order mismatch")  # unreachable
        self._exp = exp
        self._log = log

    def _mul_poly(self, a: int, b: int) -> int:
        da = _digits(a, self.p, self.k)
        db = _digits(b, self.p, self.k)
        prod = _poly_mulmod(da, db, list(self.modulus), self.p)
        return self._from_digits(prod)

    def _from_digits(self, digits) -> int:
        idx = 0
        for c in reversed(list(digits)):
            idx = idx * self.p + c
        return idx

    def _find_generator(self) -> int:
        q = self.q
        factors = _prime_factors(q - 1)
        for g in range(2, q) if q > 2 else [1]:
            if all(self._pow_poly(g, (q - 1) // r) != 1 for r in factors):
                return g
        return 1  # q == 2

    def _pow_poly(self, a: int, e: int) -> int:
        result = 1
        acc = a
        while e:
            if e & 1:
                result = self._mul_poly(result, acc)
            acc = self._mul_poly(acc, acc)
            e >>= 1
        return result

    # -- arithmetic ----------------------------------------------------------

    def digits(self, a: int):
        return tuple(_digits(a, self.p, self.k))

    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        da, db = _digits(a, self.p, self.k), _digits(b, self.p, self.k)
        return self._from_digits((x + y) % self.p for x, y in zip(da, db))

    def neg(self, a: int) -> int:
        if self.p == 2:
            return a
        return self._from_digits((-x) % self.p for x in _digits(a, self.p, self.k))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in finite field")
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("negative power of zero")
            return 1 if e == 0 else 0
        return self._exp[(self._log[a] * e) % (self.q - 1)]

    def conj(self, a: int) -> int:
        """The involutive automorphism x -> x^(p^(k/2)); needs even degree."""
        if self.k % 2 != 0:
            raise OddDegreeFieldError(f"GF({self.p}^{self.k}) has no order-2 automorphism")
        return self.pow(a, self.p ** (self.k // 2))

    def elements(self):
        return range(self.q)

    def nonzero(self):
        return range(1, self.q)

    # -- numpy lookup tables for vectorized kernels --------------------------

    @property
    def np_tables(self):
        """dict of uint8/int16 lookup tables; only for orders <= 256."""
        if self._np_tables is None:
            if self.q > 256:
                raise TooLargeError("vectorized tables limited to orders <= 256")
            q = self.q
            dt = np.uint8
            add = np.zeros((q, q), dtype=dt)
            sub = np.zeros((q, q), dtype=dt)
            mul = np.zeros((q, q), dtype=dt)
            for a in range(q):
                for b in range(q):
                    add[a, b] = self.add(a, b)
                    sub[a, b] = self.sub(a, b)
                    mul[a, b] = self.mul(a, b)
            neg = np.array([self.neg(a) for a in range(q)], dtype=dt)
            inv = np.array([0] + [self.inv(a) for a in range(1, q)], dtype=dt)
            conj = None
            if self.k % 2 == 0:
                conj = np.array([self.conj(a) for a in range(q)], dtype=dt)
            self._np_tables = {"add": add, "sub": sub, "mul": mul,
                               "neg": neg, "inv": inv, "conj": conj}
        return self._np_tables

    # -- identity ------------------------------------------------------------

    def __repr__(self):
        return f"GF({self.p}^{self.k})" if self.k > 1 else f"GF({self.p})"

    def __eq__(self, other):
        return (isinstance(other, FiniteField)
                and (self.p, self.k, self.modulus) == (other.p, other.k, other.modulus))

    def __hash__(self):
        return hash((self.p, self.k, self.modulus))


_FIELD_CACHE: dict = {}


def make_field(p: int, k: int = 1) -> FiniteField:
    """Construct (and memoize) GF(p^k) with the canonical modulus."""
    key = (p, k)
    if key not in _FIELD_CACHE:
        _FIELD_CACHE[key] = FiniteField(p, k)
    return _FIELD_CACHE[key]
