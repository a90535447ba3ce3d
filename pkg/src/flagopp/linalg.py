"""Exact dense linear algebra: reduced row echelon form over finite fields,
fraction-free rational rank, and modular rank/nullity with multi-prime
certification.

Finite-field matrices are plain sequences of row tuples holding element
indices; rational matrices hold Python ints or Fractions.  Modular routines
work on int64 numpy arrays with primes small enough that products stay inside
int64.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

# primes used for modular certification; both exceed every coefficient bound
# arising at desk scale and their squares fit in int64
CERT_PRIMES = (1_000_000_007, 998_244_353)

_FLOAT_EXACT = 2 ** 53


def auto_primes(entry_bound: int, max_rank: int, count: int = 2):
    """Largest primes whose elimination stays exact in float64 dot products.

    Accumulations of length max_rank over residues < p stay below 2^53, so
    BLAS matrix products are exact; every prime still exceeds entry_bound.
    Returns None when the window is empty (callers fall back to int64 primes).
    """
    cap = int((_FLOAT_EXACT / max(max_rank, 1)) ** 0.5)
    while cap > 2 and max_rank * cap * cap + cap >= _FLOAT_EXACT:
        cap -= 1
    primes = []
    x = cap if cap % 2 else cap - 1
    while x > max(entry_bound, 2) and len(primes) < count:
        if _is_prime_trial(x):
            primes.append(x)
        x -= 2
    return tuple(primes) if len(primes) == count else None


def _is_prime_trial(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True

DENSE_DIM_BUDGET = 3000          # max dimension for dense nullity elimination
RANK_CELL_BUDGET = 60_000_000    # max rows*cols for rank elimination


class BudgetExceeded(RuntimeError):
    """Requested elimination exceeds the configured size budget."""


class PrimeTooSmall(ValueError):
    """A certification prime does not exceed the required coefficient bound."""


class PrimeDisagreement(RuntimeError):
    """Modular ranks disagree across certification primes."""


# -- finite-field row reduction ----------------------------------------------


def rref_gf(field, rows):
    """Reduced row echelon form over a finite field.

    Returns (rows, pivots) with zero rows dropped; the result is the unique
    canonical representative of the row space, so equal spans compare equal.
    """
    mat = [list(r) for r in rows]
    if not mat:
        return (), ()
    ncols = len(mat[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pr is None:
            continue
        mat[r], mat[pr] = mat[pr], mat[r]
        inv = field.inv(mat[r][c])
        mat[r] = [field.mul(inv, x) for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [field.sub(x, field.mul(f, y)) for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return tuple(tuple(row) for row in mat[:r]), tuple(pivots)


def reduce_vector_gf(field, rref_rows, pivots, vec):
    """Residual of vec after reduction against canonical rref rows."""
    v = list(vec)
    for row, c in zip(rref_rows, pivots):
        if v[c] != 0:
            f = v[c]
            v = [field.sub(x, field.mul(f, y)) for x, y in zip(v, row)]
    return tuple(v)


def in_span_gf(field, rref_rows, pivots, vec) -> bool:
    return not any(reduce_vector_gf(field, rref_rows, pivots, vec))


def kernel_gf(field, rows, ncols):
    """Canonical rref basis of {x : rows . x^T = 0} (right kernel)."""
    red, pivots = rref_gf(field, rows) if rows else ((), ())
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for row, c in zip(red, pivots):
            v[c] = field.neg(row[f])
        basis.append(v)
    red2, _ = rref_gf(field, basis)
    return red2


def invert_gf(field, rows):
    """Inverse of a square matrix over a finite field."""
    n = len(rows)
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(rows)]
    red, pivots = rref_gf(field, aug)
    if list(pivots) != list(range(n)):
        raise ValueError("matrix is singular")
    return tuple(tuple(row[n:]) for row in red)


def matmul_gf(field, a, b):
    bt = list(zip(*b))
    out = []
    for row in a:
        orow = []
        for col in bt:
            acc = 0
            for x, y in zip(row, col):
                acc = field.add(acc, field.mul(x, y))
            orow.append(acc)
        out.append(tuple(orow))
    return tuple(out)


# -- exact rational rank -------------------------------------------------------


def rank_exact(rows) -> int:
    """Rank over the rationals via fraction-free (Bareiss) elimination."""
    mat = []
    for row in rows:
        frs = [Fraction(x) for x in row]
        den = 1
        for x in frs:
            den = den * x.denominator // _gcd(den, x.denominator)
        mat.append([int(x * den) for x in frs])
    if not mat:
        return 0
    m, n = len(mat), len(mat[0])
    if m * n > RANK_CELL_BUDGET:
        raise BudgetExceeded(f"matrix {m}x{n} exceeds rank budget {RANK_CELL_BUDGET}")
    rank = 0
    prev = 1
    for c in range(n):
        pr = next((i for i in range(rank, m) if mat[i][c] != 0), None)
        if pr is None:
            continue
        mat[rank], mat[pr] = mat[pr], mat[rank]
        piv = mat[rank][c]
        for i in range(rank + 1, m):
            fi = mat[i][c]
            row_i, row_r = mat[i], mat[rank]
            for j in range(c, n):
                row_i[j] = (piv * row_i[j] - fi * row_r[j]) // prev
        prev = piv
        rank += 1
        if rank == m:
            break
    return rank


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# -- modular rank / nullity ----------------------------------------------------


class ModularEliminator:
    """Incremental row reduction mod p for rank of a streamed integer matrix.

    When accumulations of length ncols over residues < p stay below 2^53 the
    basis is kept fully reduced and chunks are eliminated through exact
    float64 matrix products; otherwise a sequential int64 path is used.
    """

    def __init__(self, ncols: int, p: int):
        self.ncols = ncols
        self.p = p
        self.float_path = p * p * max(ncols, 1) + p < _FLOAT_EXACT
        dtype = np.float64 if self.float_path else np.int64
        self._basis = np.zeros((ncols, ncols), dtype=dtype)
        self._piv = np.zeros(ncols, dtype=np.int64)
        self.rank = 0

    def add_rows(self, rows: np.ndarray) -> None:
        r = np.array(rows, dtype=np.int64) % self.p
        if self.float_path:
            self._add_float(r.astype(np.float64))
        else:
            self._add_int(r)

    def _add_float(self, r: np.ndarray) -> None:
        # magnitudes stay below chunk * p^2 < 2^53 between reductions, so
        # modular reduction is deferred to single rows and extracted columns
        p, basis, piv = self.p, self._basis, self._piv
        if self.rank:
            coef = r[:, piv[:self.rank]]
            if coef.any():
                r -= coef @ basis[:self.rank]
                np.mod(r, p, out=r)
        first_new = self.rank
        for i in range(r.shape[0]):
            row = r[i]
            np.mod(row, p, out=row)
            nz = np.nonzero(row)[0]
            if nz.size == 0:
                continue
            c = int(nz[0])
            row *= pow(int(row[c]), -1, p)
            np.mod(row, p, out=row)
            tail = r[i + 1:]
            if tail.shape[0]:
                f = tail[:, c] % p
                if f.any():
                    tail -= np.multiply.outer(f, row)
            basis[self.rank] = row
            piv[self.rank] = c
            self.rank += 1
        # make the new block mutually reduced, then clear its pivot columns
        # from the old basis with a single product
        for j in range(self.rank - 1, first_new, -1):
            np.mod(basis[j], p, out=basis[j])
            blk = basis[first_new:j]
            f = blk[:, piv[j]] % p
            if f.any():
                blk -= np.multiply.outer(f, basis[j])
        if self.rank > first_new:
            np.mod(basis[first_new:self.rank], p,
                   out=basis[first_new:self.rank])
        if first_new and self.rank > first_new:
            old = basis[:first_new]
            coef = old[:, piv[first_new:self.rank]]
            if coef.any():
                old -= coef @ basis[first_new:self.rank]
                np.mod(old, p, out=old)

    def _add_int(self, r: np.ndarray) -> None:
        p, basis, piv = self.p, self._basis, self._piv
        for t in range(self.rank):
            f = r[:, piv[t]]
            if f.any():
                np.subtract(r, f[:, None] * basis[t][None, :], out=r)
                np.mod(r, p, out=r)
        for i in range(r.shape[0]):
            nz = np.nonzero(r[i])[0]
            if nz.size == 0:
                continue
            c = int(nz[0])
            row = r[i] * pow(int(r[i, c]), -1, p) % p
            tail = r[i + 1:]
            if tail.shape[0]:
                f = tail[:, c]
                if f.any():
                    np.subtract(tail, f[:, None] * row[None, :], out=tail)
                    np.mod(tail, p, out=tail)
            basis[self.rank] = row
            piv[self.rank] = c
            self.rank += 1


def rank_modular(mat, primes=None, entry_bound=None, chunk=2048):
    """Rank mod each prime; returns (max rank, per-prime dict).

    rank mod p never exceeds the true rank, so the maximum is the certified
    lower bound reported to callers.  Primes must exceed the caller's entry
    bound; when no primes are given, the largest float64-exact primes above
    the bound are chosen automatically.
    """
    mat = np.asarray(mat, dtype=np.int64)
    if entry_bound is None:
        entry_bound = 2 * int(np.abs(mat).max(initial=0)) * max(mat.shape[0], 1)
    if primes is None:
        primes = auto_primes(entry_bound, mat.shape[1]) or CERT_PRIMES
    for p in primes:
        if p <= entry_bound:
            raise PrimeTooSmall(f"prime {p} <= required bound {entry_bound}")
    per_prime = {}
    for p in primes:
        elim = ModularEliminator(mat.shape[1], p)
        for start in range(0, mat.shape[0], chunk):
            elim.add_rows(mat[start:start + chunk])
        per_prime[p] = elim.rank
    return max(per_prime.values()), per_prime


def nullity_for_eigenvalue(rows_fn, dim: int, lam: int, primes=None,
                           entry_bound=None, chunk=512):
    """Nullity of (A - lam*I) by modular elimination at several primes.

    rows_fn(start, stop) must return the integer adjacency rows [start, stop).
    All primes must agree; disagreement is escalated, never averaged.
    """
    if dim > DENSE_DIM_BUDGET:
        raise BudgetExceeded(f"dimension {dim} exceeds dense budget {DENSE_DIM_BUDGET}")
    if entry_bound is None:
        entry_bound = 2 * (abs(lam) + 1) * dim
    if primes is None:
        primes = auto_primes(entry_bound, dim) or CERT_PRIMES
    for p in primes:
        if p <= entry_bound:
            raise PrimeTooSmall(f"prime {p} <= required bound {entry_bound}")
    per_prime = {}
    for p in primes:
        elim = ModularEliminator(dim, p)
        for start in range(0, dim, chunk):
            stop = min(start + chunk, dim)
            block = np.array(rows_fn(start, stop), dtype=np.int64)
            idx = np.arange(start, stop)
            block[idx - start, idx] -= lam
            elim.add_rows(block)
        per_prime[p] = dim - elim.rank
    values = set(per_prime.values())
    if len(values) > 1:
        raise PrimeDisagreement(f"nullities disagree across primes: {per_prime}")
    return values.pop(), per_prime
