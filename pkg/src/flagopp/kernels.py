"""Vectorized numpy kernels for pairwise flag opposition and flag types.

The single-pair predicates in ``geometry`` are the definitional reference;
these kernels recompute the same relations in bulk.  A flag pair (c, d) is
opposite iff all leading minors of the n x n matrix M with
M[a, b] = <u_a, w_b> are nonzero, where u_a is the adapted basis of c and
w_b is a per-flag right transform of d (the polarity image for polar spaces,
reversed dual-basis columns for projective spaces).  Over GF(2) the minors
are read off packed bit codes through precomputed lookup tables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import FiniteField
from .linalg import invert_gf

_PAR8 = np.array([bin(i).count("1") & 1 for i in range(256)], dtype=np.uint8)


def _parity(x: np.ndarray) -> np.ndarray:
    if x.dtype == np.uint8:
        return _PAR8[x]
    return _PAR8[x & 0xFF] ^ _PAR8[x >> 8]


def gf_dot(tab, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Field dot product over the trailing axis of broadcast-compatible arrays."""
    add, mul = tab["add"], tab["mul"]
    acc = mul[a[..., 0], b[..., 0]]
    for t in range(1, max(a.shape[-1], b.shape[-1])):
        acc = add[acc, mul[a[..., t], b[..., t]]]
    return acc


def point_matrix(g) -> np.ndarray:
    key = "point_matrix"
    if key not in g._caches:
        g._caches[key] = np.array(g.points, dtype=np.uint8)
    return g._caches[key]


def transform_rows(g, rows: np.ndarray) -> np.ndarray:
    """Right transform w = gram . sigma(row) applied over the trailing axis."""
    tab = g.field.np_tables
    if g.form.kind == "hermitian":
        rows = tab["conj"][rows]
    gram = np.array(g.form.gram, dtype=np.uint8)
    out = np.zeros_like(rows)
    for t in range(gram.shape[0]):
        acc = None
        for s in range(gram.shape[1]):
            if gram[t, s] == 0:
                continue
            term = tab["mul"][gram[t, s], rows[..., s]]
            acc = term if acc is None else tab["add"][acc, term]
        out[..., t] = 0 if acc is None else acc
    return out


def point_form_matrix(g) -> np.ndarray:
    """(P, P) matrix of reflexive form values between points."""
    key = "point_form_matrix"
    if key not in g._caches:
        tab = g.field.np_tables
        pts = point_matrix(g)
        w = transform_rows(g, pts)
        g._caches[key] = gf_dot(tab, pts[:, None, :], w[None, :, :])
    return g._caches[key]


@dataclass
class FlagArrays:
    left: np.ndarray      # (F, n, N) adapted basis rows
    right: np.ndarray     # (F, n, N) right-transform rows
    erows: np.ndarray     # (F, n, N) stagewise echelonized adapted rows
    epiv: np.ndarray      # (F, n) pivot columns of erows
    packed: dict | None   # GF(2) bit-packed variants


def _pack_bits(rows: np.ndarray) -> np.ndarray:
    n_bits = rows.shape[-1]
    dtype = np.uint8 if n_bits <= 8 else np.uint16
    weights = (1 << np.arange(n_bits)).astype(dtype)
    return (rows.astype(dtype) * weights).sum(axis=-1).astype(dtype)


def _build_echelon(tab, left: np.ndarray):
    nflags, n, _ = left.shape
    er = left.copy()
    epiv = np.zeros((nflags, n), dtype=np.int64)
    ar = np.arange(nflags)
    for k in range(n):
        row = er[:, k, :].copy()
        for j in range(k):
            c = row[ar, epiv[:, j]]
            row = tab["sub"][row, tab["mul"][c[:, None], er[:, j, :]]]
        piv = (row != 0).argmax(axis=1)
        lead = row[ar, piv]
        er[:, k, :] = tab["mul"][tab["inv"][lead][:, None], row]
        epiv[:, k] = piv
    return er, epiv


def flag_arrays(g) -> FlagArrays:
    """Adapted-basis arrays for all flags of a type A or B geometry."""
    key = "flag_arrays"
    if key in g._caches:
        return g._caches[key]
    if g.kind == "D":
        raise ValueError("type D works through the arrays of its B shadow")
    tab = g.field.np_tables
    pts = point_matrix(g)
    left = pts[g.flag_point_indices]
    if g.kind == "B":
        right = transform_rows(g, left)
    else:
        right = _projective_right(g, left)
    erows, epiv = _build_echelon(tab, left)
    packed = None
    if g.q == 2:
        packed = {"left": _pack_bits(left), "right": _pack_bits(right),
                  "erows": _pack_bits(erows)}
    arrays = FlagArrays(left, right, erows, epiv, packed)
    g._caches[key] = arrays
    return arrays


def _projective_right(g, left: np.ndarray) -> np.ndarray:
    """Reversed columns of the inverse completed basis, one block per flag."""
    field, n = g.field, g.n
    dim = g.ambient_dim
    nflags = left.shape[0]
    right = np.zeros((nflags, n, dim), dtype=np.uint8)
    from .linalg import rref_gf
    for f in range(nflags):
        rows = [tuple(int(x) for x in left[f, a]) for a in range(n)]
        _, pivots = rref_gf(field, rows)
        j = next(t for t in range(dim) if t not in pivots)
        completion = tuple(1 if t == j else 0 for t in range(dim))
        inv = invert_gf(field, rows + [completion])
        for b in range(n):
            right[f, b] = [inv[t][dim - 1 - b] for t in range(dim)]
    return right


# -- leading minors ------------------------------------------------------------


def _minor_lut(n: int) -> np.ndarray:
    """all-leading-minors-nonzero lookup over packed GF(2) n x n matrices."""
    size = 1 << (n * n)
    lut = np.zeros(size, dtype=bool)
    for code in range(size):
        m = [[(code >> (n * a + b)) & 1 for b in range(n)] for a in range(n)]
        ok = True
        for k in range(1, n + 1):
            if not _det2(m, k):
                ok = False
                break
        lut[code] = ok
    return lut


def _det2(m, k: int) -> int:
    rows = [sum(m[a][b] << b for b in range(k)) for a in range(k)]
    for c in range(k):
        piv = next((i for i in range(c, k) if rows[i] >> c & 1), None)
        if piv is None:
            return 0
        rows[c], rows[piv] = rows[piv], rows[c]
        for i in range(c + 1, k):
            if rows[i] >> c & 1:
                rows[i] ^= rows[c]
    return 1


_MINOR_LUTS: dict = {}


def _leading_minors_nonzero(tab, m: np.ndarray, n: int) -> np.ndarray:
    """Boolean array: all leading principal minors of (..., n, n) nonzero."""
    add, mul, neg = tab["add"], tab["mul"], tab["neg"]
    memo = {}

    def det(row, cols):
        key = (row, cols)
        if key not in memo:
            if len(cols) == 1:
                memo[key] = m[..., row, cols[0]]
            else:
                acc = None
                for t, c in enumerate(cols):
                    term = mul[m[..., row, c], det(row + 1, cols[:t] + cols[t + 1:])]
                    if t % 2:
                        term = neg[term]
                    acc = term if acc is None else add[acc, term]
                memo[key] = acc
        return memo[key]

    ok = det(0, (0,)) != 0
    for k in range(2, n + 1):
        ok &= det(0, tuple(range(k))) != 0
    return ok


def _pairwise_opposite_arrays(tab, arrays_l, arrays_r, li, ri, q: int, n: int):
    """(len(li), len(ri)) boolean opposition between two indexed flag sets."""
    if q == 2 and n * n <= 16 and arrays_l.packed is not None:
        if n not in _MINOR_LUTS:
            _MINOR_LUTS[n] = _minor_lut(n)
        lut = _MINOR_LUTS[n]
        lp = arrays_l.packed["left"][li]
        rp = arrays_r.packed["right"][ri]
        bits = _parity(lp[:, None, :, None] & rp[None, :, None, :])
        code = np.zeros(bits.shape[:2], dtype=np.uint16)
        for a in range(n):
            for b in range(n):
                code |= bits[:, :, a, b].astype(np.uint16) << (n * a + b)
        return lut[code]
    left = arrays_l.left[li]
    right = arrays_r.right[ri]
    dim = left.shape[-1]
    add, mul = tab["add"], tab["mul"]
    m = None
    for t in range(dim):
        term = mul[left[:, None, :, None, t], right[None, :, None, :, t]]
        m = term if m is None else add[m, term]
    return _leading_minors_nonzero(tab, m, n)


def batch_opposite(g, left_idx=None, right_idx=None, chunk=64) -> np.ndarray:
    """Opposition matrix between flag index sets (defaults: all flags)."""
    if g.kind == "D":
        b = g.bgeom
        minus, plus = g.oriflamme_class_indices
        li = np.arange(len(minus)) if left_idx is None else np.asarray(left_idx)
        ri = np.arange(len(minus)) if right_idx is None else np.asarray(right_idx)
        if g.n % 2 == 0:
            first = batch_opposite(b, minus[li], minus[ri], chunk)
            second = batch_opposite(b, plus[li], plus[ri], chunk)
        else:
            first = batch_opposite(b, minus[li], plus[ri], chunk)
            second = batch_opposite(b, plus[li], minus[ri], chunk)
        return first & second
    arrays = flag_arrays(g)
    nflags = arrays.left.shape[0]
    li = np.arange(nflags) if left_idx is None else np.asarray(left_idx)
    ri = np.arange(nflags) if right_idx is None else np.asarray(right_idx)
    tab = g.field.np_tables
    out = np.zeros((len(li), len(ri)), dtype=bool)
    for start in range(0, len(li), chunk):
        sl = li[start:start + chunk]
        out[start:start + chunk] = _pairwise_opposite_arrays(
            tab, arrays, arrays, sl, ri, g.q, g.n)
    return out


def adjacency_matrix(g) -> np.ndarray:
    """Full boolean opposition adjacency; cached."""
    key = "adjacency"
    if key not in g._caches:
        g._caches[key] = batch_opposite(g)
    return g._caches[key]


# -- flag types ------------------------------------------------------------------


def types_for_point(g, point_index: int) -> np.ndarray:
    """Type of every flag with respect to one base point (types 1..l)."""
    arrays = flag_arrays(g)
    tab = g.field.np_tables
    x = point_matrix(g)[point_index]
    return _types_one_point(g, tab, arrays, x)


def _types_one_point(g, tab, arrays, x: np.ndarray) -> np.ndarray:
    nflags, n, dim = arrays.erows.shape
    ar = np.arange(nflags)
    r = np.broadcast_to(x, (nflags, dim)).copy()
    member = np.zeros(nflags, dtype=np.int16)
    for k in range(n):
        c = r[ar, arrays.epiv[:, k]]
        r = tab["sub"][r, tab["mul"][c[:, None], arrays.erows[:, k, :]]]
        z = ~(r.any(axis=1))
        member[(member == 0) & z] = k + 1
    if g.kind == "A":
        member[member == 0] = n + 1
        return member
    bv = gf_dot(tab, x[None, None, :], arrays.right) != 0      # (F, n)
    k2 = bv.argmax(axis=1) + 1
    outside = member == 0
    if not bv[outside].any(axis=1).all():
        raise RuntimeError("point outside the generator but inside its perp")
    member[outside] = (2 * n - k2 + 1)[outside]
    return member


def type_matrix(g) -> np.ndarray:
    """(F, P) matrix of flag types with respect to every point."""
    key = "type_matrix"
    if key not in g._caches:
        arrays = flag_arrays(g)
        tab = g.field.np_tables
        pts = point_matrix(g)
        out = np.empty((arrays.left.shape[0], len(pts)), dtype=np.int16)
        for i in range(len(pts)):
            out[:, i] = _types_one_point(g, tab, arrays, pts[i])
        g._caches[key] = out
    return g._caches[key]
