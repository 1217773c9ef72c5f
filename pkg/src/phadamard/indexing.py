"""Edge indexing for K_n, ±1 columns as bit patterns, and the map y -> Z(y).

Vertices are 1-based in the public API. Edges {i, j} with i < j are ranked in
lexicographic order, and that rank is the coordinate index of every
edge-indexed vector in the package. A column y in {+1, -1}^n is an n-bit
integer with bit k set iff y_{k+1} = +1; Z(y) is a d-bit integer with bit e set
iff the e-th pairwise product is +1.
"""

from functools import lru_cache
import math

import numpy as np

from phadamard.caps import check


def num_edges(n):
    """d = n(n-1)/2."""
    if n < 0:
        raise ValueError(f"row count must be nonnegative, got {n}")
    return n * (n - 1) // 2


def rows_from_edges(d):
    """Inverse of :func:`num_edges`; raises if d is not triangular."""
    n = (1 + math.isqrt(1 + 8 * d)) // 2
    if num_edges(n) != d:
        raise ValueError(f"{d} coordinates is not n(n-1)/2 for any n")
    return n


def edge_index(i, j, n):
    """Rank of the pair (i, j), 1 <= i < j <= n, in lexicographic order."""
    if not (1 <= i < j <= n):
        raise ValueError(f"need 1 <= i < j <= n, got i={i}, j={j}, n={n}")
    # pairs (a, .) for a < i come first: sum_{a<i} (n - a)
    return (i - 1) * n - (i - 1) * i // 2 + (j - i - 1)


def edge_pair(e, n):
    """Inverse of :func:`edge_index`."""
    d = num_edges(n)
    if not (0 <= e < d):
        raise ValueError(f"edge index {e} out of range for n={n}")
    i = 1
    while e >= n - i:
        e -= n - i
        i += 1
    return i, i + 1 + e


@lru_cache(maxsize=None)
def edge_endpoints(n):
    """0-based endpoint arrays (I, J) with I[e] < J[e], in edge order."""
    i, j = np.triu_indices(n, k=1)
    i.setflags(write=False)
    j.setflags(write=False)
    return i, j


def to_matrix(lam, n=None):
    """Symmetric zero-diagonal matrix A with A_ij = lam_{e(i,j)}.

    Accepts a batch ``(..., d)`` and returns ``(..., n, n)``.
    """
    lam = np.asarray(lam, dtype=float)
    if n is None:
        n = rows_from_edges(lam.shape[-1])
    i, j = edge_endpoints(n)
    out = np.zeros(lam.shape[:-1] + (n, n))
    out[..., i, j] = lam
    out[..., j, i] = lam
    return out


def from_matrix(a):
    """Edge vector of the strict upper triangle of ``a`` (batched)."""
    a = np.asarray(a, dtype=float)
    i, j = edge_endpoints(a.shape[-1])
    return a[..., i, j]


def signs_from_bits(bits, n):
    """Column bit pattern -> int8 array of ±1 (bit k <-> entry k)."""
    return np.array([1 if (bits >> k) & 1 else -1 for k in range(n)], dtype=np.int8)


def bits_from_signs(signs):
    out = 0
    for k, v in enumerate(signs):
        if v not in (1, -1):
            raise ValueError(f"entries must be ±1, got {v}")
        if v == 1:
            out |= 1 << k
    return out


def pair_product(y, n):
    """Z(y) as a d-bit pattern: bit e(i,j) set iff y_i y_j = +1."""
    if y < 0 or y >> n:
        raise ValueError(f"column pattern {y} does not fit in {n} bits")
    out = 0
    e = 0
    for i in range(n):
        yi = (y >> i) & 1
        for j in range(i + 1, n):
            # y_i y_j = +1 iff the two sign bits agree
            if yi == (y >> j) & 1:
                out |= 1 << e
            e += 1
    return out


def negate_column(y, n):
    return y ^ ((1 << n) - 1)


def all_pair_product_images(n):
    """The 2^{n-1} distinct values of Z(y), each paired with multiplicity 2.

    Representatives are the columns with y_n = +1; y and -y share an image.
    """
    if n < 1:
        raise ValueError("need at least one row")
    check("PHADAMARD_IMAGES_MAX_N", "n", n)
    top = 1 << (n - 1)
    return [(pair_product(c | top, n), 2) for c in range(top)]


@lru_cache(maxsize=8)
def _canonical_signs(n):
    c = np.arange(1 << (n - 1), dtype=np.int64)
    bits = c | (1 << (n - 1))
    y = ((bits[:, None] >> np.arange(n)) & 1) * 2 - 1
    y = y.astype(np.int8)
    y.setflags(write=False)
    return y


def canonical_columns(n, start=0, stop=None):
    """±1 rows of the canonical columns c in [start, stop), shape (m, n)."""
    total = 1 << (n - 1)
    stop = total if stop is None else min(stop, total)
    if n <= 16:
        return _canonical_signs(n)[start:stop]
    c = np.arange(start, stop, dtype=np.int64) | (1 << (n - 1))
    return (((c[:, None] >> np.arange(n)) & 1) * 2 - 1).astype(np.int8)


def pair_product_matrix(n, start=0, stop=None):
    """Z-images of canonical columns as a float ±1 matrix of shape (m, d)."""
    y = canonical_columns(n, start, stop).astype(float)
    i, j = edge_endpoints(n)
    return y[:, i] * y[:, j]


def column_blocks(n, block=1 << 14):
    """Yield Z-image blocks covering all 2^{n-1} canonical columns."""
    total = 1 << (n - 1)
    for start in range(0, total, block):
        yield pair_product_matrix(n, start, start + block)
