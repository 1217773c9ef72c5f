"""The superlattice Lambda_0 = {0, ±pi/2, pi}^d, the lattice Lambda where
|psi| = 1, and the tiling of the torus by quarter cells around Lambda_0.

A point of Lambda_0 is a pair of d-bit masks (lambda1, lambda2): coordinate e
equals pi * lambda1_e + (pi/2) * lambda2_e. Equivalently each coordinate has a
code k = 2 * lambda1_e + lambda2_e in {0, 1, 2, 3} standing for
{0, pi/2, pi, -pi/2}. A point is in Lambda iff the graph with edge set lambda2
has only even degrees.
"""

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from phadamard.caps import VerificationError, check
from phadamard.charfn import (
    DEFAULT_R0,
    ODD_CELL,
    classify_region,
    psi_values,
)
from phadamard.indexing import edge_endpoints, edge_index, num_edges, rows_from_edges

HALF_PI = math.pi / 2
ROOTS = (1, 1j, -1, -1j)


@lru_cache(maxsize=None)
def _vertex_masks(n):
    i, j = edge_endpoints(n)
    masks = [0] * n
    for e, (a, b) in enumerate(zip(i, j)):
        masks[a] |= 1 << e
        masks[b] |= 1 << e
    return tuple(masks)


def degrees(graph_bits, n):
    """Vertex degrees of the graph on [n] with edge set ``graph_bits``."""
    return [bin(graph_bits & m).count("1") for m in _vertex_masks(n)]


def is_even_graph(graph_bits, n):
    return all(deg % 2 == 0 for deg in degrees(graph_bits, n))


@dataclass(frozen=True)
class LatticePoint:
    lambda1: int
    lambda2: int
    n: int

    @property
    def codes(self):
        d = num_edges(self.n)
        return np.array(
            [2 * ((self.lambda1 >> e) & 1) + ((self.lambda2 >> e) & 1) for e in range(d)],
            dtype=np.int8,
        )

    def coords(self):
        """Coordinates in (-pi, pi]."""
        return decode_codes(self.codes)

    @property
    def is_even(self):
        return is_even_graph(self.lambda2, self.n)

    def __add__(self, other):
        if other.n != self.n:
            raise ValueError("cannot add lattice points of different n")
        return from_codes((self.codes + other.codes) % 4, self.n)


_CODE_VALUES = np.array([0.0, HALF_PI, math.pi, -HALF_PI])


def decode_codes(codes):
    return _CODE_VALUES[np.asarray(codes, dtype=np.intp)]


def from_codes(codes, n):
    l1 = l2 = 0
    for e, k in enumerate(np.asarray(codes).tolist()):
        l1 |= (k >> 1) << e
        l2 |= (k & 1) << e
    return LatticePoint(l1, l2, n)


def cycle_space_basis(n):
    """Fundamental cycles of the star at vertex 1: triangles {1, i, j}."""
    return [
        (1 << edge_index(1, i, n)) | (1 << edge_index(1, j, n)) | (1 << edge_index(i, j, n))
        for i in range(2, n + 1)
        for j in range(i + 1, n + 1)
    ]


def even_graphs(n):
    """All even-degree edge sets, generated as the span of the cycle basis."""
    basis = cycle_space_basis(n)
    span = [0]
    for b in basis:
        span += [g ^ b for g in span]
    return span


@dataclass(frozen=True)
class CellDecomposition:
    """Lambda_0 split by parity; rows are (lambda1, lambda2) masks."""

    n: int
    even: np.ndarray
    odd: np.ndarray

    def even_points(self):
        for l1, l2 in self.even.tolist():
            yield LatticePoint(l1, l2, self.n)

    def odd_points(self):
        for l1, l2 in self.odd.tolist():
            yield LatticePoint(l1, l2, self.n)


def expected_lattice_size(n):
    return 2 ** (2 * num_edges(n) - n + 1)


def enumerate_lattice(n):
    """Exhaustive split of all 4^d points of Lambda_0 into even and odd cells.

    Every lambda2 in {0,1}^d is tested for even degrees; the result is checked
    against the cycle-space generator and the cardinality 2^{2d-n+1}.
    """
    if n < 1:
        raise ValueError("need at least one row")
    check("PHADAMARD_LATTICE_MAX_N", "n", n)
    d = num_edges(n)
    masks = np.array(_vertex_masks(n), dtype=np.int64)
    graphs = np.arange(1 << d, dtype=np.int64)
    parity = np.bitwise_count(graphs[:, None] & masks[None, :]) & 1
    even_mask = ~np.any(parity, axis=1)
    l1 = np.arange(1 << d, dtype=np.int64)

    def product(g):
        return np.stack(np.broadcast_arrays(l1[:, None], g[None, :]), axis=-1).reshape(-1, 2)

    dec = CellDecomposition(n, product(graphs[even_mask]), product(graphs[~even_mask]))
    if sorted(even_graphs(n)) != graphs[even_mask].tolist():
        raise VerificationError("degree test disagrees with the cycle-space span")
    if len(dec.even) != expected_lattice_size(n):
        raise VerificationError(f"|Lambda| = {len(dec.even)}, expected {expected_lattice_size(n)}")
    if len(dec.even) + len(dec.odd) != 4**d:
        raise VerificationError("cells do not cover Lambda_0")
    return dec


def iter_lattice(n):
    """Lambda as {0, pi}^d + (pi/2) * (cycle space), without a 4^d scan."""
    d = num_edges(n)
    graphs = even_graphs(n)
    for l1 in range(1 << d):
        for g in graphs:
            yield LatticePoint(l1, g, n)


def lattice_coords(masks, n):
    """Coordinates for an array of (lambda1, lambda2) rows, shape (m, d)."""
    masks = np.asarray(masks, dtype=np.int64)
    e = np.arange(num_edges(n))
    codes = 2 * ((masks[:, :1] >> e) & 1) + ((masks[:, 1:2] >> e) & 1)
    return decode_codes(codes)


def snap_root(z, tol=1e-12):
    """The fourth root of unity within ``tol`` of z, else raise."""
    for root in ROOTS:
        if abs(z - root) <= tol:
            return root
    raise VerificationError(f"psi = {z} on the lattice is not a fourth root of unity")


def psi_on_lattice(n, tol=1e-12):
    """Counter of psi over Lambda, keyed by the fourth roots of unity.

    For n >= 3 each root must occur 2^{2d-n-1} times. For n = 2 the formula
    is fractional; Lambda = {0, pi} and psi takes 1 and -1 once each.
    """
    dec = enumerate_lattice(n)
    values = psi_values(lattice_coords(dec.even, n)) if num_edges(n) else np.ones(len(dec.even))
    counts = Counter(snap_root(complex(z), tol) for z in np.atleast_1d(values))
    if n >= 3:
        want = 2 ** (2 * num_edges(n) - n - 1)
        if any(counts[root] != want for root in ROOTS):
            raise VerificationError(f"multiplicities {dict(counts)}, expected {want} each")
    return counts


def reduce_torus(gamma):
    """Map coordinates to (-pi, pi], keeping pi itself."""
    g = np.asarray(gamma, dtype=float)
    r = np.mod(g + math.pi, 2 * math.pi) - math.pi
    return np.where(r == -math.pi, math.pi, r)


def _nearest_codes(gamma):
    x = reduce_torus(gamma) / HALF_PI
    lo = np.floor(x)
    frac = x - lo
    lo_code = np.mod(lo, 4).astype(np.int64)
    hi_code = np.mod(lo + 1, 4).astype(np.int64)
    # exact halfway points go to the smaller code
    return np.where(frac < 0.5, lo_code, np.where(frac > 0.5, hi_code, np.minimum(lo_code, hi_code)))


@dataclass(frozen=True)
class CellLocation:
    center: LatticePoint
    offset: np.ndarray
    even: bool

    @property
    def parity(self):
        return "even" if self.even else "odd"


def cell_of(gamma):
    """Quarter cell containing gamma: nearest Lambda_0 point, offset in
    B_{pi/4}, and parity of the centre."""
    gamma = np.asarray(gamma, dtype=float)
    n = rows_from_edges(gamma.shape[-1])
    codes = _nearest_codes(gamma)
    center = from_codes(codes, n)
    offset = reduce_torus(gamma - decode_codes(codes))
    return CellLocation(center, offset, center.is_even)


def cell_parity(gamma):
    """Batched: True where the enclosing cell is even."""
    gamma = np.asarray(gamma, dtype=float)
    n = rows_from_edges(gamma.shape[-1])
    lambda2 = _nearest_codes(gamma) & 1
    i, j = edge_endpoints(n)
    deg = np.zeros(gamma.shape[:-1] + (n,), dtype=np.int64)
    for v in range(n):
        deg[..., v] = np.sum(lambda2[..., (i == v) | (j == v)], axis=-1)
    return np.all(deg % 2 == 0, axis=-1)


def cell_offsets(gamma):
    """Batched: offsets from the nearest Lambda_0 point, in B_{pi/4}."""
    gamma = np.asarray(gamma, dtype=float)
    return reduce_torus(gamma - decode_codes(_nearest_codes(gamma)))


def classify_point(gamma, t, r=DEFAULT_R0, delta=None):
    """Region label of a torus point: odd-cell, or the even-cell label of its
    offset from the enclosing lattice point."""
    loc = cell_of(gamma)
    if not loc.even:
        return ODD_CELL
    return str(classify_region(loc.offset, t, r=r, delta=delta))


def sample_odd_cells(n, samples, rng):
    """Uniform points in quarter cells around random points of Lambda_0 minus Lambda."""
    d = num_edges(n)
    masks = np.array(_vertex_masks(n), dtype=np.int64)
    centers = np.empty(samples, dtype=np.int64)
    filled = 0
    while filled < samples:
        g = rng.integers(0, 1 << d, size=2 * (samples - filled) + 8, dtype=np.int64)
        odd = np.any(np.bitwise_count(g[:, None] & masks[None, :]) & 1, axis=1)
        g = g[odd][: samples - filled]
        centers[filled:filled + len(g)] = g
        filled += len(g)
    l1 = rng.integers(0, 1 << d, size=samples, dtype=np.int64)
    center_coords = lattice_coords(np.stack([l1, centers], axis=1), n)
    offsets = rng.uniform(-math.pi / 4, math.pi / 4, size=(samples, d))
    return center_coords + offsets


def verify_odd_cell_bound(n, samples, seed, tol=1e-12):
    """Max |psi|^2 over random odd-cell points; raises if it exceeds 1/2."""
    if n < 2:
        raise ValueError("no odd cells for n < 2")
    rng = np.random.default_rng(seed)
    worst = 0.0
    block = 1 << 14
    for start in range(0, samples, block):
        pts = sample_odd_cells(n, min(block, samples - start), rng)
        worst = max(worst, float(np.max(np.abs(psi_values(pts)) ** 2)))
    if worst > 0.5 + tol:
        raise VerificationError(f"odd-cell |psi|^2 reached {worst} > 1/2")
    return worst


def lattice_records(n):
    """JSON-ready rows {lambda1_bits, lambda2_bits, psi_value} over Lambda.

    Bit masks are hex strings; psi_value is [re, im].
    """
    d = num_edges(n)
    width = max(1, (d + 3) // 4)
    dec = enumerate_lattice(n)
    vals = psi_values(lattice_coords(dec.even, n)) if d else np.ones(len(dec.even))
    rows = []
    for (l1, l2), z in zip(dec.even.tolist(), np.atleast_1d(vals)):
        root = snap_root(complex(z))
        rows.append({
            "lambda1_bits": format(l1, f"0{width}x"),
            "lambda2_bits": format(l2, f"0{width}x"),
            "psi_value": [float(np.real(root)), float(np.imag(root))],
        })
    return rows
