"""Exact counts N_{n,s} of n x s partial Hadamard matrices and the Gaussian
quantities behind the asymptotic scale A_{n,s}.

Three exact routes share no code beyond the definition of Z(y):

* ``count_bruteforce`` enumerates all 2^{ns} sign matrices and checks row
  orthogonality with popcounts.
* ``count_dp`` convolves the step distribution s times over a table of
  reachable sum vectors.
* ``count_meet_middle`` squares the half-length table.
"""

from collections import defaultdict
from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammainc

from phadamard.caps import CapExceeded, VerificationError, cap, check
from phadamard.indexing import edge_index, num_edges, pair_product

C_STAR = 1.0 - 0.5 * math.log(2.0)
LOG2 = math.log(2.0)


def count_bruteforce(n, s, chunk=1 << 20):
    """Count n x s ±1 matrices with pairwise orthogonal rows by enumeration.

    Matrix index m encodes row r as bits [r*s, (r+1)*s); rows a and b are
    orthogonal iff popcount(a xor b) = s/2.
    """
    if n < 1 or s < 0:
        raise ValueError(f"need n >= 1 and s >= 0, got n={n}, s={s}")
    check("PHADAMARD_BRUTE_MAX_CELLS", "n*s", n * s)
    total = 1 << (n * s)
    if n == 1:
        # no pairs to check; every matrix qualifies
        return sum(min(chunk, total - lo) for lo in range(0, total, chunk))
    if s % 2:
        target = None
    else:
        target = s // 2
    mask = np.uint64((1 << s) - 1)
    pairs = [(a, b) for b in range(1, n) for a in range(b)]
    found = 0
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.uint64)
        for a, b in pairs:
            if target is None:
                idx = idx[:0]
                break
            ra = (idx >> np.uint64(a * s)) & mask
            rb = (idx >> np.uint64(b * s)) & mask
            idx = idx[np.bitwise_count(ra ^ rb) == target]
            if idx.size == 0:
                break
        found += int(idx.size)
    return found


class WalkStateTable:
    """Counts of walk positions v in Z^d after ``steps`` steps.

    Positions with |v_e| <= horizon are packed as mixed-radix integers with
    digit v_e + horizon in base 2*horizon + 1, so adding a step vector is a
    single integer addition.
    """

    def __init__(self, n, horizon):
        self.n = n
        self.d = num_edges(n)
        self.horizon = horizon
        self.base = 2 * horizon + 1
        self.powers = [self.base**e for e in range(self.d)]
        self.origin = horizon * sum(self.powers)
        self.counts = {self.origin: 1}
        self.steps = 0

    def key(self, vec):
        return self.origin + sum(int(v) * p for v, p in zip(vec, self.powers))

    def vector(self, key):
        out = []
        for _ in range(self.d):
            key, digit = divmod(key, self.base)
            out.append(digit - self.horizon)
        return tuple(out)

    def count_at(self, vec):
        return self.counts.get(self.key(vec), 0)

    def items(self):
        for key, c in self.counts.items():
            yield self.vector(key), c

    def total(self):
        return sum(self.counts.values())

    def __len__(self):
        return len(self.counts)

    def step_deltas(self):
        """Key increments of the 2^{n-1} distinct step vectors Z(y)."""
        check("PHADAMARD_DP_MAX_N", "n", self.n)
        full = sum(self.powers)
        top = 1 << (self.n - 1)
        deltas = []
        for c in range(top):
            z = pair_product(c | top, self.n)
            plus = sum(p for e, p in enumerate(self.powers) if (z >> e) & 1)
            deltas.append(2 * plus - full)
        return deltas

    def advance(self, deltas, keep=None):
        """One step: every distinct image with multiplicity 2."""
        if self.steps >= self.horizon:
            raise ValueError("table horizon reached")
        budget = cap("PHADAMARD_DP_MAX_STATES")
        new = defaultdict(int)
        for key, c in self.counts.items():
            c2 = 2 * c
            for dk in deltas:
                new[key + dk] += c2
            if len(new) > budget:
                raise CapExceeded("walk states", len(new), budget, env="PHADAMARD_DP_MAX_STATES")
        self.steps += 1
        if keep is not None:
            new = {k: c for k, c in new.items() if keep(k)}
        self.counts = dict(new)


def is_step_vector(w, n):
    """True iff w in {±1}^d equals Z(y) for some column y."""
    if any(v not in (1, -1) for v in w):
        return False
    # take y_1 = +1, then y_j = w_{1j}; remaining coordinates are forced
    y = [1] + [w[edge_index(1, j, n)] for j in range(2, n + 1)]
    e = 0
    for i in range(n):
        for j in range(i + 1, n):
            if w[e] != y[i] * y[j]:
                return False
            e += 1
    return True


def walk_table(n, steps):
    """Full (unpruned) table of positions after ``steps`` steps."""
    table = WalkStateTable(n, max(steps, 1))
    if steps:
        deltas = table.step_deltas()
        for _ in range(steps):
            table.advance(deltas)
    return table


def count_dp(n, s):
    """N_{n,s} by s-fold convolution of the step distribution.

    The first s-1 steps build the table (positions that can no longer return
    to the origin are dropped in the second half); the last step is a lookup:
    the count at v contributes 2 * count whenever -v is a step vector.
    """
    if n < 1 or s < 0:
        raise ValueError(f"need n >= 1 and s >= 0, got n={n}, s={s}")
    if s == 0:
        return 1
    table = WalkStateTable(n, s)
    if s >= 2:
        deltas = table.step_deltas()
        for k in range(1, s):
            remaining = s - k
            keep = None
            if remaining < k:
                def keep(key, r=remaining):
                    return max(map(abs, table.vector(key)), default=0) <= r
            table.advance(deltas, keep=keep)
    total = 0
    for vec, c in table.items():
        if is_step_vector(tuple(-v for v in vec), n):
            total += 2 * c
    return total


def count_meet_middle(n, s):
    """N_{n,s} = sum_v count_{s/2}(v) * count_{s/2}(-v).

    The half table is not symmetric under v -> -v once n >= 3 (every
    triangle product of a step vector is +1), so the two halves are paired
    with opposite positions rather than squared.
    """
    if s % 2:
        raise ValueError(f"meet-in-the-middle needs even s, got {s}")
    if n < 1 or s < 0:
        raise ValueError(f"need n >= 1 and s >= 0, got n={n}, s={s}")
    table = walk_table(n, s // 2)
    counts = table.counts
    mirror = 2 * table.origin
    return sum(c * counts.get(mirror - key, 0) for key, c in counts.items())


def n2_closed_form(s):
    """N_{2,s} = 2^s C(s, s/2) for even s, else 0."""
    return 2**s * math.comb(s, s // 2) if s % 2 == 0 else 0


def log_bigint(x):
    """Natural log of a positive integer from its top 64 bits and bit length."""
    if x <= 0:
        raise ValueError("log of a nonpositive count")
    shift = max(x.bit_length() - 64, 0)
    return math.log(x >> shift) + shift * LOG2


def _safe_exp(x):
    return math.exp(x) if x < 709.0 else math.inf


@dataclass(frozen=True)
class AsymptoticReport:
    n: int
    t: int
    d: int
    log_A: float
    log_A_hat: float
    log_F: float
    log_K_n: float
    G_core: float
    correction: float
    error_terms: dict

    @property
    def s(self):
        return 4 * self.t

    @property
    def A(self):
        return _safe_exp(self.log_A)

    @property
    def A_hat(self):
        return _safe_exp(self.log_A_hat)

    @property
    def F(self):
        return _safe_exp(self.log_F)

    @property
    def K_n(self):
        return _safe_exp(self.log_K_n)

    @property
    def predicted_ratio(self):
        return 1.0 - self.correction


def log_scale(n, s):
    """log A_{n,s} = (ns + 2d - n + 1) log 2 - (d/2) log(2 pi s)."""
    d = num_edges(n)
    return (n * s + 2 * d - n + 1) * LOG2 - 0.5 * d * math.log(2 * math.pi * s)


def asymptotic_scale(n, t):
    """Scale A_{n,4t}, Gaussian masses, and the first-order prediction."""
    if t < 1:
        raise ValueError(f"need t >= 1, got {t}")
    d = num_edges(n)
    log_a = log_scale(n, 4 * t)
    log_f = 0.5 * d * math.log(math.pi / (2 * t))
    g_core, _ = core_gaussian_mass(d, t) if d else (1.0, 1.0)
    return AsymptoticReport(
        n=n,
        t=t,
        d=d,
        log_A=log_a,
        log_A_hat=log_a - 4 * n * t * LOG2,
        log_F=log_f,
        log_K_n=(2 * d - n + 1) * LOG2 - d * math.log(2 * math.pi),
        G_core=g_core,
        correction=math.comb(n, 3) / (8 * t),
        error_terms={
            "n2_over_t": n**2 / t,
            "n52_over_t32": n**2.5 / t**1.5,
            "n6_over_t2": n**6 / t**2,
        },
    )


def core_gaussian_mass(d, t):
    """G_core = F(d,t) P[chi^2_d <= 4d] and its ratio to F.

    Under the weight exp(-2t|x|^2) the coordinates are N(0, 1/(4t)), so
    4t|x|^2 is chi-square with d degrees of freedom and the core
    |x|^2 <= d/t is chi^2_d <= 4d.
    """
    if d < 1 or t <= 0:
        raise ValueError(f"need d >= 1 and t > 0, got d={d}, t={t}")
    ratio = float(gammainc(d / 2.0, 2.0 * d))
    if ratio < 1.0 - math.exp(-C_STAR * d) - 1e-15:
        raise VerificationError(f"core mass ratio {ratio} below 1 - exp(-c* d)")
    f = (math.pi / (2.0 * t)) ** (d / 2.0)
    return f * ratio, ratio


def radial_moment_constant(m):
    """sup_d prod_{j<m} (d + 2j) / (4d)^m, attained at d = 1: (2m-1)!!/4^m."""
    return math.prod(range(1, 2 * m, 2)) / 4.0**m


def gaussian_radial_moment(d, t, m):
    """int |x|^{2m} exp(-2t|x|^2) dx = F (4t)^{-m} d(d+2)...(d+2m-2).

    Returns (exact, exact / ((d/t)^m F)).
    """
    if not 0 <= m <= 8:
        raise ValueError(f"moment order must be in [0, 8], got {m}")
    f = (math.pi / (2.0 * t)) ** (d / 2.0)
    rising = math.prod(d + 2 * j for j in range(m))
    exact = f * rising / (4.0 * t) ** m
    ratio = rising / (4.0 * d) ** m
    if ratio > radial_moment_constant(m) * (1 + 1e-12):
        raise VerificationError(f"radial moment ratio {ratio} exceeds C_{m}")
    return exact, ratio
