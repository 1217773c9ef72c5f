"""The step characteristic function psi, its Gaussian counterpart, and the
pointwise bounds used to control |psi|^{4t} away from the lattice.

Functions accept a single edge vector or a batch ``(..., d)``. Bound checks
return a :class:`BoundCheck` of arrays (or scalars for a single point).
"""

from dataclasses import dataclass
import math
from typing import NamedTuple

import numpy as np

from phadamard.caps import check
from phadamard.cumulants import sq_norm
from phadamard.indexing import column_blocks, rows_from_edges, to_matrix

TWO_PI = 2.0 * math.pi
SLACK = 1e-12
DEFAULT_R0 = 0.25


def _wrap(angle):
    """Reduce to (-pi, pi]."""
    a = np.mod(np.asarray(angle, dtype=float) + math.pi, TWO_PI) - math.pi
    return np.where(a == -math.pi, math.pi, a)[()]


@dataclass(frozen=True)
class CharValue:
    """A characteristic-function value kept in polar log form.

    ``log_mag`` may be -inf (value exactly 0); ``arg`` is in (-pi, pi].
    """

    log_mag: float
    arg: float

    @classmethod
    def from_complex(cls, z):
        z = complex(z)
        mag = abs(z)
        return cls(math.log(mag) if mag > 0 else -math.inf, math.atan2(z.imag, z.real))

    @property
    def value(self):
        if self.log_mag == -math.inf:
            return 0j
        return complex(math.exp(self.log_mag) * math.cos(self.arg),
                       math.exp(self.log_mag) * math.sin(self.arg))

    def __abs__(self):
        return math.exp(self.log_mag)


def psi_values(lam):
    """psi(lam) = 2^{-n} sum_y exp(i lam . Z(y)) as a complex array."""
    lam = np.asarray(lam, dtype=float)
    n = rows_from_edges(lam.shape[-1])
    check("PHADAMARD_ENUM_MAX_N", "n", n)
    re = np.zeros(lam.shape[:-1])
    im = np.zeros(lam.shape[:-1])
    for zs in column_blocks(n):
        x = lam @ zs.T
        re += np.cos(x).sum(axis=-1)
        im += np.sin(x).sum(axis=-1)
    scale = float(1 << (n - 1))
    return (re / scale + 1j * (im / scale))[()]


def psi(lam):
    """psi at a single point, as a :class:`CharValue`."""
    lam = np.asarray(lam, dtype=float)
    if lam.ndim != 1:
        raise ValueError("psi takes one point; use psi_values for batches")
    return CharValue.from_complex(psi_values(lam))


def psi_power(v, p):
    """v^p for a nonnegative integer p, computed in polar log form."""
    if p < 0 or int(p) != p:
        raise ValueError(f"power must be a nonnegative integer, got {p}")
    if p == 0:
        return CharValue(0.0, 0.0)
    if v.log_mag == -math.inf:
        return CharValue(-math.inf, 0.0)
    return CharValue(p * v.log_mag, float(_wrap(math.fmod(p * v.arg, TWO_PI))))


def power_values(values, p):
    """Batched z^p via log-magnitude and wrapped argument; never underflows
    before the final exponential."""
    z = np.asarray(values, dtype=complex)
    if p == 0:
        return np.ones_like(z)[()]
    mag = np.abs(z)
    with np.errstate(divide="ignore"):
        logmag = p * np.log(mag)
    arg = _wrap(np.fmod(p * np.angle(z), TWO_PI))
    out = np.exp(logmag) * np.exp(1j * arg)
    return out[()]


class GaussianChar(NamedTuple):
    value: complex
    modulus: float
    log_mag: float
    arg: float


def psi_gaussian(lam):
    """psi_G(lam) = det(I - iM)^{-1/2} with M_ij = lam_{e(i,j)}.

    The branch is the continuous one from psi_G(0) = 1: each eigenvalue mu of
    M contributes (1 - i mu)^{-1/2} with the principal root, so
    arg psi_G = (1/2) sum arctan(mu) and |psi_G| = det(I + M^2)^{-1/4}.
    """
    lam = np.asarray(lam, dtype=float)
    mu = np.linalg.eigvalsh(to_matrix(lam))
    log_mag = -0.25 * np.sum(np.log1p(mu * mu), axis=-1)
    arg = 0.5 * np.sum(np.arctan(mu), axis=-1)
    value = np.exp(log_mag) * np.exp(1j * arg)
    return GaussianChar(value[()], np.exp(log_mag)[()], log_mag[()], arg[()])


@dataclass(frozen=True)
class InfluenceProfile:
    I: np.ndarray
    I_max: float
    J: float


def influences(lam):
    """Row influences I_k = sum_{i != k} lam_{ik}^2, their max, and
    J = sum_k I_k^{3/2}."""
    a = to_matrix(lam)
    infl = np.sum(a * a, axis=-1)
    return InfluenceProfile(
        infl, np.max(infl, axis=-1)[()], np.sum(infl**1.5, axis=-1)[()]
    )


class BoundCheck(NamedTuple):
    lhs: np.ndarray
    rhs: np.ndarray
    holds: np.ndarray


def _bound(lhs, rhs):
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    return BoundCheck(lhs[()], rhs[()], (lhs <= rhs + SLACK)[()])


def check_cosine_bound(lam, k, psi_vals=None):
    """|psi|^2 <= 1/2 + 1/2 prod_{i != k} cos(2 lam_{ik}) for vertex k (1-based)."""
    lam = np.asarray(lam, dtype=float)
    if np.any(np.abs(lam) > math.pi):
        raise ValueError("coordinates must lie in [-pi, pi]")
    a = to_matrix(lam)
    n = a.shape[-1]
    if not 1 <= k <= n:
        raise ValueError(f"vertex {k} out of range for n={n}")
    row = np.delete(a[..., k - 1, :], k - 1, axis=-1)
    rhs = 0.5 + 0.5 * np.prod(np.cos(2.0 * row), axis=-1)
    pv = psi_values(lam) if psi_vals is None else psi_vals
    return _bound(np.abs(pv) ** 2, rhs)


def check_lindeberg(lam, psi_vals=None):
    """|psi - psi_G| <= (3/2) J(lam). Returns (gap, bound, holds)."""
    pv = psi_values(lam) if psi_vals is None else psi_vals
    gap = np.abs(pv - psi_gaussian(lam).value)
    return _bound(gap, 1.5 * influences(lam).J)


def check_small_ball(lam, t, r0=DEFAULT_R0, psi_vals=None):
    """|psi|^{4t} <= exp(-1.5 t s) on s(lam) <= r0^2."""
    lam = np.asarray(lam, dtype=float)
    s = sq_norm(lam)
    if np.any(s > r0 * r0):
        raise ValueError(f"small-ball check needs s(lam) <= r0^2 = {r0 * r0}")
    pv = psi_values(lam) if psi_vals is None else psi_vals
    with np.errstate(divide="ignore"):
        lhs = np.exp(4.0 * t * np.log(np.abs(pv)))
    return _bound(lhs, np.exp(-1.5 * t * s))


def check_gaussian_decay(lam):
    """|psi_G| <= (1 + 2 s)^{-1/4}."""
    return _bound(psi_gaussian(lam).modulus, (1.0 + 2.0 * sq_norm(lam)) ** -0.25)


class ShellConstants(NamedTuple):
    r: float
    q_G: float
    eta: float
    q_sm: float
    q_big: float
    a_r: float


def shell_constants(r=DEFAULT_R0):
    """Contraction constants of the far-shell regions for shell radius r."""
    if not 0 < r < math.pi / 4:
        raise ValueError(f"shell radius must be in (0, pi/4), got {r}")
    q_g = (1.0 + 2.0 * r * r) ** -0.25
    eta = (1.0 - q_g) / 3.0
    return ShellConstants(
        r=r,
        q_G=q_g,
        eta=eta,
        q_sm=(1.0 + q_g) / 2.0,
        q_big=math.sqrt((1.0 + math.exp(-8.0 / math.pi**2)) / 2.0),
        a_r=(4.0 / math.pi**2) * eta ** (2.0 / 3.0),
    )


CORE = "core"
LOCAL_ANNULUS = "local-annulus"
NEAR_SHELL = "near-shell"
FAR_SMALL_J = "far-small-J"
FAR_BIG_I = "far-big-I"
FAR_MID = "far-mid"
ODD_CELL = "odd-cell"
REGION_LABELS = (CORE, LOCAL_ANNULUS, NEAR_SHELL, FAR_SMALL_J, FAR_BIG_I, FAR_MID, ODD_CELL)


def default_delta(d, t):
    """Box half-width sqrt(2d/t), clamped to 0.9 pi/4 when it leaves the cell.

    Returns ``(delta, clamped)``.
    """
    if t <= 0:
        return 0.9 * math.pi / 4, True
    delta = math.sqrt(2.0 * d / t)
    if delta >= math.pi / 4:
        return 0.9 * math.pi / 4, True
    return delta, False


def classify_region(lam, t, r=DEFAULT_R0, delta=None):
    """Region label of a point of the even cell B_{pi/4} (batched).

    Order: core (inside B_delta with s <= d/t); inside D_r: local-annulus
    (inside B_delta) or near-shell (outside); otherwise the far shell split by
    J <= eta_r, then I_max >= 1.
    """
    lam = np.asarray(lam, dtype=float)
    d = lam.shape[-1]
    n = rows_from_edges(d)
    if delta is None:
        delta, _ = default_delta(d, t)
    if not 0 < delta < math.pi / 4:
        raise ValueError(f"box half-width must be in (0, pi/4), got {delta}")
    sup = np.max(np.abs(lam), axis=-1) if d else np.zeros(lam.shape[:-1])
    if np.any(sup > math.pi / 4):
        raise ValueError("point lies outside the quarter cell B_{pi/4}")
    consts = shell_constants(r)
    s = sq_norm(lam)
    in_box = sup <= delta
    prof = influences(lam) if n >= 2 else None
    J = prof.J if prof is not None else np.zeros_like(s)
    imax = prof.I_max if prof is not None else np.zeros_like(s)
    core_radius = d / t if t > 0 else math.inf
    label = np.where(
        in_box & (s <= core_radius),
        CORE,
        np.where(
            s <= r * r,
            np.where(in_box, LOCAL_ANNULUS, NEAR_SHELL),
            np.where(J <= consts.eta, FAR_SMALL_J, np.where(imax >= 1.0, FAR_BIG_I, FAR_MID)),
        ),
    )
    return label[()] if label.ndim == 0 else label


class ShellCertificate(NamedTuple):
    label: np.ndarray
    bound: np.ndarray
    psi_power: np.ndarray
    holds: np.ndarray


def far_shell_bound(label, n, t, r=DEFAULT_R0):
    """Contraction bound for |psi|^{4t} on a far-shell region."""
    c = shell_constants(r)
    if label == FAR_SMALL_J:
        return c.q_sm ** (4 * t)
    if label == FAR_BIG_I:
        return c.q_big ** (4 * t)
    if label == FAR_MID:
        return math.exp(-c.a_r * t * n ** (-2.0 / 3.0))
    raise ValueError(f"{label!r} is not a far-shell region")


def far_shell_certificate(lam, t, r=DEFAULT_R0, psi_vals=None):
    """Bound |psi|^{4t} on far-shell points and check it against exact psi."""
    lam = np.asarray(lam, dtype=float)
    n = rows_from_edges(lam.shape[-1])
    sup = np.max(np.abs(lam), axis=-1)
    s = sq_norm(lam)
    if np.any(sup > math.pi / 4) or np.any(s <= r * r):
        raise ValueError("far-shell certificate needs lam in B_{pi/4} with s > r^2")
    c = shell_constants(r)
    prof = influences(lam)
    label = np.where(
        prof.J <= c.eta, FAR_SMALL_J, np.where(prof.I_max >= 1.0, FAR_BIG_I, FAR_MID)
    )
    table = {lab: far_shell_bound(lab, n, t, r) for lab in (FAR_SMALL_J, FAR_BIG_I, FAR_MID)}
    bound = np.vectorize(table.__getitem__, otypes=[float])(label)
    pv = psi_values(lam) if psi_vals is None else psi_vals
    with np.errstate(divide="ignore"):
        lhs = np.exp(4.0 * t * np.log(np.abs(pv)))
    return ShellCertificate(label[()], bound[()], lhs[()], (lhs <= bound + SLACK)[()])


def hypercontractive_ratio(coeffs, monomials, m, p=4):
    """||H||_p / ||H||_2 for the multilinear polynomial sum_S c_S prod_{i in S} x_i
    on {±1}^m, computed exactly over all 2^m points.

    ``monomials`` are bit masks of variable subsets.
    """
    x = np.arange(1 << m, dtype=np.int64)
    h = np.zeros(1 << m)
    for c, mask in zip(coeffs, monomials):
        parity = np.bitwise_count(x & mask) & 1
        h += c * (1.0 - 2.0 * parity)
    l2 = math.sqrt(np.mean(h * h))
    lp = np.mean(np.abs(h) ** p) ** (1.0 / p)
    return lp / l2


def random_low_degree_poly(rng, m, q, terms):
    """Random multilinear polynomial with ``terms`` monomials of degree <= q."""
    monomials = []
    for _ in range(terms):
        deg = int(rng.integers(0, q + 1))
        vars_ = rng.choice(m, size=deg, replace=False)
        monomials.append(int(np.sum(1 << vars_.astype(np.int64))) if deg else 0)
    coeffs = rng.standard_normal(terms)
    return coeffs, monomials
