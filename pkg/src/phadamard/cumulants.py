"""Cumulants of X_lam = lam . Z(xi) and the graph forms that express them.

All forms take an edge vector (or a batch ``(..., d)``) and infer n from d.
Moments are exact averages over the 2^{n-1} canonical sign vectors; the
triangle and 4-cycle forms are evaluated independently so that the two routes
can be checked against each other.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import NamedTuple

import numpy as np

from phadamard.caps import check
from phadamard.indexing import (
    column_blocks,
    edge_index,
    from_matrix,
    rows_from_edges,
    to_matrix,
)


def _as_lambda(lam):
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0:
        raise ValueError("expected an edge vector, got a scalar")
    return lam, rows_from_edges(lam.shape[-1])


def sq_norm(lam):
    """s(lam) = sum_e lam_e^2."""
    lam = np.asarray(lam, dtype=float)
    return np.sum(lam * lam, axis=-1)


@lru_cache(maxsize=None)
def _triangles(n):
    if n < 3:
        return np.zeros((0, 3), dtype=np.intp)
    rows = [
        (edge_index(i, j, n), edge_index(i, k, n), edge_index(j, k, n))
        for i, j, k in combinations(range(1, n + 1), 3)
    ]
    return np.array(rows, dtype=np.intp)


def triangle_form(lam):
    """T(lam): sum over triangles i<j<k of lam_ij lam_ik lam_jk."""
    lam, n = _as_lambda(lam)
    tri = _triangles(n)
    if len(tri) == 0:
        return np.zeros(lam.shape[:-1])[()]
    prod = lam[..., tri[:, 0]] * lam[..., tri[:, 1]] * lam[..., tri[:, 2]]
    return np.sum(prod, axis=-1)


def cycle_form_c4(lam):
    """Sum over ordered 4-tuples of distinct vertices of the closed-walk monomial.

    Uses tr(A^4) minus the closed walks that revisit a vertex:
    C4 = tr(A^4) - 2 sum_k I_k^2 + 2 sum_e lam_e^4.
    """
    lam, n = _as_lambda(lam)
    if n < 4:
        return np.zeros(lam.shape[:-1])[()]
    a = to_matrix(lam, n)
    a2 = a @ a
    tr4 = np.sum(a2 * a2, axis=(-2, -1))
    infl = np.sum(a * a, axis=-1)
    return tr4 - 2.0 * np.sum(infl * infl, axis=-1) + 2.0 * np.sum(lam**4, axis=-1)


def quartic_form(lam):
    """Q(lam) = -(1/12) sum_e lam_e^4 + (1/8) C4(lam)."""
    lam = np.asarray(lam, dtype=float)
    return -np.sum(lam**4, axis=-1) / 12.0 + cycle_form_c4(lam) / 8.0


def raw_moments(lam, order=5):
    """E[X_lam^r] for r = 1..order by enumeration; shape (..., order)."""
    lam, n = _as_lambda(lam)
    check("PHADAMARD_ENUM_MAX_N", "n", n)
    acc = np.zeros(lam.shape[:-1] + (order,))
    powers = np.arange(1, order + 1)
    for zs in column_blocks(n):
        x = lam @ zs.T
        acc += np.sum(x[..., None] ** powers, axis=-2)
    return acc / float(1 << (n - 1))


def _moments_to_cumulants(m):
    """Raw moments m1..m5 (last axis) -> cumulants k1..k5.

    kappa_r = m_r - sum_{k=1}^{r-1} C(r-1, k-1) kappa_k m_{r-k}
    """
    m1, m2, m3, m4, m5 = (m[..., r] for r in range(5))
    k1 = m1
    k2 = m2 - k1 * m1
    k3 = m3 - k1 * m2 - 2 * k2 * m1
    k4 = m4 - k1 * m3 - 3 * k2 * m2 - 3 * k3 * m1
    k5 = m5 - k1 * m4 - 4 * k2 * m3 - 6 * k3 * m2 - 4 * k4 * m1
    return k1, k2, k3, k4, k5


@dataclass(frozen=True)
class CumulantSet:
    kappa1: float
    kappa2: float
    kappa3: float
    kappa4: float
    kappa5: float

    @property
    def T(self):
        return self.kappa3 / 6.0

    @property
    def Q(self):
        return self.kappa4 / 24.0

    @property
    def P(self):
        return self.kappa5 / 120.0


def exact_cumulants(lam):
    """Cumulants kappa_1..kappa_5 of X_lam from exact moments.

    Batched input gives a CumulantSet of arrays.
    """
    m = raw_moments(lam, 5)
    # every coordinate of Z(xi) is centred, so E[X] = 0 exactly
    m[..., 0] = 0.0
    ks = _moments_to_cumulants(m)
    return CumulantSet(*(k[()] if isinstance(k, np.ndarray) else k for k in ks))


def quintic_form(lam):
    """P(lam) = kappa_5 / 120."""
    return exact_cumulants(lam).P


class PeelTerms(NamedTuple):
    q_full: float
    q_sub: float
    quadratic: float
    quartic_tail: float

    @property
    def defect(self):
        """q_full minus the right-hand side; zero when the identity holds."""
        return self.q_full - (self.q_sub + self.quadratic + self.quartic_tail)


def peel_step(lam):
    """Terms of Q_n(A) = Q_{n-1}(B) + x^T M(B) x / 2 - sum_a x_a^4 / 12.

    B drops the last vertex, x is the dropped column and
    M(B) = B^2 - diag(B^2). ``quartic_tail`` is the signed last term.
    """
    lam, n = _as_lambda(lam)
    if n < 2:
        raise ValueError("peeling needs n >= 2")
    a = to_matrix(lam, n)
    b = a[..., :-1, :-1]
    x = a[..., :-1, -1]
    b2 = b @ b
    m = b2 - np.eye(n - 1) * np.diagonal(b2, axis1=-2, axis2=-1)[..., None, :]
    quad = 0.5 * np.einsum("...a,...ab,...b->...", x, m, x)
    tail = -np.sum(x**4, axis=-1) / 12.0
    return PeelTerms(
        np.asarray(quartic_form(lam))[()],
        np.asarray(quartic_form(from_matrix(b)))[()],
        np.asarray(quad)[()],
        np.asarray(tail)[()],
    )


def log_expansion_remainder(lam, psi_value, cumulants=None):
    """E6 = Log psi + s/2 + iT - Q - iP (principal logarithm).

    ``psi_value`` must have positive real part so that the principal branch
    agrees with the continuous logarithm along the ray from 0. Batched input
    gives an array.
    """
    psi_value = np.asarray(psi_value, dtype=complex)
    if np.any(psi_value.real <= 0):
        raise ValueError(f"Re psi = {np.min(psi_value.real)} <= 0; log branch undefined")
    lam = np.asarray(lam, dtype=float)
    cs = exact_cumulants(lam) if cumulants is None else cumulants
    out = np.log(psi_value) + sq_norm(lam) / 2 + 1j * cs.T - cs.Q - 1j * cs.P
    return complex(out) if out.ndim == 0 else out
