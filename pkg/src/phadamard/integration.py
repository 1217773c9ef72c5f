"""Monte Carlo estimates of P(S_{4t} = 0) = (2 pi)^{-d} int_T psi^{4t}.

Two estimators are provided. The uniform one averages psi^{4t} over the whole
torus. The decomposed one importance-samples the box B_delta around a lattice
point (every point of Lambda contributes the same integral, since psi^{4t} = 1
there) and brackets the rest with pointwise bounds:

* odd cells: |psi|^{4t} <= 2^{-2t};
* near shell (s <= r^2, outside B_delta): |psi|^{4t} <= exp(-1.5 t s);
* far shell (s > r^2): the three contraction constants.

Every sampler runs through :func:`phadamard.parallel.map_blocks`, so results
depend on the seed only, never on the number of workers.
"""

from dataclasses import asdict, dataclass, field
import math

import numpy as np
from scipy.special import erf

from phadamard.caps import CapExceeded, check
from phadamard.charfn import (
    DEFAULT_R0,
    default_delta,
    power_values,
    psi_values,
    shell_constants,
)
from phadamard.counting import asymptotic_scale, count_dp, log_bigint, log_scale, LOG2
from phadamard.cumulants import sq_norm, triangle_form
from phadamard.indexing import num_edges
from phadamard.lattice import cell_offsets, cell_parity
from phadamard.parallel import map_blocks, merge_moments, moments

# stream keys, so that the pieces of one run never share random numbers
_UNIFORM, _BOX, _CORE, _RESIDUAL, _CUBIC = range(5)


@dataclass(frozen=True)
class EstimateWithError:
    """Sample mean of an unbiased estimator with its standard error.

    ``imag`` and ``imag_std_error`` carry the imaginary part, which must be
    consistent with zero because the target is real.
    """

    value: float
    std_error: float
    samples: int
    seed: int
    imag: float = 0.0
    imag_std_error: float = 0.0
    acceptance_rate: float = 1.0

    def imag_consistent(self, z=3.0):
        return abs(self.imag) <= z * self.imag_std_error + 1e-15

    def within(self, target, z=3.0):
        return abs(self.value - target) <= z * self.std_error + 1e-15


def _estimate(parts, scale, samples, seed, accepted=None, drawn=None):
    re_mean, re_se = merge_moments([p[0] for p in parts])
    im_mean, im_se = merge_moments([p[1] for p in parts])
    rate = accepted / drawn if drawn else 1.0
    return EstimateWithError(
        value=scale * re_mean,
        std_error=abs(scale) * re_se,
        samples=samples,
        seed=seed,
        imag=scale * im_mean,
        imag_std_error=abs(scale) * im_se,
        acceptance_rate=rate,
    )


def _dims(n, t):
    if n < 1 or t < 0:
        raise ValueError(f"need n >= 1 and t >= 0, got n={n}, t={t}")
    d = num_edges(n)
    if d:
        check("PHADAMARD_ENUM_MAX_N", "n", n)
    return d


def integral_uniform_mc(n, t, samples, seed, jobs=1):
    """Average psi(lam)^{4t} over uniform lam on [-pi, pi)^d.

    The real part is an unbiased estimate of P(S_{4t} = 0).
    """
    d = _dims(n, t)
    if samples < 1:
        raise ValueError("need at least one sample")
    if t == 0 or d == 0:
        return EstimateWithError(1.0, 0.0, samples, seed)

    def block(rng, size):
        lam = rng.uniform(-math.pi, math.pi, size=(size, d))
        z = power_values(psi_values(lam), 4 * t)
        return moments(z.real), moments(z.imag)

    return _estimate(map_blocks(block, samples, seed, jobs, stream=_UNIFORM), 1.0, samples, seed)


@dataclass(frozen=True)
class DecompositionBudget:
    """Sample counts for the decomposed estimator.

    ``box_samples`` drive the importance-sampled box integral. ``core_samples``
    (optional) give an independent estimate of the core part alone.
    ``residual_mode`` is "bound" (certified bracket only) or "sampled" (also a
    uniform-torus estimate of the residual, using ``box_samples`` draws).
    """

    box_samples: int
    core_samples: int = 0
    residual_mode: str = "bound"

    def __post_init__(self):
        if self.box_samples < 1 or self.core_samples < 0:
            raise ValueError("sample budgets must be positive")
        if self.residual_mode not in ("bound", "sampled"):
            raise ValueError(f"residual_mode must be 'bound' or 'sampled', got {self.residual_mode!r}")


@dataclass(frozen=True)
class ResidualBound:
    odd: float
    near_shell: float
    far_shell: float

    @property
    def total(self):
        return self.odd + self.near_shell + self.far_shell


@dataclass(frozen=True)
class DecomposedEstimate:
    primary: EstimateWithError
    residual: ResidualBound
    delta: float
    delta_clamped: bool
    r: float
    core: EstimateWithError = None
    residual_estimate: EstimateWithError = None
    extras: dict = field(default_factory=dict)

    @property
    def residual_bound(self):
        return self.residual.total

    def brackets(self, target, z=3.0):
        """True iff |target - primary| <= residual bound + z standard errors."""
        gap = abs(target - self.primary.value)
        return gap <= self.residual_bound + z * self.primary.std_error + 1e-15


def residual_bound(n, t, delta, r=DEFAULT_R0):
    """Certified bound on |P(S_{4t}=0) - K_n int_{B_delta} psi^{4t}|.

    The near-shell piece integrates exp(-1.5 t s) over the part of R^d
    outside the box; it vanishes when r <= delta because then D_r lies inside
    B_delta.
    """
    d = num_edges(n)
    if d == 0:
        return ResidualBound(0.0, 0.0, 0.0)
    c = shell_constants(r)
    odd = 2.0 ** (-2 * t)
    if r <= delta or t == 0:
        near = 0.0 if t else 1.0
    else:
        log_k = (2 * d - n + 1) * LOG2 - d * math.log(2 * math.pi)
        outside = -math.expm1(d * math.log(erf(delta * math.sqrt(1.5 * t))))
        near = math.exp(log_k + 0.5 * d * math.log(2 * math.pi / (3 * t))) * outside
    far_r = c.q_sm ** (4 * t) + c.q_big ** (4 * t) + math.exp(-c.a_r * t * n ** (-2.0 / 3.0))
    far = 2.0 ** (-n + 1) * far_r
    return ResidualBound(odd, near, far)


def _truncated_gaussian(rng, size, d, sigma, delta):
    """Rows of independent N(0, sigma^2) coordinates conditioned on |x| <= delta.

    Per-coordinate rejection; returns the sample and the number of draws.
    """
    x = rng.normal(0.0, sigma, size=(size, d))
    drawn = x.size
    bad = np.abs(x) > delta
    while bad.any():
        k = int(bad.sum())
        x[bad] = rng.normal(0.0, sigma, size=k)
        drawn += k
        bad = np.abs(x) > delta
    return x, drawn


def integral_decomposed(n, t, budget, seed, delta=None, r=DEFAULT_R0, jobs=1):
    """Primary box integral by importance sampling plus the residual bracket.

    With proposal q proportional to exp(-2t|mu|^2) on B_delta,
    K_n int_{B_delta} psi^{4t} = A_hat erf(delta sqrt(2t))^d E_q[psi^{4t} e^{2t s}],
    where A_hat = K_n F(d, t).
    """
    d = _dims(n, t)
    if delta is None:
        delta, clamped = default_delta(d, t)
    else:
        if not 0 < delta < math.pi / 4:
            raise ValueError(f"box half-width must be in (0, pi/4), got {delta}")
        clamped = False
    res = residual_bound(n, t, delta, r)
    if d == 0:
        one = EstimateWithError(1.0, 0.0, budget.box_samples, seed)
        return DecomposedEstimate(one, res, delta, clamped, r)
    log_k = (2 * d - n + 1) * LOG2 - d * math.log(2 * math.pi)
    if t == 0:
        vol = math.exp(log_k + d * math.log(2 * delta))
        primary = EstimateWithError(vol, 0.0, budget.box_samples, seed)
        return DecomposedEstimate(primary, res, delta, clamped, r)

    sigma = 1.0 / math.sqrt(4.0 * t)
    box_mass = d * math.log(erf(delta * math.sqrt(2.0 * t)))
    log_f = 0.5 * d * math.log(math.pi / (2.0 * t))
    scale = math.exp(log_k + log_f + box_mass)
    core_radius = d / t

    def weights(mu):
        s = sq_norm(mu)
        z = power_values(psi_values(mu), 4 * t) * np.exp(2.0 * t * s)
        return z, s

    def box_block(rng, size):
        mu, drawn = _truncated_gaussian(rng, size, d, sigma, delta)
        z, s = weights(mu)
        zc = np.where(s <= core_radius, z, 0.0)
        return moments(z.real), moments(z.imag), moments(zc.real), size * d, drawn

    parts = map_blocks(box_block, budget.box_samples, seed, jobs, stream=_BOX)
    accepted = sum(p[3] for p in parts)
    drawn = sum(p[4] for p in parts)
    primary = _estimate(parts, scale, budget.box_samples, seed, accepted, drawn)
    core_part, core_se = merge_moments([p[2] for p in parts])
    extras = {
        "core_share": scale * core_part,
        "core_share_std_error": scale * core_se,
        "A_hat": math.exp(log_k + log_f),
    }

    core = None
    if budget.core_samples:
        # unconstrained Gaussian proposal; the core and box are indicators
        def core_block(rng, size):
            mu = rng.normal(0.0, sigma, size=(size, d))
            inside = (sq_norm(mu) <= core_radius) & (np.max(np.abs(mu), axis=-1) <= delta)
            z, _ = weights(np.where(inside[:, None], mu, 0.0))
            z = np.where(inside, z, 0.0)
            return moments(z.real), moments(z.imag)

        cparts = map_blocks(core_block, budget.core_samples, seed, jobs, stream=_CORE)
        core = _estimate(cparts, math.exp(log_k + log_f), budget.core_samples, seed)

    sampled = None
    if budget.residual_mode == "sampled":
        def residual_block(rng, size):
            lam = rng.uniform(-math.pi, math.pi, size=(size, d))
            offset = cell_offsets(lam)
            in_box = cell_parity(lam) & (np.max(np.abs(offset), axis=-1) <= delta)
            z = np.where(in_box, 0.0, power_values(psi_values(lam), 4 * t))
            return moments(z.real), moments(z.imag)

        rparts = map_blocks(residual_block, budget.box_samples, seed, jobs, stream=_RESIDUAL)
        sampled = _estimate(rparts, 1.0, budget.box_samples, seed)

    return DecomposedEstimate(primary, res, delta, clamped, r, core, sampled, extras)


@dataclass(frozen=True)
class CubicPhaseProbe:
    imag_mean: float
    imag_std_error: float
    deficit: float
    deficit_std_error: float
    predicted: float
    samples: int
    seed: int
    acceptance_rate: float

    @property
    def relative_error(self):
        return abs(self.deficit - self.predicted) / self.predicted if self.predicted else math.nan


def cubic_phase_probe(n, t, samples, seed, jobs=1):
    """Mean of sin(4tT) and of 1 - cos(4tT) for mu ~ N(0, 1/(4t))^d on the core.

    The first vanishes by oddness of T; the second is compared with
    C(n,3)/(8t), the small-angle value 8 t^2 E[T^2].
    """
    if t < 1:
        raise ValueError(f"need t >= 1, got {t}")
    d = num_edges(n)
    sigma = 1.0 / math.sqrt(4.0 * t)
    core_radius = d / t

    def block(rng, size):
        mu = rng.normal(0.0, sigma, size=(size, d))
        drawn = size
        bad = sq_norm(mu) > core_radius
        while bad.any():
            k = int(bad.sum())
            mu[bad] = rng.normal(0.0, sigma, size=(k, d))
            drawn += k
            bad = sq_norm(mu) > core_radius
        theta = 4.0 * t * triangle_form(mu)
        return moments(np.sin(theta)), moments(1.0 - np.cos(theta)), size, drawn

    parts = map_blocks(block, samples, seed, jobs, stream=_CUBIC)
    imag, imag_se = merge_moments([p[0] for p in parts])
    deficit, deficit_se = merge_moments([p[1] for p in parts])
    rate = sum(p[2] for p in parts) / sum(p[3] for p in parts)
    return CubicPhaseProbe(imag, imag_se, deficit, deficit_se,
                           math.comb(n, 3) / (8.0 * t), samples, seed, rate)


@dataclass(frozen=True)
class RatioReport:
    """One row of the N / A table. ``N`` is an int (exact), a float (MC) or
    None when the backend refused."""

    n: int
    t: int
    N: object
    A: float
    ratio: float
    predicted_ratio: float
    t_times_gap: float
    log_N: float = math.nan
    log_A: float = math.nan
    status: str = "ok"

    def as_dict(self):
        return asdict(self)


def ratio_experiment(n, t_list, mode="exact", seed=None, samples=100_000, jobs=1):
    """N_{n,4t} / A_{n,4t} for each t, next to the prediction 1 - C(n,3)/(8t)."""
    if mode not in ("exact", "mc"):
        raise ValueError(f"mode must be 'exact' or 'mc', got {mode!r}")
    if mode == "mc" and seed is None:
        raise ValueError("mc mode needs a seed")
    rows = []
    for t in t_list:
        rep = asymptotic_scale(n, t)
        log_a = log_scale(n, 4 * t)
        try:
            if mode == "exact":
                count = count_dp(n, 4 * t)
                log_n = log_bigint(count) if count else -math.inf
            else:
                est = integral_uniform_mc(n, t, samples, seed, jobs)
                log_n = 4 * n * t * LOG2 + math.log(est.value) if est.value > 0 else -math.inf
                count = math.exp(log_n) if log_n < 709 else math.inf
        except CapExceeded as exc:
            rows.append(RatioReport(n, t, None, rep.A, math.nan, rep.predicted_ratio,
                                    math.nan, math.nan, log_a, f"refused: {exc}"))
            continue
        ratio = math.exp(log_n - log_a)
        rows.append(RatioReport(n, t, count, rep.A, ratio, rep.predicted_ratio,
                                t * (1.0 - ratio), log_n, log_a))
    return rows
