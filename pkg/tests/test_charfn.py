import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from phadamard.charfn import (
    CORE,
    FAR_BIG_I,
    FAR_MID,
    FAR_SMALL_J,
    LOCAL_ANNULUS,
    NEAR_SHELL,
    CharValue,
    check_cosine_bound,
    check_gaussian_decay,
    check_lindeberg,
    check_small_ball,
    classify_region,
    default_delta,
    far_shell_bound,
    far_shell_certificate,
    hypercontractive_ratio,
    influences,
    power_values,
    psi,
    psi_gaussian,
    psi_power,
    psi_values,
    shell_constants,
)
from phadamard.cumulants import sq_norm
from phadamard.indexing import num_edges, to_matrix

import oracles


def points(n, bound=math.pi):
    d = num_edges(n)
    return st.lists(st.floats(-bound, bound), min_size=d, max_size=d).map(np.array)


def test_psi_examples():
    assert math.isclose(psi([0.7]).value.real, math.cos(0.7), rel_tol=1e-15)
    assert abs(psi([math.pi / 2] * 3).value - (-1j)) < 1e-15
    assert abs(psi([math.pi / 2, 0.0, 0.0]).value) < 1e-15
    assert psi(np.zeros(6)).value == 1


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_psi_matches_oracle(n):
    rng = np.random.default_rng(n)
    lam = rng.uniform(-math.pi, math.pi, size=(20, num_edges(n)))
    got = psi_values(lam)
    for k in range(20):
        assert abs(got[k] - oracles.psi(list(lam[k]), n)) < 1e-13


@given(points(4))
def test_psi_modulus_and_conjugate(lam):
    z = psi_values(lam)
    assert abs(z) <= 1 + 1e-12
    assert abs(psi_values(-lam) - z.conjugate()) < 1e-12


def test_psi_power_examples():
    v = CharValue.from_complex(-1j)
    assert abs(psi_power(v, 4).value - 1) < 1e-15
    assert psi_power(CharValue.from_complex(0), 3).value == 0
    assert psi_power(CharValue.from_complex(0), 0).value == 1
    x = 0.3
    direct = 1.0
    for _ in range(8):
        direct *= math.cos(x)
    assert math.isclose(psi_power(psi([x]), 8).value.real, direct, rel_tol=1e-14)


def test_psi_power_does_not_underflow_early():
    v = CharValue.from_complex(0.99)
    p = psi_power(v, 100_000)
    assert math.isclose(p.log_mag, 100_000 * math.log(0.99), rel_tol=1e-14)
    assert p.value == 0  # only the final exponential underflows


def test_psi_power_rejects_bad_exponent():
    with pytest.raises(ValueError):
        psi_power(CharValue(0.0, 0.0), -1)


@given(st.complex_numbers(max_magnitude=1.0), st.integers(0, 40))
def test_power_values_match_repeated_product(z, p):
    want = z**p if p else 1
    assert abs(power_values(z, p) - want) <= 1e-12 * max(1.0, abs(want))


def test_psi_gaussian_examples():
    g = psi_gaussian([0.5])
    assert math.isclose(g.value.real, 1.25**-0.5, rel_tol=1e-14)
    assert abs(g.value.imag) < 1e-15
    assert psi_gaussian(np.zeros(3)).value == 1


def test_psi_gaussian_against_determinant():
    rng = np.random.default_rng(3)
    for n in (3, 4, 6):
        lam = rng.normal(scale=0.6, size=num_edges(n))
        m = to_matrix(lam)
        det = np.linalg.det(np.eye(n) - 1j * m)
        g = psi_gaussian(lam)
        assert abs(g.value**2 * det - 1) < 1e-12
        assert math.isclose(g.modulus, np.linalg.det(np.eye(n) + m @ m) ** -0.25, rel_tol=1e-12)


def test_psi_gaussian_branch_is_continuous():
    # along a ray from 0 the argument must move continuously, even past pi
    # n = 8 all-ones: eigenvalues 7 and -1 (x7), arg -> -3 pi / 2
    lam = np.ones(28)
    args = [psi_gaussian(c * lam).arg for c in np.linspace(0, 20, 2001)]
    assert max(abs(b - a) for a, b in zip(args, args[1:])) < 0.05
    assert max(abs(a) for a in args) > math.pi


def test_psi_gaussian_monte_carlo():
    rng = np.random.default_rng(11)
    lam = rng.normal(scale=0.5, size=6)
    m = to_matrix(lam)
    g = rng.standard_normal((1_000_000, 4))
    z = np.exp(0.5j * np.einsum("ka,ab,kb->k", g, m, g))
    se = math.hypot(z.real.std(), z.imag.std()) / 1000.0
    assert abs(z.mean() - psi_gaussian(lam).value) < 3 * se


def test_influences_examples():
    a, b, c = 0.3, -1.1, 0.7
    prof = influences([a, b, c])
    assert np.allclose(prof.I, [a * a + b * b, a * a + c * c, b * b + c * c])
    assert math.isclose(influences([0.4]).J, 2 * 0.4**3)


@given(points(6, 2.0))
def test_influences_double_count(lam):
    assert math.isclose(np.sum(influences(lam).I), 2 * sq_norm(lam), rel_tol=1e-12, abs_tol=1e-300)


def test_cosine_bound_examples():
    for x in np.linspace(-math.pi, math.pi, 41):
        chk = check_cosine_bound([x], 1)
        assert abs(chk.lhs - chk.rhs) < 1e-15
    # vertex 1 sees cos(pi) cos(0) = -1, so the bound is 0 and tight
    chk = check_cosine_bound([math.pi / 2, 0, 0], 1)
    assert abs(chk.lhs) < 1e-15 and abs(chk.rhs) < 1e-15 and chk.holds
    assert math.isclose(check_cosine_bound([math.pi / 2, 0, 0], 3).rhs, 1.0)


def test_cosine_bound_preconditions():
    with pytest.raises(ValueError):
        check_cosine_bound([4.0, 0.0, 0.0], 1)
    with pytest.raises(ValueError):
        check_cosine_bound([0.1, 0.0, 0.0], 4)


def test_lindeberg_examples():
    chk = check_lindeberg(np.zeros(3))
    assert chk.lhs == 0 and chk.rhs == 0 and chk.holds
    chk = check_lindeberg([0.5])
    assert math.isclose(chk.lhs, 1.25**-0.5 - math.cos(0.5), rel_tol=1e-12)
    assert abs(chk.lhs - 0.0169) < 1e-4
    assert math.isclose(chk.rhs, 0.375)


def test_small_ball_examples():
    chk = check_small_ball(np.zeros(3), 5)
    assert chk.lhs == 1 and chk.rhs == 1 and chk.holds
    chk = check_small_ball([0.2], 1)
    assert math.isclose(chk.lhs, math.cos(0.2) ** 4)
    assert math.isclose(chk.rhs, math.exp(-0.06))
    assert abs(chk.lhs - 0.9226) < 1e-4 and chk.holds
    with pytest.raises(ValueError):
        check_small_ball([0.3], 1, r0=0.25)


@settings(deadline=None)
@given(points(5))
def test_gaussian_decay(lam):
    assert check_gaussian_decay(lam).holds


def test_shell_constants_frozen():
    c = shell_constants(0.25)
    assert abs(c.q_G - 0.97098) < 1e-5
    assert abs(c.eta - 0.0096729) < 1e-6
    assert abs(c.q_sm - 0.98549) < 1e-5
    assert abs(c.q_big - 0.84989) < 1e-5
    assert math.isclose(math.exp(-8 / math.pi**2), 0.44464, rel_tol=1e-4)
    assert math.isclose(c.a_r, 4 / math.pi**2 * c.eta ** (2 / 3))


def test_default_delta():
    # n = 3, t = 4: 2d/t = 1.5 > (pi/4)^2, so the box is clamped
    delta, clamped = default_delta(3, 4)
    assert clamped and math.isclose(delta, 0.9 * math.pi / 4)
    delta, clamped = default_delta(3, 8)
    assert clamped and delta < math.pi / 4
    delta, clamped = default_delta(3, 100)
    assert not clamped and math.isclose(delta, math.sqrt(0.06))


def test_classify_examples():
    assert classify_region(np.zeros(3), 4) == CORE
    # s = r^2 + eps with J > eta and I_max >= 1 needs coordinates near pi/4
    lam = np.array([0.78, 0.78, 0.0, 0.0, 0.0, 0.0])
    assert classify_region(lam, 4) == FAR_BIG_I


def test_classify_partition_labels():
    t, delta, r = 64, 0.2, 0.25
    n = 4
    rng = np.random.default_rng(0)
    lam = rng.uniform(-math.pi / 4, math.pi / 4, size=(20000, num_edges(n)))
    lam[:10000] *= 0.1
    labels = classify_region(lam, t, r, delta)
    s = sq_norm(lam)
    sup = np.max(np.abs(lam), axis=1)
    assert set(np.unique(labels)) <= {CORE, LOCAL_ANNULUS, NEAR_SHELL, FAR_SMALL_J, FAR_BIG_I, FAR_MID}
    assert np.all((labels == CORE) == ((sup <= delta) & (s <= num_edges(n) / t)))
    assert np.all(((labels == LOCAL_ANNULUS) | (labels == NEAR_SHELL) | (labels == CORE))
                  >= (s <= r * r))
    assert np.all(labels[(s <= r * r) & (sup > delta)] == NEAR_SHELL)


def test_classify_rejects_outside_cell():
    with pytest.raises(ValueError):
        classify_region(np.array([1.0, 0.0, 0.0]), 4)
    with pytest.raises(ValueError):
        classify_region(np.zeros(3), 4, delta=1.0)


def test_far_shell_bounds():
    c = shell_constants(0.25)
    assert far_shell_bound(FAR_SMALL_J, 5, 3) == c.q_sm**12
    assert far_shell_bound(FAR_BIG_I, 5, 3) == c.q_big**12
    assert math.isclose(far_shell_bound(FAR_MID, 8, 3), math.exp(-c.a_r * 3 * 8 ** (-2 / 3)))
    with pytest.raises(ValueError):
        far_shell_bound(CORE, 5, 3)


def test_far_shell_certificate_holds():
    rng = np.random.default_rng(2)
    for n in range(3, 9):
        lam = rng.uniform(-math.pi / 4, math.pi / 4, size=(2000, num_edges(n)))
        lam = lam[sq_norm(lam) > 0.0625]
        for t in (1, 4, 16):
            assert np.all(far_shell_certificate(lam, t).holds)


def test_hypercontractive_ratio():
    assert math.isclose(hypercontractive_ratio([1.0], [0b101], 3), 1.0)
    # x1 + x2: ||.||_2 = sqrt 2, ||.||_4^4 = E(x1 + x2)^4 = 8
    assert math.isclose(hypercontractive_ratio([1.0, 1.0], [0b01, 0b10], 2), 8**0.25 / 2**0.5)
