from collections import Counter
import math

import numpy as np
import pytest

from phadamard.caps import CapExceeded
from phadamard.charfn import CORE, ODD_CELL, psi_values
from phadamard.indexing import num_edges
from phadamard.lattice import (
    LatticePoint,
    cell_of,
    cell_offsets,
    cell_parity,
    classify_point,
    cycle_space_basis,
    degrees,
    enumerate_lattice,
    even_graphs,
    expected_lattice_size,
    is_even_graph,
    iter_lattice,
    lattice_coords,
    lattice_records,
    psi_on_lattice,
    reduce_torus,
    verify_odd_cell_bound,
)

import oracles


def test_degrees_of_triangle():
    assert degrees(0b111, 3) == [2, 2, 2]
    assert is_even_graph(0b111, 3)
    assert not is_even_graph(0b001, 3)


@pytest.mark.parametrize("n,size", [(2, 2), (3, 16), (4, 512), (5, 65536)])
def test_lattice_size(n, size):
    assert expected_lattice_size(n) == size
    assert len(enumerate_lattice(n).even) == size


def test_lattice_cap():
    with pytest.raises(CapExceeded):
        enumerate_lattice(6)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_even_graphs_are_cycle_space(n):
    graphs = even_graphs(n)
    assert len(set(graphs)) == 2 ** ((n - 1) * (n - 2) // 2)
    assert all(is_even_graph(g, n) for g in graphs)
    assert len(cycle_space_basis(n)) == (n - 1) * (n - 2) // 2


def test_psi_on_lattice_n2_special_case():
    assert psi_on_lattice(2) == Counter({1: 1, -1: 1})


@pytest.mark.parametrize("n", [3, 4])
def test_psi_on_lattice_multiplicities(n):
    want = 2 ** (2 * num_edges(n) - n - 1)
    counts = psi_on_lattice(n)
    assert dict(counts) == {1: want, 1j: want, -1: want, -1j: want}


def test_lattice_is_where_psi_has_modulus_one():
    n = 3
    dec = enumerate_lattice(n)
    assert np.allclose(np.abs(psi_values(lattice_coords(dec.even, n))), 1.0, atol=1e-12)
    assert np.all(np.abs(psi_values(lattice_coords(dec.odd, n))) < 1 - 1e-3)


@pytest.mark.parametrize("n", [3, 4])
def test_multiplicativity(n):
    rng = np.random.default_rng(n)
    d = num_edges(n)
    for pt in iter_lattice(n):
        lam = pt.coords()
        mu = rng.uniform(-math.pi / 4, math.pi / 4, size=(100, d))
        err = psi_values(lam + mu) - psi_values(lam) * psi_values(mu)
        assert np.max(np.abs(err)) <= 1e-12


def test_iter_lattice_matches_enumeration():
    dec = enumerate_lattice(4)
    got = sorted((p.lambda1, p.lambda2) for p in iter_lattice(4))
    assert got == sorted(map(tuple, dec.even.tolist()))


def test_lattice_point_arithmetic():
    a = LatticePoint(0b001, 0b111, 3)
    b = LatticePoint(0b010, 0b111, 3)
    c = a + b
    # pi/2 + pi/2 = pi on each of the three edges, plus the pi offsets
    assert c.lambda2 == 0 and c.is_even
    assert np.allclose(np.mod(c.coords() - a.coords() - b.coords(), 2 * math.pi), 0)


def test_psi_value_on_lattice_point_matches_oracle():
    pt = LatticePoint(0b000, 0b111, 3)
    assert np.allclose(pt.coords(), [math.pi / 2] * 3)
    assert abs(oracles.psi(list(pt.coords()), 3) - (-1j)) < 1e-12


def test_cell_of():
    gamma = np.array([math.pi / 2 + 0.1, math.pi - 0.2, -0.05])
    loc = cell_of(gamma)
    assert np.allclose(loc.offset, [0.1, -0.2, -0.05])
    assert loc.center.lambda2 == 0b001 and not loc.even
    assert loc.parity == "odd"
    assert classify_point(gamma, 4) == ODD_CELL
    assert classify_point(np.array([0.01, -0.02, 2 * math.pi + 0.01]), 4) == CORE


def test_cell_offsets_stay_in_quarter_cell():
    rng = np.random.default_rng(0)
    gamma = rng.uniform(-10, 10, size=(5000, 6))
    off = cell_offsets(gamma)
    assert np.max(np.abs(off)) <= math.pi / 4 + 1e-12
    parity = cell_parity(gamma)
    for k in range(0, 5000, 97):
        assert cell_of(gamma[k]).even == parity[k]


def test_reduce_torus_keeps_pi():
    assert reduce_torus(math.pi) == math.pi
    assert reduce_torus(-math.pi) == math.pi
    assert math.isclose(reduce_torus(3 * math.pi / 2), -math.pi / 2)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_odd_cell_bound(n):
    assert verify_odd_cell_bound(n, 5000, seed=n) <= 0.5


def test_lattice_records_format():
    rows = lattice_records(3)
    assert len(rows) == 16
    assert rows[0] == {"lambda1_bits": "0", "lambda2_bits": "0", "psi_value": [1.0, 0.0]}
    values = Counter(tuple(r["psi_value"]) for r in rows)
    assert values == {(1.0, 0.0): 4, (0.0, 1.0): 4, (-1.0, 0.0): 4, (0.0, -1.0): 4}
