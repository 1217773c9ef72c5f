"""Slow reference implementations written straight from the definitions.

Nothing here imports the package; the tests compare the two.
"""

import cmath
from itertools import combinations, product
import math


def pairs(n):
    return list(combinations(range(n), 2))


def z_of(y):
    return tuple(y[i] * y[j] for i, j in pairs(len(y)))


def count_matrices(n, s):
    """Number of n x s sign matrices with pairwise orthogonal rows."""
    found = 0
    for rows in product(product((1, -1), repeat=s), repeat=n):
        if all(sum(a * b for a, b in zip(rows[i], rows[j])) == 0 for i, j in pairs(n)):
            found += 1
    return found


def count_walks(n, s):
    """Number of column sequences (y_1..y_s) with sum of Z(y_r) equal to 0."""
    table = {tuple([0] * (n * (n - 1) // 2)): 1}
    steps = [z_of(y) for y in product((1, -1), repeat=n)]
    for _ in range(s):
        nxt = {}
        for v, c in table.items():
            for z in steps:
                w = tuple(a + b for a, b in zip(v, z))
                nxt[w] = nxt.get(w, 0) + c
        table = nxt
    return table.get(tuple([0] * (n * (n - 1) // 2)), 0)


def psi(lam, n):
    total = 0j
    for y in product((1, -1), repeat=n):
        total += cmath.exp(1j * sum(l * z for l, z in zip(lam, z_of(y))))
    return total / 2**n


def moments(lam, n, order=5):
    out = [0.0] * order
    for y in product((1, -1), repeat=n):
        x = sum(l * z for l, z in zip(lam, z_of(y)))
        for r in range(order):
            out[r] += x ** (r + 1)
    return [m / 2**n for m in out]


def cumulants(lam, n):
    """kappa_1..kappa_5 through the standard moment formulas."""
    m1, m2, m3, m4, m5 = moments(lam, n)
    k2 = m2 - m1**2
    k3 = m3 - 3 * m2 * m1 + 2 * m1**3
    k4 = m4 - 4 * m3 * m1 - 3 * m2**2 + 12 * m2 * m1**2 - 6 * m1**4
    k5 = (m5 - 5 * m4 * m1 - 10 * m3 * m2 + 20 * m3 * m1**2 + 30 * m2**2 * m1
          - 60 * m2 * m1**3 + 24 * m1**5)
    return m1, k2, k3, k4, k5


def weight(lam, n, i, j):
    i, j = min(i, j), max(i, j)
    return lam[pairs(n).index((i, j))]


def triangles(lam, n):
    return sum(weight(lam, n, i, j) * weight(lam, n, i, k) * weight(lam, n, j, k)
               for i, j, k in combinations(range(n), 3))


def ordered_four_cycles(lam, n):
    total = 0.0
    for a, b, c, d in product(range(n), repeat=4):
        if len({a, b, c, d}) == 4:
            total += (weight(lam, n, a, b) * weight(lam, n, b, c)
                      * weight(lam, n, c, d) * weight(lam, n, d, a))
    return total


def undirected_four_cycles(lam, n):
    """Sum over the 3 C(n,4) undirected 4-cycles of the edge product."""
    total = 0.0
    for quad in combinations(range(n), 4):
        a, b, c, d = quad
        for cyc in ((a, b, c, d), (a, b, d, c), (a, c, b, d)):
            p, q, r, s = cyc
            total += (weight(lam, n, p, q) * weight(lam, n, q, r)
                      * weight(lam, n, r, s) * weight(lam, n, s, p))
    return total


def log_scale(n, s):
    d = n * (n - 1) // 2
    return (n * s + 2 * d - n + 1) * math.log(2) - d / 2 * math.log(2 * math.pi * s)
