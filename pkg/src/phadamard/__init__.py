"""Exact and asymptotic counting of partial Hadamard matrices.

The package is organised around the random-walk picture: a ±1 column ``y``
contributes the step ``Z(y) = (y_i y_j)_{i<j}``, an n×s matrix is partial
Hadamard exactly when its s steps sum to zero, and the return probability is a
Fourier integral of the step characteristic function over the d-torus.
"""

from phadamard.caps import CapExceeded, VerificationError
from phadamard.charfn import (
    CharValue,
    InfluenceProfile,
    influences,
    psi,
    psi_gaussian,
    psi_power,
)
from phadamard.counting import (
    asymptotic_scale,
    core_gaussian_mass,
    count_bruteforce,
    count_dp,
    count_meet_middle,
    gaussian_radial_moment,
)
from phadamard.cumulants import (
    cycle_form_c4,
    exact_cumulants,
    quartic_form,
    quintic_form,
    triangle_form,
)
from phadamard.indexing import edge_index, edge_pair, num_edges, pair_product

__all__ = [
    "CapExceeded",
    "CharValue",
    "InfluenceProfile",
    "VerificationError",
    "asymptotic_scale",
    "core_gaussian_mass",
    "count_bruteforce",
    "count_dp",
    "count_meet_middle",
    "cycle_form_c4",
    "edge_index",
    "edge_pair",
    "exact_cumulants",
    "gaussian_radial_moment",
    "influences",
    "num_edges",
    "pair_product",
    "psi",
    "psi_gaussian",
    "psi_power",
    "quartic_form",
    "quintic_form",
    "triangle_form",
]

__version__ = "0.1.0"
