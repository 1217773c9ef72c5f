"""Refusal caps and the exceptions raised when work is refused.

Every cap can be overridden through an environment variable, read at call
time so tests and the CLI can adjust them without re-importing.
"""

import os


class CapExceeded(ValueError):
    """Requested work exceeds a configured cap; nothing was truncated."""

    def __init__(self, what, value, cap, env=None):
        self.what = what
        self.value = value
        self.cap = cap
        self.env = env
        msg = f"{what}={value} exceeds cap {cap}"
        if env:
            msg += f" (override with {env})"
        super().__init__(msg)


class VerificationError(AssertionError):
    """A numerical identity or bound that must hold was violated."""


_DEFAULTS = {
    # rows for exact enumeration over sign vectors (psi, cumulants)
    "PHADAMARD_ENUM_MAX_N": 22,
    # rows for all_pair_product_images (materialised list)
    "PHADAMARD_IMAGES_MAX_N": 24,
    # n*s for brute-force matrix enumeration
    "PHADAMARD_BRUTE_MAX_CELLS": 26,
    # rows for the walk DP whenever images must be enumerated (s >= 2)
    "PHADAMARD_DP_MAX_N": 12,
    # live states in a walk table
    "PHADAMARD_DP_MAX_STATES": 4_000_000,
    # rows for exhaustive 4^d lattice scans
    "PHADAMARD_LATTICE_MAX_N": 5,
}


def cap(name):
    """Current value of the cap ``name`` (environment override or default)."""
    raw = os.environ.get(name)
    if raw is None:
        return _DEFAULTS[name]
    return int(raw)


def check(name, what, value):
    limit = cap(name)
    if value > limit:
        raise CapExceeded(what, value, limit, env=name)
