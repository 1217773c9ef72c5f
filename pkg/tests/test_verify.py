import math

import numpy as np

from phadamard import verify
from phadamard.cumulants import sq_norm


def test_uniform_ball_radii():
    rng = np.random.default_rng(0)
    pts = verify.uniform_ball(rng, 5000, 6, 0.5, inner=0.25)
    s = np.sqrt(sq_norm(pts))
    assert pts.shape == (5000, 6)
    assert s.min() >= 0.25 and s.max() <= 0.5


def test_run_all_small_passes():
    results = verify.run_all(ns=(2, 3, 4), samples=2000, seed=1)
    names = [c.name for c in results]
    assert len(names) == len(set(names)) == 14
    failed = [c.name for c in results if not c.passed]
    assert failed == []
    for c in results:
        rec = c.as_dict()
        assert rec["name"] == c.name and isinstance(rec["passed"], bool)


def test_run_all_is_deterministic_across_jobs():
    a = [c.as_dict() for c in verify.run_all(ns=(3, 5), samples=1000, seed=9, jobs=1)]
    b = [c.as_dict() for c in verify.run_all(ns=(3, 5), samples=1000, seed=9, jobs=3)]
    assert a == b


def test_far_shell_counts_are_summed():
    res = verify.sweep_far_shell((4,), 3000, seed=2)
    counts = {k: v for k, v in res.measured.items() if k.startswith("count_")}
    assert sum(counts.values()) == res.samples


def test_log_expansion_constant_is_finite():
    res = verify.sweep_log_expansion((3, 4), 500, seed=0)
    assert res.passed
    assert all(math.isfinite(v) for v in res.measured.values() if not isinstance(v, str))
