import numpy as np
import pytest

from tensicat.catastrophe import (
    DegenerateEnergy,
    framework_hash,
    intersect_slice,
    load_witness,
    sample_catastrophe,
    save_witness,
    witness_on_generic_line,
)
from tensicat.frameworks import ControlSlice, load_framework
from tensicat.oracles import make_oracle
from tensicat.stability import SeedCache
from tensicat.tracking import TrackerConfig


def test_zeeman_witness_degree(zeeman_witness):
    assert zeeman_witness.degree == 72
    assert zeeman_witness.complete


def test_witness_residuals_under_fresh_evaluation(zeeman_witness):
    kern = zeeman_witness.fold.system.kernel(order=0)
    params = zeeman_witness.params()
    for row in zeeman_witness.solutions:
        res = np.max(np.abs(kern.values(list(row), params)))
        assert res < 1e-8


def test_hessian_determinant_vanishes_at_witness_points(zeeman_witness, zeeman):
    """The fold condition implies a singular Lagrangian Hessian; the explicit
    determinant (used only as a cross-check) must be negligible at scale."""
    crit = zeeman_witness.fold.critical
    kern = crit.system.kernel(order=1)
    n = crit.n_variables
    base, direction = zeeman_witness.base, zeeman_witness.direction
    for row in zeeman_witness.solutions[:20]:
        z = row[:n].reshape(1, -1)
        t = row[2 * n]
        y = list(base + t * direction)
        _, J, _ = kern.with_jac_batch(z, y)
        s = np.linalg.svd(J[0], compute_uv=False)
        det = abs(np.linalg.det(J[0]))
        assert det < 1e-5 * max(s[0], 1.0) ** n


def test_real_line_labels_and_containment(zeeman, zeeman_witness, cfg):
    slc = ControlSlice(base=(0.0, 1.0), directions=((1.0, 0.0),))
    pts, complete = intersect_slice(zeeman_witness, slc, cfg)
    assert complete
    assert 0 < len(pts) <= 72
    c_pts = [p for p in pts if p.is_C]
    assert len(c_pts) <= len(pts)
    for p in c_pts:
        assert np.min(p.delta) >= -1e-6


def test_segment_filtering(zeeman, zeeman_witness, cfg):
    full_line = ControlSlice(base=(-4.0, 1.0), directions=((8.0, 0.0),))
    seg_pts, _ = intersect_slice(zeeman_witness, full_line, cfg, segment_only=True)
    all_pts, _ = intersect_slice(zeeman_witness, full_line, cfg, segment_only=False)
    assert len(seg_pts) <= len(all_pts)
    for p in seg_pts:
        assert -1e-9 <= p.t <= 1 + 1e-9


def test_intersect_requires_1d_slice(zeeman_witness, cfg):
    plane = ControlSlice(base=(0.0, 0.0), directions=((1.0, 0.0), (0.0, 1.0)))
    with pytest.raises(ValueError, match="one-dimensional"):
        intersect_slice(zeeman_witness, plane, cfg)


def test_sampling_is_deterministic(zeeman, zeeman_witness, cfg):
    a = sample_catastrophe(zeeman, zeeman_witness, (-4, 4, -4, 4), 12, cfg)
    b = sample_catastrophe(zeeman, zeeman_witness, (-4, 4, -4, 4), 12, cfg)
    assert len(a) == len(b)
    for p, q in zip(a, b):
        assert p.y.tobytes() == q.y.tobytes()
        assert p.is_C == q.is_C


def test_sampling_zero_lines_is_empty(zeeman, zeeman_witness, cfg):
    assert sample_catastrophe(zeeman, zeeman_witness, (-4, 4, -4, 4), 0, cfg) == []


def test_sample_points_stay_in_rect(zeeman_taut_samples):
    for p in zeeman_taut_samples:
        assert -4 - 1e-9 <= p.y[0] <= 4 + 1e-9
        assert -4 - 1e-9 <= p.y[1] <= 4 + 1e-9


def test_degenerate_energy_rejected(cfg):
    model, _ = load_framework(
        {
            "dim": 2,
            "nodes": 2,
            "bars": [{"i": 1, "j": 2, "length": 1.0}],
            "cables": [],
            "partition": {
                "internal": ["p21", "p22"],
                "control": [],
                "fixed": {"p11": 0.0, "p12": 0.0},
            },
        }
    )
    with pytest.raises(DegenerateEnergy):
        witness_on_generic_line(model, cfg)


def test_pendulum_line_folds_match_oracle_transitions(pendulum_line, cfg):
    """1-D control chart: the discriminant is a finite point set on the line,
    and the physical members sit exactly where the circle-scan count flips.

    The strict-minimum disappears when the aligned equilibrium's cable force
    reaches zero: anchor distance = bar length + rest length, i.e. at
    a = +-sqrt(4 - 0.25^2).  These are tension-boundary folds, multiplicity
    two in the fold system, kept as degenerate witness members.
    """
    cache = SeedCache(pendulum_line, cfg)
    w = witness_on_generic_line(pendulum_line, cfg, cache)
    assert w.n_degenerate > 0
    axis = ControlSlice(base=(0.0,), directions=((1.0,),))
    pts, complete = intersect_slice(w, axis, cfg)
    orc = make_oracle(pendulum_line)
    a_star = np.sqrt(4.0 - 0.25**2)
    taut_folds = sorted(p.y[0] for p in pts if p.is_C and p.delta_min >= 1.0 - 1e-6)
    assert any(abs(a - a_star) < 1e-6 for a in taut_folds)
    assert any(abs(a + a_star) < 1e-6 for a in taut_folds)
    for a in (-a_star, a_star):
        lo = orc.count_strict_minima([a - 0.05])
        hi = orc.count_strict_minima([a + 0.05])
        assert lo != hi


def test_witness_cache_round_trip(zeeman, zeeman_witness, tmp_path, monkeypatch):
    monkeypatch.setenv("TENSICAT_CACHE", str(tmp_path))
    key = framework_hash("zeeman-cache-test")
    save_witness(zeeman_witness, key, 3)
    loaded = load_witness(zeeman, key, 3)
    assert loaded is not None
    assert loaded.degree == zeeman_witness.degree
    assert np.allclose(loaded.solutions, zeeman_witness.solutions)
    assert load_witness(zeeman, framework_hash("missing"), 3) is None
