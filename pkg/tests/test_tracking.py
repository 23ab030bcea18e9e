import numpy as np
import pytest

from tensicat.expressions import (
    ExpressionSystem,
    Param,
    Var,
    VariableId,
    const,
    power,
    sub,
)
from tensicat.tracking import (
    Homotopy,
    TrackerConfig,
    TrackingError,
    monodromy_solve,
    parameter_homotopy,
    solve_total_degree,
    total_degree_start,
    track_path,
)


def _sys(outputs, n_vars, n_params=0):
    vids = tuple(VariableId(i, f"x{i}") for i in range(n_vars))
    pids = tuple(VariableId(i, f"a{i}") for i in range(n_params))
    return ExpressionSystem(vids, pids, tuple(outputs))


def z2_minus(c):
    return _sys([sub(power(Var(0), 2), const(c))], 1)


def test_total_degree_start_univariate():
    start, pts = total_degree_start(z2_minus(2))
    assert start.evaluate([1.0]) == pytest.approx([0.0])
    assert sorted(p[0].real for p in pts) == pytest.approx([-1.0, 1.0])


def test_total_degree_start_counts(zeeman, fourbar, cfg):
    _, pts = total_degree_start(zeeman.critical_system().system, cfg)
    assert pts.shape == (128, 7)
    _, pts4 = total_degree_start(fourbar.critical_system().system, cfg)
    assert pts4.shape == (2048, 11)


def test_total_degree_start_rejects_nonsquare():
    sys_ = _sys([Var(0), Var(1)], 3)
    with pytest.raises(TrackingError, match="square"):
        total_degree_start(sys_)


def test_track_path_closed_form_roots(cfg):
    hom = Homotopy.total_degree(z2_minus(2), (), gamma=np.exp(0.61j))
    for z0, want in ((1.0, np.sqrt(2)), (-1.0, -np.sqrt(2))):
        sol = track_path(hom, [z0], cfg)
        assert sol.status == "regular"
        assert sol.point[0] == pytest.approx(want, abs=1e-10)
        assert sol.residual < 1e-12


def test_track_path_singular_double_root(cfg):
    # target z^2: the two start roots collide at the origin
    hom = Homotopy.total_degree(z2_minus(0), (), gamma=np.exp(0.61j))
    sol = track_path(hom, [1.0], cfg)
    assert sol.status == "singular"


def test_solve_total_degree_two_quadrics(cfg):
    sys_ = _sys([sub(power(Var(0), 2), const(1)), sub(power(Var(1), 2), const(4))], 2)
    res = solve_total_degree(sys_, cfg)
    assert len(res) == 4
    got = sorted((round(p[0].real), round(p[1].real)) for p in res.points())
    assert got == [(-1, -2), (-1, 2), (1, -2), (1, 2)]


def test_zeeman_equilibrium_count_and_residuals(zeeman, cfg, rng):
    y = list(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    crit = zeeman.critical_system()
    res = solve_total_degree(crit.system, cfg, params=y)
    assert len(res) == 16
    kern = crit.system.kernel(order=0)
    for s in res.solutions:
        fresh = np.max(np.abs(kern.values(list(s.point), y)))
        assert fresh < 1e-8


def test_bezout_bound_holds(zeeman, cfg, rng):
    y = list(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    res = solve_total_degree(zeeman.critical_system().system, cfg, params=y)
    assert res.report.n_distinct <= res.report.n_paths


def test_gamma_independence(zeeman, rng):
    y = list(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    crit = zeeman.critical_system().system
    a = solve_total_degree(crit, TrackerConfig(rng_seed=11), params=y)
    b = solve_total_degree(crit, TrackerConfig(rng_seed=99), params=y)
    assert len(a) == len(b)
    pa, pb = a.points(), b.points()
    for p in pa:
        assert min(np.max(np.abs(p - q)) for q in pb) < 1e-6


def test_dedup_idempotent_across_seeds(pendulum, rng):
    y = list(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    crit = pendulum.critical_system().system
    a = solve_total_degree(crit, TrackerConfig(rng_seed=5), params=y)
    b = solve_total_degree(crit, TrackerConfig(rng_seed=6), params=y)
    assert len(a) == len(b) == 6
    for p in a.points():
        assert min(np.max(np.abs(p - q)) for q in b.points()) < 1e-6


def test_parameter_homotopy_identity(zeeman, cfg, rng):
    y = list(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    crit = zeeman.critical_system().system
    res = solve_total_degree(crit, cfg, params=y)
    moved = parameter_homotopy(crit, y, res.solutions, y, cfg)
    assert len(moved.raw) == len(res)
    for a, b in zip(res.solutions, moved.raw):
        assert np.max(np.abs(a.point - b.point)) < 1e-10 * max(1, np.max(np.abs(a.point)))


def test_parameter_homotopy_cross_check(zeeman, cfg, rng):
    crit = zeeman.critical_system().system
    y0 = list(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    seed = solve_total_degree(crit, cfg, params=y0)
    y1 = [1.5, 2.5]
    moved = parameter_homotopy(crit, y0, seed.solutions, y1, cfg)
    fresh = solve_total_degree(crit, cfg, params=y1)
    assert len(moved) == len(fresh)
    for p in moved.points():
        assert min(np.max(np.abs(p - q)) for q in fresh.points()) < 1e-6


def test_monodromy_deck_transformation(cfg):
    # z^2 - a seeded with (a=1, z=1): the loop swaps the two roots
    sys_ = _sys([sub(power(Var(0), 2), Param(0))], 1, n_params=1)
    from tensicat.tracking import TrackedSolution

    seed = TrackedSolution(np.array([1.0 + 0j]), 0.0, 1.0, "regular")
    res = monodromy_solve(sys_, [1.0], [seed], cfg)
    assert len(res) == 2
    vals = sorted(p[0].real for p in res.points())
    assert vals == pytest.approx([-1.0, 1.0])


def test_monodromy_requires_seed(cfg):
    sys_ = _sys([sub(power(Var(0), 2), Param(0))], 1, n_params=1)
    with pytest.raises(TrackingError, match="seed"):
        monodromy_solve(sys_, [1.0], [], cfg)


def test_empty_system_has_the_empty_solution(cfg):
    sys_ = _sys([], 0)
    res = solve_total_degree(sys_, cfg)
    assert len(res) == 1
    assert res.solutions[0].point.shape == (0,)


def test_config_validation():
    with pytest.raises(ValueError):
        TrackerConfig(min_step=0.5, max_step=0.1)
    with pytest.raises(ValueError):
        TrackerConfig(newton_tol=-1)
