"""Acceptance suite: one test per criterion, each printing a verdict line.

Criterion 4 (the four-bar discriminant degree cross-validated on a second
line) runs only when RUN_LONG=1 is set, matching its long-run budget; a
single four-bar witness is still computed for the jump scenario either way.
"""

import os
import time

import numpy as np
import pytest

from tensicat.catastrophe import intersect_slice, sample_catastrophe, witness_on_generic_line
from tensicat.expressions import hessian_of_scalar, jacobian
from tensicat.frameworks import ControlSlice, bundled_path, load_framework_file
from tensicat.lifting import ControlPath, hysteresis_probe, lift_path
from tensicat.oracles import count_change_bisect, make_oracle
from tensicat.stability import SeedCache, stability_set
from tensicat.tracking import TrackerConfig, parameter_homotopy, solve_total_degree


def _verdict(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    assert ok, line


# -- 1. Zeeman equilibrium degree ------------------------------------------

def test_criterion_01_zeeman_equilibrium_degree(zeeman, cfg):
    crit = zeeman.critical_system()
    crit.system.kernel(order=1)  # compile outside the timed region
    began = time.perf_counter()
    counts = []
    for tag in (0, 1):
        rng = np.random.default_rng([41, tag])
        y = list(rng.standard_normal(2) + 1j * rng.standard_normal(2))
        res = solve_total_degree(crit.system, cfg, params=y)
        kern = crit.system.kernel(order=0)
        assert all(
            np.max(np.abs(kern.values(list(s.point), y))) < 1e-8 for s in res.solutions
        )
        assert res.report.n_paths == 128
        counts.append(len(res))
    seconds = time.perf_counter() - began
    _verdict(
        1,
        counts == [16, 16] and seconds < 5.0,
        f"counts {counts} from 128 paths at two complex points in {seconds:.2f}s (< 5s)",
    )


# -- 2. Four-bar equilibrium degree ----------------------------------------

def test_criterion_02_fourbar_equilibrium_degree(fourbar):
    crit = fourbar.critical_system()
    crit.system.kernel(order=1)
    began = time.perf_counter()
    counts = []
    for seed in (1, 2):
        cfg = TrackerConfig(rng_seed=seed)
        rng = np.random.default_rng([42, seed])
        y = list(rng.standard_normal(2) + 1j * rng.standard_normal(2))
        counts.append(len(solve_total_degree(crit.system, cfg, params=y)))
    seconds = time.perf_counter() - began
    _verdict(
        2,
        counts == [64, 64] and seconds < 60.0,
        f"counts {counts} across two seeds in {seconds:.1f}s (< 60s)",
    )


# -- 3. Zeeman catastrophe degree ------------------------------------------

def test_criterion_03_zeeman_catastrophe_degree(zeeman_witnesses):
    (w1, t1), (w2, t2) = zeeman_witnesses
    _verdict(
        3,
        w1.degree == 72 and w2.degree == 72 and (t1 + t2) < 300.0,
        f"witness degrees {w1.degree}/{w2.degree} on two lines in "
        f"{t1 + t2:.0f}s (< 300s)",
    )


# -- 4. Four-bar catastrophe degree (long-running) --------------------------

@pytest.mark.slow
@pytest.mark.skipif(not os.environ.get("RUN_LONG"),
                    reason="30-minute budget; set RUN_LONG=1 to run")
def test_criterion_04_fourbar_catastrophe_degree(fourbar, fourbar_cache, cfg,
                                                 fourbar_witness):
    began = time.perf_counter()
    w2 = witness_on_generic_line(fourbar, cfg, fourbar_cache, rng_tag=1)
    seconds = time.perf_counter() - began + fourbar_witness.build_seconds
    _verdict(
        4,
        fourbar_witness.degree == 288 and w2.degree == 288 and seconds < 1800.0,
        f"witness degrees {fourbar_witness.degree}/{w2.degree} via monodromy in "
        f"{seconds:.0f}s (< 1800s)",
    )


# -- 5. Oracle equivalence of |S_y| (Zeeman) --------------------------------

def test_criterion_05_zeeman_oracle_equivalence(zeeman, zeeman_cache, cfg,
                                                zeeman_taut_samples):
    oracle = make_oracle(zeeman)
    curve = np.array([p.y for p in zeeman_taut_samples if p.is_C])
    exclusion = 2 * (8.0 / 80)  # two cells of an 80-point grid over [-4,4]
    rng = np.random.default_rng(55)
    points = [np.array(p) for p in
              ([-1.8, 0.9], [3.0, 3.0], [0.9, -0.45], [-3.0, -3.0], [0.0, -3.0])]
    while len(points) < 25:
        y = rng.uniform(-4, 4, 2)
        if curve.size and np.min(np.linalg.norm(curve - y, axis=1)) < exclusion:
            continue
        points.append(y)
    observed = []
    for y in points:
        n_solver = stability_set(zeeman, list(y), zeeman_cache, cfg).n_stable
        n_oracle = oracle.count_strict_minima(list(y), 10_000)
        assert n_solver == n_oracle, f"{y}: solver {n_solver} vs oracle {n_oracle}"
        observed.append(n_solver)
    _verdict(
        5,
        {1, 2} <= set(observed),
        f"25 control points match the scan oracle exactly; counts seen "
        f"{sorted(set(observed))} include the two-minima regime",
    )


# -- 6. Oracle equivalence (four-bar) ---------------------------------------

def test_criterion_06_fourbar_oracle_equivalence(fourbar, fourbar_cache, cfg):
    oracle = make_oracle(fourbar)
    rng = np.random.default_rng(56)
    observed = []
    checked = 0
    while checked < 10:
        y = rng.uniform([-1.5, -4.5], [3.0, -0.5])
        n_oracle = oracle.count_strict_minima(list(y), 8000)
        # a point this close to a fold is not generic; resample
        probe = oracle.count_strict_minima(list(y + 1e-3), 8000)
        if probe != n_oracle:
            continue
        n_solver = stability_set(fourbar, list(y), fourbar_cache, cfg).n_stable
        assert n_solver == n_oracle, f"{y}: solver {n_solver} vs oracle {n_oracle}"
        observed.append(n_solver)
        checked += 1
    _verdict(
        6,
        set(observed) <= {2, 3, 4} and len(set(observed)) >= 2,
        f"10 control points match the coupler-curve oracle; counts {sorted(set(observed))}"
        " within the typical set {2,3,4}",
    )


# -- 7. Catastrophe sample separates chambers -------------------------------

def test_criterion_07_probe_parity(zeeman, zeeman_cache, cfg, zeeman_witness,
                                   zeeman_taut_samples):
    oracle = make_oracle(zeeman)
    taut = np.array([p.y for p in zeeman_taut_samples
                     if p.is_C and p.delta_min >= 1.0])
    probes = []
    # odd-parity probes straddling one sampled branch
    for i in range(len(taut)):
        if len(probes) >= 10:
            break
        d = np.linalg.norm(taut - taut[i], axis=1)
        near = taut[(d < 0.35) & (d > 1e-9)]
        if len(near) < 3:
            continue
        M = near - near.mean(0)
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[0] < 5 * max(sv[-1], 1e-9):
            continue
        _, _, Vt = np.linalg.svd(M, full_matrices=False)
        n_hat = Vt[-1]
        probes.append((taut[i] - 0.15 * n_hat, taut[i] + 0.15 * n_hat))
    assert len(probes) == 10
    rng = np.random.default_rng(57)
    # even-parity probes inside the far single-minimum chamber
    while len(probes) < 20:
        a = rng.uniform([1.5, 1.5], [4.0, 4.0])
        b = a + rng.uniform(-0.5, 0.5, 2)
        probes.append((a, b))

    max_dt = 0.0
    for a, b in probes:
        seg = ControlSlice(base=tuple(a), directions=(tuple(b - a),))
        crossings, _ = intersect_slice(zeeman_witness, seg, cfg, segment_only=True)
        taut_cross = [c for c in crossings if c.is_C and c.delta_min >= 1.0]
        parity = len(taut_cross) % 2
        na = oracle.count_strict_minima(list(a), 10_000)
        nb = oracle.count_strict_minima(list(b), 10_000)
        assert (na != nb) == (parity == 1), (
            f"probe {a}->{b}: counts {na},{nb} vs {len(taut_cross)} crossings"
        )
        if len(taut_cross) == 1 and na != nb:
            t_star = count_change_bisect(
                lambda y: oracle.count_strict_minima(list(y), 10_000),
                lambda s: a + s * (b - a), 0.0, 1.0, tol=1e-7,
            )
            dt = abs(t_star - taut_cross[0].t)
            max_dt = max(max_dt, dt)
            assert dt < 1e-3, f"crossing at {taut_cross[0].t} vs oracle {t_star}"
    _verdict(
        7,
        True,
        f"20 probes: parity matches count changes; worst crossing offset "
        f"{max_dt:.2e} (< 1e-3)",
    )


# -- 8. Hysteresis loop ------------------------------------------------------

def test_criterion_08_hysteresis(zeeman, zeeman_cache, cfg, zeeman_witness,
                                 zeeman_taut_samples):
    taut = np.array([p.y for p in zeeman_taut_samples
                     if p.is_C and p.delta_min >= 1.0])
    axis = np.array([2.0, -1.0]) / np.sqrt(5)
    cusp = taut[np.argmin(taut @ axis)]
    radius = 0.4 * np.linalg.norm(cusp - taut.mean(0))
    angles = np.linspace(0, 2 * np.pi, 13)
    loop = ControlPath(tuple(
        tuple(cusp + radius * np.array([np.cos(a), np.sin(a)])) for a in angles
    ))
    rep = stability_set(zeeman, list(loop.waypoints[0]), zeeman_cache, cfg)
    x0 = rep.stable[0][0].x
    moved, result = hysteresis_probe(zeeman, loop, x0, zeeman_witness,
                                     zeeman_cache, cfg)
    dx = float(np.linalg.norm(result.trajectory[-1].point.x - x0))
    crossings = [e for e in result.events if e.kind == "catastrophe_crossing"]

    far = np.array([3.0, 2.0])
    interior = ControlPath(tuple(
        tuple(far + 0.3 * np.array([np.cos(a), np.sin(a)])) for a in angles
    ))
    rep2 = stability_set(zeeman, list(interior.waypoints[0]), zeeman_cache, cfg)
    moved2, result2 = hysteresis_probe(zeeman, interior, rep2.stable[0][0].x,
                                       zeeman_witness, zeeman_cache, cfg)
    dx2 = float(np.linalg.norm(result2.trajectory[-1].point.x - rep2.stable[0][0].x))
    _verdict(
        8,
        moved and dx > 0.1 and len(crossings) >= 1 and not moved2 and dx2 < 1e-6,
        f"cusp loop: |dx|={dx:.3f} (> 0.1) with {len(crossings)} crossings; "
        f"interior loop returns within {dx2:.1e} (< 1e-6)",
    )


# -- 9. Four-bar jump scenario ----------------------------------------------

def test_criterion_09_fourbar_jump(fourbar, fourbar_cache, cfg, fourbar_witness):
    oracle = make_oracle(fourbar)
    pts = sample_catastrophe(fourbar, fourbar_witness, (-2.0, 4.0, -4.0, 1.0), 40, cfg)
    taut = [p for p in pts if p.is_C and p.delta_min >= 0.1]
    ys = np.array([p.y for p in taut])
    probe = None
    for i in range(len(taut)):
        d = np.linalg.norm(ys - ys[i], axis=1)
        near = ys[(d < 0.35) & (d > 1e-9)]
        if len(near) < 3:
            continue
        M = near - near.mean(0)
        _, _, Vt = np.linalg.svd(M, full_matrices=False)
        a = ys[i] + 0.3 * Vt[-1]
        b = ys[i] - 0.3 * Vt[-1]
        na = stability_set(fourbar, list(a), fourbar_cache, cfg).n_stable
        nb = stability_set(fourbar, list(b), fourbar_cache, cfg).n_stable
        if na != nb and min(na, nb) >= 1:
            probe = (a, b) if na > nb else (b, a)
            break
    assert probe is not None, "no usable fold probe found in the sampled region"
    a, b = probe
    rep = stability_set(fourbar, list(a), fourbar_cache, cfg)
    path = ControlPath((tuple(a), tuple(b)))
    outcome = None
    for p0, _ in rep.stable:
        res = lift_path(fourbar, path, p0.x, fourbar_witness, fourbar_cache, cfg)
        jumps = [e for e in res.events if e.details.get("jumped")]
        if jumps:
            x_end = res.trajectory[-1].point.x
            basin_before = oracle.basin_of(list(b), p0.x)
            basin_after = oracle.basin_of(list(b), x_end)
            outcome = (len(jumps), basin_before, basin_after)
            break
    assert outcome is not None, "no tracked minimum died crossing the fold"
    n_jumps, basin_before, basin_after = outcome
    _verdict(
        9,
        n_jumps == 1 and basin_before != basin_after,
        f"drag across the sampled fold: {n_jumps} jump event; oracle basins "
        f"{basin_before} -> {basin_after} differ",
    )


# -- 10. Derivative correctness ----------------------------------------------

def test_criterion_10_derivatives_vs_finite_differences(rng):
    worst = 0.0
    for name in ("zeeman", "fourbar", "pendulum"):
        model, _ = load_framework_file(bundled_path(name))
        for system in (model.critical_system().system,
                       model.algebraic_constraints()):
            jac = jacobian(system)
            nv, npar = system.n_variables, system.n_parameters
            for _ in range(20):
                z = rng.standard_normal(nv) + 1j * rng.standard_normal(nv)
                y = rng.standard_normal(npar) + 1j * rng.standard_normal(npar)
                J = jac(z, y)
                h = 1e-7
                for v in range(nv):
                    dz = np.zeros(nv, complex)
                    dz[v] = h
                    fd = (system.evaluate(z + dz, y) - system.evaluate(z - dz, y)) / (2 * h)
                    denom = np.maximum(np.abs(J[:, v]), 1.0)
                    worst = max(worst, float(np.max(np.abs(fd - J[:, v]) / denom)))
        energy = model.algebraic_energy()
        hess = hessian_of_scalar(energy)
        jac_e = jacobian(energy)
        for _ in range(20):
            z = rng.standard_normal(energy.n_variables) + 1j * rng.standard_normal(energy.n_variables)
            y = rng.standard_normal(energy.n_parameters) + 1j * rng.standard_normal(energy.n_parameters)
            H = hess(z, y)
            h = 1e-7
            for v in range(energy.n_variables):
                dz = np.zeros(energy.n_variables, complex)
                dz[v] = h
                fd = (jac_e(z + dz, y) - jac_e(z - dz, y))[0] / (2 * h)
                denom = np.maximum(np.abs(H[:, v]), 1.0)
                worst = max(worst, float(np.max(np.abs(fd - H[:, v]) / denom)))
    _verdict(
        10,
        worst < 1e-6,
        f"all Jacobians/Hessians match central differences; worst relative "
        f"error {worst:.2e} (< 1e-6)",
    )


# -- 11. Parameter-homotopy consistency --------------------------------------

def test_criterion_11_parameter_homotopy_consistency(zeeman, fourbar, cfg):
    rng = np.random.default_rng(58)
    speedups = {}
    for name, model, box in (
        ("zeeman", zeeman, ([-4, -4], [4, 4])),
        ("fourbar", fourbar, ([-2, -4], [4, 1])),
    ):
        crit = model.critical_system()
        y0 = rng.standard_normal(model.n_control) + 1j * rng.standard_normal(model.n_control)
        seed = solve_total_degree(crit.system, cfg, params=list(y0))
        t_param = 0.0
        t_fresh = 0.0
        for _ in range(10):
            y1 = list(rng.uniform(box[0], box[1]))
            t0 = time.perf_counter()
            moved = parameter_homotopy(crit.system, list(y0), seed.solutions, y1, cfg)
            t_param += time.perf_counter() - t0
            t0 = time.perf_counter()
            fresh = solve_total_degree(crit.system, cfg, params=y1)
            t_fresh += time.perf_counter() - t0
            assert len(moved) == len(fresh), f"{name} at {y1}"
            fp = fresh.points()
            for p in moved.points():
                assert min(np.max(np.abs(p - q)) for q in fp) < 1e-6
        speedups[name] = t_fresh / max(t_param, 1e-9)
    _verdict(
        11,
        speedups["fourbar"] >= 5.0,
        f"endpoint sets equal fresh solves at 10 real points per example; "
        f"four-bar speedup {speedups['fourbar']:.1f}x (>= 5x), "
        f"zeeman {speedups['zeeman']:.1f}x",
    )
