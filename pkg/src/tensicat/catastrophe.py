"""Catastrophe discriminant machinery: witness sets, slicing, sampling.

The discriminant is encoded numerically by a pseudo-witness set: the fold
system solved over one generic complex line in control space.  Every other
question reduces to parameter homotopies of that witness in the space of
line coefficients: intersecting with real lines and segments, sweeping a
region to sample the real catastrophe curve, and counting the degree.

Solving the witness itself goes by total degree when the Bezout count is
affordable and otherwise by monodromy, seeded from folds detected along a
sweep of the critical-point family (dips of the smallest singular value of
the Lagrangian Hessian, polished by Newton on the fold system).
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .frameworks import ControlSlice, FoldSystem, FrameworkModel
from .stability import SeedCache
from .tracking import (
    REGULAR,
    SolveResult,
    TrackedSolution,
    TrackerConfig,
    TrackingError,
    dedup_points,
    monodromy_solve,
    parameter_homotopy,
    solve_total_degree,
)

__all__ = [
    "CatastrophePoint",
    "PseudoWitnessSet",
    "DegenerateEnergy",
    "witness_on_generic_line",
    "catastrophe_degree",
    "intersect_slice",
    "sample_catastrophe",
    "crossing_parity_check",
    "witness_cache_dir",
]

REAL_TOL = 1e-6
BORDERLINE_DELTA = 1e-6


class DegenerateEnergy(RuntimeError):
    """The critical-point family is positive-dimensional; no finite witness."""


@dataclass
class CatastrophePoint:
    """One fold of the equilibrium family over a control line.

    ``degenerate`` marks points assembled from non-regular fold solutions
    (symmetric or otherwise special slice positions where fibers collide);
    their locations are still trustworthy, their certificates less so.
    """

    y: np.ndarray
    t: float
    line_id: int
    is_C: bool
    delta: np.ndarray
    delta_min: float
    residuals: dict
    borderline: bool
    witness_index: int
    degenerate: bool = False
    point: np.ndarray = field(repr=False, default=None)

    def as_row(self) -> list:
        return [
            *[float(v) for v in self.y],
            float(self.t),
            int(self.line_id),
            int(self.is_C),
            float(self.delta_min),
            float(self.residuals["dL"]),
        ]


@dataclass
class PseudoWitnessSet:
    fold: FoldSystem
    base: np.ndarray
    direction: np.ndarray
    solutions: np.ndarray  # (degree, 2n+1) complex
    complete: bool
    seconds: float
    n_degenerate: int = 0

    @property
    def degree(self) -> int:
        return self.solutions.shape[0]

    def params(self) -> list[complex]:
        return self.fold.line_params(self.base, self.direction)


# ---------------------------------------------------------------------------
# witness computation
# ---------------------------------------------------------------------------

def _check_finite_family(model: FrameworkModel, cfg: TrackerConfig) -> None:
    """Positive-dimensional critical families have no finite fold witness."""
    energy = model.algebraic_energy()
    if not energy.n_variables or energy.degrees()[0] <= 0:
        raise DegenerateEnergy(
            "the algebraic energy is constant: every configuration is critical "
            "and the catastrophe witness is not finite"
        )


def _random_complex_line(model: FrameworkModel, rng) -> tuple[np.ndarray, np.ndarray]:
    m = model.n_control
    if m == 1:
        # a 1-D control chart has a single line: the chart itself
        return np.zeros(1, dtype=complex), np.ones(1, dtype=complex)
    base = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    direction = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return base, direction


def _sweep_seeds(model: FrameworkModel, fold: FoldSystem, base, direction,
                 cfg: TrackerConfig, cache: SeedCache, n_samples: int = 160,
                 max_seeds: int = 24) -> np.ndarray:
    """Seed fold points for monodromy by sweeping the equilibrium family.

    Moves the generic critical-point seed along the complex line, watches the
    smallest singular value of the Lagrangian Hessian per branch, and Newton-
    polishes the dips on the full fold system.
    """
    crit = fold.critical
    n = crit.n_variables
    y0, pts = cache.seed(tuple(range(len(model.framework.cables))))
    rng = cfg.rng(30)
    ts = np.linspace(-1.5, 1.5, n_samples) + 1j * rng.uniform(-0.3, 0.3)
    kern = crit.system.kernel(order=1)
    fold_kern = fold.system.kernel(order=1)
    line_params = fold.line_params(base, direction)

    current = pts
    prev_y = y0
    sig_min = np.full((n_samples, pts.shape[0]), np.nan)
    vecs = np.full((n_samples, pts.shape[0], n), np.nan, dtype=complex)
    states = np.full((n_samples, pts.shape[0], n), np.nan, dtype=complex)
    for k, t in enumerate(ts):
        y_t = base + t * direction
        res = parameter_homotopy(crit.system, list(prev_y), current, list(y_t), cfg)
        keep = min(len(res.raw), current.shape[0])
        pts_t = np.array([s.point if s.status == REGULAR else np.full(n, np.nan)
                          for s in res.raw[:keep]])
        if pts_t.size == 0:
            break
        _, Jz, _ = kern.with_jac_batch(pts_t, list(y_t))
        U, S, Vh = np.linalg.svd(Jz)
        sig_min[k, : pts_t.shape[0]] = S[:, -1]
        vecs[k, : pts_t.shape[0]] = Vh[:, -1, :].conj()
        states[k, : pts_t.shape[0]] = pts_t
        current = pts_t
        prev_y = y_t

    # dips of sigma_min per branch
    cands = []
    for b in range(sig_min.shape[1]):
        s = sig_min[:, b]
        for k in range(1, n_samples - 1):
            if np.isnan(s[k - 1 : k + 2]).any():
                continue
            if s[k] < s[k - 1] and s[k] < s[k + 1]:
                cands.append((s[k], k, b))
    cands.sort()
    seeds = []
    for _, k, b in cands[: 4 * max_seeds]:
        z = states[k, b]
        v = vecs[k, b]
        scale = complex(np.dot(np.asarray(fold.chart), v))
        if abs(scale) < 1e-12:
            continue
        v = v / scale
        guess = np.concatenate([z, v, [ts[k]]])
        polished = _newton_polish(fold_kern, guess, line_params, cfg)
        if polished is not None:
            seeds.append(polished)
            if len(seeds) >= max_seeds:
                break
    if not seeds:
        raise TrackingError("fold sweep found no seeds for the witness monodromy")
    arr = np.array(seeds)
    return arr[dedup_points(arr, cfg.dedup_tol)]


def _newton_polish(kern, z0: np.ndarray, params, cfg: TrackerConfig,
                   iters: int = 25) -> np.ndarray | None:
    Z = z0.reshape(1, -1).astype(complex)
    for _ in range(iters):
        F, J, _ = kern.with_jac_batch(Z, params)
        try:
            dz = np.linalg.solve(J[0], -F[0])
        except np.linalg.LinAlgError:
            return None
        Z = Z + dz
        if not np.all(np.isfinite(Z)):
            return None
        if np.max(np.abs(dz)) < cfg.newton_tol * max(1.0, np.max(np.abs(Z))):
            F, _, _ = kern.with_jac_batch(Z, params)
            if np.max(np.abs(F)) < 1e-8:
                return Z[0]
            return None
    return None


def witness_on_generic_line(model: FrameworkModel, cfg: TrackerConfig | None = None,
                            cache: SeedCache | None = None,
                            rng_tag: int = 0,
                            budget: int = 100_000) -> PseudoWitnessSet:
    """Pseudo-witness set of the catastrophe discriminant on a random line.

    Total degree when the Bezout count of the fold system fits the budget,
    otherwise monodromy seeded from a fold sweep; the returned set carries a
    ``complete`` flag from the solve.
    """
    cfg = cfg or TrackerConfig()
    cache = cache or SeedCache(model, cfg)
    _check_finite_family(model, cfg)
    began = time.perf_counter()
    fold = model.fold_system(rng=cfg.rng(31))
    rng = cfg.rng(32, rng_tag)
    base, direction = _random_complex_line(model, rng)
    params = fold.line_params(base, direction)
    bezout = int(np.prod(fold.system.degrees()))
    n_degenerate = 0
    if bezout <= budget:
        result = solve_total_degree(fold.system, cfg, params=params)
        pts = result.points()
        # Non-generic frameworks (tension-boundary folds, symmetric strata)
        # put isolated multiple solutions of the fold system on top of each
        # other: several paths converge to one well-satisfied point that the
        # endpoint classifier calls singular.  Those are kept as degenerate
        # witness members.  Lone singular endpoints are NOT kept: they sit on
        # positive-dimensional strata (non-unique null vectors), where paths
        # land scattered, and carry no witness cardinality.
        kern = fold.system.kernel(order=0)
        extra = []
        for sol in result.raw:
            if sol.status != "singular":
                continue
            z = sol.point
            if not np.all(np.isfinite(z)):
                continue
            res = float(np.max(np.abs(kern.values(list(z), params))))
            if res < 1e-8 * max(1.0, float(np.max(np.abs(z)))):
                extra.append(z)
        if extra:
            arr = np.array(extra)
            tol = max(cfg.dedup_tol, 1e-4)
            reps = dedup_points(arr, tol)
            clustered = []
            for r in reps:
                size = sum(
                    1 for i in range(arr.shape[0])
                    if np.max(np.abs(arr[i] - arr[r]))
                    < tol * max(1.0, float(np.max(np.abs(arr[r]))))
                )
                if size >= 2:
                    clustered.append(arr[r])
            if clustered:
                merged = (np.vstack([pts, np.array(clustered)])
                          if pts.size else np.array(clustered))
                reps2 = dedup_points(merged, tol)
                n_degenerate = len(reps2) - (pts.shape[0] if pts.size else 0)
                if n_degenerate > 0:
                    pts = merged[reps2]
                else:
                    n_degenerate = 0
        complete = True
    else:
        seeds = _sweep_seeds(model, fold, base, direction, cfg, cache)
        result = monodromy_solve(fold.system, params, seeds, cfg,
                                 max_loops=80, settle=8)
        pts = result.points()
        complete = result.report.complete
    return PseudoWitnessSet(
        fold=fold,
        base=np.asarray(base, dtype=complex),
        direction=np.asarray(direction, dtype=complex),
        solutions=pts,
        complete=complete,
        seconds=time.perf_counter() - began,
        n_degenerate=n_degenerate,
    )


def catastrophe_degree(model: FrameworkModel, cfg: TrackerConfig | None = None,
                       cache: SeedCache | None = None) -> int:
    """Degree of the catastrophe discriminant, cross-validated on two lines."""
    cfg = cfg or TrackerConfig()
    cache = cache or SeedCache(model, cfg)
    w1 = witness_on_generic_line(model, cfg, cache, rng_tag=0)
    w2 = witness_on_generic_line(model, cfg, cache, rng_tag=1)
    if w1.degree != w2.degree:
        raise TrackingError(
            f"catastrophe degree disagrees between lines: {w1.degree} vs {w2.degree}"
        )
    return w1.degree


# ---------------------------------------------------------------------------
# slicing and sampling
# ---------------------------------------------------------------------------

def intersect_slice(witness: PseudoWitnessSet, target: ControlSlice,
                    cfg: TrackerConfig | None = None, line_id: int = 0,
                    segment_only: bool = False) -> tuple[list[CatastrophePoint], bool]:
    """Intersection points of the discriminant with a real line or segment.

    Moves every witness point by a parameter homotopy in line-coefficient
    space, keeps real endpoints, and labels each with the delta >= 0 test
    that separates catastrophe-set membership from the rest of the real
    discriminant.  Returns (points, complete).
    """
    if target.dim != 1:
        raise ValueError("target slice must be one-dimensional")
    cfg = cfg or TrackerConfig()
    fold = witness.fold
    tgt_params = fold.line_params(target.base, target.directions[0])
    res = parameter_homotopy(fold.system, witness.params(), witness.solutions,
                             tgt_params, cfg)
    complete = res.report.n_failed == 0 and res.report.n_diverged == 0
    n = fold.n_core
    crit = fold.critical
    kern = fold.system.kernel(order=0)

    # Collect real fiber points first.  Non-generic target lines (symmetry
    # axes, tangents) make fibers collide into non-regular solutions of the
    # fold system; those still locate the intersection, so small-residual
    # singular endpoints are kept and flagged.
    fibers = []
    for w_idx, sol in enumerate(res.raw):
        if sol.status not in (REGULAR, "singular"):
            continue
        z = sol.point
        core = z[:n]
        t = z[2 * n]
        scale = max(1.0, float(np.max(np.abs(core))), abs(t))
        if abs(t.imag) > REAL_TOL * scale:
            continue
        if float(np.max(np.abs(core.imag))) > REAL_TOL * scale:
            continue
        hvals = kern.values(list(z), tgt_params)
        res_dl = float(np.max(np.abs(hvals[:n]))) if n else 0.0
        res_h = float(np.max(np.abs(hvals[n : 2 * n]))) if n else 0.0
        res_chart = float(abs(hvals[2 * n]))
        if max(res_dl, res_h, res_chart) > 1e-7 * scale:
            continue
        t_re = float(t.real)
        if segment_only and not (-1e-9 <= t_re <= 1 + 1e-9):
            continue
        fibers.append((t_re, w_idx, z, (res_dl, res_h, res_chart),
                       sol.status != REGULAR))

    # Group fibers over the same slice position: catastrophe-set membership
    # asks for the existence of one nonnegative-delta fiber point.
    fibers.sort(key=lambda f: f[0])
    groups: list[list] = []
    for f in fibers:
        if groups and abs(f[0] - groups[-1][-1][0]) < 1e-7 * max(1.0, abs(f[0])):
            groups[-1].append(f)
        else:
            groups.append([f])

    out: list[CatastrophePoint] = []
    for grp in groups:
        best = None
        best_min = -np.inf
        degenerate = False
        for t_re, w_idx, z, resids, degen in grp:
            degenerate = degenerate or degen
            _, deltas, _ = crit.split(z[:n].real)
            dmin = float(np.min(deltas)) if deltas.size else np.inf
            if dmin > best_min:
                best_min = dmin
                best = (t_re, w_idx, z, resids, deltas)
        t_re, w_idx, z, resids, deltas = best
        y = np.asarray(target.base) + t_re * np.asarray(target.directions[0])
        out.append(
            CatastrophePoint(
                y=y,
                t=t_re,
                line_id=line_id,
                is_C=bool(np.all(deltas >= -BORDERLINE_DELTA)),
                delta=deltas.copy(),
                delta_min=best_min,
                residuals={"dL": resids[0], "d2L_v": resids[1], "chart": resids[2]},
                borderline=bool(np.any(np.abs(deltas) < BORDERLINE_DELTA)),
                witness_index=w_idx,
                degenerate=degenerate,
                point=z.copy(),
            )
        )
    return out, complete


def sample_catastrophe(model: FrameworkModel, witness: PseudoWitnessSet,
                       rect: tuple[float, float, float, float], n_lines: int,
                       cfg: TrackerConfig | None = None) -> list[CatastrophePoint]:
    """Point sample of the real discriminant inside a control rectangle.

    Sweeps alternating axis-parallel pencils through jittered offsets plus
    random orientations; every accepted point is labeled is_C by the
    delta >= 0 membership test.  Deterministic for a fixed seed.
    """
    if model.n_control != 2:
        raise ValueError("sampling needs a 2-D control chart")
    cfg = cfg or TrackerConfig()
    rng = cfg.rng(33)
    x0, x1, y0, y1 = rect
    points: list[CatastrophePoint] = []
    for k in range(n_lines):
        mode = k % 3
        jx = rng.uniform(x0, x1)
        jy = rng.uniform(y0, y1)
        if mode == 0:
            base, direction = [jx, y0], [0.0, y1 - y0]
        elif mode == 1:
            base, direction = [x0, jy], [x1 - x0, 0.0]
        else:
            ang = rng.uniform(0, np.pi)
            base = [jx, jy]
            direction = [np.cos(ang) * (x1 - x0), np.sin(ang) * (y1 - y0)]
        slc = ControlSlice(base=tuple(base), directions=(tuple(direction),))
        try:
            pts, _ = intersect_slice(witness, slc, cfg, line_id=k)
        except TrackingError:
            continue
        for p in pts:
            if x0 - 1e-9 <= p.y[0] <= x1 + 1e-9 and y0 - 1e-9 <= p.y[1] <= y1 + 1e-9:
                points.append(p)
    return points


def crossing_parity_check(samples: Sequence[CatastrophePoint],
                          probes: Sequence[tuple[np.ndarray, np.ndarray]],
                          stability_counts: Sequence[tuple[int, int]],
                          tube_radius: float = 0.05) -> list[dict]:
    """Diagnostic: segment crossings of the sampled curve vs count changes.

    For each probe pair, counts sampled catastrophe points lying within
    ``tube_radius`` of the connecting segment (projected parameter in (0,1)),
    and reports whether equal stability counts at the ends coincide with an
    even crossing parity.
    """
    out = []
    pts = np.array([p.y for p in samples if p.is_C]) if samples else np.zeros((0, 2))
    for (a, b), (na, nb) in zip(probes, stability_counts):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        d = b - a
        L2 = float(d @ d)
        crossings = 0
        if L2 > 0 and pts.size:
            s = ((pts - a) @ d) / L2
            proj = a + s[:, None] * d
            dist = np.linalg.norm(pts - proj, axis=1)
            crossings = int(np.sum((s > 0) & (s < 1) & (dist < tube_radius)))
        agree = (na == nb) == (crossings % 2 == 0)
        out.append(
            {
                "a": a.tolist(),
                "b": b.tolist(),
                "n_a": int(na),
                "n_b": int(nb),
                "crossings_in_tube": crossings,
                "parity_consistent": bool(agree),
            }
        )
    return out


# ---------------------------------------------------------------------------
# on-disk witness cache
# ---------------------------------------------------------------------------

def witness_cache_dir() -> Path:
    env = os.environ.get("TENSICAT_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "tensicat"


def framework_hash(doc: dict | str) -> str:
    if isinstance(doc, dict):
        doc = json.dumps(doc, sort_keys=True)
    return hashlib.sha256(doc.encode()).hexdigest()[:16]


def save_witness(witness: PseudoWitnessSet, key: str, seed: int) -> Path:
    path = witness_cache_dir() / f"witness_{key}_{seed}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "key": key,
        "seed": seed,
        "chart": [[c.real, c.imag] for c in witness.fold.chart],
        "base": [[c.real, c.imag] for c in witness.base],
        "direction": [[c.real, c.imag] for c in witness.direction],
        "solutions": [
            [[v.real, v.imag] for v in row] for row in witness.solutions
        ],
        "complete": witness.complete,
        "seconds": witness.seconds,
    }
    path.write_text(json.dumps(doc))
    return path


def load_witness(model: FrameworkModel, key: str, seed: int) -> PseudoWitnessSet | None:
    path = witness_cache_dir() / f"witness_{key}_{seed}.json"
    if not path.exists():
        return None
    doc = json.loads(path.read_text())
    chart = tuple(complex(a, b) for a, b in doc["chart"])
    fold = model.fold_system(chart=chart)
    sols = np.array(
        [[complex(a, b) for a, b in row] for row in doc["solutions"]], dtype=complex
    )
    if sols.ndim != 2 or sols.shape[1] != fold.system.n_variables:
        return None
    return PseudoWitnessSet(
        fold=fold,
        base=np.array([complex(a, b) for a, b in doc["base"]]),
        direction=np.array([complex(a, b) for a, b in doc["direction"]]),
        solutions=sols,
        complete=bool(doc["complete"]),
        seconds=float(doc.get("seconds", 0.0)),
    )
