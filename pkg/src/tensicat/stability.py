"""From complex critical points to certified stable equilibria.

The algebraic model replaces each cable length by a slack variable, so its
critical points live in (x, delta, lambda) space.  This module filters the
complex solutions to real ones, certifies strict local minimality through
the projected Hessian (the Lagrangian Hessian compressed onto the null
space of the constraint Jacobian), and assembles stability sets.

Hooke cables carry no force once slack, so an equilibrium whose cable
distances drop below the rest lengths belongs to a reduced model with those
cables removed.  Stability sets are therefore computed per tension stratum:
every subset of cables is solved with the others deleted, and a stratum
point is physical exactly when its kept cables are taut and its dropped
cables are slack.  The full-cable stratum is the primary system; reduced
strata only contribute in slack regimes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import qr as _qr

from .expressions import ExpressionSystem, hessian_of_scalar, jacobian
from .frameworks import CriticalSystem, FrameworkModel
from .tracking import (
    REGULAR,
    SolveResult,
    TrackedSolution,
    TrackerConfig,
    TrackingError,
    parameter_homotopy,
    solve_total_degree,
)

__all__ = [
    "CriticalPoint",
    "StabilityCertificate",
    "StabilityReport",
    "SeedCache",
    "ConstraintSingularity",
    "real_filter",
    "certify_stability",
    "stability_set",
    "equilibrium_degree",
    "chamber_scan",
]

REAL_TOL = 1e-8
BOUNDARY_TOL = 1e-7


class ConstraintSingularity(RuntimeError):
    """The constraint Jacobian lost rank at a critical point."""


@dataclass
class CriticalPoint:
    """One real critical point, mapped back to full framework shape.

    ``delta`` and ``tension`` cover every cable of the framework; cables not
    in the point's stratum carry their geometric distance and a zero
    multiplier.
    """

    x: np.ndarray
    delta: np.ndarray
    lam: np.ndarray
    energy: float
    tension: tuple[bool, ...]
    delta_nonneg: bool
    stratum: tuple[int, ...]
    residual: float
    raw: np.ndarray = field(repr=False, default=None)

    def as_dict(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "delta": [float(v) for v in self.delta],
            "lambda": [float(v) for v in self.lam],
            "energy": self.energy,
            "tension": list(self.tension),
            "delta_nonneg": self.delta_nonneg,
            "stratum": list(self.stratum),
            "residual": self.residual,
        }


@dataclass
class StabilityCertificate:
    projected_hessian: np.ndarray
    min_eigenvalue: float
    null_basis_dim: int
    verdict: str  # stable | unstable | borderline

    def as_dict(self) -> dict:
        return {
            "min_eigenvalue": self.min_eigenvalue,
            "null_basis_dim": self.null_basis_dim,
            "verdict": self.verdict,
        }


@dataclass
class StabilityReport:
    y: np.ndarray
    all_critical: list[CriticalPoint]
    stable: list[tuple[CriticalPoint, StabilityCertificate]]
    n_complex: int
    n_real: int
    n_delta_nonneg: int
    warnings: list[str] = field(default_factory=list)

    @property
    def n_stable(self) -> int:
        return len(self.stable)

    def stable_points(self) -> list[CriticalPoint]:
        return [p for p, _ in self.stable]

    def as_dict(self) -> dict:
        return {
            "y": [float(v) for v in self.y],
            "counts": {
                "n_complex": self.n_complex,
                "n_real": self.n_real,
                "n_delta_nonneg": self.n_delta_nonneg,
                "n_stable": self.n_stable,
            },
            "all_critical": [p.as_dict() for p in self.all_critical],
            "stable": [
                {**p.as_dict(), "certificate": c.as_dict()} for p, c in self.stable
            ],
            "warnings": self.warnings,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.as_dict(), **kw)


# ---------------------------------------------------------------------------
# per-stratum machinery
# ---------------------------------------------------------------------------

class _StratumOps:
    """Compiled evaluators for one tension stratum of a framework."""

    def __init__(self, model: FrameworkModel, stratum: tuple[int, ...]):
        self.model = model
        self.stratum = stratum
        self.crit: CriticalSystem = model.critical_system(stratum)
        g = model.algebraic_constraints(stratum)
        q = model.algebraic_energy(stratum)
        self.n_xd = g.n_variables
        self.n_edges = g.n_outputs
        self.dg = jacobian(g)
        self.hess_q = hessian_of_scalar(q)
        self.hess_g = [
            hessian_of_scalar(ExpressionSystem(g.variables, g.parameters, (out,)))
            for out in g.outputs
        ]

    def hessian(self, xd: np.ndarray, lam: np.ndarray, y) -> np.ndarray:
        H = self.hess_q(xd, y)
        for lk, hg in zip(lam, self.hess_g):
            H = H + lk * hg(xd, y)
        return np.real(H)


def _ops(model: FrameworkModel, stratum: Sequence[int]) -> _StratumOps:
    key = ("stability_ops", tuple(sorted(stratum)))
    if key not in model.aux_cache:
        model.aux_cache[key] = _StratumOps(model, tuple(sorted(stratum)))
    return model.aux_cache[key]


def _strata(model: FrameworkModel, max_cables: int = 6) -> list[tuple[int, ...]]:
    """All nonempty cable subsets, full stratum first; [()] if no cables."""
    n = len(model.framework.cables)
    if n == 0:
        return [()]
    if n > max_cables:
        return [tuple(range(n))]
    full = tuple(range(n))
    rest = []
    for mask in range(1, 2**n - 1):
        rest.append(tuple(i for i in range(n) if mask >> i & 1))
    rest.sort(key=lambda s: -len(s))
    return [full] + rest


# ---------------------------------------------------------------------------
# seeds
# ---------------------------------------------------------------------------

class SeedCache:
    """Generic complex seed solutions of each stratum's critical system.

    Parameter homotopy from these seeds tracks only as many paths as the
    stratum's equilibrium degree, which is what makes repeated stability
    queries cheap.
    """

    def __init__(self, model: FrameworkModel, cfg: TrackerConfig | None = None):
        self.model = model
        self.cfg = cfg or TrackerConfig()
        self._seeds: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]] = {}

    def seed(self, stratum: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
        key = tuple(sorted(stratum))
        if key not in self._seeds:
            crit = self.model.critical_system(key)
            rng = self.cfg.rng(10, len(key), *key)
            m = self.model.n_control
            y0 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            result = solve_total_degree(crit.system, self.cfg, params=list(y0))
            self._seeds[key] = (y0, result.points())
        return self._seeds[key]

    def put(self, stratum: tuple[int, ...], y0: np.ndarray, points: np.ndarray) -> None:
        self._seeds[tuple(sorted(stratum))] = (np.asarray(y0), np.asarray(points))

    def solutions_at(self, stratum: tuple[int, ...], y: Sequence[float]) -> SolveResult:
        crit = self.model.critical_system(stratum)
        y0, pts = self.seed(stratum)
        return parameter_homotopy(crit.system, list(y0), pts, list(y), self.cfg)


# ---------------------------------------------------------------------------
# filtering and certification
# ---------------------------------------------------------------------------

def real_filter(model: FrameworkModel, solutions: Sequence[TrackedSolution],
                y: Sequence[float], stratum: Sequence[int] | None = None,
                tol: float = REAL_TOL) -> list[CriticalPoint]:
    """Keep real solutions and map them to full framework shape.

    A solution is real when its largest imaginary part is below ``tol``
    scaled by the point norm.  Energy, tension flags and the delta >= 0 flag
    are recorded; cables outside the stratum get their geometric distance
    and a zero multiplier.
    """
    stratum = tuple(sorted(stratum)) if stratum is not None else tuple(
        range(len(model.framework.cables))
    )
    crit = model.critical_system(stratum)
    kern = crit.system.kernel(order=0)
    out = []
    n_cables = len(model.framework.cables)
    for sol in solutions:
        if sol.status != REGULAR:
            continue
        z = sol.point
        scale = max(1.0, float(np.max(np.abs(z)))) if z.size else 1.0
        if z.size and float(np.max(np.abs(z.imag))) > tol * scale:
            continue
        zr = z.real
        x, d_act, lam_act = crit.split(zr)
        residual = float(np.max(np.abs(kern.values(list(zr), list(y))))) if z.size else 0.0
        dists = model.edge_distances(x, y)
        rest_elast = model.cable_data(y)
        delta = np.empty(n_cables)
        lam = np.zeros(len(model.edge_names(None)))
        # bars shared by every stratum come first in multiplier order
        n_bars = len(model.effective_bars())
        lam[:n_bars] = lam_act[:n_bars]
        tension = []
        energy = 0.0
        for ci in range(n_cables):
            e = model.framework.cables[ci]
            r, c = rest_elast[ci]
            if ci in stratum:
                slot = stratum.index(ci)
                delta[ci] = d_act[slot]
                lam[n_bars + ci] = lam_act[n_bars + slot]
                energy += 0.5 * c * (delta[ci] - r) ** 2
            else:
                delta[ci] = dists[f"{e.i}{e.j}"]
            tension.append(bool(delta[ci] >= r - BOUNDARY_TOL))
        out.append(
            CriticalPoint(
                x=x.copy(),
                delta=delta,
                lam=lam,
                energy=float(energy),
                tension=tuple(tension),
                delta_nonneg=bool(np.all(delta >= -BOUNDARY_TOL)),
                stratum=stratum,
                residual=residual,
                raw=zr.copy(),
            )
        )
    return out


def certify_stability(model: FrameworkModel, point: CriticalPoint,
                      y: Sequence[float], pd_rel_tol: float = 1e-8) -> StabilityCertificate:
    """Projected-Hessian test at one critical point.

    Builds H = d2(energy) + sum(lambda * d2 g) over (x, delta), takes an
    orthonormal basis V of the null space of dg from a column-pivoted QR of
    dg^T, and checks V^T H V for positive definiteness by a shifted Cholesky
    factorization.  The minimum eigenvalue is reported alongside.
    """
    ops = _ops(model, point.stratum)
    xd = np.concatenate([point.x, point.delta[list(point.stratum)]])
    lam_act = _stratum_lambdas(model, point)
    dg = np.real(ops.dg(xd, list(y)))
    Q, R, _ = _qr(dg.T, pivoting=True, mode="full")
    diag = np.abs(np.diag(R)) if R.size else np.zeros(0)
    rank = int(np.sum(diag > max(1e-12, 1e-10 * (diag[0] if diag.size else 0.0))))
    if rank < ops.n_edges:
        raise ConstraintSingularity(
            f"constraint Jacobian rank {rank} < {ops.n_edges} at x={point.x.tolist()}"
        )
    V = Q[:, rank:]
    H = ops.hessian(xd, lam_act, list(y))
    M = V.T @ H @ V
    if M.size == 0:
        return StabilityCertificate(M, float("inf"), 0, "stable")
    eigs = np.linalg.eigvalsh(0.5 * (M + M.T))
    min_eig = float(eigs[0])
    norm = float(np.max(np.abs(eigs)))
    pd_tol = pd_rel_tol * max(norm, 1e-6)
    if abs(min_eig) < pd_tol:
        verdict = "borderline"
    else:
        shifted = 0.5 * (M + M.T) - pd_tol * np.eye(M.shape[0])
        try:
            np.linalg.cholesky(shifted)
            verdict = "stable"
        except np.linalg.LinAlgError:
            verdict = "unstable"
    return StabilityCertificate(M, min_eig, V.shape[1], verdict)


def _stratum_lambdas(model: FrameworkModel, point: CriticalPoint) -> np.ndarray:
    n_bars = len(model.effective_bars())
    lam = list(point.lam[:n_bars])
    for ci in point.stratum:
        lam.append(point.lam[n_bars + ci])
    return np.asarray(lam)


def _physical(model: FrameworkModel, point: CriticalPoint, y) -> tuple[bool, bool]:
    """(physical, tension_boundary) for one stratum point.

    Kept cables must be strictly in tension: at delta = r exactly the cable
    carries no force and the one-sided true energy is flat on the slack
    side, so such points are excluded and flagged.  Dropped cables may sit
    anywhere up to the boundary, since extra one-sided cable energy can only
    sharpen a minimum.
    """
    if not point.delta_nonneg:
        return False, False
    rest = [r for r, _ in model.cable_data(y)]
    boundary = False
    for ci in range(len(model.framework.cables)):
        gap = point.delta[ci] - rest[ci]
        if abs(gap) <= BOUNDARY_TOL:
            boundary = True
        if ci in point.stratum and gap < BOUNDARY_TOL:
            return False, boundary
        if ci not in point.stratum and gap > BOUNDARY_TOL:
            return False, boundary
    return True, boundary


def _dedup_physical(points: list[tuple[CriticalPoint, StabilityCertificate]]):
    kept: list[tuple[CriticalPoint, StabilityCertificate]] = []
    for p, c in points:
        if any(np.max(np.abs(p.x - q.x)) < 1e-6 for q, _ in kept):
            continue
        kept.append((p, c))
    return kept


def stability_set(model: FrameworkModel, y: Sequence[float],
                  cache: SeedCache | None = None,
                  cfg: TrackerConfig | None = None) -> StabilityReport:
    """All critical points at controls y, with the certified stable subset.

    Solves the full critical system by parameter homotopy from a cached
    generic seed (total degree on first use), then every reduced tension
    stratum, and certifies the physical candidates.
    """
    cfg = cfg or TrackerConfig()
    cache = cache or SeedCache(model, cfg)
    y = [float(v) for v in y]
    all_points: list[CriticalPoint] = []
    stable: list[tuple[CriticalPoint, StabilityCertificate]] = []
    warnings: list[str] = []
    n_complex = n_real = n_nonneg = 0
    for stratum in _strata(model):
        result = cache.solutions_at(stratum, y)
        pts = real_filter(model, result.raw, y, stratum)
        if stratum == tuple(range(len(model.framework.cables))):
            n_complex = len(result)
            n_real = len(pts)
            n_nonneg = sum(1 for p in pts if p.delta_nonneg)
            all_points.extend(pts)
        else:
            all_points.extend(p for p in pts if _physical(model, p, y)[0])
        if result.report.n_failed:
            warnings.append(
                f"stratum {stratum}: {result.report.n_failed} of "
                f"{result.report.n_paths} paths failed"
            )
        for p in pts:
            ok, boundary = _physical(model, p, y)
            if not ok:
                if boundary:
                    warnings.append(
                        "tension-boundary equilibrium excluded near "
                        f"x={np.round(p.x, 6).tolist()} (zero-force cable at rest length)"
                    )
                continue
            try:
                cert = certify_stability(model, p, y)
            except ConstraintSingularity as exc:
                warnings.append(str(exc))
                continue
            if cert.verdict == "stable":
                stable.append((p, cert))
            elif cert.verdict == "borderline":
                warnings.append(
                    f"borderline certificate (min eig {cert.min_eigenvalue:.2e}) "
                    f"near x={np.round(p.x, 6).tolist()}"
                )
    stable = _dedup_physical(stable)
    stable.sort(key=lambda pc: pc[0].energy)
    return StabilityReport(
        y=np.asarray(y),
        all_critical=all_points,
        stable=stable,
        n_complex=n_complex,
        n_real=n_real,
        n_delta_nonneg=n_nonneg,
        warnings=warnings,
    )


def equilibrium_degree(model: FrameworkModel, cfg: TrackerConfig | None = None) -> int:
    """Count of isolated critical points at generic complex controls.

    Solved at two independent random complex control points; disagreement
    raises, since it signals a tolerance problem rather than geometry.
    """
    cfg = cfg or TrackerConfig()
    crit = model.critical_system()
    counts = []
    for k in (0, 1):
        rng = cfg.rng(20, k)
        m = model.n_control
        y = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        counts.append(len(solve_total_degree(crit.system, cfg, params=list(y))))
    if counts[0] != counts[1]:
        raise TrackingError(
            f"equilibrium degree differs between generic points: {counts}; "
            "review tracker tolerances"
        )
    return counts[0]


def chamber_scan(model: FrameworkModel, rect: tuple[float, float, float, float],
                 resolution: int, cache: SeedCache | None = None,
                 cfg: TrackerConfig | None = None):
    """Grid of stable-equilibrium counts over a control rectangle.

    Returns (xs, ys, counts) with counts[i, j] the number of certified
    stable equilibria at (xs[j], ys[i]); holes from solver failures are -1.
    """
    if model.n_control != 2:
        raise ValueError("chamber scan needs a 2-D control chart")
    cfg = cfg or TrackerConfig()
    cache = cache or SeedCache(model, cfg)
    x0, x1, y0, y1 = rect
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    counts = np.full((resolution, resolution), -1, dtype=int)
    for i, yy in enumerate(ys):
        for j, xx in enumerate(xs):
            try:
                counts[i, j] = stability_set(model, [xx, yy], cache, cfg).n_stable
            except TrackingError:
                pass
    return xs, ys, counts
