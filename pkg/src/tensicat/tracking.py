"""Homotopy continuation for square polynomial systems.

The tracker follows solution paths of H(z,t) = 0 from t=1 to t=0 with a
4th-order predictor on the Davidenko ODE and a Newton corrector, adapting
the step on corrector success/failure.  All paths of a solve advance in
lockstep as numpy batches: the compiled straight-line kernels evaluate
elementwise on arrays, so one kernel call serves thousands of paths.

Three front doors:

* ``solve_total_degree`` -- roots-of-unity start system, gamma trick;
* ``parameter_homotopy`` -- continue known solutions between control values;
* ``monodromy_solve``    -- populate a solution set by random parameter loops.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .expressions import ExpressionSystem, Power, Var, VariableId, const, sub

__all__ = [
    "TrackerConfig",
    "TrackedSolution",
    "SolveResult",
    "SolveReport",
    "Homotopy",
    "TrackingError",
    "total_degree_start",
    "track_path",
    "solve_total_degree",
    "parameter_homotopy",
    "monodromy_solve",
    "dedup_points",
]

REGULAR = "regular"
SINGULAR = "singular"
DIVERGED = "diverged"
FAILED = "failed"

_TRACKING, _REGULAR, _SINGULAR, _DIVERGED, _FAILED, _PENDING = range(6)
_STATUS_NAMES = {_REGULAR: REGULAR, _SINGULAR: SINGULAR, _DIVERGED: DIVERGED, _FAILED: FAILED}


class TrackingError(RuntimeError):
    pass


@dataclass
class TrackerConfig:
    newton_tol: float = 1e-10
    track_tol: float = 1e-7
    min_step: float = 1e-14
    max_step: float = 0.1
    max_steps: int = 10_000
    singular_cond_threshold: float = 1e12
    divergence_cutoff: float = 1e10
    dedup_tol: float = 1e-6
    endgame_t: float = 1e-6
    corrector_iters: int = 3
    batch_size: int = 8192
    path_budget: int = 1_000_000
    rng_seed: int = 0
    gamma: complex | None = None

    def __post_init__(self):
        if not (0 < self.min_step < self.max_step <= 1):
            raise ValueError("need 0 < min_step < max_step <= 1")
        for name in ("newton_tol", "track_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def rng(self, *tag: int) -> np.random.Generator:
        return np.random.default_rng([self.rng_seed, *tag])

    def draw_gamma(self, rng: np.random.Generator) -> complex:
        if self.gamma is not None:
            return complex(self.gamma)
        return complex(np.exp(2j * np.pi * rng.uniform()))


@dataclass
class TrackedSolution:
    point: np.ndarray
    residual: float
    condition_estimate: float
    status: str
    winding: int | None = None
    start_index: int = -1

    @property
    def is_regular(self) -> bool:
        return self.status == REGULAR


@dataclass
class SolveReport:
    n_paths: int
    n_regular: int
    n_distinct: int
    n_singular: int
    n_diverged: int
    n_failed: int
    seconds: float
    complete: bool = True

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class SolveResult(Sequence):
    """Distinct solutions plus the per-path bookkeeping of the solve."""

    def __init__(self, solutions: list[TrackedSolution], report: SolveReport,
                 raw: list[TrackedSolution] | None = None):
        self.solutions = solutions
        self.report = report
        self.raw = raw if raw is not None else solutions

    def __len__(self):
        return len(self.solutions)

    def __getitem__(self, i):
        return self.solutions[i]

    def points(self) -> np.ndarray:
        if not self.solutions:
            return np.zeros((0, 0), dtype=complex)
        return np.array([s.point for s in self.solutions])


# ---------------------------------------------------------------------------
# homotopies
# ---------------------------------------------------------------------------

def _gamma_homotopy_system(target: ExpressionSystem, gamma: complex) -> ExpressionSystem:
    """(1-t)*F + gamma*t*(z_i^{d_i}-1) compiled as one system with t appended.

    Folding the whole homotopy into a single kernel gives the tracker the
    residual, dH/dz and dH/dt in one generated pass per evaluation.
    """
    from .expressions import add, mul, power

    n = target.n_variables
    t = Var(n)
    one_minus_t = sub(const(1), t)
    outs = []
    for i, (out, d) in enumerate(zip(target.outputs, target.degrees())):
        start_i = sub(power(Var(i), d), const(1))
        outs.append(add(mul(one_minus_t, out), mul(const(gamma), t, start_i)))
    vids = tuple(list(target.variables) + [VariableId(n, "_hom_t")])
    return ExpressionSystem(vids, target.parameters, tuple(outs))


class Homotopy:
    """H(z,t) with batched evaluation of (H, dH/dz, dH/dt).

    ``kind`` is either "straight-line" (gamma trick between a start and a
    target system) or "parameter" (one system, controls moving y0 -> y1).
    t runs from 1 to 0.
    """

    def __init__(self, *, kind: str, target: ExpressionSystem, n: int,
                 evaluator: Callable, target_evaluator: Callable):
        self.kind = kind
        self.target = target
        self.n = n
        self._eval = evaluator
        self._target_eval = target_evaluator

    def eval_batch(self, Z: np.ndarray, t: np.ndarray):
        return self._eval(Z, t)

    def target_eval_batch(self, Z: np.ndarray):
        return self._target_eval(Z)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def total_degree(target: ExpressionSystem, params: Sequence[complex],
                     gamma: complex) -> "Homotopy":
        hkern = _gamma_homotopy_system(target, gamma).kernel(order=1)
        tkern = target.kernel(order=1)
        y = [complex(v) for v in params]
        n = target.n_variables

        def ev(Z, t):
            Zt = np.empty((Z.shape[0], n + 1), dtype=complex)
            Zt[:, :n] = Z
            Zt[:, n] = t
            H, J, _ = hkern.with_jac_batch(Zt, y)
            return H, J[:, :, :n], J[:, :, n]

        def tv(Z):
            F, Jz, _ = tkern.with_jac_batch(Z, y)
            return F, Jz

        return Homotopy(kind="straight-line", target=target, n=n,
                        evaluator=ev, target_evaluator=tv)

    @staticmethod
    def straight_line(start: ExpressionSystem, target: ExpressionSystem,
                      gamma: complex, params: Sequence[complex] = ()) -> "Homotopy":
        if start.n_variables != target.n_variables:
            raise TrackingError("start and target must share the variable list")
        ks = start.kernel(order=1)
        kt = target.kernel(order=1)
        y = [complex(v) for v in params]
        n = target.n_variables

        def ev(Z, t):
            F, Jf, _ = kt.with_jac_batch(Z, y)
            G, Jg, _ = ks.with_jac_batch(Z, y)
            omt = (1.0 - t)[:, None]
            gt = (gamma * t)[:, None]
            H = omt * F + gt * G
            J = omt[..., None] * Jf + gt[..., None] * Jg
            Ht = gamma * G - F
            return H, J, Ht

        def tv(Z):
            F, Jf, _ = kt.with_jac_batch(Z, y)
            return F, Jf

        return Homotopy(kind="straight-line", target=target, n=n,
                        evaluator=ev, target_evaluator=tv)

    @staticmethod
    def parameter(system: ExpressionSystem, y0: Sequence[complex],
                  y1: Sequence[complex]) -> "Homotopy":
        kern = system.kernel(order=1)
        y0 = np.asarray([complex(v) for v in y0])
        y1 = np.asarray([complex(v) for v in y1])
        dy = y0 - y1
        n = system.n_variables

        def ev(Z, t):
            ycols = [t * y0[k] + (1.0 - t) * y1[k] for k in range(len(y0))]
            F, Jz, Jy = kern.with_jac_batch(Z, ycols)
            Ht = Jy @ dy
            return F, Jz, Ht

        def tv(Z):
            F, Jz, _ = kern.with_jac_batch(Z, list(y1))
            return F, Jz

        return Homotopy(kind="parameter", target=system, n=n,
                        evaluator=ev, target_evaluator=tv)


# ---------------------------------------------------------------------------
# batched predictor-corrector core
# ---------------------------------------------------------------------------

def _solve_batch(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise linear solves; rows with singular matrices come back NaN."""
    try:
        return np.linalg.solve(A, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.empty_like(b)
        for i in range(A.shape[0]):
            try:
                out[i] = np.linalg.solve(A[i], b[i])
            except np.linalg.LinAlgError:
                out[i] = np.nan
        return out


def _inf_norm_rows(Z: np.ndarray) -> np.ndarray:
    if Z.ndim == 1:
        Z = Z[:, None]
    with np.errstate(invalid="ignore"):
        return np.max(np.abs(Z), axis=1)


@dataclass
class _BatchState:
    Z: np.ndarray
    t: np.ndarray
    h: np.ndarray
    status: np.ndarray
    steps: np.ndarray
    streak: np.ndarray
    cond: np.ndarray


def _track_batch(hom: Homotopy, Z0: np.ndarray, cfg: TrackerConfig,
                 trace: list | None = None) -> list[TrackedSolution]:
    """Track every row of Z0 from t=1 to t=0 and classify the endpoints."""
    B, n = Z0.shape
    st = _BatchState(
        Z=Z0.astype(complex).copy(),
        t=np.ones(B),
        h=np.full(B, min(cfg.max_step, 0.1)),
        status=np.full(B, _TRACKING, dtype=np.int8),
        steps=np.zeros(B, dtype=np.int64),
        streak=np.zeros(B, dtype=np.int64),
        cond=np.ones(B),
    )
    if trace is not None:
        for i in range(B):
            trace.append([(1.0, Z0[i].copy())])

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        while True:
            idx = np.nonzero(st.status == _TRACKING)[0]
            if idx.size == 0:
                break
            st.steps[idx] += 1
            over = idx[st.steps[idx] > cfg.max_steps]
            st.status[over] = _FAILED
            idx = np.nonzero(st.status == _TRACKING)[0]
            if idx.size == 0:
                break

            z0 = st.Z[idx]
            t0 = st.t[idx]
            hh = np.minimum(st.h[idx], t0)

            # 4th-order predictor on dz/dt = -(dH/dz)^{-1} dH/dt
            def slope(Zs, ts):
                H, J, Ht = hom.eval_batch(Zs, ts)
                return _solve_batch(J, -Ht)

            k1 = slope(z0, t0)
            half = (hh / 2.0)[:, None]
            k2 = slope(z0 - half * k1, t0 - hh / 2.0)
            k3 = slope(z0 - half * k2, t0 - hh / 2.0)
            k4 = slope(z0 - hh[:, None] * k3, t0 - hh)
            zp = z0 - (hh / 6.0)[:, None] * (k1 + 2 * k2 + 2 * k3 + k4)
            tn = t0 - hh

            # Newton corrector at t = tn
            zc = zp.copy()
            ok = np.zeros(idx.size, dtype=bool)
            live = np.ones(idx.size, dtype=bool)
            for _ in range(cfg.corrector_iters):
                rows = np.nonzero(live)[0]
                if rows.size == 0:
                    break
                H, J, _ = hom.eval_batch(zc[rows], tn[rows])
                dz = _solve_batch(J, -H)
                zc[rows] += dz
                upd = _inf_norm_rows(dz)
                scale = np.maximum(1.0, _inf_norm_rows(zc[rows]))
                res = _inf_norm_rows(H)
                good = upd < cfg.track_tol * scale
                amp = upd / np.maximum(res, 1e-300)
                jn = np.max(np.abs(J).sum(axis=2), axis=1)
                st.cond[idx[rows]] = np.maximum(jn * amp, 1.0)
                ok[rows[good]] = True
                live[rows] = ~good & np.isfinite(upd)

            bad = ~ok
            acc = idx[ok]
            st.Z[acc] = zc[ok]
            st.t[acc] = tn[ok]
            st.streak[acc] += 1
            grow = acc[st.streak[acc] >= 4]
            st.h[grow] = np.minimum(st.h[grow] * 2.0, cfg.max_step)
            st.streak[grow] = 0
            if trace is not None:
                for row, i in enumerate(idx):
                    if ok[row]:
                        trace[i].append((float(tn[row]), zc[row].copy()))

            rej = idx[bad]
            st.h[rej] /= 2.0
            st.streak[rej] = 0

            norms = _inf_norm_rows(st.Z[idx])
            div = idx[(norms > cfg.divergence_cutoff) | ~np.isfinite(norms)]
            st.status[div] = _DIVERGED
            # step collapse far out: the path is crawling to infinity
            crawl = idx[(st.h[idx] < 1e-9) & (norms > 1e5) & (st.status[idx] == _TRACKING)]
            st.status[crawl] = _DIVERGED

            done = idx[(st.t[idx] <= 0.0) & (st.status[idx] == _TRACKING)]
            st.status[done] = _PENDING

            stalled = idx[(st.h[idx] < cfg.min_step) & (st.status[idx] == _TRACKING)]
            near = stalled[st.t[stalled] < cfg.endgame_t]
            st.status[near] = _PENDING
            st.status[stalled[st.t[stalled] >= cfg.endgame_t]] = _FAILED

    return _finish_batch(hom, st, cfg)


def _finish_batch(hom: Homotopy, st: _BatchState, cfg: TrackerConfig) -> list[TrackedSolution]:
    """Sharpen paths that reached t=0 and classify all endpoints."""
    B, n = st.Z.shape
    residual = np.full(B, np.inf)
    pend = np.nonzero(st.status == _PENDING)[0]
    if pend.size:
        Z = st.Z[pend]
        live = np.ones(pend.size, dtype=bool)
        last_upd = np.full(pend.size, np.inf)
        eps = np.finfo(float).eps
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            # Sharpen to the attainable floor: at a regular root the updates
            # drop to rounding noise; at a multiple root Newton keeps creeping
            # toward it, and the endpoint condition number grows without
            # bound, which is what classifies it singular below.
            for it in range(25):
                rows = np.nonzero(live)[0]
                if rows.size == 0:
                    break
                F, J = hom.target_eval_batch(Z[rows])
                dz = _solve_batch(J, -F)
                good = np.isfinite(_inf_norm_rows(dz))
                dz[~good] = 0.0
                Z[rows] += dz
                upd = _inf_norm_rows(dz)
                last_upd[rows] = upd
                scale = np.maximum(1.0, _inf_norm_rows(Z[rows]))
                live[rows] = good & (upd > 8 * eps * scale)
                if it >= 4:
                    # still taking big steps: nowhere near a solution; only
                    # slow creepers (multiple roots) deserve the long tail
                    live[rows] &= upd < 1e-2 * scale
            F, J = hom.target_eval_batch(Z)
            res = _inf_norm_rows(F)
            scale = np.maximum(1.0, _inf_norm_rows(Z))
            svals = np.linalg.svd(J, compute_uv=False)
            with np.errstate(divide="ignore"):
                cond = np.maximum(svals[:, 0], 1.0) / np.where(
                    svals[:, -1] > 0, svals[:, -1], np.nan
                )
            cond = np.where(np.isfinite(cond), cond, np.inf)

        st.Z[pend] = Z
        residual[pend] = res
        st.cond[pend] = cond
        znorm = _inf_norm_rows(Z)
        converged = last_upd <= cfg.newton_tol * scale
        finite = znorm <= cfg.divergence_cutoff
        solved = res <= 1e-4 * scale
        regular = (
            converged
            & (res <= cfg.newton_tol * scale)
            & (cond < cfg.singular_cond_threshold)
            & finite
        )
        # Unsharpenable endpoints far out, or with residuals above both the
        # point norm and an absolute floor, are nowhere near a finite
        # solution: slow paths to infinity, not tracker breakdowns.
        escaping = (znorm > 1e3) | (res > np.maximum(10.0, znorm))
        for k, i in enumerate(pend):
            if not finite[k]:
                st.status[i] = _DIVERGED
            elif regular[k]:
                st.status[i] = _REGULAR
            elif solved[k]:
                st.status[i] = _SINGULAR
            elif escaping[k]:
                st.status[i] = _DIVERGED
            else:
                st.status[i] = _FAILED

    out = []
    for i in range(B):
        code = int(st.status[i])
        out.append(
            TrackedSolution(
                point=st.Z[i].copy(),
                residual=float(residual[i]) if np.isfinite(residual[i]) else np.inf,
                condition_estimate=float(st.cond[i]),
                status=_STATUS_NAMES.get(code, FAILED),
                start_index=i,
            )
        )
    return out


# ---------------------------------------------------------------------------
# front doors
# ---------------------------------------------------------------------------

def total_degree_start(target: ExpressionSystem, cfg: TrackerConfig | None = None):
    """Start system {z_i^{d_i} - 1} and all products of roots of unity."""
    if target.n_outputs != target.n_variables:
        raise TrackingError(
            f"target is not square: {target.n_outputs} outputs over {target.n_variables} variables"
        )
    degrees = target.degrees()
    if any(d < 1 for d in degrees):
        raise TrackingError(f"target has a constant output (degrees {degrees})")
    outs = tuple(
        sub(Power(Var(i), d) if d > 1 else Var(i), const(1)) for i, d in enumerate(degrees)
    )
    start = ExpressionSystem(target.variables, (), outs)
    n_paths = int(np.prod(degrees))
    cfg = cfg or TrackerConfig()
    if n_paths > cfg.path_budget:
        raise TrackingError(f"Bezout count {n_paths} exceeds path budget {cfg.path_budget}")
    roots = [np.exp(2j * np.pi * np.arange(d) / d) for d in degrees]
    points = np.array(list(itertools.product(*roots)), dtype=complex).reshape(n_paths, len(degrees))
    return start, points


def track_path(hom: Homotopy, z0: Sequence[complex], cfg: TrackerConfig | None = None,
               trace: list | None = None) -> TrackedSolution:
    """Track a single path of H from t=1 to t=0."""
    cfg = cfg or TrackerConfig()
    Z0 = np.asarray(z0, dtype=complex).reshape(1, -1)
    return _track_batch(hom, Z0, cfg, trace=trace)[0]


def dedup_points(points: np.ndarray, tol: float) -> list[int]:
    """Indices of representatives under max-norm clustering at relative tol."""
    reps: list[int] = []
    for i in range(points.shape[0]):
        zi = points[i]
        si = max(1.0, float(np.max(np.abs(zi))))
        dup = False
        for j in reps:
            zj = points[j]
            if np.max(np.abs(zi - zj)) < tol * max(si, float(np.max(np.abs(zj)))):
                dup = True
                break
        if not dup:
            reps.append(i)
    return reps


def _collect(tracked: list[TrackedSolution], cfg: TrackerConfig, n_paths: int,
             seconds: float, complete: bool = True) -> SolveResult:
    regular = [s for s in tracked if s.status == REGULAR]
    n_sing = sum(1 for s in tracked if s.status == SINGULAR)
    n_div = sum(1 for s in tracked if s.status == DIVERGED)
    n_fail = sum(1 for s in tracked if s.status == FAILED)
    distinct: list[TrackedSolution] = []
    if regular:
        pts = np.array([s.point for s in regular])
        reps = dedup_points(pts, cfg.dedup_tol)
        counts = {r: 0 for r in reps}
        for i in range(len(regular)):
            for r in reps:
                if np.max(np.abs(pts[i] - pts[r])) < cfg.dedup_tol * max(
                    1.0, float(np.max(np.abs(pts[r])))
                ):
                    counts[r] += 1
                    break
        for r in reps:
            s = regular[r]
            s.winding = counts[r] if counts[r] > 1 else None
            distinct.append(s)
    report = SolveReport(
        n_paths=n_paths,
        n_regular=len(regular),
        n_distinct=len(distinct),
        n_singular=n_sing,
        n_diverged=n_div,
        n_failed=n_fail,
        seconds=seconds,
        complete=complete,
    )
    return SolveResult(distinct, report, raw=tracked)


def solve_total_degree(target: ExpressionSystem, cfg: TrackerConfig | None = None,
                       params: Sequence[complex] = ()) -> SolveResult:
    """All isolated solutions of a square system by a total-degree homotopy."""
    cfg = cfg or TrackerConfig()
    if target.n_variables == 0:
        sol = TrackedSolution(np.zeros(0, complex), 0.0, 1.0, REGULAR, start_index=0)
        return SolveResult([sol], SolveReport(1, 1, 1, 0, 0, 0, 0.0))
    began = time.perf_counter()
    rng = cfg.rng(1)
    gamma = cfg.draw_gamma(rng)
    _, points = total_degree_start(target, cfg)
    hom = Homotopy.total_degree(target, params, gamma)
    tracked: list[TrackedSolution] = []
    for lo in range(0, points.shape[0], cfg.batch_size):
        chunk = points[lo : lo + cfg.batch_size]
        sols = _track_batch(hom, chunk, cfg)
        for s in sols:
            s.start_index += lo
        tracked.extend(sols)
    result = _collect(tracked, cfg, points.shape[0], time.perf_counter() - began)
    if result.report.n_failed > 0.01 * result.report.n_paths:
        raise TrackingError(
            f"only {result.report.n_paths - result.report.n_failed} of "
            f"{result.report.n_paths} paths resolved"
        )
    if result.report.n_distinct > points.shape[0]:
        raise TrackingError("more distinct solutions than the Bezout bound; dedup is broken")
    return result


def parameter_homotopy(system: ExpressionSystem, y0: Sequence[complex],
                       seeds: Sequence[TrackedSolution] | np.ndarray,
                       y1: Sequence[complex], cfg: TrackerConfig | None = None,
                       trace: list | None = None) -> SolveResult:
    """Continue seed solutions at controls y0 along the straight segment to y1.

    Results are returned in seed order (``raw``), with distinct regular
    endpoints in ``solutions``.  A failed path is retried once through a
    randomized complex midpoint, since straight real segments may pass near
    the discriminant.
    """
    cfg = cfg or TrackerConfig()
    began = time.perf_counter()
    if isinstance(seeds, np.ndarray):
        Z0 = seeds.astype(complex).copy()
    else:
        Z0 = np.array([s.point for s in seeds], dtype=complex)
    if Z0.size == 0:
        return SolveResult([], SolveReport(0, 0, 0, 0, 0, 0, 0.0))
    hom = Homotopy.parameter(system, y0, y1)
    tracked: list[TrackedSolution] = []
    for lo in range(0, Z0.shape[0], cfg.batch_size):
        sols = _track_batch(hom, Z0[lo : lo + cfg.batch_size], cfg, trace=trace)
        for s in sols:
            s.start_index += lo
        tracked.extend(sols)

    fails = [i for i, s in enumerate(tracked) if s.status == FAILED]
    if fails and trace is None:
        rng = cfg.rng(2)
        y0a = np.asarray([complex(v) for v in y0])
        y1a = np.asarray([complex(v) for v in y1])
        mid = 0.5 * (y0a + y1a)
        scale = max(1.0, float(np.max(np.abs(y0a - y1a))))
        detour = mid + scale * (rng.standard_normal(len(mid)) * 0.25
                                + 1j * rng.standard_normal(len(mid)) * 0.25)
        leg1 = Homotopy.parameter(system, y0, detour)
        first = _track_batch(leg1, Z0[fails], cfg)
        alive = [k for k, s in enumerate(first) if s.status == REGULAR]
        if alive:
            leg2 = Homotopy.parameter(system, detour, y1)
            second = _track_batch(leg2, np.array([first[k].point for k in alive]), cfg)
            for k, s in zip(alive, second):
                s.start_index = fails[k]
                tracked[fails[k]] = s
    return _collect(tracked, cfg, Z0.shape[0], time.perf_counter() - began)


def monodromy_solve(system: ExpressionSystem, params0: Sequence[complex],
                    seeds: Sequence[TrackedSolution] | np.ndarray,
                    cfg: TrackerConfig | None = None, max_loops: int = 60,
                    settle: int = 5, min_loops: int = 10) -> SolveResult:
    """Grow a solution set at fixed parameters by random complex loops.

    Tracks the current set around random triangles in parameter space until
    ``settle`` consecutive loops add nothing (and at least ``min_loops`` ran,
    since small sets can sit quiet before the first enclosing loop).  Returns
    the stabilized set with ``report.complete`` False when the loop budget
    ran out first.
    """
    cfg = cfg or TrackerConfig()
    began = time.perf_counter()
    rng = cfg.rng(3)
    y0 = np.asarray([complex(v) for v in params0])
    if isinstance(seeds, np.ndarray):
        pts = seeds.astype(complex)
    else:
        pts = np.array([s.point for s in seeds], dtype=complex)
    if pts.size == 0:
        raise TrackingError("monodromy needs at least one seed solution")
    reps = dedup_points(pts, cfg.dedup_tol)
    current = pts[reps]
    scale = max(1.0, float(np.max(np.abs(y0))))
    quiet = 0
    loops = 0
    n_paths = 0
    while (quiet < settle or loops < min_loops) and loops < max_loops:
        loops += 1
        # vary the loop radius so different branch points get encircled
        radius = scale * float(rng.choice([0.2, 0.5, 1.0, 2.0, 4.0]))
        q1 = y0 + radius * (rng.standard_normal(len(y0)) + 1j * rng.standard_normal(len(y0)))
        q2 = y0 + radius * (rng.standard_normal(len(y0)) + 1j * rng.standard_normal(len(y0)))
        Z = current
        for a, b in ((y0, q1), (q1, q2), (q2, y0)):
            hom = Homotopy.parameter(system, a, b)
            sols = _track_batch(hom, Z, cfg)
            Z = np.array([s.point for s in sols if s.status == REGULAR])
            n_paths += len(sols)
            if Z.size == 0:
                break
        if Z.size == 0:
            continue
        merged = np.vstack([current, Z])
        reps = dedup_points(merged, cfg.dedup_tol)
        grown = len(reps) > current.shape[0]
        current = merged[reps]
        quiet = 0 if grown else quiet + 1

    kern = system.kernel(order=1)
    F, J = kern.with_jac_batch(current, list(y0))[:2]
    res = _inf_norm_rows(F)
    svals = np.linalg.svd(J, compute_uv=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = svals[:, 0] / svals[:, -1]
    sols = [
        TrackedSolution(current[i].copy(), float(res[i]),
                        float(cond[i]) if np.isfinite(cond[i]) else np.inf,
                        REGULAR, start_index=i)
        for i in range(current.shape[0])
    ]
    report = SolveReport(
        n_paths=n_paths,
        n_regular=len(sols),
        n_distinct=len(sols),
        n_singular=0,
        n_diverged=0,
        n_failed=0,
        seconds=time.perf_counter() - began,
        complete=quiet >= settle,
    )
    return SolveResult(sols, report)
