"""Lifting control paths to equilibrium paths, with jump resolution.

A piecewise-linear control path is lifted segment by segment: the active
equilibrium is continued by a real parameter homotopy with dense output
while the fold witness supplies the segment's catastrophe crossings up
front.  At each crossing the continuation steps across a small guard
interval; if the tracked minimum survives, the crossing is only an event,
and if it dies the successor equilibrium is chosen by projected-gradient
descent on the true cable energy followed by a snap onto the stability set.

The projected-Hessian verdict is monitored along the way as a local check;
the witness intersection stays authoritative, and disagreements are
surfaced as warnings.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .catastrophe import PseudoWitnessSet, intersect_slice
from .frameworks import ControlSlice, FrameworkModel
from .stability import (
    BOUNDARY_TOL,
    CriticalPoint,
    SeedCache,
    StabilityCertificate,
    certify_stability,
    real_filter,
    stability_set,
)
from .tracking import (
    REGULAR,
    TrackerConfig,
    TrackedSolution,
    parameter_homotopy,
)

__all__ = [
    "ControlPath",
    "LiftEvent",
    "LiftResult",
    "LiftError",
    "lift_path",
    "post_jump",
    "hysteresis_probe",
]


class LiftError(RuntimeError):
    pass


@dataclass(frozen=True)
class ControlPath:
    """Piecewise-linear control path; consecutive duplicates are collapsed.

    A path that collapses to a single point is degenerate: lifting it is a
    no-op (and hysteresis over it is trivially absent).
    """

    waypoints: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.waypoints) < 1:
            raise LiftError("a control path needs at least one waypoint")
        cleaned = [self.waypoints[0]]
        for w in self.waypoints[1:]:
            if not np.allclose(w, cleaned[-1]):
                cleaned.append(w)
        object.__setattr__(self, "waypoints", tuple(cleaned))

    @property
    def n_segments(self) -> int:
        return len(self.waypoints) - 1

    def is_closed(self) -> bool:
        return bool(np.allclose(self.waypoints[0], self.waypoints[-1]))

    @staticmethod
    def from_json(doc: dict) -> "ControlPath":
        return ControlPath(tuple(tuple(float(v) for v in w) for w in doc["waypoints"]))


@dataclass
class LiftEvent:
    t: float
    kind: str  # catastrophe_crossing | stability_lost | tracking_failure | slack_transition
    y: np.ndarray
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "kind": self.kind,
            "y": [float(v) for v in self.y],
            "details": self.details,
        }


@dataclass
class TrajectorySample:
    t: float
    y: np.ndarray
    point: CriticalPoint
    min_eigenvalue: float
    stable: bool


@dataclass
class LiftResult:
    trajectory: list[TrajectorySample]
    events: list[LiftEvent]
    ended_stable: bool
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "trajectory": [
                {
                    "t": s.t,
                    "y": [float(v) for v in s.y],
                    "x": [float(v) for v in s.point.x],
                    "delta": [float(v) for v in s.point.delta],
                    "min_eigenvalue": s.min_eigenvalue,
                    "stable": s.stable,
                }
                for s in self.trajectory
            ],
            "events": [e.as_dict() for e in self.events],
            "ended_stable": self.ended_stable,
            "warnings": self.warnings,
        }


GUARD = 1e-6
MIN_SAMPLES_PER_SEGMENT = 100


def _nearest_stable(report, x: np.ndarray):
    best = None
    dist = np.inf
    for p, cert in report.stable:
        d = float(np.max(np.abs(p.x - np.asarray(x))))
        if d < dist:
            dist = d
            best = (p, cert)
    return best, dist


def post_jump(model: FrameworkModel, y: Sequence[float], old_point: CriticalPoint,
              cache: SeedCache | None = None, cfg: TrackerConfig | None = None,
              step: float = 1e-2, max_iters: int = 10_000):
    """Successor equilibrium after a catastrophe, by energy relaxation.

    Runs discrete projected-gradient descent on the true (max-form) cable
    energy over the bar-constraint set starting from the vanished
    equilibrium, then snaps to the nearest member of the stability set.
    Returns (point, certificate) or None when no stable equilibrium exists.
    """
    cfg = cfg or TrackerConfig()
    cache = cache or SeedCache(model, cfg)
    y = [float(v) for v in y]
    report = stability_set(model, y, cache, cfg)
    if not report.stable:
        return None
    if old_point is None:
        return report.stable[0]
    x = np.asarray(old_point.x, dtype=float).copy()
    bars = model.bar_constraints()
    from .expressions import jacobian as _jac

    jb_eval = model.aux_cache.get("bars_jac")
    if jb_eval is None:
        jb_eval = _jac(bars)
        model.aux_cache["bars_jac"] = jb_eval
    bars_kern = bars.kernel(order=0)

    def project(xv: np.ndarray) -> np.ndarray:
        for _ in range(30):
            b = np.real(bars_kern.values(list(xv), y))
            if bars.n_outputs == 0 or np.max(np.abs(b)) < 1e-12:
                break
            J = np.real(jb_eval(xv, y))
            xv = xv - J.T @ np.linalg.solve(J @ J.T, b)
        return xv

    for _ in range(max_iters):
        grad = model.true_energy_gradient(x, y)
        if bars.n_outputs:
            J = np.real(jb_eval(x, y))
            lam = np.linalg.solve(J @ J.T, J @ grad)
            pgrad = grad - J.T @ lam
        else:
            pgrad = grad
        if np.linalg.norm(pgrad) < 1e-10:
            break
        x = project(x - step * pgrad)
    best, dist = _nearest_stable(report, x)
    if best is None:
        return None
    return best


def _certify(model, point, y, warnings):
    try:
        return certify_stability(model, point, y)
    except Exception as exc:  # constraint singularity: report, do not crash the lift
        warnings.append(f"certificate failed at x={np.round(point.x, 6).tolist()}: {exc}")
        return StabilityCertificate(np.zeros((0, 0)), float("nan"), 0, "borderline")


def _point_from_raw(model, stratum, z: np.ndarray, y) -> CriticalPoint | None:
    sol = TrackedSolution(point=np.asarray(z, dtype=complex), residual=0.0,
                          condition_estimate=1.0, status=REGULAR)
    pts = real_filter(model, [sol], y, stratum)
    return pts[0] if pts else None


def _slack_flip(model, prev: CriticalPoint, cur: CriticalPoint, y) -> list[int]:
    rests = [r for r, _ in model.cable_data(y)]
    flips = []
    for ci, r in enumerate(rests):
        if (prev.delta[ci] - r) * (cur.delta[ci] - r) < 0:
            flips.append(ci)
    return flips


def lift_path(model: FrameworkModel, path: ControlPath, x0: Sequence[float],
              witness: PseudoWitnessSet, cache: SeedCache | None = None,
              cfg: TrackerConfig | None = None) -> LiftResult:
    """Follow the stable equilibrium along a piecewise-linear control path.

    The starting configuration must belong to the stability set at the first
    waypoint.  Returns the sampled trajectory, all events in order, and
    whether the lift ended on a stable point.
    """
    cfg = cfg or TrackerConfig()
    cache = cache or SeedCache(model, cfg)
    y0 = list(path.waypoints[0])
    report0 = stability_set(model, y0, cache, cfg)
    best, dist = _nearest_stable(report0, np.asarray(x0, dtype=float))
    if best is None or dist > 1e-4:
        raise LiftError(
            f"starting configuration {list(x0)} is not in the stability set at {y0} "
            f"(nearest stable point at distance {dist:.3g})"
        )
    current, current_cert = best
    trajectory: list[TrajectorySample] = []
    events: list[LiftEvent] = []
    warnings: list[str] = []
    trajectory.append(
        TrajectorySample(0.0, np.asarray(y0), current, current_cert.min_eigenvalue, True)
    )
    if path.n_segments == 0:
        return LiftResult(trajectory, events, True, warnings)

    n_seg = path.n_segments
    for k in range(n_seg):
        ya = np.asarray(path.waypoints[k], dtype=float)
        yb = np.asarray(path.waypoints[k + 1], dtype=float)
        t_lo, t_hi = k / n_seg, (k + 1) / n_seg
        seg = ControlSlice(base=tuple(ya), directions=(tuple(yb - ya),))
        crossings, complete = intersect_slice(witness, seg, cfg, segment_only=True)
        if not complete:
            warnings.append(f"segment {k}: witness transport incomplete")
        c_events = [c for c in crossings if c.is_C]
        stops = sorted({round(c.t, 12) for c in c_events if GUARD < c.t < 1 - GUARD})

        sigma = 0.0
        for stop in stops + [1.0]:
            target_sigma = stop - GUARD if stop < 1.0 else 1.0
            if target_sigma > sigma + 1e-12:
                ok = _advance_piece(
                    model, cache, cfg, current, ya, yb, sigma, target_sigma,
                    t_lo, t_hi, trajectory, events, warnings, k,
                )
                if ok is None:
                    t_fail = trajectory[-1].t if trajectory else t_lo
                    events.append(LiftEvent(t_fail, "tracking_failure",
                                            ya + (yb - ya) * sigma, {"segment": k}))
                    return LiftResult(trajectory, events, False, warnings)
                current, sigma = ok
            if stop >= 1.0:
                break
            # step across the crossing through a guard interval
            t_glob = t_lo + stop * (t_hi - t_lo)
            y_cross = ya + stop * (yb - ya)
            y_after = ya + min(stop + GUARD, 1.0) * (yb - ya)
            survived, landed = _step_across(model, cache, cfg, current,
                                            ya, yb, sigma, min(stop + GUARD, 1.0))
            detail = {"segment": k, "sigma": stop}
            if survived:
                current = landed
                sigma = min(stop + GUARD, 1.0)
                cert = _certify(model, current, list(y_after), warnings)
                stable_now = cert.verdict == "stable"
                detail["jumped"] = False
                events.append(LiftEvent(t_glob, "catastrophe_crossing", y_cross, detail))
                if not stable_now:
                    detail2 = {"segment": k, "sigma": stop}
                    succ = post_jump(model, list(y_after), current, cache, cfg)
                    events.append(LiftEvent(t_glob, "stability_lost", y_cross, detail2))
                    if succ is None:
                        return LiftResult(trajectory, events, False, warnings)
                    current, _ = succ
                    detail2["jumped"] = True
                    detail2["dx"] = float(np.max(np.abs(succ[0].x - landed.x)))
            else:
                succ = post_jump(model, list(y_after), current, cache, cfg)
                detail["jumped"] = True
                if succ is None:
                    events.append(LiftEvent(t_glob, "stability_lost", y_cross, detail))
                    return LiftResult(trajectory, events, False, warnings)
                new_point, new_cert = succ
                detail["dx"] = float(np.max(np.abs(new_point.x - current.x)))
                events.append(LiftEvent(t_glob, "catastrophe_crossing", y_cross, detail))
                current = new_point
                sigma = min(stop + GUARD, 1.0)
                trajectory.append(
                    TrajectorySample(t_glob, y_after, current, new_cert.min_eigenvalue, True)
                )

    cert = _certify(model, current, list(path.waypoints[-1]), warnings)
    return LiftResult(trajectory, events, cert.verdict == "stable", warnings)


def _advance_piece(model, cache, cfg, point, ya, yb, s_from, s_to,
                   t_lo, t_hi, trajectory, events, warnings, segment):
    """Dense continuation over one crossing-free piece, with jump recovery.

    The witness intersection can lose crossings on degenerate target lines
    (symmetry axes, tangents); when the tracked branch then dies mid-piece,
    the lift falls back to the physical relaxation instead of aborting, and
    says so.
    """
    sigma = s_from
    current = point
    for _ in range(4):
        ok = _dense_continue(model, cache, cfg, current, ya, yb, sigma, s_to,
                             t_lo, t_hi, trajectory, events, warnings)
        if ok is not None:
            return ok
        t_last = trajectory[-1].t if trajectory else t_lo
        sigma_f = (t_last - t_lo) / (t_hi - t_lo) if t_hi > t_lo else sigma
        sigma_next = min(max(sigma_f, sigma) + max(GUARD, 1e-3), s_to)
        y_next = ya + sigma_next * (yb - ya)
        succ = post_jump(model, list(y_next), current, cache, cfg)
        if succ is None:
            return None
        t_glob = t_lo + sigma_next * (t_hi - t_lo)
        events.append(
            LiftEvent(t_glob, "stability_lost", y_next,
                      {"segment": segment, "witness_missed": True, "jumped": True,
                       "dx": float(np.max(np.abs(succ[0].x - current.x)))})
        )
        warnings.append(
            f"tracked branch died at t={t_glob:.4f} without a witness crossing; "
            "recovered by energy relaxation"
        )
        current = succ[0]
        sigma = sigma_next
        if sigma >= s_to - 1e-12:
            return current, s_to
    return None


def _dense_continue(model, cache, cfg, point: CriticalPoint, ya, yb,
                    s_from, s_to, t_lo, t_hi, trajectory, events, warnings):
    """Continue one equilibrium densely from s_from to s_to on a segment.

    Appends samples (with certificates) and slack/stability events; returns
    (new point, s_to) or None on tracking failure.
    """
    y_from = ya + s_from * (yb - ya)
    y_to = ya + s_to * (yb - ya)
    crit = model.critical_system(point.stratum)
    span = s_to - s_from
    dense_cfg = replace(cfg, max_step=max(1.0 / MIN_SAMPLES_PER_SEGMENT, 1e-6))
    trace: list = []
    res = parameter_homotopy(crit.system, list(y_from), point.raw.reshape(1, -1),
                             list(y_to), dense_cfg, trace=trace)
    sol = res.raw[0]
    steps = trace[0] if trace else []
    prev_pt = point
    for t_hom, z in steps[1:]:
        s = s_from + (1.0 - t_hom) * span
        y_here = ya + s * (yb - ya)
        if np.max(np.abs(np.asarray(z).imag)) > 1e-6 * max(1.0, np.max(np.abs(z))):
            continue
        pt = _point_from_raw(model, point.stratum, z, list(y_here))
        if pt is None:
            continue
        cert = _certify(model, pt, list(y_here), warnings)
        t_glob = t_lo + s * (t_hi - t_lo)
        trajectory.append(
            TrajectorySample(t_glob, y_here, pt, cert.min_eigenvalue,
                             cert.verdict == "stable")
        )
        for ci in _slack_flip(model, prev_pt, pt, list(y_here)):
            events.append(
                LiftEvent(t_glob, "slack_transition", y_here,
                          {"cable": ci, "delta": float(pt.delta[ci])})
            )
            warnings.append(
                f"cable {ci} crossed its rest length at t={t_glob:.4f}; "
                "tension condition boundary"
            )
        if cert.verdict != "stable" and len(trajectory) >= 2 and trajectory[-2].stable:
            warnings.append(
                f"local stability monitor flipped at t={t_glob:.4f} without a "
                "witness crossing"
            )
        prev_pt = pt
    if sol.status != REGULAR:
        return None
    endpoint = _point_from_raw(model, point.stratum, sol.point, list(y_to))
    if endpoint is None:
        return None
    return endpoint, s_to


def _step_across(model, cache, cfg, point: CriticalPoint, ya, yb, s_from, s_to):
    """Try to continue the tracked equilibrium across a crossing guard.

    Returns (survived, point): survived is False when the branch dies at the
    fold (tracking fails, goes complex, or lands unstable/non-physical).
    """
    y_from = list(ya + s_from * (yb - ya))
    y_to = list(ya + s_to * (yb - ya))
    crit = model.critical_system(point.stratum)
    res = parameter_homotopy(crit.system, y_from, point.raw.reshape(1, -1), y_to, cfg)
    sol = res.raw[0]
    if sol.status != REGULAR:
        return False, point
    landed = _point_from_raw(model, point.stratum, sol.point, y_to)
    if landed is None:
        return False, point
    if np.max(np.abs(landed.x - point.x)) > 0.5:
        # the path jumped branches through the fold; treat as death
        return False, point
    return True, landed


def hysteresis_probe(model: FrameworkModel, loop: ControlPath, x0: Sequence[float],
                     witness: PseudoWitnessSet, cache: SeedCache | None = None,
                     cfg: TrackerConfig | None = None) -> tuple[bool, LiftResult]:
    """Lift a closed loop and report whether the endpoint moved.

    True when the final configuration differs from the start by more than
    1e-3, the signature of a catastrophe crossed along the way.
    """
    if not loop.is_closed():
        raise LiftError("hysteresis probe needs a closed loop (first = last waypoint)")
    result = lift_path(model, loop, x0, witness, cache, cfg)
    if not result.trajectory:
        return False, result
    x_start = np.asarray(x0, dtype=float)
    x_end = result.trajectory[-1].point.x
    return bool(np.linalg.norm(x_end - x_start) > 1e-3), result
