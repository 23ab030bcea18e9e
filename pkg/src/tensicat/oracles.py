"""Independent true-energy oracles over explicit configuration curves.

These never touch the algebraic solver: they parameterize the bar-feasible
set directly (a circle for one anchored node, the coupler curve for a
four-bar linkage), evaluate the max-form Hooke energy on a dense grid, and
count strict local minima.  The solver's stability counts are validated
against them, and the interactive energy strip is served from them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .frameworks import FrameworkModel

__all__ = [
    "CircleOracle",
    "CouplerOracle",
    "make_oracle",
    "count_change_bisect",
]


def _static_xy(model: FrameworkModel, y: Sequence[float], node: int) -> np.ndarray:
    return np.array(
        [model._scalar_value(f"p{node}{k}", (), y) for k in (1, 2)]
    )


def _cable_energy(model: FrameworkModel, y: Sequence[float],
                  coords: dict[int, np.ndarray], G: int) -> np.ndarray:
    """Vectorized max-form Hooke energy over G sampled configurations."""
    total = np.zeros(G)
    for e in model.framework.cables:
        pi = coords.get(e.i)
        if pi is None:
            pi = np.broadcast_to(_static_xy(model, y, e.i), (G, 2))
        pj = coords.get(e.j)
        if pj is None:
            pj = np.broadcast_to(_static_xy(model, y, e.j), (G, 2))
        dist = np.linalg.norm(pi - pj, axis=1)
        r = model._scalar_value(e.rest, (), y)
        c = model._scalar_value(e.elasticity, (), y)
        stretch = np.maximum(0.0, dist - r)
        total += 0.5 * c * stretch**2
    return total


def _strict_minima_cyclic(E: np.ndarray, separation: int = 2) -> list[int]:
    """Indices of strict local minima on a cyclic grid, merged when closer
    than ``separation`` cells (flat plateaus yield none)."""
    n = len(E)
    left = np.roll(E, 1)
    right = np.roll(E, -1)
    idx = np.nonzero((E < left) & (E < right))[0]
    return _merge_close(idx, E, separation, n)


def _merge_close(idx: np.ndarray, E: np.ndarray, separation: int, period: int | None):
    kept: list[int] = []
    for i in sorted(idx, key=lambda k: E[k]):
        close = False
        for j in kept:
            d = abs(i - j)
            if period is not None:
                d = min(d, period - d)
            if d <= separation:
                close = True
                break
        if not close:
            kept.append(int(i))
    return sorted(kept)


@dataclass
class CircleOracle:
    """One internal node riding a circle around a fixed bar anchor."""

    model: FrameworkModel
    node: int
    center: np.ndarray
    radius: float
    resolution: int = 10_000

    def _grid(self, resolution: int | None = None):
        n = resolution or self.resolution
        theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        pts = self.center + self.radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return theta, pts

    def energies(self, y: Sequence[float], resolution: int | None = None):
        theta, pts = self._grid(resolution)
        E = _cable_energy(self.model, y, {self.node: pts}, len(theta))
        return theta, E

    def count_strict_minima(self, y: Sequence[float], resolution: int | None = None) -> int:
        _, E = self.energies(y, resolution)
        return len(_strict_minima_cyclic(E))

    def minima(self, y: Sequence[float], resolution: int | None = None):
        theta, E = self.energies(y, resolution)
        return [(float(theta[i]), float(E[i])) for i in _strict_minima_cyclic(E)]

    def config_of(self, theta: float) -> np.ndarray:
        return self.center + self.radius * np.array([np.cos(theta), np.sin(theta)])

    def theta_of(self, x: Sequence[float]) -> float:
        p = np.asarray(x, dtype=float) - self.center
        return float(np.arctan2(p[1], p[0]) % (2 * np.pi))

    def basin_of(self, y: Sequence[float], x: Sequence[float],
                 resolution: int | None = None) -> int:
        """Index (into the grid) of the minimum reached by discrete descent."""
        theta, E = self.energies(y, resolution)
        n = len(theta)
        i = int(round(self.theta_of(x) / (2 * np.pi) * n)) % n
        while True:
            lo, hi = (i - 1) % n, (i + 1) % n
            j = min((lo, i, hi), key=lambda k: E[k])
            if j == i:
                return i
            i = j

    def profile(self, y: Sequence[float], resolution: int = 720) -> dict:
        theta, E = self.energies(y, resolution)
        return {"kind": "circle", "theta": theta.tolist(), "energy": E.tolist()}


@dataclass
class CouplerOracle:
    """Four-bar coupler-curve oracle: crank angle times two assembly branches."""

    model: FrameworkModel
    crank_node: int
    crank_center: np.ndarray
    crank_radius: float
    follower_node: int
    follower_center: np.ndarray
    follower_radius: float
    coupler_length: float
    resolution: int = 4_000
    edge_exclusion: int = 3

    def _solve_follower(self, crank_pts: np.ndarray):
        """Two-circle intersection for the follower node, both branches.

        Returns (plus, minus, valid) with nan rows where the circles miss.
        """
        A = self.follower_center
        R = self.follower_radius
        r = self.coupler_length
        d = np.linalg.norm(crank_pts - A, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            a = (d**2 + R**2 - r**2) / (2 * d)
            h2 = R**2 - a**2
            valid = (h2 >= 0) & (d > 1e-12)
            h = np.sqrt(np.where(valid, h2, np.nan))
            u = (crank_pts - A) / d[:, None]
            mid = A + a[:, None] * u
            perp = np.stack([-u[:, 1], u[:, 0]], axis=1)
            plus = mid + h[:, None] * perp
            minus = mid - h[:, None] * perp
        return plus, minus, valid

    def sample(self, y: Sequence[float], resolution: int | None = None):
        n = resolution or self.resolution
        phi = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        crank = self.crank_center + self.crank_radius * np.stack(
            [np.cos(phi), np.sin(phi)], axis=1
        )
        plus, minus, valid = self._solve_follower(crank)
        energies = {}
        for name, fol in (("plus", plus), ("minus", minus)):
            E = _cable_energy(
                self.model, y, {self.crank_node: crank, self.follower_node: fol}, n
            )
            energies[name] = np.where(valid, E, np.nan)
        return phi, crank, {"plus": plus, "minus": minus}, energies, valid

    def _loops(self, valid: np.ndarray):
        """Closed index loops of the glued configuration curve.

        The coupler curve continues onto the twin assembly branch wherever
        the crank angle hits a travel limit (two-circle tangency), so each
        contiguous valid angle run becomes one loop: forward on one branch,
        back on the other.  A fully valid crank keeps the branches as two
        separate cycles.
        """
        n = len(valid)
        if valid.all():
            return [
                [(i, "plus") for i in range(n)],
                [(i, "minus") for i in range(n)],
            ]
        runs = []
        i = 0
        while i < n:
            if valid[i] and not valid[(i - 1) % n]:
                j = i
                run = []
                while valid[j % n]:
                    run.append(j % n)
                    j += 1
                runs.append(run)
                i = j
            else:
                i += 1
        return [
            [(k, "plus") for k in run] + [(k, "minus") for k in reversed(run)]
            for run in runs
        ]

    def count_strict_minima(self, y: Sequence[float], resolution: int | None = None) -> int:
        return len(self.minima(y, resolution))

    def minima(self, y: Sequence[float], resolution: int | None = None):
        """(phi, branch, energy) of strict minima on the glued curve.

        Strictness is judged along the loops, so equilibria parked at linkage
        travel limits (branch points) are counted once like any other."""
        phi, _, _, energies, valid = self.sample(y, resolution)
        out = []
        for loop in self._loops(valid):
            E = np.array([energies[br][i] for i, br in loop])
            m = len(E)
            if m < 3:
                continue
            idx = _strict_minima_cyclic(E)
            for k in idx:
                i, br = loop[k]
                out.append((float(phi[i]), br, float(E[k])))
        return out

    def branch_of(self, y: Sequence[float], x: Sequence[float]) -> tuple[float, str]:
        """(crank angle, branch) of an internal configuration vector."""
        coords = self._internal_coords(x)
        crank = coords[self.crank_node]
        fol = coords[self.follower_node]
        phi = float(
            np.arctan2(crank[1] - self.crank_center[1], crank[0] - self.crank_center[0])
            % (2 * np.pi)
        )
        plus, minus, _ = self._solve_follower(crank.reshape(1, 2))
        dp = np.linalg.norm(plus[0] - fol)
        dm = np.linalg.norm(minus[0] - fol)
        return phi, "plus" if dp <= dm else "minus"

    def _internal_coords(self, x: Sequence[float]) -> dict[int, np.ndarray]:
        names = self.model.partition.internal
        vals = dict(zip(names, x))
        out = {}
        for node in (self.crank_node, self.follower_node):
            out[node] = np.array([vals[f"p{node}1"], vals[f"p{node}2"]])
        return out

    def basin_of(self, y: Sequence[float], x: Sequence[float],
                 resolution: int | None = None) -> tuple[int, str]:
        """Grid index and branch of the minimum reached by discrete descent.

        Descent hops to the other branch at assembly-branch boundaries,
        following the glued coupler curve.
        """
        phi, _, _, energies, _ = self.sample(y, resolution)
        n = len(phi)
        phi0, branch = self.branch_of(y, x)
        i = int(round(phi0 / (2 * np.pi) * n)) % n
        E = energies[branch]
        if not np.isfinite(E[i]):
            finite = np.nonzero(np.isfinite(E))[0]
            i = int(finite[np.argmin(np.abs((finite - i + n // 2) % n - n // 2))])
        other = {"plus": "minus", "minus": "plus"}
        for _ in range(4 * n):
            lo, hi = (i - 1) % n, (i + 1) % n
            cands = [(energies[branch][k], k, branch) for k in (lo, i, hi)
                     if np.isfinite(energies[branch][k])]
            # glue: at a branch-run boundary the curve continues on the twin
            for k in (lo, hi):
                if not np.isfinite(energies[branch][k]) and np.isfinite(energies[other[branch]][i]):
                    cands.append((energies[other[branch]][i], i, other[branch]))
            _, j, br = min(cands)
            if j == i and br == branch:
                return i, branch
            i, branch = j, br
        return i, branch

    def profile(self, y: Sequence[float], resolution: int = 720) -> dict:
        phi, _, _, energies, _ = self.sample(y, resolution)
        clean = {
            k: [None if not np.isfinite(v) else float(v) for v in E]
            for k, E in energies.items()
        }
        return {"kind": "coupler", "phi": phi.tolist(), "energy": clean}


def make_oracle(model: FrameworkModel):
    """Pick the configuration-curve oracle matching the framework topology."""
    part = model.partition
    internal_nodes = sorted(
        {int(n[1]) for n in part.internal if n.startswith("p") and len(n) == 3}
    )
    if any(not n.startswith("p") for n in part.internal):
        raise ValueError("oracles need coordinate-only internal parameters")
    bars = model.framework.bars

    def fixed_xy(node):
        names = [f"p{node}1", f"p{node}2"]
        if all(nm in part.fixed for nm in names):
            return np.array([part.fixed[nm] for nm in names])
        return None

    def length_of(bar):
        if isinstance(bar.length, str):
            raise ValueError("oracle bars need numeric lengths")
        return float(bar.length)

    if len(internal_nodes) == 1:
        node = internal_nodes[0]
        anchored = [b for b in bars if node in (b.i, b.j)]
        if len(anchored) == 1:
            b = anchored[0]
            other = b.j if b.i == node else b.i
            center = fixed_xy(other)
            if center is not None:
                return CircleOracle(model, node, center, length_of(b))
    if len(internal_nodes) == 2:
        u, v = internal_nodes
        pair = [b for b in bars if {b.i, b.j} == {u, v}]
        u_anchor = [b for b in bars if u in (b.i, b.j) and {b.i, b.j} != {u, v}]
        v_anchor = [b for b in bars if v in (b.i, b.j) and {b.i, b.j} != {u, v}]
        if pair and len(u_anchor) == 1 and len(v_anchor) == 1:
            crank, follower = v, u
            crank_bar, fol_bar = v_anchor[0], u_anchor[0]
            crank_other = crank_bar.j if crank_bar.i == crank else crank_bar.i
            fol_other = fol_bar.j if fol_bar.i == follower else fol_bar.i
            cc = fixed_xy(crank_other)
            fc = fixed_xy(fol_other)
            if cc is not None and fc is not None:
                return CouplerOracle(
                    model,
                    crank_node=crank,
                    crank_center=cc,
                    crank_radius=length_of(crank_bar),
                    follower_node=follower,
                    follower_center=fc,
                    follower_radius=length_of(fol_bar),
                    coupler_length=length_of(pair[0]),
                )
    raise ValueError("no configuration-curve oracle for this framework topology")


def count_change_bisect(count: Callable[[np.ndarray], int],
                        y_of: Callable[[float], np.ndarray],
                        a: float, b: float, tol: float = 1e-6) -> float:
    """Bisect [a, b] for the parameter where the minima count changes."""
    ca = count(y_of(a))
    cb = count(y_of(b))
    if ca == cb:
        raise ValueError("counts agree at both ends; nothing to bisect")
    while b - a > tol:
        m = 0.5 * (a + b)
        if count(y_of(m)) == ca:
            a = m
        else:
            b = m
    return 0.5 * (a + b)
