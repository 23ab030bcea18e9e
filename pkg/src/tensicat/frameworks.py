"""Elastic tensegrity frameworks: rigid bars plus Hookean cables.

A framework is a graph with bars (hard length constraints) and elastic
cables (energy 0.5*c*(stretch)^2), together with a partition of its scalar
data into internal unknowns, control parameters and fixed values.  This
module assembles every polynomial system the toolkit solves:

* the bar constraints,
* the square-root-free constraint system g (one slack variable per cable),
* the algebraic energy,
* the critical-point system (gradient of the Lagrangian), and
* the fold system whose zero set projects onto the catastrophe discriminant.

Scalar names follow ``p{i}{k}`` for node coordinates, ``l{i}{j}`` for bar
lengths, ``r{i}{j}``/``c{i}{j}`` for cable rest lengths and elasticities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .expressions import (
    ExpressionSystem,
    Node,
    Param,
    Power,
    Prod,
    Sum,
    Var,
    VariableId,
    add,
    const,
    mul,
    negate,
    power,
    sub,
)

__all__ = [
    "EdgeSpec",
    "CableSpec",
    "ElasticFramework",
    "ParameterPartition",
    "ControlSlice",
    "Configuration",
    "FrameworkModel",
    "CriticalSystem",
    "FoldSystem",
    "FrameworkError",
    "InfeasibleFramework",
    "load_framework",
    "load_framework_file",
    "bundled_path",
]


class FrameworkError(ValueError):
    pass


class InfeasibleFramework(FrameworkError):
    """A constraint involving only fixed scalars is violated."""


# A scalar spec is either a real number or the name of a partition scalar.
Spec = float | str


@dataclass(frozen=True)
class EdgeSpec:
    i: int
    j: int
    length: Spec


@dataclass(frozen=True)
class CableSpec:
    i: int
    j: int
    rest: Spec
    elasticity: Spec


@dataclass(frozen=True)
class ElasticFramework:
    n_nodes: int
    dim: int
    bars: tuple[EdgeSpec, ...]
    cables: tuple[CableSpec, ...]

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise FrameworkError(f"dim must be 2 or 3, got {self.dim}")
        seen = set()
        for e in list(self.bars) + list(self.cables):
            if not (1 <= e.i <= self.n_nodes and 1 <= e.j <= self.n_nodes):
                raise FrameworkError(f"edge {e.i}{e.j} references a node outside 1..{self.n_nodes}")
            if e.i == e.j:
                raise FrameworkError(f"edge {e.i}{e.j} is a loop")
            key = frozenset((e.i, e.j))
            if key in seen:
                raise FrameworkError(f"edge {e.i}{e.j} appears twice")
            seen.add(key)
        for e in self.bars:
            if isinstance(e.length, (int, float)) and e.length <= 0:
                raise FrameworkError(f"bar {e.i}{e.j} has nonpositive length")
        for e in self.cables:
            if isinstance(e.rest, (int, float)) and e.rest <= 0:
                raise FrameworkError(f"cable {e.i}{e.j} has nonpositive rest length")
            if isinstance(e.elasticity, (int, float)) and e.elasticity <= 0:
                raise FrameworkError(f"cable {e.i}{e.j} has nonpositive elasticity")

    def coordinate_names(self) -> list[str]:
        return [f"p{i}{k}" for i in range(1, self.n_nodes + 1) for k in range(1, self.dim + 1)]

    def named_edge_scalars(self) -> list[str]:
        out = []
        for e in self.bars:
            if isinstance(e.length, str):
                out.append(e.length)
        for e in self.cables:
            if isinstance(e.rest, str):
                out.append(e.rest)
            if isinstance(e.elasticity, str):
                out.append(e.elasticity)
        return out


@dataclass(frozen=True)
class ParameterPartition:
    internal: tuple[str, ...]
    control: tuple[str, ...]
    fixed: dict[str, float] = field(default_factory=dict)

    def validate(self, fw: ElasticFramework) -> None:
        names = set(self.internal) | set(self.control) | set(self.fixed)
        if len(self.internal) + len(self.control) + len(self.fixed) != len(names):
            raise FrameworkError("internal/control/fixed sets overlap")
        required = set(fw.coordinate_names()) | set(fw.named_edge_scalars())
        missing = required - names
        if missing:
            raise FrameworkError(f"partition does not cover scalars: {sorted(missing)}")
        extra = names - required
        if extra:
            raise FrameworkError(f"partition names unknown scalars: {sorted(extra)}")


@dataclass(frozen=True)
class ControlSlice:
    """Affine-linear chart inside the control space: base + span(directions)."""

    base: tuple[float, ...]
    directions: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        for d in self.directions:
            if len(d) != len(self.base):
                raise FrameworkError("slice direction length does not match base")
        if self.directions:
            M = np.array(self.directions, dtype=complex)
            if np.linalg.matrix_rank(M) < len(self.directions):
                raise FrameworkError("slice directions are linearly dependent")

    @property
    def dim(self) -> int:
        return len(self.directions)


@dataclass(frozen=True)
class Configuration:
    x: tuple[float, ...]
    y: tuple[float, ...]


@dataclass(frozen=True)
class CriticalSystem:
    """The square first-order optimality system for one tension stratum.

    Variables are ordered (internal..., slack per active cable...,
    multiplier per active edge...).  ``cables_active`` indexes into the
    framework's cable list; ``edges`` names the active edges in multiplier
    order.
    """

    system: ExpressionSystem
    n_internal: int
    cables_active: tuple[int, ...]
    edges: tuple[str, ...]

    @property
    def n_variables(self) -> int:
        return self.system.n_variables

    def split(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        nx = self.n_internal
        nc = len(self.cables_active)
        return z[:nx], z[nx : nx + nc], z[nx + nc :]


@dataclass(frozen=True)
class FoldSystem:
    """Square system cutting out folds of the critical-point family over a line.

    Variables: (x, delta, lambda, v, t) where v is the projective null
    vector of the Lagrangian Hessian pinned by one random affine chart and
    t parameterizes the control line base + t*direction.  Parameters: the
    2m line coefficients (base, direction), so moving between lines is a
    parameter homotopy.
    """

    system: ExpressionSystem
    critical: CriticalSystem
    chart: tuple[complex, ...]

    @property
    def n_core(self) -> int:
        return self.critical.n_variables

    def line_params(self, base: Sequence[complex], direction: Sequence[complex]) -> list[complex]:
        return [complex(v) for v in base] + [complex(v) for v in direction]

    def split(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, complex]:
        n = self.n_core
        return z[:n], z[n : 2 * n], z[2 * n]


def _substitute_params(roots: Sequence[Node], table: dict[int, Node]) -> list[Node]:
    """Replace Param nodes by expressions; Var indices are left untouched."""
    memo: dict[int, Node] = {}

    def rec(node: Node) -> Node:
        got = memo.get(id(node))
        if got is not None:
            return got
        if isinstance(node, Param):
            out = table[node.index]
        elif isinstance(node, Sum):
            out = add(*(rec(t) for t in node.terms))
        elif isinstance(node, Prod):
            out = mul(*(rec(f) for f in node.factors))
        elif isinstance(node, Power):
            out = power(rec(node.base), node.exponent)
        else:
            out = node
        memo[id(node)] = out
        return out

    return [rec(r) for r in roots]


def _shift_vars(roots: Sequence[Node], offset: int) -> list[Node]:
    memo: dict[int, Node] = {}

    def rec(node: Node) -> Node:
        got = memo.get(id(node))
        if got is not None:
            return got
        if isinstance(node, Var):
            out: Node = Var(node.index + offset) if offset else node
        elif isinstance(node, Sum):
            out = add(*(rec(t) for t in node.terms))
        elif isinstance(node, Prod):
            out = mul(*(rec(f) for f in node.factors))
        elif isinstance(node, Power):
            out = power(rec(node.base), node.exponent)
        else:
            out = node
        memo[id(node)] = out
        return out

    return [rec(r) for r in roots]


class FrameworkModel:
    """A framework with its partition, plus cached assembled systems.

    The model is immutable after construction; all assembly is pure and
    cached, so instances are safe to share across threads.
    """

    def __init__(self, fw: ElasticFramework, partition: ParameterPartition):
        partition.validate(fw)
        self.framework = fw
        self.partition = partition
        self._internal_index = {n: i for i, n in enumerate(partition.internal)}
        self._control_index = {n: i for i, n in enumerate(partition.control)}
        self._crit_cache: dict[frozenset, CriticalSystem] = {}
        self._fold_cache: dict = {}
        self._energy_cache: dict = {}
        # scratch space for downstream modules caching compiled evaluators
        self.aux_cache: dict = {}

    # -- scalar lookup ------------------------------------------------------

    @property
    def n_internal(self) -> int:
        return len(self.partition.internal)

    @property
    def n_control(self) -> int:
        return len(self.partition.control)

    def _scalar_node(self, spec: Spec) -> Node:
        """Expression for a scalar spec over (internal vars, control params)."""
        if isinstance(spec, (int, float)):
            return const(float(spec))
        if spec in self._internal_index:
            return Var(self._internal_index[spec])
        if spec in self._control_index:
            return Param(self._control_index[spec])
        if spec in self.partition.fixed:
            return const(self.partition.fixed[spec])
        raise FrameworkError(f"scalar {spec!r} is not in the partition")

    def _scalar_value(self, spec: Spec, x: Sequence[float], y: Sequence[float]) -> float:
        if isinstance(spec, (int, float)):
            return float(spec)
        if spec in self._internal_index:
            return float(np.real(x[self._internal_index[spec]]))
        if spec in self._control_index:
            return float(np.real(y[self._control_index[spec]]))
        return self.partition.fixed[spec]

    def positions(self, x: Sequence[float], y: Sequence[float]) -> np.ndarray:
        """Node coordinates as an (n_nodes, dim) array."""
        fw = self.framework
        P = np.empty((fw.n_nodes, fw.dim))
        for i in range(1, fw.n_nodes + 1):
            for k in range(1, fw.dim + 1):
                P[i - 1, k - 1] = self._scalar_value(f"p{i}{k}", x, y)
        return P

    # -- effective edges ----------------------------------------------------

    def _edge_gap_sq(self, i: int, j: int) -> Node:
        """Sum_k (p_ik - p_jk)^2 as an expression node."""
        fw = self.framework
        terms = []
        for k in range(1, fw.dim + 1):
            d = sub(self._scalar_node(f"p{i}{k}"), self._scalar_node(f"p{j}{k}"))
            terms.append(power(d, 2))
        return add(*terms)

    def effective_bars(self) -> list[EdgeSpec]:
        """Bars that actually constrain something.

        A bar whose endpoints and length are all fixed contributes the
        constant polynomial; if that constant vanishes the bar is vacuous
        and dropped from the algebra (its multiplier would be a free
        variable), otherwise the framework is infeasible.
        """
        out = []
        for e in self.framework.bars:
            g = sub(power(self._scalar_node(e.length), 2), self._edge_gap_sq(e.i, e.j))
            refs_var = any(isinstance(n, (Var, Param)) for n in _iter_nodes(g))
            if refs_var:
                out.append(e)
                continue
            value = _const_value(g)
            if abs(value) > 1e-9:
                raise InfeasibleFramework(
                    f"bar {e.i}{e.j} connects fixed nodes but its length is off by {value:.3g}"
                )
        return out

    def edge_names(self, cables_active: Sequence[int] | None = None) -> list[str]:
        names = [f"{e.i}{e.j}" for e in self.effective_bars()]
        for ci in self._active(cables_active):
            e = self.framework.cables[ci]
            names.append(f"{e.i}{e.j}")
        return names

    def _active(self, cables_active: Sequence[int] | None) -> list[int]:
        if cables_active is None:
            return list(range(len(self.framework.cables)))
        return sorted(cables_active)

    # -- assembled systems ----------------------------------------------------

    def _var_ids(self, names: Sequence[str]) -> tuple[VariableId, ...]:
        return tuple(VariableId(i, n) for i, n in enumerate(names))

    def _control_ids(self) -> tuple[VariableId, ...]:
        return self._var_ids(self.partition.control)

    def bar_constraints(self) -> ExpressionSystem:
        """One output per effective bar: sum_k (p_ik-p_jk)^2 - l^2."""
        g = self.algebraic_constraints(cables_active=())
        outs = tuple(negate(o) for o in g.outputs)
        vids = self._var_ids(list(self.partition.internal))
        return ExpressionSystem(vids, self._control_ids(), outs)

    def algebraic_constraints(self, cables_active: Sequence[int] | None = None) -> ExpressionSystem:
        """The square-root-free constraint system g over (x..., delta...)."""
        active = self._active(cables_active)
        var_names = list(self.partition.internal) + [
            f"delta{self.framework.cables[ci].i}{self.framework.cables[ci].j}" for ci in active
        ]
        outs = []
        for e in self.effective_bars():
            outs.append(sub(power(self._scalar_node(e.length), 2), self._edge_gap_sq(e.i, e.j)))
        for slot, ci in enumerate(active):
            e = self.framework.cables[ci]
            dvar = Var(self.n_internal + slot)
            outs.append(sub(power(dvar, 2), self._edge_gap_sq(e.i, e.j)))
        return ExpressionSystem(self._var_ids(var_names), self._control_ids(), tuple(outs))

    def algebraic_energy(self, cables_active: Sequence[int] | None = None) -> ExpressionSystem:
        """Single output: sum over active cables of 0.5*c*(delta - r)^2."""
        key = frozenset(self._active(cables_active))
        if key in self._energy_cache:
            return self._energy_cache[key]
        active = self._active(cables_active)
        var_names = list(self.partition.internal) + [
            f"delta{self.framework.cables[ci].i}{self.framework.cables[ci].j}" for ci in active
        ]
        terms = []
        for slot, ci in enumerate(active):
            e = self.framework.cables[ci]
            dvar = Var(self.n_internal + slot)
            stretch = sub(dvar, self._scalar_node(e.rest))
            terms.append(mul(const(0.5), self._scalar_node(e.elasticity), power(stretch, 2)))
        sys = ExpressionSystem(self._var_ids(var_names), self._control_ids(), (add(*terms),))
        self._energy_cache[key] = sys
        return sys

    def critical_system(self, cables_active: Sequence[int] | None = None) -> CriticalSystem:
        """The square system of all partials of Q~ + sum(lambda*g)."""
        key = frozenset(self._active(cables_active))
        got = self._crit_cache.get(key)
        if got is not None:
            return got
        active = self._active(cables_active)
        g = self.algebraic_constraints(active)
        energy = self.algebraic_energy(active)
        n_xd = g.n_variables
        n_edges = g.n_outputs
        var_names = [v.name for v in g.variables] + [f"lambda{n}" for n in self.edge_names(active)]
        lagrangian = add(
            energy.outputs[0],
            *(mul(Var(n_xd + k), out) for k, out in enumerate(g.outputs)),
        )
        vids = self._var_ids(var_names)
        full = ExpressionSystem(vids, self._control_ids(), (lagrangian,))
        grads = []
        cache: dict[int, Node] = {}
        from .expressions import _diff  # symbolic gradient of the Lagrangian

        for idx in range(len(var_names)):
            cache = {}
            grads.append(_diff(lagrangian, Var(idx), cache))
        sys = ExpressionSystem(vids, self._control_ids(), tuple(grads))
        crit = CriticalSystem(
            system=sys,
            n_internal=self.n_internal,
            cables_active=tuple(active),
            edges=tuple(self.edge_names(active)),
        )
        self._crit_cache[key] = crit
        return crit

    def fold_system(self, chart: Sequence[complex] | None = None, rng=None) -> FoldSystem:
        """The fold system over a movable line in control space.

        The line is ``y = base + t*direction`` with (base, direction) as the
        system's parameters; ``t`` joins the variables.  ``chart`` pins the
        projective null vector via <chart, v> = 1; by default it is drawn
        from ``rng`` (or a fixed seed when omitted).
        """
        crit = self.critical_system()
        n = crit.n_variables
        m = self.n_control
        if chart is None:
            if rng is None:
                rng = np.random.default_rng(20210923)
            angles = rng.uniform(0, 2 * np.pi, size=n)
            radii = rng.uniform(0.5, 1.5, size=n)
            chart = tuple(radii * np.exp(1j * angles))
        chart = tuple(complex(c) for c in chart)
        key = chart
        got = self._fold_cache.get(key)
        if got is not None:
            return got

        dL = crit.system
        # second derivatives of the Lagrangian = Jacobian of dL wrt z
        from .expressions import _diff

        col_caches: list[dict[int, Node]] = [{} for _ in range(n)]
        rows: list[list[Node]] = []
        for out in dL.outputs:
            rows.append([_diff(out, Var(j), col_caches[j]) for j in range(n)])

        # variable layout of the fold system: (z..., v..., t)
        t_index = 2 * n
        var_names = [v.name for v in dL.variables] + [f"v{j}" for j in range(n)] + ["t"]
        param_names = [f"base_{c}" for c in self.partition.control] + [
            f"dir_{c}" for c in self.partition.control
        ]
        # control y_k -> base_k + t*dir_k
        table = {
            k: add(Param(k), mul(Var(t_index), Param(m + k))) for k in range(m)
        }

        dl_rows = _substitute_params(list(dL.outputs), table)
        hess_rows = []
        for row in rows:
            row_sub = _substitute_params(row, table)
            hess_rows.append(add(*(mul(e, Var(n + j)) for j, e in enumerate(row_sub))))
        chart_eq = add(*(mul(const(c), Var(n + j)) for j, c in enumerate(chart)), const(-1))
        outs = tuple(dl_rows) + tuple(hess_rows) + (chart_eq,)
        sys = ExpressionSystem(self._var_ids(var_names), self._var_ids(param_names), outs)
        fold = FoldSystem(system=sys, critical=crit, chart=chart)
        self._fold_cache[key] = fold
        return fold

    # -- energies and geometry ------------------------------------------------

    def edge_distances(self, x: Sequence[float], y: Sequence[float]) -> dict[str, float]:
        P = self.positions(x, y)
        out = {}
        for e in list(self.framework.bars) + list(self.framework.cables):
            out[f"{e.i}{e.j}"] = float(np.linalg.norm(P[e.i - 1] - P[e.j - 1]))
        return out

    def cable_data(self, y: Sequence[float]) -> list[tuple[float, float]]:
        """(rest, elasticity) per cable at the given controls."""
        return [
            (self._scalar_value(e.rest, (), y), self._scalar_value(e.elasticity, (), y))
            for e in self.framework.cables
        ]

    def true_energy(self, x: Sequence[float], y: Sequence[float]) -> float:
        """Hooke energy with slack cables carrying zero force (the max-form)."""
        P = self.positions(x, y)
        total = 0.0
        for e in self.framework.cables:
            dist = float(np.linalg.norm(P[e.i - 1] - P[e.j - 1]))
            r = self._scalar_value(e.rest, x, y)
            c = self._scalar_value(e.elasticity, x, y)
            stretch = max(0.0, dist - r)
            total += 0.5 * c * stretch * stretch
        return total

    def true_energy_gradient(self, x: np.ndarray, y: Sequence[float]) -> np.ndarray:
        """d(true energy)/dx; slack cables contribute nothing."""
        x = np.asarray(x, dtype=float)
        P = self.positions(x, y)
        grad = np.zeros(len(x))
        coord_slot = {}
        for name, idx in self._internal_index.items():
            if name.startswith("p"):
                coord_slot[(int(name[1]), int(name[2]))] = idx
        for e in self.framework.cables:
            d = P[e.i - 1] - P[e.j - 1]
            dist = float(np.linalg.norm(d))
            r = self._scalar_value(e.rest, x, y)
            c = self._scalar_value(e.elasticity, x, y)
            if dist <= r or dist == 0.0:
                continue
            coef = c * (dist - r) / dist
            for k in range(1, self.framework.dim + 1):
                si = coord_slot.get((e.i, k))
                if si is not None:
                    grad[si] += coef * d[k - 1]
                sj = coord_slot.get((e.j, k))
                if sj is not None:
                    grad[sj] -= coef * d[k - 1]
        return grad


def _iter_nodes(root: Node):
    stack = [root]
    seen = set()
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        yield n
        if isinstance(n, Sum):
            stack.extend(n.terms)
        elif isinstance(n, Prod):
            stack.extend(n.factors)
        elif isinstance(n, Power):
            stack.append(n.base)


def _const_value(root: Node) -> complex:
    from .expressions import compile_kernel

    sys = ExpressionSystem((), (), (root,))
    return complex(sys.evaluate([], [])[0])


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def _spec_from_json(v) -> Spec:
    if isinstance(v, dict):
        return str(v["param"])
    return float(v)


def load_framework(doc: dict) -> tuple[FrameworkModel, ControlSlice | None]:
    """Build a model from a parsed framework description document."""
    try:
        dim = int(doc["dim"])
        n_nodes = int(doc["nodes"])
        bars = tuple(
            EdgeSpec(int(b["i"]), int(b["j"]), _spec_from_json(b["length"])) for b in doc.get("bars", [])
        )
        cables = tuple(
            CableSpec(
                int(c["i"]),
                int(c["j"]),
                _spec_from_json(c["rest"]),
                _spec_from_json(c["elasticity"]),
            )
            for c in doc.get("cables", [])
        )
        part = doc["partition"]
        partition = ParameterPartition(
            internal=tuple(part["internal"]),
            control=tuple(part["control"]),
            fixed={k: float(v) for k, v in part.get("fixed", {}).items()},
        )
    except (KeyError, TypeError) as exc:
        raise FrameworkError(f"malformed framework description: {exc}") from exc
    fw = ElasticFramework(n_nodes=n_nodes, dim=dim, bars=bars, cables=cables)
    model = FrameworkModel(fw, partition)
    slc = None
    if "slice" in doc and doc["slice"] is not None:
        s = doc["slice"]
        slc = ControlSlice(
            base=tuple(float(v) for v in s["base"]),
            directions=tuple(tuple(float(v) for v in d) for d in s["directions"]),
        )
    return model, slc


def load_framework_file(path: str | Path) -> tuple[FrameworkModel, ControlSlice | None]:
    with open(path) as fh:
        return load_framework(json.load(fh))


def bundled_path(name: str) -> Path:
    """Path to one of the example framework files shipped with the package."""
    p = Path(__file__).parent / "data" / f"{name}.json"
    if not p.exists():
        raise FileNotFoundError(f"no bundled framework {name!r}")
    return p
