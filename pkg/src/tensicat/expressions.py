"""Polynomial systems as expression DAGs over complex scalars.

Every system solved by the toolkit (bar constraints, algebraic energy,
Lagrangian gradients, fold systems) is assembled from a handful of node
kinds: constants, variable/parameter references, n-ary sums and products,
and integer powers.  Nodes are immutable and compared by identity, so
shared subexpressions are differentiated and code-generated exactly once.

Differentiation is symbolic on the DAG (product rule on node children),
never numeric; the compiled kernels therefore provide exact Jacobians for
Newton correction and exact Hessians for stability certificates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "VariableId",
    "Node",
    "Const",
    "Var",
    "Param",
    "Sum",
    "Prod",
    "Power",
    "const",
    "add",
    "sub",
    "mul",
    "power",
    "negate",
    "ExpressionSystem",
    "DimensionError",
    "differentiate",
    "jacobian",
    "hessian_of_scalar",
    "compile_kernel",
    "SystemKernel",
    "format_node",
]


class DimensionError(ValueError):
    """Vector length does not match the system's declared dimension."""


@dataclass(frozen=True)
class VariableId:
    """A named slot in a system's variable or parameter list."""

    index: int
    name: str


class Node:
    __slots__ = ()


@dataclass(frozen=True, eq=False)
class Const(Node):
    value: complex


@dataclass(frozen=True, eq=False)
class Var(Node):
    index: int


@dataclass(frozen=True, eq=False)
class Param(Node):
    index: int


@dataclass(frozen=True, eq=False)
class Sum(Node):
    terms: tuple


@dataclass(frozen=True, eq=False)
class Prod(Node):
    factors: tuple


@dataclass(frozen=True, eq=False)
class Power(Node):
    base: Node
    exponent: int


_ZERO = Const(0j)
_ONE = Const(1 + 0j)


def const(value) -> Const:
    value = complex(value)
    if value == 0:
        return _ZERO
    if value == 1:
        return _ONE
    return Const(value)


def _is_zero(node: Node) -> bool:
    return isinstance(node, Const) and node.value == 0


def add(*terms: Node) -> Node:
    """Sum with flattening and constant folding; returns Const(0) when empty."""
    flat: list[Node] = []
    acc = 0j
    for t in terms:
        if isinstance(t, Sum):
            for s in t.terms:
                if isinstance(s, Const):
                    acc += s.value
                else:
                    flat.append(s)
        elif isinstance(t, Const):
            acc += t.value
        else:
            flat.append(t)
    if acc != 0:
        flat.append(const(acc))
    if not flat:
        return _ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def mul(*factors: Node) -> Node:
    """Product with flattening, constant folding and zero absorption."""
    flat: list[Node] = []
    acc = 1 + 0j
    for f in factors:
        if isinstance(f, Prod):
            for g in f.factors:
                if isinstance(g, Const):
                    acc *= g.value
                else:
                    flat.append(g)
        elif isinstance(f, Const):
            acc *= f.value
        else:
            flat.append(f)
    if acc == 0:
        return _ZERO
    if acc != 1:
        flat.insert(0, const(acc))
    if not flat:
        return _ONE
    if len(flat) == 1:
        return flat[0]
    return Prod(tuple(flat))


def sub(a: Node, b: Node) -> Node:
    return add(a, mul(const(-1), b))


def negate(a: Node) -> Node:
    return mul(const(-1), a)


def power(base: Node, exponent: int) -> Node:
    if exponent < 0:
        raise ValueError(f"negative exponent {exponent} not allowed")
    if exponent == 0:
        return _ONE
    if exponent == 1:
        return base
    if isinstance(base, Const):
        return const(base.value**exponent)
    if isinstance(base, Power):
        return Power(base.base, base.exponent * exponent)
    return Power(base, exponent)


def _walk(roots: Iterable[Node]) -> list[Node]:
    """Post-order over the DAG, each node once (identity-keyed)."""
    seen: set[int] = set()
    order: list[Node] = []
    stack: list[tuple[Node, bool]] = [(r, False) for r in roots]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if expanded:
            seen.add(id(node))
            order.append(node)
            continue
        stack.append((node, True))
        if isinstance(node, Sum):
            stack.extend((t, False) for t in node.terms)
        elif isinstance(node, Prod):
            stack.extend((f, False) for f in node.factors)
        elif isinstance(node, Power):
            stack.append((node.base, False))
    return order


def _degrees(roots: Sequence[Node]) -> list[int]:
    """Structural total degree of each root in the variables (params count 0)."""
    deg: dict[int, int] = {}
    for node in _walk(roots):
        if isinstance(node, (Const, Param)):
            deg[id(node)] = 0
        elif isinstance(node, Var):
            deg[id(node)] = 1
        elif isinstance(node, Sum):
            deg[id(node)] = max(deg[id(t)] for t in node.terms)
        elif isinstance(node, Prod):
            deg[id(node)] = sum(deg[id(f)] for f in node.factors)
        elif isinstance(node, Power):
            deg[id(node)] = node.exponent * deg[id(node.base)]
    return [deg[id(r)] for r in roots]


def _referenced(roots: Sequence[Node]) -> tuple[set[int], set[int]]:
    vs: set[int] = set()
    ps: set[int] = set()
    for node in _walk(roots):
        if isinstance(node, Var):
            vs.add(node.index)
        elif isinstance(node, Param):
            ps.add(node.index)
    return vs, ps


@dataclass(frozen=True)
class ExpressionSystem:
    """A list of polynomial outputs over declared variables and parameters."""

    variables: tuple[VariableId, ...]
    parameters: tuple[VariableId, ...]
    outputs: tuple[Node, ...]
    _kernel_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        names = [v.name for v in self.variables] + [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise ValueError("variable/parameter names must be unique")
        for i, v in enumerate(self.variables):
            if v.index != i:
                raise ValueError(f"variable {v.name} has index {v.index}, expected {i}")
        for i, p in enumerate(self.parameters):
            if p.index != i:
                raise ValueError(f"parameter {p.name} has index {p.index}, expected {i}")
        vs, ps = _referenced(self.outputs)
        if vs and max(vs) >= len(self.variables):
            raise ValueError("output references an undeclared variable")
        if ps and max(ps) >= len(self.parameters):
            raise ValueError("output references an undeclared parameter")

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_parameters(self) -> int:
        return len(self.parameters)

    @property
    def n_outputs(self) -> int:
        return len(self.outputs)

    def degrees(self) -> list[int]:
        return _degrees(self.outputs)

    def variable_named(self, name: str) -> VariableId:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(f"no variable named {name!r}")

    def kernel(self, order: int = 0) -> "SystemKernel":
        """Compiled evaluator, cached per differentiation order (0 or 1)."""
        key = order
        if key not in self._kernel_cache:
            self._kernel_cache[key] = compile_kernel(self, with_jacobians=order >= 1)
        return self._kernel_cache[key]

    def evaluate(self, point, params=()) -> np.ndarray:
        """Outputs at (point, params), as a complex vector."""
        point = list(point)
        params = list(params)
        if len(point) != self.n_variables:
            raise DimensionError(
                f"point has length {len(point)}, system has {self.n_variables} variables"
            )
        if len(params) != self.n_parameters:
            raise DimensionError(
                f"params has length {len(params)}, system has {self.n_parameters} parameters"
            )
        return self.kernel(0).values(point, params)

    def pretty(self) -> list[str]:
        """Human-readable infix form of each output, for eyeballing."""
        vn = [v.name for v in self.variables]
        pn = [p.name for p in self.parameters]
        return [format_node(o, vn, pn) for o in self.outputs]


def differentiate(system: ExpressionSystem, var: VariableId | str) -> ExpressionSystem:
    """Partial derivative of every output with respect to one variable or parameter."""
    wrt = _resolve(system, var)
    cache: dict[int, Node] = {}
    outs = tuple(_diff(o, wrt, cache) for o in system.outputs)
    return ExpressionSystem(system.variables, system.parameters, outs)


def _resolve(system: ExpressionSystem, var: VariableId | str) -> Node:
    if isinstance(var, str):
        for v in system.variables:
            if v.name == var:
                return Var(v.index)
        for p in system.parameters:
            if p.name == var:
                return Param(p.index)
        raise KeyError(f"unknown variable or parameter {var!r}")
    for v in system.variables:
        if v.name == var.name:
            return Var(v.index)
    for p in system.parameters:
        if p.name == var.name:
            return Param(p.index)
    raise KeyError(f"unknown variable or parameter {var.name!r}")


def _diff(root: Node, wrt: Node, cache: dict[int, Node]) -> Node:
    """d(root)/d(wrt) with memoization on node identity."""
    if id(root) in cache:
        return cache[id(root)]
    if isinstance(root, Const):
        d: Node = _ZERO
    elif isinstance(root, Var):
        hit = isinstance(wrt, Var) and wrt.index == root.index
        d = _ONE if hit else _ZERO
    elif isinstance(root, Param):
        hit = isinstance(wrt, Param) and wrt.index == root.index
        d = _ONE if hit else _ZERO
    elif isinstance(root, Sum):
        d = add(*(_diff(t, wrt, cache) for t in root.terms))
    elif isinstance(root, Prod):
        terms = []
        fs = root.factors
        for i, f in enumerate(fs):
            df = _diff(f, wrt, cache)
            if _is_zero(df):
                continue
            terms.append(mul(df, *fs[:i], *fs[i + 1 :]))
        d = add(*terms)
    elif isinstance(root, Power):
        db = _diff(root.base, wrt, cache)
        if _is_zero(db):
            d = _ZERO
        else:
            d = mul(const(root.exponent), power(root.base, root.exponent - 1), db)
    else:  # pragma: no cover
        raise TypeError(f"unknown node {root!r}")
    cache[id(root)] = d
    return d


def jacobian(system: ExpressionSystem, wrt: Sequence[VariableId | str] | None = None):
    """Evaluator for the |outputs| x |wrt| Jacobian; derivatives are exact.

    Returns a callable (point, params) -> complex matrix.
    """
    if wrt is None:
        wrt = list(system.variables)
    cols = [_resolve(system, v) for v in wrt]
    entries = []
    cache_per_col: list[dict[int, Node]] = [dict() for _ in cols]
    for out in system.outputs:
        for c, cache in zip(cols, cache_per_col):
            entries.append(_diff(out, c, cache))
    jac_sys = ExpressionSystem(system.variables, system.parameters, tuple(entries))
    kern = jac_sys.kernel(0)
    n_out, n_wrt = system.n_outputs, len(cols)

    def evaluate_jacobian(point, params=()) -> np.ndarray:
        flat = kern.values(list(point), list(params))
        return flat.reshape(n_out, n_wrt)

    return evaluate_jacobian


def hessian_of_scalar(system: ExpressionSystem, wrt: Sequence[VariableId | str] | None = None):
    """Evaluator for the exact symmetric second-derivative matrix of a scalar output."""
    if system.n_outputs != 1:
        raise ValueError(f"hessian needs a single scalar output, got {system.n_outputs}")
    if wrt is None:
        wrt = list(system.variables)
    cols = [_resolve(system, v) for v in wrt]
    out = system.outputs[0]
    grads = [_diff(out, c, {}) for c in cols]
    col_caches: list[dict[int, Node]] = [{} for _ in cols]
    entries = []
    for i, g in enumerate(grads):
        for j, c in enumerate(cols):
            entries.append(_diff(g, c, col_caches[j]) if j >= i else _ZERO)
    hess_sys = ExpressionSystem(system.variables, system.parameters, tuple(entries))
    kern = hess_sys.kernel(0)
    k = len(cols)

    def evaluate_hessian(point, params=()) -> np.ndarray:
        flat = kern.values(list(point), list(params)).reshape(k, k)
        return flat + np.triu(flat, 1).T

    return evaluate_hessian


# ---------------------------------------------------------------------------
# code generation
# ---------------------------------------------------------------------------

class SystemKernel:
    """Compiled straight-line evaluator for a system and (optionally) its Jacobians.

    The generated function is pure scalar arithmetic writing into a
    preallocated output array, so it evaluates both on Python complex
    scalars and elementwise on numpy arrays; the batched path tracker
    exploits the latter to advance thousands of paths per call.  Rows whose
    expression is a compile-time constant are filled once per call in a
    single vectorized assignment.
    """

    def __init__(self, system: ExpressionSystem, with_jacobians: bool):
        self.n_variables = system.n_variables
        self.n_parameters = system.n_parameters
        self.n_outputs = system.n_outputs
        self.with_jacobians = with_jacobians
        roots = list(system.outputs)
        if with_jacobians:
            # one memo per differentiation variable: shared subexpressions are
            # differentiated once per direction, never across directions
            var_caches: list[dict[int, Node]] = [{} for _ in range(system.n_variables)]
            par_caches: list[dict[int, Node]] = [{} for _ in range(system.n_parameters)]
            for out in system.outputs:
                for j in range(system.n_variables):
                    roots.append(_diff(out, Var(j), var_caches[j]))
                for j in range(system.n_parameters):
                    roots.append(_diff(out, Param(j), par_caches[j]))
        self.n_roots = len(roots)
        self._fn, self._const_rows, self._const_vals = _codegen(roots)

    def eval_rows(self, zcols, params, B: int) -> np.ndarray:
        """All root rows as one (n_roots, B) array."""
        out = np.empty((self.n_roots, B), dtype=complex)
        if self._const_rows is not None:
            out[self._const_rows] = self._const_vals
        self._fn(zcols, params, out)
        return out

    def values(self, point, params) -> np.ndarray:
        out = self.eval_rows(list(point), list(params), 1)
        return out[: self.n_outputs, 0]

    def values_batch(self, Z: np.ndarray, params) -> np.ndarray:
        """Outputs for a batch: Z is (B, n_variables); returns (B, n_outputs)."""
        out = self.eval_rows(list(Z.T), params, Z.shape[0])
        return out[: self.n_outputs].T.copy()

    def with_jac_batch(self, Z: np.ndarray, params):
        """(values, d/dz, d/dy) for a batch of points; one shared parameter
        vector or per-path parameter columns.

        Shapes: (B, m), (B, m, n), (B, m, p); the Jacobians are strided views
        into one buffer."""
        if not self.with_jacobians:
            raise ValueError("kernel compiled without jacobians")
        B = Z.shape[0]
        m, n, p = self.n_outputs, self.n_variables, self.n_parameters
        out = self.eval_rows(list(Z.T), params, B)
        vals = out[:m].T
        stride = n + p
        rest = out[m:].reshape(m, stride, B)
        jz = rest[:, :n, :].transpose(2, 0, 1)
        jy = rest[:, n:, :].transpose(2, 0, 1)
        return vals, jz, jy


def compile_kernel(system: ExpressionSystem, with_jacobians: bool = False) -> SystemKernel:
    return SystemKernel(system, with_jacobians)


def _codegen(roots: Sequence[Node]):
    """Generate a function filling out[i] per root; constants are hoisted.

    Returns (fn, const_rows, const_vals) where fn(z, y, out) evaluates the
    non-constant rows.
    """
    order = _walk(roots)
    names: dict[int, str] = {}
    lines: list[str] = []
    counter = 0

    def name_of(node: Node) -> str:
        return names[id(node)]

    for node in order:
        if isinstance(node, Const):
            names[id(node)] = repr(node.value)
        elif isinstance(node, Var):
            names[id(node)] = f"z[{node.index}]"
        elif isinstance(node, Param):
            names[id(node)] = f"y[{node.index}]"
        else:
            nm = f"t{counter}"
            counter += 1
            if isinstance(node, Sum):
                expr = " + ".join(name_of(t) for t in node.terms)
            elif isinstance(node, Prod):
                expr = " * ".join(name_of(f) for f in node.factors)
            elif isinstance(node, Power):
                expr = f"{name_of(node.base)} ** {node.exponent}"
            else:  # pragma: no cover
                raise TypeError(f"unknown node {node!r}")
            lines.append(f"    {nm} = {expr}")
            names[id(node)] = nm

    const_rows: list[int] = []
    const_vals: list[complex] = []
    emitted: dict[int, int] = {}
    for i, r in enumerate(roots):
        if isinstance(r, Const):
            const_rows.append(i)
            const_vals.append(r.value)
        elif id(r) in emitted:
            lines.append(f"    out[{i}] = out[{emitted[id(r)]}]")
        else:
            lines.append(f"    out[{i}] = {name_of(r)}")
            emitted[id(r)] = i

    src = "def _kernel(z, y, out):\n"
    src += "\n".join(lines) + "\n" if lines else "    pass\n"
    scope: dict = {}
    exec(compile(src, "<tensicat-kernel>", "exec"), scope)
    fn = scope["_kernel"]
    fn.__source__ = src
    if const_rows:
        return fn, np.array(const_rows), np.array(const_vals, dtype=complex)[:, None]
    return fn, None, None


# ---------------------------------------------------------------------------
# debug printing
# ---------------------------------------------------------------------------

def _fmt_complex(v: complex) -> str:
    if v.imag == 0:
        r = v.real
        if r == int(r):
            return str(int(r))
        return repr(r)
    return f"({v!r})"


def format_node(node: Node, var_names: Sequence[str], param_names: Sequence[str]) -> str:
    """Infix rendering of one output, suitable for visual comparison."""

    def rec(n: Node, parent: str) -> str:
        if isinstance(n, Const):
            return _fmt_complex(n.value)
        if isinstance(n, Var):
            return var_names[n.index]
        if isinstance(n, Param):
            return param_names[n.index]
        if isinstance(n, Sum):
            s = " + ".join(rec(t, "sum") for t in n.terms)
            return f"({s})" if parent in ("prod", "pow") else s
        if isinstance(n, Prod):
            s = "*".join(rec(f, "prod") for f in n.factors)
            return f"({s})" if parent == "pow" else s
        if isinstance(n, Power):
            return f"{rec(n.base, 'pow')}^{n.exponent}"
        raise TypeError(n)

    return rec(node, "top")
