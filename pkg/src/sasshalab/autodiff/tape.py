# src/sasshalab/autodiff/tape.py
"""
tape
====

- **Module:** `src/sasshalab/autodiff/tape.py`

Tape-based reverse-mode differentiation with exact Hessian-vector
products.

A `Tape` is an immutable, topologically ordered list of primitive nodes
ending in one scalar output. It is built once per objective structure with
`TapeBuilder` and then re-evaluated for new parameter vectors and new data
feeds (mini-batches).

Overview
--------
- **TapeBuilder / Var**:
  Record a computation with ordinary Python operators. Parameters are read
  as reshaped slices of the flat parameter vector; data placeholders are
  fed at evaluation time.

- **Tape.evaluate / grad / hvp**:
  Forward pass, reverse sweep, and forward-over-reverse sweep. The HVP runs
  the forward pass on `DualNumber`s seeded with the direction `v`, then the
  reverse sweep on dual adjoints: the primal part of the parameter adjoint
  is the gradient and its tangent part is ``H v``.

Supported primitives: constants, parameter reads, data reads, add, sub,
mul, div, negation, exp, log, tanh, max-with-zero, constant power, matrix
and dot products, sum reductions (all or along one axis), row-bias
addition, and a max-shifted log-sum-exp reduction. Elementwise binary ops
require equal shapes, except that either operand may be a scalar.

The rectifier derivative at 0 is defined as 0.

Usage
-----
```python
b = TapeBuilder(n_params=2)
x = b.param(0, (2,))
tape = b.build(0.5 * (x * x).sum())
tape.grad([3.0, 4.0])          # -> [3., 4.]
tape.hvp([3.0, 4.0], [1, 0])   # -> [1., 0.]
```
"""

from typing import Any, Optional

import numpy as np
from pydantic import ConfigDict, Field

from sasshalab.autodiff.dual import DualNumber
from sasshalab.exception.base_exceptions import DimensionMismatchError, PreconditionError
from sasshalab.lab_base_model import NumericModel

UNARY_OPS = frozenset({"neg", "exp", "log", "tanh", "relu", "pow", "sum", "logsumexp"})
BINARY_OPS = frozenset({"add", "sub", "mul", "div", "matmul", "add_row"})
LEAF_OPS = frozenset({"const", "param", "data"})


class Node(NumericModel):
    """
    One primitive operation on the tape.

    Attributes
    ----------
    op : str
        Primitive name.
    inputs : tuple[int, ...]
        Indices of input nodes; always smaller than this node's index.
    attrs : dict
        Operation attributes (constant value, parameter slice, exponent,
        reduction axis, data feed name).
    needs_grad : bool
        Whether this node depends on the parameters.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    op: str
    inputs: tuple[int, ...] = ()
    attrs: dict[str, Any] = Field(default_factory=dict)
    needs_grad: bool = False


class EvaluationResult(NumericModel):
    """
    Forward evaluation of a tape.

    Attributes
    ----------
    value : float
        Scalar output.
    finite : bool
        False when the output is NaN or infinite; callers treat this as a
        divergence signal.
    """
    value: float
    finite: bool


class Var:
    """
    Handle on a tape node used while recording.

    Supports ``+ - * / @ **`` with other `Var`s and with Python or numpy
    constants, plus the elementwise and reduction methods below.
    """
    __array_ufunc__ = None

    def __init__(self, builder: "TapeBuilder", index: int):
        self.builder = builder
        self.index = index

    def _wrap(self, other) -> "Var":
        return other if isinstance(other, Var) else self.builder.const(other)

    def __add__(self, other):
        return self.builder._emit("add", self, self._wrap(other))

    def __radd__(self, other):
        return self.builder._emit("add", self._wrap(other), self)

    def __sub__(self, other):
        return self.builder._emit("sub", self, self._wrap(other))

    def __rsub__(self, other):
        return self.builder._emit("sub", self._wrap(other), self)

    def __mul__(self, other):
        return self.builder._emit("mul", self, self._wrap(other))

    def __rmul__(self, other):
        return self.builder._emit("mul", self._wrap(other), self)

    def __truediv__(self, other):
        return self.builder._emit("div", self, self._wrap(other))

    def __rtruediv__(self, other):
        return self.builder._emit("div", self._wrap(other), self)

    def __neg__(self):
        return self.builder._emit("neg", self)

    def __matmul__(self, other):
        return self.builder._emit("matmul", self, self._wrap(other))

    def __rmatmul__(self, other):
        return self.builder._emit("matmul", self._wrap(other), self)

    def __pow__(self, exponent: float):
        return self.builder._emit("pow", self, exponent=float(exponent))

    def exp(self):
        return self.builder._emit("exp", self)

    def log(self):
        return self.builder._emit("log", self)

    def tanh(self):
        return self.builder._emit("tanh", self)

    def relu(self):
        return self.builder._emit("relu", self)

    def sum(self, axis: Optional[int] = None):
        if axis not in (None, 0, 1):
            raise PreconditionError(f"sum: axis must be None, 0 or 1, got {axis}")
        return self.builder._emit("sum", self, axis=axis)

    def logsumexp(self, axis: Optional[int] = None):
        """Stable ``log Σ exp`` over all entries or along one axis."""
        if axis not in (None, 0, 1):
            raise PreconditionError(f"logsumexp: axis must be None, 0 or 1, got {axis}")
        return self.builder._emit("logsumexp", self, axis=axis)

    def add_row(self, row: "Var"):
        """Add a 1-D `row` to every row of this 2-D value."""
        return self.builder._emit("add_row", self, self._wrap(row))


class TapeBuilder:
    """
    Records primitive operations into a `Tape`.

    Parameters
    ----------
    n_params : int
        Length of the flat parameter vector the tape reads from.
    """

    def __init__(self, n_params: int):
        if n_params < 1:
            raise PreconditionError(f"TapeBuilder: n_params must be >= 1, got {n_params}")
        self.n_params = n_params
        self.nodes: list[Node] = []
        self._built = False

    def _append(self, node: Node) -> Var:
        if self._built:
            raise PreconditionError("TapeBuilder: tape already built; builders are single use")
        self.nodes.append(node)
        return Var(self, len(self.nodes) - 1)

    def _emit(self, op: str, *inputs: Var, **attrs) -> Var:
        for v in inputs:
            if v.builder is not self:
                raise PreconditionError(f"{op}: operand recorded on a different builder")
        needs_grad = any(self.nodes[v.index].needs_grad for v in inputs)
        return self._append(Node(
            op=op, inputs=tuple(v.index for v in inputs), attrs=attrs, needs_grad=needs_grad))

    def const(self, value) -> Var:
        return self._append(Node(op="const", attrs={"value": np.asarray(value, dtype=np.float64)}))

    def param(self, start: int, shape: tuple[int, ...]) -> Var:
        """Read ``x[start:start+size]`` reshaped to `shape`."""
        size = int(np.prod(shape)) if shape else 1
        if start < 0 or start + size > self.n_params:
            raise DimensionMismatchError(
                f"param slice [{start}, {start + size}) outside parameter vector of length {self.n_params}")
        return self._append(Node(
            op="param", attrs={"start": start, "shape": tuple(shape), "size": size}, needs_grad=True))

    def data(self, name: str) -> Var:
        """Placeholder fed by name at evaluation time."""
        return self._append(Node(op="data", attrs={"name": name}))

    def build(self, output: Var) -> "Tape":
        """Freeze the recording; `output` must evaluate to a scalar."""
        if output.builder is not self:
            raise PreconditionError("build: output recorded on a different builder")
        self._built = True
        return Tape(n_params=self.n_params, nodes=tuple(self.nodes[: output.index + 1]))


def _unbroadcast(contribution: DualNumber, shape: tuple) -> DualNumber:
    if contribution.shape != shape and shape == ():
        return contribution.sum()
    return contribution


class Tape(NumericModel):
    """
    Immutable recorded computation with one scalar output (the last node).

    Evaluation keeps all intermediate values in local lists, so one tape may
    be evaluated from several threads at once.

    Attributes
    ----------
    n_params : int
        Declared parameter count.
    nodes : tuple[Node, ...]
        Primitive operations in topological order.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n_params: int
    nodes: tuple[Node, ...]

    def _check_x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.size != self.n_params:
            raise DimensionMismatchError(
                f"tape expects a parameter vector of length {self.n_params}, got shape {x.shape}")
        return x

    def _forward(self, x: np.ndarray, feeds: dict, v: np.ndarray = None) -> list[DualNumber]:
        feeds = feeds or {}
        values: list[DualNumber] = []
        for node in self.nodes:
            a = node.attrs
            ins = [values[i] for i in node.inputs]
            match node.op:
                case "const":
                    out = DualNumber(a["value"])
                case "param":
                    sl = slice(a["start"], a["start"] + a["size"])
                    out = DualNumber(
                        x[sl].reshape(a["shape"]),
                        None if v is None else v[sl].reshape(a["shape"]))
                case "data":
                    if a["name"] not in feeds:
                        raise PreconditionError(f"tape: missing data feed '{a['name']}'")
                    out = DualNumber(feeds[a["name"]])
                case "add":
                    out = ins[0] + ins[1]
                case "sub":
                    out = ins[0] - ins[1]
                case "mul":
                    out = ins[0] * ins[1]
                case "div":
                    out = ins[0] / ins[1]
                case "neg":
                    out = -ins[0]
                case "exp":
                    out = ins[0].exp()
                case "log":
                    out = ins[0].log()
                case "tanh":
                    out = ins[0].tanh()
                case "relu":
                    out = ins[0] * (ins[0].primal > 0.0).astype(np.float64)
                case "pow":
                    out = ins[0].power(a["exponent"])
                case "matmul":
                    out = ins[0] @ ins[1]
                case "sum":
                    out = ins[0].sum(axis=a["axis"])
                case "logsumexp":
                    out = ins[0].logsumexp(axis=a["axis"])
                case "add_row":
                    out = ins[0] + ins[1]
                case _:
                    raise PreconditionError(f"tape: unknown primitive '{node.op}'")
            values.append(out)
        if values[-1].shape != ():
            raise DimensionMismatchError(f"tape output must be scalar, got shape {values[-1].shape}")
        return values

    def _vjp(self, node: Node, adj: DualNumber, out: DualNumber, ins: list[DualNumber]) -> list:
        """Input adjoint contributions; ``None`` where the input needs no gradient."""
        need = [self.nodes[i].needs_grad for i in node.inputs]
        contrib: list = [None] * len(ins)
        match node.op:
            case "add" | "sub":
                sign = -1.0 if node.op == "sub" else 1.0
                if need[0]:
                    contrib[0] = _unbroadcast(adj, ins[0].shape)
                if need[1]:
                    contrib[1] = _unbroadcast(adj * sign, ins[1].shape)
            case "mul":
                if need[0]:
                    contrib[0] = _unbroadcast(adj * ins[1], ins[0].shape)
                if need[1]:
                    contrib[1] = _unbroadcast(adj * ins[0], ins[1].shape)
            case "div":
                if need[0]:
                    contrib[0] = _unbroadcast(adj / ins[1], ins[0].shape)
                if need[1]:
                    contrib[1] = _unbroadcast(-(adj * out) / ins[1], ins[1].shape)
            case "neg":
                contrib[0] = -adj
            case "exp":
                contrib[0] = adj * out
            case "log":
                contrib[0] = adj / ins[0]
            case "tanh":
                contrib[0] = adj * (1.0 - out * out)
            case "relu":
                contrib[0] = adj * (ins[0].primal > 0.0).astype(np.float64)
            case "pow":
                c = node.attrs["exponent"]
                contrib[0] = adj * (ins[0].power(c - 1.0) * c)
            case "sum":
                contrib[0] = adj.broadcast_to(ins[0].shape, node.attrs["axis"])
            case "logsumexp":
                axis = node.attrs["axis"]
                contrib[0] = adj.broadcast_to(ins[0].shape, axis) * ins[0].softmax(axis)
            case "add_row":
                if need[0]:
                    contrib[0] = adj
                if need[1]:
                    contrib[1] = adj.sum(axis=0)
            case "matmul":
                left, right = ins
                lnd, rnd = left.primal.ndim, right.primal.ndim
                if need[0]:
                    if lnd == 2 and rnd == 1:
                        contrib[0] = adj.outer(right)
                    elif lnd == 1 and rnd == 1:
                        contrib[0] = adj * right
                    else:
                        contrib[0] = adj @ right.T
                if need[1]:
                    if lnd == 1 and rnd == 2:
                        contrib[1] = left.outer(adj)
                    elif lnd == 1 and rnd == 1:
                        contrib[1] = adj * left
                    else:
                        contrib[1] = left.T @ adj
        return contrib

    def _reverse(self, values: list[DualNumber]) -> DualNumber:
        n = len(self.nodes)
        adjoints: list = [None] * n
        adjoints[-1] = DualNumber(1.0)
        grad_primal = np.zeros(self.n_params)
        grad_tangent = None
        for idx in range(n - 1, -1, -1):
            node = self.nodes[idx]
            adj = adjoints[idx]
            if adj is None or not node.needs_grad:
                continue
            if node.op == "param":
                sl = slice(node.attrs["start"], node.attrs["start"] + node.attrs["size"])
                grad_primal[sl] += adj.primal.reshape(-1)
                if adj.tangent is not None:
                    if grad_tangent is None:
                        grad_tangent = np.zeros(self.n_params)
                    grad_tangent[sl] += adj.tangent.reshape(-1)
                continue
            ins = [values[i] for i in node.inputs]
            for i, c in zip(node.inputs, self._vjp(node, adj, values[idx], ins)):
                if c is not None:
                    adjoints[i] = c if adjoints[i] is None else adjoints[i] + c
        return DualNumber(grad_primal, grad_tangent)

    def evaluate(self, x, feeds: dict = None) -> EvaluationResult:
        """
        Forward evaluation.

        Parameters
        ----------
        x : array_like
            Parameter vector of length `n_params`.
        feeds : dict, optional
            Arrays for the tape's data placeholders.

        Returns
        -------
        EvaluationResult
            Scalar value and a finiteness flag; NaN/Inf propagate.

        Raises
        ------
        DimensionMismatchError
            If `x` has the wrong length.
        """
        with np.errstate(all="ignore"):
            value = float(self._forward(self._check_x(x), feeds)[-1].primal)
        return EvaluationResult(value=value, finite=bool(np.isfinite(value)))

    def value_and_grad(self, x, feeds: dict = None) -> tuple[float, np.ndarray]:
        """Forward value together with the reverse-mode gradient."""
        with np.errstate(all="ignore"):
            values = self._forward(self._check_x(x), feeds)
            return float(values[-1].primal), self._reverse(values).primal

    def grad(self, x, feeds: dict = None) -> np.ndarray:
        """Reverse-mode gradient of the output with respect to `x`."""
        return self.value_and_grad(x, feeds)[1]

    def hvp(self, x, v, feeds: dict = None) -> np.ndarray:
        """
        Exact Hessian-vector product ``∇²f(x) v`` by forward-over-reverse.

        Raises
        ------
        DimensionMismatchError
            If `x` or `v` has the wrong length.
        """
        x = self._check_x(x)
        v = np.asarray(v, dtype=np.float64)
        if v.shape != x.shape:
            raise DimensionMismatchError(f"hvp: direction has shape {v.shape}, expected {x.shape}")
        with np.errstate(all="ignore"):
            result = self._reverse(self._forward(x, feeds, v))
        if result.tangent is None:
            return np.zeros(self.n_params)
        return result.tangent


def evaluate(tape: Tape, x, feeds: dict = None) -> EvaluationResult:
    return tape.evaluate(x, feeds)


def grad(tape: Tape, x, feeds: dict = None) -> np.ndarray:
    return tape.grad(x, feeds)


def hvp(tape: Tape, x, v, feeds: dict = None) -> np.ndarray:
    return tape.hvp(x, v, feeds)
