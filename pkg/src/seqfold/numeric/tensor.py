"""Dense arrays with reverse-mode gradients.

A ``Tensor`` wraps a ``numpy.ndarray`` and, while gradient recording is
enabled, remembers the operation that produced it. Calling
``backward()`` on a scalar result walks the recorded graph in reverse
topological order and accumulates ``grad`` on every tensor that
requires it.
"""

import threading
from contextlib import contextmanager
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from seqfold.utils.exceptions import DimensionError, NumericError

ArrayLike = Union["Tensor", np.ndarray, float, int]
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_state = threading.local()


def is_grad_enabled() -> bool:
    """Return whether operations on this thread record a graph."""
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording on the current thread."""
    previous = is_grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


def _as_float_array(data: object) -> np.ndarray:
    array = np.asarray(data)
    if not np.issubdtype(array.dtype, np.floating):
        array = array.astype(np.float64)
    return array


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """A real-valued array that can take part in reverse-mode autodiff."""

    def __init__(self, data: object, requires_grad: bool = False) -> None:
        """Wrap ``data`` (copied only if it is not already a float array).

        Args:
            data: Array-like values
            requires_grad: Whether gradients should flow into this tensor
        """
        self.data = _as_float_array(data)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._parents: Tuple["Tensor", ...] = ()
        self._backward: Optional[BackwardFn] = None
        self._op = ""

    # -- construction -------------------------------------------------

    @staticmethod
    def lift(value: ArrayLike, dtype: Optional[np.dtype] = None) -> "Tensor":
        """Return ``value`` as a tensor, wrapping constants."""
        if isinstance(value, Tensor):
            return value
        array = np.asarray(value, dtype=dtype)
        return Tensor(array)

    @staticmethod
    def from_op(
        data: np.ndarray,
        parents: Sequence["Tensor"],
        backward: BackwardFn,
        op: str,
    ) -> "Tensor":
        """Create the result of an operation and link it into the graph.

        Raises:
            NumericError: If the result contains NaN or infinite values
        """
        if not np.all(np.isfinite(data)):
            raise NumericError(
                f"Non-finite values produced by {op}",
                detail=f"shape={tuple(data.shape)}",
            )
        out = Tensor(data)
        if is_grad_enabled() and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = tuple(parents)
            out._backward = backward
            out._op = op
        return out

    # -- properties ---------------------------------------------------

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return int(self.data.ndim)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        """Return the underlying array (not a copy)."""
        return self.data

    def item(self) -> float:
        """Return the value of a single-element tensor."""
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        return (
            f"Tensor(shape={self.shape}, dtype={self.dtype}, "
            f"requires_grad={self.requires_grad})"
        )

    # -- gradient bookkeeping ------------------------------------------

    def _accumulate(self, grad: np.ndarray) -> None:
        if grad.shape != self.data.shape:
            grad = _unbroadcast(grad, self.shape)
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype, copy=True)
        else:
            self.grad += grad

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        """Back-propagate from this tensor through the recorded graph.

        Args:
            grad: Seed gradient; defaults to ones for a scalar result

        Raises:
            DimensionError: If no seed is given for a non-scalar tensor
        """
        if grad is None:
            if self.data.size != 1:
                raise DimensionError(
                    "backward() needs a seed gradient for a non-scalar",
                    detail=f"shape={self.shape}",
                )
            grad = np.ones_like(self.data)

        order = self._topological_order()
        self._accumulate(grad)
        for node in reversed(order):
            if node._backward is None or node.grad is None:
                continue
            parent_grads = node._backward(node.grad)
            for parent, parent_grad in zip(node._parents, parent_grads):
                if parent_grad is not None and parent.requires_grad:
                    parent._accumulate(parent_grad)
            # interior buffers are not needed after their pass
            node.grad = None
            node._backward = None
            node._parents = ()

    def _topological_order(self) -> List["Tensor"]:
        order: List[Tensor] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        return order

    # -- elementwise arithmetic (numpy broadcasting) -------------------

    def __add__(self, other: ArrayLike) -> "Tensor":
        rhs = Tensor.lift(other, self.dtype)

        def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            return (
                _unbroadcast(g, self.shape),
                _unbroadcast(g, rhs.shape),
            )

        return Tensor.from_op(
            self.data + rhs.data, (self, rhs), backward, "add"
        )

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        return Tensor.from_op(-self.data, (self,), lambda g: (-g,), "neg")

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return self + (-Tensor.lift(other, self.dtype))

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return Tensor.lift(other, self.dtype) + (-self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        rhs = Tensor.lift(other, self.dtype)

        def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            return (
                _unbroadcast(g * rhs.data, self.shape),
                _unbroadcast(g * self.data, rhs.shape),
            )

        return Tensor.from_op(
            self.data * rhs.data, (self, rhs), backward, "mul"
        )

    __rmul__ = __mul__

    def __truediv__(self, other: float) -> "Tensor":
        if isinstance(other, Tensor):
            raise TypeError("division is only supported by a scalar")
        return self * (1.0 / float(other))

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from seqfold.numeric.functional import bmm

        return bmm(self, other)

    # -- shape manipulation -------------------------------------------

    def reshape(self, *shape: int) -> "Tensor":
        old_shape = self.shape
        return Tensor.from_op(
            self.data.reshape(shape),
            (self,),
            lambda g: (g.reshape(old_shape),),
            "reshape",
        )

    def transpose(self, *axes: int) -> "Tensor":
        inverse = tuple(int(i) for i in np.argsort(axes))
        return Tensor.from_op(
            self.data.transpose(axes),
            (self,),
            lambda g: (g.transpose(inverse),),
            "transpose",
        )

    def swap_last(self) -> "Tensor":
        """Swap the last two axes."""
        axes = list(range(self.ndim))
        axes[-1], axes[-2] = axes[-2], axes[-1]
        return self.transpose(*axes)

    def __getitem__(self, index: object) -> "Tensor":
        shape = self.shape
        dtype = self.dtype

        def backward(g: np.ndarray) -> Tuple[np.ndarray]:
            full = np.zeros(shape, dtype=dtype)
            full[index] += g
            return (full,)

        return Tensor.from_op(
            np.array(self.data[index]), (self,), backward, "index"
        )

    # -- reductions ---------------------------------------------------

    def sum(
        self,
        axis: Optional[Union[int, Tuple[int, ...]]] = None,
        keepdims: bool = False,
    ) -> "Tensor":
        shape = self.shape

        def backward(g: np.ndarray) -> Tuple[np.ndarray]:
            if axis is not None and not keepdims:
                axes = (axis,) if isinstance(axis, int) else axis
                axes = tuple(sorted(a % len(shape) for a in axes))
                for ax in axes:
                    g = np.expand_dims(g, ax)
            return (np.broadcast_to(g, shape),)

        return Tensor.from_op(
            np.asarray(self.data.sum(axis=axis, keepdims=keepdims)),
            (self,),
            backward,
            "sum",
        )

    def mean(
        self,
        axis: Optional[Union[int, Tuple[int, ...]]] = None,
        keepdims: bool = False,
    ) -> "Tensor":
        if axis is None:
            count = self.data.size
        else:
            axes = (axis,) if isinstance(axis, int) else axis
            count = int(np.prod([self.shape[a] for a in axes]))
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)


class Parameter(Tensor):
    """A named, trainable tensor.

    The gradient buffer always exists and always has the value's shape.
    """

    def __init__(self, name: str, value: np.ndarray) -> None:
        super().__init__(np.array(value, copy=True), requires_grad=True)
        self.name = name
        self.grad = np.zeros_like(self.data)

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def _accumulate(self, grad: np.ndarray) -> None:
        if grad.shape != self.data.shape:
            grad = _unbroadcast(grad, self.shape)
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def __repr__(self) -> str:
        return f"Parameter(name={self.name!r}, shape={self.shape})"
