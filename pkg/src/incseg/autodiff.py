"""Dense float64 tensors with reverse-mode differentiation on an explicit tape.

The design is a classic Wengert list: every operation executes eagerly on
numpy arrays and, when a :class:`Tape` is active, appends a record mapping
its output to per-input gradient closures. ``backward`` walks the records
in reverse, accumulating gradients into a dictionary keyed by tensor
identity. With no active tape the same operations run as plain numpy
forward math, which is the fast path used during inference.

Everything is float64. Gradient correctness of each operation is pinned by
central finite differences in the test suite, so there is no headroom for
lower precision.
"""

import numpy as np


class ShapeError(ValueError):
    """Operand shapes do not satisfy an operation's contract."""


class Tensor:
    """A dense float64 array. Identity (not value) is what the tape tracks."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.asarray(data, dtype=np.float64)
        self.data = arr

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.shape})"

    # Convenience sugar; the named functions below are the real surface.
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return neg(self)


_ACTIVE_TAPES: list["Tape"] = []


class Tape:
    """Ordered record of operations; context manager activates recording.

    Nodes are appended in execution order, so every node's inputs precede
    it and a single reverse sweep implements backpropagation.
    """

    def __init__(self):
        self.nodes: list[tuple[Tensor, tuple]] = []

    def __enter__(self):
        _ACTIVE_TAPES.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        popped = _ACTIVE_TAPES.pop()
        assert popped is self
        return False

    def record(self, out: Tensor, parents: tuple):
        self.nodes.append((out, parents))

    def backward(self, loss: Tensor) -> "Gradients":
        return backward(self, loss)


class Gradients:
    """Map from tensor (by identity) to its accumulated gradient array."""

    def __init__(self, by_tensor: dict):
        self._by_tensor = by_tensor

    def wrt(self, t: Tensor):
        """Gradient array for ``t``, or None if the loss does not depend on it."""
        return self._by_tensor.get(t)

    def __contains__(self, t: Tensor) -> bool:
        return t in self._by_tensor

    def __len__(self) -> int:
        return len(self._by_tensor)


def backward(tape: Tape, loss: Tensor) -> Gradients:
    """Reverse-topological gradient accumulation from a scalar loss node."""
    if loss.data.shape != ():
        raise ShapeError(f"loss must be scalar, got shape {loss.data.shape}")
    grads: dict = {loss: np.ones(())}
    for out, parents in reversed(tape.nodes):
        g = grads.get(out)
        if g is None:
            continue
        for parent, grad_fn in parents:
            contrib = grad_fn(g)
            prev = grads.get(parent)
            if prev is None:
                grads[parent] = contrib
            else:
                grads[parent] = prev + contrib
    return Gradients(grads)


def _record(out: Tensor, parents: tuple):
    if _ACTIVE_TAPES:
        _ACTIVE_TAPES[-1].record(out, parents)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


# ---------------------------------------------------------------------------
# elementwise and reduction operations


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"add: shapes {a.shape} and {b.shape} differ")
    out = Tensor(a.data + b.data)
    _record(out, ((a, lambda g: g), (b, lambda g: g)))
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"sub: shapes {a.shape} and {b.shape} differ")
    out = Tensor(a.data - b.data)
    _record(out, ((a, lambda g: g), (b, lambda g: -g)))
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"mul: shapes {a.shape} and {b.shape} differ")
    out = Tensor(a.data * b.data)
    ad, bd = a.data, b.data
    _record(out, ((a, lambda g: g * bd), (b, lambda g: g * ad)))
    return out


def neg(a: Tensor) -> Tensor:
    out = Tensor(-a.data)
    _record(out, ((a, lambda g: -g),))
    return out


def scale(a: Tensor, factor: float) -> Tensor:
    factor = float(factor)
    out = Tensor(a.data * factor)
    _record(out, ((a, lambda g: g * factor),))
    return out


def sum_all(a: Tensor) -> Tensor:
    out = Tensor(a.data.sum())
    shape = a.data.shape
    _record(out, ((a, lambda g: np.full(shape, g)),))
    return out


def tanh(a: Tensor) -> Tensor:
    t = np.tanh(a.data)
    out = Tensor(t)
    _record(out, ((a, lambda g: g * (1.0 - t * t)),))
    return out


def sigmoid(a: Tensor) -> Tensor:
    x = a.data
    # Branch on sign so exp never overflows.
    s = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    out = Tensor(s)
    _record(out, ((a, lambda g: g * s * (1.0 - s)),))
    return out


# ---------------------------------------------------------------------------
# structural operations


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix/vector product for 1-D and 2-D operands, numpy semantics."""
    a, b = _as_tensor(a), _as_tensor(b)
    ad, bd = a.data, b.data
    if ad.ndim == 0 or bd.ndim == 0 or ad.ndim > 2 or bd.ndim > 2:
        raise ShapeError(f"matmul: unsupported ranks {ad.shape} @ {bd.shape}")
    if ad.shape[-1] != bd.shape[0]:
        raise ShapeError(f"matmul: inner dimensions disagree, {ad.shape} @ {bd.shape}")
    out = Tensor(ad @ bd)
    if ad.ndim == 2 and bd.ndim == 2:
        parents = ((a, lambda g: g @ bd.T), (b, lambda g: ad.T @ g))
    elif ad.ndim == 2 and bd.ndim == 1:
        parents = ((a, lambda g: np.outer(g, bd)), (b, lambda g: ad.T @ g))
    elif ad.ndim == 1 and bd.ndim == 2:
        parents = ((a, lambda g: bd @ g), (b, lambda g: np.outer(ad, g)))
    else:
        parents = ((a, lambda g: g * bd), (b, lambda g: g * ad))
    _record(out, parents)
    return out


def concat(parts) -> Tensor:
    """Concatenate along axis 0; all other extents must agree."""
    parts = [_as_tensor(p) for p in parts]
    if not parts:
        raise ShapeError("concat: need at least one part")
    tail = parts[0].data.shape[1:]
    for p in parts[1:]:
        if p.data.shape[1:] != tail:
            raise ShapeError(
                f"concat: trailing extents differ, {parts[0].shape} vs {p.shape}"
            )
    out = Tensor(np.concatenate([p.data for p in parts], axis=0))
    sizes = [p.data.shape[0] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def splitter(index):
        lo, hi = offsets[index], offsets[index + 1]
        return lambda g: g[lo:hi]

    _record(out, tuple((p, splitter(i)) for i, p in enumerate(parts)))
    return out


def slice1d(a: Tensor, start: int, stop: int) -> Tensor:
    if a.data.ndim != 1:
        raise ShapeError(f"slice1d: expected vector, got shape {a.shape}")
    if not (0 <= start <= stop <= a.data.shape[0]):
        raise ShapeError(f"slice1d: range [{start}, {stop}) out of bounds for {a.shape}")
    out = Tensor(a.data[start:stop].copy())
    length = a.data.shape[0]

    def grad(g):
        full = np.zeros(length)
        full[start:stop] = g
        return full

    _record(out, ((a, grad),))
    return out


def stack(vectors) -> Tensor:
    """Stack equal-length vectors into a matrix, one row each."""
    vectors = [_as_tensor(v) for v in vectors]
    if not vectors:
        raise ShapeError("stack: need at least one vector")
    width = vectors[0].data.shape
    for v in vectors:
        if v.data.ndim != 1 or v.data.shape != width:
            raise ShapeError(f"stack: expected vectors of shape {width}, got {v.shape}")
    out = Tensor(np.stack([v.data for v in vectors]))

    def picker(index):
        return lambda g: g[index]

    _record(out, tuple((v, picker(i)) for i, v in enumerate(vectors)))
    return out


def pick(a: Tensor, index: int) -> Tensor:
    """Select one element of a vector as a scalar."""
    if a.data.ndim != 1:
        raise ShapeError(f"pick: expected vector, got shape {a.shape}")
    if not (0 <= index < a.data.shape[0]):
        raise ShapeError(f"pick: index {index} out of range for {a.shape}")
    out = Tensor(a.data[index])
    length = a.data.shape[0]

    def grad(g):
        full = np.zeros(length)
        full[index] = g
        return full

    _record(out, ((a, grad),))
    return out


def row(matrix: Tensor, index: int) -> Tensor:
    """Select one row of a matrix (embedding lookup)."""
    if matrix.data.ndim != 2:
        raise ShapeError(f"row: expected matrix, got shape {matrix.shape}")
    if not (0 <= index < matrix.data.shape[0]):
        raise ShapeError(f"row: index {index} out of range for {matrix.shape}")
    out = Tensor(matrix.data[index].copy())
    shape = matrix.data.shape

    def grad(g):
        full = np.zeros(shape)
        full[index] = g
        return full

    _record(out, ((matrix, grad),))
    return out


# ---------------------------------------------------------------------------
# normalization, convolution, pooling, dropout


def log_softmax(scores: Tensor) -> Tensor:
    """Log-probabilities with max-subtraction; exp of output sums to 1."""
    x = scores.data
    if x.ndim != 1:
        raise ShapeError(f"log_softmax: expected vector, got shape {scores.shape}")
    if x.shape[0] == 0:
        raise ValueError("log_softmax: empty input")
    shifted = x - x.max()
    log_norm = np.log(np.exp(shifted).sum())
    out_data = shifted - log_norm
    out = Tensor(out_data)
    probs = np.exp(out_data)
    _record(out, ((scores, lambda g: g - probs * g.sum()),))
    return out


def conv1d_same(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """1-D convolution over rows of ``x`` with zero same-padding.

    x: (positions, channels); weight: (filters, width, channels) with odd
    width; bias: (filters,). Output: (positions, filters).
    """
    xd, wd, bd = x.data, weight.data, bias.data
    if xd.ndim != 2 or wd.ndim != 3 or bd.ndim != 1:
        raise ShapeError(
            f"conv1d_same: ranks must be (2, 3, 1), got {xd.shape}, {wd.shape}, {bd.shape}"
        )
    n_filters, width, channels = wd.shape
    if width % 2 != 1:
        raise ShapeError(f"conv1d_same: width must be odd, got {width}")
    if xd.shape[1] != channels or bd.shape[0] != n_filters:
        raise ShapeError(
            f"conv1d_same: shapes disagree, x {xd.shape}, weight {wd.shape}, bias {bd.shape}"
        )
    positions = xd.shape[0]
    pad = width // 2
    xpad = np.zeros((positions + 2 * pad, channels))
    xpad[pad : pad + positions] = xd
    out_data = np.tile(bd, (positions, 1))
    for d in range(width):
        out_data += xpad[d : d + positions] @ wd[:, d, :].T
    out = Tensor(out_data)

    def grad_x(g):
        gpad = np.zeros_like(xpad)
        for d in range(width):
            gpad[d : d + positions] += g @ wd[:, d, :]
        return gpad[pad : pad + positions]

    def grad_w(g):
        gw = np.zeros_like(wd)
        for d in range(width):
            gw[:, d, :] = g.T @ xpad[d : d + positions]
        return gw

    _record(out, ((x, grad_x), (weight, grad_w), (bias, lambda g: g.sum(axis=0))))
    return out


def max_pool_rows(x: Tensor) -> Tensor:
    """Column-wise max over rows; gradient flows to the first maximal row."""
    xd = x.data
    if xd.ndim != 2 or xd.shape[0] == 0:
        raise ShapeError(f"max_pool_rows: expected nonempty matrix, got shape {x.shape}")
    argmax = xd.argmax(axis=0)
    out = Tensor(xd[argmax, np.arange(xd.shape[1])])
    shape = xd.shape

    def grad(g):
        full = np.zeros(shape)
        full[argmax, np.arange(shape[1])] = g
        return full

    _record(out, ((x, grad),))
    return out


def dropout(x: Tensor, ratio: float, training: bool, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: keep with probability 1-ratio, scale kept by 1/(1-ratio)."""
    if not (0.0 <= ratio < 1.0):
        raise ValueError(f"dropout: ratio must be in [0, 1), got {ratio}")
    if not training or ratio == 0.0:
        return x
    keep = 1.0 - ratio
    mask = (rng.random(x.data.shape) >= ratio) / keep
    out = Tensor(x.data * mask)
    _record(out, ((x, lambda g: g * mask),))
    return out


# ---------------------------------------------------------------------------
# recurrent cell


def lstm_cell(x: Tensor, h_prev: Tensor, c_prev: Tensor, weight: Tensor, bias: Tensor):
    """One step of a standard gated recurrence.

    ``weight`` packs the four gate blocks row-wise in the order input,
    forget, output, candidate: shape (4*hidden, input_dim + hidden).
    Returns the new (hidden, cell) pair.
    """
    hidden = h_prev.data.shape[0]
    if weight.data.ndim != 2 or weight.data.shape[0] != 4 * hidden:
        raise ShapeError(
            f"lstm_cell: weight {weight.shape} does not match hidden size {hidden}"
        )
    expected_in = x.data.shape[0] + hidden
    if weight.data.shape[1] != expected_in:
        raise ShapeError(
            f"lstm_cell: weight {weight.shape} does not match input width {expected_in}"
        )
    if bias.data.shape != (4 * hidden,):
        raise ShapeError(f"lstm_cell: bias {bias.shape} must be ({4 * hidden},)")
    pre = add(matmul(weight, concat([x, h_prev])), bias)
    gate_in = sigmoid(slice1d(pre, 0, hidden))
    gate_forget = sigmoid(slice1d(pre, hidden, 2 * hidden))
    gate_out = sigmoid(slice1d(pre, 2 * hidden, 3 * hidden))
    candidate = tanh(slice1d(pre, 3 * hidden, 4 * hidden))
    c = add(mul(gate_forget, c_prev), mul(gate_in, candidate))
    h = mul(gate_out, tanh(c))
    return h, c
