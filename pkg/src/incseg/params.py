"""Named parameter store with Adam state.

Parameters are plain :class:`~incseg.autodiff.Tensor` leaves registered
under stable names. The store also owns the two Adam moment arrays per
parameter and the global step counter, so a checkpoint of the store is a
complete snapshot of training.
"""

import numpy as np

from .autodiff import Gradients, Tensor


class ParamStore:
    def __init__(self, seed: int = 0):
        self.params: dict[str, Tensor] = {}
        self.adam_m: dict[str, np.ndarray] = {}
        self.adam_v: dict[str, np.ndarray] = {}
        self.step = 0
        self.seed = int(seed)

    def add(self, name: str, value: np.ndarray) -> Tensor:
        if name in self.params:
            raise ValueError(f"parameter {name!r} already registered")
        t = Tensor(np.asarray(value, dtype=np.float64))
        self.params[name] = t
        self.adam_m[name] = np.zeros_like(t.data)
        self.adam_v[name] = np.zeros_like(t.data)
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self.params[name]

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def names(self) -> list[str]:
        return list(self.params.keys())

    def n_values(self) -> int:
        return sum(t.size for t in self.params.values())

    def copy(self) -> "ParamStore":
        """Deep copy of parameters, moments, and counters."""
        other = ParamStore(self.seed)
        for name, t in self.params.items():
            other.params[name] = Tensor(t.data.copy())
            other.adam_m[name] = self.adam_m[name].copy()
            other.adam_v[name] = self.adam_v[name].copy()
        other.step = self.step
        return other

    def load_values_from(self, other: "ParamStore"):
        """Overwrite this store's arrays in place from a same-shaped store."""
        if set(other.params) != set(self.params):
            raise ValueError("parameter name sets differ")
        for name, t in self.params.items():
            t.data[...] = other.params[name].data
            self.adam_m[name][...] = other.adam_m[name]
            self.adam_v[name][...] = other.adam_v[name]
        self.step = other.step

    def collect(self, grads: Gradients) -> dict[str, np.ndarray]:
        """Per-parameter gradient arrays, zeros where the tape never touched one."""
        out = {}
        for name, t in self.params.items():
            g = grads.wrt(t)
            out[name] = np.zeros_like(t.data) if g is None else g
        return out


def glorot_uniform(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Uniform init in +-sqrt(6/(fan_in+fan_out)); 1-D shapes use fan_out 1."""
    if len(shape) == 1:
        fan_in, fan_out = shape[0], 1
    elif len(shape) == 2:
        fan_out, fan_in = shape
    else:
        # Convolution kernels: (filters, width, channels).
        fan_out, fan_in = shape[0], int(np.prod(shape[1:]))
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def lstm_bias(hidden: int) -> np.ndarray:
    """Zero gate biases except the forget gate, which starts at +1."""
    b = np.zeros(4 * hidden)
    b[hidden : 2 * hidden] = 1.0
    return b


def clip_gradients(grad_map: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all gradients in place so the global L2 norm is at most ``max_norm``.

    Returns the pre-clip norm.
    """
    total = 0.0
    for g in grad_map.values():
        total += float((g * g).sum())
    norm = float(np.sqrt(total))
    if max_norm > 0 and norm > max_norm:
        factor = max_norm / norm
        for name in grad_map:
            grad_map[name] = grad_map[name] * factor
    return norm


def adam_step(
    store: ParamStore,
    grad_map: dict[str, np.ndarray],
    lr: float = 1e-3,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
    l2: float = 0.0,
):
    """One Adam update with bias correction over every parameter in the store.

    The L2 term is added to the raw gradient before the moment updates, so
    regularization participates in the adaptive scaling.
    """
    beta1, beta2 = betas
    missing = [name for name in store.params if name not in grad_map]
    if missing:
        raise ValueError(f"missing gradient for parameters: {missing}")
    store.step += 1
    t = store.step
    for name, p in store.params.items():
        g = grad_map[name]
        if g.shape != p.data.shape:
            raise ValueError(
                f"gradient shape {g.shape} does not match parameter {name!r} {p.data.shape}"
            )
        if l2:
            g = g + l2 * p.data
        m = store.adam_m[name]
        v = store.adam_v[name]
        m[...] = beta1 * m + (1.0 - beta1) * g
        v[...] = beta2 * v + (1.0 - beta2) * (g * g)
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        p.data -= lr * m_hat / (np.sqrt(v_hat) + eps)
