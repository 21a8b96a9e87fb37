"""Dense real/complex kernels and reproducible random streams."""
from __future__ import annotations

import numpy as np

__all__ = [
    "DimensionError",
    "RngStream",
    "sample_complex_gaussian",
    "sample_sparse_signal",
    "matvec",
    "adjoint_matvec",
    "norm_l1",
    "norm_l2",
    "inner_product",
]


class DimensionError(ValueError):
    """Raised when array shapes do not conform or a count is out of range."""


class RngStream:
    """Random stream keyed by ``(master_seed, stream_id)``.

    The underlying generator is derived through :class:`numpy.random.SeedSequence`
    with ``stream_id`` (and any ``substream`` keys) as the spawn key, so the
    sample sequence only depends on the keys and never on the order in which
    streams are created. Use :meth:`child` to fork independent substreams.
    """

    def __init__(self, master_seed: int, stream_id: int = 0, substream: tuple[int, ...] = ()):
        if master_seed < 0 or stream_id < 0 or any(k < 0 for k in substream):
            raise ValueError("seeds and stream keys must be non-negative integers")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        self.substream = tuple(int(k) for k in substream)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id, *self.substream))
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def child(self, *keys: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_id, self.substream + tuple(keys))

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id}, substream={self.substream})"


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def sample_complex_gaussian(rng, m: int, n: int) -> np.ndarray:
    """Draw an ``m x n`` matrix with i.i.d. ``N(0,1) + i N(0,1)`` entries."""
    if m < 1 or n < 1:
        raise DimensionError(f"matrix dimensions must be positive, got {m}x{n}")
    g = _gen(rng)
    re = g.standard_normal((m, n))
    im = g.standard_normal((m, n))
    return re + 1j * im


def sample_sparse_signal(rng, n: int, s: int) -> np.ndarray:
    """Draw an ``s``-sparse vector of length ``n``.

    The support is uniform over the size-``s`` subsets of ``range(n)`` and the
    nonzero values are standard normal.
    """
    if n < 1 or s < 1 or s > n:
        raise DimensionError(f"need 1 <= s <= n, got n={n}, s={s}")
    g = _gen(rng)
    support = g.choice(n, size=s, replace=False)
    x = np.zeros(n)
    x[support] = g.standard_normal(s)
    # a standard normal draw of exactly zero would break the sparsity count
    while np.count_nonzero(x) < s:
        zero = support[x[support] == 0]
        x[zero] = g.standard_normal(zero.size)
    return x


def _check_matvec(A: np.ndarray, v: np.ndarray, axis: int) -> None:
    if A.ndim != 2 or v.ndim != 1 or A.shape[axis] != v.shape[0]:
        raise DimensionError(f"cannot apply matrix of shape {A.shape} to vector of shape {v.shape}")


def matvec(A, v) -> np.ndarray:
    A = np.asarray(A)
    v = np.asarray(v)
    _check_matvec(A, v, 1)
    return A @ v


def adjoint_matvec(A, w) -> np.ndarray:
    """Return ``A^* w`` (conjugate transpose)."""
    A = np.asarray(A)
    w = np.asarray(w)
    _check_matvec(A, w, 0)
    return A.conj().T @ w


def norm_l1(v) -> float:
    return float(np.sum(np.abs(np.asarray(v))))


def norm_l2(v) -> float:
    return float(np.linalg.norm(np.asarray(v).ravel()))


def inner_product(u, w) -> complex | float:
    """Hermitian inner product ``<u, w> = sum(conj(u) * w)``.

    Real for real inputs.
    """
    u = np.asarray(u)
    w = np.asarray(w)
    if u.shape != w.shape or u.ndim != 1:
        raise DimensionError(f"inner product needs equal 1-D shapes, got {u.shape} and {w.shape}")
    val = np.vdot(u, w)
    if np.isrealobj(u) and np.isrealobj(w):
        return float(val.real)
    return complex(val)
