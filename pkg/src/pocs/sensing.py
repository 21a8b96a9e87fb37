"""Forward models: linear and phase-only complex compressive sensing."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .linalg import DimensionError, RngStream, _gen, sample_complex_gaussian

__all__ = [
    "Scaling",
    "SensingEnsemble",
    "NoiseSpec",
    "sign_c",
    "measure_linear",
    "measure_phase_only",
    "sample_disk_noise",
]


class Scaling(enum.Enum):
    """Normalisation applied to the raw Gaussian matrix ``Phi``."""

    OVER_SQRT_M = "over-sqrt-m"  # A = Phi / sqrt(m), used by the phase-only pipeline
    OVER_SQRT_2M = "over-sqrt-2m"  # A = Phi / sqrt(2m), unit-variance RIP convention

    def factor(self, m: int) -> float:
        return 1.0 / np.sqrt(m if self is Scaling.OVER_SQRT_M else 2 * m)


@dataclass(frozen=True)
class SensingEnsemble:
    """A raw complex Gaussian matrix together with its scaling convention.

    Attributes
    ----------
    raw : ndarray, shape (m, n)
        The unscaled matrix ``Phi``.
    scaling : Scaling
        How ``A`` is obtained from ``raw``.
    seed : tuple or None
        Provenance of ``raw`` (master seed and stream keys) when sampled here.
    """

    raw: np.ndarray
    scaling: Scaling = Scaling.OVER_SQRT_M
    seed: tuple | None = None
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        raw = np.array(self.raw, dtype=complex)
        if raw.ndim != 2 or raw.size == 0:
            raise DimensionError(f"sensing matrix must be a non-empty 2-D array, got shape {raw.shape}")
        if not np.all(np.isfinite(raw)):
            raise ValueError("sensing matrix has non-finite entries")
        raw.setflags(write=False)
        scaled = raw * self.scaling.factor(raw.shape[0])
        scaled.setflags(write=False)
        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "scaling", Scaling(self.scaling))
        object.__setattr__(self, "matrix", scaled)

    @classmethod
    def sample(cls, rng: RngStream, m: int, n: int, scaling: Scaling = Scaling.OVER_SQRT_M) -> "SensingEnsemble":
        raw = sample_complex_gaussian(rng, m, n)
        seed = (rng.master_seed, rng.stream_id, *rng.substream) if isinstance(rng, RngStream) else None
        return cls(raw, scaling, seed)

    @property
    def m(self) -> int:
        return self.raw.shape[0]

    @property
    def n(self) -> int:
        return self.raw.shape[1]

    def with_scaling(self, scaling: Scaling) -> "SensingEnsemble":
        return SensingEnsemble(self.raw, scaling, self.seed)


@dataclass(frozen=True)
class NoiseSpec:
    tau: float = 0.0

    def __post_init__(self):
        if not self.tau >= 0:
            raise ValueError(f"noise radius must be non-negative, got {self.tau}")

    def sample(self, rng, m: int) -> np.ndarray:
        return sample_disk_noise(rng, m, self.tau)


def sign_c(v) -> np.ndarray:
    """Complex sign: ``v / |v|`` entrywise, with ``sign_c(0) = 0``."""
    v = np.asarray(v, dtype=complex)
    mod = np.abs(v)
    out = np.zeros_like(v)
    nz = mod > 0
    out[nz] = v[nz] / mod[nz]
    return out


def _check_signal(ens: SensingEnsemble, x, noise) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != ens.n:
        raise DimensionError(f"signal of shape {x.shape} does not match n={ens.n}")
    if noise is None:
        noise = np.zeros(ens.m, dtype=complex)
    noise = np.asarray(noise, dtype=complex)
    if noise.shape != (ens.m,):
        raise DimensionError(f"noise of shape {noise.shape} does not match m={ens.m}")
    return x, noise


def measure_linear(ens: SensingEnsemble, x, noise=None) -> np.ndarray:
    """``y = A x + noise``."""
    x, noise = _check_signal(ens, x, noise)
    return ens.matrix @ x + noise


def measure_phase_only(ens: SensingEnsemble, x, noise=None, spec: NoiseSpec | None = None) -> np.ndarray:
    """``z = sign_c(A x) + noise``.

    When ``spec`` is given the noise must lie in the disk of radius ``spec.tau``.
    """
    x, noise = _check_signal(ens, x, noise)
    if spec is not None and noise.size and np.max(np.abs(noise)) > spec.tau * (1 + 1e-12):
        raise ValueError(f"noise exceeds the disk radius {spec.tau}")
    return sign_c(ens.matrix @ x) + noise


def sample_disk_noise(rng, m: int, tau: float) -> np.ndarray:
    """I.i.d. draws uniform on the closed complex disk of radius ``tau``."""
    if not tau >= 0:
        raise ValueError(f"noise radius must be non-negative, got {tau}")
    if m < 0:
        raise DimensionError(f"negative length {m}")
    g = _gen(rng)
    radius = tau * np.sqrt(g.random(m))
    angle = 2 * np.pi * g.random(m)
    return radius * np.exp(1j * angle)
