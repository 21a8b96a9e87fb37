"""Recast phase-only sensing as a real linear sensing problem.

Given phases ``z`` of ``A x``, the normalised signal ``x* = kappa sqrt(m) x / ||A x||_1``
is the solution of the linear system ``A_z u = e1`` where ``A_z`` stacks the
real and imaginary parts of ``alpha_z = A^* z / (kappa sqrt(m))`` on top of
the phase-consistency rows ``H_z = Im(diag(z)^* A)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError
from .sensing import SensingEnsemble

__all__ = [
    "KAPPA",
    "DegenerateInputError",
    "NormalizedSignal",
    "LinearizedOperator",
    "ConsistencyReport",
    "normalize_signal",
    "build_alpha",
    "build_H",
    "build_Az",
    "e1",
    "phase_consistency_check",
    "epsilon_bound",
]

KAPPA = np.sqrt(np.pi / 2)


class DegenerateInputError(ValueError):
    """Raised when the signal or its measurements vanish."""


@dataclass(frozen=True)
class NormalizedSignal:
    xstar: np.ndarray
    scale_applied: float


@dataclass(frozen=True)
class LinearizedOperator:
    """The real ``(m+2) x n`` matrix ``A_z`` and the phases it was built from.

    Row 0 is ``Re(alpha_z)``, row 1 is ``Im(alpha_z)``, rows 2.. are ``H_z``.
    """

    matrix: np.ndarray
    z: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def H(self) -> np.ndarray:
        return self.matrix[2:]

    @property
    def alpha(self) -> np.ndarray:
        return self.matrix[0] + 1j * self.matrix[1]


@dataclass(frozen=True)
class ConsistencyReport:
    consistent: bool
    positivity_violations: int
    h_residual: float
    normalization_error: float
    imaginary_error: float

    def __bool__(self) -> bool:
        return self.consistent


def _check_z(ens: SensingEnsemble, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape != (ens.m,):
        raise DimensionError(f"phase vector of shape {z.shape} does not match m={ens.m}")
    return z


def normalize_signal(ens: SensingEnsemble, x) -> NormalizedSignal:
    """Rescale ``x`` so that ``||A x||_1 = kappa sqrt(m)``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (ens.n,):
        raise DimensionError(f"signal of shape {x.shape} does not match n={ens.n}")
    if not np.any(x):
        raise DegenerateInputError("cannot normalise the zero signal")
    l1 = np.sum(np.abs(ens.matrix @ x))
    if l1 == 0:
        raise DegenerateInputError("signal lies in the null space of A")
    scale = KAPPA * np.sqrt(ens.m) / l1
    return NormalizedSignal(scale * x, float(scale))


def build_alpha(ens: SensingEnsemble, z) -> np.ndarray:
    """``alpha_z = A^* z / (kappa sqrt(m))``, a length-``n`` complex vector."""
    z = _check_z(ens, z)
    return ens.matrix.conj().T @ z / (KAPPA * np.sqrt(ens.m))


def build_H(ens: SensingEnsemble, z) -> np.ndarray:
    """``H_z = Re(D_z) Im(A) - Im(D_z) Re(A)`` with ``D_z = diag(z)``."""
    z = _check_z(ens, z)
    A = ens.matrix
    return z.real[:, None] * A.imag - z.imag[:, None] * A.real


def build_Az(ens: SensingEnsemble, z) -> LinearizedOperator:
    z = _check_z(ens, z)
    alpha = build_alpha(ens, z)
    matrix = np.vstack([alpha.real, alpha.imag, build_H(ens, z)])
    matrix.setflags(write=False)
    return LinearizedOperator(matrix, z)


def e1(m: int) -> np.ndarray:
    """The target ``(1, 0, ..., 0)`` in ``R^(m+2)``."""
    out = np.zeros(m + 2)
    out[0] = 1.0
    return out


def phase_consistency_check(ens: SensingEnsemble, z, u, tol: float = 1e-8) -> ConsistencyReport:
    """Check the phase-consistency and normalisation constraints for ``u``.

    ``consistent`` covers the equality constraints only. The positivity
    constraint ``Re(diag(z)^* A u) > 0`` is reported as a count of entries
    that fail it, since recovery does not enforce it.
    """
    if not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    z = _check_z(ens, z)
    u = np.asarray(u, dtype=float)
    if u.shape != (ens.n,):
        raise DimensionError(f"vector of shape {u.shape} does not match n={ens.n}")
    alpha = build_alpha(ens, z)
    h_res = float(np.max(np.abs(build_H(ens, z) @ u), initial=0.0))
    norm_err = float(abs(alpha.real @ u - 1))
    imag_err = float(abs(alpha.imag @ u))
    positive_part = (np.conj(z) * (ens.matrix @ u)).real
    violations = int(np.count_nonzero(positive_part <= 0))
    consistent = h_res <= tol and norm_err <= tol and imag_err <= tol
    return ConsistencyReport(consistent, violations, h_res, norm_err, imag_err)


def epsilon_bound(tau: float, delta: float = 0.2) -> float:
    """Fidelity radius ``sqrt(2) tau (1 + delta) / (1 - delta)`` for noise level ``tau``."""
    if not tau >= 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    if not 0 <= delta < 1:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    return float(np.sqrt(2) * tau * (1 + delta) / (1 - delta))
