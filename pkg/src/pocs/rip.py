"""Brute-force restricted isometry constants and Monte-Carlo bound checks."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError, _gen
from .linearization import build_Az, e1, epsilon_bound, normalize_signal
from .sensing import SensingEnsemble, sample_disk_noise, sign_c

__all__ = [
    "MAX_EXHAUSTIVE_SUPPORTS",
    "CombinatorialLimitError",
    "RipEstimate",
    "FidelityReport",
    "count_supports",
    "estimate_rip",
    "rip_of_linearized",
    "validate_fidelity_bound",
]

MAX_EXHAUSTIVE_SUPPORTS = 10**6


class CombinatorialLimitError(ValueError):
    """Raised when exhaustive enumeration would visit too many supports."""

    def __init__(self, n: int, s: int, count: int):
        super().__init__(
            f"exhaustive RIP over C({n}, {s}) = {count} supports exceeds the cap of {MAX_EXHAUSTIVE_SUPPORTS}"
        )
        self.count = count


@dataclass(frozen=True)
class RipEstimate:
    """Witnessed restricted isometry constant of order ``s``.

    ``min_support`` and ``max_support`` are the column subsets attaining
    ``sigma_min`` and ``sigma_max``.
    """

    order: int
    delta: float
    sigma_min: float
    sigma_max: float
    supports_checked: int
    min_support: tuple[int, ...] = ()
    max_support: tuple[int, ...] = ()

    def witness(self, which: str = "min", M=None) -> np.ndarray:
        """Unit ``s``-sparse vector attaining the extreme singular value.

        Requires the matrix ``M`` the estimate was computed from.
        """
        if M is None:
            raise ValueError("the source matrix is required to rebuild the witness")
        M = np.asarray(M, dtype=float)
        S = list(self.min_support if which == "min" else self.max_support)
        _, _, vt = np.linalg.svd(M[:, S])
        u = np.zeros(M.shape[1])
        u[S] = vt[-1] if which == "min" else vt[0]
        return u


@dataclass(frozen=True)
class FidelityReport:
    max_ratio: float
    max_distance: float
    bound_ratio: float
    delta_hat: float
    ratios: np.ndarray

    @property
    def holds(self) -> bool:
        return self.max_ratio <= self.bound_ratio


def count_supports(n: int, s: int) -> int:
    return math.comb(n, s)


def _extremes(M: np.ndarray, supports):
    smin, smax = np.inf, -np.inf
    arg_min = arg_max = ()
    checked = 0
    for batch in _batched(supports, 4096):
        idx = np.array(batch)
        sub = np.transpose(M[:, idx], (1, 0, 2))  # (batch, rows, s)
        sv = np.linalg.svd(sub, compute_uv=False)
        lo = sv[:, -1]
        hi = sv[:, 0]
        i, j = int(np.argmin(lo)), int(np.argmax(hi))
        if lo[i] < smin:
            smin, arg_min = float(lo[i]), tuple(int(k) for k in idx[i])
        if hi[j] > smax:
            smax, arg_max = float(hi[j]), tuple(int(k) for k in idx[j])
        checked += len(batch)
    return smin, smax, arg_min, arg_max, checked


def _batched(it, size):
    it = iter(it)
    while batch := list(itertools.islice(it, size)):
        yield batch


def estimate_rip(M, s: int, mode: str | int = "exhaustive", rng=None) -> RipEstimate:
    """Restricted isometry constant of ``M`` over ``s``-sparse vectors.

    Parameters
    ----------
    M : array_like, shape (p, n)
    s : int
        Sparsity order.
    mode : "exhaustive", "sampled:k" or int k
        ``"exhaustive"`` visits all ``C(n, s)`` column supports (refused above
        :data:`MAX_EXHAUSTIVE_SUPPORTS`). Sampled mode draws ``k`` random
        supports and gives a lower bound on the constant.
    rng : RngStream or numpy Generator, optional
        Required for sampled mode.

    Returns
    -------
    RipEstimate
        ``delta = max(1 - sigma_min^2, sigma_max^2 - 1)`` over the visited
        supports. The value is not clipped to ``[0, 1)``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {M.shape}")
    n = M.shape[1]
    if not 1 <= s <= n:
        raise DimensionError(f"need 1 <= s <= n, got s={s}, n={n}")
    if mode == "exhaustive":
        total = count_supports(n, s)
        if total > MAX_EXHAUSTIVE_SUPPORTS:
            raise CombinatorialLimitError(n, s, total)
        supports = itertools.combinations(range(n), s)
    else:
        k = int(mode.split(":", 1)[1]) if isinstance(mode, str) and mode.startswith("sampled:") else int(mode)
        if k < 1:
            raise ValueError(f"sampled mode needs a positive number of supports, got {mode!r}")
        if rng is None:
            raise ValueError("sampled mode requires an rng")
        g = _gen(rng)
        supports = (tuple(sorted(g.choice(n, size=s, replace=False))) for _ in range(k))
    smin, smax, amin, amax, checked = _extremes(M, supports)
    delta = max(1 - smin**2, smax**2 - 1)
    return RipEstimate(s, float(delta), smin, smax, checked, amin, amax)


def rip_of_linearized(ens: SensingEnsemble, x_source, s: int) -> RipEstimate:
    """Exhaustive RIP constant of ``A_z'`` built from ``z' = sign_c(A x_source)``."""
    x_source = np.asarray(x_source, dtype=float)
    if not np.any(x_source):
        raise ValueError("x_source must be nonzero")
    if count_supports(ens.n, s) > MAX_EXHAUSTIVE_SUPPORTS:
        raise CombinatorialLimitError(ens.n, s, count_supports(ens.n, s))
    z = sign_c(ens.matrix @ x_source)
    return estimate_rip(build_Az(ens, z).matrix, s, "exhaustive")


def validate_fidelity_bound(
    ens: SensingEnsemble,
    x,
    tau: float,
    trials: int,
    rng,
    s: int | None = None,
) -> FidelityReport:
    """Monte-Carlo check of ``||A_z x* - e1|| <= sqrt(2) tau (1 + d) / (1 - d)``.

    Draws ``trials`` disk-noise realisations of radius ``tau`` on the phases of
    ``A x`` and records ``||A_z x* - e1|| / tau``. ``d`` is the exhaustive RIP
    constant of the noiseless ``A_z'`` at order ``s`` (default: the sparsity of
    ``x``). When ``tau = 0`` every ratio is reported as 0 and ``max_distance``
    carries the noiseless defect.
    """
    if not tau >= 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    xstar = normalize_signal(ens, x).xstar
    order = int(np.count_nonzero(xstar)) if s is None else s
    delta_hat = rip_of_linearized(ens, xstar, order).delta
    clean = sign_c(ens.matrix @ xstar)
    target = e1(ens.m)
    dists = np.empty(trials)
    for t in range(trials):
        z = clean + sample_disk_noise(rng, ens.m, tau)
        dists[t] = np.linalg.norm(build_Az(ens, z).matrix @ xstar - target)
    ratios = dists / tau if tau > 0 else np.zeros(trials)
    bound = epsilon_bound(1.0, delta_hat) if delta_hat < 1 else np.inf
    return FidelityReport(
        float(ratios.max(initial=0.0)), float(dists.max(initial=0.0)), bound, float(delta_hat), ratios
    )
