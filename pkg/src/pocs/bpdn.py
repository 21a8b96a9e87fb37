"""Basis pursuit denoising by root-finding on the Pareto curve.

Solves ::

    minimize ||u||_1  subject to  ||B u - y||_2 <= eps

for a dense real ``B``. The residual of the l1-constrained least-squares
problem, ``phi(t) = min{||B u - y|| : ||u||_1 <= t}``, is convex and
non-increasing in ``t``; its derivative is ``-||B^T r||_inf / ||r||``.
Newton steps on ``phi(t) = eps`` (safeguarded by bisection) pick the l1 budget,
and each LASSO subproblem is solved by spectral projected gradient with a
non-monotone curvilinear line search. A final support-restricted refinement
solves the optimality conditions exactly when the support is identified.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .linalg import DimensionError

__all__ = [
    "Status",
    "SolverConfig",
    "SolverReport",
    "bpdn",
    "project_l1_ball",
    "lift_complex",
    "kkt_residual",
]

logger = logging.getLogger(__name__)

_STEP_MIN = 1e-10
_STEP_MAX = 1e10
_GAMMA = 1e-4  # sufficient-decrease constant
_LINE_MAX = 30
_LS_TOL = 1e-6  # ||B^T r||_inf <= _LS_TOL ||r|| means least squares reached


class Status(enum.Enum):
    CONVERGED = "converged"
    ITERATION_CAP = "iteration-cap"
    INFEASIBLE_RADIUS = "infeasible-radius"


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``epsilon`` is the fidelity radius. ``opt_tol`` is the relative accuracy of
    the Pareto root, measured in units of ``||y||``. ``abs_floor`` (relative to
    ``||y||``) is the residual target of the exact-support refinement when
    ``epsilon = 0``.
    """

    epsilon: float = 0.0
    opt_tol: float = 1e-6
    max_outer_iters: int = 300
    max_lasso_iters: int = 10_000
    n_prev_vals: int = 3
    abs_floor: float = 1e-9
    refine: bool = True

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        if not (self.opt_tol > 0 and self.abs_floor > 0):
            raise ValueError("tolerances must be positive")
        if self.max_outer_iters < 1 or self.max_lasso_iters < 1 or self.n_prev_vals < 1:
            raise ValueError("iteration limits must be positive")


@dataclass
class SolverReport:
    estimate: np.ndarray
    residual_norm: float
    l1_norm: float
    outer_iters: int
    total_matvecs: int
    status: Status
    refined: bool = False
    pareto: list[tuple[float, float]] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def project_l1_ball(v, radius: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{u : ||u||_1 <= radius}``.

    Sort-based soft-threshold: the threshold is found from the cumulative sums
    of the sorted magnitudes in ``O(n log n)``.
    """
    v = np.asarray(v, dtype=float)
    if not radius >= 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    if radius == 0:
        return np.zeros_like(v)
    srt = np.sort(a)[::-1]
    cs = np.cumsum(srt) - radius
    k = np.arange(1, a.size + 1)
    active = np.nonzero(srt * k > cs)[0]
    rho = active[-1] if active.size else 0  # empty only when rounding swallows a tiny radius
    theta = cs[rho] / (rho + 1)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def lift_complex(Bc, yc) -> tuple[np.ndarray, np.ndarray]:
    """Stack real and imaginary parts so that a real unknown sees real data.

    For real ``u`` the lifted residual has the same Euclidean norm as
    ``Bc u - yc``.
    """
    Bc = np.asarray(Bc)
    yc = np.asarray(yc)
    if Bc.ndim != 2 or yc.shape != (Bc.shape[0],):
        raise DimensionError(f"matrix of shape {Bc.shape} and data of shape {yc.shape} do not conform")
    B = np.vstack([Bc.real, Bc.imag]).astype(float)
    y = np.concatenate([yc.real, yc.imag]).astype(float)
    return B, y


class _Counter:
    def __init__(self, B):
        self.B = B
        self.BT = np.ascontiguousarray(B.T)
        self.count = 0

    def fwd(self, x):
        self.count += 1
        return self.B @ x

    def adj(self, r):
        self.count += 1
        return self.BT @ r


def _spg_lasso(op: _Counter, y, tau, x, target_f, stop_phi, max_iters, n_prev):
    """Approximately minimise ``0.5 ||B x - y||^2`` over the l1 ball of radius ``tau``.

    Stops when the duality gap drops below ``target_f`` or the residual norm
    reaches ``stop_phi``. Returns ``(x, r, g, gap, exhausted)``.
    """
    x = project_l1_ball(x, tau)
    r = y - op.fwd(x)
    g = -op.adj(r)
    f = 0.5 * (r @ r)
    hist = [f] * n_prev
    d = project_l1_ball(x - g, tau) - x
    dnorm = np.max(np.abs(d), initial=0.0)
    alpha = _STEP_MAX if dnorm < 1 / _STEP_MAX else min(_STEP_MAX, max(_STEP_MIN, 1 / dnorm))

    for it in range(max_iters):
        lam = np.max(np.abs(g), initial=0.0)
        gap = r @ r - y @ r + tau * lam
        if gap <= target_f or np.sqrt(2 * f) <= stop_phi:
            return x, r, g, gap, False

        fmax = max(hist)
        step = alpha
        for _ in range(_LINE_MAX):
            x_new = project_l1_ball(x - step * g, tau)
            dx = x_new - x
            r_new = y - op.fwd(x_new)
            f_new = 0.5 * (r_new @ r_new)
            if f_new <= fmax + _GAMMA * (g @ dx):
                break
            step *= 0.5
        if not np.any(dx):
            # no movement at the smallest step: stationary to working precision
            return x, r, g, gap, False
        g_new = -op.adj(r_new)
        s = dx
        yk = g_new - g
        sts = s @ s
        sty = s @ yk
        alpha = _STEP_MAX if sty <= 0 else min(_STEP_MAX, max(_STEP_MIN, sts / sty))
        x, r, g, f = x_new, r_new, g_new, f_new
        hist.pop(0)
        hist.append(f)
    lam = np.max(np.abs(g), initial=0.0)
    return x, r, g, r @ r - y @ r + tau * lam, True


def _certificate_level(BS, Boff, sigma) -> float:
    """Smallest ``max|Boff^T w|`` over ``w`` with ``BS^T w = sigma``.

    A value ``<= 1`` certifies that the sign pattern ``sigma`` on ``BS`` is a
    basis pursuit solution.
    """
    p = BS.shape[0]
    k = Boff.shape[1]
    # variables (w, t): minimise t s.t. -t <= Boff^T w <= t, BS^T w = sigma
    c = np.zeros(p + 1)
    c[-1] = 1.0
    ones = np.ones((k, 1))
    A_ub = np.block([[Boff.T, -ones], [-Boff.T, -ones]])
    b_ub = np.zeros(2 * k)
    A_eq = np.hstack([BS.T, np.zeros((BS.shape[1], 1))])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=sigma,
                  bounds=[(None, None)] * p + [(0, None)], method="highs")
    return float(res.x[-1]) if res.status == 0 else np.inf


def _refine(B, y, x, eps, floor):
    """Solve the optimality conditions on the support of ``x``.

    Returns a refined estimate or ``None`` when no candidate support yields a
    certified solution.
    """
    m = B.shape[0]
    scale = np.max(np.abs(x), initial=0.0)
    if scale == 0:
        return None
    order = np.argsort(-np.abs(x))
    ax = np.abs(x)[order]
    tried = set()
    for rel in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8, 1e-10):
        k = int(np.count_nonzero(ax > rel * scale))
        if k == 0 or k > m or k in tried:
            continue
        tried.add(k)
        S = np.sort(order[:k])
        sigma = np.sign(x[S])
        BS = B[:, S]
        try:
            q, rr = np.linalg.qr(BS)
            if np.min(np.abs(np.diag(rr))) <= 1e-12 * np.max(np.abs(np.diag(rr))):
                continue
            ls = np.linalg.solve(rr, q.T @ y)
            # v = B_S (B_S^T B_S)^{-1} sigma spans the range of B_S
            w = np.linalg.solve(rr, np.linalg.solve(rr.T, sigma))
        except np.linalg.LinAlgError:
            continue
        r0 = y - BS @ ls
        v = BS @ w
        r0n2 = r0 @ r0
        off = np.ones(B.shape[1], dtype=bool)
        off[S] = False
        if eps == 0:
            if np.sqrt(r0n2) > floor or np.any(np.sign(ls) != sigma):
                continue
            uS = ls
            if np.any(off) and _certificate_level(B[:, S], B[:, off], sigma) > 1 + 1e-9:
                continue
        else:
            vn2 = v @ v
            if r0n2 >= eps * eps or vn2 == 0:
                continue
            lam = np.sqrt((eps * eps - r0n2) / vn2)
            uS = ls - lam * w
            if np.any(np.sign(uS) != sigma):
                continue
            corr = B[:, off].T @ (y - BS @ uS)
            if corr.size and np.max(np.abs(corr)) > lam * (1 + 1e-9):
                continue
        u = np.zeros(B.shape[1])
        u[S] = uS
        return u
    return None


def bpdn(B, y, cfg: SolverConfig | None = None) -> SolverReport:
    """Basis pursuit denoising ``argmin ||u||_1 s.t. ||B u - y|| <= cfg.epsilon``.

    Parameters
    ----------
    B : ndarray, shape (p, n)
        Real sensing matrix.
    y : ndarray, shape (p,)
        Real observations.
    cfg : SolverConfig, optional

    Returns
    -------
    SolverReport
        The estimate, its residual and l1 norms, iteration counts and the
        ``(budget, residual)`` pairs visited on the Pareto curve. When
        ``||y|| <= epsilon`` the zero vector is returned immediately.
    """
    cfg = cfg or SolverConfig()
    B = np.asarray(B, dtype=float)
    y = np.asarray(y, dtype=float)
    if B.ndim != 2 or y.shape != (B.shape[0],):
        raise DimensionError(f"matrix of shape {B.shape} and data of shape {y.shape} do not conform")
    n = B.shape[1]
    eps = float(cfg.epsilon)
    ynorm = float(np.linalg.norm(y))
    if ynorm <= eps:
        return SolverReport(np.zeros(n), ynorm, 0.0, 0, 0, Status.CONVERGED)

    op = _Counter(B)
    root_tol = cfg.opt_tol * ynorm
    floor = cfg.abs_floor * ynorm
    x = np.zeros(n)
    tau = 0.0
    lo, hi = 0.0, np.inf
    pareto: list[tuple[float, float]] = []
    status = Status.ITERATION_CAP
    outer = 0
    best = None

    shrink = 0.1
    while outer < cfg.max_outer_iters:
        outer += 1
        if tau == 0:
            x = np.zeros(n)
            r = y.copy()
            g = -op.adj(r)
            gap = 0.0
            exhausted = False
        else:
            phi_prev = pareto[-1][1]
            target_f = max(shrink * abs(0.5 * phi_prev**2 - 0.5 * eps**2), 0.25 * root_tol**2)
            x, r, g, gap, exhausted = _spg_lasso(
                op, y, tau, x, target_f, root_tol if eps == 0 else -1.0, cfg.max_lasso_iters, cfg.n_prev_vals
            )
        phi = float(np.linalg.norm(r))
        lam = float(np.max(np.abs(g), initial=0.0))
        pareto.append((tau, phi))
        if phi <= eps + root_tol and (best is None or np.abs(x).sum() < np.abs(best).sum()):
            best = x.copy()
        logger.debug("outer %d: tau=%.6e phi=%.6e lambda=%.3e", outer, tau, phi, lam)

        if abs(phi - eps) <= root_tol:
            status = Status.CONVERGED
            break
        if phi > eps and lam <= _LS_TOL * phi and not exhausted:
            status = Status.INFEASIBLE_RADIUS
            break
        # weak duality with w = r: every feasible u has ||u||_1 >= (y.r - eps ||r||) / ||B^T r||_inf.
        # At an exact LASSO solution this equals the Newton step on the Pareto curve.
        if lam > 0:
            lo = max(lo, (y @ r - eps * phi) / lam)
        if phi <= eps:
            hi = min(hi, tau)
        if lo >= hi:
            lo = hi
        if phi > eps:
            if lo <= tau * (1 + 1e-12):
                # inexact subproblem gave no progress: solve the same budget more accurately
                shrink *= 0.1
                if shrink < 1e-12 or exhausted:
                    break
                continue
            tau_new = lo
        else:
            tau_new = tau + (phi - eps) * phi / lam if lam > 0 else lo
            if not lo <= tau_new < hi:
                tau_new = 0.5 * (lo + hi)
        shrink = 0.1
        if np.isfinite(hi) and hi - lo <= 1e-8 * hi:
            x = best if best is not None else x
            status = Status.CONVERGED if best is not None else Status.ITERATION_CAP
            break
        tau = tau_new

    if best is not None and status is not Status.CONVERGED:
        x = best
    refined = False
    if cfg.refine and status is not Status.INFEASIBLE_RADIUS:
        u = _refine(B, y, x, eps, floor)
        # sharpen the last subproblem when the support is not yet identified;
        # with eps = 0 an unidentified support means the solution is not sparse
        for k in range(1, 4):
            if u is not None or status is not Status.CONVERGED or eps == 0:
                break
            f_now = 0.5 * float(np.sum((y - B @ x) ** 2))
            x_k, r_k, _, _, _ = _spg_lasso(
                op, y, tau, x, 1e-4**k * max(f_now, root_tol**2), -1.0, cfg.max_lasso_iters, cfg.n_prev_vals
            )
            if np.linalg.norm(r_k) <= eps + root_tol:
                x = x_k
            u = _refine(B, y, x_k, eps, floor)
        if u is not None:
            op.count += 2
            x = u
            refined = True
            status = Status.CONVERGED

    res = float(np.linalg.norm(B @ x - y))
    op.count += 1
    if status is Status.CONVERGED and res > eps + max(root_tol, floor) * (1 + 1e-9):
        status = Status.ITERATION_CAP
    return SolverReport(x, res, float(np.abs(x).sum()), outer, op.count, status, refined, pareto)


def kkt_residual(B, y, u, eps: float) -> float:
    """Largest relative violation of the BPDN optimality conditions at ``u``.

    With ``r = y - B u`` and ``lam = mean(sign(u_S) * (B^T r)_S)`` over the
    support ``S``, checks ``||r|| = eps``, ``(B^T r)_S = lam sign(u_S)`` and
    ``|B^T r| <= lam`` off the support. Meaningful for ``eps > 0`` and
    ``u != 0``.
    """
    B = np.asarray(B, dtype=float)
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    r = y - B @ u
    corr = B.T @ r
    S = u != 0
    if not np.any(S):
        return float("inf")
    sig = np.sign(u[S])
    lam = float(np.mean(sig * corr[S]))
    if lam <= 0:
        return float("inf")
    sphere = abs(np.linalg.norm(r) - eps) / eps
    stationarity = np.max(np.abs(corr[S] - lam * sig)) / lam
    dual = max(0.0, np.max(np.abs(corr[~S]), initial=0.0) - lam) / lam
    return float(max(sphere, stationarity, dual))
