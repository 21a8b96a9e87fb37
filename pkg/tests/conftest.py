"""Shared helpers and independent oracles for the test suite."""
import numpy as np
import pytest
from scipy.optimize import linprog

ACCEPTANCE_LINES = []


def loop_matvec(A, v):
    """Entry-by-entry matrix-vector product, independent of BLAS."""
    m, n = A.shape
    out = np.zeros(m, dtype=complex)
    for k in range(m):
        acc = 0j
        for l in range(n):
            acc += A[k, l] * v[l]
        out[k] = acc
    return out


def loop_adjoint(A, w):
    m, n = A.shape
    out = np.zeros(n, dtype=complex)
    for l in range(n):
        acc = 0j
        for k in range(m):
            acc += np.conj(A[k, l]) * w[k]
        out[l] = acc
    return out


def basis_pursuit_lp(B, y):
    """Minimum l1 norm solution of ``B u = y`` via the split LP ``u = p - q``."""
    p, n = B.shape
    res = linprog(
        np.ones(2 * n),
        A_eq=np.hstack([B, -B]),
        b_eq=y,
        bounds=[(0, None)] * (2 * n),
        method="highs",
    )
    assert res.status == 0, res.message
    return res.x[:n] - res.x[n:]


def bpdn_kkt(B, y, u, eps):
    """Relative violation of the optimality conditions of min ||u||_1 s.t. ||y - Bu|| <= eps.

    Written from the Lagrangian directly: at an optimum with an active
    constraint, B^T r lies in lam * subdifferential(||.||_1)(u) for some lam > 0.
    """
    r = y - B @ u
    g = B.T @ r
    S = np.abs(u) > 0
    lam = np.dot(np.sign(u[S]), g[S]) / S.sum()
    viol = [abs(np.linalg.norm(r) - eps) / eps]
    viol.append(np.max(np.abs(g[S] - lam * np.sign(u[S]))) / lam)
    if (~S).any():
        viol.append(max(0.0, np.max(np.abs(g[~S])) / lam - 1))
    return max(viol), lam


def record_acceptance(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
