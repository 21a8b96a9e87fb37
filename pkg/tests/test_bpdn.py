import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pocs.bpdn import SolverConfig, Status, bpdn, kkt_residual, lift_complex, project_l1_ball
from pocs.linalg import DimensionError, RngStream, sample_complex_gaussian, sample_sparse_signal
from pocs.linearization import build_Az, e1, normalize_signal
from pocs.sensing import SensingEnsemble, measure_phase_only

from conftest import basis_pursuit_lp, bpdn_kkt


def threshold_oracle(v, radius):
    """Projection by bisection on the soft threshold, no sorting involved."""
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    lo, hi = 0.0, a.max()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.maximum(a - mid, 0).sum() > radius:
            lo = mid
        else:
            hi = mid
    return np.sign(v) * np.maximum(a - hi, 0)


def test_projection_examples():
    assert np.array_equal(project_l1_ball([0.2, -0.3], 1.0), [0.2, -0.3])
    assert np.allclose(project_l1_ball([3.0, 1.0], 2.0), [2.0, 0.0])
    assert np.array_equal(project_l1_ball([3.0, 1.0], 0.0), [0.0, 0.0])
    with pytest.raises(ValueError):
        project_l1_ball([1.0], -1.0)


def test_projection_matches_bisection_and_beats_feasible_points(rng):
    v = rng.standard_normal(40) * 3
    r = 5.0
    p = project_l1_ball(v, r)
    assert np.max(np.abs(p - threshold_oracle(v, r))) < 1e-10
    d = np.linalg.norm(v - p)
    for _ in range(1000):
        w = rng.standard_normal(40)
        w *= r * rng.random() / np.abs(w).sum()
        assert np.linalg.norm(v - w) >= d - 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30), st.floats(0, 1e3))
def test_projection_properties(vals, r):
    v = np.array(vals)
    p = project_l1_ball(v, r)
    assert np.abs(p).sum() <= r * (1 + 1e-12) + 1e-12
    assert np.all(np.sign(p) * np.sign(v) >= 0)
    assert np.allclose(project_l1_ball(p, r), p, atol=1e-9)


def test_lift_preserves_residual_norm(rng):
    Bc = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    yc = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    u = rng.standard_normal(3)
    B, y = lift_complex(Bc, yc)
    assert B.shape == (10, 3)
    assert abs(np.linalg.norm(B @ u - y) - np.linalg.norm(Bc @ u - yc)) < 1e-13
    B0, y0 = lift_complex(Bc, np.zeros(5))
    assert not y0.any()
    with pytest.raises(DimensionError):
        lift_complex(Bc, np.zeros(4))


def test_identity_system_is_solved_exactly():
    y = np.array([0.0, 1.5, 0.0, -2.0, 0.0])
    rep = bpdn(np.eye(5), y)
    assert rep.status is Status.CONVERGED
    assert np.max(np.abs(rep.estimate - y)) < 1e-9


def test_small_data_returns_zero():
    rep = bpdn(np.eye(3), np.array([0.1, 0.0, 0.0]), SolverConfig(epsilon=0.2))
    assert not rep.estimate.any()
    assert rep.status is Status.CONVERGED


def test_basis_pursuit_matches_linear_program(rng):
    for _ in range(10):
        B = rng.standard_normal((12, 30))
        y = rng.standard_normal(12)
        rep = bpdn(B, y)
        ref = basis_pursuit_lp(B, y)
        assert np.linalg.norm(B @ rep.estimate - y) <= 1e-6 * np.linalg.norm(y)
        assert np.abs(rep.estimate).sum() <= np.abs(ref).sum() * (1 + 1e-6)


def test_kkt_on_small_noisy_instance(rng):
    B = rng.standard_normal((6, 10))
    y = rng.standard_normal(6)
    rep = bpdn(B, y, SolverConfig(epsilon=0.1))
    viol, lam = bpdn_kkt(B, y, rep.estimate, 0.1)
    assert viol <= 1e-5 and lam > 0
    assert abs(kkt_residual(B, y, rep.estimate, 0.1) - viol) < 1e-9


def test_pareto_curve_is_nonincreasing(rng):
    B = rng.standard_normal((20, 50))
    y = B @ sample_sparse_signal(rng, 50, 4)
    rep = bpdn(B, y, SolverConfig(epsilon=0.05))
    best = {}
    for tau, phi in rep.pareto:  # a budget may be re-solved more accurately
        best[tau] = min(phi, best.get(tau, np.inf))
    assert len(best) >= 2
    phis = [best[tau] for tau in sorted(best)]
    assert all(b <= a + 1e-6 * np.linalg.norm(y) for a, b in zip(phis, phis[1:]))


def test_infeasible_radius_is_reported():
    B = np.array([[1.0, 0.0], [1.0, 0.0]])
    rep = bpdn(B, np.array([1.0, -1.0]), SolverConfig(epsilon=0.5))
    assert rep.status is Status.INFEASIBLE_RADIUS


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(epsilon=-1)
    with pytest.raises(ValueError):
        SolverConfig(opt_tol=0)
    with pytest.raises(ValueError):
        SolverConfig(max_outer_iters=0)
    with pytest.raises(DimensionError):
        bpdn(np.eye(3), np.ones(2))


def test_linear_cs_recovers_sparse_signal():
    n, s, m = 100, 10, 40
    g = RngStream(31)
    A = sample_complex_gaussian(g, m, n) / np.sqrt(2 * m)
    x = sample_sparse_signal(g.child(1), n, s)
    B, y = lift_complex(A, A @ x)
    rep = bpdn(B, y)
    snr = 20 * np.log10(np.linalg.norm(x) / np.linalg.norm(x - rep.estimate))
    assert snr >= 60


def test_phase_only_estimate_no_worse_than_truth():
    ens = SensingEnsemble.sample(RngStream(32), 50, 60)
    x = sample_sparse_signal(RngStream(32, 1), 60, 6)
    xstar = normalize_signal(ens, x).xstar
    Az = build_Az(ens, measure_phase_only(ens, x)).matrix
    rep = bpdn(Az, e1(ens.m))
    assert np.linalg.norm(Az @ rep.estimate - e1(ens.m)) <= 1e-6
    assert np.abs(rep.estimate).sum() <= np.abs(xstar).sum() * (1 + 1e-6)
