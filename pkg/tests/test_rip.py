import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pocs.linalg import RngStream, sample_sparse_signal
from pocs.rip import (
    MAX_EXHAUSTIVE_SUPPORTS,
    CombinatorialLimitError,
    count_supports,
    estimate_rip,
    rip_of_linearized,
    validate_fidelity_bound,
)
from pocs.sensing import Scaling, SensingEnsemble


def lifted_gaussian(seed, m, n):
    A = SensingEnsemble.sample(RngStream(seed), m, n, Scaling.OVER_SQRT_2M).matrix
    return np.vstack([A.real, A.imag])


def brute_delta(M, s):
    """Direct definition: extreme eigenvalues of every s-column Gram matrix."""
    import itertools

    lo, hi = np.inf, -np.inf
    for S in itertools.combinations(range(M.shape[1]), s):
        ev = np.linalg.eigvalsh(M[:, S].T @ M[:, S])
        lo, hi = min(lo, ev[0]), max(hi, ev[-1])
    return max(1 - lo, hi - 1)


def test_orthonormal_columns_have_zero_constant(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((12, 6)))
    est = estimate_rip(Q, 3)
    assert abs(est.delta) < 1e-12
    assert est.supports_checked == math.comb(6, 3)


def test_zero_matrix_has_unit_constant():
    assert estimate_rip(np.zeros((4, 5)), 2).delta == 1.0


def test_matches_gram_eigenvalue_oracle():
    M = lifted_gaussian(1, 10, 8)
    assert abs(estimate_rip(M, 3).delta - brute_delta(M, 3)) < 1e-12


def test_witnesses_attain_extremes():
    M = lifted_gaussian(2, 12, 9)
    est = estimate_rip(M, 2)
    umin, umax = est.witness("min", M), est.witness("max", M)
    assert np.count_nonzero(umin) <= 2 and abs(np.linalg.norm(umin) - 1) < 1e-12
    assert abs(np.linalg.norm(M @ umin) - est.sigma_min) < 1e-12
    assert abs(np.linalg.norm(M @ umax) - est.sigma_max) < 1e-12
    with pytest.raises(ValueError):
        est.witness("min")


def test_sampled_mode_bounds_exhaustive_from_below():
    M = lifted_gaussian(3, 15, 12)
    full = estimate_rip(M, 3)
    part = estimate_rip(M, 3, "sampled:40", rng=RngStream(3, 1))
    assert part.supports_checked == 40
    assert part.delta <= full.delta + 1e-15
    with pytest.raises(ValueError):
        estimate_rip(M, 3, "sampled:5")


def test_refuses_large_enumeration():
    assert count_supports(30, 8) > MAX_EXHAUSTIVE_SUPPORTS
    with pytest.raises(CombinatorialLimitError) as info:
        estimate_rip(np.zeros((2, 30)), 8)
    assert info.value.count == math.comb(30, 8)


def test_constant_shrinks_with_more_rows():
    medians = []
    for m in (20, 40, 80):
        medians.append(np.median([estimate_rip(lifted_gaussian(100 + t, m, 20), 2).delta for t in range(10)]))
    assert medians[0] > medians[1] > medians[2]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.permutations(range(7)))
def test_column_permutation_invariance(seed, perm):
    M = lifted_gaussian(seed, 6, 7)
    assert abs(estimate_rip(M, 2).delta - estimate_rip(M[:, list(perm)], 2).delta) < 1e-12


def test_linearized_constant_is_scale_invariant():
    ens = SensingEnsemble.sample(RngStream(4), 64, 16)
    x = sample_sparse_signal(RngStream(4, 1), 16, 2)
    a, b = rip_of_linearized(ens, x, 2), rip_of_linearized(ens, 7.5 * x, 2)
    assert abs(a.delta - b.delta) < 1e-12
    with pytest.raises(ValueError):
        rip_of_linearized(ens, np.zeros(16), 2)


def test_fidelity_noiseless_and_linear_scaling():
    ens = SensingEnsemble.sample(RngStream(5), 96, 16)
    x = sample_sparse_signal(RngStream(5, 1), 16, 2)
    quiet = validate_fidelity_bound(ens, x, 0.0, 10, RngStream(5, 2))
    assert quiet.max_ratio == 0 and quiet.max_distance < 1e-12
    a = validate_fidelity_bound(ens, x, 0.025, 200, RngStream(5, 3))
    b = validate_fidelity_bound(ens, x, 0.05, 200, RngStream(5, 3))
    assert abs(b.max_distance / a.max_distance - 2) < 1e-9
    assert abs(b.max_ratio - a.max_ratio) < 1e-9 * a.max_ratio
    assert a.holds and b.holds
