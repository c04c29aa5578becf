import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from supou import matfun
from supou.errors import (
    BranchCutError,
    ConditioningError,
    ModeMismatchError,
    StabilityError,
    ValidationError,
)

from conftest import random_stable, random_stable_real_spectrum


# -- expm ----------------------------------------------------------------
def test_expm_identity_at_zero():
    a = np.array([[-1.0, 3.0], [0.2, -2.0]])
    assert np.array_equal(matfun.expm(a, 0.0), np.eye(2))


def test_expm_diagonal():
    got = matfun.expm(np.diag([-1.0, -2.0]), 1.0)
    assert np.allclose(got, np.diag([np.exp(-1.0), np.exp(-2.0)]), atol=1e-14)


def test_expm_nilpotent():
    got = matfun.expm(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)
    assert np.allclose(got, [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)


def test_expm_rejects_bad_input():
    with pytest.raises(ValidationError):
        matfun.expm(np.array([[np.nan, 0.0], [0.0, 0.0]]), 1.0)
    with pytest.raises(ValidationError):
        matfun.expm(np.eye(2), -0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5),
       st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_expm_semigroup(seed, d, s, t):
    a = random_stable(np.random.default_rng(seed), d)
    left = matfun.expm(a, s) @ matfun.expm(a, t)
    right = matfun.expm(a, s + t)
    assert np.linalg.norm(left - right) <= 1e-10 * max(np.linalg.norm(right), 1.0)


# -- fractional powers ----------------------------------------------------
def test_frac_power_identity_cases():
    assert np.allclose(matfun.frac_matrix_power(np.eye(3), -0.5), np.eye(3))
    assert np.allclose(matfun.frac_matrix_power(np.array([[4.0]]), 0.5), [[2.0]])
    # beta I - B h with beta=1, B=-1, h=1 and power 1 - alpha at alpha = 2
    assert np.allclose(matfun.frac_matrix_power(np.array([[2.0]]), -1.0), [[0.5]])


def test_frac_power_branch_cut():
    with pytest.raises(BranchCutError):
        matfun.frac_matrix_power(np.diag([1.0, -2.0]), 0.5)


def test_frac_power_nondiagonalizable():
    with pytest.raises(ConditioningError):
        matfun.frac_matrix_power(np.array([[1.0, 1.0], [0.0, 1.0]]), 0.5)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4),
       st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_frac_power_group_property(seed, d, p, q):
    rng = np.random.default_rng(seed)
    m = 3.0 * np.eye(d) - random_stable_real_spectrum(rng, d)  # spectrum > 0
    mp = matfun.frac_matrix_power(m, p)
    mq = matfun.frac_matrix_power(m, q)
    mpq = matfun.frac_matrix_power(m, p + q)
    assert np.linalg.norm(mp @ mq - mpq) <= 1e-9 * max(np.linalg.norm(mpq), 1.0)
    m1 = matfun.frac_matrix_power(m, 1.0)
    assert np.linalg.norm(m1 - m) <= 1e-10 * np.linalg.norm(m)


# -- Lyapunov solve --------------------------------------------------------
def test_lyapunov_trivial_cases():
    x = matfun.lyapunov_solve(-np.eye(2), -np.eye(2))
    assert np.allclose(x, 0.5 * np.eye(2), atol=1e-14)
    a = np.diag([-1.0, -2.0])
    c = np.ones((2, 2))
    x = matfun.lyapunov_solve(a, c)
    expect = np.array([[-0.5, -1.0 / 3.0], [-1.0 / 3.0, -0.25]])
    assert np.allclose(x, expect, atol=1e-14)


def test_lyapunov_rejects_unstable():
    with pytest.raises(StabilityError):
        matfun.lyapunov_solve(np.diag([1.0, -1.0]), np.eye(2))


def test_lyapunov_matches_kron_and_scipy_oracles():
    rng = np.random.default_rng(7)
    for _ in range(100):
        d = rng.integers(1, 5)
        a = random_stable(rng, int(d))
        c = rng.standard_normal((int(d), int(d)))
        x = matfun.lyapunov_solve(a, c)
        # dense Kronecker oracle
        k = np.kron(np.eye(int(d)), a) + np.kron(a, np.eye(int(d)))
        x_kron = np.linalg.solve(k, c.flatten(order="F")).reshape((int(d), int(d)),
                                                                  order="F")
        assert np.max(np.abs(x - x_kron)) <= 1e-9 * max(1.0, np.abs(x_kron).max())
        # independent Bartels-Stewart oracle
        x_bs = scipy.linalg.solve_continuous_lyapunov(a, c)
        assert np.max(np.abs(x - x_bs)) <= 1e-8 * max(1.0, np.abs(x_bs).max())
        assert np.linalg.norm(a @ x + x @ a.T - c) <= 1e-9 * max(np.linalg.norm(c), 1.0)


# -- Kronecker sum ---------------------------------------------------------
def test_kron_sum_trivial():
    assert np.array_equal(matfun.kron_sum(np.zeros((2, 2))), np.zeros((4, 4)))
    assert np.allclose(matfun.kron_sum(np.array([[-1.0]])), [[-2.0]])
    got = matfun.kron_sum(np.diag([-1.0, -2.0]))
    assert np.allclose(np.sort(np.diag(got)), [-4.0, -3.0, -3.0, -2.0])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_kron_sum_eigenvalues_are_pairwise_sums(seed, d):
    from scipy.optimize import linear_sum_assignment
    a = random_stable(np.random.default_rng(seed), d)
    lam = np.linalg.eigvals(a)
    pair = (lam[:, None] + lam[None, :]).ravel()
    got = np.linalg.eigvals(matfun.kron_sum(a))
    cost = np.abs(pair[:, None] - got[None, :])
    rows, cols = linear_sum_assignment(cost)
    assert cost[rows, cols].max() <= 1e-8 * max(1.0, np.abs(pair).max())


def test_kron_sum_exponential_identity():
    rng = np.random.default_rng(3)
    a = random_stable(rng, 3)
    t = 0.7
    left = matfun.expm(matfun.kron_sum(a), t)
    e = matfun.expm(a, t)
    assert np.allclose(left, np.kron(e, e), atol=1e-12)


# -- modulus of injectivity --------------------------------------------------
def test_modulus_trivial():
    assert matfun.modulus_of_injectivity(np.eye(3)) == pytest.approx(1.0)
    assert matfun.modulus_of_injectivity(np.diag([2.0, 3.0])) == pytest.approx(2.0)


def test_modulus_brute_force_unit_circle():
    z = np.array([[1.0, 0.0], [5.0, 1.0]])
    angles = np.linspace(0.0, 2 * np.pi, 10_000, endpoint=False)
    xs = np.stack([np.cos(angles), np.sin(angles)])
    brute = np.min(np.linalg.norm(z @ xs, axis=0))
    assert abs(matfun.modulus_of_injectivity(z) - brute) <= 1e-4


def test_modulus_inverse_norm_identity():
    rng = np.random.default_rng(11)
    for _ in range(20):
        z = rng.standard_normal((3, 3))
        if abs(np.linalg.det(z)) < 1e-6:
            continue
        j = matfun.modulus_of_injectivity(z)
        assert j == pytest.approx(1.0 / np.linalg.norm(np.linalg.inv(z), 2), rel=1e-10)
        assert j <= np.linalg.norm(z, 2) + 1e-12


# -- decay bounds -------------------------------------------------------------
def _check_bound_on_grid(a, bound):
    for s in np.linspace(0.0, 20.0, 50):
        e = matfun.expm(a, s)
        assert np.linalg.norm(e, 2) <= bound.kappa * np.exp(-bound.rho * s) * (1 + 1e-9)
        # the lower bound is only numerically observable while sigma_min is
        # above the SVD rounding floor relative to sigma_max
        floor = 1e4 * np.finfo(float).eps * bound.kappa * np.exp(-bound.rho * s)
        target = bound.theta * np.exp(-bound.tau * s)
        if target > floor:
            assert matfun.modulus_of_injectivity(e) >= target * (1 - 1e-9)


def test_decay_bounds_normal_cases():
    b = matfun.decay_bounds(-np.eye(2), "normal")
    assert (b.kappa, b.rho, b.theta, b.tau) == (1.0, 1.0, 1.0, 1.0)
    b = matfun.decay_bounds(np.diag([-1.0, -3.0]), "normal")
    assert (b.kappa, b.rho, b.theta, b.tau) == (1.0, 1.0, 1.0, 3.0)
    _check_bound_on_grid(np.diag([-1.0, -3.0]), b)


def test_decay_bounds_diagonalizable_svd_oracle():
    s = np.array([[1.0, 0.0], [2.0, 1.0]])
    a = s @ np.diag([-1.0, -2.0]) @ np.linalg.inv(s)
    b = matfun.decay_bounds(a, "diagonalizable")
    assert b.rho == pytest.approx(1.0, abs=1e-10)
    assert b.tau == pytest.approx(2.0, abs=1e-10)
    # kappa = ||U|| ||U^-1|| for the (unit-column) eigenvector matrix; the
    # SVD oracle recomputes it as largest/smallest singular value of U
    _, u = np.linalg.eig(a)
    sv = np.linalg.svd(u, compute_uv=False)
    assert b.kappa == pytest.approx(sv[0] / sv[-1], rel=1e-10)
    # never worse than the bound built from the raw similarity S here
    sv_s = np.linalg.svd(s, compute_uv=False)
    assert b.kappa <= sv_s[0] / sv_s[-1] + 1e-9
    for s_val in np.linspace(0.0, 10.0, 11):
        assert np.linalg.norm(matfun.expm(a, s_val), 2) <= \
            b.kappa * np.exp(-s_val) * (1 + 1e-12)


def test_decay_bounds_validity_random():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a = random_stable(rng, 3)
        _check_bound_on_grid(a, matfun.decay_bounds(a, "diagonalizable"))


def test_decay_bounds_errors():
    with pytest.raises(StabilityError):
        matfun.decay_bounds(np.diag([1.0, -1.0]), "normal")
    with pytest.raises(ModeMismatchError):
        matfun.decay_bounds(np.array([[-1.0, 1.0], [0.0, -2.0]]), "normal")
    with pytest.raises(ValidationError):
        matfun.decay_bounds(-np.eye(2), "bogus")


def test_decay_bound_invariant_validation():
    with pytest.raises(ValidationError):
        matfun.DecayBound(kappa=0.5, rho=1.0, theta=1.0, tau=1.0)
    with pytest.raises(ValidationError):
        matfun.DecayBound(kappa=1.0, rho=2.0, theta=1.0, tau=1.0)
