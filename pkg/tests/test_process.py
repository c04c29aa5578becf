import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings, strategies as st

from supou.basis import (
    CompoundPoisson,
    GeneratingQuadruple,
    PoissonAtoms,
    quadruple_from_gamma0,
)
from supou.errors import PathConditionError, ValidationError
from supou.jumps import DiscreteJumps
from supou.matfun import expm
from supou.mixing import DiscreteMixing, GammaRayMixing, PolarNegDefMixing
from supou.process import (
    SimulationConfig,
    SupOUSpec,
    acov_gamma_ray_closed_form,
    bundle_from_atoms,
    characteristic_function,
    integrated_process,
    paths_from_atoms,
    sample_stationary,
    sde_residual,
    simulate_paths,
    theoretical_acov,
    theoretical_mean,
    theoretical_var,
    truncation_horizon,
)

from conftest import gamma_ray_quadruple, ou_quadruple, random_stable_real_spectrum


def _ou_spec(**kw):
    return SupOUSpec(ou_quadruple(**kw))


# -- spec / config validation -------------------------------------------------
def test_spec_requires_existence():
    nu = CompoundPoisson(rate=1.0, jumps=DiscreteJumps(atoms=[(1.0, np.array([0.5]))]))
    bad = GeneratingQuadruple(gamma=np.zeros(1), sigma_gauss=None, nu=nu,
                              pi=GammaRayMixing(np.array([[-1.0]]), 0.9, 1.0))
    with pytest.raises(ValidationError):
        SupOUSpec(bad)


def test_simulation_config_validation():
    with pytest.raises(ValidationError):
        SimulationConfig(0.0, 0.0, 0.1)
    with pytest.raises(ValidationError):
        SimulationConfig(0.0, 1.0, 0.3)  # dt does not divide the span
    with pytest.raises(ValidationError):
        SimulationConfig(0.0, 1.0, 0.1, trunc_tol=0.5)
    cfg = SimulationConfig(0.0, 1.0, 0.25)
    assert cfg.n_steps == 4
    assert np.allclose(cfg.times, [0.0, 0.25, 0.5, 0.75, 1.0])


# -- theoretical structure ------------------------------------------------------
def test_ou_reduction_second_order_structure():
    """Single-atom mixing must reproduce the classical OU-type formulas."""
    spec = _ou_spec(a=1.3, rate=1.0, gamma=0.2, jump_values=(0.5, 1.5))
    gamma1 = 0.2 + 0.5 * 1.5  # only the jump beyond norm 1 enters
    m = 0.5 * 0.25 + 0.5 * 2.25
    assert theoretical_mean(spec)[0] == pytest.approx(gamma1 / 1.3, abs=1e-10)
    assert theoretical_var(spec)[0, 0] == pytest.approx(m / 2.6, abs=1e-10)
    for h in (0.3, 1.0, 4.0):
        assert theoretical_acov(spec, h)[0, 0] == pytest.approx(
            np.exp(-1.3 * h) * m / 2.6, abs=1e-10)


def test_mean_multivariate_delta_atom():
    nu = CompoundPoisson(rate=1.0, jumps=DiscreteJumps(
        atoms=[(1.0, np.array([2.0, 3.0]))]))
    pi = DiscreteMixing([1.0], [np.diag([-1.0, -2.0])])
    q = GeneratingQuadruple(gamma=np.array([-1.0, -1.0]), sigma_gauss=None,
                            nu=nu, pi=pi)
    # gamma1 = gamma + E[x; |x|>1] = (1, 2); mean = -A^{-1} gamma1 = (1, 1)
    assert np.allclose(theoretical_mean(SupOUSpec(q)), [1.0, 1.0], atol=1e-12)


def test_gamma_ray_closed_form_vs_quadrature():
    rng = np.random.default_rng(42)
    for _ in range(5):
        d = int(rng.integers(1, 4))
        alpha = float(rng.uniform(1.2, 3.0))
        beta = float(rng.uniform(0.5, 2.0))
        b = random_stable_real_spectrum(rng, d)
        q = gamma_ray_quadruple(rng, d=d, alpha=alpha, beta=beta, b=b)
        spec = SupOUSpec(q)
        m = q.second_moment_input()
        for h in (0.0, 0.1, 1.0, 5.0, 10.0):
            quad = theoretical_acov(spec, h)
            closed = acov_gamma_ray_closed_form(b, alpha, beta, m, h)
            rel = np.max(np.abs(quad - closed)) / max(np.max(np.abs(closed)), 1e-12)
            assert rel <= 1e-6, (d, alpha, h, rel)


def test_acov_long_lag_decay():
    # polynomial decay is slow: the desk-scale threshold presumes shapes
    # with alpha >= 2 (at alpha = 1.5 the ratio at h = 1000 is ~ 3e-2)
    rng = np.random.default_rng(11)
    q = gamma_ray_quadruple(rng, d=2, alpha=2.2)
    spec = SupOUSpec(q)
    var = theoretical_var(spec)
    far = theoretical_acov(spec, 1000.0)
    assert np.linalg.norm(far) < 1e-2 * np.linalg.norm(var)


def test_diagonal_gamma_acov_is_diagonal_for_diagonal_input():
    from supou.mixing import DiagonalGammaMixing
    nu = CompoundPoisson(rate=1.0, jumps=DiscreteJumps(
        atoms=[(0.5, np.array([1.0, 0.0])), (0.5, np.array([-1.0, 0.0]))]))
    nu2 = CompoundPoisson(rate=1.0, jumps=DiscreteJumps(
        atoms=[(0.25, np.array([1.0, 1.0])), (0.25, np.array([-1.0, -1.0])),
               (0.25, np.array([1.0, -1.0])), (0.25, np.array([-1.0, 1.0]))]))
    # jump second moment of nu2 is the identity (diagonal)
    pi = DiagonalGammaMixing([2.0, 2.5], [1.0, 1.5])
    q = GeneratingQuadruple(gamma=np.zeros(2), sigma_gauss=None, nu=nu2, pi=pi)
    acov = theoretical_acov(SupOUSpec(q), 0.7)
    off = abs(acov[0, 1]) + abs(acov[1, 0])
    assert off <= 1e-8 * np.max(np.abs(acov))


# -- simulation ------------------------------------------------------------------
def test_zero_activity_paths_are_zero():
    q = quadruple_from_gamma0(np.zeros(1), None,
                              CompoundPoisson(rate=0.0, jumps=DiscreteJumps(
                                  atoms=[(1.0, np.array([1.0]))])),
                              DiscreteMixing([1.0], [np.array([[-1.0]])]))
    bundle = simulate_paths(SupOUSpec(q), SimulationConfig(0.0, 2.0, 0.1, seed=3))
    assert np.all(bundle.x == 0.0)
    assert np.all(bundle.l == 0.0)


def test_forced_single_atom_kernel():
    a = np.array([[-1.0, 0.5], [0.0, -2.0]])
    x0 = np.array([1.0, -2.0])
    atoms = PoissonAtoms(times=np.array([0.0]), jumps=np.array([x0]),
                         mats=np.array([a]))
    times = np.linspace(0.0, 3.0, 31)
    got = paths_from_atoms(atoms, times)
    expect = np.stack([expm(a, t) @ x0 for t in times])
    assert np.max(np.abs(got - expect)) <= 1e-13


def test_atom_on_grid_point_counts_cadlag():
    atoms = PoissonAtoms(times=np.array([1.0]), jumps=np.array([[1.0]]),
                         mats=np.array([[[-1.0]]]))
    got = paths_from_atoms(atoms, np.array([0.5, 1.0, 1.5]))
    assert got[0, 0] == 0.0
    assert got[1, 0] == pytest.approx(1.0)


def test_simulation_reproducible_and_seed_sensitive():
    spec = _ou_spec(rate=2.0)
    cfg = SimulationConfig(0.0, 5.0, 0.1, n_paths=2, seed=77)
    b1 = simulate_paths(spec, cfg)
    b2 = simulate_paths(spec, cfg)
    assert np.array_equal(b1.x, b2.x) and np.array_equal(b1.l, b2.l)
    b3 = simulate_paths(spec, SimulationConfig(0.0, 5.0, 0.1, n_paths=2, seed=78))
    assert not np.array_equal(b1.x, b3.x)


def test_stationary_mean_and_var_monte_carlo():
    spec = _ou_spec(a=1.0, rate=1.0, gamma=0.2)
    draws = sample_stationary(spec, 10_000, seed=5)[:, 0]
    mean_t = theoretical_mean(spec)[0]
    var_t = theoretical_var(spec)[0, 0]
    se_mean = draws.std() / np.sqrt(len(draws))
    assert abs(draws.mean() - mean_t) <= 4 * se_mean
    centered = (draws - draws.mean()) ** 2
    se_var = centered.std() / np.sqrt(len(draws))
    assert abs(centered.mean() - var_t) <= 4 * se_var


def test_stationarity_between_path_halves():
    """Batch-mean comparison of the two halves of long paths (10 seeds)."""
    rng = np.random.default_rng(0)
    q = gamma_ray_quadruple(rng, d=1, alpha=2.5, b=np.array([[-1.0]]))
    spec = SupOUSpec(q)
    diffs, scales = [], []
    for seed in range(10):
        cfg = SimulationConfig(0.0, 2000.0, 0.5, trunc_tol=1e-2,
                               n_paths=1, seed=seed)
        x = simulate_paths(spec, cfg).x[0, :, 0]
        half = len(x) // 2
        batches1 = np.array_split(x[:half], 20)
        batches2 = np.array_split(x[half:], 20)
        m1 = np.array([b.mean() for b in batches1])
        m2 = np.array([b.mean() for b in batches2])
        se = np.sqrt(m1.var(ddof=1) / 20 + m2.var(ddof=1) / 20)
        diffs.append(abs(m1.mean() - m2.mean()))
        scales.append(se)
    # 4-SE criterion per seed, allowing one outlier in ten
    ok = sum(d <= 4 * s for d, s in zip(diffs, scales))
    assert ok >= 9


def test_truncation_horizon_monotone_and_capped():
    rng = np.random.default_rng(1)
    q = gamma_ray_quadruple(rng, d=1, alpha=2.5, b=np.array([[-1.0]]))
    t_loose = truncation_horizon(q, 1e-2)
    t_tight = truncation_horizon(q, 1e-3)
    assert t_tight > t_loose > 0
    from supou.errors import TruncationError
    q_slow = gamma_ray_quadruple(rng, d=1, alpha=1.5, b=np.array([[-1.0]]))
    with pytest.raises(TruncationError):
        truncation_horizon(q_slow, 1e-4)


def test_gaussian_part_stationary_distribution():
    """Discrete mixing with a Gaussian basis part: exact OU recursion must
    reproduce the stationary variance Sigma/(2a) + M/(2a)."""
    nu = CompoundPoisson(rate=1.0, jumps=DiscreteJumps(
        atoms=[(1.0, np.array([1.0]))]))
    q = GeneratingQuadruple(gamma=np.array([0.0]), sigma_gauss=np.array([[0.5]]),
                            nu=nu, pi=DiscreteMixing([1.0], [np.array([[-1.0]])]))
    spec = SupOUSpec(q)
    var_t = theoretical_var(spec)[0, 0]
    assert var_t == pytest.approx((0.5 + 1.0) / 2.0, abs=1e-12)
    cfg = SimulationConfig(0.0, 30.0, 0.05, trunc_tol=1e-4, n_paths=400, seed=2)
    xs = simulate_paths(spec, cfg).x[:, 200:, 0].ravel()
    se = xs.var() * np.sqrt(2.0 / 400)  # crude SE over independent paths
    assert abs(xs.var() - var_t) <= 4 * se


# -- characteristic function ------------------------------------------------------
def test_cf_at_zero_is_one():
    spec = _ou_spec()
    assert characteristic_function(spec, np.zeros(1)) == 1.0 + 0.0j


def test_cf_delta_atom_matches_direct_quadrature():
    """pi = delta_{-1}, jumps at x0: log CF = rate * int (e^{i u x0 e^{-s}} - 1) ds."""
    x0, rate, u = 1.3, 0.8, 0.9
    nu = CompoundPoisson(rate=rate, jumps=DiscreteJumps(atoms=[(1.0, np.array([x0]))]))
    q = quadruple_from_gamma0(np.zeros(1), None, nu,
                              DiscreteMixing([1.0], [np.array([[-1.0]])]))
    got = characteristic_function(SupOUSpec(q), np.array([u]))
    re = scipy.integrate.quad(lambda s: np.cos(u * x0 * np.exp(-s)) - 1.0,
                              0, 60, limit=200)[0]
    im = scipy.integrate.quad(lambda s: np.sin(u * x0 * np.exp(-s)),
                              0, 60, limit=200)[0]
    expect = np.exp(rate * complex(re, im))
    assert got == pytest.approx(expect, rel=1e-7)


def test_cf_gamma_ray_vs_empirical():
    rng = np.random.default_rng(2)
    q = gamma_ray_quadruple(rng, d=1, alpha=2.5, b=np.array([[-1.0]]))
    spec = SupOUSpec(q)
    draws = sample_stationary(spec, 40_000, seed=3)[:, 0]
    for u in (0.4, 1.1):
        got = characteristic_function(spec, np.array([u]))
        phases = np.exp(1j * u * draws)
        emp = phases.mean()
        se = np.sqrt((np.var(phases.real) + np.var(phases.imag)) / len(draws))
        assert abs(got - emp) <= 4 * se


@settings(max_examples=10, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_cf_modulus_and_conjugation(u1, u2):
    nu = CompoundPoisson(rate=1.0, jumps=DiscreteJumps(
        atoms=[(0.5, np.array([0.5, -0.2])), (0.5, np.array([-1.0, 1.4]))]))
    q = GeneratingQuadruple(gamma=np.array([0.1, -0.3]), sigma_gauss=None,
                            nu=nu, pi=DiscreteMixing([1.0], [-np.eye(2)]))
    spec = SupOUSpec(q)
    u = np.array([u1, u2])
    val = characteristic_function(spec, u)
    assert abs(val) <= 1.0 + 1e-10
    assert characteristic_function(spec, -u) == pytest.approx(val.conjugate(),
                                                              abs=1e-9)


def test_cf_gradient_matches_mean():
    spec = _ou_spec(a=1.0, rate=1.0, gamma=0.2)
    h = 1e-3
    lp = np.log(characteristic_function(spec, np.array([h])))
    lm = np.log(characteristic_function(spec, np.array([-h])))
    grad = (lp - lm) / (2 * h)
    assert abs(grad.imag - theoretical_mean(spec)[0]) <= 1e-4


# -- integrated process ----------------------------------------------------------
def test_integrated_zero_bundle():
    q = quadruple_from_gamma0(np.zeros(1), None,
                              CompoundPoisson(rate=0.0, jumps=DiscreteJumps(
                                  atoms=[(1.0, np.array([1.0]))])),
                              DiscreteMixing([1.0], [np.array([[-1.0]])]))
    spec = SupOUSpec(q)
    bundle = simulate_paths(spec, SimulationConfig(0.0, 2.0, 0.1, seed=3))
    out = integrated_process(bundle, spec)
    assert np.all(out.closed_form == 0.0)


def test_integrated_single_atom_closed_form():
    a = np.array([[-1.0, 0.3], [0.0, -2.0]])
    x0 = np.array([1.0, 1.0])
    spec = SupOUSpec(GeneratingQuadruple(
        gamma=np.zeros(2), sigma_gauss=None,
        nu=CompoundPoisson(rate=1.0, jumps=DiscreteJumps(atoms=[(1.0, x0)])),
        pi=DiscreteMixing([1.0], [a])))
    atoms = PoissonAtoms(times=np.array([0.0]), jumps=np.array([x0]),
                         mats=np.array([a]))
    cfg = SimulationConfig(0.0, 2.0, 0.25, seed=0)
    bundle = bundle_from_atoms(spec, cfg, [atoms])
    out = integrated_process(bundle, spec)
    ainv = np.linalg.inv(a)
    for k, t in enumerate(cfg.times):
        expect = ainv @ (expm(a, t) - np.eye(2)) @ x0
        assert np.max(np.abs(out.closed_form[0, k] - expect)) <= 1e-12


def _smooth_window_bundle(spec, dt, seed=4, n_atoms=25):
    """Atoms strictly before the grid window: the paths are smooth on it."""
    rng = np.random.default_rng(seed)
    q = spec.quadruple
    s = rng.uniform(-6.0, -0.2, n_atoms)
    jumps = q.nu.jumps.sample(rng, n_atoms)
    mats = q.pi.sample(rng, n_atoms)
    atoms = PoissonAtoms(times=np.sort(s), jumps=jumps, mats=mats)
    cfg = SimulationConfig(0.0, 1.0, dt, seed=0)
    return bundle_from_atoms(spec, cfg, [atoms], trunc_horizon=8.0), cfg


def test_integrated_trapezoid_second_order_convergence():
    rng = np.random.default_rng(9)
    q = gamma_ray_quadruple(rng, d=2, alpha=2.0, gamma0_val=[0.3, 0.1])
    spec = SupOUSpec(q)
    errs = []
    for dt in (0.02, 0.01):
        bundle, _ = _smooth_window_bundle(spec, dt)
        out = integrated_process(bundle, spec)
        errs.append(np.max(np.abs(out.closed_form - out.trapezoid)))
    assert errs[0] / errs[1] >= 3.5


# -- SDE-form residuals ------------------------------------------------------------
def test_sde_residual_analytic_machine_precision():
    rng = np.random.default_rng(31)
    for k in range(10):
        d = int(rng.integers(1, 4))
        q = gamma_ray_quadruple(rng, d=d, alpha=float(rng.uniform(1.8, 3.0)),
                                gamma0_val=rng.uniform(-0.5, 0.5, d))
        spec = SupOUSpec(q)
        cfg = SimulationConfig(0.0, 2.0, 0.05, trunc_tol=1e-2,
                               n_paths=1, seed=100 + k)
        bundle = simulate_paths(spec, cfg)
        scale = max(1.0, np.max(np.abs(bundle.x)))
        assert sde_residual(bundle, spec)[0] <= 1e-12 * scale


def test_sde_residual_trapezoid_convergence():
    rng = np.random.default_rng(13)
    q = gamma_ray_quadruple(rng, d=2, alpha=2.2, gamma0_val=[0.2, -0.1])
    spec = SupOUSpec(q)
    errs = []
    for dt in (0.02, 0.01):
        bundle, _ = _smooth_window_bundle(spec, dt, seed=8)
        errs.append(sde_residual(bundle, spec, z_integration="trapezoid")[0])
    assert errs[0] / errs[1] >= 3.5


def test_sde_residual_refuses_divergent_first_moment():
    def fam(n):
        v = np.diag([-1.0, -1.0 + 1.0 / (3 * n), -0.5])
        return (6.0 / (np.pi ** 2 * n ** 2), v, 2.0, 1.0 / n)

    nu = CompoundPoisson(rate=1.0, jumps=DiscreteJumps(
        atoms=[(1.0, 0.4 * np.eye(3) / np.sqrt(3))]))
    q = quadruple_from_gamma0(np.zeros((3, 3)), None, nu,
                              PolarNegDefMixing(family=fam, dim=3))
    from supou.psd import PSDSupOUSpec, psd_sde_residual, simulate_psd_paths
    spec = PSDSupOUSpec(q)
    bundle = simulate_psd_paths(spec, SimulationConfig(0.0, 1.0, 0.1,
                                                       trunc_tol=1e-2, seed=1))
    with pytest.raises(PathConditionError):
        psd_sde_residual(bundle, spec)
