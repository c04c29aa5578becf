import numpy as np
import pytest
import scipy.integrate
import scipy.stats

from supou.basis import (
    CompoundPoisson,
    GeneratingQuadruple,
    check_existence,
    check_moment,
    check_path_conditions,
    existence_holds,
    gamma0,
    quadruple_from_gamma0,
    sample_poisson_atoms,
)
from supou.errors import UnsupportedModelError, ValidationError
from supou.jumps import DiscreteJumps, GaussianJumps
from supou.mixing import (
    DiagonalGammaMixing,
    DiscreteMixing,
    GammaRayMixing,
    PolarNegDefMixing,
)

from conftest import ou_quadruple


def _cp(rate, atoms):
    return CompoundPoisson(rate=rate, jumps=DiscreteJumps(atoms=atoms))


def _delta_pi(d=1, a=1.0):
    return DiscreteMixing([1.0], [-a * np.eye(d)])


# -- quadruple validation ------------------------------------------------
def test_quadruple_validation():
    nu = _cp(1.0, [(1.0, np.array([1.0, 0.0]))])
    with pytest.raises(ValidationError):
        GeneratingQuadruple(gamma=np.zeros(3), sigma_gauss=None, nu=nu,
                            pi=_delta_pi(2))
    with pytest.raises(ValidationError):
        GeneratingQuadruple(gamma=np.zeros(2), sigma_gauss=np.diag([1.0, -1.0]),
                            nu=nu, pi=_delta_pi(2))
    # Gaussian part only with a discrete mixing law
    with pytest.raises(ValidationError):
        GeneratingQuadruple(gamma=np.zeros(2), sigma_gauss=np.eye(2), nu=nu,
                            pi=GammaRayMixing(-np.eye(2), 2.0, 1.0))
    GeneratingQuadruple(gamma=np.zeros(2), sigma_gauss=np.eye(2), nu=nu,
                        pi=_delta_pi(2))


# -- gamma0 ---------------------------------------------------------------
def test_gamma0_big_jumps_only():
    q = GeneratingQuadruple(gamma=np.zeros(2), sigma_gauss=None,
                            nu=_cp(2.0, [(1.0, np.array([3.0, 4.0]))]),
                            pi=_delta_pi(2))
    assert np.allclose(gamma0(q), 0.0)


def test_gamma0_finite_sum():
    q = GeneratingQuadruple(gamma=np.array([1.0, 0.0]), sigma_gauss=None,
                            nu=_cp(2.0, [(1.0, np.array([0.25, 0.0]))]),
                            pi=_delta_pi(2))
    assert np.allclose(gamma0(q), [0.5, 0.0])


def test_gamma0_gaussian_monte_carlo_oracle():
    law = GaussianJumps(np.zeros(2), 0.01 * np.eye(2))
    q = GeneratingQuadruple(gamma=np.array([1.0, 1.0]), sigma_gauss=None,
                            nu=CompoundPoisson(rate=1.0, jumps=law),
                            pi=_delta_pi(2))
    # symmetric law: truncated mean is exactly zero, so gamma0 = gamma;
    # Monte Carlo oracle for the truncated mean within 4 SE of zero
    rng = np.random.default_rng(321)
    draws = law.sample(rng, 1_000_000)
    small = draws[np.linalg.norm(draws, axis=1) <= 1.0]
    mc = small.sum(axis=0) / len(draws)
    se = draws.std(axis=0) / np.sqrt(len(draws))
    assert np.all(np.abs(mc) <= 4 * se)
    assert np.allclose(gamma0(q), [1.0, 1.0])


def test_quadruple_from_gamma0_round_trip():
    nu = _cp(2.0, [(1.0, np.array([0.25, 0.0]))])
    q = quadruple_from_gamma0(np.array([0.5, 0.0]), None, nu, _delta_pi(2))
    assert np.allclose(gamma0(q), [0.5, 0.0])


# -- existence checker -----------------------------------------------------
def test_existence_gamma_ray_closed_form_value():
    """E_pi[1/rho] for the Gamma radial law has the closed form
    beta / ((alpha - 1) |max Re sigma(B)|); verified against an adaptive
    quadrature oracle (note: kappa = 1 on this normal ray)."""
    nu = _cp(1.0, [(1.0, np.array([0.5]))])
    q = GeneratingQuadruple(gamma=np.zeros(1), sigma_gauss=None, nu=nu,
                            pi=GammaRayMixing(np.array([[-1.0]]), 2.0, 1.0))
    rep = check_existence(q)
    entry = rep.entry("kappa2_over_rho")
    assert entry.status == "holds"
    pdf = scipy.stats.gamma(2.0, scale=1.0).pdf
    oracle = scipy.integrate.quad(lambda r: pdf(r) / r, 0, np.inf)[0]
    assert entry.value == pytest.approx(oracle, rel=1e-8)
    assert entry.value == pytest.approx(1.0, rel=1e-10)  # beta/(alpha-1)


def test_existence_boundary_in_alpha():
    nu = _cp(1.0, [(1.0, np.array([0.5]))])
    for alpha, expect in ((0.9, False), (1.0, False), (1.01, True), (1.5, True)):
        q = GeneratingQuadruple(gamma=np.zeros(1), sigma_gauss=None, nu=nu,
                                pi=GammaRayMixing(np.array([[-1.0]]), alpha, 1.0))
        rep = check_existence(q)
        assert (rep.status("kappa2_over_rho") == "holds") is expect
        assert existence_holds(q, rep) is expect
        if not expect:
            assert "1/rho" in rep.entry("kappa2_over_rho").detail


def test_existence_single_atom_all_hold():
    q = ou_quadruple()
    rep = check_existence(q)
    assert existence_holds(q, rep)
    assert rep.all_hold([e.id for e in rep.entries])


def test_necessary_epsilon_entries():
    q = ou_quadruple(jump_values=(0.5,))  # no jumps beyond norm 1
    rep = check_existence(q)
    # eps = 1: needs jump mass beyond 1; vacuous here
    assert "vacuous" in rep.entry("inv_tau_theta_ge_1").detail
    q2 = ou_quadruple(jump_values=(2.0,))
    rep2 = check_existence(q2)
    assert rep2.entry("inv_tau_theta_ge_1").value == pytest.approx(1.0)


# -- moment checker ----------------------------------------------------------
def test_moment_bounded_jumps_always_hold():
    q = ou_quadruple()
    for r in (0.5, 2.0, 4.0, 7.5):
        assert check_moment(q, r).all_hold()


def test_moment_normal_ray_reduces_to_inv_rho():
    nu = _cp(1.0, [(1.0, np.array([0.5]))])
    q = GeneratingQuadruple(gamma=np.zeros(1), sigma_gauss=None, nu=nu,
                            pi=GammaRayMixing(np.array([[-1.0]]), 2.0, 1.0))
    rep = check_moment(q, 4.0)
    c2 = check_existence(q).entry("kappa2_over_rho")
    assert rep.entry("kappa_pow_over_rho").value == pytest.approx(c2.value, rel=1e-12)


def test_moment_power_tail_split():
    from scipy.special import zeta
    c = 1.0 / zeta(2.5, 1)
    law = DiscreteJumps(family=lambda n: (c * n ** -2.5, np.array([float(n)])),
                        dim=1)
    q = GeneratingQuadruple(gamma=np.zeros(1), sigma_gauss=None,
                            nu=CompoundPoisson(rate=1.0, jumps=law),
                            pi=_delta_pi(1))
    assert check_moment(q, 1.0).all_hold()
    rep2 = check_moment(q, 2.0)
    assert rep2.status("jump_tail_r") == "fails"


# -- path conditions -----------------------------------------------------------
def test_path_conditions_gamma_ray_hold():
    nu = _cp(1.0, [(1.0, np.array([0.5]))])
    for alpha in (1.2, 2.0, 3.5):
        q = GeneratingQuadruple(gamma=np.zeros(1), sigma_gauss=None, nu=nu,
                                pi=GammaRayMixing(np.array([[-1.0]]), alpha, 1.0))
        assert check_path_conditions(q).all_hold()


def test_path_conditions_countable_polar_divergent_first_moment():
    """Existence conditions hold but E_pi[||A||] diverges harmonically, so
    the derivative-process bound fails."""
    def fam(n):
        v = np.diag([-1.0, -1.0 + 1.0 / (3 * n), -0.5])
        return (6.0 / (np.pi ** 2 * n ** 2), v, 2.0, 1.0 / n)

    nu = _cp(1.0, [(1.0, 0.5 * np.eye(3) / np.sqrt(3.0))])
    q = GeneratingQuadruple(gamma=np.zeros((3, 3)), sigma_gauss=None, nu=nu,
                            pi=PolarNegDefMixing(family=fam, dim=3))
    assert existence_holds(q)
    rep = check_path_conditions(q)
    assert rep.status("deriv_bounded") == "fails"
    assert rep.status("paths_bounded") == "holds"


def test_path_conditions_discrete_all_hold():
    q = ou_quadruple()
    assert check_path_conditions(q).all_hold()


def test_path_conditions_need_finite_variation():
    nu = _cp(1.0, [(1.0, np.array([1.0, 0.0]))])
    q = GeneratingQuadruple(gamma=np.zeros(2), sigma_gauss=np.eye(2), nu=nu,
                            pi=_delta_pi(2))
    # discrete mixing with Gaussian part is allowed
    check_path_conditions(q)


def test_diagonal_gamma_path_conditions():
    nu = _cp(1.0, [(1.0, np.array([0.5, 0.5]))])
    q = GeneratingQuadruple(gamma=np.zeros(2), sigma_gauss=None, nu=nu,
                            pi=DiagonalGammaMixing([2.0, 1.5], [1.0, 2.0]))
    rep = check_path_conditions(q)
    assert rep.all_hold()
    rng = np.random.default_rng(9)
    r = rng.gamma([2.0, 1.5], 1 / np.array([1.0, 2.0]), size=(2_000_000, 2))
    mc = np.mean(np.maximum(r.max(axis=1), 1.0) / r.min(axis=1))
    se = np.std(np.maximum(r.max(axis=1), 1.0) / r.min(axis=1)) / np.sqrt(len(r))
    assert abs(rep.entry("deriv_exists").value - mc) <= 4 * se


# -- atom sampler ---------------------------------------------------------------
def test_sampler_zero_rate_empty():
    q = ou_quadruple(rate=0.0)
    atoms = sample_poisson_atoms(q, (0.0, 10.0), seed=1)
    assert len(atoms) == 0


def test_sampler_reproducible_bit_exact():
    q = ou_quadruple(rate=2.0)
    a1 = sample_poisson_atoms(q, (-3.0, 7.0), seed=123456789)
    a2 = sample_poisson_atoms(q, (-3.0, 7.0), seed=123456789)
    assert np.array_equal(a1.times, a2.times)
    assert np.array_equal(a1.jumps, a2.jumps)
    assert np.array_equal(a1.mats, a2.mats)
    a3 = sample_poisson_atoms(q, (-3.0, 7.0), seed=987654321)
    assert not np.array_equal(a1.times, a3.times)


def test_sampler_poisson_count_law():
    q = ou_quadruple(rate=2.0)
    counts = np.array([len(sample_poisson_atoms(q, (0.0, 10.0), seed=s))
                       for s in range(10_000)])
    se = np.sqrt(20.0 / len(counts))
    assert abs(counts.mean() - 20.0) <= 4 * se
    assert np.all(np.diff(sample_poisson_atoms(q, (0.0, 10.0), 5).times) >= 0)


def test_sampler_gamma_radial_ks():
    nu = _cp(1.0, [(1.0, np.array([0.5]))])
    q = GeneratingQuadruple(gamma=np.zeros(1), sigma_gauss=None, nu=nu,
                            pi=GammaRayMixing(np.array([[-1.0]]), 2.0, 1.0))
    atoms = sample_poisson_atoms(q, (0.0, 100_000.0), seed=7)
    rates = -atoms.mats[:, 0, 0]
    stat = scipy.stats.kstest(rates, scipy.stats.gamma(2.0, scale=1.0).cdf).statistic
    assert stat < 1.628 / np.sqrt(len(rates))


def test_sampler_atom_times_uniform():
    q = ou_quadruple(rate=5.0)
    atoms = sample_poisson_atoms(q, (2.0, 12.0), seed=10)
    stat = scipy.stats.kstest(atoms.times,
                              scipy.stats.uniform(2.0, 10.0).cdf).statistic
    assert stat < 1.628 / np.sqrt(len(atoms))
