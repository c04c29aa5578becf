import numpy as np
import pytest

from supou.basis import CompoundPoisson, GeneratingQuadruple, quadruple_from_gamma0
from supou.jumps import DiscreteJumps, GaussianJumps, RankOneWishartJumps
from supou.mixing import DiscreteMixing, GammaRayMixing, PolarNegDefMixing


def random_stable(rng, d, complex_ok=True):
    """Random stable matrix (diagonalizable within tolerance)."""
    m = rng.standard_normal((d, d))
    shift = max(np.max(np.linalg.eigvals(m).real), 0.0)
    a = m - (shift + rng.uniform(0.3, 2.0)) * np.eye(d)
    if not complex_ok:
        return random_stable_real_spectrum(rng, d)
    return a


def random_stable_real_spectrum(rng, d, spread=(0.3, 3.0)):
    """S diag(-u) S^{-1} with a moderately conditioned similarity."""
    u = rng.uniform(*spread, size=d)
    s = np.eye(d) + 0.4 * rng.standard_normal((d, d))
    while np.linalg.cond(s) > 50:
        s = np.eye(d) + 0.4 * rng.standard_normal((d, d))
    return s @ np.diag(-u) @ np.linalg.inv(s)


def random_spd(rng, d, scale=1.0):
    w = rng.standard_normal((d, d))
    return scale * (w @ w.T + 0.3 * np.eye(d))


def simple_jumps(rng, d, n_atoms=3, scale=1.0):
    atoms = []
    probs = rng.dirichlet(np.ones(n_atoms))
    for p in probs:
        atoms.append((float(p), scale * rng.standard_normal(d)))
    return DiscreteJumps(atoms=atoms)


def ou_quadruple(a=1.0, rate=1.0, gamma=0.2, jump_values=(0.5, 1.5)):
    """d = 1 single-atom mixing (plain OU-type model)."""
    atoms = [(1.0 / len(jump_values), np.array([v])) for v in jump_values]
    nu = CompoundPoisson(rate=rate, jumps=DiscreteJumps(atoms=atoms))
    pi = DiscreteMixing([1.0], [np.array([[-a]])])
    return GeneratingQuadruple(gamma=np.array([gamma]), sigma_gauss=None,
                               nu=nu, pi=pi)


def gamma_ray_quadruple(rng, d=1, alpha=1.5, beta=1.0, rate=1.0, b=None,
                        gamma0_val=None):
    if b is None:
        b = random_stable_real_spectrum(rng, d)
    nu = CompoundPoisson(rate=rate, jumps=simple_jumps(rng, d))
    pi = GammaRayMixing(b, alpha, beta)
    g0 = np.zeros(d) if gamma0_val is None else np.asarray(gamma0_val)
    return quadruple_from_gamma0(g0, None, nu, pi)


def psd_quadruple(rng, d=2, alpha=2.5, rate=1.0, gamma0_scale=0.1,
                  rank_one=True):
    if rank_one:
        jumps = RankOneWishartJumps(GaussianJumps(np.zeros(d), 0.4 * np.eye(d)))
    else:
        mats = []
        probs = rng.dirichlet(np.ones(3))
        for p in probs:
            v = rng.standard_normal(d)
            mats.append((float(p), np.outer(v, v)))
        jumps = DiscreteJumps(atoms=mats)
    nu = CompoundPoisson(rate=rate, jumps=jumps)
    v0 = -random_spd(rng, d)
    pi = PolarNegDefMixing(atoms=[(1.0, v0, alpha, 1.0)])
    return quadruple_from_gamma0(gamma0_scale * np.eye(d), None, nu, pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)
