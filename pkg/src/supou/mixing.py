"""Mixing measures: probability laws of the mean-reversion matrix.

Supported families:

* discrete atoms on stable matrices,
* a Gamma-radial law along one diagonalizable stable ray (and the finite
  mixture of several rays),
* independent per-coordinate Gamma rates on negative diagonal matrices,
* polar laws on symmetric negative definite directions with Gamma radial
  parts (finite or countable direction sets),
* eigenvector-factorized laws S D S^{-1} with discrete factors.

Every family exposes a sampler, exact-or-quadrature expectations E[g(A)],
and the decay-bound integrals that the existence / moment / path checkers
need, with closed forms in the Gamma radial variable wherever they exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np
import scipy.integrate
import scipy.special
import scipy.stats

from ._series import CONVERGED, DIVERGED, INCONCLUSIVE, sum_series
from .errors import QuadratureError, StabilityError, ValidationError
from .matfun import DecayBound, best_decay_bounds, spectral_abscissa

_NODE_START = 32
_NODE_MAX = 4096
# Expectations fall back to adaptive quadrature beyond this node count;
# integrands with integrable 1/r singularities defeat Gauss-Laguerre.
_NODE_FALLBACK = 512

FINITE = "finite"
DIVERGENT = "divergent"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class IntegralValue:
    """Value of a checker integral together with a finiteness verdict."""

    value: float
    status: str
    detail: str = ""

    @property
    def finite(self) -> bool:
        return self.status == FINITE


@dataclass(frozen=True)
class AtomComponent:
    """Point mass at a fixed stable matrix."""

    weight: float
    a: np.ndarray
    bound: DecayBound
    norm: float


@dataclass(frozen=True)
class RayComponent:
    """Gamma(alpha, beta) radial law along the stable direction b."""

    weight: float
    b: np.ndarray
    alpha: float
    beta: float
    bound: DecayBound  # bounds of b itself; kappa/theta are constant on the ray
    norm: float

    # Radial moments of R ~ Gamma(alpha, beta); A = R b.
    def e_inv_r(self) -> float:
        if self.alpha <= 1.0:
            return float("inf")
        return self.beta / (self.alpha - 1.0)

    def e_r(self) -> float:
        return self.alpha / self.beta

    def e_exp(self, c) -> complex:
        """E[e^{-c R}] for Re(c) >= 0 (principal power)."""
        return (self.beta / (self.beta + c)) ** self.alpha

    def e_exp_over_r(self, c) -> complex:
        """E[e^{-c R} / R] for Re(c) >= 0, alpha > 1."""
        if self.alpha <= 1.0:
            return float("inf")
        return (self.beta / (self.alpha - 1.0)) * (self.beta / (self.beta + c)) ** (self.alpha - 1.0)

    def e_norm_or_one_over_r(self) -> float:
        """E[(R ||b|| v 1) / R]; diverges iff alpha <= 1."""
        if self.alpha <= 1.0:
            return float("inf")
        cut = 1.0 / self.norm
        low = scipy.special.gammainc(self.alpha, self.beta * cut)  # P(R <= cut)
        low_am1 = scipy.special.gammainc(self.alpha - 1.0, self.beta * cut)
        return self.norm * (1.0 - low) + self.beta / (self.alpha - 1.0) * low_am1


Component = AtomComponent | RayComponent


def _component_value(comp: Component, name: str, p: float, eps: float | None) -> float:
    """Per-component value of a checker integral (weight not applied)."""
    k = comp.bound.kappa
    th = comp.bound.theta
    if isinstance(comp, AtomComponent):
        rho, tau, nrm = comp.bound.rho, comp.bound.tau, comp.norm
        if name == "kappa_pow_over_rho":
            return k ** p / rho
        if name == "kappa_pow":
            return k ** p
        if name == "norm_kappa_pow":
            return nrm * k ** p
        if name == "norm_or1_kappa_pow_over_rho":
            return max(nrm, 1.0) * k ** p / rho
        if name == "theta_pow_over_tau":
            return th ** p / tau
        if name == "inv_tau_theta_ge":
            return (1.0 / tau) if th >= eps else 0.0
        raise ValidationError(f"unknown checker integral {name!r}")
    rho_b, tau_b = comp.bound.rho, comp.bound.tau
    if name == "kappa_pow_over_rho":
        return k ** p * comp.e_inv_r() / rho_b
    if name == "kappa_pow":
        return k ** p
    if name == "norm_kappa_pow":
        return k ** p * comp.norm * comp.e_r()
    if name == "norm_or1_kappa_pow_over_rho":
        return k ** p * comp.e_norm_or_one_over_r() / rho_b
    if name == "theta_pow_over_tau":
        return th ** p * comp.e_inv_r() / tau_b
    if name == "inv_tau_theta_ge":
        return (comp.e_inv_r() / tau_b) if th >= eps else 0.0
    raise ValidationError(f"unknown checker integral {name!r}")


def _truncation_component(comp: Component, horizon: float, kappa_pow: float,
                          rate_scale: float) -> float:
    """E over the component of kappa^p e^{-c rho T} / (c rho), c = rate_scale."""
    k = comp.bound.kappa
    c = rate_scale
    if isinstance(comp, AtomComponent):
        rho = comp.bound.rho
        return k ** kappa_pow * math.exp(-c * rho * horizon) / (c * rho)
    rho_b = comp.bound.rho
    val = comp.e_exp_over_r(c * rho_b * horizon)
    if not np.isfinite(np.real(val)):
        return float("inf")
    return k ** kappa_pow * float(np.real(val)) / (c * rho_b)


def _genlaguerre_nodes(n: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes r_i and weights w_i with sum_i w_i g(r_i) ~ E[g(R)], R ~ Gamma(alpha, beta).

    Far-tail nodes whose weights underflow (or overflow during the root
    computation at large n) carry no mass and are dropped.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        t, w = scipy.special.roots_genlaguerre(n, alpha - 1.0)
    keep = np.isfinite(t) & np.isfinite(w) & (w > 0.0)
    return t[keep] / beta, w[keep] / scipy.special.gamma(alpha)


class MixingMeasure:
    """Base class; see concrete families below."""

    kind: str
    dim: int
    countable: bool = False

    @property
    def is_discrete_atoms(self) -> bool:
        return False

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def components(self) -> Iterator[Component]:
        raise NotImplementedError

    # ------------------------------------------------------------------
    def checker_integral(self, name: str, p: float = 1.0,
                         eps: float | None = None) -> IntegralValue:
        """E_pi of one of the named decay-bound integrands."""
        return self._sum_components(lambda comp: _component_value(comp, name, p, eps))

    def truncation_decay(self, horizon: float, kappa_pow: float = 1.0,
                         rate_scale: float = 1.0) -> float:
        iv = self._sum_components(
            lambda comp: _truncation_component(comp, horizon, kappa_pow, rate_scale))
        return iv.value if iv.finite else float("inf")

    def theta_mass_at_least(self, eps: float) -> float:
        """pi({theta(A) >= eps})."""
        iv = self._sum_components(
            lambda comp: 1.0 if comp.bound.theta >= eps else 0.0)
        return iv.value if iv.finite else 1.0

    def _sum_components(self, f: Callable[[Component], float]) -> IntegralValue:
        if not self.countable:
            total = 0.0
            for comp in self.components():
                term = comp.weight * f(comp)
                if not np.isfinite(term):
                    return IntegralValue(float("inf"), DIVERGENT,
                                         "a component integral diverges")
                total += term
            return IntegralValue(total, FINITE, "exact finite sum over components")
        comps = self.components()
        cache: list[Component] = []

        def term(n: int) -> float:
            while len(cache) < n:
                cache.append(next(comps))
            c = cache[n - 1]
            v = c.weight * f(c)
            if not np.isfinite(v):
                raise _DivergentTerm()
            return v

        try:
            s = sum_series(term, tol=1e-9)
        except _DivergentTerm:
            return IntegralValue(float("inf"), DIVERGENT, "a component integral diverges")
        status = {CONVERGED: FINITE, DIVERGED: DIVERGENT, INCONCLUSIVE: UNDECIDED}[s.status]
        detail = f"block summation over {s.n_terms} components ({s.status})"
        return IntegralValue(s.value, status, detail)

    # ------------------------------------------------------------------
    def expectation(self, g: Callable[[np.ndarray], np.ndarray], tol: float = 1e-9):
        """E_pi[g(A)] by exact sums (discrete parts) and radial quadrature."""
        return self.expectation_sequence(g, tol)

    def quadrature_nodes(self, g: Callable[[np.ndarray], np.ndarray],
                         tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
        """Finite node representation (weights, matrices) converged on g."""
        _, w, mats = self._expect_nodes(g, tol)
        return w, mats

    def expectation_sequence(self, g, tol: float = 1e-9):
        """E_pi[g(A)] allowing an adaptive-quadrature fallback per ray."""
        if self.countable:
            comps = self.components()
            partial = [None]

            def term(n: int) -> float:
                comp = next(comps)
                val = _component_expect(comp, g, tol)
                partial[0] = val if partial[0] is None else partial[0] + val
                return float(np.linalg.norm(np.atleast_1d(val)))

            s = sum_series(term, tol=tol)
            if s.status == DIVERGED:
                raise QuadratureError("component series for E_pi[g] diverges")
            return _maybe_real(partial[0])
        total = None
        for comp in self.components():
            val = _component_expect(comp, g, tol)
            total = val if total is None else total + val
        return _maybe_real(total)

    def _expect_nodes(self, g, tol):
        weights: list[float] = []
        mats: list[np.ndarray] = []
        total = None
        if self.countable:
            # Block summation over components; each ray integrated at its
            # converged node count.
            comps = self.components()
            partial = [None]
            sizes = []

            def term(n: int) -> float:
                comp = next(comps)
                val, w, m = _component_nodes(comp, g, tol)
                weights.extend(w)
                mats.extend(m)
                partial[0] = val if partial[0] is None else partial[0] + val
                sizes.append(float(np.linalg.norm(np.atleast_1d(val))))
                return sizes[-1]

            s = sum_series(term, tol=tol)
            if s.status == DIVERGED:
                raise QuadratureError("component series for E_pi[g] diverges")
            return partial[0], np.array(weights), np.array(mats)
        for comp in self.components():
            val, w, m = _component_nodes(comp, g, tol)
            weights.extend(w)
            mats.extend(m)
            total = val if total is None else total + val
        return total, np.array(weights), np.array(mats)


class _DivergentTerm(Exception):
    pass


def _ray_gl_expect(comp: RayComponent, g, tol, n_max: int):
    """Gauss-Laguerre node-doubling for one ray; None when not converged."""
    prev = None
    n = _NODE_START
    while n <= n_max:
        with np.errstate(over="ignore"):
            r, w = _genlaguerre_nodes(n, comp.alpha, comp.beta)
        vals = [np.asarray(g(ri * comp.b), dtype=complex) for ri in r]
        cur = sum(wi * v for wi, v in zip(w, vals))
        if prev is not None:
            diff = np.linalg.norm(np.atleast_1d(cur - prev))
            scale = max(np.linalg.norm(np.atleast_1d(cur)), 1e-300)
            if diff <= tol * scale:
                return cur, r, w
        prev = cur
        n *= 2
    return None


def _component_expect(comp: Component, g, tol):
    """weight * E[g] over one component, with adaptive fallback for rays."""
    if isinstance(comp, AtomComponent):
        return _maybe_real(comp.weight * np.asarray(g(comp.a), dtype=complex))
    hit = _ray_gl_expect(comp, g, tol, _NODE_FALLBACK)
    if hit is not None:
        return _maybe_real(comp.weight * hit[0])
    dens = scipy.stats.gamma(comp.alpha, scale=1.0 / comp.beta)
    shape = np.asarray(g(comp.b), dtype=complex).shape

    def integrand(r):
        p = dens.pdf(r)
        if r <= 0.0 or p == 0.0 or not np.isfinite(p):
            return np.zeros(shape, dtype=complex)
        return np.asarray(g(r * comp.b), dtype=complex) * p

    res = scipy.integrate.quad_vec(integrand, 0.0, np.inf,
                                   epsabs=1e-13, epsrel=tol)[0]
    return _maybe_real(comp.weight * res)


def _component_nodes(comp: Component, g, tol):
    """(weight * E[g] over the component, node weights, node matrices).

    Used to freeze a finite node representation (e.g. of the drift), so
    only the Gauss-Laguerre route applies here.
    """
    if isinstance(comp, AtomComponent):
        val = comp.weight * np.asarray(g(comp.a), dtype=complex)
        return _maybe_real(val), [comp.weight], [comp.a]
    hit = _ray_gl_expect(comp, g, tol, _NODE_MAX)
    if hit is None:
        raise QuadratureError(
            f"radial quadrature did not converge with {_NODE_MAX} nodes (tol {tol:g})")
    cur, r, w = hit
    nodes = [ri * comp.b for ri in r]
    return _maybe_real(comp.weight * cur), list(comp.weight * w), nodes


def _maybe_real(x):
    x = np.asarray(x)
    if np.iscomplexobj(x) and np.max(np.abs(x.imag)) <= 1e-12 * max(np.max(np.abs(x)), 1e-300):
        return np.real(x)
    return x


def pi_expectation(pi: MixingMeasure, g, tol: float = 1e-9):
    """E_pi[g(A)]: exact weighted sums for discrete families, Gamma-weighted
    Gauss-Laguerre quadrature with node doubling for radial families."""
    return pi.expectation(g, tol=tol)


# ----------------------------------------------------------------------
class DiscreteMixing(MixingMeasure):
    """pi = sum_i w_i delta_{A_i} on stable (diagonalizable) matrices."""

    kind = "discrete"

    def __init__(self, weights, mats):
        weights = np.asarray(weights, dtype=float)
        mats = np.asarray(mats, dtype=float)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValidationError("mats must be a (k, d, d) array")
        if weights.shape != (mats.shape[0],):
            raise ValidationError("weights and mats must have matching lengths")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValidationError("weights must be nonnegative and sum to 1")
        self.dim = mats.shape[1]
        self.weights = weights
        self.mats = mats
        self._bounds = []
        for a in mats:
            if spectral_abscissa(a) >= 0:
                raise StabilityError("every atom must have spectral abscissa < 0")
            self._bounds.append(best_decay_bounds(a))

    @property
    def is_discrete_atoms(self) -> bool:
        return True

    def sample(self, rng, n):
        idx = rng.choice(len(self.weights), size=n, p=self.weights)
        return self.mats[idx]

    def components(self):
        for w, a, b in zip(self.weights, self.mats, self._bounds):
            yield AtomComponent(float(w), a, b, float(np.linalg.norm(a, 2)))


class GammaRayMixing(MixingMeasure):
    """A = R B with R ~ Gamma(alpha, beta) along one diagonalizable stable ray."""

    kind = "gamma_ray"

    def __init__(self, b, alpha: float, beta: float):
        b = np.asarray(b, dtype=float)
        alpha = float(alpha)
        beta = float(beta)
        if alpha <= 0 or beta <= 0:
            raise ValidationError("alpha and beta must be positive")
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValidationError("B must be square")
        if spectral_abscissa(b) >= 0:
            raise StabilityError("B must have spectral abscissa < 0")
        self.dim = b.shape[0]
        self.b = b
        self.alpha = alpha
        self.beta = beta
        self._bound = best_decay_bounds(b)  # raises if not diagonalizable

    def sample(self, rng, n):
        r = rng.gamma(shape=self.alpha, scale=1.0 / self.beta, size=n)
        return r[:, None, None] * self.b

    def components(self):
        yield RayComponent(1.0, self.b, self.alpha, self.beta, self._bound,
                           float(np.linalg.norm(self.b, 2)))


class MultiGammaRayMixing(MixingMeasure):
    """Finite mixture of Gamma rays."""

    kind = "multi_gamma_ray"

    def __init__(self, rays: Sequence[tuple[float, np.ndarray, float, float]]):
        if not rays:
            raise ValidationError("at least one ray is required")
        self._rays = []
        wsum = 0.0
        dim = None
        for w, b, alpha, beta in rays:
            ray = GammaRayMixing(b, alpha, beta)
            if dim is None:
                dim = ray.dim
            elif ray.dim != dim:
                raise ValidationError("rays must share one dimension")
            w = float(w)
            if w < 0:
                raise ValidationError("ray weights must be nonnegative")
            wsum += w
            self._rays.append((w, ray))
        if abs(wsum - 1.0) > 1e-12:
            raise ValidationError("ray weights must sum to 1")
        self.dim = dim

    def sample(self, rng, n):
        w = np.array([x[0] for x in self._rays])
        idx = rng.choice(len(w), size=n, p=w)
        out = np.empty((n, self.dim, self.dim))
        for i, (_, ray) in enumerate(self._rays):
            sel = idx == i
            if sel.any():
                out[sel] = ray.sample(rng, int(sel.sum()))
        return out

    def components(self):
        for w, ray in self._rays:
            yield RayComponent(w, ray.b, ray.alpha, ray.beta, ray._bound,
                               float(np.linalg.norm(ray.b, 2)))


class PolarNegDefMixing(MixingMeasure):
    """Polar law on symmetric negative definite directions.

    Directions are normalized to unit Frobenius norm (rescaling beta keeps
    the law of R v invariant).  `atoms` gives a finite direction set;
    `family` a countable one via n -> (w_n, v_n, alpha_n, beta_n).
    """

    kind = "polar"

    def __init__(self, atoms=None, family: Callable[[int], tuple] | None = None,
                 dim: int | None = None):
        if (atoms is None) == (family is None):
            raise ValidationError("provide exactly one of atoms or family")
        if atoms is not None:
            comps = [self._make_component(*a) for a in atoms]
            wsum = sum(c.weight for c in comps)
            if abs(wsum - 1.0) > 1e-12:
                raise ValidationError("direction weights must sum to 1")
            self._atoms = comps
            self._family = None
            self.dim = comps[0].b.shape[0]
            self.countable = False
        else:
            if dim is None:
                raise ValidationError("dim is required for a countable family")
            self._atoms = None
            self._family = family
            self.dim = int(dim)
            self.countable = True
            self._fam_cache: list[RayComponent] = []
            self._make_family_component(1)  # eager validation of the first term

    @staticmethod
    def _make_component(w, v, alpha, beta) -> RayComponent:
        v = np.asarray(v, dtype=float)
        if np.linalg.norm(v - v.T) > 1e-10 * max(1.0, np.linalg.norm(v)):
            raise ValidationError("directions must be symmetric")
        if np.max(np.linalg.eigvalsh(v)) >= 0:
            raise ValidationError("directions must be negative definite")
        alpha = float(alpha)
        beta = float(beta)
        if alpha <= 0 or beta <= 0:
            raise ValidationError("alpha and beta must be positive")
        nrm = float(np.linalg.norm(v))
        v = v / nrm
        beta = beta / nrm
        return RayComponent(float(w), v, alpha, beta, best_decay_bounds(v),
                            float(np.linalg.norm(v, 2)))

    def _make_family_component(self, n: int) -> RayComponent:
        while len(self._fam_cache) < n:
            k = len(self._fam_cache) + 1
            self._fam_cache.append(self._make_component(*self._family(k)))
        return self._fam_cache[n - 1]

    def components(self):
        if not self.countable:
            yield from self._atoms
            return
        n = 1
        while True:
            yield self._make_family_component(n)
            n += 1

    def sample(self, rng, n):
        u = rng.uniform(size=n)
        if not self.countable:
            w = np.array([c.weight for c in self._atoms])
            idx = np.searchsorted(np.cumsum(w), u, side="left")
            idx = np.minimum(idx, len(w) - 1)
            comps = [self._atoms[i] for i in idx]
        else:
            umax = float(u.max()) if n else 0.0
            cum = []
            tot = 0.0
            k = 1
            while tot < umax and k < (1 << 22):
                tot += self._make_family_component(k).weight
                cum.append(tot)
                k += 1
            idx = np.searchsorted(np.array(cum), u, side="left")
            comps = [self._make_family_component(int(i) + 1) for i in idx]
        out = np.empty((n, self.dim, self.dim))
        for i, comp in enumerate(comps):
            r = rng.gamma(shape=comp.alpha, scale=1.0 / comp.beta)
            out[i] = r * comp.b
        return out


class DiagonalGammaMixing(MixingMeasure):
    """A = -diag(R_1..R_d) with independent R_i ~ Gamma(alpha_i, beta_i)."""

    kind = "diagonal_gamma"

    def __init__(self, alphas, betas):
        alphas = np.asarray(alphas, dtype=float)
        betas = np.asarray(betas, dtype=float)
        if alphas.ndim != 1 or alphas.shape != betas.shape:
            raise ValidationError("alphas and betas must be equal-length vectors")
        if np.any(alphas <= 0) or np.any(betas <= 0):
            raise ValidationError("alphas and betas must be positive")
        self.dim = alphas.shape[0]
        self.alphas = alphas
        self.betas = betas

    def sample(self, rng, n):
        r = rng.gamma(shape=self.alphas, scale=1.0 / self.betas, size=(n, self.dim))
        out = np.zeros((n, self.dim, self.dim))
        idx = np.arange(self.dim)
        out[:, idx, idx] = -r
        return out

    # tensor-product generalized Gauss-Laguerre over the coordinates
    def _tensor_nodes(self, n_per_dim: int):
        with np.errstate(over="ignore"):
            grids = [_genlaguerre_nodes(n_per_dim, a, b)
                     for a, b in zip(self.alphas, self.betas)]
        rs = np.stack([g.ravel() for g in np.meshgrid(*[g[0] for g in grids],
                                                      indexing="ij")], axis=-1)
        ws = np.stack([g.ravel() for g in np.meshgrid(*[g[1] for g in grids],
                                                      indexing="ij")], axis=-1).prod(axis=1)
        return rs, ws

    def _tensor_expect(self, f, tol):
        n = 4
        prev = None
        while n ** self.dim <= _NODE_MAX:
            rs, ws = self._tensor_nodes(n)
            cur = sum(w * np.asarray(f(r), dtype=complex) for w, r in zip(ws, rs))
            if prev is not None:
                diff = np.linalg.norm(np.atleast_1d(cur - prev))
                if diff <= tol * max(np.linalg.norm(np.atleast_1d(cur)), 1e-300):
                    return _maybe_real(cur), rs, ws
            prev = cur
            n *= 2
        raise QuadratureError("tensor quadrature did not converge within the node cap")

    # order statistics of the independent Gamma rates
    def _min_pdf(self, t):
        pdf = np.array([scipy.stats.gamma(a, scale=1.0 / b).pdf(t)
                        for a, b in zip(self.alphas, self.betas)])
        sf = np.array([scipy.stats.gamma(a, scale=1.0 / b).sf(t)
                       for a, b in zip(self.alphas, self.betas)])
        total = 0.0
        for i in range(self.dim):
            total += pdf[i] * np.prod([sf[j] for j in range(self.dim) if j != i])
        return total

    def _max_pdf(self, t):
        pdf = np.array([scipy.stats.gamma(a, scale=1.0 / b).pdf(t)
                        for a, b in zip(self.alphas, self.betas)])
        cdf = np.array([scipy.stats.gamma(a, scale=1.0 / b).cdf(t)
                        for a, b in zip(self.alphas, self.betas)])
        total = 0.0
        for i in range(self.dim):
            total += pdf[i] * np.prod([cdf[j] for j in range(self.dim) if j != i])
        return total

    def _order_stat_expect(self, f, which: str) -> float:
        pdf = self._min_pdf if which == "min" else self._max_pdf
        val, _ = scipy.integrate.quad(lambda t: f(t) * pdf(t), 0.0, np.inf,
                                      epsabs=1e-13, epsrel=1e-10, limit=200)
        return float(val)

    def _e_max_or1_over_min(self) -> float:
        """E[(max R v 1) / min R], exact 1-d quadratures for d = 2."""
        if self.dim == 1:
            comp = RayComponent(1.0, np.array([[-1.0]]), float(self.alphas[0]),
                                float(self.betas[0]),
                                DecayBound(1.0, 1.0, 1.0, 1.0), 1.0)
            return comp.e_norm_or_one_over_r()
        if self.dim != 2:
            rng = np.random.default_rng(0x0D1A60)
            r = rng.gamma(shape=self.alphas, scale=1.0 / self.betas, size=(1_000_000, self.dim))
            return float(np.mean(np.maximum(r.max(axis=1), 1.0) / r.min(axis=1)))

        def inner(t, a, b):
            # int_t^inf (u v 1) f_{a,b}(u) du
            g = scipy.stats.gamma(a, scale=1.0 / b)
            gp1 = scipy.stats.gamma(a + 1.0, scale=1.0 / b)
            if t >= 1.0:
                return (a / b) * gp1.sf(t)
            return (g.cdf(1.0) - g.cdf(t)) + (a / b) * gp1.sf(1.0)

        total = 0.0
        for i, j in ((0, 1), (1, 0)):
            gi = scipy.stats.gamma(self.alphas[i], scale=1.0 / self.betas[i])
            f = lambda t: (1.0 / t) * gi.pdf(t) * inner(t, self.alphas[j], self.betas[j])
            for lo, hi in ((0.0, 1.0), (1.0, np.inf)):
                total += scipy.integrate.quad(f, lo, hi, epsabs=1e-13,
                                              epsrel=1e-10, limit=200)[0]
        return total

    def _verdict(self, name: str) -> str:
        all_gt1 = bool(np.all(self.alphas > 1.0))
        if name in ("kappa_pow_over_rho", "norm_or1_kappa_pow_over_rho"):
            return FINITE if all_gt1 else DIVERGENT
        if name in ("theta_pow_over_tau", "inv_tau_theta_ge"):
            return FINITE if float(self.alphas.sum()) > 1.0 else DIVERGENT
        return FINITE

    def checker_integral(self, name, p=1.0, eps=None):
        # kappa = theta = 1; rho = min R, tau = ||A|| = max R.
        status = self._verdict(name)
        if status != FINITE:
            return IntegralValue(float("inf"), status,
                                 "Gamma shape condition fails for this integral "
                                 "(E_pi[1/rho] divergent)")
        if name == "kappa_pow":
            return IntegralValue(1.0, FINITE, "kappa = 1 on diagonal matrices")
        if name == "inv_tau_theta_ge" and eps is not None and eps > 1.0:
            return IntegralValue(0.0, FINITE, "no mass with theta >= eps")
        if name == "kappa_pow_over_rho":
            val = self._order_stat_expect(lambda t: 1.0 / t, "min")
            return IntegralValue(val, FINITE, "order-statistic quadrature over min R")
        if name == "norm_kappa_pow":
            val = self._order_stat_expect(lambda t: t, "max")
            return IntegralValue(val, FINITE, "order-statistic quadrature over max R")
        if name in ("theta_pow_over_tau", "inv_tau_theta_ge"):
            val = self._order_stat_expect(lambda t: 1.0 / t, "max")
            return IntegralValue(val, FINITE, "order-statistic quadrature over max R")
        if name == "norm_or1_kappa_pow_over_rho":
            val = self._e_max_or1_over_min()
            note = "nested quadrature" if self.dim <= 2 else "Monte Carlo estimate"
            return IntegralValue(val, FINITE, note)
        raise ValidationError(f"unknown checker integral {name!r}")

    def truncation_decay(self, horizon, kappa_pow=1.0, rate_scale=1.0):
        if not np.all(self.alphas > 1.0):
            return float("inf")
        c = rate_scale
        return self._order_stat_expect(
            lambda t: math.exp(-c * t * horizon) / (c * t), "min")

    def theta_mass_at_least(self, eps):
        return 1.0 if eps <= 1.0 else 0.0

    def expectation_sequence(self, g, tol: float = 1e-9):
        try:
            val, _, _ = self._tensor_expect(lambda r: g(np.diag(-r)), tol)
            return val
        except QuadratureError:
            if self.dim > 2:
                raise
        a0, b0 = self.alphas[0], self.betas[0]
        a1, b1 = self.alphas[1], self.betas[1]
        g0 = scipy.stats.gamma(a0, scale=1.0 / b0)
        g1 = scipy.stats.gamma(a1, scale=1.0 / b1)
        shape = np.asarray(g(-np.eye(2)), dtype=complex).shape

        def inner(r0):
            def f1(r1):
                p = g1.pdf(r1)
                if r1 <= 0.0 or p == 0.0 or not np.isfinite(p):
                    return np.zeros(shape, dtype=complex)
                return np.asarray(g(np.diag([-r0, -r1])), dtype=complex) * p
            return scipy.integrate.quad_vec(f1, 0.0, np.inf,
                                            epsabs=1e-12, epsrel=max(tol, 1e-9))[0]

        def f0(r0):
            p = g0.pdf(r0)
            if r0 <= 0.0 or p == 0.0 or not np.isfinite(p):
                return np.zeros(shape, dtype=complex)
            return inner(r0) * p

        val = scipy.integrate.quad_vec(f0, 0.0, np.inf, epsabs=1e-12,
                                       epsrel=max(tol, 1e-9))[0]
        return _maybe_real(val)

    def _expect_nodes(self, g, tol):
        val, rs, ws = self._tensor_expect(lambda r: g(np.diag(-r)), tol)
        mats = np.array([np.diag(-r) for r in rs])
        return val, ws, mats


class EigenFactorMixing(MixingMeasure):
    """A = S D S^{-1}: discrete factor laws on normalized eigenvector
    matrices S (first nonzero entry of each column equal to 1) and strictly
    negative, strictly increasing diagonals D."""

    kind = "eigen_factor"

    def __init__(self, s_weights, s_mats, d_weights, d_mats):
        s_weights = np.asarray(s_weights, dtype=float)
        d_weights = np.asarray(d_weights, dtype=float)
        s_mats = np.asarray(s_mats, dtype=float)
        d_mats = np.asarray(d_mats, dtype=float)
        for w, name in ((s_weights, "S"), (d_weights, "D")):
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ValidationError(f"{name} weights must be nonnegative and sum to 1")
        if s_mats.ndim != 3 or d_mats.ndim != 3:
            raise ValidationError("factor matrices must be (k, d, d) arrays")
        self.dim = s_mats.shape[1]
        for s in s_mats:
            self._check_s(s)
        for dmat in d_mats:
            self._check_d(dmat)
        self.s_weights, self.s_mats = s_weights, s_mats
        self.d_weights, self.d_mats = d_weights, d_mats
        self._s_inv = np.array([np.linalg.inv(s) for s in s_mats])

    @staticmethod
    def _check_s(s):
        if abs(np.linalg.det(s)) < 1e-12:
            raise ValidationError("S must be invertible")
        for j in range(s.shape[1]):
            col = s[:, j]
            nz = np.nonzero(np.abs(col) > 1e-14)[0]
            if len(nz) == 0 or abs(col[nz[0]] - 1.0) > 1e-12:
                raise ValidationError(
                    "each column of S must have first nonzero entry equal to 1")

    @staticmethod
    def _check_d(dmat):
        if np.linalg.norm(dmat - np.diag(np.diag(dmat))) > 0:
            raise ValidationError("D must be diagonal")
        diag = np.diag(dmat)
        if np.any(diag >= 0):
            raise ValidationError("D must have strictly negative diagonal")
        if np.any(np.diff(diag) <= 0):
            raise ValidationError("D diagonal must be strictly increasing "
                                  "(magnitudes strictly decreasing)")

    def sample(self, rng, n):
        si = rng.choice(len(self.s_weights), size=n, p=self.s_weights)
        di = rng.choice(len(self.d_weights), size=n, p=self.d_weights)
        return np.einsum("nab,nbc,ncd->nad",
                         self.s_mats[si], self.d_mats[di], self._s_inv[si])

    def components(self):
        for ws, s, sinv in zip(self.s_weights, self.s_mats, self._s_inv):
            kappa = float(np.linalg.norm(s, 2) * np.linalg.norm(sinv, 2))
            theta = float(np.linalg.svd(s, compute_uv=False)[-1]
                          * np.linalg.svd(sinv, compute_uv=False)[-1])
            for wd, dmat in zip(self.d_weights, self.d_mats):
                a = s @ dmat @ sinv
                diag = np.diag(dmat)
                bound = DecayBound(kappa=max(kappa, 1.0),
                                   rho=-float(diag.max()),
                                   theta=min(max(theta, 1e-300), 1.0),
                                   tau=-float(diag.min()))
                yield AtomComponent(float(ws * wd), a, bound,
                                    float(np.linalg.norm(a, 2)))
