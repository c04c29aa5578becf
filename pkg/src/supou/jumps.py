"""Jump-size distributions for compound-Poisson Levy measures.

Each law exposes exact (or clearly flagged Monte Carlo) accessors for the
truncated and full moments that the existence / moment / path checkers
integrate, plus a deterministic sampler and the characteristic function.

Points are either d-vectors (Euclidean norm) or symmetric d x d matrices
(Frobenius norm, trace inner product).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._series import CONVERGED, DIVERGED, SeriesSum, sum_series
from .errors import MomentError, UnsupportedModelError, ValidationError

_MC_DRAWS = 1_000_000
_MC_SEED = 0x5D0_C0FFEE


@dataclass(frozen=True)
class MomentValue:
    """A possibly-infinite moment with a convergence verdict."""

    value: float
    status: str = CONVERGED
    exact: bool = True

    @property
    def finite(self) -> bool:
        return self.status == CONVERGED and np.isfinite(self.value)


def _norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(x))


def _inner(x: np.ndarray, w: np.ndarray) -> complex:
    """<x, w> = x.w for vectors, sum_ij x_ij w_ij for (symmetric) matrices."""
    return complex(np.sum(np.asarray(x) * np.asarray(w)))


class JumpDistribution:
    """Common interface; see concrete laws below."""

    matrix_valued: bool
    dim: int

    @property
    def point_shape(self) -> tuple[int, ...]:
        return (self.dim, self.dim) if self.matrix_valued else (self.dim,)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def mean(self) -> np.ndarray:
        raise NotImplementedError

    def second_moment(self) -> np.ndarray:
        """E[x x^T] for vectors, E[vec(x) vec(x)^T] for matrices."""
        raise NotImplementedError

    def mean_abs(self) -> float:
        raise NotImplementedError

    def small_jump_mean(self) -> np.ndarray:
        raise NotImplementedError

    def first_moment_tail(self) -> np.ndarray:
        return np.asarray(self.mean()) - np.asarray(self.small_jump_mean())

    def small_jump_abs(self) -> MomentValue:
        raise NotImplementedError

    def log_tail(self) -> MomentValue:
        raise NotImplementedError

    def tail_r_moment(self, r: float) -> MomentValue:
        raise NotImplementedError

    def r_moment(self, r: float) -> MomentValue:
        raise NotImplementedError

    def tail_prob(self, c: float) -> float:
        raise NotImplementedError

    def cf(self, w) -> complex:
        """E exp(i <x, w>); w may be complex (analytic extension)."""
        raise NotImplementedError


class DiscreteJumps(JumpDistribution):
    """Discrete jump law: finite atom list or a countable family.

    A countable family is a callable n -> (prob_n, point_n) for n >= 1 with
    probabilities summing to one; moment accessors then use block summation
    with divergence detection.
    """

    def __init__(self, atoms: Sequence[tuple[float, np.ndarray]] | None = None,
                 family: Callable[[int], tuple[float, np.ndarray]] | None = None,
                 dim: int | None = None, matrix_valued: bool | None = None):
        if (atoms is None) == (family is None):
            raise ValidationError("provide exactly one of atoms or family")
        if atoms is not None:
            probs = np.array([float(p) for p, _ in atoms])
            points = [np.asarray(x, dtype=float) for _, x in atoms]
            if len(points) == 0:
                raise ValidationError("atom list must be nonempty")
            if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
                raise ValidationError("atom probabilities must be nonnegative and sum to 1")
            shape = points[0].shape
            for x in points:
                if x.shape != shape or not np.all(np.isfinite(x)):
                    raise ValidationError("atoms must share one finite shape")
            self.matrix_valued = len(shape) == 2
            if self.matrix_valued:
                if shape[0] != shape[1]:
                    raise ValidationError("matrix atoms must be square")
                for x in points:
                    if np.linalg.norm(x - x.T) > 1e-12 * max(1.0, _norm(x)):
                        raise ValidationError("matrix atoms must be symmetric")
            self.dim = shape[0]
            self._probs = probs
            self._points = np.array(points)
            self._family = None
        else:
            if dim is None:
                raise ValidationError("dim is required for a countable family")
            p1, x1 = family(1)
            x1 = np.asarray(x1, dtype=float)
            self.dim = int(dim)
            self.matrix_valued = bool(matrix_valued) if matrix_valued is not None \
                else x1.ndim == 2
            self._family = family
            self._probs = None
            self._points = None
        self._cache: dict = {}

    @property
    def countable(self) -> bool:
        return self._family is not None

    def _term(self, n: int) -> tuple[float, np.ndarray]:
        p, x = self._family(n)
        return float(p), np.asarray(x, dtype=float)

    # -- summation helpers ------------------------------------------------
    def _finite_sum(self, f) -> float:
        return float(sum(p * f(x) for p, x in zip(self._probs, self._points)))

    def _series(self, f, tol: float = 1e-7) -> SeriesSum:
        return sum_series(lambda n: (lambda p, x: p * f(x))(*self._term(n)), tol=tol)

    def _scalar(self, f, tol: float = 1e-7) -> MomentValue:
        if not self.countable:
            return MomentValue(self._finite_sum(f))
        s = self._series(f, tol=tol)
        return MomentValue(s.value, status=s.status, exact=s.status == CONVERGED)

    def _vector_sum(self, f, weight_norm) -> np.ndarray:
        """Sum p_n f(x_n) (array valued) guarded by the |.|-series verdict."""
        if not self.countable:
            out = np.zeros_like(f(self._points[0]), dtype=float)
            for p, x in zip(self._probs, self._points):
                out = out + p * f(x)
            return out
        s = self._series(weight_norm)
        if s.status == DIVERGED:
            raise MomentError("countable jump family: requested moment diverges")
        out = None
        for n in range(1, s.n_terms + 1):
            p, x = self._term(n)
            val = p * f(x)
            out = val if out is None else out + val
        return np.asarray(out, dtype=float)

    # -- accessors ---------------------------------------------------------
    def sample(self, rng, n):
        if not self.countable:
            idx = rng.choice(len(self._probs), size=n, p=self._probs)
            return self._points[idx]
        u = rng.uniform(size=n)
        cum = [0.0]
        pts = []
        umax = float(u.max()) if n else 0.0
        k = 1
        while cum[-1] < umax and k < (1 << 22):
            p, x = self._term(k)
            cum.append(cum[-1] + p)
            pts.append(x)
            k += 1
        idx = np.searchsorted(np.array(cum[1:]), u, side="left")
        idx = np.minimum(idx, len(pts) - 1)
        return np.array([pts[i] for i in idx])

    def mean(self):
        return self._vector_sum(lambda x: x, lambda x: _norm(x))

    def second_moment(self):
        if self.matrix_valued:
            f = lambda x: np.outer(x.flatten(order="F"), x.flatten(order="F"))
        else:
            f = lambda x: np.outer(x, x)
        return self._vector_sum(f, lambda x: _norm(x) ** 2)

    def mean_abs(self):
        mv = self._scalar(_norm)
        if not mv.finite:
            raise MomentError("E||x|| diverges for this jump family")
        return mv.value

    def small_jump_mean(self):
        return self._vector_sum(lambda x: x if _norm(x) <= 1.0 else np.zeros_like(x),
                                lambda x: _norm(x) if _norm(x) <= 1.0 else 0.0)

    def small_jump_abs(self):
        return self._scalar(lambda x: _norm(x) if _norm(x) <= 1.0 else 0.0)

    def log_tail(self):
        return self._scalar(lambda x: np.log(_norm(x)) if _norm(x) > 1.0 else 0.0)

    def tail_r_moment(self, r):
        r = float(r)
        return self._scalar(lambda x: _norm(x) ** r if _norm(x) > 1.0 else 0.0)

    def r_moment(self, r):
        r = float(r)
        return self._scalar(lambda x: _norm(x) ** r)

    def tail_prob(self, c):
        return self._scalar(lambda x: 1.0 if _norm(x) > c else 0.0).value

    def cf(self, w):
        w = np.asarray(w)
        if not self.countable:
            return complex(sum(p * np.exp(1j * _inner(x, w))
                               for p, x in zip(self._probs, self._points)))
        s = sum_series(lambda n: self._term(n)[0], tol=1e-12)
        return complex(sum((lambda p, x: p * np.exp(1j * _inner(x, w)))(*self._term(n))
                           for n in range(1, s.n_terms + 1)))


class GaussianJumps(JumpDistribution):
    """Gaussian vector jumps N(mean, cov).

    Full moments are exact; truncated (norm-split) accessors fall back to a
    deterministic Monte Carlo estimate and are flagged as inexact.
    """

    matrix_valued = False

    def __init__(self, mean, cov):
        mean = np.asarray(mean, dtype=float)
        cov = np.asarray(cov, dtype=float)
        if mean.ndim != 1:
            raise ValidationError("mean must be a vector")
        d = mean.shape[0]
        if cov.shape != (d, d) or np.linalg.norm(cov - cov.T) > 1e-12 * max(1.0, _norm(cov)):
            raise ValidationError("cov must be a symmetric d x d matrix")
        eig = np.linalg.eigvalsh(cov)
        if eig.min() < -1e-12 * max(1.0, eig.max()):
            raise ValidationError("cov must be positive semi-definite")
        self.dim = d
        self._mean = mean
        self._cov = cov
        w, q = np.linalg.eigh(cov)
        self._factor = q * np.sqrt(np.clip(w, 0.0, None))
        self._cache: dict = {}

    @property
    def exact_truncated_moments(self) -> bool:
        return False

    def sample(self, rng, n):
        z = rng.standard_normal((n, self.dim))
        return self._mean + z @ self._factor.T

    def _mc(self):
        if "draws" not in self._cache:
            rng = np.random.default_rng(_MC_SEED)
            self._cache["draws"] = self.sample(rng, _MC_DRAWS)
            self._cache["norms"] = np.linalg.norm(self._cache["draws"], axis=1)
        return self._cache["draws"], self._cache["norms"]

    def mean(self):
        return self._mean.copy()

    def second_moment(self):
        return self._cov + np.outer(self._mean, self._mean)

    def mean_abs(self):
        _, norms = self._mc()
        return float(norms.mean())

    def small_jump_mean(self):
        if _norm(self._mean) == 0.0:
            return np.zeros(self.dim)
        draws, norms = self._mc()
        return draws[norms <= 1.0].sum(axis=0) / len(norms)

    def small_jump_abs(self):
        _, norms = self._mc()
        return MomentValue(float(norms[norms <= 1.0].sum() / len(norms)), exact=False)

    def log_tail(self):
        _, norms = self._mc()
        big = norms[norms > 1.0]
        return MomentValue(float(np.log(big).sum() / len(norms)), exact=False)

    def tail_r_moment(self, r):
        _, norms = self._mc()
        big = norms[norms > 1.0]
        return MomentValue(float((big ** float(r)).sum() / len(norms)), exact=False)

    def r_moment(self, r):
        _, norms = self._mc()
        return MomentValue(float((norms ** float(r)).mean()), exact=False)

    def tail_prob(self, c):
        _, norms = self._mc()
        return float((norms > c).mean())

    def cf(self, w):
        w = np.asarray(w)
        return complex(np.exp(1j * np.dot(self._mean, w) - 0.5 * w @ self._cov @ w))


def _gaussian_fourth_moment(mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """E[v_a v_b v_c v_d] for v ~ N(mean, cov), as a (d,d,d,d) array."""
    m, c = mean, cov
    mm = np.einsum("a,b->ab", m, m)
    t = np.einsum("a,b,c,d->abcd", m, m, m, m)
    t += np.einsum("ab,cd->abcd", c, mm) + np.einsum("ac,bd->abcd", c, mm)
    t += np.einsum("ad,bc->abcd", c, mm) + np.einsum("bc,ad->abcd", c, mm)
    t += np.einsum("bd,ac->abcd", c, mm) + np.einsum("cd,ab->abcd", c, mm)
    t += np.einsum("ab,cd->abcd", c, c) + np.einsum("ac,bd->abcd", c, c)
    t += np.einsum("ad,bc->abcd", c, c)
    return t


class RankOneWishartJumps(JumpDistribution):
    """Rank-one positive semi-definite matrix jumps x = v v^T.

    The vector law of v is either Gaussian or discrete; every jump lands in
    the positive semi-definite cone by construction.
    """

    matrix_valued = True

    def __init__(self, vector_law: JumpDistribution):
        if vector_law.matrix_valued:
            raise ValidationError("the law of v must be vector valued")
        if not isinstance(vector_law, (GaussianJumps, DiscreteJumps)):
            raise UnsupportedModelError("v law must be Gaussian or discrete")
        self.vlaw = vector_law
        self.dim = vector_law.dim
        self._cache: dict = {}

    def sample(self, rng, n):
        v = self.vlaw.sample(rng, n)
        return np.einsum("na,nb->nab", v, v)

    def _vdraws(self):
        if "v" not in self._cache:
            rng = np.random.default_rng(_MC_SEED + 1)
            self._cache["v"] = self.vlaw.sample(rng, _MC_DRAWS)
            self._cache["sq"] = np.sum(self._cache["v"] ** 2, axis=1)
        return self._cache["v"], self._cache["sq"]

    def mean(self):
        if isinstance(self.vlaw, GaussianJumps):
            return self.vlaw.second_moment()
        return self.vlaw._vector_sum(lambda v: np.outer(v, v), lambda v: _norm(v) ** 2)

    def second_moment(self):
        d = self.dim
        if isinstance(self.vlaw, GaussianJumps):
            t = _gaussian_fourth_moment(self.vlaw._mean, self.vlaw._cov)
        else:
            if self.vlaw.countable:
                raise UnsupportedModelError(
                    "second moment of a countable rank-one family is not supported")
            t = np.zeros((d, d, d, d))
            for p, v in zip(self.vlaw._probs, self.vlaw._points):
                t += p * np.einsum("a,b,c,d->abcd", v, v, v, v)
        # vec is column stacking: vec index (a,b) -> b*d + a
        return t.transpose(1, 0, 3, 2).reshape(d * d, d * d)

    def mean_abs(self):
        # Frobenius norm of v v^T is ||v||^2
        if isinstance(self.vlaw, GaussianJumps):
            return float(np.trace(self.vlaw._cov) + _norm(self.vlaw._mean) ** 2)
        mv = self.vlaw.r_moment(2.0)
        if not mv.finite:
            raise MomentError("E||v||^2 diverges")
        return mv.value

    def _split(self, f_small, f_big, exactable: bool) -> MomentValue:
        if isinstance(self.vlaw, DiscreteJumps):
            def g(v):
                s = _norm(v) ** 2
                return f_small(s) if s <= 1.0 else f_big(s)
            return self.vlaw._scalar(g)
        _, sq = self._vdraws()
        small = sq <= 1.0
        val = 0.0
        if small.any():
            val += float(np.sum(f_small(sq[small])))
        if (~small).any():
            val += float(np.sum(f_big(sq[~small])))
        return MomentValue(val / len(sq), exact=False)

    def small_jump_mean(self):
        if isinstance(self.vlaw, DiscreteJumps):
            return self.vlaw._vector_sum(
                lambda v: np.outer(v, v) if _norm(v) ** 2 <= 1.0 else np.zeros((self.dim,) * 2),
                lambda v: _norm(v) ** 2 if _norm(v) ** 2 <= 1.0 else 0.0)
        v, sq = self._vdraws()
        sel = v[sq <= 1.0]
        return np.einsum("na,nb->ab", sel, sel) / len(sq)

    def small_jump_abs(self):
        return self._split(lambda s: s, lambda s: 0.0 * s, True)

    def log_tail(self):
        return self._split(lambda s: 0.0 * s, np.log, True)

    def tail_r_moment(self, r):
        r = float(r)
        return self._split(lambda s: 0.0 * s, lambda s: s ** r, True)

    def r_moment(self, r):
        r = float(r)
        return self._split(lambda s: s ** r, lambda s: s ** r, True)

    def tail_prob(self, c):
        if isinstance(self.vlaw, DiscreteJumps):
            return self.vlaw._scalar(lambda v: 1.0 if _norm(v) ** 2 > c else 0.0).value
        _, sq = self._vdraws()
        return float((sq > c).mean())

    def cf(self, w):
        w = np.asarray(w)
        if not isinstance(self.vlaw, DiscreteJumps) or self.vlaw.countable:
            raise UnsupportedModelError(
                "matrix-argument characteristic function needs a finite discrete v law")
        return complex(sum(p * np.exp(1j * (v @ w @ v))
                           for p, v in zip(self.vlaw._probs, self.vlaw._points)))
