"""Method-of-moments estimation for the Gamma-ray mixing model.

The normalized autocovariance ratio acov(h) acov(0)^{-1} equals
(I - B h)^{1 - alpha} under the beta = 1 normalization (beta and B are
jointly identified only up to a common scale).  The shape alpha and one
eigenvalue of B are fitted by nonlinear least squares on an eigenvalue
curve of the ratio; B itself is recovered through the principal matrix
power, and the first two moments of the underlying Levy process follow by
inverting the stationary mean/variance formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, DataError, FitFailureError, ValidationError
from .matfun import frac_matrix_power, lyapunov_solve, spectral_abscissa, unvec, vec
from .mixing import GammaRayMixing, pi_expectation

ALPHA_GRID = np.linspace(1.01, 5.0, 81)
LAMBDA_GRID = -np.logspace(np.log10(0.01), np.log10(10.0), 81)
GRAD_TOL = 1e-10
MAX_NEWTON_ITERS = 500


@dataclass(frozen=True)
class AcovEstimate:
    """Empirical (or exact) autocovariance matrices on the lag grid n*delta."""

    lags: np.ndarray
    matrices: np.ndarray
    n_obs: int
    delta: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.matrices)):
            raise ValidationError("autocovariance matrices must be finite")
        if len(self.lags) != len(self.matrices):
            raise ValidationError("lag grid and matrices must align")


@dataclass
class GammaRayFit:
    alpha_hat: float
    b_hat: np.ndarray
    gamma1_hat: np.ndarray | None = None
    m_hat: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


def empirical_second_order(path: np.ndarray, delta: float,
                           max_lag: int) -> tuple[np.ndarray, AcovEstimate]:
    """Sample mean and biased (1/N) autocovariances up to max_lag steps."""
    path = np.asarray(path, dtype=float)
    if path.ndim == 1:
        path = path[:, None]
    n = path.shape[0]
    if n <= max_lag + 10:
        raise DataError(f"path of length {n} is too short for {max_lag} lags")
    mean = path.mean(axis=0)
    centered = path - mean
    mats = []
    for k in range(max_lag + 1):
        m = np.einsum("ta,tb->ab", centered[k:], centered[:n - k]) / n
        if k == 0:
            m = 0.5 * (m + m.T)
        mats.append(m)
    lags = delta * np.arange(max_lag + 1)
    return mean, AcovEstimate(lags=lags, matrices=np.array(mats),
                              n_obs=n, delta=float(delta))


def _ratio_curve(acov: AcovEstimate):
    c0 = acov.matrices[0]
    if np.linalg.cond(c0) > 1e10:
        raise ConditioningError("acov(0) is numerically singular")
    c0_inv = np.linalg.inv(c0)
    hs, ys, eigtables, imag = [], [], [], 0.0
    for h, c in zip(acov.lags[1:], acov.matrices[1:]):
        ratio = c @ c0_inv
        eigs = np.linalg.eigvals(ratio)
        order = np.argsort(-np.abs(eigs))
        top = eigs[order[0]]
        imag = max(imag, abs(float(top.imag)))
        hs.append(float(h))
        ys.append(float(top.real))
        eigtables.append(eigs[order])
    return np.array(hs), np.array(ys), np.array(eigtables), imag


def _curve(alpha, lam, h):
    return (1.0 - lam * h) ** (1.0 - alpha)


def _residual_and_grad(alpha, lam, h, y):
    base = 1.0 - lam * h
    f = base ** (1.0 - alpha)
    r = f - y
    d_alpha = -np.log(base) * f
    d_lam = (1.0 - alpha) * base ** (-alpha) * (-h)
    jac = np.stack([d_alpha, d_lam], axis=1)
    return r, jac


def _gauss_newton(alpha, lam, h, y):
    theta = np.array([alpha, lam])
    r, jac = _residual_and_grad(theta[0], theta[1], h, y)
    cost = float(r @ r)
    for _ in range(MAX_NEWTON_ITERS):
        grad = jac.T @ r
        if np.linalg.norm(grad) < GRAD_TOL:
            break
        try:
            step = np.linalg.solve(jac.T @ jac + 1e-14 * np.eye(2), -grad)
        except np.linalg.LinAlgError:
            break
        scale = 1.0
        improved = False
        for _ in range(60):
            cand = theta + scale * step
            if cand[0] > 1.0 + 1e-9 and cand[1] < -1e-9 \
                    and np.all(1.0 - cand[1] * h > 0):
                r_new, jac_new = _residual_and_grad(cand[0], cand[1], h, y)
                c_new = float(r_new @ r_new)
                if c_new <= cost:
                    theta, r, jac, cost = cand, r_new, jac_new, c_new
                    improved = True
                    break
            scale *= 0.5
        if not improved or np.linalg.norm(scale * step) < 1e-15:
            break
    return float(theta[0]), float(theta[1]), cost, float(np.linalg.norm(jac.T @ r))


def fit_gamma_ray(acov: AcovEstimate, n_recovery_lags: int = 3) -> GammaRayFit:
    """Fit (alpha, B) of the Gamma-ray model from the autocovariance ratio.

    Coarse grid search over (alpha, lambda) initializes a damped
    Gauss-Newton refinement on the leading eigenvalue curve; B is recovered
    from the principal power of the ratio at the smallest lags.
    """
    if len(acov.lags) < 6:
        raise DataError("at least 5 nonzero lags are required")
    h, y, eigtables, imag = _ratio_curve(acov)
    flat_cost = float(np.sum((1.0 - y) ** 2))
    fa = (1.0 - LAMBDA_GRID[None, :, None] * h[None, None, :])
    curves = fa ** (1.0 - ALPHA_GRID[:, None, None])
    costs = np.sum((curves - y[None, None, :]) ** 2, axis=2)
    i, j = np.unravel_index(int(np.argmin(costs)), costs.shape)
    best_grid = float(costs[i, j])
    if best_grid >= flat_cost * (1.0 - 1e-9) and flat_cost < 1e-18:
        raise FitFailureError("the ratio curve does not decay; alpha is not identified")
    if best_grid >= flat_cost:
        raise FitFailureError("no (alpha, lambda) improves on a flat curve")
    alpha, lam, cost, grad_norm = _gauss_newton(
        float(ALPHA_GRID[i]), float(LAMBDA_GRID[j]), h, y)
    c0_inv = np.linalg.inv(acov.matrices[0])
    bs = []
    for k in range(1, min(n_recovery_lags, len(h)) + 1):
        ratio = acov.matrices[k] @ c0_inv
        root = frac_matrix_power(ratio, 1.0 / (1.0 - alpha))
        bs.append((np.eye(ratio.shape[0]) - root) / h[k - 1])
    b_hat = np.mean(bs, axis=0)
    if spectral_abscissa(b_hat) >= 0:
        raise FitFailureError("recovered mean-reversion matrix is not stable")
    return GammaRayFit(alpha_hat=alpha, b_hat=b_hat, diagnostics={
        "nls_residual": cost,
        "grad_norm": grad_norm,
        "lambda_hat": lam,
        "eigencurves": eigtables,
        "imag_residue": imag,
    })


def recover_levy_moments(mean_hat, var_hat, fit: GammaRayFit):
    """Invert the stationary mean/variance maps of the fitted Gamma-ray
    model (beta = 1) for the first two moments of the underlying Levy
    process."""
    mean_hat = np.asarray(mean_hat, dtype=float)
    var_hat = np.asarray(var_hat, dtype=float)
    if fit.alpha_hat <= 1.0:
        raise ValidationError("the fitted alpha must exceed 1")
    pi_hat = GammaRayMixing(fit.b_hat, fit.alpha_hat, 1.0)
    d = fit.b_hat.shape[0]
    g_map = -np.asarray(pi_expectation(pi_hat, np.linalg.inv))
    gamma1 = np.linalg.solve(g_map, mean_hat)
    cols = []
    for k in range(d * d):
        e_k = unvec(np.eye(d * d)[:, k], d)
        col = -np.asarray(pi_expectation(pi_hat, lambda a: lyapunov_solve(a, e_k)))
        cols.append(vec(col))
    op = np.stack(cols, axis=1)
    if np.linalg.cond(op) > 1e12:
        raise ConditioningError("the variance map of the fitted model is singular")
    m_hat = unvec(np.linalg.solve(op, vec(var_hat)), d)
    m_hat = 0.5 * (m_hat + m_hat.T)
    fit.gamma1_hat = gamma1
    fit.m_hat = m_hat
    return gamma1, m_hat
