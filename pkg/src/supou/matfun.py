"""Dense linear-algebra kernels for stable matrices.

Matrix exponentials, principal fractional powers, Lyapunov solves,
Kronecker sums, the modulus of injectivity and exponential decay bounds
(kappa, rho, theta, tau) used by every existence and moment checker.

All functions are pure; matrices are plain float ndarrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    BranchCutError,
    ConditioningError,
    ModeMismatchError,
    StabilityError,
    ValidationError,
)

# Eigenvector matrices with condition number above this are treated as
# numerically non-diagonalizable: kappa/theta bounds built from them would
# be meaningless.
DIAG_COND_LIMIT = 1e12

# Relative imaginary residue allowed when recomposing a real matrix from a
# complex spectral calculation.
IMAG_RESIDUE_TOL = 1e-8


def _as_square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValidationError(f"{name} must be a square d x d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def spectral_abscissa(a) -> float:
    """Largest real part of the spectrum."""
    a = _as_square(a)
    return float(np.max(np.linalg.eigvals(a).real))


def is_stable(a, tol: float = 0.0) -> bool:
    """True when every eigenvalue has real part < -tol."""
    return spectral_abscissa(a) < -tol


def expm(a, t: float = 1.0) -> np.ndarray:
    """Matrix exponential e^{A t} for t >= 0.

    Backed by scipy's scaling-and-squaring Pade implementation; t = 0
    returns the identity exactly.
    """
    a = _as_square(a)
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise ValidationError(f"t must be a finite nonnegative real, got {t}")
    if t == 0.0:
        return np.eye(a.shape[0])
    return scipy.linalg.expm(a * t)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition A = U diag(eigenvalues) U^{-1}."""

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    inverse_vectors: np.ndarray
    is_diagonalizable: bool
    condition_estimate: float


def spectral_decomposition(a, cond_limit: float = DIAG_COND_LIMIT) -> SpectralDecomposition:
    """Complex eigendecomposition with a diagonalizability verdict.

    The verdict is a conditioning statement: the eigenvector matrix must be
    invertible with condition number below `cond_limit`.
    """
    a = _as_square(a)
    lam, u = np.linalg.eig(a)
    cond = float(np.linalg.cond(u))
    ok = bool(np.isfinite(cond) and cond <= cond_limit)
    uinv = np.linalg.inv(u) if ok else np.full_like(u, np.nan)
    return SpectralDecomposition(
        eigenvalues=lam,
        right_vectors=u,
        inverse_vectors=uinv,
        is_diagonalizable=ok,
        condition_estimate=cond,
    )


def frac_matrix_power(m, p: float) -> np.ndarray:
    """Principal fractional power M^p via complex spectral calculus.

    Requires M diagonalizable (within the conditioning limit) with no
    eigenvalue on the closed negative real axis; the per-eigenvalue power
    uses the principal branch of the complex logarithm. The tiny imaginary
    residue of the recomposition is discarded after a tolerance check.
    """
    m = _as_square(m, "M")
    p = float(p)
    dec = spectral_decomposition(m)
    if not dec.is_diagonalizable:
        raise ConditioningError(
            f"matrix is not diagonalizable within tolerance "
            f"(eigenvector condition {dec.condition_estimate:.3e})"
        )
    lam = dec.eigenvalues
    scale = float(np.max(np.abs(lam)))
    on_cut = (lam.real <= 0) & (np.abs(lam.imag) <= 1e-14 * max(scale, 1.0))
    if np.any(on_cut):
        raise BranchCutError(
            f"eigenvalue on the branch cut (-inf, 0]: {lam[on_cut][0]}"
        )
    powered = np.exp(p * np.log(lam))
    out = dec.right_vectors @ np.diag(powered) @ dec.inverse_vectors
    resid = float(np.linalg.norm(out.imag))
    if resid > IMAG_RESIDUE_TOL * max(float(np.linalg.norm(out)), 1e-300):
        raise ConditioningError(
            f"imaginary residue {resid:.3e} exceeds tolerance for the recomposed power"
        )
    return out.real


def kron_sum(a) -> np.ndarray:
    """Kronecker sum A (x) I + I (x) A (d^2 x d^2).

    With column-stacking vec, this matrix represents X -> AX + XA^T, and
    exp of it at time t equals e^{At} (x) e^{At}.
    """
    a = _as_square(a)
    eye = np.eye(a.shape[0])
    return np.kron(a, eye) + np.kron(eye, a)


def vec(x) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(x).flatten(order="F")


def unvec(v, d: int) -> np.ndarray:
    """Inverse of `vec` for a d x d matrix."""
    return np.asarray(v).reshape((d, d), order="F")


def lyapunov_solve(a, c, rtol: float = 1e-8) -> np.ndarray:
    """Solve A X + X A^T = C for stable A.

    Uses the d^2-dimensional Kronecker linear system (desk-scale d), then
    verifies the residual against `rtol * ||C||`.
    """
    a = _as_square(a, "A")
    c = _as_square(c, "C")
    if a.shape != c.shape:
        raise ValidationError("A and C must have matching shapes")
    if spectral_abscissa(a) >= 0:
        raise StabilityError("A must have spectral abscissa < 0 for a unique solution")
    d = a.shape[0]
    eye = np.eye(d)
    k = np.kron(eye, a) + np.kron(a, eye)
    x = unvec(np.linalg.solve(k, vec(c)), d)
    resid = np.linalg.norm(a @ x + x @ a.T - c)
    if resid > rtol * max(np.linalg.norm(c), 1e-300):
        raise ConditioningError(
            f"Lyapunov residual {resid:.3e} exceeds {rtol:.1e} * ||C||"
        )
    return x


def modulus_of_injectivity(z) -> float:
    """min over unit vectors x of ||Z x||, i.e. the smallest singular value."""
    z = _as_square(z, "Z")
    return float(np.linalg.svd(z, compute_uv=False)[-1])


@dataclass(frozen=True)
class DecayBound:
    """Constants for kappa e^{-rho s} >= ||e^{As}|| and j(e^{As}) >= theta e^{-tau s}."""

    kappa: float
    rho: float
    theta: float
    tau: float

    def __post_init__(self):
        if not (self.kappa >= 1.0):
            raise ValidationError(f"kappa must be >= 1, got {self.kappa}")
        if not (self.rho > 0):
            raise ValidationError(f"rho must be > 0, got {self.rho}")
        if not (0.0 < self.theta <= 1.0):
            raise ValidationError(f"theta must lie in (0, 1], got {self.theta}")
        if not (self.tau >= self.rho):
            raise ValidationError(f"tau must be >= rho, got tau={self.tau}, rho={self.rho}")


def _normality_defect(a: np.ndarray) -> float:
    return float(np.linalg.norm(a @ a.T - a.T @ a))


def decay_bounds(a, mode: str = "diagonalizable") -> DecayBound:
    """Exponential decay envelope of e^{As} for a stable matrix.

    mode="normal": kappa = theta = 1 with the extreme spectral real parts;
    requires A normal.  mode="diagonalizable": kappa = ||U|| ||U^{-1}|| and
    theta = j(U) j(U^{-1}) from the eigenvector matrix U.
    """
    a = _as_square(a, "A")
    lam = np.linalg.eigvals(a)
    rho = -float(np.max(lam.real))
    tau = -float(np.min(lam.real))
    if rho <= 0:
        raise StabilityError("decay bounds require spectral abscissa < 0")
    if mode == "normal":
        defect = _normality_defect(a)
        if defect > 1e-10 * max(float(np.linalg.norm(a)) ** 2, 1e-300):
            raise ModeMismatchError(
                f"matrix is not normal (||AA^T - A^TA|| = {defect:.3e})"
            )
        return DecayBound(kappa=1.0, rho=rho, theta=1.0, tau=tau)
    if mode == "diagonalizable":
        dec = spectral_decomposition(a)
        if not dec.is_diagonalizable:
            raise ConditioningError(
                f"eigenvector condition {dec.condition_estimate:.3e} "
                f"beyond the diagonalizability limit"
            )
        u = dec.right_vectors
        uinv = dec.inverse_vectors
        kappa = float(np.linalg.norm(u, 2) * np.linalg.norm(uinv, 2))
        theta = float(
            np.linalg.svd(u, compute_uv=False)[-1]
            * np.linalg.svd(uinv, compute_uv=False)[-1]
        )
        kappa = max(kappa, 1.0)
        theta = min(max(theta, 1e-300), 1.0)
        return DecayBound(kappa=kappa, rho=rho, theta=theta, tau=tau)
    raise ValidationError(f"unknown decay-bound mode {mode!r}")


def best_decay_bounds(a) -> DecayBound:
    """Decay bounds using the normal-mode constants when A is normal."""
    a = _as_square(a, "A")
    defect = _normality_defect(a)
    if defect <= 1e-10 * max(float(np.linalg.norm(a)) ** 2, 1e-300):
        return decay_bounds(a, mode="normal")
    return decay_bounds(a, mode="diagonalizable")
