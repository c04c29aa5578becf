"""Positive semi-definite supOU processes and the stochastic-covariance layer.

The matrix process uses congruence kernels e^{A u} x e^{A^T u}, which on
vec coordinates are plain decaying kernels with the Kronecker-pair
eigenstructure, so simulation, integrated covariance and the SDE-form
residual all reuse the vector engine in dimension d^2.  The log-price
layer couples an Euler scheme for the diffusion part with the exact jump
increments of the underlying matrix subordinator, and evaluates the
conditional Fourier transform of future log prices for discrete mixing
and jump laws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate

from . import _engine as eng
from .basis import (
    GeneratingQuadruple,
    check_existence,
    check_moment,
    check_path_conditions,
    child_seed,
    gamma0,
)
from .errors import (
    MomentError,
    NumericalError,
    UnsupportedModelError,
    ValidationError,
)
from .jumps import DiscreteJumps, RankOneWishartJumps
from .matfun import expm, kron_sum, lyapunov_solve, vec
from .mixing import pi_expectation
from .process import (
    IntegratedPaths,
    PathBundle,
    SecondOrderSummary,
    SimulationConfig,
    SupOUSpec,
    integrated_process,
    sde_residual,
    simulate_paths as _simulate_generic,
    truncation_horizon,
    _build_paths,
    _drift_nodes,
    sample_poisson_atoms,
    worker_count,
)
from concurrent.futures import ThreadPoolExecutor

# Eigenvalues of a simulated covariance below -PSD_TOL are a numerical error.
PSD_TOL = 1e-12
CLAMP_LIMIT = 1e-8


def _is_psd(mat: np.ndarray, tol: float = PSD_TOL) -> bool:
    return float(np.linalg.eigvalsh(0.5 * (mat + mat.T)).min()) >= -tol


@dataclass(frozen=True)
class PSDSupOUSpec:
    """Matrix-valued supOU model on the positive semi-definite cone."""

    quadruple: GeneratingQuadruple
    label: str = ""

    def __post_init__(self):
        q = self.quadruple
        if not q.matrix_valued:
            raise ValidationError("the quadruple must be matrix valued")
        g0 = gamma0(q)
        if not _is_psd(g0, tol=1e-10 * max(1.0, np.linalg.norm(g0))):
            raise ValidationError("gamma0 must be positive semi-definite")
        jumps = q.nu.jumps
        if isinstance(jumps, RankOneWishartJumps):
            pass  # rank-one jumps are positive semi-definite by construction
        elif isinstance(jumps, DiscreteJumps) and not jumps.countable:
            for x in jumps._points:
                if not _is_psd(x, tol=1e-10 * max(1.0, np.linalg.norm(x))):
                    raise ValidationError("every jump atom must be positive semi-definite")
        else:
            raise UnsupportedModelError(
                "matrix jumps must be rank-one or finite discrete PSD atoms")
        rep = check_existence(q)
        needed = ("nu_log_tail", "nu_small_jump_abs", "decay_envelope", "kappa2_over_rho")
        if not rep.all_hold(needed):
            failed = [e.id for e in rep.entries if e.id in needed and e.status != "holds"]
            raise ValidationError(f"existence conditions fail: {failed}")

    @property
    def dim(self) -> int:
        return self.quadruple.dim


def simulate_psd_paths(spec: PSDSupOUSpec, cfg: SimulationConfig) -> PathBundle:
    """Simulate the stationary matrix process and its driving subordinator.

    Every grid matrix is symmetrized and verified (fully below a work cap,
    on a deterministic stride above it) to have minimum eigenvalue above
    -1e-12.
    """
    q = spec.quadruple
    g0 = gamma0(q)
    horizon = truncation_horizon(q, cfg.trunc_tol)
    dw, dm = _drift_nodes(q, g0, horizon)
    times = cfg.times
    window = (cfg.t_start - horizon, cfg.t_end)

    def one_path(j: int):
        atoms = sample_poisson_atoms(q, window, child_seed(cfg.seed, j, 0))
        x, l = _build_paths(q, cfg, horizon, g0, dw, dm, atoms, None)
        return atoms, x, l

    workers = worker_count()
    if workers > 1 and cfg.n_paths > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_path, range(cfg.n_paths)))
    else:
        results = [one_path(j) for j in range(cfg.n_paths)]
    x = np.stack([r[1] for r in results])
    l = np.stack([r[2] for r in results])
    x = 0.5 * (x + np.swapaxes(x, -1, -2))
    flat = x.reshape(-1, q.dim, q.dim)
    stride = max(1, len(flat) // 250_000)
    eigs = np.linalg.eigvalsh(flat[::stride])
    if float(eigs.min()) < -PSD_TOL * max(1.0, float(np.abs(x).max())):
        raise NumericalError("a simulated covariance matrix lost positive "
                             "semi-definiteness beyond tolerance")
    return PathBundle(times=times, x=x, l=l, atoms=[r[0] for r in results],
                      trunc_horizon=horizon, gamma0=g0, drift_weights=dw,
                      drift_mats=dm, matrix_valued=True)


def paths_from_atoms_psd(atoms, times) -> np.ndarray:
    """Exact congruence-kernel superposition on arbitrary times."""
    from .process import paths_from_atoms
    return paths_from_atoms(atoms, times, matrix_valued=True)


# ----------------------------------------------------------------------
def _psd_wrapper_spec(spec: PSDSupOUSpec) -> SupOUSpec:
    s = SupOUSpec.__new__(SupOUSpec)
    object.__setattr__(s, "quadruple", spec.quadruple)
    object.__setattr__(s, "label", spec.label)
    return s


def integrated_cov(bundle: PathBundle, spec: PSDSupOUSpec) -> IntegratedPaths:
    """Running integrated covariance, closed form plus trapezoid cross-check."""
    return integrated_process(bundle, _psd_wrapper_spec(spec))


def psd_sde_residual(bundle: PathBundle, spec: PSDSupOUSpec,
                     z_integration: str = "analytic") -> np.ndarray:
    return sde_residual(bundle, _psd_wrapper_spec(spec), z_integration)


def theoretical_psd_mean(spec: PSDSupOUSpec) -> np.ndarray:
    q = spec.quadruple
    if not check_moment(q, 1.0).all_hold():
        raise MomentError("first-moment conditions fail")
    c = gamma0(q) + q.nu.rate * np.asarray(q.nu.jumps.mean())
    out = -np.asarray(pi_expectation(q.pi, lambda a: lyapunov_solve(a, c)))
    return 0.5 * (out + out.T)


def theoretical_psd_moments(spec: PSDSupOUSpec, lags) -> SecondOrderSummary:
    """Second-order structure of the matrix process on vec coordinates."""
    q = spec.quadruple
    if not check_moment(q, 2.0).all_hold():
        raise MomentError("second-moment conditions fail")
    mean = theoretical_psd_mean(spec)
    m_vec = q.nu.rate * np.asarray(q.nu.jumps.second_moment())

    def solve_var(a):
        return lyapunov_solve(kron_sum(a), m_vec)

    var = -np.asarray(pi_expectation(q.pi, solve_var))
    var = 0.5 * (var + var.T)
    acov = []
    for h in lags:
        h = float(h)
        if h == 0.0:
            acov.append((0.0, var))
            continue
        def solve_acov(a, h=h):
            k = kron_sum(a)
            return expm(k, h) @ lyapunov_solve(k, m_vec)
        acov.append((h, -np.asarray(pi_expectation(q.pi, solve_acov))))
    return SecondOrderSummary(mean=vec(mean), variance=var, acov=acov)


# ----------------------------------------------------------------------
def sym_basis_coords(x: np.ndarray) -> np.ndarray:
    """Coordinates of a symmetric matrix in the basis E_ii, E_ij + E_ji (i<j):
    the diagonal entries followed by the strict upper triangle, row by row."""
    d = x.shape[0]
    coords = [x[i, i] for i in range(d)]
    coords += [x[i, j] for i in range(d) for j in range(i + 1, d)]
    return np.asarray(coords)


def sym_basis_matrices(d: int) -> list[np.ndarray]:
    out = [np.zeros((d, d)) for _ in range(d * (d + 1) // 2)]
    for i in range(d):
        out[i][i, i] = 1.0
    k = d
    for i in range(d):
        for j in range(i + 1, d):
            out[k][i, j] = out[k][j, i] = 1.0
            k += 1
    return out


@dataclass(frozen=True)
class SVModelSpec:
    """Log-price model: dY = (mu + Sigma beta) dt + Sigma^{1/2} dW + rho(dL)."""

    mu: np.ndarray
    beta_risk: np.ndarray
    rho_op: np.ndarray  # (d, d(d+1)/2) coefficients on the symmetric basis
    vol: PSDSupOUSpec
    y0: np.ndarray

    def __post_init__(self):
        d = self.vol.dim
        mu = np.asarray(self.mu, dtype=float)
        beta = np.asarray(self.beta_risk, dtype=float)
        y0 = np.asarray(self.y0, dtype=float)
        rho = np.asarray(self.rho_op, dtype=float)
        for name, v in (("mu", mu), ("beta_risk", beta), ("y0", y0)):
            if v.shape != (d,):
                raise ValidationError(f"{name} must be a {d}-vector")
        if rho.shape != (d, d * (d + 1) // 2):
            raise ValidationError(f"rho_op must be {d} x {d * (d + 1) // 2}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "beta_risk", beta)
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "rho_op", rho)

    @property
    def dim(self) -> int:
        return self.vol.dim

    def rho(self, x: np.ndarray) -> np.ndarray:
        return self.rho_op @ sym_basis_coords(np.asarray(x))

    def rho_adjoint(self, u: np.ndarray) -> np.ndarray:
        """rho^*(u) in S_d under the trace inner product."""
        d = self.dim
        c = self.rho_op.T @ np.asarray(u)
        out = np.zeros((d, d), dtype=complex if np.iscomplexobj(u) else float)
        for i in range(d):
            out[i, i] = c[i]
        k = d
        for i in range(d):
            for j in range(i + 1, d):
                out[i, j] = out[j, i] = 0.5 * c[k]
                k += 1
        return out


def _psd_sqrt_grid(mats: np.ndarray) -> np.ndarray:
    """Symmetric PSD square roots of a (n, d, d) grid with clamping."""
    sym = 0.5 * (mats + np.swapaxes(mats, -1, -2))
    vals, vecs = np.linalg.eigh(sym)
    worst = float(vals.min())
    if worst < -CLAMP_LIMIT:
        raise NumericalError(
            f"covariance eigenvalue {worst:.3e} below the clamp limit")
    vals = np.clip(vals, 0.0, None)
    return np.einsum("nab,nb,ncb->nac", vecs, np.sqrt(vals), vecs)


@dataclass
class LogPricePaths:
    times: np.ndarray
    y: np.ndarray
    vol: PathBundle


def simulate_log_prices(spec: SVModelSpec, cfg: SimulationConfig) -> LogPricePaths:
    """Euler scheme for the diffusion part with exact subordinator jumps.

    Price and volatility jumps coincide by construction: the price jump is
    rho applied to the matrix-subordinator increment of the same grid cell.
    """
    rep = check_path_conditions(spec.vol.quadruple)
    if not rep.all_hold():
        raise ValidationError("the volatility model must satisfy the "
                              "integrated/SDE-form path conditions")
    vol = simulate_psd_paths(spec.vol, cfg)
    n_t = len(vol.times)
    d = spec.dim
    dt = cfg.dt
    y = np.zeros((cfg.n_paths, n_t, d))
    for j in range(cfg.n_paths):
        rng = np.random.default_rng(child_seed(cfg.seed, j, 2))
        roots = _psd_sqrt_grid(vol.x[j][:-1])
        xi = rng.standard_normal((n_t - 1, d))
        dl = np.diff(vol.l[j], axis=0)
        yj = np.empty((n_t, d))
        yj[0] = spec.y0
        drift = spec.mu[None, :] * dt + (vol.x[j][:-1] @ spec.beta_risk) * dt
        diffu = np.sqrt(dt) * np.einsum("nab,nb->na", roots, xi)
        rho_jumps = np.einsum("km,nm->nk", spec.rho_op,
                              np.stack([sym_basis_coords(m) for m in dl]))
        incr = drift + diffu + rho_jumps
        yj[1:] = spec.y0 + np.cumsum(incr, axis=0)
        y[j] = yj
    return LogPricePaths(times=vol.times, y=y, vol=vol)


# ----------------------------------------------------------------------
def _adjoint_lyap_solve(a: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Solve A^T X + X A = C (complex-capable)."""
    d = a.shape[0]
    eye = np.eye(d)
    k = np.kron(eye, a.T) + np.kron(a.T, eye)
    return np.linalg.solve(k, c.flatten(order="F")).reshape((d, d), order="F")


def _matrix_cumulant(q: GeneratingQuadruple, g0: np.ndarray, w: np.ndarray) -> complex:
    """phi(W) = i tr(W^T gamma0) + rate (E exp(i tr(W^T x)) - 1), the analytic
    extension of the subordinator cumulant to complex matrix arguments."""
    val = 1j * complex(np.sum(w * g0))
    val += q.nu.rate * (q.nu.jumps.cf(w) - 1.0)
    return val


def conditional_cf(spec: SVModelSpec, u, t: float, tol: float = 1e-9) -> complex:
    """Conditional Fourier transform of Y_t given Y_0.

    Restricted to discrete mixing and discrete jump laws so that every
    expectation inside the cumulant is an exact finite sum.
    """
    q = spec.vol.quadruple
    if not q.pi.is_discrete_atoms:
        raise UnsupportedModelError("the conditional transform needs a discrete mixing law")
    jumps = q.nu.jumps
    discrete_ok = (isinstance(jumps, DiscreteJumps) and not jumps.countable) or (
        isinstance(jumps, RankOneWishartJumps)
        and isinstance(jumps.vlaw, DiscreteJumps) and not jumps.vlaw.countable)
    if not discrete_ok:
        raise UnsupportedModelError("the conditional transform needs a discrete jump law")
    u = np.asarray(u, dtype=float)
    t = float(t)
    if t <= 0:
        raise ValidationError("t must be positive")
    if not np.any(u):
        return 1.0 + 0.0j
    g0 = gamma0(q)
    c_in = np.outer(u, spec.beta_risk.astype(complex)) + 0.5j * np.outer(u, u)
    rho_star_u = spec.rho_adjoint(u).astype(complex)
    total = 1j * complex(np.dot(spec.y0 + spec.mu * t, u))
    for w_a, a in zip(q.pi.weights, q.pi.mats):
        core = _adjoint_lyap_solve(a, c_in)
        lam = np.linalg.eigvals(a)
        rho = -float(lam.real.max())
        scale = float(np.abs(core).max() + np.abs(rho_star_u).max() + 1.0)
        s_max = (39.0 + np.log(scale)) / (2.0 * rho) + t

        def h_of(s: float) -> np.ndarray:
            e1 = expm(a, t - s)
            h = e1.T @ core @ e1
            if s <= 0.0:
                e2 = expm(a, -s)
                h = h - e2.T @ core @ e2
            else:
                h = h - (core - rho_star_u)
            return h

        def integrand(s: float) -> np.ndarray:
            val = _matrix_cumulant(q, g0, h_of(s))
            return np.array([val.real, val.imag])

        pieces = 0.0 + 0.0j
        for lo, hi in ((-s_max, 0.0), (0.0, t)):
            res = scipy.integrate.quad_vec(integrand, lo, hi,
                                           epsabs=1e-13, epsrel=tol)[0]
            pieces += complex(res[0], res[1])
        total += w_a * pieces
    out = complex(np.exp(total))
    if not np.isfinite(out.real) or not np.isfinite(out.imag):
        raise NumericalError("conditional transform did not stay finite; the "
                             "analytic extension left its domain")
    return out
