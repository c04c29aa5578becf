"""Multivariate supOU processes: models, checkers, simulation, moments,
characteristic functions and method-of-moments estimation."""

from .basis import (
    CompoundPoisson,
    ConditionEntry,
    ConditionReport,
    GeneratingQuadruple,
    PoissonAtoms,
    check_existence,
    check_moment,
    check_path_conditions,
    gamma0,
    pi_expectation,
    quadruple_from_gamma0,
    sample_poisson_atoms,
)
from .inference import (
    AcovEstimate,
    GammaRayFit,
    empirical_second_order,
    fit_gamma_ray,
    recover_levy_moments,
)
from .jumps import DiscreteJumps, GaussianJumps, RankOneWishartJumps
from .matfun import (
    DecayBound,
    SpectralDecomposition,
    decay_bounds,
    expm,
    frac_matrix_power,
    kron_sum,
    lyapunov_solve,
    modulus_of_injectivity,
)
from .mixing import (
    DiagonalGammaMixing,
    DiscreteMixing,
    EigenFactorMixing,
    GammaRayMixing,
    MixingMeasure,
    MultiGammaRayMixing,
    PolarNegDefMixing,
)
from .process import (
    PathBundle,
    SecondOrderSummary,
    SimulationConfig,
    SupOUSpec,
    acov_gamma_ray_closed_form,
    acov_ray_mixture_closed_form,
    characteristic_function,
    integrated_process,
    paths_from_atoms,
    sample_stationary,
    sde_residual,
    simulate_paths,
    theoretical_acov,
    theoretical_mean,
    theoretical_second_order,
    theoretical_var,
)
from .psd import (
    LogPricePaths,
    PSDSupOUSpec,
    SVModelSpec,
    conditional_cf,
    integrated_cov,
    psd_sde_residual,
    simulate_log_prices,
    simulate_psd_paths,
    theoretical_psd_mean,
    theoretical_psd_moments,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
