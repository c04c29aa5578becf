"""Command-line front end.

One JSON config document drives every task: model definition (the
generating quadruple), the simulation grid, lag grids and evaluation
points.  Validation is strict: unknown keys are rejected with their full
key path, so a typo cannot silently change a mathematical parameter.

    supou <task> --config <file> [--seed N] [--out <dir>]

Tasks: simulate | moments | acov | estimate | check | cf.
Exit codes: 0 success, 2 validation error, 3 numerical failure,
4 precondition (checker) failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np
import scipy.special

from .basis import (
    CompoundPoisson,
    GeneratingQuadruple,
    check_existence,
    check_moment,
    check_path_conditions,
    quadruple_from_gamma0,
)
from .errors import (
    NumericalError,
    FitFailureError,
    PreconditionError,
    SupOUError,
    UnsupportedModelError,
    ValidationError,
)
from .inference import empirical_second_order, fit_gamma_ray, recover_levy_moments
from .jumps import DiscreteJumps, GaussianJumps, RankOneWishartJumps
from .mixing import (
    DiagonalGammaMixing,
    DiscreteMixing,
    EigenFactorMixing,
    GammaRayMixing,
    MultiGammaRayMixing,
    PolarNegDefMixing,
)
from .process import (
    SimulationConfig,
    SupOUSpec,
    characteristic_function,
    simulate_paths,
    theoretical_second_order,
)
from .psd import PSDSupOUSpec, simulate_psd_paths, theoretical_psd_moments

TASKS = ("simulate", "moments", "acov", "estimate", "check", "cf")
SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_PRECONDITION = 4


def _fail(path: str, message: str):
    raise ValidationError(f"{path}: {message}")


def _check_keys(obj: dict, allowed: set[str], required: set[str], path: str):
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in allowed:
            _fail(path, f"unknown key {key!r}")
    for key in required:
        if key not in obj:
            _fail(path, f"missing required key {key!r}")


def _number(obj, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        _fail(path, "expected a number")
    if not np.isfinite(obj):
        _fail(path, "number must be finite")
    return float(obj)


def _integer(obj, path: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        _fail(path, "expected an integer")
    return int(obj)


def _vector(obj, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        _fail(path, "expected a nonempty array of numbers")
    return np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(obj)])


def _matrix(obj, path: str) -> np.ndarray:
    """Nested row-major lists, or {"sym": true, "lower": [[...], ...]}."""
    if isinstance(obj, dict):
        _check_keys(obj, {"sym", "lower"}, {"sym", "lower"}, path)
        if obj["sym"] is not True:
            _fail(f"{path}.sym", "must be true")
        rows = obj["lower"]
        if not isinstance(rows, list) or not rows:
            _fail(f"{path}.lower", "expected a lower-triangular list of rows")
        d = len(rows)
        out = np.zeros((d, d))
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != i + 1:
                _fail(f"{path}.lower[{i}]", f"expected {i + 1} entries")
            for j, v in enumerate(row):
                out[i, j] = out[j, i] = _number(v, f"{path}.lower[{i}][{j}]")
        return out
    if not isinstance(obj, list) or not obj:
        _fail(path, "expected a matrix (nested arrays)")
    rows = [_vector(r, f"{path}[{i}]") for i, r in enumerate(obj)]
    d = len(rows[0])
    if any(len(r) != d for r in rows):
        _fail(path, "rows must have equal length")
    return np.array(rows)


def _point(obj, path: str, matrix_valued: bool) -> np.ndarray:
    return _matrix(obj, path) if matrix_valued else _vector(obj, path)


# ----------------------------------------------------------------------
def _load_jumps(obj, path: str, dim: int, matrix_valued: bool):
    _check_keys(obj, {"kind", "atoms", "mean", "cov", "v"}, {"kind"}, path)
    kind = obj.get("kind")
    if kind == "discrete":
        _check_keys(obj, {"kind", "atoms"}, {"kind", "atoms"}, path)
        atoms = obj["atoms"]
        if not isinstance(atoms, list) or not atoms:
            _fail(f"{path}.atoms", "expected a nonempty list")
        parsed = []
        for i, a in enumerate(atoms):
            _check_keys(a, {"prob", "x"}, {"prob", "x"}, f"{path}.atoms[{i}]")
            parsed.append((_number(a["prob"], f"{path}.atoms[{i}].prob"),
                           _point(a["x"], f"{path}.atoms[{i}].x", matrix_valued)))
        law = DiscreteJumps(atoms=parsed)
    elif kind == "gaussian":
        if matrix_valued:
            _fail(path, "gaussian jumps are vector-valued only")
        _check_keys(obj, {"kind", "mean", "cov"}, {"kind", "mean", "cov"}, path)
        law = GaussianJumps(_vector(obj["mean"], f"{path}.mean"),
                            _matrix(obj["cov"], f"{path}.cov"))
    elif kind == "rank_one":
        if not matrix_valued:
            _fail(path, "rank-one jumps are matrix-valued only")
        _check_keys(obj, {"kind", "v"}, {"kind", "v"}, path)
        law = RankOneWishartJumps(_load_jumps(obj["v"], f"{path}.v", dim, False))
    else:
        _fail(f"{path}.kind", f"unknown jump kind {kind!r}")
    if law.dim != dim:
        _fail(path, f"jump dimension {law.dim} does not match model dim {dim}")
    return law


def _load_mixing(obj, path: str, dim: int):
    if not isinstance(obj, dict) or "kind" not in obj:
        _fail(path, "expected an object with a 'kind' key")
    kind = obj["kind"]
    if kind == "discrete":
        _check_keys(obj, {"kind", "atoms"}, {"kind", "atoms"}, path)
        ws, mats = [], []
        for i, a in enumerate(obj["atoms"]):
            _check_keys(a, {"w", "a"}, {"w", "a"}, f"{path}.atoms[{i}]")
            ws.append(_number(a["w"], f"{path}.atoms[{i}].w"))
            mats.append(_matrix(a["a"], f"{path}.atoms[{i}].a"))
        mix = DiscreteMixing(ws, mats)
    elif kind == "gamma_ray":
        _check_keys(obj, {"kind", "b", "alpha", "beta"},
                    {"kind", "b", "alpha", "beta"}, path)
        alpha = _number(obj["alpha"], f"{path}.alpha")
        if alpha <= 1.0:
            _fail(f"{path}.alpha", "alpha must exceed 1 (the stationary "
                                   "process does not exist otherwise)")
        mix = GammaRayMixing(_matrix(obj["b"], f"{path}.b"), alpha,
                             _number(obj["beta"], f"{path}.beta"))
    elif kind == "multi_gamma_ray":
        _check_keys(obj, {"kind", "rays"}, {"kind", "rays"}, path)
        rays = []
        for i, r in enumerate(obj["rays"]):
            _check_keys(r, {"w", "b", "alpha", "beta"},
                        {"w", "b", "alpha", "beta"}, f"{path}.rays[{i}]")
            alpha = _number(r["alpha"], f"{path}.rays[{i}].alpha")
            if alpha <= 1.0:
                _fail(f"{path}.rays[{i}].alpha", "alpha must exceed 1")
            rays.append((_number(r["w"], f"{path}.rays[{i}].w"),
                         _matrix(r["b"], f"{path}.rays[{i}].b"),
                         alpha, _number(r["beta"], f"{path}.rays[{i}].beta")))
        mix = MultiGammaRayMixing(rays)
    elif kind == "diagonal_gamma":
        _check_keys(obj, {"kind", "alphas", "betas"},
                    {"kind", "alphas", "betas"}, path)
        alphas = _vector(obj["alphas"], f"{path}.alphas")
        if np.any(alphas <= 1.0):
            _fail(f"{path}.alphas", "every alpha must exceed 1")
        mix = DiagonalGammaMixing(alphas, _vector(obj["betas"], f"{path}.betas"))
    elif kind == "polar":
        _check_keys(obj, {"kind", "atoms"}, {"kind", "atoms"}, path)
        atoms = []
        for i, a in enumerate(obj["atoms"]):
            _check_keys(a, {"w", "v", "alpha", "beta"},
                        {"w", "v", "alpha", "beta"}, f"{path}.atoms[{i}]")
            atoms.append((_number(a["w"], f"{path}.atoms[{i}].w"),
                          _matrix(a["v"], f"{path}.atoms[{i}].v"),
                          _number(a["alpha"], f"{path}.atoms[{i}].alpha"),
                          _number(a["beta"], f"{path}.atoms[{i}].beta")))
        mix = PolarNegDefMixing(atoms=atoms)
    elif kind == "polar_family":
        keys = {"kind", "weight_exponent", "diag_base", "diag_decay",
                "alpha", "beta_base", "beta_exponent"}
        _check_keys(obj, keys, keys, path)
        p = _number(obj["weight_exponent"], f"{path}.weight_exponent")
        if p <= 1.0:
            _fail(f"{path}.weight_exponent", "must exceed 1 for summable weights")
        base = _vector(obj["diag_base"], f"{path}.diag_base")
        decay = _vector(obj["diag_decay"], f"{path}.diag_decay")
        if len(decay) != len(base):
            _fail(f"{path}.diag_decay", "must match diag_base length")
        alpha = _number(obj["alpha"], f"{path}.alpha")
        beta0 = _number(obj["beta_base"], f"{path}.beta_base")
        bexp = _number(obj["beta_exponent"], f"{path}.beta_exponent")
        norm = 1.0 / scipy.special.zeta(p, 1)

        def family(n: int):
            return (norm * n ** (-p), np.diag(base + decay / n),
                    alpha, beta0 * n ** (-bexp))

        mix = PolarNegDefMixing(family=family, dim=len(base))
    elif kind == "eigen_factor":
        _check_keys(obj, {"kind", "s", "d"}, {"kind", "s", "d"}, path)
        sw, sm, dw, dm = [], [], [], []
        for i, a in enumerate(obj["s"]):
            _check_keys(a, {"w", "mat"}, {"w", "mat"}, f"{path}.s[{i}]")
            sw.append(_number(a["w"], f"{path}.s[{i}].w"))
            sm.append(_matrix(a["mat"], f"{path}.s[{i}].mat"))
        for i, a in enumerate(obj["d"]):
            _check_keys(a, {"w", "diag"}, {"w", "diag"}, f"{path}.d[{i}]")
            dw.append(_number(a["w"], f"{path}.d[{i}].w"))
            dm.append(np.diag(_vector(a["diag"], f"{path}.d[{i}].diag")))
        mix = EigenFactorMixing(sw, sm, dw, dm)
    else:
        _fail(f"{path}.kind", f"unknown mixing kind {kind!r}")
    if mix.dim != dim:
        _fail(path, f"mixing dimension {mix.dim} does not match model dim {dim}")
    return mix


def _load_model(obj, path: str) -> GeneratingQuadruple:
    keys = {"dim", "space", "gamma", "gamma0", "sigma_gauss", "nu", "pi"}
    _check_keys(obj, keys, {"dim", "nu", "pi"}, path)
    dim = _integer(obj["dim"], f"{path}.dim")
    if dim < 1:
        _fail(f"{path}.dim", "dim must be >= 1")
    space = obj.get("space", "vector")
    if space not in ("vector", "symmetric"):
        _fail(f"{path}.space", "space must be 'vector' or 'symmetric'")
    matrix_valued = space == "symmetric"
    nu_obj = obj["nu"]
    _check_keys(nu_obj, {"rate", "jumps"}, {"rate", "jumps"}, f"{path}.nu")
    rate = _number(nu_obj["rate"], f"{path}.nu.rate")
    if rate < 0:
        _fail(f"{path}.nu.rate", "rate must be nonnegative")
    jumps = _load_jumps(nu_obj["jumps"], f"{path}.nu.jumps", dim, matrix_valued)
    nu = CompoundPoisson(rate=rate, jumps=jumps)
    pi = _load_mixing(obj["pi"], f"{path}.pi", dim)
    sigma = None
    if "sigma_gauss" in obj:
        if matrix_valued:
            _fail(f"{path}.sigma_gauss", "no Gaussian part in the symmetric case")
        sigma = _matrix(obj["sigma_gauss"], f"{path}.sigma_gauss")
    if ("gamma" in obj) == ("gamma0" in obj):
        _fail(path, "provide exactly one of 'gamma' or 'gamma0'")
    if "gamma" in obj:
        gamma = _point(obj["gamma"], f"{path}.gamma", matrix_valued)
        return GeneratingQuadruple(gamma=gamma, sigma_gauss=sigma, nu=nu, pi=pi)
    g0 = _point(obj["gamma0"], f"{path}.gamma0", matrix_valued)
    return quadruple_from_gamma0(g0, sigma, nu, pi)


@dataclass
class RunConfig:
    task: str
    quadruple: GeneratingQuadruple
    seed: int
    sim: SimulationConfig | None = None
    lags: list[float] = field(default_factory=list)
    u_points: list[np.ndarray] = field(default_factory=list)
    moment_order: float = 2.0
    max_lag: int = 20
    input_path: str | None = None
    output_path: str | None = None


def load_config(document) -> RunConfig:
    """Validate a config document (dict or JSON text) into a RunConfig."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ValidationError(f"config is not valid JSON: {e}") from e
    keys = {"schema", "task", "seed", "model", "sim", "lags", "u_points",
            "moment_order", "max_lag", "input_path", "output_path"}
    _check_keys(document, keys, {"schema", "task", "model"}, "config")
    if document["schema"] != SCHEMA_VERSION:
        _fail("config.schema", f"unsupported schema {document['schema']!r}")
    task = document["task"]
    if task not in TASKS:
        _fail("config.task", f"task must be one of {TASKS}")
    quadruple = _load_model(document["model"], "config.model")
    seed = _integer(document.get("seed", 0), "config.seed")
    cfg = RunConfig(task=task, quadruple=quadruple, seed=seed)
    if "sim" in document:
        s = document["sim"]
        skeys = {"t_start", "t_end", "dt", "trunc_tol", "n_paths"}
        _check_keys(s, skeys, {"t_start", "t_end", "dt"}, "config.sim")
        cfg.sim = SimulationConfig(
            t_start=_number(s["t_start"], "config.sim.t_start"),
            t_end=_number(s["t_end"], "config.sim.t_end"),
            dt=_number(s["dt"], "config.sim.dt"),
            trunc_tol=_number(s.get("trunc_tol", 1e-3), "config.sim.trunc_tol"),
            n_paths=_integer(s.get("n_paths", 1), "config.sim.n_paths"),
            seed=seed)
    if "lags" in document:
        cfg.lags = [_number(v, f"config.lags[{i}]")
                    for i, v in enumerate(document["lags"])]
        if any(h < 0 for h in cfg.lags):
            _fail("config.lags", "lags must be nonnegative")
    if "u_points" in document:
        cfg.u_points = [_vector(v, f"config.u_points[{i}]")
                        for i, v in enumerate(document["u_points"])]
    if "moment_order" in document:
        cfg.moment_order = _number(document["moment_order"], "config.moment_order")
        if cfg.moment_order <= 0:
            _fail("config.moment_order", "must be positive")
    if "max_lag" in document:
        cfg.max_lag = _integer(document["max_lag"], "config.max_lag")
        if cfg.max_lag < 5:
            _fail("config.max_lag", "at least 5 lags are required")
    if "input_path" in document:
        cfg.input_path = str(document["input_path"])
    if "output_path" in document:
        cfg.output_path = str(document["output_path"])
    if task == "estimate":
        if cfg.input_path is None:
            _fail("config.input_path", "the estimate task needs an input path")
        if not os.path.exists(cfg.input_path):
            _fail("config.input_path", f"file not found: {cfg.input_path}")
    if task in ("simulate",) and cfg.sim is None:
        _fail("config.sim", "the simulate task needs a sim block")
    if task == "cf" and not cfg.u_points:
        _fail("config.u_points", "the cf task needs evaluation points")
    if task == "acov" and not cfg.lags:
        _fail("config.lags", "the acov task needs a lag grid")
    return cfg


# ----------------------------------------------------------------------
def _fmt(x: float) -> str:
    return repr(float(x))


def _write_lines(path: str, lines):
    with open(path, "w") as fh:
        for line in lines:
            fh.write(line + "\n")


def write_paths_csv(path: str, bundle) -> None:
    d = bundle.gamma0.shape[0]
    if bundle.matrix_valued:
        cols = [f"S_{i + 1}{j + 1}" for j in range(d) for i in range(d)]
        lcols = [f"L_{i + 1}{j + 1}" for j in range(d) for i in range(d)]
    else:
        cols = [f"X_{i + 1}" for i in range(d)]
        lcols = [f"L_{i + 1}" for i in range(d)]
    lines = ["t,path_id," + ",".join(cols + lcols)]
    for j in range(bundle.n_paths):
        for k, t in enumerate(bundle.times):
            if bundle.matrix_valued:
                xv = bundle.x[j, k].flatten(order="F")
                lv = bundle.l[j, k].flatten(order="F")
            else:
                xv = bundle.x[j, k]
                lv = bundle.l[j, k]
            vals = [_fmt(t), str(j)] + [_fmt(v) for v in xv] + [_fmt(v) for v in lv]
            lines.append(",".join(vals))
    _write_lines(path, lines)


def read_paths_csv(path: str):
    """Load a path CSV; returns (times, x, l, matrix_valued) with x per path."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if header[:2] != ["t", "path_id"]:
        raise ValidationError("path CSV must start with t,path_id columns")
    names = header[2:]
    matrix_valued = any(n.startswith("S_") for n in names)
    x_cols = [i for i, n in enumerate(names) if n.startswith(("X_", "S_"))]
    l_cols = [i for i, n in enumerate(names) if n.startswith("L_")]
    data = {}
    for row in rows:
        pid = int(row[1])
        data.setdefault(pid, []).append((float(row[0]),
                                         [float(row[2 + i]) for i in x_cols],
                                         [float(row[2 + i]) for i in l_cols]))
    pids = sorted(data)
    times = np.array([r[0] for r in data[pids[0]]])
    x = np.array([[r[1] for r in data[p]] for p in pids])
    l = np.array([[r[2] for r in data[p]] for p in pids])
    if matrix_valued:
        d = int(round(np.sqrt(x.shape[-1])))
        x = x.reshape(x.shape[0], x.shape[1], d, d).transpose(0, 1, 3, 2)
        l = l.reshape(l.shape[0], l.shape[1], d, d).transpose(0, 1, 3, 2)
    return times, x, l, matrix_valued


def write_summary_csv(path: str, summary) -> None:
    lines = ["stat,lag,row,col,value"]
    mean = np.atleast_1d(summary.mean)
    for i, v in enumerate(mean):
        lines.append(f"mean,0.0,{i},0,{_fmt(v)}")
    var = summary.variance
    for i in range(var.shape[0]):
        for j in range(var.shape[1]):
            lines.append(f"var,0.0,{i},{j},{_fmt(var[i, j])}")
    for h, m in summary.acov:
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                lines.append(f"acov,{_fmt(h)},{i},{j},{_fmt(m[i, j])}")
    _write_lines(path, lines)


def read_summary_csv(path: str):
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "stat,lag,row,col,value":
            raise ValidationError("unexpected summary CSV header")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    mean = {}
    var = {}
    acov = {}
    for stat, lag, i, j, v in rows:
        i, j, v, lag = int(i), int(j), float(v), float(lag)
        if stat == "mean":
            mean[i] = v
        elif stat == "var":
            var[(i, j)] = v
        elif stat == "acov":
            acov.setdefault(lag, {})[(i, j)] = v
    d = max(i for i, _ in var) + 1
    mean_v = np.array([mean[i] for i in range(len(mean))])
    var_m = np.array([[var[(i, j)] for j in range(d)] for i in range(d)])
    acov_l = [(h, np.array([[acov[h][(i, j)] for j in range(d)] for i in range(d)]))
              for h in sorted(acov)]
    return mean_v, var_m, acov_l


def write_cf_csv(path: str, points, values) -> None:
    d = len(points[0])
    lines = [",".join([f"u_{i + 1}" for i in range(d)] + ["re", "im"])]
    for u, v in zip(points, values):
        lines.append(",".join([_fmt(x) for x in u] + [_fmt(v.real), _fmt(v.imag)]))
    _write_lines(path, lines)


# ----------------------------------------------------------------------
_DEFAULT_OUTPUT = {
    "simulate": "paths.csv",
    "moments": "moments.csv",
    "acov": "acov.csv",
    "estimate": "fit.json",
    "check": "report.json",
    "cf": "cf.csv",
}


def _spec_for(cfg: RunConfig):
    if cfg.quadruple.matrix_valued:
        return PSDSupOUSpec(cfg.quadruple)
    return SupOUSpec(cfg.quadruple)


def run(cfg: RunConfig, out_dir: str | None = None) -> str:
    """Execute the task; returns the artifact path."""
    out = cfg.output_path or _DEFAULT_OUTPUT[cfg.task]
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        out = os.path.join(out_dir, out)
    if cfg.task == "check":
        report = {"schema": SCHEMA_VERSION,
                  "space": "symmetric" if cfg.quadruple.matrix_valued else "vector",
                  "existence": check_existence(cfg.quadruple).to_dict(),
                  "moment": {"order": cfg.moment_order,
                             **check_moment(cfg.quadruple, cfg.moment_order).to_dict()}}
        try:
            report["path"] = check_path_conditions(cfg.quadruple).to_dict()
        except UnsupportedModelError as e:
            report["path"] = {"error": str(e)}
        with open(out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return out
    if cfg.task == "simulate":
        spec = _spec_for(cfg)
        sim = cfg.sim
        if cfg.quadruple.matrix_valued:
            bundle = simulate_psd_paths(spec, sim)
        else:
            bundle = simulate_paths(spec, sim)
        write_paths_csv(out, bundle)
        return out
    if cfg.task in ("moments", "acov"):
        lags = cfg.lags if cfg.task == "acov" else [0.0]
        if cfg.quadruple.matrix_valued:
            summary = theoretical_psd_moments(_spec_for(cfg), lags)
        else:
            summary = theoretical_second_order(_spec_for(cfg), lags)
        write_summary_csv(out, summary)
        return out
    if cfg.task == "cf":
        spec = _spec_for(cfg)
        values = [characteristic_function(spec, u) for u in cfg.u_points]
        write_cf_csv(out, cfg.u_points, values)
        return out
    if cfg.task == "estimate":
        times, x, _, matrix_valued = read_paths_csv(cfg.input_path)
        if matrix_valued:
            raise UnsupportedModelError("estimation reads vector-valued paths")
        delta = float(times[1] - times[0])
        mean, est = empirical_second_order(x[0], delta, cfg.max_lag)
        fit = fit_gamma_ray(est)
        gamma1, m_hat = recover_levy_moments(mean, est.matrices[0], fit)
        doc = {"schema": SCHEMA_VERSION,
               "alpha_hat": fit.alpha_hat,
               "b_hat": fit.b_hat.tolist(),
               "gamma1_hat": gamma1.tolist(),
               "m_hat": m_hat.tolist(),
               "diagnostics": {
                   "nls_residual": fit.diagnostics["nls_residual"],
                   "lambda_hat": fit.diagnostics["lambda_hat"],
                   "grad_norm": fit.diagnostics["grad_norm"],
                   "imag_residue": fit.diagnostics["imag_residue"],
                   "n_obs": est.n_obs,
                   "delta": est.delta,
               }}
        with open(out, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return out
    raise ValidationError(f"unknown task {cfg.task!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="supou",
        description="supOU processes: simulate, analyze and estimate")
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            document = json.load(fh)
        if not isinstance(document, dict):
            raise ValidationError("config must be a JSON object")
        if args.seed is not None:
            document["seed"] = args.seed
        if document.get("task") != args.task:
            document["task"] = args.task
        cfg = load_config(document)
        artifact = run(cfg, out_dir=args.out)
    except (ValidationError, json.JSONDecodeError, OSError) as e:
        print(f"error kind=validation detail={e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, FitFailureError) as e:
        print(f"error kind=numerical detail={e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PreconditionError as e:
        print(f"error kind=precondition detail={e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SupOUError as e:
        print(f"error kind=numerical detail={e}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(artifact)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
