"""Sideband detection models, the linearized thermometry estimator, and
calibration fits.

Two distinct forward models are exposed: a single-time red-sideband
brightness (no decoherence term) used for refrigerator readout, and a
blue-sideband flopping curve with sqrt(n+1)-scaled Rabi rates and
decoherence used for calibration fits.  Fits are weighted damped least
squares (Levenberg-Marquardt) with a numerically differentiated Jacobian;
the free-distribution fit parameterizes the simplex with a softmax so the
constraints hold by construction.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (DomainError, FitConvergenceError, SensitivityError,
                     ValidationError)
from .states import (PhononDistribution, coherent_distribution,
                     squeezed_thermal_distribution,
                     squeezed_vacuum_distribution, thermal_distribution)

TWO_PI = 2.0 * math.pi

# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SidebandConfig:
    """Detection parameters shared by the sideband forward models."""

    omega_rabi: float          # base Rabi rate Omega_{0,1} (rad/s)
    t_rsb: float = 0.0         # red-sideband probe duration (s)
    a_bg: float = 0.0          # background brightness of the readout model
    eta: float = 1.0           # detection efficiency of the readout model
    gamma0: float = 0.0        # base decoherence rate of the flopping model (1/s)

    def __post_init__(self):
        if not 0.0 <= self.a_bg <= 1.0:
            raise DomainError("a_bg must be in [0, 1]")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError("eta must be in [0, 1]")
        if self.gamma0 < 0.0:
            raise DomainError("gamma0 must be >= 0")


@dataclass(frozen=True)
class BrightnessSample:
    """One measured brightness point."""

    t: float          # s
    p_up: float
    sigma: float

    def __post_init__(self):
        if not 0.0 <= self.p_up <= 1.0:
            raise DomainError("p_up must be in [0, 1]")
        if self.sigma <= 0.0:
            raise DomainError("sigma must be > 0")


@dataclass(frozen=True)
class EstimatorConfig:
    """Finite-difference step and target mode of the linearized estimator."""

    delta: float = 0.05
    mode_of_interest: str = "c"

    def __post_init__(self):
        if self.delta <= 0.0:
            raise DomainError("delta must be > 0")
        if self.mode_of_interest not in ("h", "w", "c"):
            raise DomainError("mode_of_interest must be one of h, w, c")


class SimulatedResponse(NamedTuple):
    """Simulated brightness/occupation at the nominal and +/-delta inputs."""

    p_up: float
    nbar: float
    p_up_plus: float
    nbar_plus: float
    p_up_minus: float
    nbar_minus: float


# ---------------------------------------------------------------------------
# Forward models
# ---------------------------------------------------------------------------


def _as_probs(p) -> np.ndarray:
    arr = p.p if isinstance(p, PhononDistribution) else np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("phonon distribution must be a 1-d array")
    if abs(arr.sum() - 1.0) > 1e-6:
        raise DomainError("phonon distribution must be normalized")
    return arr


def red_sideband_brightness(p, cfg: SidebandConfig) -> float:
    """Readout brightness p_up = a + eta sum_n p(n)(1 - cos(sqrt(n) Omega t))/2."""
    probs = _as_probs(p)
    n = np.arange(probs.size)
    flip = 0.5 * (1.0 - np.cos(np.sqrt(n) * cfg.omega_rabi * cfg.t_rsb))
    return float(cfg.a_bg + cfg.eta * (probs @ flip))


def blue_sideband_flopping(p, cfg: SidebandConfig, t_grid,
                           contrast: float = 1.0, background: float = 0.0) -> np.ndarray:
    """Calibration flopping curve

    p_up(t) = (a/2)(1 - sum_n p(n) cos(sqrt(n+1) Omega t) e^{-sqrt(n+1) gamma0 t}) + b

    with contrast a and background b (fit parameters, distinct from the
    readout model's a_bg/eta).
    """
    probs = _as_probs(p)
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    root = np.sqrt(np.arange(probs.size) + 1.0)
    osc = np.cos(np.outer(t, root) * cfg.omega_rabi) * np.exp(-np.outer(t, root) * cfg.gamma0)
    return 0.5 * contrast * (1.0 - osc @ probs) + background


# ---------------------------------------------------------------------------
# Linearized estimator
# ---------------------------------------------------------------------------


def estimate_nbar(p_up_exp: float, simulated: SimulatedResponse,
                  cfg: EstimatorConfig) -> float:
    """Linearized mean-phonon estimate

    nbar_exp = nbar_th + (d nbar / d p_up) (p_up_exp - p_up_th),

    with the derivative taken as the secant through the +/-delta simulations.
    """
    denom = simulated.p_up_plus - simulated.p_up_minus
    if abs(denom) < 1e-6:
        raise SensitivityError(
            f"brightness insensitive to the occupation shift (|dp| = {abs(denom):.2e})"
        )
    slope = (simulated.nbar_plus - simulated.nbar_minus) / denom
    return simulated.nbar + slope * (p_up_exp - simulated.p_up)


# ---------------------------------------------------------------------------
# Damped least squares
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class LMSolution:
    theta: np.ndarray
    cov: np.ndarray
    cost: float
    cost_history: list[float]
    n_iter: int
    converged: bool


def _numeric_jacobian(fn: Callable[[np.ndarray], np.ndarray], theta: np.ndarray,
                      r0: np.ndarray) -> np.ndarray:
    eps = math.sqrt(np.finfo(float).eps)
    jac = np.empty((r0.size, theta.size))
    for i in range(theta.size):
        step = eps * max(abs(theta[i]), 1.0)
        shifted = theta.copy()
        shifted[i] += step
        jac[:, i] = (fn(shifted) - r0) / step
    return jac


def damped_least_squares(fn: Callable[[np.ndarray], np.ndarray], theta0: np.ndarray,
                         max_iter: int = 500, rtol: float = 1e-10) -> LMSolution:
    """Levenberg-Marquardt minimization of sum(fn(theta)^2).

    Steps are accepted only when they strictly decrease the objective, so
    ``cost_history`` (the accepted-iteration costs) is monotone decreasing.
    """
    theta = np.asarray(theta0, dtype=float).copy()
    r = fn(theta)
    cost = float(r @ r)
    history = [cost]
    lam = 1e-3
    converged = cost == 0.0
    n_iter = 0

    while not converged and n_iter < max_iter:
        jac = _numeric_jacobian(fn, theta, r)
        grad = jac.T @ r
        hess = jac.T @ jac
        scale = np.diag(hess).copy()
        if np.any(scale <= 0.0):
            warnings.warn("rank-deficient Jacobian in damped least squares",
                          UserWarning, stacklevel=2)
            scale = np.maximum(scale, 1e-12)

        accepted = False
        for _ in range(60):
            try:
                step = np.linalg.solve(hess + lam * np.diag(scale), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = theta + step
            try:
                r_trial = fn(trial)
                cost_trial = float(r_trial @ r_trial)
            except (OverflowError, FloatingPointError, ValidationError):
                # infeasible trial point: reject and increase damping
                cost_trial = math.inf
            if np.isfinite(cost_trial) and cost_trial < cost:
                accepted = True
                improvement = cost - cost_trial
                theta, r, cost = trial, r_trial, cost_trial
                history.append(cost)
                lam = max(lam / 3.0, 1e-14)
                if improvement <= rtol * max(cost, 1e-300) or cost < 1e-28:
                    converged = True
                break
            lam *= 10.0
            if lam > 1e14:
                break
        n_iter += 1
        if not accepted:
            # damping exhausted: local minimum to machine precision
            converged = True

    if not converged:
        raise FitConvergenceError(f"no convergence after {max_iter} iterations")

    jac = _numeric_jacobian(fn, theta, r)
    hess = jac.T @ jac
    try:
        cov = np.linalg.inv(hess)
    except np.linalg.LinAlgError:
        warnings.warn("singular normal matrix; covariance from pseudo-inverse",
                      UserWarning, stacklevel=2)
        cov = np.linalg.pinv(hess)
    return LMSolution(theta=theta, cov=cov, cost=cost, cost_history=history,
                      n_iter=n_iter, converged=True)


# ---------------------------------------------------------------------------
# Distribution fits
# ---------------------------------------------------------------------------

_FIT_CUTOFF = 150          # ladder length for model distributions during fits
FREE_FIT_NMAX = 13         # free-distribution fit covers n = 0..13

#: restart the free fit from these logit patterns when reduced chi^2 is bad
_FREE_RESTART_CHI2 = 3.0
_FREE_RESTART_LOGITS = (lambda n: -1.0, lambda n: -0.3 * n, lambda n: 1.0)

_MODEL_DIST_PARAMS = {
    "thermal": ("nbar",),
    "coherent": ("mbar",),
    "squeezed_vacuum": ("r",),
    "squeezed_thermal": ("nbar", "r"),
}
_SHAPE_PARAMS = ("a", "b", "omega01", "gamma0")
#: parameters constrained positive via an internal log transform
_LOG_PARAMS = {"nbar", "mbar", "r", "omega01", "gamma0"}

_DEFAULT_SEEDS = {"nbar": 1.0, "mbar": 1.0, "r": 0.5}


@dataclass(eq=False)
class FitResult:
    """Outcome of a distribution fit."""

    model: str
    params: dict[str, float]
    errors: dict[str, float]
    reduced_chi2: float
    cost_history: list[float] = field(repr=False)
    n_iter: int = 0
    populations: np.ndarray | None = None
    population_errors: np.ndarray | None = None


def _model_distribution(model: str, values: dict[str, float]) -> np.ndarray:
    if model == "thermal":
        dist = thermal_distribution(values["nbar"], _FIT_CUTOFF, tail_budget=1.0)
    elif model == "coherent":
        dist = coherent_distribution(values["mbar"], _FIT_CUTOFF, tail_budget=1.0)
    elif model == "squeezed_vacuum":
        dist = squeezed_vacuum_distribution(values["r"], _FIT_CUTOFF, tail_budget=1.0)
    elif model == "squeezed_thermal":
        dist = squeezed_thermal_distribution(values["nbar"], values["r"],
                                             _FIT_CUTOFF, tail_budget=1.0)
    else:   # pragma: no cover
        raise ValidationError(f"unknown model {model!r}")
    return dist.p


def _softmax_with_fixed_head(logits: np.ndarray) -> np.ndarray:
    full = np.concatenate(([0.0], logits))
    full = full - full.max()
    expv = np.exp(full)
    return expv / expv.sum()


def _default_omega_seed(samples: Sequence[BrightnessSample]) -> float:
    """Dominant angular frequency of the detrended brightness record.

    The least-squares cost is multimodal in omega01, so the seed must land
    in the right basin.  A dense periodogram between one cycle per record
    and the Nyquist rate finds the strongest spectral line, which sits at
    the base flopping rate for any low-occupation mixture.
    """
    ts = np.array([s.t for s in samples])
    ys = np.array([s.p_up for s in samples])
    order = np.argsort(ts)
    ts, ys = ts[order], ys[order] - ys.mean()
    span = float(ts[-1] - ts[0])
    if span <= 0.0:
        return TWO_PI / max(float(ts[-1]), 1e-6)
    w_lo = TWO_PI / span
    w_hi = math.pi / max(float(np.median(np.diff(ts))), 1e-12)
    if w_hi <= w_lo:
        return w_lo
    omegas = np.linspace(w_lo, w_hi, 800)
    power = np.abs(np.exp(-1j * np.outer(omegas, ts)) @ ys)
    return float(omegas[int(np.argmax(power))])


def fit_distribution(samples: Sequence[BrightnessSample], model: str,
                     seed: dict[str, float] | None = None,
                     max_iter: int = 500) -> FitResult:
    """Weighted least-squares fit of the flopping model to brightness data.

    ``model`` selects the phonon distribution: one of ``thermal``,
    ``coherent``, ``squeezed_vacuum``, ``squeezed_thermal`` or ``free``
    (softmax-parameterized populations on n = 0..13).  ``seed`` overrides
    the default initial guesses by name; shape parameters are
    a (contrast), b (background), omega01 (rad/s) and gamma0 (1/s).
    """
    if model != "free" and model not in _MODEL_DIST_PARAMS:
        raise ValidationError(f"unknown model {model!r}")
    samples = list(samples)
    seed = dict(seed or {})

    if model == "free":
        dist_names: tuple[str, ...] = tuple(f"logit{n}" for n in range(1, FREE_FIT_NMAX + 1))
    else:
        dist_names = _MODEL_DIST_PARAMS[model]
    names = dist_names + _SHAPE_PARAMS
    n_params = len(names)
    if len(samples) < 3 * n_params:
        raise ValidationError(
            f"need at least {3 * n_params} samples for {n_params} parameters, "
            f"got {len(samples)}"
        )

    ts = np.array([s.t for s in samples])
    ys = np.array([s.p_up for s in samples])
    sigmas = np.array([s.sigma for s in samples])

    defaults = {
        "a": max(float(ys.max() - ys.min()), 0.1),
        "b": float(ys.min()),
        "omega01": _default_omega_seed(samples),
        "gamma0": 0.05 / max(float(ts.max()), 1e-12),
        **_DEFAULT_SEEDS,
    }
    if model == "free":
        defaults.update({name: 0.0 for name in dist_names})
    start = {name: float(seed.get(name, defaults[name])) for name in names}

    def to_internal(values: dict[str, float]) -> np.ndarray:
        out = np.empty(n_params)
        for i, name in enumerate(names):
            v = values[name]
            if name in _LOG_PARAMS:
                out[i] = math.log(max(v, 1e-12))
            else:
                out[i] = v
        return out

    def to_external(theta: np.ndarray) -> dict[str, float]:
        return {
            name: math.exp(theta[i]) if name in _LOG_PARAMS else float(theta[i])
            for i, name in enumerate(names)
        }

    def residuals(theta: np.ndarray) -> np.ndarray:
        values = to_external(theta)
        if model == "free":
            probs = _softmax_with_fixed_head(
                np.array([values[name] for name in dist_names]))
        else:
            probs = _model_distribution(model, values)
        cfg = SidebandConfig(omega_rabi=values["omega01"], gamma0=values["gamma0"])
        curve = blue_sideband_flopping(probs, cfg, ts,
                                       contrast=values["a"], background=values["b"])
        return (curve - ys) / sigmas

    dof = max(len(samples) - n_params, 1)
    solution = damped_least_squares(residuals, to_internal(start),
                                    max_iter=max_iter, rtol=1e-10)
    if model == "free" and solution.cost / dof > _FREE_RESTART_CHI2:
        # the 18-parameter softmax landscape has rare bad basins; retry from
        # fixed alternative logit patterns and keep the lowest cost
        for offset in _FREE_RESTART_LOGITS:
            alt = dict(start)
            alt.update({name: offset(n) for n, name in enumerate(dist_names, start=1)})
            retry = damped_least_squares(residuals, to_internal(alt),
                                         max_iter=max_iter, rtol=1e-10)
            if retry.cost < solution.cost:
                solution = retry
            if solution.cost / dof <= _FREE_RESTART_CHI2:
                break
    values = to_external(solution.theta)

    # delta method back to external parameter space
    jac_diag = np.array([
        values[name] if name in _LOG_PARAMS else 1.0 for name in names
    ])
    cov_ext = solution.cov * np.outer(jac_diag, jac_diag)
    errors = {name: math.sqrt(max(cov_ext[i, i], 0.0)) for i, name in enumerate(names)}
    result = FitResult(model=model, params=values, errors=errors,
                       reduced_chi2=solution.cost / dof,
                       cost_history=solution.cost_history, n_iter=solution.n_iter)

    if model == "free":
        logits = np.array([values[name] for name in dist_names])
        probs = _softmax_with_fixed_head(logits)
        # softmax sensitivity to the free logits (head fixed at 0)
        smax_jac = (np.diag(probs)[:, 1:] - np.outer(probs, probs[1:]))
        cov_logits = solution.cov[:FREE_FIT_NMAX, :FREE_FIT_NMAX]
        cov_p = smax_jac @ cov_logits @ smax_jac.T
        result.populations = probs
        result.population_errors = np.sqrt(np.clip(np.diag(cov_p), 0.0, None))
    else:
        result.populations = _model_distribution(model, values)
    return result


# ---------------------------------------------------------------------------
# Preparation-curve calibration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PreparationFits:
    """Calibration-curve fits with 1-sigma standard errors (SI units)."""

    beta: float = math.nan            # phonons / s^2
    beta_err: float = math.nan
    nbar0: float = math.nan           # residual occupation of the quadratic fit
    nbar0_err: float = math.nan
    mbar: float = math.nan            # phonons per calibration step
    step_slope: float = math.nan      # phonons per random-walk step
    step_slope_err: float = math.nan
    step_offset: float = math.nan
    step_offset_err: float = math.nan
    rho_rate: float = math.nan        # squeezing parameter growth rate (1/s)
    rho_rate_err: float = math.nan


def _linear_fit(design: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = max(y.size - design.shape[1], 1)
    s2 = float(resid @ resid) / dof
    cov = np.linalg.inv(design.T @ design) * s2
    return coef, np.sqrt(np.diag(cov))


def fit_preparation_curves(coherent_curve: tuple[np.ndarray, np.ndarray] | None = None,
                           steps_curve: tuple[np.ndarray, np.ndarray] | None = None,
                           squeeze_curve: tuple[np.ndarray, np.ndarray] | None = None,
                           t_step: float = 100e-6) -> PreparationFits:
    """Fit the preparation calibration curves.

    - ``coherent_curve``: (t, mbar) fitted to n0 + beta t^2
    - ``steps_curve``:    (steps, nbar) fitted to offset + slope * steps
    - ``squeeze_curve``:  (t, r) fitted through the origin to rho_rate * t

    ``mbar`` is reported from beta at the standard step duration ``t_step``.
    """
    out: dict[str, float] = {}
    if coherent_curve is not None:
        t, mbar = (np.asarray(v, dtype=float) for v in coherent_curve)
        if t.size < 3:
            raise ValidationError("coherent curve needs >= 3 points")
        coef, err = _linear_fit(np.column_stack([np.ones_like(t), t ** 2]), mbar)
        out.update(nbar0=coef[0], nbar0_err=err[0], beta=coef[1], beta_err=err[1],
                   mbar=coef[1] * t_step ** 2)
    if steps_curve is not None:
        steps, nbar = (np.asarray(v, dtype=float) for v in steps_curve)
        if steps.size < 3:
            raise ValidationError("steps curve needs >= 3 points")
        coef, err = _linear_fit(np.column_stack([np.ones_like(steps), steps]), nbar)
        out.update(step_offset=coef[0], step_offset_err=err[0],
                   step_slope=coef[1], step_slope_err=err[1])
    if squeeze_curve is not None:
        t, r = (np.asarray(v, dtype=float) for v in squeeze_curve)
        if t.size < 3:
            raise ValidationError("squeeze curve needs >= 3 points")
        coef, err = _linear_fit(t[:, None], r)
        out.update(rho_rate=coef[0], rho_rate_err=err[0])
    if not out:
        raise ValidationError("no calibration curves supplied")
    return PreparationFits(**out)


# ---------------------------------------------------------------------------
# Data ingestion
# ---------------------------------------------------------------------------

_CSV_HEADER = ["t_us", "p_up", "sigma"]


def load_brightness_csv(path) -> list[BrightnessSample]:
    """Read brightness samples from CSV with header ``t_us,p_up,sigma``."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError("empty brightness CSV") from None
        if [h.strip() for h in header] != _CSV_HEADER:
            raise ValidationError(
                f"bad header {header!r}; expected {','.join(_CSV_HEADER)}")
        samples = []
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ValidationError(f"bad row {row!r}")
            t_us, p_up, sigma = (float(v) for v in row)
            samples.append(BrightnessSample(t=t_us * 1e-6, p_up=p_up, sigma=sigma))
    return samples


def save_brightness_csv(path, samples: Sequence[BrightnessSample]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(_CSV_HEADER) + "\n")
        for s in samples:
            fh.write(f"{s.t * 1e6:.12g},{s.p_up:.12g},{s.sigma:.12g}\n")


def synthetic_brightness(p, cfg: SidebandConfig, t_grid, contrast: float,
                         background: float, sigma: float,
                         rng: np.random.Generator) -> list[BrightnessSample]:
    """Noisy flopping samples for round-trip tests and demos."""
    curve = blue_sideband_flopping(p, cfg, t_grid, contrast, background)
    noisy = np.clip(curve + rng.normal(0.0, sigma, curve.size), 0.0, 1.0)
    return [BrightnessSample(t=float(t), p_up=float(y), sigma=sigma)
            for t, y in zip(np.atleast_1d(t_grid), noisy)]
