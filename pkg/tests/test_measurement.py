"""Sideband detection models, the damped least-squares engine, and fits."""

import math

import numpy as np
import pytest

from ionfridge.errors import (DomainError, FitConvergenceError,
                              SensitivityError, ValidationError)
from ionfridge.measurement import (BrightnessSample, EstimatorConfig,
                                   SidebandConfig, SimulatedResponse,
                                   blue_sideband_flopping,
                                   damped_least_squares, estimate_nbar,
                                   fit_distribution, fit_preparation_curves,
                                   load_brightness_csv, red_sideband_brightness,
                                   save_brightness_csv, synthetic_brightness)
from ionfridge.states import thermal_distribution

TWO_PI = 2.0 * math.pi
OMEGA = TWO_PI * 50e3


# ---------------------------------------------------------------------------
# Forward models
# ---------------------------------------------------------------------------


def test_red_sideband_brightness_hand_formula():
    cfg = SidebandConfig(omega_rabi=OMEGA, t_rsb=7e-6, a_bg=0.02, eta=0.9)
    p = np.array([0.5, 0.5])
    # n = 0 never flips; only the n = 1 term contributes
    expected = 0.02 + 0.9 * 0.5 * 0.5 * (1.0 - math.cos(OMEGA * 7e-6))
    assert red_sideband_brightness(p, cfg) == pytest.approx(expected, rel=1e-12)


def test_red_sideband_vacuum_is_background():
    cfg = SidebandConfig(omega_rabi=OMEGA, t_rsb=11e-6, a_bg=0.03, eta=0.95)
    assert red_sideband_brightness(np.array([1.0]), cfg) == pytest.approx(0.03)


def test_blue_sideband_flopping_ground_state():
    cfg = SidebandConfig(omega_rabi=OMEGA, gamma0=800.0)
    t = np.array([0.0, 4e-6, 9e-6])
    out = blue_sideband_flopping(np.array([1.0]), cfg, t, contrast=0.9, background=0.05)
    expected = 0.45 * (1.0 - np.cos(OMEGA * t) * np.exp(-800.0 * t)) + 0.05
    np.testing.assert_allclose(out, expected, rtol=1e-12)


def test_forward_models_reject_unnormalized_input():
    cfg = SidebandConfig(omega_rabi=OMEGA, t_rsb=5e-6)
    with pytest.raises(DomainError):
        red_sideband_brightness(np.array([0.5, 0.2]), cfg)
    with pytest.raises(DomainError):
        blue_sideband_flopping(np.array([[1.0]]), cfg, [1e-6])


def test_sideband_config_validation():
    with pytest.raises(DomainError):
        SidebandConfig(omega_rabi=OMEGA, a_bg=1.5)
    with pytest.raises(DomainError):
        SidebandConfig(omega_rabi=OMEGA, eta=-0.1)
    with pytest.raises(DomainError):
        SidebandConfig(omega_rabi=OMEGA, gamma0=-1.0)
    with pytest.raises(DomainError):
        BrightnessSample(t=1e-6, p_up=1.2, sigma=0.01)
    with pytest.raises(DomainError):
        BrightnessSample(t=1e-6, p_up=0.5, sigma=0.0)


# ---------------------------------------------------------------------------
# Linearized estimator
# ---------------------------------------------------------------------------


def test_estimate_nbar_secant():
    sim = SimulatedResponse(p_up=0.40, nbar=2.00,
                            p_up_plus=0.45, nbar_plus=2.05,
                            p_up_minus=0.35, nbar_minus=1.95)
    cfg = EstimatorConfig(delta=0.05)
    assert estimate_nbar(0.42, sim, cfg) == pytest.approx(2.02, rel=1e-12)
    assert estimate_nbar(0.40, sim, cfg) == pytest.approx(2.00)


def test_estimate_nbar_insensitive_raises():
    sim = SimulatedResponse(p_up=0.4, nbar=2.0,
                            p_up_plus=0.4, nbar_plus=2.05,
                            p_up_minus=0.4, nbar_minus=1.95)
    with pytest.raises(SensitivityError):
        estimate_nbar(0.42, sim, EstimatorConfig())
    with pytest.raises(DomainError):
        EstimatorConfig(delta=0.0)
    with pytest.raises(DomainError):
        EstimatorConfig(mode_of_interest="x")


# ---------------------------------------------------------------------------
# Damped least squares
# ---------------------------------------------------------------------------


def test_lm_quadratic_exact():
    # residuals linear in theta: one Gauss-Newton step must land on (2, -3)
    def fn(theta):
        return np.array([theta[0] - 2.0, theta[1] + 3.0, 0.5 * (theta[0] - 2.0)])

    sol = damped_least_squares(fn, np.array([10.0, 10.0]))
    np.testing.assert_allclose(sol.theta, [2.0, -3.0], atol=1e-10)
    assert sol.converged
    assert sol.cost == pytest.approx(0.0, abs=1e-20)


def test_lm_cost_history_monotone_on_rosenbrock():
    def fn(theta):
        return np.array([10.0 * (theta[1] - theta[0] ** 2), 1.0 - theta[0]])

    sol = damped_least_squares(fn, np.array([-1.2, 1.0]))
    np.testing.assert_allclose(sol.theta, [1.0, 1.0], atol=1e-6)
    hist = np.array(sol.cost_history)
    assert np.all(np.diff(hist) < 0.0)
    assert sol.n_iter <= 500


def test_lm_zero_iterations_raises():
    fn = lambda theta: np.array([theta[0] - 1.0])
    with pytest.raises(FitConvergenceError):
        damped_least_squares(fn, np.array([5.0]), max_iter=0)


def test_lm_rank_deficient_jacobian_warns():
    # second parameter never enters the residuals
    def fn(theta):
        return np.array([theta[0] - 2.0, 2.0 * (theta[0] - 2.0)])

    with pytest.warns(UserWarning):
        sol = damped_least_squares(fn, np.array([7.0, 1.0]))
    assert sol.theta[0] == pytest.approx(2.0, abs=1e-8)


def test_lm_infeasible_trial_points_are_rejected():
    # fn blows up for theta > 10; the fit must survive by damping
    def fn(theta):
        if theta[0] > 10.0:
            raise OverflowError("model exploded")
        return np.array([math.exp(theta[0]) - math.exp(3.0)])

    sol = damped_least_squares(fn, np.array([9.0]))
    assert sol.theta[0] == pytest.approx(3.0, abs=1e-6)


# ---------------------------------------------------------------------------
# Distribution fits
# ---------------------------------------------------------------------------

_DESIGN = dict(contrast=0.95, background=0.02, sigma=0.02)
_SEED = {"omega01": OMEGA * 1.03, "gamma0": 500.0, "a": 0.9, "b": 0.03}


def _samples(model_p, rng):
    cfg = SidebandConfig(omega_rabi=OMEGA, gamma0=600.0)
    t_grid = np.linspace(0.5e-6, 150e-6, 300)
    return synthetic_brightness(model_p, cfg, t_grid, _DESIGN["contrast"],
                                _DESIGN["background"], _DESIGN["sigma"], rng)


def test_fit_thermal_round_trip():
    true_nbar = 1.82
    p = thermal_distribution(true_nbar, cutoff=150, tail_budget=1.0)
    samples = _samples(p, np.random.default_rng(42))
    res = fit_distribution(samples, "thermal", seed={**_SEED, "nbar": 1.5})
    assert res.params["nbar"] == pytest.approx(true_nbar, abs=0.1)
    assert res.errors["nbar"] < 0.1
    assert res.params["omega01"] == pytest.approx(OMEGA, rel=0.01)
    assert res.reduced_chi2 < 2.0
    assert np.all(np.diff(res.cost_history) < 0.0)
    assert res.populations.sum() == pytest.approx(1.0, rel=1e-9)


def test_fit_is_deterministic_for_fixed_data():
    p = thermal_distribution(0.9, cutoff=150, tail_budget=1.0)
    samples = _samples(p, np.random.default_rng(3))
    a = fit_distribution(samples, "thermal", seed={**_SEED, "nbar": 1.0})
    b = fit_distribution(samples, "thermal", seed={**_SEED, "nbar": 1.0})
    assert a.params == b.params


def test_fit_validation_errors():
    p = thermal_distribution(0.9, cutoff=150, tail_budget=1.0)
    samples = _samples(p, np.random.default_rng(5))
    with pytest.raises(ValidationError):
        fit_distribution(samples, "gaussian")
    with pytest.raises(ValidationError):
        fit_distribution(samples[:5], "thermal")  # < 3 x n_params


# ---------------------------------------------------------------------------
# Calibration curves
# ---------------------------------------------------------------------------


def test_fit_preparation_curves_exact_recovery():
    t = np.linspace(0.0, 400e-6, 9)
    beta, n0 = 3.0e6, 0.08
    steps = np.arange(0, 12, dtype=float)
    rho = 2.5e3
    fits = fit_preparation_curves(
        coherent_curve=(t, n0 + beta * t ** 2),
        steps_curve=(steps, 0.11 + 0.042 * steps),
        squeeze_curve=(t, rho * t),
    )
    assert fits.beta == pytest.approx(beta, rel=1e-9)
    assert fits.nbar0 == pytest.approx(n0, rel=1e-9)
    assert fits.mbar == pytest.approx(beta * (100e-6) ** 2, rel=1e-9)
    assert fits.step_slope == pytest.approx(0.042, rel=1e-9)
    assert fits.step_offset == pytest.approx(0.11, rel=1e-9)
    assert fits.rho_rate == pytest.approx(rho, rel=1e-9)
    # exact data: errors collapse to ~0
    assert fits.beta_err == pytest.approx(0.0, abs=1e-3)


def test_fit_preparation_curves_validation():
    with pytest.raises(ValidationError):
        fit_preparation_curves()
    with pytest.raises(ValidationError):
        fit_preparation_curves(coherent_curve=(np.array([0.0, 1e-4]),
                                               np.array([0.1, 0.2])))
    with pytest.raises(ValidationError):
        fit_preparation_curves(squeeze_curve=(np.array([0.0]), np.array([0.0])))


# ---------------------------------------------------------------------------
# CSV I/O and synthetic data
# ---------------------------------------------------------------------------


def test_brightness_csv_round_trip(tmp_path):
    samples = [BrightnessSample(t=1.5e-6, p_up=0.25, sigma=0.02),
               BrightnessSample(t=42e-6, p_up=0.75, sigma=0.015)]
    path = tmp_path / "brightness.csv"
    save_brightness_csv(path, samples)
    back = load_brightness_csv(path)
    assert len(back) == 2
    for orig, rt in zip(samples, back):
        assert rt.t == pytest.approx(orig.t, rel=1e-12)
        assert rt.p_up == orig.p_up
        assert rt.sigma == orig.sigma


def test_brightness_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,up,err\n1,0.5,0.1\n")
    with pytest.raises(ValidationError):
        load_brightness_csv(path)
    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(ValidationError):
        load_brightness_csv(tmp_path / "empty.csv")


def test_synthetic_brightness_is_seeded():
    p = thermal_distribution(0.7, cutoff=60)
    cfg = SidebandConfig(omega_rabi=OMEGA, gamma0=500.0)
    t = np.linspace(1e-6, 60e-6, 20)
    a = synthetic_brightness(p, cfg, t, 0.9, 0.03, 0.02, np.random.default_rng(11))
    b = synthetic_brightness(p, cfg, t, 0.9, 0.03, 0.02, np.random.default_rng(11))
    assert [s.p_up for s in a] == [s.p_up for s in b]
    assert all(0.0 <= s.p_up <= 1.0 for s in a)
