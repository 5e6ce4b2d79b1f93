"""Sideband thermometry: from brightness records to phonon distributions.

Detection happens on the blue sideband of a shared optical qubit: the
flopping signal p_up(t) is a sum of number-state Rabi oscillations whose
frequencies scale as sqrt(n + 1), so the time record encodes the phonon
distribution.  This script

  1. synthesizes a noisy flopping record for a known thermal state,
  2. fits it with the matching model and with a model-free population fit,
  3. runs the linearized red-sideband estimator on simulated brightness,

and prints the recovered parameters next to the truth.
"""

import numpy as np

from ionfridge import (EstimatorConfig, SidebandConfig, SimulatedResponse,
                       estimate_nbar, fit_distribution,
                       red_sideband_brightness, squeezed_thermal_distribution,
                       synthetic_brightness, thermal_distribution)

rng = np.random.default_rng(42)
cfg = SidebandConfig(omega_rabi=2 * np.pi * 50e3, gamma0=600.0)
t_grid = np.linspace(0.5e-6, 150e-6, 300)

# --- thermal state, matching model ------------------------------------------
truth = thermal_distribution(1.82, cutoff=150, tail_budget=1.0)
samples = synthetic_brightness(truth, cfg, t_grid, 0.95, 0.02, 0.02, rng)
fit = fit_distribution(samples, "thermal")
print("thermal fit:")
print(f"  true nbar 1.82 -> fitted {fit.params['nbar']:.3f} "
      f"+/- {fit.errors['nbar']:.3f}")
print(f"  reduced chi^2 = {fit.reduced_chi2:.2f} "
      f"({fit.n_iter} fitter iterations)")

# --- squeezed thermal state, model-free fit ---------------------------------
st = squeezed_thermal_distribution(0.77, 1.2, cutoff=150, tail_budget=1.0)
samples = synthetic_brightness(st, cfg, t_grid, 0.95, 0.02, 0.02,
                               np.random.default_rng(11))
free = fit_distribution(samples, "free")
print("\nmodel-free population fit of a squeezed thermal record:")
print("   n   fitted p(n)   true p(n)")
ref = st.p[:14] / st.p[:14].sum()       # truth on the fit's support
for n in range(7):
    print(f"  {n:2d}    {free.populations[n]:.4f}       {ref[n]:.4f}")
print("(even-n surplus from the squeezing is clearly resolved)")

# --- linearized red-sideband estimator --------------------------------------
# one fixed-duration probe; sensitivity from simulations at nbar +/- delta
probe = SidebandConfig(omega_rabi=2 * np.pi * 50e3, t_rsb=12e-6,
                       a_bg=0.05, eta=0.9)
est_cfg = EstimatorConfig(delta=0.05)


def brightness_at(nbar: float) -> float:
    d = thermal_distribution(nbar, cutoff=80, tail_budget=1.0)
    return red_sideband_brightness(d, probe)


nbar_th = 0.40                          # nominal occupation of the simulation
simulated = SimulatedResponse(
    p_up=brightness_at(nbar_th), nbar=nbar_th,
    p_up_plus=brightness_at(nbar_th + est_cfg.delta),
    nbar_plus=nbar_th + est_cfg.delta,
    p_up_minus=brightness_at(nbar_th - est_cfg.delta),
    nbar_minus=nbar_th - est_cfg.delta)
p_up_exp = brightness_at(0.45)          # "measured" record, slightly hotter
est = estimate_nbar(p_up_exp, simulated, est_cfg)
print(f"\nlinearized red-sideband estimate: true nbar 0.45 -> {est:.4f}")
print(f"(secant through simulations at {nbar_th} +/- {est_cfg.delta})")
