"""Single-shot cooling: stopping the exchange at the transient minimum.

The coherent exchange overshoots its own long-time average, so switching
the coupling off at the right moment leaves the cold mode colder than any
steady state.  This script locates that minimum for the reference scenario,
compares it with the dephased steady state and with the incoherent
(rate-equation) model -- which shows no such undershoot -- and converts the
best sweep point into a cooling power per unit mass.
"""

import math

from ionfridge import (REFERENCE_SETUPS, cooling_power_per_mass, fig4_dataset,
                       mode_frequencies, single_shot_point)
from ionfridge.experiments import reference_scenario

# --- one operating point in detail -----------------------------------------
s = reference_scenario("z570")          # 2.5 us grid out to 400 us
pt = single_shot_point(s, include_incoherent=True)
nc_in = 2.63
nc_ss = nc_in - pt.delta_dephased
print("reference point (thermal work drive, nbar_w = 4.44):")
print(f"  input cold occupation        {nc_in:.4f}")
print(f"  dephased steady state        {nc_ss:.4f}")
print(f"  transient minimum            {pt.nbar_c_min:.4f} "
      f"at tau* = {pt.tau_star * 1e6:.1f} us")
print(f"  single-shot advantage        {nc_ss - pt.nbar_c_min:.4f} quanta")
print(f"  incoherent-model minimum     {pt.nbar_c_min_incoherent:.4f} "
      f"(never undershoots the steady state)")
print(f"  classical exchange benchmark delta = {pt.delta_classical:+.4f}")

# --- sweep the work drive at the weaker-coupling setup ----------------------
base = reference_scenario("z425", t_stop=600e-6, num=241)
study = fig4_dataset(base, nbar_w_values=[4.44, 2.16, 1.10, 0.67, 0.37, 0.19])
print("\nwork-drive sweep (weaker-coupling setup):")
print("  nbar_w    tau* (us)   delta_single_shot   delta_dephased")
for p in study.points:
    print(f"  {p.nbar_w:5.2f}    {p.tau_star * 1e6:7.1f}      "
          f"{p.delta_single_shot:+8.4f}          {p.delta_dephased:+8.4f}")

best = max(study.points, key=lambda p: p.delta_single_shot)
omega_c = mode_frequencies(REFERENCE_SETUPS["z425"].trap).omega_c
power = cooling_power_per_mass(best.delta_single_shot, best.tau_star, omega_c)
print(f"\nbest point: nbar_w = {best.nbar_w:g} removes "
      f"{best.delta_single_shot:.3f} quanta in {best.tau_star * 1e6:.1f} us")
print(f"cooling power per unit mass: {power:.2f} W/kg "
      f"(cold mode at {omega_c / (2 * math.pi) / 1e3:.1f} kHz)")
