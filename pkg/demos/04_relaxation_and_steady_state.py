"""Cold-mode relaxation toward the dephased steady state.

Runs a few of the preset relaxation scenarios (thermal work drives of
decreasing occupation, plus squeezed work drives of increasing squeezing),
prints the approach of nbar_c to its infinite-time average, and writes the
full study as CSV datasets that round-trip byte-identically.
"""

from pathlib import Path

import numpy as np

from ionfridge import fig3_dataset, run_scenario, steady_state
from ionfridge.experiments import (SteadyStateRule, read_dataset_csv,
                                   reference_scenario, relaxation_scenarios)

base = reference_scenario("z570", t_stop=400e-6, num=81)

# one trajectory in detail: the strongest thermal drive
traj = run_scenario(base)
ss = steady_state(base)
print("strong thermal drive (nbar_w = 4.44):")
for i in range(0, traj.tau.size, 16):
    print(f"  tau = {traj.tau[i] * 1e6:6.1f} us   "
          f"nbar = ({traj.nbar[0, i]:.4f}, {traj.nbar[1, i]:.4f}, "
          f"{traj.nbar[2, i]:.4f})")
print(f"  dephased steady state nbar_c = {ss.nbar_c:.4f}")

# the windowed average mimics how a measured steady state is taken
windowed = steady_state(base, SteadyStateRule.parse("window:250"))
print(f"  window average (tau > 250 us)  = {windowed.nbar_c:.4f}")

# the preset family: cooling turns into heating as the work drive weakens
study = fig3_dataset(base, scenarios=relaxation_scenarios(base)[:4])
print("\npreset relaxation family:")
for tr in study.traces:
    direction = "cooling" if tr.nbar_c_ss < tr.nbar_c_in else "heating"
    print(f"  {tr.label:18s} nbar_c: {tr.nbar_c_in:.2f} -> "
          f"{tr.nbar_c_ss:.4f}  ({direction})")

# datasets are deterministic: writing twice gives identical bytes
out = Path(__file__).with_name("dataset_out")
out.mkdir(exist_ok=True)
paths = study.write(out)
traj_path = out / "trajectory.csv"
traj.to_csv(traj_path)
metadata, columns, data = read_dataset_csv(traj_path)
print(f"\nwrote {[p.name for p in paths]} and {traj_path.name}")
print(f"trajectory columns: {columns}, "
      f"scenario '{metadata['scenario']['name']}'")
np.testing.assert_allclose(data[:, 1:4].T, traj.nbar, rtol=1e-11)
first = paths[0].read_bytes()
study.write(out)
print("byte-identical on rewrite:", first == paths[0].read_bytes())
