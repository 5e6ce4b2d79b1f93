"""Acceptance suite: one test per contracted capability of the package.

Each test prints a single ``criterion NN PASS/FAIL`` line with the measured
quantity and its pinned tolerance, then asserts it.  Tolerances are part of
the package contract and must not be loosened; experiment-comparison checks
(criteria 5, 9, 13) carry the error bars of the reference measurements,
exact numerical checks (1-4, 8) are at solver precision.
"""

import math
import time
import warnings

import numpy as np
import pytest

from ionfridge import oracle
from ionfridge.benchmarks import OccupationTriple, cooling_condition
from ionfridge.dynamics import (EnsembleSpectrum, assemble_initial,
                                dense_oracle_evolve)
from ionfridge.experiments import (Scenario, fig3_dataset, fig4_dataset,
                                   reference_scenario, relaxation_scenarios,
                                   single_shot_point, steady_state)
from ionfridge.fockspace import TruncationPolicy
from ionfridge.measurement import (FREE_FIT_NMAX, SidebandConfig,
                                   fit_distribution, synthetic_brightness)
from ionfridge.states import (ModePrep, squeezed_thermal_distribution,
                              squeezed_thermal_mean,
                              squeezed_vacuum_distribution,
                              thermal_distribution)
from ionfridge.trap import (REFERENCE_SETUPS, CouplingFormulaWarning,
                            cooling_power_per_mass, coupling_rate,
                            mode_frequencies)

TWO_PI = 2.0 * math.pi


def _verdict(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:02d} {'PASS' if ok else 'FAIL'}: {detail}")


def _oracle_comparison(preps, cap: int):
    grid = np.linspace(0.0, 400e-6, 10)
    xi = TWO_PI * 2.64e3
    policy = TruncationPolicy(epsilon=1e-12, n_max_h=cap, n_max_w=cap, n_max_c=cap)
    ensemble = assemble_initial(preps, policy, xi)
    sector = EnsembleSpectrum(ensemble).means_at(grid)
    dense = dense_oracle_evolve(preps, xi, grid, (cap, cap, cap))
    return float(np.abs(sector - dense).max())


def test_criterion_01_oracle_equivalence_thermal():
    """Sector method vs dense full-space oracle, thermal preparations."""
    t0 = time.perf_counter()
    preps = (ModePrep.thermal_state(0.3), ModePrep.thermal_state(0.5),
             ModePrep.thermal_state(0.4))
    dev = _oracle_comparison(preps, cap=6)
    elapsed = time.perf_counter() - t0
    ok = dev < 1e-9 and elapsed < 10.0
    _verdict(1, ok, f"max|sector - dense| = {dev:.3e} (tol 1e-9), {elapsed:.2f} s (< 10 s)")
    assert dev < 1e-9
    assert elapsed < 10.0


def test_criterion_02_squeezed_coherence_irrelevance():
    """Squeeze coherences in the dense oracle never move the mean occupations."""
    t0 = time.perf_counter()
    preps = (ModePrep.thermal_state(0.3),
             ModePrep.squeezed_thermal_state(0.3, 0.8),
             ModePrep.thermal_state(0.4))
    dev = _oracle_comparison(preps, cap=8)
    elapsed = time.perf_counter() - t0
    ok = dev < 1e-9 and elapsed < 60.0
    _verdict(2, ok, f"max|sector - dense| = {dev:.3e} (tol 1e-9), {elapsed:.2f} s (< 60 s)")
    assert dev < 1e-9
    assert elapsed < 60.0


def test_criterion_03_conservation_on_relaxation_grid():
    """n_h + n_w and n_h + n_c are exact constants of the evolution."""
    s = reference_scenario("z570")
    means = EnsembleSpectrum(
        assemble_initial(s.preps, s.truncation, s.xi)).means_at(s.time_grid)
    drift_hw = float(np.ptp(means[0] + means[1]))
    drift_hc = float(np.ptp(means[0] + means[2]))
    worst = max(drift_hw, drift_hc)
    ok = worst < 1e-9
    _verdict(3, ok, f"max conserved-sum drift = {worst:.3e} (tol 1e-9)")
    assert drift_hw < 1e-9
    assert drift_hc < 1e-9


def test_criterion_04_equilibrium_triple_is_stationary():
    """Occupations satisfying the equilibrium balance do not evolve."""
    preps = (ModePrep.thermal_state(0.66), ModePrep.thermal_state(4.44),
             ModePrep.thermal_state(0.950))
    s = Scenario(preps=preps, time_grid=np.linspace(0.0, 1e-3, 81),
                 xi=REFERENCE_SETUPS["z570"].xi_hamiltonian,
                 truncation=TruncationPolicy(epsilon=1e-4))
    means = EnsembleSpectrum(
        assemble_initial(s.preps, s.truncation, s.xi)).means_at(s.time_grid)
    rel = float(max(np.abs(means[i] - means[i, 0]).max() / means[i, 0]
                    for i in range(3)))
    ok = rel < 0.01
    _verdict(4, ok, f"max relative drift over 1 ms = {rel:.2e} (tol 1e-2)")
    assert rel < 0.01


# (hot, work-kind, work-args, cold) -> measured steady-state cold occupation
_TABLE_ROWS = [
    ((0.66, ("thermal", 4.44), 2.63), 2.11),
    ((0.66, ("thermal", 1.10), 2.63), 2.53),
    ((0.66, ("thermal", 0.67), 2.63), 2.61),
    ((0.47, ("squeezed", 0.50, 1.34), 2.60), 2.26),
    ((0.46, ("squeezed", 0.50, 0.0), 3.01), 3.26),
]


def test_criterion_05_steady_state_table():
    """Dephased steady states against the measured relaxation table."""
    t0 = time.perf_counter()
    devs = []
    for (nh, work, nc), measured in _TABLE_ROWS:
        if work[0] == "thermal":
            wprep = ModePrep.thermal_state(work[1])
            xi = REFERENCE_SETUPS["z570"].xi_hamiltonian
        else:
            wprep = ModePrep.squeezed_thermal_state(work[1], work[2])
            xi = REFERENCE_SETUPS["z425"].xi_hamiltonian
        s = Scenario(preps=(ModePrep.thermal_state(nh), wprep,
                            ModePrep.thermal_state(nc)),
                     time_grid=np.array([0.0]), xi=xi,
                     truncation=TruncationPolicy(epsilon=1e-4))
        nc_ss = steady_state(s).nbar_c
        devs.append(abs(nc_ss - measured))
    elapsed = time.perf_counter() - t0
    worst = max(devs)
    ok = worst <= 0.25 and elapsed < 300.0
    _verdict(5, ok, f"worst |simulated - measured| = {worst:.3f} "
                    f"(tol 0.25), {elapsed:.1f} s (< 300 s)")
    assert worst <= 0.25
    assert elapsed < 300.0


def test_criterion_06_single_shot_advantage():
    """Transient minimum beats the steady state; incoherent model does not."""
    s = reference_scenario("z570")     # 2.5 us grid over 400 us
    pt = single_shot_point(s, include_incoherent=True)
    nc_in = 2.63
    nc_ss = nc_in - pt.delta_dephased
    advantage = nc_ss - pt.nbar_c_min
    tau_us = pt.tau_star * 1e6
    ok = (advantage >= 0.1 and 50.0 <= tau_us <= 200.0
          and pt.nbar_c_min_incoherent >= nc_ss - 1e-6)
    _verdict(6, ok, f"advantage = {advantage:.3f} (>= 0.1), tau* = {tau_us:.1f} us "
                    f"(in [50, 200]), incoherent floor = {pt.nbar_c_min_incoherent:.4f} "
                    f">= steady state {nc_ss:.4f} - 1e-6")
    assert advantage >= 0.1
    assert 50.0 <= tau_us <= 200.0
    assert pt.nbar_c_min_incoherent >= nc_ss - 1e-6


def test_criterion_07_cooling_sign_agreement():
    """Simulated cooling direction matches the threshold predicate."""
    nh = 0.66
    work_values = (0.5, 1.0, 1.5, 2.5, 4.4)
    cold_values = (0.6, 1.1, 1.6, 2.1, 2.7)
    checked = skipped = mismatches = 0
    for nw in work_values:
        for nc in cold_values:
            predicted, threshold = cooling_condition(OccupationTriple(nh, nw, nc))
            if math.isfinite(threshold) and abs(nw - threshold) < 0.1:
                skipped += 1
                continue
            preps = (ModePrep.thermal_state(nh), ModePrep.thermal_state(nw),
                     ModePrep.thermal_state(nc))
            ensemble = assemble_initial(preps, TruncationPolicy(epsilon=1e-6),
                                        REFERENCE_SETUPS["z570"].xi_hamiltonian)
            spectrum = EnsembleSpectrum(ensemble)
            nc0 = float(spectrum.means_at(np.array([0.0]))[2, 0])
            nc_ss = spectrum.dephased_moments().nbar_c
            if (nc_ss < nc0) != predicted:
                mismatches += 1
            checked += 1
    ok = mismatches == 0
    _verdict(7, ok, f"{checked} grid points checked, {skipped} inside the "
                    f"0.1 threshold band, {mismatches} sign mismatches (tol 0)")
    assert mismatches == 0
    assert checked >= 20


def test_criterion_08_squeezed_thermal_dual_route():
    """Closed-form populations vs the dense matrix-squeeze oracle."""
    worst = 0.0
    for nbar in (0.5, 0.77, 1.0):
        for r in (0.5, 1.2, 1.4):
            dense = np.diag(oracle.squeezed_thermal_density(nbar, r, 0.0, 41)).real
            closed = squeezed_thermal_distribution(nbar, r, cutoff=40,
                                                   tail_budget=1.0).p
            worst = max(worst, float(np.abs(dense - closed).max()))
    mean_dev = 0.0
    for nbar in (0.5, 0.77, 1.0):
        for r in (0.5, 1.2, 1.4):
            d = squeezed_thermal_distribution(nbar, r, cutoff=300, tail_budget=1e-3)
            exact = squeezed_thermal_mean(nbar, r)
            mean_dev = max(mean_dev, abs(d.mean - exact) / exact)
    ok = worst < 1e-6 and mean_dev < 1e-4
    _verdict(8, ok, f"max population diff = {worst:.3e} (tol 1e-6), "
                    f"worst relative mean deviation = {mean_dev:.3e} (tol 1e-4)")
    assert worst < 1e-6
    assert mean_dev < 1e-4


def test_criterion_09_coupling_rate_scaling():
    """Geometric coupling formula: correct scaling, flagged absolute value."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        xi_a = coupling_rate(REFERENCE_SETUPS["z570"].trap).xi
        xi_b = coupling_rate(REFERENCE_SETUPS["z425"].trap).xi
    warned = any(issubclass(w.category, CouplingFormulaWarning) for w in caught)
    ratio = xi_a / xi_b
    factors = [REFERENCE_SETUPS["z570"].xi_measured / xi_a,
               REFERENCE_SETUPS["z425"].xi_measured / xi_b]
    within = all(1.0 / 2.5 < f < 2.5 for f in factors)
    ok = 1.35 <= ratio <= 1.45 and within and warned
    _verdict(9, ok, f"formula ratio A/B = {ratio:.4f} (in [1.35, 1.45]), "
                    f"measured/formula = {factors[0]:.3f} and {factors[1]:.3f} "
                    f"(within factor 2.5), warning emitted = {warned}")
    assert 1.35 <= ratio <= 1.45
    assert within
    assert warned


_FIT_OMEGA = TWO_PI * 50e3
_FIT_CFG = SidebandConfig(omega_rabi=_FIT_OMEGA, gamma0=600.0)
_FIT_GRID = np.linspace(0.5e-6, 150e-6, 300)


def test_criterion_10_fit_round_trips():
    """Thermal trial ensemble, squeezed-vacuum and free-population fits."""
    warnings.simplefilter("ignore", UserWarning)

    true_nbar = 1.82
    p = thermal_distribution(true_nbar, cutoff=150, tail_budget=1.0)
    hits = 0
    for trial in range(200):
        samples = synthetic_brightness(p, _FIT_CFG, _FIT_GRID, 0.95, 0.02,
                                       0.02, np.random.default_rng(1000 + trial))
        res = fit_distribution(samples, "thermal")
        if abs(res.params["nbar"] - true_nbar) <= 0.1:
            hits += 1

    sv = squeezed_vacuum_distribution(1.09, cutoff=150, tail_budget=1.0)
    samples = synthetic_brightness(sv, _FIT_CFG, _FIT_GRID, 0.95, 0.02, 0.02,
                                   np.random.default_rng(7))
    r_fit = fit_distribution(samples, "squeezed_vacuum").params["r"]

    st = squeezed_thermal_distribution(0.77, 1.2, cutoff=150, tail_budget=1.0)
    ref = st.p[:FREE_FIT_NMAX + 1] / st.p[:FREE_FIT_NMAX + 1].sum()
    samples = synthetic_brightness(st, _FIT_CFG, _FIT_GRID, 0.95, 0.02, 0.02,
                                   np.random.default_rng(11))
    free = fit_distribution(samples, "free")
    bin_dev = float(np.abs(free.populations[:7] - ref[:7]).max())

    ok = hits >= 190 and abs(r_fit - 1.09) <= 0.15 and bin_dev < 0.05
    _verdict(10, ok, f"thermal: {hits}/200 within 0.1 (need >= 190); "
                     f"squeezed vacuum r = {r_fit:.4f} (true 1.09 +/- 0.15); "
                     f"free-fit bin deviation (n <= 6) = {bin_dev:.4f} (tol 0.05)")
    assert hits >= 190
    assert abs(r_fit - 1.09) <= 0.15
    assert bin_dev < 0.05


def test_criterion_11_squeezing_as_fuel_ordering():
    """Net cooling grows with r; the equal-mean thermal drive beats them all."""
    nh, nw, nc = 0.47, 0.50, 2.60
    xi = REFERENCE_SETUPS["z425"].xi_hamiltonian
    policy = TruncationPolicy(epsilon=1e-4)

    def delta_for(work_prep):
        preps = (ModePrep.thermal_state(nh), work_prep, ModePrep.thermal_state(nc))
        spectrum = EnsembleSpectrum(assemble_initial(preps, policy, xi))
        nc0 = float(spectrum.means_at(np.array([0.0]))[2, 0])
        return nc0 - spectrum.dephased_moments().nbar_c

    r_values = (0.0, 0.77, 1.15, 1.34)
    deltas = [delta_for(ModePrep.squeezed_thermal_state(nw, r)) for r in r_values]
    nw_eff = squeezed_thermal_mean(nw, 1.34)
    delta_thermal = delta_for(ModePrep.thermal_state(nw_eff))

    monotone = all(b > a for a, b in zip(deltas, deltas[1:]))
    ok = monotone and delta_thermal > deltas[-1]
    pretty = ", ".join(f"r={r:g}: {d:+.4f}" for r, d in zip(r_values, deltas))
    _verdict(11, ok, f"cooling deltas {pretty} strictly increasing = {monotone}; "
                     f"equal-mean thermal (nbar_w = {nw_eff:.3f}) delta = "
                     f"{delta_thermal:+.4f} > r=1.34 delta")
    assert monotone
    assert delta_thermal > deltas[-1]


def test_criterion_12_relaxation_workload_performance():
    """The full thermal relaxation workload stays interactive."""
    base = reference_scenario("z570", t_stop=400e-6, num=80)
    t0 = time.perf_counter()
    study = fig3_dataset(base, scenarios=relaxation_scenarios(base)[:6])
    elapsed = time.perf_counter() - t0
    ok = elapsed < 60.0 and len(study.traces) == 6
    _verdict(12, ok, f"6 scenarios x 80 time points in {elapsed:.2f} s (< 60 s)")
    assert len(study.traces) == 6
    assert elapsed < 60.0


def test_criterion_13_cooling_power_per_mass():
    """Single-shot cooling power of the best sweep point, in W/kg."""
    base = reference_scenario("z425", t_stop=600e-6, num=241)
    study = fig4_dataset(base, nbar_w_values=[4.44, 2.16, 1.10, 0.67, 0.37, 0.19])
    best = max(study.points, key=lambda p: p.delta_single_shot)
    omega_c = mode_frequencies(REFERENCE_SETUPS["z425"].trap).omega_c
    power = cooling_power_per_mass(best.delta_single_shot, best.tau_star, omega_c)
    ok = 1.0 <= power <= 4.0
    _verdict(13, ok, f"P/m = {power:.3f} W/kg at nbar_w = {best.nbar_w:g}, "
                     f"tau* = {best.tau_star * 1e6:.1f} us (window [1, 4])")
    assert 1.0 <= power <= 4.0
