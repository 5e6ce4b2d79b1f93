"""Scenario configuration, dataset generation and file I/O.

A Scenario bundles everything one run needs: the coupling (either a
measured rate or a trap configuration to derive it from), the detuning,
three mode preparations, a time grid and a truncation policy.  Scenario
files are JSON; frequencies there are ordinary frequencies in kHz and
times are in microseconds, converted to angular rad/s and seconds at the
boundary.  Unknown keys are rejected.

Emitted datasets are CSV with a single leading ``# ``-prefixed JSON
metadata line (constants, truncation, retained weight, sector count,
software version).  No timestamps are embedded, so identical scenarios
produce byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._version import __version__
from .benchmarks import (OccupationTriple, equilibrium_cold_occupation,
                         equilibrium_shift, extract_equilibrium_nc)
from .dynamics import (EnsembleSpectrum, ThreeModeEnsemble, assemble_initial,
                       default_incoherence_strength)
from .errors import DomainError, ScenarioError
from .fockspace import TruncationPolicy
from .measurement import SidebandConfig
from .states import ModePrep, prep_mean
from .trap import CODATA2014, REFERENCE_SETUPS, TrapConfig, coupling_rate

TWO_PI = 2.0 * math.pi
SCHEMA_VERSION = 1

#: steady-state window presets (s) used by the measurement procedure
WINDOW_DEFAULT = 240e-6
WINDOW_SQUEEZED = 600e-6


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """Optional parameter sweeps attached to a scenario."""

    work_nbar: tuple[float, ...] = ()
    cold_nbar: tuple[float, ...] = ()


_OUTPUT_KINDS = ("trajectory", "fig2", "fig3", "fig4", "steady_state")


@dataclass(frozen=True, eq=False)
class Scenario:
    """A fully resolved simulation request (all quantities SI / rad/s)."""

    preps: tuple[ModePrep, ModePrep, ModePrep]
    time_grid: np.ndarray
    xi: float
    detuning: float = 0.0
    truncation: TruncationPolicy = TruncationPolicy()
    sideband: SidebandConfig | None = None
    seed: int | None = None
    name: str = "scenario"
    trap: TrapConfig | None = None
    sweep: SweepSpec = SweepSpec()
    outputs: tuple[str, ...] = ("trajectory",)

    def __post_init__(self):
        grid = np.asarray(self.time_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ScenarioError("time grid must be a nonempty 1-d array")
        if grid.size > 1 and np.any(np.diff(grid) <= 0.0):
            raise ScenarioError("time grid must be strictly increasing")
        if np.any(grid < 0.0):
            raise ScenarioError("time grid must be nonnegative")
        object.__setattr__(self, "time_grid", grid)
        if self.xi <= 0.0:
            raise ScenarioError("coupling rate must be > 0")
        for kind in self.outputs:
            if kind not in _OUTPUT_KINDS:
                raise ScenarioError(f"unknown output kind {kind!r}")


def _reject_unknown(d: dict, allowed: Iterable[str], where: str) -> None:
    unknown = set(d) - set(allowed)
    if unknown:
        raise ScenarioError(f"unknown key(s) in {where}: {sorted(unknown)}")


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ScenarioError(f"missing key {key!r} in {where}")
    return d[key]


def _prep_from_dict(d: dict, where: str) -> ModePrep:
    if not isinstance(d, dict):
        raise ScenarioError(f"{where} must be an object")
    kind = _require(d, "kind", where)
    try:
        if kind == "thermal":
            _reject_unknown(d, ("kind", "nbar"), where)
            return ModePrep.thermal_state(float(_require(d, "nbar", where)))
        if kind == "coherent":
            _reject_unknown(d, ("kind", "mbar"), where)
            return ModePrep.coherent_state(float(_require(d, "mbar", where)))
        if kind == "squeezed_thermal":
            _reject_unknown(d, ("kind", "nbar", "r"), where)
            return ModePrep.squeezed_thermal_state(
                float(_require(d, "nbar", where)), float(_require(d, "r", where)))
        if kind == "fock":
            _reject_unknown(d, ("kind", "n"), where)
            return ModePrep.fock_state(int(_require(d, "n", where)))
    except DomainError as exc:
        raise ScenarioError(f"invalid {where}: {exc}") from exc
    raise ScenarioError(f"unknown preparation kind {kind!r} in {where}")


def _trap_from_dict(d: dict, where: str) -> TrapConfig:
    _reject_unknown(d, ("omega_x_khz", "omega_y_khz", "omega_z_khz"), where)
    try:
        return TrapConfig(
            omega_x=TWO_PI * 1e3 * float(_require(d, "omega_x_khz", where)),
            omega_y=TWO_PI * 1e3 * float(_require(d, "omega_y_khz", where)),
            omega_z=TWO_PI * 1e3 * float(_require(d, "omega_z_khz", where)),
        )
    except DomainError as exc:
        raise ScenarioError(f"invalid {where}: {exc}") from exc


def _time_grid_from_json(value, where: str) -> np.ndarray:
    if isinstance(value, dict):
        _reject_unknown(value, ("start", "stop", "num"), where)
        start = float(_require(value, "start", where))
        stop = float(_require(value, "stop", where))
        num = int(_require(value, "num", where))
        if num < 1:
            raise ScenarioError(f"{where}.num must be >= 1")
        return np.linspace(start, stop, num) * 1e-6
    if isinstance(value, list) and value:
        return np.asarray(value, dtype=float) * 1e-6
    raise ScenarioError(f"{where} must be a nonempty list or a start/stop/num object")


def scenario_from_dict(data: dict, name: str = "scenario") -> Scenario:
    """Build a Scenario from parsed JSON, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    allowed = ("schema_version", "name", "coupling", "detuning_khz", "preps",
               "time_grid_us", "truncation", "sideband", "seed", "sweep", "outputs")
    _reject_unknown(data, allowed, "scenario")
    version = _require(data, "schema_version", "scenario")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}")

    coupling = _require(data, "coupling", "scenario")
    if not isinstance(coupling, dict):
        raise ScenarioError("coupling must be an object")
    _reject_unknown(coupling, ("xi_khz", "trap"), "coupling")
    trap = None
    if ("xi_khz" in coupling) == ("trap" in coupling):
        raise ScenarioError("coupling requires exactly one of xi_khz or trap")
    if "xi_khz" in coupling:
        xi = TWO_PI * 1e3 * float(coupling["xi_khz"])
    else:
        trap = _trap_from_dict(coupling["trap"], "coupling.trap")
        xi = coupling_rate(trap).xi       # emits CouplingFormulaWarning

    preps_json = _require(data, "preps", "scenario")
    if not isinstance(preps_json, dict):
        raise ScenarioError("preps must be an object")
    _reject_unknown(preps_json, ("hot", "work", "cold"), "preps")
    preps = tuple(_prep_from_dict(_require(preps_json, mode, "preps"), f"preps.{mode}")
                  for mode in ("hot", "work", "cold"))

    grid = _time_grid_from_json(_require(data, "time_grid_us", "scenario"),
                                "time_grid_us")

    trunc_json = data.get("truncation", {})
    if not isinstance(trunc_json, dict):
        raise ScenarioError("truncation must be an object")
    _reject_unknown(trunc_json, ("epsilon", "n_max_h", "n_max_w", "n_max_c"),
                    "truncation")
    try:
        truncation = TruncationPolicy(
            epsilon=float(trunc_json.get("epsilon", 1e-4)),
            n_max_h=trunc_json.get("n_max_h"),
            n_max_w=trunc_json.get("n_max_w"),
            n_max_c=trunc_json.get("n_max_c"),
        )
    except DomainError as exc:
        raise ScenarioError(f"invalid truncation: {exc}") from exc

    sideband = None
    if "sideband" in data:
        sb = data["sideband"]
        if not isinstance(sb, dict):
            raise ScenarioError("sideband must be an object")
        _reject_unknown(sb, ("omega_rabi_khz", "t_rsb_us", "a_bg", "eta"), "sideband")
        try:
            sideband = SidebandConfig(
                omega_rabi=TWO_PI * 1e3 * float(_require(sb, "omega_rabi_khz", "sideband")),
                t_rsb=1e-6 * float(_require(sb, "t_rsb_us", "sideband")),
                a_bg=float(sb.get("a_bg", 0.0)),
                eta=float(sb.get("eta", 1.0)),
            )
        except DomainError as exc:
            raise ScenarioError(f"invalid sideband: {exc}") from exc

    sweep = SweepSpec()
    if "sweep" in data:
        sw = data["sweep"]
        if not isinstance(sw, dict):
            raise ScenarioError("sweep must be an object")
        _reject_unknown(sw, ("work_nbar", "cold_nbar"), "sweep")
        sweep = SweepSpec(
            work_nbar=tuple(float(v) for v in sw.get("work_nbar", [])),
            cold_nbar=tuple(float(v) for v in sw.get("cold_nbar", [])),
        )

    outputs = tuple(data.get("outputs", ["trajectory"]))
    seed = data.get("seed")
    return Scenario(
        preps=preps, time_grid=grid, xi=xi,
        detuning=TWO_PI * 1e3 * float(data.get("detuning_khz", 0.0)),
        truncation=truncation, sideband=sideband,
        seed=None if seed is None else int(seed),
        name=str(data.get("name", name)), trap=trap, sweep=sweep, outputs=outputs,
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    return scenario_from_dict(data, name=path.stem)


def reference_scenario(setup: str = "z570", *, name: str | None = None,
                       preps: tuple[ModePrep, ModePrep, ModePrep] | None = None,
                       t_stop: float = 400e-6, num: int = 161,
                       epsilon: float = 1e-4,
                       outputs: tuple[str, ...] = ("trajectory",)) -> Scenario:
    """Scenario at one of the two reference operating points.

    Uses the setup's Hamiltonian-rate coupling (half the quoted exchange
    Rabi frequency, see :class:`~ionfridge.trap.ReferenceSetup`) and the
    stock thermal preparation (0.66, 4.44, 2.63) unless overridden.
    """
    ref = REFERENCE_SETUPS[setup]
    if preps is None:
        preps = (ModePrep.thermal_state(0.66), ModePrep.thermal_state(4.44),
                 ModePrep.thermal_state(2.63))
    return Scenario(
        preps=preps,
        time_grid=np.linspace(0.0, t_stop, num),
        xi=ref.xi_hamiltonian,
        truncation=TruncationPolicy(epsilon=epsilon),
        name=name or f"reference_{setup}",
        trap=ref.trap,
        outputs=outputs,
    )


def _prep_echo(prep: ModePrep) -> dict:
    out = {"kind": prep.kind}
    if prep.kind == "thermal":
        out["nbar"] = prep.nbar
    elif prep.kind == "coherent":
        out["mbar"] = prep.alpha_sq
    elif prep.kind == "squeezed_thermal":
        out.update(nbar=prep.nbar, r=prep.r)
    else:
        out["n"] = prep.n_fock
    return out


def scenario_echo(s: Scenario) -> dict:
    """Compact, JSON-safe summary of a scenario for metadata blocks."""
    return {
        "name": s.name,
        "xi_khz": s.xi / (TWO_PI * 1e3),
        "detuning_khz": s.detuning / (TWO_PI * 1e3),
        "preps": [_prep_echo(p) for p in s.preps],
        "t_start_us": float(s.time_grid[0]) * 1e6,
        "t_stop_us": float(s.time_grid[-1]) * 1e6,
        "n_times": int(s.time_grid.size),
        "epsilon": s.truncation.epsilon,
        "caps": list(s.truncation.caps()),
        "seed": s.seed,
    }


def with_thermal(s: Scenario, mode: str, nbar: float) -> Scenario:
    """Copy of ``s`` with one mode replaced by a thermal preparation."""
    idx = {"hot": 0, "work": 1, "cold": 2}[mode]
    preps = list(s.preps)
    preps[idx] = ModePrep.thermal_state(nbar)
    return dataclasses.replace(s, preps=tuple(preps))


def with_prep(s: Scenario, mode: str, prep: ModePrep) -> Scenario:
    idx = {"hot": 0, "work": 1, "cold": 2}[mode]
    preps = list(s.preps)
    preps[idx] = prep
    return dataclasses.replace(s, preps=tuple(preps))


# ---------------------------------------------------------------------------
# Core runs
# ---------------------------------------------------------------------------


def build_ensemble(s: Scenario) -> ThreeModeEnsemble:
    return assemble_initial(s.preps, s.truncation, s.xi, detuning=s.detuning)


def _base_metadata(s: Scenario, dataset: str, ensemble: ThreeModeEnsemble | None) -> dict:
    md = {
        "schema_version": SCHEMA_VERSION,
        "dataset": dataset,
        "scenario": scenario_echo(s),
        "constants": CODATA2014.as_dict(),
        "version": __version__,
    }
    if ensemble is not None:
        md["retained_weight"] = ensemble.retained_weight
        md["discarded_weight"] = ensemble.discarded_weight
        md["n_sectors"] = len(ensemble.sectors)
    return md


@dataclass(eq=False)
class TrajectoryResult:
    """Occupation trajectories (and optional brightness) on the time grid."""

    tau: np.ndarray                 # s
    nbar: np.ndarray                # (3, T)
    p_up: np.ndarray | None         # (3, T) or None
    metadata: dict

    @property
    def columns(self) -> list[str]:
        cols = ["tau_us", "nbar_h", "nbar_w", "nbar_c"]
        if self.p_up is not None:
            cols += ["p_up_h", "p_up_w", "p_up_c"]
        return cols

    def rows(self) -> np.ndarray:
        parts = [self.tau * 1e6, *self.nbar]
        if self.p_up is not None:
            parts += [*self.p_up]
        return np.column_stack(parts)

    def to_csv(self, path) -> None:
        write_dataset_csv(path, self.columns, self.rows(), self.metadata)


def run_scenario(s: Scenario) -> TrajectoryResult:
    """Evolve the scenario on its time grid.

    Returns occupations per mode and, when a sideband configuration is
    present, the red-sideband brightness of each mode's (normalized)
    marginal distribution.
    """
    ensemble = build_ensemble(s)
    spectrum = EnsembleSpectrum(ensemble)
    marginals = spectrum.marginals_at(s.time_grid)
    retained = ensemble.retained_weight
    nbar = np.vstack([
        (np.arange(m.shape[0]) @ m) / retained for m in marginals
    ])
    p_up = None
    if s.sideband is not None:
        cfg = s.sideband
        p_up = np.empty_like(nbar)
        for i, marg in enumerate(marginals):
            n = np.arange(marg.shape[0])
            flip = 0.5 * (1.0 - np.cos(np.sqrt(n) * cfg.omega_rabi * cfg.t_rsb))
            p_up[i] = cfg.a_bg + cfg.eta * (flip @ marg) / retained
    return TrajectoryResult(tau=s.time_grid.copy(), nbar=nbar, p_up=p_up,
                            metadata=_base_metadata(s, "trajectory", ensemble))


# ---------------------------------------------------------------------------
# Steady state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SteadyStateRule:
    """How to extract steady-state occupations from a scenario."""

    method: str = "dephasing"
    #: window_average only; None picks the preset window for the scenario
    #: (600 us with a squeezed work mode, else 240 us).
    window_start: float | None = None

    def __post_init__(self):
        if self.method not in ("dephasing", "window_average"):
            raise DomainError(f"unknown steady-state method {self.method!r}")
        if self.window_start is not None and self.window_start < 0.0:
            raise DomainError("window_start must be >= 0")

    @classmethod
    def parse(cls, text: str) -> "SteadyStateRule":
        """Parse a CLI rule string: ``dephasing``, ``window`` or ``window:<us>``."""
        if text == "dephasing":
            return cls(method="dephasing")
        if text == "window":
            return cls(method="window_average")
        if text.startswith("window:"):
            try:
                start_us = float(text.split(":", 1)[1])
            except ValueError:
                raise DomainError(f"bad window rule {text!r}") from None
            return cls(method="window_average", window_start=start_us * 1e-6)
        raise DomainError(f"unknown steady-state rule {text!r}")

    def start_for(self, s: "Scenario") -> float:
        if self.window_start is not None:
            return self.window_start
        squeezed = s.preps[1].kind == "squeezed_thermal" and s.preps[1].r > 0.0
        return WINDOW_SQUEEZED if squeezed else WINDOW_DEFAULT


def steady_state(s: Scenario, rule: SteadyStateRule = SteadyStateRule()) -> OccupationTriple:
    """Steady-state occupations of a scenario.

    ``dephasing`` computes the exact infinite-time average; ``window_average``
    mimics the measurement procedure by averaging grid points with
    tau > window_start.
    """
    ensemble = build_ensemble(s)
    spectrum = EnsembleSpectrum(ensemble)
    if rule.method == "dephasing":
        mom = spectrum.dephased_moments()
        return OccupationTriple(mom.nbar_h, mom.nbar_w, mom.nbar_c)
    start = rule.start_for(s)
    mask = s.time_grid > start
    if not mask.any():
        raise DomainError(
            f"no grid points after window_start = {start * 1e6:g} us")
    means = spectrum.means_at(s.time_grid[mask])
    avg = means.mean(axis=1)
    return OccupationTriple(float(avg[0]), float(avg[1]), float(avg[2]))


# ---------------------------------------------------------------------------
# Equilibrium sweep dataset
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquilibriumCell:
    nbar_w: float
    nbar_c: float
    nbar_h_ss: float
    nbar_c_ss: float
    eps_h: float                    # nbar_h_in - nbar_h_ss
    retained_weight: float
    n_sectors: int


@dataclass(frozen=True)
class EquilibriumRow:
    nbar_w: float
    crossing: bool
    nc_eq_sim: float                # NaN when no crossing
    nc_eq_formula: float            # NaN when the balance has no solution


@dataclass(eq=False)
class EquilibriumSweep:
    cells: list[EquilibriumCell]
    rows: list[EquilibriumRow]
    metadata: dict

    def write(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        cells_path = out_dir / "fig2_cells.csv"
        rows_path = out_dir / "fig2_summary.csv"
        write_dataset_csv(
            cells_path,
            ["nbar_w_in", "nbar_c_in", "nbar_h_ss", "nbar_c_ss", "eps_h",
             "retained_weight", "n_sectors"],
            [[c.nbar_w, c.nbar_c, c.nbar_h_ss, c.nbar_c_ss, c.eps_h,
              c.retained_weight, c.n_sectors] for c in self.cells],
            self.metadata)
        write_dataset_csv(
            rows_path,
            ["nbar_w_in", "crossing", "nc_eq_sim", "nc_eq_formula"],
            [[r.nbar_w, int(r.crossing), r.nc_eq_sim, r.nc_eq_formula]
             for r in self.rows],
            self.metadata)
        return [cells_path, rows_path]


def fig2_dataset(base: Scenario, nbar_c_values: Sequence[float] | None = None,
                 nbar_w_values: Sequence[float] | None = None) -> EquilibriumSweep:
    """Hot-mode equilibration sweep.

    For each (work, cold) input occupation the hot-mode shift
    eps_h = nbar_h_in - nbar_h_ss is recorded; per work row the simulated
    equilibrium cold occupation (zero crossing of eps_h) is extracted and
    compared to the closed-form balance prediction.
    """
    nbar_c_values = list(nbar_c_values if nbar_c_values is not None
                         else base.sweep.cold_nbar)
    nbar_w_values = list(nbar_w_values if nbar_w_values is not None
                         else base.sweep.work_nbar)
    if not nbar_c_values or not nbar_w_values:
        raise ScenarioError("fig2 needs both work_nbar and cold_nbar sweeps")
    nbar_h_in = prep_mean(base.preps[0])

    cells: list[EquilibriumCell] = []
    rows: list[EquilibriumRow] = []
    for nw in nbar_w_values:
        points = []
        for nc in nbar_c_values:
            s = with_thermal(with_thermal(base, "work", nw), "cold", nc)
            ensemble = build_ensemble(s)
            mom = EnsembleSpectrum(ensemble).dephased_moments()
            eps_h = nbar_h_in - mom.nbar_h
            cells.append(EquilibriumCell(
                nbar_w=nw, nbar_c=nc, nbar_h_ss=mom.nbar_h, nbar_c_ss=mom.nbar_c,
                eps_h=eps_h, retained_weight=ensemble.retained_weight,
                n_sectors=len(ensemble.sectors)))
            points.append((nc, eps_h))

        signs = np.sign([e for _, e in points])
        crossing = bool(np.any(signs[:-1] * signs[1:] <= 0.0))
        nc_eq_sim = extract_equilibrium_nc(points) if crossing else math.nan
        try:
            nc_eq_formula = equilibrium_cold_occupation(nbar_h_in, nw)
        except DomainError:
            nc_eq_formula = math.nan
        rows.append(EquilibriumRow(nbar_w=nw, crossing=crossing,
                                   nc_eq_sim=nc_eq_sim, nc_eq_formula=nc_eq_formula))
    return EquilibriumSweep(cells=cells, rows=rows,
                            metadata=_base_metadata(base, "fig2", None))


# ---------------------------------------------------------------------------
# Relaxation dataset (thermal vs squeezed work mode)
# ---------------------------------------------------------------------------

#: (nbar_h, nbar_w, nbar_c) rows of the thermal relaxation study, with the
#: measured steady-state cold occupations for comparison columns
THERMAL_RELAXATION_ROWS = (
    (0.66, 4.44, 2.63, 2.11),
    (0.66, 2.16, 2.63, 2.58),
    (0.66, 1.10, 2.63, 2.53),
    (0.66, 0.67, 2.63, 2.61),
    (0.66, 0.37, 2.63, 2.70),
    (0.66, 0.19, 2.63, 2.92),
)

#: (nbar_h, nbar_w, r, nbar_c) rows of the squeezed-work study
SQUEEZED_RELAXATION_ROWS = (
    (0.47, 0.50, 1.34, 2.60, 2.26),
    (0.52, 0.50, 1.15, 2.72, 2.46),
    (0.52, 0.50, 0.77, 2.81, 2.76),
    (0.46, 0.50, 0.0, 3.01, 3.26),
)


@dataclass(frozen=True, eq=False)
class RelaxationTrace:
    label: str
    nbar_w_eff: float            # mean work occupation incl. squeezing energy
    nbar_c_in: float
    nbar_c_ss: float
    tau: np.ndarray
    nbar_c: np.ndarray
    measured_ss: float = math.nan


@dataclass(eq=False)
class RelaxationStudy:
    traces: list[RelaxationTrace]
    metadata: dict

    def write(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        traces_path = out_dir / "fig3_traces.csv"
        summary_path = out_dir / "fig3_summary.csv"
        rows = []
        for tr in self.traces:
            for t, nc in zip(tr.tau, tr.nbar_c):
                rows.append([tr.label, f"{t * 1e6:.12g}", f"{nc:.12g}",
                             f"{nc - tr.nbar_c_ss:.12g}"])
        write_dataset_csv(traces_path, ["label", "tau_us", "nbar_c", "delta_nbar_c"],
                          rows, self.metadata, raw=True)
        write_dataset_csv(
            summary_path,
            ["label", "nbar_w_eff", "nbar_c_in", "nbar_c_ss", "delta_nc0",
             "measured_ss"],
            [[tr.label, f"{tr.nbar_w_eff:.12g}", f"{tr.nbar_c_in:.12g}",
              f"{tr.nbar_c_ss:.12g}", f"{tr.nbar_c_in - tr.nbar_c_ss:.12g}",
              f"{tr.measured_ss:.12g}"] for tr in self.traces],
            self.metadata, raw=True)
        return [traces_path, summary_path]


def relaxation_scenarios(base: Scenario,
                         xi_squeezed: float | None = None) -> list[tuple[Scenario, float]]:
    """The ten preset relaxation scenarios (6 thermal + 4 squeezed work).

    The squeezed-work rows were recorded at the weaker-coupling operating
    point; by default those scenarios carry its Hamiltonian rate while the
    thermal rows inherit ``base.xi``.  Pass ``xi_squeezed`` to override, or
    ``base.xi`` to run everything at one coupling.  (The dephased steady
    state is coupling-independent at zero detuning, so this only affects
    the trace time axis and windowed averages.)
    """
    if xi_squeezed is None:
        xi_squeezed = REFERENCE_SETUPS["z425"].xi_hamiltonian
    out = []
    for nh, nw, nc, meas in THERMAL_RELAXATION_ROWS:
        s = with_thermal(with_thermal(with_thermal(base, "hot", nh), "work", nw),
                         "cold", nc)
        s = dataclasses.replace(s, name=f"thermal_nw{nw:g}")
        out.append((s, meas))
    for nh, nw, r, nc, meas in SQUEEZED_RELAXATION_ROWS:
        s = with_thermal(with_thermal(base, "hot", nh), "cold", nc)
        s = with_prep(s, "work", ModePrep.squeezed_thermal_state(nw, r))
        s = dataclasses.replace(s, name=f"squeezed_r{r:g}", xi=xi_squeezed)
        out.append((s, meas))
    return out


def fig3_dataset(base: Scenario,
                 scenarios: Sequence[tuple[Scenario, float]] | None = None,
                 rule: SteadyStateRule = SteadyStateRule()) -> RelaxationStudy:
    """Cold-mode relaxation traces relative to the steady state.

    Runs the preset thermal and squeezed-work scenarios (or caller-supplied
    ones) on the base scenario's grid, coupling and truncation.
    """
    if scenarios is None:
        scenarios = relaxation_scenarios(base)
    traces = []
    for s, measured in scenarios:
        ensemble = build_ensemble(s)
        spectrum = EnsembleSpectrum(ensemble)
        means = spectrum.means_at(s.time_grid)
        if rule.method == "dephasing":
            nc_ss = spectrum.dephased_moments().nbar_c
        else:
            mask = s.time_grid > rule.start_for(s)
            if not mask.any():
                raise DomainError("no grid points after window_start")
            nc_ss = float(means[2, mask].mean())
        traces.append(RelaxationTrace(
            label=s.name, nbar_w_eff=prep_mean(s.preps[1]),
            nbar_c_in=prep_mean(s.preps[2]), nbar_c_ss=nc_ss,
            tau=s.time_grid.copy(), nbar_c=means[2].copy(), measured_ss=measured))
    return RelaxationStudy(traces=traces, metadata=_base_metadata(base, "fig3", None))


# ---------------------------------------------------------------------------
# Single-shot dataset
# ---------------------------------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
TAU_STAR_RESOLUTION = 0.1e-6     # s


def _golden_minimum(f, a: float, b: float, tol: float) -> float:
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class SingleShotPoint:
    nbar_w: float
    tau_star: float                 # s
    nbar_c_min: float
    delta_single_shot: float        # nbar_c_in - nbar_c(tau*)
    delta_dephased: float           # nbar_c_in - dephased steady state
    delta_classical: float          # exchange-balance equilibrium benchmark
    nbar_c_min_incoherent: float = math.nan


@dataclass(eq=False)
class SingleShotStudy:
    points: list[SingleShotPoint]
    metadata: dict

    def write(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        path = out_dir / "fig4_summary.csv"
        write_dataset_csv(
            path,
            ["nbar_w_in", "tau_star_us", "nbar_c_min", "delta_single_shot",
             "delta_dephased", "delta_classical", "nbar_c_min_incoherent"],
            [[p.nbar_w, p.tau_star * 1e6, p.nbar_c_min, p.delta_single_shot,
              p.delta_dephased, p.delta_classical, p.nbar_c_min_incoherent]
             for p in self.points],
            self.metadata)
        return [path]


def single_shot_point(s: Scenario, include_incoherent: bool = False) -> SingleShotPoint:
    """Transient cold-mode minimum of one scenario vs the two benchmarks."""
    grid = s.time_grid
    if grid.size < 3:
        raise ScenarioError("single-shot search needs >= 3 grid points")
    spans = np.diff(grid)
    if spans.max() > 5.000001e-6:
        raise ScenarioError("single-shot grid must be <= 5 us spaced")

    ensemble = build_ensemble(s)
    spectrum = EnsembleSpectrum(ensemble)
    nc = spectrum.means_at(grid)[2]

    def nc_at(t: float) -> float:
        return float(spectrum.means_at(np.array([t]))[2, 0])

    i = int(np.argmin(nc))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    tau_star = _golden_minimum(nc_at, lo, hi, TAU_STAR_RESOLUTION)
    nbar_c_min = nc_at(tau_star)

    occ = OccupationTriple(*(prep_mean(p) for p in s.preps))
    nc_in = occ.nbar_c
    delta_dephased = nc_in - spectrum.dephased_moments().nbar_c
    delta_classical = -equilibrium_shift(occ)

    nc_min_inc = math.nan
    if include_incoherent:
        xi_in = default_incoherence_strength(ensemble)
        nc_inc = spectrum.incoherent_means_at(grid, xi_in)[2]
        nc_min_inc = float(nc_inc.min())
    return SingleShotPoint(
        nbar_w=prep_mean(s.preps[1]), tau_star=tau_star, nbar_c_min=nbar_c_min,
        delta_single_shot=nc_in - nbar_c_min, delta_dephased=delta_dephased,
        delta_classical=delta_classical, nbar_c_min_incoherent=nc_min_inc)


def fig4_dataset(base: Scenario, nbar_w_values: Sequence[float] | None = None,
                 include_incoherent: bool = False) -> SingleShotStudy:
    """Single-shot cooling summary over a work-mode occupation sweep."""
    nbar_w_values = list(nbar_w_values if nbar_w_values is not None
                         else base.sweep.work_nbar)
    if not nbar_w_values:
        raise ScenarioError("fig4 needs a work_nbar sweep")
    points = [single_shot_point(with_thermal(base, "work", nw), include_incoherent)
              for nw in nbar_w_values]
    return SingleShotStudy(points=points, metadata=_base_metadata(base, "fig4", None))


# ---------------------------------------------------------------------------
# CSV writing
# ---------------------------------------------------------------------------


def format_float(x: float) -> str:
    return f"{x:.12g}"


def write_dataset_csv(path, columns: Sequence[str], rows, metadata: dict,
                      raw: bool = False) -> None:
    """Write a dataset CSV: one ``# `` JSON metadata line, header, rows.

    ``raw`` rows are pre-formatted strings; otherwise every value is
    emitted with 12 significant digits.  Output is deterministic (sorted
    metadata keys, LF endings, no timestamps).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# " + json.dumps(metadata, sort_keys=True,
                                   separators=(",", ":")) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            if raw:
                fh.write(",".join(str(v) for v in row) + "\n")
            else:
                fh.write(",".join(format_float(float(v)) for v in row) + "\n")


def read_dataset_csv(path) -> tuple[dict, list[str], np.ndarray]:
    """Read back a dataset CSV written by :func:`write_dataset_csv`."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ScenarioError(f"{path}: missing metadata line")
    metadata = json.loads(lines[0][2:])
    columns = lines[1].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[2:] if line])
    return metadata, columns, data
