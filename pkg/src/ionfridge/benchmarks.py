"""Classical-thermodynamics benchmarks for the three-mode refrigerator.

Equilibrium occupation balance, the work-mode cooling threshold, entropy
flow of the idealized adiabatic exchange, and the zero-crossing extraction
used to compare simulated sweeps against the equilibrium condition.

The equilibrium condition links the three thermal occupations through

    (1 + 1/nbar_h) = (1 + 1/nbar_w)(1 + 1/nbar_c),

equivalently x_h = x_w x_c with the Boltzmann ratios x = nbar/(nbar+1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DomainError
from .trap import CODATA2014, ModeFrequencies, PhysicalConstants, mode_temperature


@dataclass(frozen=True)
class OccupationTriple:
    """Mean phonon numbers of (hot, work, cold)."""

    nbar_h: float
    nbar_w: float
    nbar_c: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.nbar_h, self.nbar_w, self.nbar_c)


@dataclass(frozen=True)
class CoolingReport:
    """Occupation changes epsilon_i between an initial and a final triple.

    Sign convention: final = (nbar_h - eps_h, nbar_w + eps_w, nbar_c + eps_c);
    within the unitary model eps_h = eps_w = eps_c, and cooling of the cold
    mode means eps_c < 0.
    """

    eps_h: float
    eps_w: float
    eps_c: float
    cooled: bool
    threshold_w: float


def equilibrium_cold_occupation(nbar_h: float, nbar_w: float) -> float:
    """Cold occupation balancing the equilibrium condition for given h, w."""
    if nbar_h <= 0.0 or nbar_w <= 0.0:
        raise DomainError("occupations must be > 0")
    ratio = (1.0 + 1.0 / nbar_h) / (1.0 + 1.0 / nbar_w)
    if ratio <= 1.0:
        raise DomainError(
            "no positive solution: work mode must be hotter than the hot mode "
            "in occupation-ratio terms (nbar_w > nbar_h)"
        )
    return 1.0 / (ratio - 1.0)


def cooling_condition(occ: OccupationTriple) -> tuple[bool, float]:
    """Work-mode threshold for refrigeration of the cold mode.

    Returns (cooled_predicted, threshold) with
    threshold = nbar_h (1 + nbar_c) / (nbar_c - nbar_h); the inequality is
    strict, and cooling is impossible when nbar_c <= nbar_h (threshold +inf).
    """
    if min(occ.as_tuple()) <= 0.0:
        raise DomainError("occupations must be > 0")
    if occ.nbar_c <= occ.nbar_h:
        return (False, math.inf)
    threshold = occ.nbar_h * (1.0 + occ.nbar_c) / (occ.nbar_c - occ.nbar_h)
    return (occ.nbar_w > threshold, threshold)


def entropy_flow(occ: OccupationTriple, rates: tuple[float, float, float],
                 freqs: ModeFrequencies,
                 constants: PhysicalConstants = CODATA2014) -> float:
    """Entropy rate sum_i hbar omega_i (dn_i/dt) / T_i of the mode triple (W/K).

    Vanishes exactly when the occupations satisfy the equilibrium condition
    and the rates obey the exchange constraint dn_h = -dn_w = -dn_c.
    """
    total = 0.0
    for nbar, rate, omega in zip(occ.as_tuple(), rates, freqs.as_tuple()):
        if rate == 0.0:
            continue
        temp = mode_temperature(nbar, omega, constants)
        total += constants.hbar * omega * rate / temp
    return total


def cooling_report(initial: OccupationTriple, final: OccupationTriple) -> CoolingReport:
    """Occupation changes and threshold verdict between two triples."""
    cooled, threshold = cooling_condition(initial)
    return CoolingReport(
        eps_h=initial.nbar_h - final.nbar_h,
        eps_w=final.nbar_w - initial.nbar_w,
        eps_c=final.nbar_c - initial.nbar_c,
        cooled=cooled,
        threshold_w=threshold,
    )


def extract_equilibrium_nc(points: list[tuple[float, float]]) -> float:
    """Zero crossing of eps_h as a function of the injected cold occupation.

    Uses a straight line through the two points with the smallest |eps_h|
    (the sweep-extraction procedure, not a global fit).  If all eps_h share
    a sign the extrapolation is flagged with a warning but still returned.
    """
    if len(points) < 2:
        raise DomainError("need at least two (nbar_c_in, eps_h) points")
    signs = {e > 0.0 for _, e in points if e != 0.0}
    if len(signs) < 2 and all(e != 0.0 for _, e in points):
        warnings.warn("eps_h does not change sign; extrapolating beyond the sweep",
                      UserWarning, stacklevel=2)
    nearest = sorted(points, key=lambda pt: abs(pt[1]))[:2]
    (x1, y1), (x2, y2) = nearest
    if y1 == y2:
        if y1 == 0.0:
            return 0.5 * (x1 + x2)
        raise DomainError("degenerate points: equal nonzero eps_h")
    return x1 - y1 * (x2 - x1) / (y2 - y1)


def equilibrium_shift(initial: OccupationTriple) -> float:
    """Occupation transfer eps at which the exchange family reaches equilibrium.

    Solves the equilibrium condition for the single-parameter family
    (nbar_h - eps, nbar_w + eps, nbar_c + eps) implied by the conserved
    pairs; eps < 0 corresponds to cooling of the cold mode.
    """
    n_h, n_w, n_c = initial.as_tuple()
    if min(n_h, n_w, n_c) <= 0.0:
        raise DomainError("occupations must be > 0")

    def balance(eps: float) -> float:
        return (math.log1p(1.0 / (n_h - eps))
                - math.log1p(1.0 / (n_w + eps))
                - math.log1p(1.0 / (n_c + eps)))

    tiny = 1e-12
    lo = -min(n_w, n_c) + tiny
    hi = n_h - tiny
    return float(brentq(balance, lo, hi, xtol=1e-14, rtol=8.9e-16))
