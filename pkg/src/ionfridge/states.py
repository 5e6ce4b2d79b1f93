"""Phonon-number distributions of the prepared motional states.

Closed forms for thermal, coherent (displaced-vacuum), squeezed-vacuum,
squeezed-number and squeezed-thermal states, evaluated in log space so that
large cutoffs and strong squeezing stay finite.  The squeezed-number kernel

    D_n(m, r) = |<n| S(r) |m>|^2

is the parity-conserving overlap of a number state with the squeeze operator;
it is computed from its terminating Gauss-hypergeometric form and is
cross-checked elsewhere against a dense matrix exponential of the squeeze
generator.

All distributions are truncated at a finite cutoff, renormalized, and carry
the pre-renormalization tail mass so callers can audit truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import CutoffError, DomainError

DEFAULT_CUTOFF = 300
DEFAULT_TAIL_BUDGET = 1e-6

_PREP_KINDS = ("thermal", "coherent", "squeezed_thermal", "fock")


# ---------------------------------------------------------------------------
# Distribution container
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PhononDistribution:
    """Normalized phonon-number distribution on n = 0..cutoff.

    ``tail_mass`` is the probability that sat beyond the cutoff before
    renormalization.
    """

    p: np.ndarray
    mean: float
    tail_mass: float

    @property
    def cutoff(self) -> int:
        return self.p.size - 1


def _finalize(raw: np.ndarray, tail_mass: float, tail_budget: float) -> PhononDistribution:
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 1 or raw.size == 0:
        raise DomainError("distribution array must be 1-d and non-empty")
    if raw.min() < -1e-12:
        raise DomainError("negative probability encountered")
    raw = np.clip(raw, 0.0, None)
    tail = max(0.0, float(tail_mass))
    if tail > tail_budget:
        raise CutoffError(
            f"cutoff too small: tail mass {tail:.3e} exceeds budget {tail_budget:.1e}"
        )
    total = raw.sum()
    if total <= 0.0:
        raise DomainError("distribution has zero total mass")
    p = raw / total
    mean = float(np.arange(p.size) @ p)
    return PhononDistribution(p=p, mean=mean, tail_mass=tail)


# ---------------------------------------------------------------------------
# Elementary distributions
# ---------------------------------------------------------------------------


def thermal_distribution(nbar: float, cutoff: int = DEFAULT_CUTOFF,
                         tail_budget: float = DEFAULT_TAIL_BUDGET) -> PhononDistribution:
    """Geometric (thermal) distribution p(n) = nbar^n / (nbar+1)^(n+1)."""
    if nbar < 0.0:
        raise DomainError("nbar must be >= 0")
    if cutoff < 0:
        raise DomainError("cutoff must be >= 0")
    n = np.arange(cutoff + 1)
    if nbar == 0.0:
        raw = np.zeros(cutoff + 1)
        raw[0] = 1.0
        return _finalize(raw, 0.0, tail_budget)
    x = nbar / (nbar + 1.0)
    logp = n * math.log(x) - math.log(nbar + 1.0)
    tail = x ** (cutoff + 1)          # exact geometric tail
    return _finalize(np.exp(logp), tail, tail_budget)


def coherent_distribution(mbar: float, cutoff: int = DEFAULT_CUTOFF,
                          tail_budget: float = DEFAULT_TAIL_BUDGET) -> PhononDistribution:
    """Poissonian distribution of a coherent state with mean ``mbar``."""
    if mbar < 0.0:
        raise DomainError("mbar must be >= 0")
    if cutoff < 0:
        raise DomainError("cutoff must be >= 0")
    n = np.arange(cutoff + 1)
    if mbar == 0.0:
        raw = np.zeros(cutoff + 1)
        raw[0] = 1.0
        return _finalize(raw, 0.0, tail_budget)
    logp = n * math.log(mbar) - mbar - gammaln(n + 1.0)
    raw = np.exp(logp)
    tail = max(0.0, 1.0 - raw.sum())
    return _finalize(raw, tail, tail_budget)


def squeezed_vacuum_distribution(r: float, cutoff: int = DEFAULT_CUTOFF,
                                 tail_budget: float = DEFAULT_TAIL_BUDGET) -> PhononDistribution:
    """Squeezed vacuum: even-only populations

    p(2k) = (2k)! sech(r) tanh(r)^(2k) / (2^k k!)^2.
    """
    if r < 0.0:
        raise DomainError("r must be >= 0")
    if cutoff < 0:
        raise DomainError("cutoff must be >= 0")
    raw = np.zeros(cutoff + 1)
    if r == 0.0:
        raw[0] = 1.0
        return _finalize(raw, 0.0, tail_budget)
    k = np.arange(cutoff // 2 + 1)
    logp = (gammaln(2 * k + 1.0) - 2.0 * (k * math.log(2.0) + gammaln(k + 1.0))
            + 2.0 * k * math.log(math.tanh(r)) - math.log(math.cosh(r)))
    raw[2 * k] = np.exp(logp)
    tail = max(0.0, 1.0 - raw.sum())
    return _finalize(raw, tail, tail_budget)


# ---------------------------------------------------------------------------
# Squeezed number states
# ---------------------------------------------------------------------------


def _signed_log_sum(logmag: np.ndarray, sign: np.ndarray, axis: int) -> np.ndarray:
    """log|sum(sign * exp(logmag))| along ``axis`` (-inf where the sum is 0)."""
    peak = np.max(logmag, axis=axis, keepdims=True)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    s = np.sum(sign * np.exp(logmag - peak), axis=axis)
    with np.errstate(divide="ignore"):
        out = peak.squeeze(axis) + np.log(np.abs(s))
    return out


def _squeezed_number_pops(m: int, r: float, n_max: int) -> np.ndarray:
    """Populations |<n|S(r)|m>|^2 for n = 0..n_max at squeezing r > 0.

    Parity is conserved, so only n with n % 2 == m % 2 are populated.  The
    terminating hypergeometric sum is accumulated in signed log space.
    """
    out = np.zeros(n_max + 1)
    log_x = -2.0 * math.log(math.sinh(r))         # log|x|, x = -1/sinh^2 r
    log_tanh_half = math.log(math.tanh(r) / 2.0)
    parity = m % 2
    if parity == 0:
        mu = m // 2
        nu = np.arange(n_max // 2 + 1)            # n = 2 nu
        c = 0.5
        log_pre = (gammaln(2 * nu + 1.0) + gammaln(m + 1.0)
                   - 2.0 * (gammaln(nu + 1.0) + gammaln(mu + 1.0))
                   - math.log(math.cosh(r))
                   + (2.0 * nu + 2.0 * mu) * log_tanh_half)
        ns = 2 * nu
    else:
        mu = (m - 1) // 2
        nu = np.arange((n_max - 1) // 2 + 1) if n_max >= 1 else np.arange(0)
        c = 1.5
        log_pre = (gammaln(2 * nu + 2.0) + gammaln(m + 1.0)
                   - 2.0 * (gammaln(nu + 1.0) + gammaln(mu + 1.0))
                   - 3.0 * math.log(math.cosh(r))
                   + (2.0 * nu + 2.0 * mu) * log_tanh_half)
        ns = 2 * nu + 1
    if nu.size == 0:
        return out

    # 2F1(-nu, -mu; c; x) as a terminating sum over j = 0..min(nu, mu)
    j = np.arange(min(int(nu.max()), mu) + 1)
    nu_col = nu[:, None]
    valid = j[None, :] <= np.minimum(nu_col, mu)
    nu_fall = np.where(valid, nu_col - j[None, :] + 1.0, 1.0)
    logmag = (gammaln(nu_col + 1.0) - gammaln(nu_fall)
              + gammaln(mu + 1.0) - gammaln(np.where(valid, mu - j[None, :] + 1.0, 1.0))
              - (gammaln(j + c) - gammaln(c))[None, :]
              - gammaln(j + 1.0)[None, :]
              + j[None, :] * log_x)
    logmag = np.where(valid, logmag, -np.inf)
    sign = np.where(j[None, :] % 2 == 0, 1.0, -1.0)
    log_f = _signed_log_sum(logmag, sign, axis=1)

    out[ns] = np.exp(log_pre + 2.0 * log_f)
    return out


def squeezed_number_distribution(m: int, r: float, cutoff: int = DEFAULT_CUTOFF,
                                 tail_budget: float = DEFAULT_TAIL_BUDGET) -> PhononDistribution:
    """Phonon distribution of a squeezed number state S(r)|m>."""
    if m < 0:
        raise DomainError("m must be >= 0")
    if r < 0.0:
        raise DomainError("r must be >= 0")
    if r == 0.0:
        if m > cutoff:
            raise CutoffError(f"cutoff {cutoff} below Fock index {m}")
        raw = np.zeros(cutoff + 1)
        raw[m] = 1.0
        return _finalize(raw, 0.0, tail_budget)
    raw = _squeezed_number_pops(m, r, cutoff)
    tail = max(0.0, 1.0 - raw.sum())
    return _finalize(raw, tail, tail_budget)


def squeezed_thermal_distribution(nbar: float, r: float, cutoff: int = DEFAULT_CUTOFF,
                                  tail_budget: float = DEFAULT_TAIL_BUDGET) -> PhononDistribution:
    """Squeezed thermal state: thermal mixture of squeezed number states.

    p(n) = sum_m p_thermal(m; nbar) |<n|S(r)|m>|^2.  Populations do not
    depend on the squeezing phase, so only |r| enters.
    """
    if nbar < 0.0:
        raise DomainError("nbar must be >= 0")
    if r < 0.0:
        raise DomainError("r must be >= 0")
    if r == 0.0:
        return thermal_distribution(nbar, cutoff, tail_budget)
    if nbar == 0.0:
        return squeezed_vacuum_distribution(r, cutoff, tail_budget)
    x = nbar / (nbar + 1.0)
    # keep thermal weights down to a 1e-14 relative tail
    m_cut = int(math.ceil(math.log(1e-14) / math.log(x)))
    raw = np.zeros(cutoff + 1)
    for m in range(m_cut + 1):
        w = (1.0 - x) * x ** m
        raw += w * _squeezed_number_pops(m, r, cutoff)
    tail = max(0.0, 1.0 - raw.sum())
    return _finalize(raw, tail, tail_budget)


def squeezed_thermal_mean(nbar: float, r: float) -> float:
    """Closed-form mean occupation nbar cosh(2r) + sinh(r)^2."""
    return nbar * math.cosh(2.0 * r) + math.sinh(r) ** 2


# ---------------------------------------------------------------------------
# Preparation descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModePrep:
    """Declarative initial state of one mode.

    Exactly the fields relevant to ``kind`` are read:

    - ``thermal``:          nbar
    - ``coherent``:         alpha_sq   (mean phonon number |alpha|^2)
    - ``squeezed_thermal``: nbar, r, theta
    - ``fock``:             n_fock
    """

    kind: str
    nbar: float = 0.0
    alpha_sq: float = 0.0
    r: float = 0.0
    theta: float = 0.0
    n_fock: int = 0

    def __post_init__(self):
        if self.kind not in _PREP_KINDS:
            raise DomainError(f"unknown prep kind {self.kind!r}; expected one of {_PREP_KINDS}")
        if self.kind == "thermal" and self.nbar < 0.0:
            raise DomainError("thermal prep needs nbar >= 0")
        if self.kind == "coherent" and self.alpha_sq < 0.0:
            raise DomainError("coherent prep needs alpha_sq >= 0")
        if self.kind == "squeezed_thermal" and (self.nbar < 0.0 or self.r < 0.0):
            raise DomainError("squeezed_thermal prep needs nbar >= 0 and r >= 0")
        if self.kind == "fock" and self.n_fock < 0:
            raise DomainError("fock prep needs n_fock >= 0")

    @classmethod
    def thermal_state(cls, nbar: float) -> "ModePrep":
        return cls(kind="thermal", nbar=nbar)

    @classmethod
    def coherent_state(cls, alpha_sq: float) -> "ModePrep":
        return cls(kind="coherent", alpha_sq=alpha_sq)

    @classmethod
    def squeezed_thermal_state(cls, nbar: float, r: float, theta: float = 0.0) -> "ModePrep":
        return cls(kind="squeezed_thermal", nbar=nbar, r=r, theta=theta)

    @classmethod
    def fock_state(cls, n: int) -> "ModePrep":
        return cls(kind="fock", n_fock=n)


def prep_to_distribution(prep: ModePrep, cutoff: int = DEFAULT_CUTOFF,
                         tail_budget: float = DEFAULT_TAIL_BUDGET) -> PhononDistribution:
    """Phonon-number distribution of a prepared mode."""
    if prep.kind == "thermal":
        return thermal_distribution(prep.nbar, cutoff, tail_budget)
    if prep.kind == "coherent":
        return coherent_distribution(prep.alpha_sq, cutoff, tail_budget)
    if prep.kind == "squeezed_thermal":
        return squeezed_thermal_distribution(prep.nbar, prep.r, cutoff, tail_budget)
    if prep.kind == "fock":
        if prep.n_fock > cutoff:
            raise CutoffError(f"cutoff {cutoff} below Fock index {prep.n_fock}")
        raw = np.zeros(cutoff + 1)
        raw[prep.n_fock] = 1.0
        return _finalize(raw, 0.0, tail_budget)
    raise DomainError(f"unknown prep kind {prep.kind!r}")   # pragma: no cover


def prep_mean(prep: ModePrep) -> float:
    """Untruncated mean occupation implied by a preparation."""
    if prep.kind == "thermal":
        return prep.nbar
    if prep.kind == "coherent":
        return prep.alpha_sq
    if prep.kind == "squeezed_thermal":
        return squeezed_thermal_mean(prep.nbar, prep.r)
    return float(prep.n_fock)


# ---------------------------------------------------------------------------
# Preparation calibration model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PreparationModel:
    """Random-walk heating model for state preparation.

    A preparation applies ``steps`` incoherent displacement kicks of mean
    size ``mbar`` phonons on top of a residual occupation ``nbar0``.
    ``beta`` is the curvature of the coherent-drive calibration
    (phonons/s^2, mbar = beta * t_step^2), ``rho_rate`` the squeezing growth
    rate (1/s).  Times are SI seconds.
    """

    nbar0: float = 0.0
    mbar: float = 0.0
    steps: int = 0
    beta: float = 0.0
    rho_rate: float = 0.0


def random_walk_nbar(model: PreparationModel) -> float:
    """Mean occupation after an incoherent random walk: nbar0 + steps * mbar."""
    if model.steps < 0:
        raise DomainError("steps must be >= 0")
    if model.mbar < 0.0 or model.nbar0 < 0.0:
        raise DomainError("nbar0 and mbar must be >= 0")
    return model.nbar0 + model.steps * model.mbar


def mbar_from_curvature(beta: float, t_step: float = 100e-6) -> float:
    """Per-step displacement mean from the drive curvature: beta * t_step^2."""
    return beta * t_step ** 2
