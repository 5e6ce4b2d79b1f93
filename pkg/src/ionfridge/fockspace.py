"""Invariant sectors of the trilinear interaction.

The coupling adag_h a_w a_c + h.c. conserves N = n_h + n_w and
M = n_h + n_c, so the three-mode Fock space splits into finite sectors
labelled by (N, M) with basis states |k, N-k, M-k> for k = 0..min(N, M).
This module enumerates sector bases and selects which sectors to retain for
a given product initial state, greedily by weight until a target total
weight 1 - epsilon is reached.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationError
from .states import PhononDistribution

#: Sector weights below this floor are dropped regardless of epsilon.
WEIGHT_FLOOR = 1e-15


@dataclass(frozen=True)
class SectorLabel:
    """Conserved pair (N, M) = (n_h + n_w, n_h + n_c)."""

    N: int
    M: int

    def __post_init__(self):
        if self.N < 0 or self.M < 0:
            raise DomainError("sector labels must be non-negative")

    @property
    def dim(self) -> int:
        return min(self.N, self.M) + 1


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Ordered basis of one sector: states[k] = (k, N-k, M-k)."""

    label: SectorLabel
    states: tuple[tuple[int, int, int], ...]

    @property
    def dim(self) -> int:
        return len(self.states)


def enumerate_sector(label: SectorLabel) -> SectorBasis:
    """Basis states of sector (N, M), ordered by ascending n_h."""
    states = tuple(
        (k, label.N - k, label.M - k) for k in range(min(label.N, label.M) + 1)
    )
    return SectorBasis(label=label, states=states)


@dataclass(frozen=True)
class TruncationPolicy:
    """How much joint weight to retain and optional hard per-mode caps."""

    epsilon: float = 1e-4
    n_max_h: int | None = None
    n_max_w: int | None = None
    n_max_c: int | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError("epsilon must be in (0, 1)")
        for cap in (self.n_max_h, self.n_max_w, self.n_max_c):
            if cap is not None and cap < 0:
                raise DomainError("per-mode caps must be >= 0")

    def caps(self) -> tuple[int | None, int | None, int | None]:
        return (self.n_max_h, self.n_max_w, self.n_max_c)


@dataclass(frozen=True, eq=False)
class SectorSelection:
    """Retained sectors in selection (descending-weight) order."""

    labels: tuple[SectorLabel, ...]
    weights: np.ndarray
    retained_weight: float
    discarded_weight: float


def select_sectors(p_h: PhononDistribution, p_w: PhononDistribution,
                   p_c: PhononDistribution, policy: TruncationPolicy) -> SectorSelection:
    """Greedy sector selection for a product initial state.

    The joint weight of sector (N, M) is
    sum_k p_h(k) p_w(N-k) p_c(M-k).  Sectors are taken in descending weight
    order (ties broken lexicographically by (N, M)) until the running total
    reaches 1 - epsilon; weights below the 1e-15 floor are never retained.
    """
    for dist in (p_h, p_w, p_c):
        if abs(dist.p.sum() - 1.0) > 1e-9:
            raise DomainError("input distributions must be normalized")

    ph, pw, pc = p_h.p, p_w.p, p_c.p
    n_hi = (ph.size - 1) + (pw.size - 1)
    m_hi = (ph.size - 1) + (pc.size - 1)
    grid = np.zeros((n_hi + 1, m_hi + 1))
    for k, weight_k in enumerate(ph):
        if weight_k < WEIGHT_FLOOR:
            continue
        grid[k:k + pw.size, k:k + pc.size] += weight_k * np.outer(pw, pc)

    n_idx, m_idx = np.nonzero(grid >= WEIGHT_FLOOR)
    weights = grid[n_idx, m_idx]
    # primary key: descending weight; ties: ascending (N, M)
    order = np.lexsort((m_idx, n_idx, -weights))
    weights = weights[order]
    n_idx, m_idx = n_idx[order], m_idx[order]

    target = 1.0 - policy.epsilon
    cum = np.cumsum(weights)
    total = cum[-1] if cum.size else 0.0
    if total < target:
        raise TruncationError(
            f"retainable weight {total:.12f} cannot reach 1 - epsilon = {target:.12f}"
        )
    keep = int(np.searchsorted(cum, target) + 1)
    keep = min(keep, weights.size)

    labels = tuple(SectorLabel(int(n), int(m)) for n, m in zip(n_idx[:keep], m_idx[:keep]))
    retained = float(cum[keep - 1])
    return SectorSelection(
        labels=labels,
        weights=weights[:keep].copy(),
        retained_weight=retained,
        discarded_weight=float(1.0 - retained),
    )
