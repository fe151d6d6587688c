"""Tiling sequences, the d-amalgamation operator, and realization of the
self-similar grid (per-level interval lengths) from a solenoid table.

A tiling window holds consecutive-length ratios r_m = |I_{m+1}|/|I_m| over a
finite integer index range. The d-amalgamation operator merges d consecutive
intervals into one and returns the coarse ratio sequence; quasiperiodic fixed
points of it are exactly the tables passing the matching condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._util import prefix_sums
from .errors import Inconsistent, IndexOutOfRange, WindowTooNarrow
from .solenoid import SolenoidTable

__all__ = [
    "TilingWindow",
    "PartitionLevels",
    "window_from_table",
    "amalgamate",
    "fixed_point_residual",
    "realize_levels",
    "cross_level_consistency",
]


@dataclass(frozen=True)
class TilingWindow:
    """Positive ratios r_m for lo <= m <= hi."""

    d: int
    lo: int
    ratios: np.ndarray

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("degree must be >= 2")
        r = np.asarray(self.ratios, dtype=float)
        if r.ndim != 1 or r.size < 1:
            raise ValueError("ratios must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise ValueError("ratios must be strictly positive and finite")
        object.__setattr__(self, "ratios", r)

    @property
    def hi(self) -> int:
        return self.lo + self.ratios.size - 1

    @property
    def bound(self) -> float:
        """B >= 1 with B^-1 <= r_m <= B."""
        return float(max(self.ratios.max(), 1.0 / self.ratios.min()))

    def ratio(self, m: int) -> float:
        if not self.lo <= m <= self.hi:
            raise IndexOutOfRange(f"index {m} outside window [{self.lo}, {self.hi}]")
        return float(self.ratios[m - self.lo])


def window_from_table(t: SolenoidTable) -> TilingWindow:
    """Window r_m = s(m) for m = 1..K."""
    if t.K < 1:
        raise IndexOutOfRange("table has no sequence entries beyond s(0)")
    return TilingWindow(t.d, 1, t.values[1:])


def _coarse_range(w: TilingWindow) -> tuple[int, int]:
    d = w.d
    i_lo = math.ceil((w.lo + d - 1) / d)
    i_hi = (w.hi + 1 - d) // d
    if i_lo > i_hi:
        raise WindowTooNarrow(
            f"window [{w.lo}, {w.hi}] supports no coarse index at degree {d}"
        )
    return i_lo, i_hi


def amalgamate(w: TilingWindow) -> TilingWindow:
    """d-amalgamation: coarse ratio s_i from fine ratios around block i.

    s_i = (prod of r over block i) * (1 + partial sums into block i+1)
                                   / (1 + partial sums into block i),
    where block i covers fine indices d(i-1)+1 .. di. For d=2:
    s_i = r_{2i-1} r_{2i} (1 + r_{2i+1}) / (1 + r_{2i-1}).
    """
    d = w.d
    i_lo, i_hi = _coarse_range(w)
    idx = np.arange(i_lo, i_hi + 1, dtype=np.int64)

    def fine(offset: np.ndarray) -> np.ndarray:
        return w.ratios[offset - w.lo]

    block = np.ones(idx.shape, dtype=float)
    for l in range(1, d + 1):
        block = block * fine(d * (idx - 1) + l)
    num = np.ones(idx.shape, dtype=float)
    run = np.ones(idx.shape, dtype=float)
    for j in range(1, d):
        run = run * fine(d * idx + j)
        num = num + run
    den = np.ones(idx.shape, dtype=float)
    run = np.ones(idx.shape, dtype=float)
    for j in range(1, d):
        run = run * fine(d * (idx - 1) + j)
        den = den + run
    return TilingWindow(d, i_lo, block * num / den)


def fixed_point_residual(w: TilingWindow) -> float:
    """sup over comparable coarse indices of |A_d(r)_i - r_i|."""
    coarse = amalgamate(w)
    j0 = max(coarse.lo, w.lo)
    j1 = min(coarse.hi, w.hi)
    if j0 > j1:
        raise WindowTooNarrow("no coarse index overlaps the window")
    a = coarse.ratios[j0 - coarse.lo : j1 - coarse.lo + 1]
    b = w.ratios[j0 - w.lo : j1 - w.lo + 1]
    return float(np.max(np.abs(a - b)))


@dataclass(frozen=True)
class PartitionLevels:
    """Per-level ordered endpoints of a nested circle partition.

    ``levels[n-1]`` holds the d^n endpoint positions of level n, strictly
    increasing, starting at the base point; positions live on the lift
    window [base, base+1) so wraparound never reorders them. Lengths at
    each level sum to 1.
    """

    d: int
    levels: tuple[np.ndarray, ...]
    base: float = 0.0

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("degree must be >= 2")
        lv = tuple(np.asarray(e, dtype=float) for e in self.levels)
        if not lv:
            raise ValueError("need at least one level")
        for n, e in enumerate(lv, start=1):
            if e.size != self.d**n:
                raise ValueError(f"level {n} must have {self.d ** n} endpoints, got {e.size}")
            if e[0] != self.base:
                raise ValueError(f"level {n} must start at the base point")
            if np.any(np.diff(e) <= 0) or e[-1] >= self.base + 1.0:
                raise ValueError(f"level {n} endpoints must increase within [base, base+1)")
        object.__setattr__(self, "levels", lv)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def endpoints(self, n: int) -> np.ndarray:
        if not 1 <= n <= self.depth:
            raise IndexOutOfRange(f"level {n} outside 1..{self.depth}")
        return self.levels[n - 1]

    def lengths(self, n: int) -> np.ndarray:
        e = self.endpoints(n)
        return np.diff(np.append(e, self.base + 1.0))


def realize_levels(
    t: SolenoidTable,
    N: int,
    *,
    check: bool = True,
    consistency_tol: float = 1e-8,
) -> PartitionLevels:
    """Realize levels 1..N of the self-similar grid encoded by the table.

    Level n has lengths proportional to (1, s(1), s(1)s(2), ...): the ratio
    of consecutive intervals at position k is s(k), the same tiling at every
    level, normalized to total length 1. Needs K >= d^N - 1 for the full
    ratio chain; at K = d^N - 2 exactly, the last length is closed through
    the wraparound ratio s(0).
    """
    d = t.d
    if N < 1:
        raise ValueError("depth must be >= 1")
    if t.K < d**N - 2:
        raise IndexOutOfRange(f"need K >= d^N - 2 = {d ** N - 2}, got K={t.K}")
    levels = []
    for n in range(1, N + 1):
        m = d**n
        if t.K >= m - 1:
            ell = np.cumprod(np.concatenate(([1.0], t.values[1:m])))
        else:
            ell = np.empty(m, dtype=float)
            ell[: m - 1] = np.cumprod(np.concatenate(([1.0], t.values[1 : m - 1])))
            ell[m - 1] = ell[0] / t.values[0]
        ell = ell / ell.sum()
        e = np.concatenate(([0.0], prefix_sums(ell)[:-1]))
        levels.append(e)
    p = PartitionLevels(d, tuple(levels))
    if check and N >= 2:
        resid = cross_level_consistency(p)
        if resid > consistency_tol:
            raise Inconsistent(
                f"cross-level consistency {resid:.3e} exceeds {consistency_tol:.1e}; "
                "table violates the matching condition"
            )
    return p


def cross_level_consistency(p: PartitionLevels) -> float:
    """sup over levels and positions of the relative defect between a
    parent interval's length and the sum of its d children."""
    if p.depth < 2:
        raise IndexOutOfRange("need depth >= 2")
    worst = 0.0
    for n in range(1, p.depth):
        coarse = p.lengths(n)
        fine = p.lengths(n + 1).reshape(p.d**n, p.d).sum(axis=1)
        worst = max(worst, float(np.max(np.abs(coarse - fine) / coarse)))
    return worst
