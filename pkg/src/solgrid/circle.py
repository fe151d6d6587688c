"""Expanding circle maps: analytic families and maps realized from solenoid
tables, Markov partitions via monotone preimage solving, solenoid-function
extraction from asymptotic length ratios, and combinatorial conjugacies.

Maps are represented by their lifts F: R -> R with F(x+1) = F(x) + d,
strictly increasing. Partitions are anchored at a fixed point p and stored
on the lift window [p, p+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._util import loglog_fit
from .distortion import PiecewiseMonotone
from .errors import (
    CapExceeded,
    DegreeMismatch,
    IndexOutOfRange,
    NoConvergence,
)
from .solenoid import SolenoidTable
from .tiling import PartitionLevels, realize_levels

__all__ = [
    "CircleMap",
    "LinearMap",
    "TrigPerturbedMap",
    "SampledMonotoneMap",
    "ExtractionDiagnostics",
    "fixed_point",
    "partition",
    "extract_solenoid",
    "realize_map",
    "conjugacy_map",
    "eq12_2_diagnostic",
]

PARTITION_CAP = 1 << 20
_BISECT_ITERS = 80


class CircleMap:
    """Degree-d expanding circle map given through its lift."""

    d: int
    form: str
    expansion_floor: float

    def lift(self, x):
        raise NotImplementedError

    def lift_inverse(self, t):
        """Exact inverse of the lift when available, else None."""
        return None

    def __call__(self, x):
        return np.mod(self.lift(x), 1.0)


class LinearMap(CircleMap):
    """x -> d x mod 1."""

    form = "linear"

    def __init__(self, d: int):
        if d < 2:
            raise ValueError("degree must be >= 2")
        self.d = d
        self.expansion_floor = float(d)

    def lift(self, x):
        return self.d * np.asarray(x, dtype=float)

    def lift_inverse(self, t):
        return np.asarray(t, dtype=float) / self.d


class TrigPerturbedMap(CircleMap):
    """x -> d x + sum_k eps_k sin(2 pi k x + phi_k) mod 1.

    eps is indexed by harmonic (eps[0] multiplies sin(2 pi x)). The
    expansion certificate d - 2 pi sum k |eps_k| > 1 is enforced.
    """

    form = "trig_perturbed"

    def __init__(self, d: int, eps: Sequence[float], phases: Sequence[float] | None = None):
        if d < 2:
            raise ValueError("degree must be >= 2")
        self.d = d
        self.eps = np.asarray(eps, dtype=float)
        if phases is None:
            phases = np.zeros_like(self.eps)
        self.phases = np.asarray(phases, dtype=float)
        if self.phases.shape != self.eps.shape:
            raise ValueError("phases must match eps in length")
        self.harmonics = np.arange(1, self.eps.size + 1, dtype=float)
        floor = d - 2.0 * math.pi * float(np.sum(self.harmonics * np.abs(self.eps)))
        if floor <= 1.0:
            raise ValueError(f"map not certified expanding: derivative floor {floor:.4f} <= 1")
        self.expansion_floor = floor

    def lift(self, x):
        x = np.asarray(x, dtype=float)
        phase = 2.0 * math.pi * np.multiply.outer(x, self.harmonics) + self.phases
        return self.d * x + np.sin(phase) @ self.eps


class SampledMonotoneMap(CircleMap):
    """Piecewise-linear lift through sampled points.

    xs ascend over one fundamental window [x0, x0+1] and ys = lift(xs) with
    ys[-1] = ys[0] + d. Used both for user-sampled maps and for maps
    realized from solenoid tables.
    """

    def __init__(self, d: int, xs: np.ndarray, ys: np.ndarray, form: str = "sampled"):
        if d < 2:
            raise ValueError("degree must be >= 2")
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or xs.shape != ys.shape:
            raise ValueError("xs and ys must be matching 1-d arrays")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ValueError("sampled lift must be strictly increasing")
        if abs((xs[-1] - xs[0]) - 1.0) > 1e-12:
            raise ValueError("xs must span one unit window")
        if abs((ys[-1] - ys[0]) - d) > 1e-9:
            raise ValueError("ys must gain exactly d over the window")
        self.d = d
        self.form = form
        self.xs = xs
        self.ys = ys
        slopes = np.diff(ys) / np.diff(xs)
        self.expansion_floor = float(slopes.min())

    def lift(self, x):
        x = np.asarray(x, dtype=float)
        x0 = self.xs[0]
        wind = np.floor(x - x0)
        u = x - wind
        return np.interp(u, self.xs, self.ys) + wind * self.d

    def lift_inverse(self, t):
        t = np.asarray(t, dtype=float)
        y0 = self.ys[0]
        wind = np.floor((t - y0) / self.d)
        v = t - wind * self.d
        return np.interp(v, self.ys, self.xs) + wind


def fixed_point(m: CircleMap, tol: float = 1e-14) -> float:
    """Fixed point continuing p = 0 of the unperturbed family.

    Solves lift(u) - u = w0 on [-1/2, 1/2] by bisection, where w0 is the
    integer the unperturbed branch through 0 realizes.
    """
    w0 = float(np.round(float(m.lift(0.0))))
    lo, hi = -0.5, 0.5

    def g(u):
        return float(m.lift(u)) - u - w0

    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo % 1.0
    if ghi == 0.0:
        return hi % 1.0
    if glo > 0 or ghi < 0:
        raise NoConvergence("fixed point not bracketed in [-1/2, 1/2]")
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if g(mid) <= 0:
            lo = mid
        else:
            hi = mid
    p = 0.5 * (lo + hi)
    if abs(g(p)) > tol:
        raise NoConvergence(f"fixed-point residual {abs(g(p)):.2e} above {tol:.0e}")
    return p % 1.0


def _solve_branches(m: CircleMap, targets: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Preimages of lift-values ``targets`` within [lo, hi] (vectorized)."""
    inv = m.lift_inverse(targets)
    if inv is not None:
        return np.asarray(inv, dtype=float)
    a = np.full(targets.shape, lo)
    b = np.full(targets.shape, hi)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (a + b)
        below = m.lift(mid) <= targets
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
    return 0.5 * (a + b)


def partition(m: CircleMap, n: int, cap: int = PARTITION_CAP) -> PartitionLevels:
    """Levels 1..n of the Markov interval partition anchored at the fixed
    point: endpoints are the iterated preimages of p in circular order.

    Endpoints of level k are carried into level k+1 exactly (nesting is
    machine-exact); only the new preimages are solved.
    """
    if n < 1:
        raise ValueError("level must be >= 1")
    if m.d**n > cap:
        raise CapExceeded(f"d^n = {m.d ** n} exceeds cap {cap}")
    p = fixed_point(m)
    w0 = float(np.round(float(m.lift(p)) - p))
    d = m.d

    def preimages(targets: np.ndarray, branches: np.ndarray) -> np.ndarray:
        # solve lift(x) = target + w0 + j on [p, p+1) for each branch j
        tt = (targets[None, :] + w0) + branches[:, None]
        return _solve_branches(m, tt.ravel(), p, p + 1.0)

    levels = []
    current = np.array([p])
    new = np.array([p])
    for k in range(1, n + 1):
        if k == 1:
            fresh = preimages(np.array([p]), np.arange(1, d))
        else:
            fresh = preimages(new, np.arange(0, d))
        merged = np.sort(np.concatenate([current, fresh]))
        levels.append(merged)
        current = merged
        new = np.sort(fresh)
    return PartitionLevels(d, tuple(levels), base=p)


@dataclass(frozen=True)
class ExtractionDiagnostics:
    """Cauchy diagnostics of a solenoid extraction."""

    depth: int
    K: int
    sup_deviations: np.ndarray  # sup_k |s_{n+1}(k) - s_n(k)| for n = 1..depth-1
    rate: float                 # fitted geometric decay factor per level

    def converged(self, threshold: float = 0.9) -> bool:
        return self.rate < threshold


def _level_ratios(part: PartitionLevels, n: int) -> np.ndarray:
    ell = part.lengths(n)
    return ell[1:] / ell[:-1]


def extract_solenoid(
    m: CircleMap, N: int, K: int | None = None, cap: int = PARTITION_CAP
) -> tuple[SolenoidTable, ExtractionDiagnostics]:
    """Asymptotic length-ratio table of a map, read off at depth N.

    s(k) = |I^N_{k+1}| / |I^N_k| for 1 <= k <= K, and s(0) is the wraparound
    ratio |I^N_1| / |I^N_{d^N}| across the fixed point. Diagnostics report
    the per-level sup deviation of the ratios and its fitted decay factor.
    """
    d = m.d
    if K is None:
        K = d**N - 2
    if K > d**N - 2:
        raise IndexOutOfRange(f"K must be <= d^N - 2 = {d ** N - 2}, got {K}")
    if K < 1:
        raise ValueError("K must be >= 1")
    part = partition(m, N, cap=cap)
    sups = []
    prev = None
    for n in range(1, N + 1):
        ratios = _level_ratios(part, n)[: d**n - 2]
        if prev is not None and prev.size > 0:
            common = min(prev.size, ratios.size, K)
            sups.append(float(np.max(np.abs(ratios[:common] - prev[:common]))))
        prev = ratios
    ell = part.lengths(N)
    s0 = float(ell[0] / ell[-1])
    values = np.concatenate(([s0], prev[:K]))
    table = SolenoidTable(d, values, "extracted")
    sup_arr = np.array(sups, dtype=float)
    pos = sup_arr > 0
    if pos.sum() >= 2:
        lv = np.arange(1, sup_arr.size + 1, dtype=float)
        fit = loglog_fit(np.exp(lv[pos]), sup_arr[pos])
        rate = math.exp(fit.slope)
    else:
        rate = 0.0
    return table, ExtractionDiagnostics(N, K, sup_arr, rate)


def realize_map(
    t: SolenoidTable, N: int, *, consistency_tol: float = 1e-8
) -> SampledMonotoneMap:
    """Piecewise-linear expanding map whose Markov partition is the grid
    realized from the table.

    Sends the level-N grid point with index j to the level-(N-1) point with
    index j mod d^{N-1}; monotone piecewise-linear between the finest points.
    Fixes 0 and has degree d. Raises Inconsistent when the table violates
    the matching condition beyond tolerance.
    """
    if N < 2:
        raise ValueError("realization needs depth >= 2")
    levels = realize_levels(t, N, check=True, consistency_tol=consistency_tol)
    d = t.d
    eN = levels.endpoints(N)
    eC = levels.endpoints(N - 1)
    j = np.arange(d**N, dtype=np.int64)
    xs = np.append(eN, 1.0)
    ys = np.append(eC[j % d ** (N - 1)] + j // d ** (N - 1), float(d))
    return SampledMonotoneMap(d, xs, ys, form="realized")


def conjugacy_map(f: CircleMap, g: CircleMap, N: int) -> PiecewiseMonotone:
    """Topological conjugacy sample matching f's level-N partition points
    to g's in circular order, monotone piecewise-linear in between.

    On lifts it maps [p_f, p_f + 1] onto [p_g, p_g + 1]; for maps fixing 0
    this is an endpoint-fixing homeomorphism of [0, 1].
    """
    if f.d != g.d:
        raise DegreeMismatch(f"degrees differ: {f.d} != {g.d}")
    pf = partition(f, N)
    pg = partition(g, N)
    xs = np.append(pf.endpoints(N), pf.base + 1.0)
    ys = np.append(pg.endpoints(N), pg.base + 1.0)
    return PiecewiseMonotone(xs, ys, kind="conjugacy", resolution_level=N)


@dataclass(frozen=True)
class ChartComparison:
    """Comparability constant and per-level mixed log-ratio defects."""

    b_hat: float
    levels: np.ndarray
    defects: np.ndarray
    rate: float


def eq12_2_diagnostic(m: CircleMap, charts, n: int) -> ChartComparison:
    """Adjacent-interval comparability and the mixed log-ratio decay.

    For charts (u, v) and each level k: the ratio of u-lengths of adjacent
    partition intervals (comparability b-hat), and the sup over adjacent
    pairs of |log (|u(I)| |v(E(I'))|) / (|u(I')| |v(E(I))|)| where E maps a
    level-k interval onto a level-(k-1) interval. Defects are reported for
    k >= 2 with a fitted geometric decay factor.
    """
    u, v = charts
    part = partition(m, n)
    d = m.d
    b_hat = 1.0
    levels = []
    defects = []
    prev_chart_lens = None
    for k in range(1, n + 1):
        e = np.append(part.endpoints(k), part.base + 1.0)
        lu = np.diff(np.asarray(u(e), dtype=float))
        ratios = lu[1:] / lu[:-1]
        b_hat = max(b_hat, float(ratios.max()), float(1.0 / ratios.min()))
        lv_ = np.diff(np.asarray(v(e), dtype=float))
        if prev_chart_lens is not None:
            parent = np.arange(d**k, dtype=np.int64) % d ** (k - 1)
            img = prev_chart_lens[parent]
            mixed = np.log(lu[:-1] * img[1:] / (lu[1:] * img[:-1]))
            levels.append(k)
            defects.append(float(np.max(np.abs(mixed))))
        prev_chart_lens = lv_
    lev = np.array(levels, dtype=float)
    def_ = np.array(defects, dtype=float)
    pos = def_ > 0
    if pos.sum() >= 2:
        fit = loglog_fit(np.exp(lev[pos]), def_[pos])
        rate = math.exp(fit.slope)
    else:
        rate = 0.0
    return ChartComparison(b_hat, lev, def_, rate)
