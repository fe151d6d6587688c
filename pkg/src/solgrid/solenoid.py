"""Finite solenoid-function tables: the matching condition, the free-data
recursion, the cross-ratio function, and modulus (quasiperiodicity / Hölder)
estimation.

A table stores positive ratios s(0..K) for a degree-d system. s(k) for k >= 1
is the ratio of consecutive interval lengths at position k of the self-similar
grid; s(0) is the wraparound ratio across the base point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._util import bucket_maxima, loglog_fit
from .dadic import DadicWord
from .errors import Degenerate, DegreeMismatch, IndexOutOfRange, NonPositive

__all__ = [
    "SolenoidTable",
    "ModulusFit",
    "WordValue",
    "matching_rhs",
    "matching_residual",
    "matching_residuals",
    "generate_from_free_data",
    "cross_ratio_fn",
    "cross_ratio_values",
    "evaluate_at_word",
    "quasiperiodicity_modulus",
    "holder_modulus_fit",
    "holder_fit_of_values",
]


@dataclass(frozen=True)
class SolenoidTable:
    """Degree d plus positive values s(0), ..., s(K)."""

    d: int
    values: np.ndarray
    provenance: str = "manual"

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"degree must be >= 2, got {self.d}")
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("values must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise ValueError("solenoid values must be strictly positive and finite")
        if self.provenance not in ("generated", "extracted", "manual"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "values", v)

    @property
    def K(self) -> int:
        return self.values.size - 1

    @property
    def lo(self) -> float:
        """Recorded lower bound 0 < lo <= s(k)."""
        return float(self.values.min())

    @property
    def hi(self) -> float:
        """Recorded upper bound s(k) <= hi < inf."""
        return float(self.values.max())

    def s(self, k: int) -> float:
        if not 0 <= k <= self.K:
            raise IndexOutOfRange(f"index {k} outside 0..{self.K}")
        return float(self.values[k])

    def oscillation(self) -> float:
        return self.hi - self.lo


class ModulusFit(NamedTuple):
    """Result of a modulus fit. ``exponent`` is alpha-hat for Hölder fits
    and the per-level decay factor mu-hat for quasiperiodicity fits."""

    exponent: float
    constant: float
    residual: float
    pairs_used: int


class WordValue(NamedTuple):
    value: float
    bound: float


def _matching_terms(d: int, s: np.ndarray, a: np.ndarray):
    """Pieces of the matching right-hand side, vectorized over indices a."""
    prod_left = np.ones(a.shape, dtype=float)
    for i in range(1, d):
        prod_left = prod_left * s[d * a - i]
    num = np.zeros(a.shape, dtype=float)
    run = np.ones(a.shape, dtype=float)
    for j in range(0, d):
        run = run * s[d * a + j]
        num = num + run
    den = np.ones(a.shape, dtype=float)
    for j in range(1, d):
        term = np.ones(a.shape, dtype=float)
        for l in range(j, d):
            term = term * s[d * a - l]
        den = den + term
    return prod_left, num, den


def matching_rhs(t: SolenoidTable, a: int) -> float:
    """Right-hand side of the matching condition at index a.

    For d=2 this is s(2a-1) s(2a) (1 + s(2a+1)) / (1 + s(2a-1)).
    """
    if a < 1 or t.d * a + (t.d - 1) > t.K:
        raise IndexOutOfRange(f"matching needs 1 <= a and {t.d}*a+{t.d - 1} <= K={t.K}")
    arr = np.array([a], dtype=np.int64)
    prod_left, num, den = _matching_terms(t.d, t.values, arr)
    return float(prod_left[0] * num[0] / den[0])


def matching_residual(t: SolenoidTable, a: int) -> float:
    """|s(a) - RHS(a)| for the matching condition."""
    return abs(t.s(a) - matching_rhs(t, a))


def matching_residuals(t: SolenoidTable) -> np.ndarray:
    """Residuals at every valid index a = 1 .. (K-d+1)//d."""
    amax = (t.K - (t.d - 1)) // t.d
    if amax < 1:
        raise IndexOutOfRange(f"table too short for any matching check (K={t.K})")
    a = np.arange(1, amax + 1, dtype=np.int64)
    prod_left, num, den = _matching_terms(t.d, t.values, a)
    return np.abs(t.values[a] - prod_left * num / den)


def generate_from_free_data(
    a1: float, evens: Sequence[float], *, wraparound: float | None = None
) -> SolenoidTable:
    """Build a d=2 table from the free data a_1 and a_2, a_4, ..., a_{2M}.

    Odd entries follow a_{2n+1} = (a_n / a_{2n}) (1 + 1/a_{2n-1}) - 1 for
    n = 1..M, so the result satisfies the matching condition at every valid
    index by construction. s(0) is the wraparound value (default a_1).

    Raises NonPositive(index) as soon as a computed odd entry fails to be
    strictly positive — the free data leaves the admissible set.
    """
    evens = [float(e) for e in evens]
    a1 = float(a1)
    if a1 <= 0 or any(e <= 0 for e in evens):
        raise ValueError("free data must be strictly positive")
    M = len(evens)
    a: list[float] = [0.0] * (2 * M + 2)  # 1-based; a[0] unused
    a[1] = a1
    for n in range(1, M + 1):
        a[2 * n] = evens[n - 1]
    for n in range(1, M + 1):
        val = (a[n] / a[2 * n]) * (1.0 + 1.0 / a[2 * n - 1]) - 1.0
        if not val > 0.0:
            raise NonPositive(2 * n + 1)
        a[2 * n + 1] = val
    s0 = a1 if wraparound is None else float(wraparound)
    if s0 <= 0:
        raise ValueError("wraparound must be strictly positive")
    return SolenoidTable(2, np.array([s0] + a[1:], dtype=float), "generated")


def cross_ratio_fn(t: SolenoidTable, x: int) -> float:
    """Solenoid cross-ratio function cr(x) = (1 + s(x)) (1 + 1/s(x+1))."""
    if not 0 <= x < t.K:
        raise IndexOutOfRange(f"cross ratio needs 0 <= x < K={t.K}")
    s = t.values
    return float((1.0 + s[x]) * (1.0 + 1.0 / s[x + 1]))


def cross_ratio_values(t: SolenoidTable) -> np.ndarray:
    """cr(x) for x = 0 .. K-1."""
    s = t.values
    return (1.0 + s[:-1]) * (1.0 + 1.0 / s[1:])


def evaluate_at_word(
    t: SolenoidTable, w: DadicWord, *, fit: ModulusFit | None = None
) -> WordValue:
    """Value of the table at a word, with a truncation error bound.

    The word is truncated to the deepest prefix whose integer value fits
    the table; the bound C * mu^depth comes from the quasiperiodicity fit
    (zero when no truncation happened or the table is constant).
    """
    if w.d != t.d:
        raise DegreeMismatch(f"word degree {w.d} != table degree {t.d}")
    depth = w.depth
    while depth > 0 and w.truncated(depth).integer_value() > t.K:
        depth -= 1
    k = w.truncated(depth).integer_value()
    if k > t.K:
        raise IndexOutOfRange(f"word value {k} exceeds table range {t.K}")
    if depth == w.depth:
        return WordValue(float(t.values[k]), 0.0)
    if fit is None:
        fit = quasiperiodicity_modulus(t)
    bound = fit.constant * fit.exponent**depth if fit.exponent > 0 else 0.0
    return WordValue(float(t.values[k]), float(bound))


def quasiperiodicity_modulus(t: SolenoidTable, *, noise_floor: float = 0.0) -> ModulusFit:
    """Fit of the d-adic quasiperiodicity modulus.

    D_i = max |s(j) - s(k)| over index pairs with d^i | (j - k), j,k >= 1.
    Fits log D_i ~ log C + i log mu over levels with D_i above the floor.
    Returns the mu-hat = 0 sentinel when the table is constant (Degenerate).
    """
    d, K = t.d, t.K
    if K < d * d:
        raise IndexOutOfRange(f"need K >= d^2 = {d * d}, got {K}")
    s = t.values[1:]
    imax = int(math.floor(math.log(K) / math.log(d)))
    levels = []
    oscs = []
    for i in range(imax + 1):
        step = d**i
        osc = 0.0
        for r in range(min(step, s.size)):
            cls = s[r::step]
            if cls.size >= 2:
                osc = max(osc, float(cls.max() - cls.min()))
        levels.append(i)
        oscs.append(osc)
    lv = np.array(levels, dtype=float)
    dv = np.array(oscs, dtype=float)
    keep = dv > noise_floor
    if keep.sum() < 2:
        return ModulusFit(0.0, 0.0, 0.0, int(keep.sum()))
    fit = loglog_fit(np.exp(lv[keep]), dv[keep])  # abscissa e^i so slope = log mu per level
    mu = min(math.exp(fit.slope), 1.0)
    return ModulusFit(mu, math.exp(fit.intercept), fit.rms, int(keep.sum()))


def _pair_sample(n: int, max_pairs: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    total = n * (n - 1) // 2
    if total <= max_pairs:
        xs, ys = np.triu_indices(n, k=1)
        return xs.astype(np.int64), ys.astype(np.int64)
    rng = np.random.default_rng(seed)
    xs = rng.integers(0, n, size=max_pairs, dtype=np.int64)
    ys = rng.integers(0, n, size=max_pairs, dtype=np.int64)
    keep = xs != ys
    return xs[keep], ys[keep]


def holder_fit_of_values(
    values: np.ndarray,
    metric,
    *,
    max_pairs: int = 2_000_000,
    seed: int = 0,
    noise_floor: float = 1e-12,
) -> ModulusFit:
    """Envelope Hölder fit |v(x) - v(y)| <= C u(x,y)^alpha for integer-indexed
    values under an ultra-metric evaluator.

    Per-dyadic-bucket maxima of |dv| against u, least squares on the bucket
    maxima. Raises Degenerate when the values are constant to the floor.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 3:
        raise Degenerate("too few values for a Hölder fit")
    xs, ys = _pair_sample(n, max_pairs, seed)
    dv = np.abs(values[xs] - values[ys])
    if float(dv.max(initial=0.0)) <= noise_floor:
        raise Degenerate("values constant to the noise floor")
    u = metric.u_metric_integers(xs, ys)
    keep = (dv > noise_floor) & (u > 0)
    lx, lv = bucket_maxima(np.log(u[keep]), np.log(dv[keep]))
    if lx.size < 2:
        raise Degenerate("all envelope buckets empty")
    fit = loglog_fit(np.exp(lx), np.exp(lv))
    return ModulusFit(fit.slope, math.exp(fit.intercept), fit.rms, int(keep.sum()))


def holder_modulus_fit(
    t: SolenoidTable,
    metric,
    *,
    max_pairs: int = 2_000_000,
    seed: int = 0,
    noise_floor: float = 1e-12,
    index_cap: int | None = None,
) -> ModulusFit:
    """Hölder modulus of the table itself under |u|_s.

    ``metric`` is an ultra-metric evaluator built from the same table.
    ``index_cap`` restricts pairs to indices <= cap (used to keep the
    envelope clear of the extraction noise floor for extracted tables).
    """
    hi = t.K if index_cap is None else min(t.K, index_cap)
    return holder_fit_of_values(
        t.values[: hi + 1], metric, max_pairs=max_pairs, seed=seed, noise_floor=noise_floor
    )
