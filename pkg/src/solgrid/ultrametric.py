"""The ultra-metric on d-adic integers, realized geometrically as cylinder
lengths of the self-similar grid, plus the closed-form series expression kept
as a diagnostic only.

The geometric form is authoritative: the distance between two words is the
length of the deepest grid cylinder on which they agree (conventionally 1
when the first digits already differ, 0 when they agree on every available
digit).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dadic import DadicWord, agreement_depth
from .errors import DegreeMismatch, DepthExceeded, IndexOutOfRange
from .solenoid import SolenoidTable
from .tiling import PartitionLevels, realize_levels

__all__ = [
    "UltraMetricEvaluator",
    "build_evaluator",
    "cylinder_length",
    "u_metric",
    "u_metric_series_diagnostic",
]


class IdenticalWordsWarning(RuntimeWarning):
    """Two words agree on all available digits; distance degraded to 0."""


@dataclass(frozen=True)
class UltraMetricEvaluator:
    """Solenoid table together with its realized grid up to a fixed depth."""

    table: SolenoidTable
    realized: PartitionLevels
    max_depth: int

    def __post_init__(self):
        if self.realized.depth < self.max_depth:
            raise ValueError("realized grid shallower than max_depth")
        lengths = [np.array([1.0])]
        for n in range(1, self.max_depth + 1):
            lengths.append(self.realized.lengths(n))
        object.__setattr__(self, "_lengths", tuple(lengths))

    def level_lengths(self, n: int) -> np.ndarray:
        if not 0 <= n <= self.max_depth:
            raise DepthExceeded(f"level {n} outside realized depth {self.max_depth}")
        return self._lengths[n]

    def u_metric_integers(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Bulk distance between nonnegative integers (as d-adic words).

        The cylinder depth of a pair is the d-adic valuation of x - y;
        equal integers get distance 0.
        """
        x = np.asarray(xs, dtype=np.int64)
        y = np.asarray(ys, dtype=np.int64)
        d = self.table.d
        diff = np.abs(x - y)
        depth = np.zeros(diff.shape, dtype=np.int64)
        work = diff.copy()
        active = work > 0
        while True:
            divisible = active & (work % d == 0)
            if not divisible.any():
                break
            depth[divisible] += 1
            work[divisible] //= d
            if depth.max(initial=0) > self.max_depth:
                raise DepthExceeded("pair agrees deeper than the realized grid")
        out = np.zeros(diff.shape, dtype=float)
        for lvl in np.unique(depth[diff > 0]):
            sel = (depth == lvl) & (diff > 0)
            pos = _reverse_digits_bulk(x[sel] % d**int(lvl), int(lvl), d)
            out[sel] = self.level_lengths(int(lvl))[pos]
        return out


def _reverse_digits_bulk(vals: np.ndarray, depth: int, d: int) -> np.ndarray:
    rev = np.zeros(vals.shape, dtype=np.int64)
    v = vals.copy()
    for _ in range(depth):
        rev = rev * d + v % d
        v //= d
    return rev


def _reverse_digits(w: DadicWord) -> int:
    rev = 0
    for a in w.digits:
        rev = rev * w.d + a
    return rev


def build_evaluator(
    t: SolenoidTable,
    max_depth: int | None = None,
    *,
    check: bool = True,
    consistency_tol: float = 1e-8,
) -> UltraMetricEvaluator:
    """Realize the table's grid and wrap it as a metric evaluator.

    Default depth is the deepest level the table supports (d^n - 2 <= K).
    """
    d = t.d
    if max_depth is None:
        max_depth = 1
        while d ** (max_depth + 1) - 2 <= t.K:
            max_depth += 1
    realized = realize_levels(t, max_depth, check=check, consistency_tol=consistency_tol)
    return UltraMetricEvaluator(t, realized, max_depth)


def cylinder_length(ev: UltraMetricEvaluator, w: DadicWord) -> float:
    """Normalized length of the grid cylinder addressed by the word.

    The level-depth interval is the one whose inverse-branch address is the
    word reversed (first applied branch = most significant digit), i.e. the
    interval at position reverse(digits) in circular order from the base.
    """
    if w.d != ev.table.d:
        raise DegreeMismatch(f"word degree {w.d} != table degree {ev.table.d}")
    if w.depth > ev.max_depth:
        raise DepthExceeded(f"word depth {w.depth} exceeds realized depth {ev.max_depth}")
    return float(ev.level_lengths(w.depth)[_reverse_digits(w)])


def u_metric(ev: UltraMetricEvaluator, a: DadicWord, b: DadicWord) -> float:
    """Geometric ultra-metric: min cylinder length over common prefixes.

    Equals the length of the depth-(n+1) common cylinder by nesting, where
    n is the agreement depth. Returns 1 (the level-0 diameter) for words
    that already differ in digit 0, and 0 with a warning when all available
    digits agree.
    """
    if a.d != b.d:
        raise DegreeMismatch(f"degrees differ: {a.d} != {b.d}")
    depth = max(a.depth, b.depth)
    if depth > ev.max_depth:
        raise DepthExceeded(f"word depth {depth} exceeds realized depth {ev.max_depth}")
    n = agreement_depth(a, b)
    if n is None:
        return 1.0
    if n == depth - 1:
        warnings.warn(
            "words agree on all available digits; returning 0", IdenticalWordsWarning
        )
        return 0.0
    best = np.inf
    for i in range(n + 1):
        best = min(best, cylinder_length(ev, a.truncated(i + 1)))
    return float(best)


def u_metric_series_diagnostic(
    t: SolenoidTable, a: DadicWord, b: DadicWord, *, at_depth: int | None = None
) -> float:
    """Verbatim evaluation of the closed-form series for the ultra-metric.

    inf over 0 <= i <= n of
        1 + sum_{j=A_i}^{E_i} prod_{l=A_i}^{j} s(l)
          + sum_{j=0}^{A_i-1} prod_{l=j}^{A_i-1} s(l),
    with A_i the value of the common prefix of depth i+1 and
    E_i = d^{i+1} - 1. Diagnostic only: for constant s the inf is attained
    at i = 0 and is depth-independent, so this expression is not used as a
    metric anywhere in the package.
    """
    if a.d != b.d or a.d != t.d:
        raise DegreeMismatch("degrees must agree between words and table")
    n = agreement_depth(a, b)
    if n is None:
        raise IndexOutOfRange("series expression needs at least one common digit")
    d = t.d
    digits = a.padded(n + 1).digits

    def term(i: int) -> float:
        A = sum(digits[m] * d**m for m in range(i + 1))
        E = d ** (i + 1) - 1
        if E > t.K:
            raise IndexOutOfRange(f"series references s({E}) beyond K={t.K}")
        s = t.values
        run = 1.0
        tot1 = 0.0
        for j in range(A, E + 1):
            run *= s[j]
            tot1 += run
        run = 1.0
        tot2 = 0.0
        for j in range(A - 1, -1, -1):
            run *= s[j]
            tot2 += run
        return 1.0 + tot1 + tot2

    if at_depth is not None:
        if not 0 <= at_depth <= n:
            raise IndexOutOfRange(f"depth {at_depth} outside 0..{n}")
        return term(at_depth)
    return min(term(i) for i in range(n + 1))
