"""(B, M) grids, monotone homeomorphisms, and the four distortion
functionals: ratio, logarithmic ratio distortion, cross ratio, and
cross-ratio distortion — plus homeomorphism sweeps over grids and the
first-order (Taylor) identity diagnostics.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DomainViolation,
    GridAxiomViolation,
    NotAdjacent,
    TooFewLevels,
)
from .tiling import PartitionLevels

__all__ = [
    "Homeomorphism",
    "Affine",
    "Moebius",
    "Power",
    "MonomialPerturbation",
    "PiecewiseMonotone",
    "GridSpec",
    "DistortionDataset",
    "dyadic_grid",
    "grid_from_partition",
    "grid_from_levels",
    "build_grid",
    "lrd",
    "cross_ratio",
    "crd",
    "sweep",
    "taylor_identity_residual",
    "TaylorIdentityReport",
    "DATASET_FIELDS",
]

# Intervals shorter than this fraction of the full interval are rejected at
# grid construction rather than special-cased downstream.
DEGENERATE_FRACTION = 1e-15


class Homeomorphism:
    """Strictly increasing map of a compact interval; vectorized call."""

    kind: str
    domain: tuple[float, float]

    def __call__(self, x):
        raise NotImplementedError

    def _check_increasing_on_grid(self, samples: int = 4097):
        a, b = self.domain
        x = np.linspace(a, b, samples)
        y = np.asarray(self(x), dtype=float)
        if not np.all(np.isfinite(y)) or np.any(np.diff(y) <= 0):
            raise ValueError(f"{self.kind} map is not strictly increasing on its domain")


class Affine(Homeomorphism):
    kind = "affine"

    def __init__(self, a: float, b: float, domain=(0.0, 1.0)):
        if a <= 0:
            raise ValueError("affine slope must be positive")
        self.a, self.b = float(a), float(b)
        self.domain = (float(domain[0]), float(domain[1]))

    def __call__(self, x):
        return self.a * np.asarray(x, dtype=float) + self.b


class Moebius(Homeomorphism):
    """x -> (a x + b) / (c x + d), increasing and pole-free on the domain."""

    kind = "moebius"

    def __init__(self, a: float, b: float, c: float, d: float, domain=(0.0, 1.0)):
        if a * d - b * c <= 0:
            raise ValueError("moebius determinant must be positive for an increasing map")
        lo, hi = float(domain[0]), float(domain[1])
        if (c * lo + d) * (c * hi + d) <= 0:
            raise ValueError("moebius pole inside the domain")
        self.a, self.b, self.c, self.dd = float(a), float(b), float(c), float(d)
        self.domain = (lo, hi)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return (self.a * x + self.b) / (self.c * x + self.dd)


class Power(Homeomorphism):
    """x -> x^gamma on [0, b]."""

    kind = "power"

    def __init__(self, gamma: float, domain=(0.0, 1.0)):
        if gamma <= 0:
            raise ValueError("power exponent must be positive")
        if domain[0] < 0:
            raise ValueError("power map needs a nonnegative domain")
        self.gamma = float(gamma)
        self.domain = (float(domain[0]), float(domain[1]))

    def __call__(self, x):
        return np.power(np.asarray(x, dtype=float), self.gamma)


class MonomialPerturbation(Homeomorphism):
    """x -> x + sum_j c_j x^{gamma_j} on [0, b]; exponents may be fractional."""

    kind = "polynomial_perturbation"

    def __init__(self, terms: Sequence[tuple[float, float]], domain=(0.0, 1.0)):
        self.terms = [(float(c), float(g)) for c, g in terms]
        if any(g < 1.0 for _, g in self.terms):
            raise ValueError("perturbation exponents must be >= 1")
        self.domain = (float(domain[0]), float(domain[1]))
        self._check_increasing_on_grid()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y = x.copy()
        for c, g in self.terms:
            y = y + c * np.power(x, g)
        return y


class PiecewiseMonotone(Homeomorphism):
    """Monotone piecewise-linear interpolant through sampled points.

    Covers both user-sampled monotone data and conjugacy samples; for
    conjugacies ``resolution_level`` records the partition depth of the
    sample so sweeps can stay at levels coarse enough for the
    interpolation error to be negligible.
    """

    def __init__(self, xs, ys, kind: str = "sampled_monotone", resolution_level: int | None = None):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or xs.shape != ys.shape:
            raise ValueError("xs and ys must be matching 1-d arrays")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ValueError("sampled map must be strictly increasing")
        self.xs, self.ys = xs, ys
        self.kind = kind
        self.resolution_level = resolution_level
        self.domain = (float(xs[0]), float(xs[-1]))

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.ys)


@dataclass(frozen=True)
class GridSpec:
    """Nested multi-level partition of a compact interval.

    ``levels[i]`` holds the level-(i+1) endpoints including both interval
    ends; B bounds adjacent length ratios and M the children per interval.
    """

    levels: tuple[np.ndarray, ...]
    B: float
    M: int

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.levels[0][0]), float(self.levels[0][-1])

    @property
    def depth(self) -> int:
        return len(self.levels)

    def endpoints(self, n: int) -> np.ndarray:
        return self.levels[n - 1]

    def omega(self, n: int) -> int:
        return self.levels[n - 1].size - 1


def _validate_levels(levels: Sequence[np.ndarray]) -> tuple[float, int]:
    levels = [np.asarray(e, dtype=float) for e in levels]
    if not levels:
        raise GridAxiomViolation("ii", "no levels given")
    a, b = levels[0][0], levels[0][-1]
    span = b - a
    if not span > 0:
        raise GridAxiomViolation("i", "empty interval")
    B = 1.0
    M = 2
    for n, e in enumerate(levels, start=1):
        if e.size < 3 and n > 1:
            raise GridAxiomViolation("vii", f"level {n} has fewer than 2 intervals")
        d = np.diff(e)
        if np.any(d <= 0):
            raise GridAxiomViolation("iii", f"level {n} endpoints not strictly increasing")
        if np.any(d < DEGENERATE_FRACTION * span):
            raise GridAxiomViolation("vi", f"level {n} has a degenerate interval")
        if e[0] != a or e[-1] != b:
            raise GridAxiomViolation("ii", f"level {n} does not cover the interval")
        ratios = d[1:] / d[:-1]
        if ratios.size:
            B = max(B, float(ratios.max()), float(1.0 / ratios.min()))
        if n >= 2:
            prev = levels[n - 2]
            pos = np.clip(np.searchsorted(e, prev), 0, e.size - 1)
            left = np.maximum(pos - 1, 0)
            nearest = np.where(np.abs(e[left] - prev) < np.abs(e[pos] - prev), left, pos)
            if np.any(np.abs(e[nearest] - prev) > 1e-12 * span):
                raise GridAxiomViolation("v", f"level {n - 1} endpoint missing at level {n}")
            children = np.diff(nearest)
            if np.any(children < 2):
                raise GridAxiomViolation("vii", f"level {n} splits an interval fewer than 2 ways")
            M = max(M, int(children.max()))
    return B, M


def grid_from_levels(levels: Sequence[np.ndarray]) -> GridSpec:
    """Validate explicit endpoint levels against the grid axioms."""
    B, M = _validate_levels(levels)
    return GridSpec(tuple(np.asarray(e, dtype=float) for e in levels), B, M)


def dyadic_grid(interval: tuple[float, float], depth: int) -> GridSpec:
    """The symmetric dyadic grid: B = 1, M = 2."""
    a, b = float(interval[0]), float(interval[1])
    levels = [a + (b - a) * np.arange(2**n + 1) / 2**n for n in range(1, depth + 1)]
    return grid_from_levels(levels)


def grid_from_partition(p: PartitionLevels, chart: Callable | None = None) -> GridSpec:
    """Grid of one fundamental interval cut at a partition's base point."""
    levels = []
    for n in range(1, p.depth + 1):
        e = np.append(p.endpoints(n), p.base + 1.0)
        if chart is not None:
            e = np.asarray(chart(e), dtype=float)
        levels.append(e)
    return grid_from_levels(levels)


def build_grid(source: str, **kwargs) -> GridSpec:
    """Dispatcher over the supported grid sources."""
    if source == "dyadic":
        return dyadic_grid(kwargs["interval"], kwargs["depth"])
    if source == "from_partition":
        return grid_from_partition(kwargs["partition"], kwargs.get("chart"))
    if source == "explicit":
        return grid_from_levels(kwargs["levels"])
    raise ValueError(f"unknown grid source {source!r}")


def _check_adjacent(I: tuple[float, float], J: tuple[float, float]):
    if not (I[0] < I[1] and J[0] < J[1]):
        raise NotAdjacent("intervals must be nondegenerate")
    if I[1] != J[0]:
        raise NotAdjacent(f"intervals {I} and {J} do not share an endpoint")


def _check_domain(h: Homeomorphism, lo: float, hi: float):
    a, b = h.domain
    eps = 1e-12 * (b - a)
    if lo < a - eps or hi > b + eps:
        raise DomainViolation(f"[{lo}, {hi}] outside domain [{a}, {b}]")


def lrd(h: Homeomorphism, I: tuple[float, float], J: tuple[float, float]) -> float:
    """Logarithmic ratio distortion log[(|I|/|J|) (|h(J)|/|h(I)|)] of two
    adjacent intervals; equals the log of the average-derivative ratio."""
    _check_adjacent(I, J)
    _check_domain(h, I[0], J[1])
    y = np.asarray(h(np.array([I[0], I[1], J[1]])), dtype=float)
    return float(math.log((I[1] - I[0]) / (J[1] - J[0]) * (y[2] - y[1]) / (y[1] - y[0])))


def cross_ratio(I: tuple[float, float], J: tuple[float, float], L: tuple[float, float]) -> float:
    """log(1 + (|J|/|I|) (|I|+|J|+|L|)/|L|) for consecutive adjacent
    intervals; algebraically the log of the classical 4-point cross ratio
    (x2-x0)(x3-x1) / ((x1-x0)(x3-x2))."""
    _check_adjacent(I, J)
    _check_adjacent(J, L)
    a, b, c = I[1] - I[0], J[1] - J[0], L[1] - L[0]
    return float(math.log1p(b / a * (a + b + c) / c))


def crd(
    h: Homeomorphism,
    I: tuple[float, float],
    J: tuple[float, float],
    L: tuple[float, float],
) -> float:
    """Cross-ratio distortion: cr of the image triple minus cr of the triple."""
    _check_domain(h, I[0], L[1])
    y = np.asarray(h(np.array([I[0], I[1], J[1], L[1]])), dtype=float)
    return cross_ratio((y[0], y[1]), (y[1], y[2]), (y[2], y[3])) - cross_ratio(I, J, L)


DATASET_FIELDS = ("n", "beta", "len", "r", "r_h", "lrd", "cr", "cr_h", "crd")
_DATASET_DTYPE = np.dtype(
    [("n", np.int64), ("beta", np.int64)] + [(f, np.float64) for f in DATASET_FIELDS[2:]]
)


@dataclass(frozen=True)
class DistortionDataset:
    """One record per (level, position): lengths, ratios, and distortions.

    cr fields are NaN on the last position of each level (no third
    interval). Records are ordered by (n, beta).
    """

    data: np.ndarray
    B: float
    M: int

    def levels(self) -> np.ndarray:
        return np.unique(self.data["n"])

    def level(self, n: int) -> np.ndarray:
        return self.data[self.data["n"] == n]


def _sweep_level(h: Homeomorphism, e: np.ndarray, n: int) -> np.ndarray:
    lens = np.diff(e)
    hlens = np.diff(np.asarray(h(e), dtype=float))
    r = lens[1:] / lens[:-1]
    r_h = hlens[1:] / hlens[:-1]
    lrd_ = np.log(r_h / r)
    omega = lens.size
    rec = np.empty(omega - 1, dtype=_DATASET_DTYPE)
    rec["n"] = n
    rec["beta"] = np.arange(1, omega)
    rec["len"] = lens[:-1]
    rec["r"] = r
    rec["r_h"] = r_h
    rec["lrd"] = lrd_
    cr = np.full(omega - 1, np.nan)
    cr_h = np.full(omega - 1, np.nan)
    if omega >= 3:
        cr[:-1] = np.log1p(r[:-1] * (lens[:-2] + lens[1:-1] + lens[2:]) / lens[2:])
        cr_h[:-1] = np.log1p(r_h[:-1] * (hlens[:-2] + hlens[1:-1] + hlens[2:]) / hlens[2:])
    rec["cr"] = cr
    rec["cr_h"] = cr_h
    rec["crd"] = cr_h - cr
    return rec


def sweep(
    h: Homeomorphism,
    g: GridSpec,
    level_range: tuple[int, int] | None = None,
    threads: int = 1,
) -> DistortionDataset:
    """All four functionals over every grid interval in the level range.

    Conjugacy/sampled maps are restricted to levels at least two coarser
    than their sample resolution so interpolation error stays below the
    functional tolerances.
    """
    n_lo, n_hi = level_range if level_range is not None else (1, g.depth)
    if not 1 <= n_lo <= n_hi <= g.depth:
        raise ValueError(f"level range ({n_lo}, {n_hi}) outside 1..{g.depth}")
    res = getattr(h, "resolution_level", None)
    if res is not None and n_hi > res - 2:
        raise DomainViolation(
            f"sampled map at resolution {res} supports sweeps only up to level {res - 2}"
        )
    _check_domain(h, g.interval[0], g.interval[1])
    ns = range(n_lo, n_hi + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda n: _sweep_level(h, g.endpoints(n), n), ns))
    else:
        parts = [_sweep_level(h, g.endpoints(n), n) for n in ns]
    return DistortionDataset(np.concatenate(parts), g.B, g.M)


@dataclass(frozen=True)
class TaylorIdentityReport:
    """Residuals of the first-order cross-ratio identity
    crd ~ lrd/(1 + 1/r) - lrd'/(1 + r') with quadratic error."""

    n: np.ndarray
    beta: np.ndarray
    residual: np.ndarray
    quad_scale: np.ndarray      # max(lrd^2, lrd'^2) per record
    c_hat: float                # fitted constant: max residual / scale
    per_level_c: dict[int, float]

    def stable(self, last: int = 4, tol: float = 0.2) -> bool:
        """Whether the fitted constant varies by at most ``tol`` (relative)
        over the deepest ``last`` levels."""
        ns = sorted(self.per_level_c)[-last:]
        cs = np.array([self.per_level_c[n] for n in ns])
        if np.all(cs == 0.0):
            return True
        mean = cs.mean()
        if mean == 0.0:
            return False
        return bool(np.max(np.abs(cs - mean)) <= tol * mean)


def taylor_identity_residual(ds: DistortionDataset, *, scale_floor: float = 1e-280) -> TaylorIdentityReport:
    """Check crd against its first-order expression record by record."""
    ns, betas, resids, scales = [], [], [], []
    per_level: dict[int, float] = {}
    for n in ds.levels():
        lv = ds.level(int(n))
        if lv.size < 2:
            continue
        cur = lv[:-1]
        nxt = lv[1:]
        ok = ~np.isnan(cur["crd"])
        expr = cur["lrd"] / (1.0 + 1.0 / cur["r"]) - nxt["lrd"] / (1.0 + nxt["r"])
        resid = np.abs(cur["crd"] - expr)
        scale = np.maximum(cur["lrd"] ** 2, nxt["lrd"] ** 2)
        resid, scale, beta = resid[ok], scale[ok], cur["beta"][ok]
        ns.append(np.full(beta.size, n))
        betas.append(beta)
        resids.append(resid)
        scales.append(scale)
        usable = scale > scale_floor
        per_level[int(n)] = float((resid[usable] / scale[usable]).max()) if usable.any() else 0.0
    if not ns:
        raise TooFewLevels("dataset has no consecutive records")
    c_hat = max(per_level.values())
    return TaylorIdentityReport(
        np.concatenate(ns),
        np.concatenate(betas),
        np.concatenate(resids),
        np.concatenate(scales),
        c_hat,
        per_level,
    )
