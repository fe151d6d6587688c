"""Asymptotic-order fitting of distortion datasets and the smoothness
ladders they imply.

The ratio ladder (from logarithmic ratio distortion): NotQuasisymmetric <
Quasisymmetric < UAA < C1_alpha < C1_Lipschitz < Affine. The cross-ratio
ladder: NotQuasisymmetric < Quasisymmetric < UAA < C1_alpha < C2_alpha <
C2_Lipschitz, with an interior-only caveat on converse verdicts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._util import loglog_fit
from .circle import CircleMap, conjugacy_map, extract_solenoid, partition, realize_map
from .distortion import DistortionDataset, grid_from_partition, sweep
from .errors import Degenerate, TooFewLevels
from .solenoid import (
    ModulusFit,
    SolenoidTable,
    cross_ratio_values,
    holder_fit_of_values,
    holder_modulus_fit,
    quasiperiodicity_modulus,
)
from .ultrametric import build_evaluator

__all__ = [
    "EnvelopeStats",
    "SmoothnessVerdict",
    "Tolerances",
    "envelope_fit",
    "classify_ratio",
    "classify_cross",
    "verdict_rank",
    "table1_experiment",
    "Table1Report",
]

RATIO_LADDER = (
    "NotQuasisymmetric",
    "Quasisymmetric",
    "UAA",
    "C1_alpha",
    "C1_Lipschitz",
    "Affine",
)
CROSS_LADDER = (
    "NotQuasisymmetric",
    "Quasisymmetric",
    "UAA",
    "C1_alpha",
    "C2_alpha",
    "C2_Lipschitz",
)


@dataclass(frozen=True)
class Tolerances:
    exponent: float = 0.15
    rho: float = 0.9              # per-level decay factor separating trends
    zero_floor_ratio: float = 1e-13
    zero_floor_cross: float = 1e-12
    min_levels: int = 6
    interior_margin: int = 1      # grid intervals dropped per side for cross verdicts
    agreement: float = 0.2        # table-1 exponent agreement
    guard: float = 0.15           # alpha > 1 + guard on a nonconstant table fails


@dataclass(frozen=True)
class EnvelopeStats:
    """Per-level envelope of |field| and its log-log asymptotics."""

    field: str
    normalizer: str
    levels: np.ndarray
    ell: np.ndarray      # max interval length per level
    sup: np.ndarray      # max |field * normalizer| per level
    q90: np.ndarray      # 0.9-quantile variant
    slope: float         # +inf sentinel when the envelope vanishes
    slope_halfwidth: float
    trend: str           # decaying-to-zero | bounded | growing

    def vanishes(self) -> bool:
        return math.isinf(self.slope)


_NORMALIZERS = {"1": 0, "inv_len": 1, "inv_len2": 2}


def envelope_fit(
    ds: DistortionDataset,
    field: str = "lrd",
    normalizer: str = "1",
    *,
    zero_floor: float = 0.0,
    interior_margin: int = 0,
    rho: float = 0.9,
) -> EnvelopeStats:
    """Per-level sup of |field| (optionally divided by a power of the
    interval length), with slope over the deepest half of the levels and a
    trend tag from the decay factor over the last four levels."""
    if field not in ("lrd", "crd"):
        raise ValueError(f"unknown field {field!r}")
    power = _NORMALIZERS[normalizer]
    levels = ds.levels()
    if levels.size < 4:
        raise TooFewLevels(f"need >= 4 levels, got {levels.size}")
    ell, sup, q90 = [], [], []
    for n in levels:
        lv = ds.level(int(n))
        if interior_margin > 0:
            omega = lv["beta"].max() + 1
            keep = (lv["beta"] > interior_margin) & (lv["beta"] <= omega - 2 - interior_margin)
            lv = lv[keep]
        vals = np.abs(lv[field]) / lv["len"] ** power
        vals = vals[~np.isnan(vals)]
        if vals.size == 0:
            raise TooFewLevels(f"level {n} has no usable records")
        ell.append(float(lv["len"].max()))
        sup.append(float(vals.max()))
        q90.append(float(np.quantile(vals, 0.9)))
    ell = np.array(ell)
    sup = np.array(sup)
    q90 = np.array(q90)

    floored = np.maximum(sup, zero_floor)
    last = floored[-4:]
    if np.all(sup[-4:] <= zero_floor):
        trend = "decaying-to-zero"
    else:
        gm = (last[-1] / last[0]) ** (1.0 / 3.0)
        if gm <= rho:
            trend = "decaying-to-zero"
        elif gm >= 1.0 / rho:
            trend = "growing"
        else:
            trend = "bounded"

    half = levels.size - math.ceil(levels.size / 2)
    fit_ell = ell[half:]
    fit_sup = sup[half:]
    keep = fit_sup > zero_floor
    if keep.sum() < 2:
        slope, halfwidth = math.inf, 0.0
    else:
        fit = loglog_fit(fit_ell[keep], fit_sup[keep])
        slope, halfwidth = fit.slope, 2.0 * fit.stderr
    return EnvelopeStats(field, normalizer, levels, ell, sup, q90, slope, halfwidth, trend)


@dataclass(frozen=True)
class SmoothnessVerdict:
    ladder: str
    alpha: float | None
    evidence: EnvelopeStats
    normalized_evidence: EnvelopeStats
    caveats: tuple[str, ...] = ()
    ambiguous: bool = False
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __str__(self):
        a = f"({self.alpha:.3f})" if self.alpha is not None else ""
        return f"{self.ladder}{a}"


def verdict_rank(v: SmoothnessVerdict | str, ladder=RATIO_LADDER) -> float:
    """Total order on the ladder; C1_alpha rungs are ordered by alpha."""
    name = v.ladder if isinstance(v, SmoothnessVerdict) else v
    base = float(ladder.index(name))
    if isinstance(v, SmoothnessVerdict) and v.alpha is not None:
        base += min(max(v.alpha, 0.0), 1.0) * 0.5
    return base


def _common_caveats(levels: int, tol: Tolerances) -> tuple[str, ...]:
    if levels < tol.min_levels:
        return (f"only {levels} levels (< {tol.min_levels})",)
    return ()


def classify_ratio(ds: DistortionDataset, tol: Tolerances = Tolerances()) -> SmoothnessVerdict:
    """Smoothness ladder from logarithmic ratio distortion, decided top-down.

    Affine: sup|lrd|/|I| decays to zero. C1_Lipschitz: envelope slope >= 1-tol
    with a bounded normalized constant. C1_alpha: slope strictly inside
    (tol, 1-tol). UAA: envelope decays to zero but with slope <= tol.
    Quasisymmetric: bounded envelope. NotQuasisymmetric: growing.
    """
    env = envelope_fit(ds, "lrd", "1", zero_floor=tol.zero_floor_ratio, rho=tol.rho)
    envI = envelope_fit(ds, "lrd", "inv_len", zero_floor=tol.zero_floor_ratio, rho=tol.rho)
    caveats = _common_caveats(env.levels.size, tol)
    kw = dict(evidence=env, normalized_evidence=envI, caveats=caveats, tolerances=tol)
    if env.vanishes() or envI.trend == "decaying-to-zero":
        return SmoothnessVerdict("Affine", None, **kw)
    if env.slope >= 1.0 - tol.exponent:
        if envI.trend != "growing":
            return SmoothnessVerdict("C1_Lipschitz", None, **kw)
        return SmoothnessVerdict("C1_alpha", min(env.slope, 1.0), ambiguous=True, **kw)
    if tol.exponent < env.slope < 1.0 - tol.exponent and env.trend == "decaying-to-zero":
        return SmoothnessVerdict("C1_alpha", env.slope, **kw)
    if env.trend == "decaying-to-zero":
        return SmoothnessVerdict("UAA", None, **kw)
    if env.trend == "bounded":
        return SmoothnessVerdict("Quasisymmetric", None, **kw)
    return SmoothnessVerdict("NotQuasisymmetric", None, **kw)


def classify_cross(ds: DistortionDataset, tol: Tolerances = Tolerances()) -> SmoothnessVerdict:
    """Smoothness ladder from cross-ratio distortion.

    Exponent 2 -> C2_Lipschitz, 1+alpha -> C2_alpha, alpha -> C1_alpha;
    converse statements hold on interior subintervals only, so the verdict
    drops the outermost grid intervals and carries the interior caveat.
    """
    env = envelope_fit(
        ds, "crd", "1",
        zero_floor=tol.zero_floor_cross,
        interior_margin=tol.interior_margin,
        rho=tol.rho,
    )
    env2 = envelope_fit(
        ds, "crd", "inv_len2",
        zero_floor=tol.zero_floor_cross,
        interior_margin=tol.interior_margin,
        rho=tol.rho,
    )
    caveats = ("interior-only",) + _common_caveats(env.levels.size, tol)
    kw = dict(evidence=env, normalized_evidence=env2, caveats=caveats, tolerances=tol)
    if env.vanishes() or env.slope >= 2.0 - tol.exponent:
        if env.vanishes() or env2.trend != "growing":
            return SmoothnessVerdict("C2_Lipschitz", None, **kw)
        return SmoothnessVerdict("C2_alpha", min(env.slope - 1.0, 1.0), ambiguous=True, **kw)
    if 1.0 + tol.exponent < env.slope < 2.0 - tol.exponent:
        return SmoothnessVerdict("C2_alpha", env.slope - 1.0, **kw)
    if 1.0 - tol.exponent <= env.slope <= 1.0 + tol.exponent:
        # boundary between C1_alpha(1) and C2_alpha(0+): resolve downward
        return SmoothnessVerdict("C1_alpha", min(env.slope, 1.0), ambiguous=True, **kw)
    if tol.exponent < env.slope < 1.0 - tol.exponent and env.trend == "decaying-to-zero":
        return SmoothnessVerdict("C1_alpha", env.slope, **kw)
    if env.trend == "decaying-to-zero":
        return SmoothnessVerdict("UAA", None, **kw)
    if env.trend == "bounded":
        return SmoothnessVerdict("Quasisymmetric", None, **kw)
    return SmoothnessVerdict("NotQuasisymmetric", None, **kw)


@dataclass(frozen=True)
class Table1Report:
    """Side-by-side smoothness evidence: the solenoid-function column and
    the chart-change homeomorphism column."""

    s_constant: bool
    s_fit: ModulusFit | None
    cr_fit: ModulusFit | None
    quasiperiodicity: ModulusFit
    ratio_verdict: SmoothnessVerdict
    cross_verdict: SmoothnessVerdict
    lrd_slope: float
    agree: bool
    guard_ok: bool

    def lines(self) -> list[str]:
        out = []
        if self.s_constant:
            out.append("ratio function: constant (affine row)")
        else:
            out.append(f"ratio-function Holder exponent: {self.s_fit.exponent:.4f}")
            cr = f"{self.cr_fit.exponent:.4f}" if self.cr_fit else "constant"
            out.append(f"cross-ratio-function Holder exponent: {cr}")
        out.append(f"quasiperiodicity factor: {self.quasiperiodicity.exponent:.4f}")
        out.append(f"chart-change ratio verdict: {self.ratio_verdict}")
        out.append(f"chart-change cross verdict: {self.cross_verdict}")
        out.append(f"chart-change lrd envelope slope: {self.lrd_slope}")
        out.append(f"columns agree: {self.agree}")
        out.append(f"holder-exponent guard: {'ok' if self.guard_ok else 'VIOLATED'}")
        return out


def table1_experiment(
    m: CircleMap,
    N: int,
    *,
    K: int | None = None,
    tol: Tolerances = Tolerances(),
    constancy_floor: float = 1e-12,
    max_pairs: int = 2_000_000,
    seed: int = 0,
) -> Table1Report:
    """Both smoothness columns for one expanding map.

    Column one: the extracted ratio table's Hölder exponent under the
    ultra-metric (and the same for its cross-ratio function). Column two:
    the chart change between the map's own partition and the grid realized
    from the table, classified through its distortion dataset. The columns
    must agree within ``tol.agreement``; fitting an exponent above
    1 + tol.guard on a nonconstant table trips the constancy guard.
    """
    table, _diag = extract_solenoid(m, N, K)
    quasi = quasiperiodicity_modulus(table)
    s_constant = table.oscillation() <= constancy_floor
    s_fit = cr_fit = None
    if not s_constant:
        ev = build_evaluator(table, check=False)
        # stay two levels clear of the extraction depth: pairs deeper than
        # that probe ratios already at the extraction noise floor
        cap = table.d ** max(ev.max_depth - 2, 1)
        s_fit = holder_modulus_fit(
            table, ev, max_pairs=max_pairs, seed=seed, index_cap=cap
        )
        try:
            crv = cross_ratio_values(table)[: cap + 1]
            cr_fit = holder_fit_of_values(crv, ev, max_pairs=max_pairs, seed=seed)
        except Degenerate:
            cr_fit = None

    g = realize_map(table, N)
    h = conjugacy_map(m, g, N)
    grid = grid_from_partition(partition(m, N - 2))
    ds = sweep(h, grid)
    rv = classify_ratio(ds, tol)
    cv = classify_cross(ds, tol)
    lrd_slope = rv.evidence.slope

    if s_constant:
        agree = rv.ladder == "Affine"
        guard_ok = True
    else:
        if math.isinf(lrd_slope):
            agree = s_fit.exponent >= 1.0 - tol.agreement
        else:
            agree = abs(s_fit.exponent - lrd_slope) <= tol.agreement
        guard_ok = s_fit.exponent <= 1.0 + tol.guard
    return Table1Report(
        s_constant, s_fit, cr_fit, quasi, rv, cv, lrd_slope, agree, guard_ok
    )
