"""Scaled tails, the beta = 0.5 threshold, criterion checks and phase sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .displacement import EngineKind, tail_d_right_beta
from .frog import FrogConfig, estimate_survival
from .laws import Beta, Constant, OccupancyLaw
from .rng import SeedSpec
from .special import DomainError, beta_function

SQRT2 = math.sqrt(2.0)
DEFAULT_WINDOWS = (100, 1000, 10_000)
DEFAULT_REPLICATIONS = 1000

THEOREM_EXTINCT = "TheoremExtinct"
THEOREM_SURVIVE = "TheoremSurvive"
UNKNOWN = "Unknown"

SURVIVAL_MET = "SurvivalCriterionMet"
EXTINCTION_MET = "ExtinctionCriterionMet"
INDETERMINATE = "Indeterminate"


# ---------------------------------------------------------------- threshold


def alpha0(mean_eta: float) -> float:
    """inf{alpha > 0 : B(alpha, 1/2) < mean_eta * sqrt(2)}; 0 for an infinite mean.

    alpha -> B(alpha, 1/2) decreases from +inf to 0, so the infimum is the
    unique root of B(alpha, 1/2) = mean_eta * sqrt(2), found by bisection.
    """
    mean_eta = float(mean_eta)
    if math.isnan(mean_eta) or mean_eta <= 0:
        raise DomainError("mean_eta must be positive")
    if math.isinf(mean_eta):
        return 0.0
    target = mean_eta * SQRT2
    lo, hi = 1.0, 1.0
    while beta_function(lo, 0.5) <= target:
        lo /= 2.0
        if lo < 1e-300:
            return 0.0
    while beta_function(hi, 0.5) > target:
        hi *= 2.0
    # bisect to machine precision: near 0 the map is steep, so an absolute
    # tolerance on alpha says little about the residual
    for _ in range(400):
        mid = math.sqrt(lo * hi) if hi / lo > 4 else 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if beta_function(mid, 0.5) > target:
            lo = mid
        else:
            hi = mid
    return lo if abs(beta_function(lo, 0.5) - target) < abs(beta_function(hi, 0.5) - target) else hi


# --------------------------------------------------------------- tail curve


@dataclass
class ScaledTailCurve:
    n: np.ndarray
    values: np.ndarray  # n * P(D_right >= n)
    slope: float  # log-log slope over the last decade of the grid
    trend: str  # increasing | decreasing | flat

    def rows(self):
        return list(zip(self.n.tolist(), self.values.tolist()))


def default_grid(n_max: int = 10**6, n_min: int = 100, per_decade: int = 4) -> np.ndarray:
    decades = math.log10(n_max / n_min)
    k = int(round(decades * per_decade)) + 1
    return np.unique(np.round(np.geomspace(n_min, n_max, k)).astype(np.int64))


def _terminal(n: np.ndarray):
    """Mask of the last decade of the grid (at least the last two points)."""
    mask = n >= n[-1] / 10.0
    if mask.sum() < 2:
        mask = np.zeros(n.size, dtype=bool)
        mask[-2:] = True
    return mask


def _slope(n, v):
    if n.size < 2 or np.any(v <= 0):
        return -math.inf if np.any(v <= 0) else 0.0
    return float(np.polyfit(np.log(n), np.log(v), 1)[0])


def scaled_tail_curve(alpha: float, beta: float, n_grid=None, flat_tol: float = 0.02,
                      rel_tol: float = 1e-10) -> ScaledTailCurve:
    """n * P(D_right >= n) under a Beta(alpha, beta) survival parameter."""
    Beta(alpha, beta)  # validates
    n = default_grid() if n_grid is None else np.asarray(n_grid, dtype=np.int64)
    if n.size == 0 or np.any(n < 1):
        raise ValueError("grid must be nonempty with n >= 1")
    n = np.sort(n)
    vals = np.array([k * tail_d_right_beta(int(k), alpha, beta, rel_tol) for k in n])
    if n.size < 2:
        return ScaledTailCurve(n, vals, 0.0, "flat")
    m = _terminal(n)
    slope = _slope(n[m], vals[m])
    trend = "flat" if abs(slope) <= flat_tol else ("increasing" if slope > 0 else "decreasing")
    return ScaledTailCurve(n, vals, slope, trend)


# ----------------------------------------------------------- criterion check


@dataclass
class CriterionReport:
    n: np.ndarray
    right_values: np.ndarray  # n P(D_right >= n)
    star_values: np.ndarray  # n * 2 P(D_right >= n), bounds n P(D* >= n) from above
    survival_threshold: float  # 1 / E(eta)
    extinction_threshold: float  # 1 / (2 E(eta))
    verdict: str
    slope: float
    notes: list = field(default_factory=list)


def criterion_check(alpha: float, beta: float, occupancy: OccupancyLaw = Constant(1),
                    n_grid=None, flat_tol: float = 0.02) -> CriterionReport:
    """Finite-n surrogate of the liminf / limsup criteria.

    Survival: every terminal-decade value of n P(D_right >= n) exceeds 1/E(eta)
    and the curve is not decaying.  Extinction: E(eta) < inf, every
    terminal-decade value of the D* bound is below 1/(2 E(eta)) and the curve
    is not growing.  Anything else is Indeterminate.
    """
    curve = scaled_tail_curve(alpha, beta, n_grid, flat_tol)
    mean = occupancy.mean()
    ts = 0.0 if math.isinf(mean) else (math.inf if mean == 0 else 1.0 / mean)
    te = 0.0 if math.isinf(mean) else (math.inf if mean == 0 else 0.5 / mean)
    right = curve.values
    star = 2.0 * right
    m = _terminal(curve.n) if curve.n.size > 1 else np.ones(1, dtype=bool)
    notes = []
    surv = bool(np.all(right[m] > ts)) and curve.slope >= -flat_tol
    ext = math.isfinite(mean) and bool(np.all(star[m] < te)) and curve.slope <= flat_tol
    if surv:
        verdict = SURVIVAL_MET
    elif ext:
        verdict = EXTINCTION_MET
    else:
        verdict = INDETERMINATE
        if np.all(right[m] <= ts):
            notes.append(
                f"n P(D_right >= n) stays below 1/E(eta) = {ts:.6g} on the terminal decade; "
                "the survival criterion is not met, which does not prove extinction"
            )
        if math.isinf(mean):
            notes.append("E(eta) is infinite; the extinction criterion does not apply")
        elif np.all(star[m] >= te):
            notes.append(
                f"the D* bound stays above 1/(2E(eta)) = {te:.6g}; the extinction criterion is not met"
            )
        if not notes:
            notes.append("the terminal decade straddles a threshold or the trend disagrees with the level")
    return CriterionReport(curve.n, right, star, ts, te, verdict, curve.slope, notes)


# ------------------------------------------------------------- phase diagram


def theorem_tag(alpha: float, beta: float, occupancy: OccupancyLaw) -> str:
    """Classification from (alpha, beta, E(eta)) alone."""
    if occupancy.p_zero() >= 1.0:
        return THEOREM_EXTINCT  # no particle other than the root's
    mean = occupancy.mean()
    if beta > 0.5:
        return THEOREM_EXTINCT if math.isfinite(mean) else UNKNOWN
    if beta < 0.5:
        return THEOREM_SURVIVE
    return THEOREM_SURVIVE if alpha > alpha0(mean) else UNKNOWN


@dataclass(frozen=True)
class PhaseCell:
    alpha: float
    beta: float
    window: int
    replications: int
    estimate: float
    ci_lo: float
    ci_hi: float
    engine: EngineKind
    tag: str
    occupancy: str = "const:1"
    seed: int = 0


def phase_diagram(alpha_grid, beta_grid, occupancy: OccupancyLaw = Constant(1),
                  windows=DEFAULT_WINDOWS, replications: int = DEFAULT_REPLICATIONS,
                  engine: EngineKind = EngineKind.EXACT_WALK, master_seed: int = 0,
                  workers: int = 1) -> list[PhaseCell]:
    """Survival estimates for every (alpha, beta, N), ordered by alpha, beta, N.

    Every cell uses replications ``0 .. replications-1`` of the same master
    seed, so neighbouring cells share random numbers.
    """
    alpha_grid, beta_grid, windows = list(alpha_grid), list(beta_grid), list(windows)
    if not alpha_grid or not beta_grid or not windows:
        raise ValueError("grids must be nonempty")
    cells = []
    for a in alpha_grid:
        for b in beta_grid:
            tag = theorem_tag(a, b, occupancy)
            base = FrogConfig(window=windows[0], pi_law=Beta(a, b), occupancy=occupancy,
                              engine=engine, seed=SeedSpec(master_seed))
            for n in windows:
                est = estimate_survival(replace(base, window=n), replications, workers)
                cells.append(PhaseCell(a, b, n, replications, est.estimate, est.ci_lo,
                                       est.ci_hi, engine, tag, str(occupancy), master_seed))
    return cells


def tag_consistency(cells: list[PhaseCell], min_window: int = 1000) -> list[str]:
    """Ladder checks per tagged cell: extinct cells nonincreasing beyond
    ``min_window`` up to CI overlap, surviving cells with overlapping terminal CIs."""
    issues = []
    groups: dict = {}
    for c in cells:
        groups.setdefault((c.alpha, c.beta), []).append(c)
    for (a, b), group in groups.items():
        group = sorted(group, key=lambda c: c.window)
        tag = group[0].tag
        if tag == THEOREM_EXTINCT:
            tail = [c for c in group if c.window >= min_window]
            for u, v in zip(tail, tail[1:]):
                if v.ci_lo > u.ci_hi:
                    issues.append(f"alpha={a} beta={b}: estimate rises from N={u.window} to N={v.window}")
        elif tag == THEOREM_SURVIVE and len(group) >= 2:
            u, v = group[-2], group[-1]
            if v.ci_hi < u.ci_lo or u.ci_hi < v.ci_lo:
                issues.append(f"alpha={a} beta={b}: terminal CIs do not overlap")
    return issues


__all__ = [
    "alpha0", "ScaledTailCurve", "scaled_tail_curve", "default_grid", "CriterionReport",
    "criterion_check", "PhaseCell", "theorem_tag", "phase_diagram", "tag_consistency",
    "THEOREM_EXTINCT", "THEOREM_SURVIVE", "UNKNOWN", "SURVIVAL_MET", "EXTINCTION_MET",
    "INDETERMINATE", "DEFAULT_WINDOWS", "DEFAULT_REPLICATIONS",
]
