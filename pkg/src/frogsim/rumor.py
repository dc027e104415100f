"""Firework rumor processes on N_0 and Z.

Vertex ``z`` spreads the rumor to every vertex within distance ``I_z`` (both
sides for the bi-directional process, only to the right for the firework),
one generation per time step.  ``I_z`` is the largest radius among the
``N_z`` spreaders sitting at ``z``.

All processes run on a window (``[0, M]`` or ``[-M, M]``) and report whether
the informed set reaches its edge; percolation is the limit ``M -> inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numba import njit

from . import rng
from .frog import wilson_interval
from .laws import Constant, OccupancyLaw
from .rng import SeedSpec

R_MAX_LIMIT = 64
M_LIMIT = 10_000


# ------------------------------------------------------------ radius models


class RadiusModel:
    """Law of a single spreader's radius R >= 0, given by its tail P(R >= n)."""

    def tail(self, n):
        raise NotImplementedError

    def sample_array(self, u: np.ndarray) -> np.ndarray:
        """Inverse transform: the largest n with tail(n) >= u."""
        raise NotImplementedError

    def cdf(self, i):
        """P(R <= i)."""
        return 1.0 - self.tail(np.asarray(i) + 1)

    def pmf(self, r_max: int) -> np.ndarray:
        """Probabilities of 0..r_max, the tail beyond r_max folded into r_max.

        Folding moves mass downwards, so a firework driven by the folded pmf is
        stochastically smaller than the original one.
        """
        t = np.asarray(self.tail(np.arange(r_max + 1)), dtype=float)
        out = np.empty(r_max + 1)
        out[:-1] = t[:-1] - t[1:]
        out[-1] = t[-1]
        return out


@dataclass(frozen=True)
class GeometricTail(RadiusModel):
    r: float

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ValueError("GeometricTail needs 0 < r < 1")

    def tail(self, n):
        n = np.asarray(n)
        return np.where(n <= 0, 1.0, self.r ** np.maximum(n, 0))

    def sample_array(self, u):
        return np.floor(np.log(u) / math.log(self.r)).astype(np.int64)


@dataclass(frozen=True)
class BernoulliRadius(RadiusModel):
    """R = 1 with probability q, else 0."""

    q: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("BernoulliRadius needs 0 <= q <= 1")

    def tail(self, n):
        n = np.asarray(n)
        return np.where(n <= 0, 1.0, np.where(n == 1, self.q, 0.0))

    def sample_array(self, u):
        return (np.asarray(u) < self.q).astype(np.int64)


@dataclass(frozen=True)
class PowerLawTail(RadiusModel):
    """P(R >= n) = c / (n + c), so that n P(R >= n) -> c."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("PowerLawTail needs c > 0")

    def tail(self, n):
        n = np.maximum(np.asarray(n, dtype=float), 0.0)
        return self.c / (n + self.c)

    def sample_array(self, u):
        v = np.floor(self.c * (1.0 / np.asarray(u) - 1.0))
        return np.minimum(v, 2.0**62).astype(np.int64)


@dataclass(frozen=True)
class Analytic(RadiusModel):
    """Radius law from an arbitrary tail function; sampling searches up to ``r_cap``."""

    tail_fn: Callable[[int], float]
    r_cap: int = 10**6

    def tail(self, n):
        n = np.asarray(n)
        vals = np.vectorize(lambda k: 1.0 if k <= 0 else float(self.tail_fn(int(k))))(n)
        return vals.astype(float)

    def sample_array(self, u):
        out = np.empty(np.shape(u), dtype=np.int64)
        for j, uj in np.ndenumerate(np.asarray(u)):
            lo, hi = 0, 1
            while hi < self.r_cap and self.tail_fn(hi) >= uj:
                lo, hi = hi, min(2 * hi, self.r_cap)
            if hi >= self.r_cap and self.tail_fn(self.r_cap) >= uj:
                out[j] = self.r_cap
                continue
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if self.tail_fn(mid) >= uj:
                    lo = mid
                else:
                    hi = mid
            out[j] = lo
        return out


@dataclass(frozen=True)
class EmpiricalSampler(RadiusModel):
    """Empirical law of ``n_samples`` seeded draws of ``draw(SeedSpec)``."""

    draw: Callable[[SeedSpec], int]
    n_samples: int = 10_000
    master_seed: int = 0
    samples: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = np.sort(np.array(
            [self.draw(SeedSpec(self.master_seed, particle=i)) for i in range(self.n_samples)],
            dtype=np.int64,
        ))
        object.__setattr__(self, "samples", vals)

    def tail(self, n):
        n = np.asarray(n)
        idx = np.searchsorted(self.samples, n, side="left")
        return (self.samples.size - idx) / self.samples.size

    def sample_array(self, u):
        k = np.floor((1.0 - np.asarray(u)) * self.samples.size).astype(np.int64)
        return self.samples[np.clip(k, 0, self.samples.size - 1)]


def parse_radius(text: str) -> RadiusModel:
    """``geometric:0.5``, ``bernoulli:0.9``, ``powerlaw:2`` or ``pmf:0.2,0.5,0.3``."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind in ("geometric", "geom"):
        return GeometricTail(float(arg))
    if kind == "bernoulli":
        return BernoulliRadius(float(arg))
    if kind in ("powerlaw", "power"):
        return PowerLawTail(float(arg))
    if kind == "pmf":
        pmf = np.array([float(v) for v in arg.split(",")])
        return pmf_radius(pmf)
    raise ValueError(f"cannot parse radius model {text!r}")


def pmf_radius(pmf) -> Analytic:
    """Radius law with finite support given by its pmf on 0..len(pmf)-1."""
    pmf = np.asarray(pmf, dtype=float)
    if np.any(pmf < 0) or not math.isclose(pmf.sum(), 1.0, abs_tol=1e-12):
        raise ValueError("pmf must be non-negative and sum to 1")
    tails = np.concatenate([np.cumsum(pmf[::-1])[::-1], [0.0]])
    r_max = pmf.size - 1

    def tail_fn(n):
        return float(tails[n]) if n <= r_max else 0.0

    return Analytic(tail_fn, r_cap=r_max + 1)


# -------------------------------------------------------------- composition


def radius_cdf_from_occupancy(occupancy: OccupancyLaw, radius: RadiusModel, i):
    """P(I <= i) for I = max of ``eta`` spreader radii: the occupancy PGF at P(R <= i)."""
    i_arr = np.asarray(i)
    if np.any(i_arr < 0):
        raise ValueError("i must be non-negative")
    s = np.clip(1.0 - radius.tail(i_arr + 1), 0.0, 1.0)
    out = occupancy.pgf(s)
    return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)


def vertex_radii(occupancy: OccupancyLaw, radius: RadiusModel, master_seed: int,
                 replication: int, vertices) -> np.ndarray:
    """I_z for each vertex ``z``, keyed by (replication, z): max of N_z spreader radii."""
    vertices = np.asarray(vertices, dtype=np.int64)
    counts = _occupancy_at(occupancy, master_seed, replication, vertices)
    out = np.zeros(vertices.size, dtype=np.int64)
    total = int(counts.sum())
    if total:
        owner = np.repeat(np.arange(vertices.size), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        particle = np.arange(total) - starts
        u = rng.uniforms(master_seed, replication, vertices[owner], particle, rng.RADIUS)
        np.maximum.at(out, owner, radius.sample_array(u))
    return out


def _occupancy_at(occupancy, master_seed, replication, vertices):
    if isinstance(occupancy, Constant):
        return np.full(vertices.size, occupancy.k, dtype=np.int64)
    from .laws import _eta_block

    kind, param = occupancy.encode()
    out = np.empty(vertices.size, dtype=np.int64)
    _eta_block(kind, param, np.uint64(master_seed), replication, vertices, out)
    if np.any(out < 0):
        raise ValueError("improper occupancy law")
    return out


# ---------------------------------------------------------------- processes


@dataclass
class FireworkResult:
    reached: bool
    steps: int
    front_trace: list


@dataclass
class BFWResult:
    reached_left: bool
    reached_right: bool
    steps: int
    trace: list  # (left, right) interval per step

    @property
    def reached_any(self) -> bool:
        return self.reached_left or self.reached_right


def run_firework(radii, window: int) -> FireworkResult:
    """Uni-directional firework on ``[0, window]``; ``radii[u]`` is I_u for u >= 0.

    Newly informed vertices ``(old_front, front]`` each push the front to
    ``u + I_u``; the process dies when a generation fails to advance it.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    radii = np.asarray(radii)
    front = 0
    new_lo, new_hi = 0, 0  # current generation is the vertices new_lo..new_hi
    trace = [0]
    steps = 0
    while front < window:
        gen = radii[new_lo:new_hi + 1] + np.arange(new_lo, new_hi + 1)
        reach = min(int(gen.max()), window)
        steps += 1
        if reach <= front:
            return FireworkResult(False, steps, trace)
        new_lo, new_hi = front + 1, reach
        front = reach
        trace.append(front)
    return FireworkResult(True, steps, trace)


def run_bfw(radii, window: int) -> BFWResult:
    """Bi-directional firework on ``[-window, window]``; ``radii[z + window]`` is I_z.

    The informed set stays an interval ``[-x_n, y_n]`` containing 0.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    radii = np.asarray(radii)
    if radii.size != 2 * window + 1:
        raise ValueError("radii must cover -window..window")
    lo = hi = 0
    gens = [(0, 0)]  # generation as up to two vertex ranges
    trace = [(0, 0)]
    steps = 0
    while gens:
        if lo == -window and hi == window:
            break
        new_hi, new_lo = hi, lo
        for a, b in gens:
            zs = np.arange(a, b + 1)
            r = radii[zs + window]
            new_hi = max(new_hi, int((zs + r).max()))
            new_lo = min(new_lo, int((zs - r).min()))
        new_hi = min(new_hi, window)
        new_lo = max(new_lo, -window)
        steps += 1
        gens = []
        if new_hi > hi:
            gens.append((hi + 1, new_hi))
        if new_lo < lo:
            gens.append((new_lo, lo - 1))
        if new_lo > lo or new_hi < hi:
            raise AssertionError("informed interval shrank")
        lo, hi = new_lo, new_hi
        if gens:
            trace.append((lo, hi))
    return BFWResult(lo == -window, hi == window, steps, trace)


def run_bfw_star(radii_nonneg, window: int) -> BFWResult:
    """Mirrored bi-directional firework: I_{-x} = I_x for the radii of 0..window."""
    r = np.asarray(radii_nonneg)[: window + 1]
    full = np.concatenate([r[:0:-1], r])
    res = run_bfw(full, window)
    for lo, hi in res.trace:
        if lo != -hi:
            raise AssertionError("mirrored firework lost its symmetry")
    return res


# ---------------------------------------------------------------- DP oracle


def fw_reach_probability_dp(pmf, window: int) -> float:
    """Exact P(firework front reaches ``window``) for i.i.d. radii with the given pmf.

    The state after vertex ``v`` is the overshoot ``s = max_{u <= v}(u + I_u) - v``;
    the front survives vertex ``v`` iff ``s >= 1`` and ``s' = max(s - 1, I_{v+1})``.
    The distribution of ``s - 1`` is carried as a sub-probability CDF, so each
    vertex costs one elementwise product with the CDF of I.
    """
    pmf = np.asarray(pmf, dtype=float)
    r_max = pmf.size - 1
    if r_max > R_MAX_LIMIT:
        raise ValueError(f"r_max = {r_max} exceeds the supported {R_MAX_LIMIT}")
    if not 1 <= window <= M_LIMIT:
        raise ValueError(f"window must lie in [1, {M_LIMIT}]")
    if np.any(pmf < 0) or not math.isclose(pmf.sum(), 1.0, abs_tol=1e-12):
        raise ValueError("pmf must be non-negative and sum to 1")
    cdf_i = np.minimum(np.cumsum(pmf), 1.0)
    d = np.ones(r_max + 1)  # P(alive, s - 1 <= k); the start behaves like s - 1 = 0
    alive = 1.0
    for _ in range(window):
        c = d * cdf_i
        alive = c[-1] - c[0]
        d = np.empty_like(c)
        d[:-1] = c[1:] - c[0]
        d[-1] = alive
    return float(alive)


@njit(cache=True, nogil=True)
def _fw_mc_batch(cdf, window, seed, reps, out):
    radii = np.empty(window + 1, dtype=np.int64)
    for j in range(reps.shape[0]):
        for z in range(window + 1):
            u = rng.uniform(rng.stream_key(seed, reps[j], z, 0, rng.RADIUS), 0)
            k = 0
            while k < cdf.shape[0] - 1 and cdf[k] < u:
                k += 1
            radii[z] = k
        front = 0
        a = 0
        b = 0
        while front < window:
            reach = front
            for u_ in range(a, b + 1):
                if u_ + radii[u_] > reach:
                    reach = u_ + radii[u_]
            if reach > window:
                reach = window
            if reach <= front:
                break
            a = front + 1
            b = reach
            front = reach
        out[j] = front >= window


def fw_reach_probability_mc(pmf, window: int, replications: int, master_seed: int = 0):
    """Monte Carlo estimate of the firework reach probability with a Wilson 95% CI."""
    pmf = np.asarray(pmf, dtype=float)
    out = np.empty(replications, dtype=np.bool_)
    _fw_mc_batch(np.cumsum(pmf), window, np.uint64(master_seed),
                 np.arange(replications, dtype=np.int64), out)
    k = int(out.sum())
    lo, hi = wilson_interval(k, replications)
    return k / replications, lo, hi, k


PROCESSES = ("fw", "bfw", "bfw-star")


def _reach_one(process, occupancy, radius, window, master_seed, rep) -> bool:
    if process == "fw":
        radii = vertex_radii(occupancy, radius, master_seed, rep, np.arange(window + 1))
        return run_firework(radii, window).reached
    if process == "bfw":
        radii = vertex_radii(occupancy, radius, master_seed, rep, np.arange(-window, window + 1))
        return run_bfw(radii, window).reached_any
    if process == "bfw-star":
        radii = vertex_radii(occupancy, radius, master_seed, rep, np.arange(window + 1))
        return run_bfw_star(radii, window).reached_any
    raise ValueError(f"unknown process {process!r}; expected one of {PROCESSES}")


def rumor_reach_mc(process: str, occupancy: OccupancyLaw, radius: RadiusModel, window: int,
                   replications: int, master_seed: int = 0, workers: int = 1):
    """Fraction of replications whose informed set reaches the window edge.

    Returns ``(estimate, ci_lo, ci_hi, successes)``; the per-replication
    outcomes are keyed by replication index, so ``workers`` never changes them.
    """
    if process not in PROCESSES:
        raise ValueError(f"unknown process {process!r}; expected one of {PROCESSES}")
    if replications < 1:
        raise ValueError("replications must be >= 1")

    def one(rep):
        return _reach_one(process, occupancy, radius, window, master_seed, rep)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = list(pool.map(one, range(replications)))
    else:
        hits = [one(r) for r in range(replications)]
    k = int(sum(hits))
    lo, hi = wilson_interval(k, replications)
    return k / replications, lo, hi, k


# --------------------------------------------------------------- couplings


@dataclass
class CouplingAudit:
    replications: int
    violations: int
    fw: int
    bfw: int
    bfw_star: int
    fw_star: int
    details: list = field(default_factory=list)


def coupling_audit(occupancy: OccupancyLaw, radius: RadiusModel, window: int,
                   replications: int, master_seed: int = 0) -> CouplingAudit:
    """Check FW(I) <= BFW(I) <= BFW*(I*) = FW(I*) pathwise on shared radii.

    ``I*_z = max(I_{-z}, I_z)``.  A violation is any replication where a
    smaller process reaches the window edge but a larger one does not, or
    where BFW*(I*) and FW(I*) disagree, or where the BFW interval is not
    contained in the BFW*(I*) interval.
    """
    zs = np.arange(-window, window + 1)
    counts = dict(fw=0, bfw=0, bfw_star=0, fw_star=0)
    violations = 0
    details = []
    for rep in range(replications):
        radii = vertex_radii(occupancy, radius, master_seed, rep, zs)
        pos = radii[window:]
        star = np.maximum(pos, radii[window::-1])
        fw = run_firework(pos, window)
        bfw = run_bfw(radii, window)
        bstar = run_bfw_star(star, window)
        fstar = run_firework(star, window)
        counts["fw"] += fw.reached
        counts["bfw"] += bfw.reached_any
        counts["bfw_star"] += bstar.reached_any
        counts["fw_star"] += fstar.reached
        lo, hi = bfw.trace[-1]
        slo, shi = bstar.trace[-1]
        bad = (
            (fw.reached and not bfw.reached_right)
            or (bfw.reached_any and not bstar.reached_any)
            or (bstar.reached_any != fstar.reached)
            or lo < slo or hi > shi
        )
        if bad:
            violations += 1
            details.append(rep)
    return CouplingAudit(replications, violations, details=details, **counts)


# ---------------------------------------------------------- series criteria


@dataclass
class SeriesDiagnostic:
    n: np.ndarray
    partial_sums: np.ndarray
    partial_sums_squared: np.ndarray
    slope: float
    slope_previous: float
    classification: str
    classification_squared: str
    n_max: int
    tail_scaled_min: float
    tail_scaled_max: float
    threshold: float
    bfw_extinction: bool = field(init=False)

    def __post_init__(self):
        # BFW extinction is only claimed from the squared-product series
        self.bfw_extinction = self.classification_squared == "Diverging"


def _classify(slope: float, slope_prev: float, margin: float = 0.05) -> str:
    """Power-law decay ``n^slope`` of the product terms: summable iff slope < -1."""
    if not math.isfinite(slope):
        return "Converging" if slope == -math.inf else "Inconclusive"
    if abs(slope + 1.0) < margin or (slope + 1.0) * (slope_prev + 1.0) < 0:
        return "Inconclusive"
    return "Converging" if slope < -1.0 else "Diverging"


def _fit_slope(log_n, log_prod):
    if np.any(~np.isfinite(log_prod)):
        return -math.inf
    return float(np.polyfit(log_n, log_prod, 1)[0])


def series_criterion(occupancy: OccupancyLaw, radius: RadiusModel,
                     n_max: int = 100_000) -> SeriesDiagnostic:
    """Partial sums of prod_{i<=n} P(I <= i) and of its square, classified by
    the power-law exponent fitted over the last decade of n."""
    if n_max < 100:
        raise ValueError("n_max must be >= 100")
    i = np.arange(n_max + 1)
    cdf = radius_cdf_from_occupancy(occupancy, radius, i)
    with np.errstate(divide="ignore"):
        log_prod = np.cumsum(np.log(cdf))
    terms = np.exp(log_prod)
    partial = np.cumsum(terms)
    partial2 = np.cumsum(terms**2)

    last = np.unique(np.geomspace(n_max / 10, n_max, 60).astype(int))
    prev = np.unique(np.geomspace(n_max / 100, n_max / 10, 60).astype(int))
    slope = _fit_slope(np.log(last), log_prod[last])
    slope_prev = _fit_slope(np.log(prev), log_prod[prev])
    cls = _classify(slope, slope_prev)
    cls2 = _classify(2 * slope, 2 * slope_prev)

    scaled = last * np.asarray(radius.tail(last), dtype=float)
    mean_n = occupancy.mean()
    threshold = 0.0 if math.isinf(mean_n) else (math.inf if mean_n == 0 else 1.0 / mean_n)
    return SeriesDiagnostic(
        n=i,
        partial_sums=partial,
        partial_sums_squared=partial2,
        slope=slope,
        slope_previous=slope_prev,
        classification=cls,
        classification_squared=cls2,
        n_max=n_max,
        tail_scaled_min=float(scaled.min()),
        tail_scaled_max=float(scaled.max()),
        threshold=threshold,
    )


__all__ = [
    "RadiusModel", "GeometricTail", "BernoulliRadius", "PowerLawTail", "Analytic",
    "EmpiricalSampler", "parse_radius", "pmf_radius", "radius_cdf_from_occupancy",
    "vertex_radii", "run_firework", "run_bfw", "run_bfw_star", "fw_reach_probability_dp",
    "fw_reach_probability_mc", "rumor_reach_mc", "PROCESSES", "coupling_audit", "series_criterion", "SeriesDiagnostic",
    "FireworkResult", "BFWResult", "CouplingAudit"
]
