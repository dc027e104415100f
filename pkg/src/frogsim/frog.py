"""Frog model on a window [-N, N] of Z as an interval-closure process.

Each particle's visited set is the integer interval ``[x - d_left, x + d_right]``
around its start ``x`` (nearest-neighbour walk), so the set of activated
vertices is always an interval.  The closure starts from the root, processes
newly activated vertices in FIFO order and extends the interval until nothing
new is reached inside the window.  Vertex randomness is keyed by coordinate,
so the result does not depend on the processing order and different engines
see identical particles.

A replication "reaches the boundary" when the activated interval touches
``-N`` or ``N``; survival probabilities are reported over a ladder of windows.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import rng
from .displacement import EngineKind, particle_reach, walk_positions
from .laws import Constant, GeometricNumber, OccupancyLaw, PiLaw, eta_draw, pi_draw
from .rng import SeedSpec


@dataclass(frozen=True)
class FrogConfig:
    window: int
    pi_law: PiLaw
    occupancy: OccupancyLaw = Constant(1)
    engine: EngineKind = EngineKind.EXACT_WALK
    step_budget: int | None = None
    seed: SeedSpec = SeedSpec(0)
    walk: str = "exit"
    stop_at_boundary: bool = False

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.walk not in ("exit", "steps"):
            raise ValueError("walk must be 'exit' or 'steps'")
        if self.step_budget is not None and self.step_budget < 1:
            raise ValueError("step_budget must be >= 1")
        if isinstance(self.occupancy, GeometricNumber) and self.occupancy.s == 1.0:
            raise ValueError("GeometricNumber(1) is improper and cannot be simulated")

    @property
    def budget(self) -> int:
        return 10 * self.window**2 if self.step_budget is None else self.step_budget

    def kernel_args(self):
        occ_kind, occ_param = self.occupancy.encode()
        pi_kind, pi_a, pi_b = self.pi_law.encode()
        return (int(self.engine), self.walk == "steps", occ_kind, occ_param,
                pi_kind, pi_a, pi_b, self.window, self.budget,
                np.uint64(self.seed.master_seed), self.stop_at_boundary)


@dataclass(frozen=True)
class ClosureResult:
    activated_left: int
    activated_right: int
    reached_left_boundary: bool
    reached_right_boundary: bool
    root_visit_count: int
    particles_activated: int
    truncation_events: int

    @property
    def reached_boundary(self) -> bool:
        return self.reached_left_boundary or self.reached_right_boundary


@dataclass(frozen=True)
class SurvivalEstimate:
    estimate: float
    ci_lo: float
    ci_hi: float
    replications: int
    window: int
    successes: int


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    phat = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (phat + z2 / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z2 / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


# ------------------------------------------------------------------ kernels


@njit(cache=True, nogil=True)
def _closure(engine, use_steps, occ_kind, occ_param, pi_kind, pi_a, pi_b,
             window, budget, seed, stop_at_boundary, rep):
    n = window
    queue = np.empty(2 * n + 1, dtype=np.int64)
    queue[0] = 0
    head = 0
    tail = 1
    lo = 0
    hi = 0
    root = 0
    particles = 0
    exhausted = 0
    while head < tail:
        if stop_at_boundary and (lo == -n or hi == n):
            break
        x = queue[head]
        head += 1
        eta = eta_draw(occ_kind, occ_param, rng.stream_key(seed, rep, x, 0, rng.ETA))
        new_lo = lo
        new_hi = hi
        for i in range(eta):
            p, theta = pi_draw(pi_kind, pi_a, pi_b, rng.stream_key(seed, rep, x, i, rng.PI))
            dl, dr, ex, _ = particle_reach(engine, use_steps, p, theta, seed, rep, x, i,
                                           n + x, n - x, budget)
            particles += 1
            if ex:
                exhausted += 1
            if x == 0 or (x > 0 and dl >= x) or (x < 0 and dr >= -x):
                root += 1
            if x + dr > new_hi:
                new_hi = x + dr
            if x - dl < new_lo:
                new_lo = x - dl
        for y in range(hi + 1, new_hi + 1):
            queue[tail] = y
            tail += 1
        for y in range(lo - 1, new_lo - 1, -1):
            queue[tail] = y
            tail += 1
        lo = new_lo
        hi = new_hi
    if tail != hi - lo + 1:
        raise RuntimeError("activated set is not an interval")
    return lo, hi, root, particles, exhausted


@njit(cache=True, nogil=True)
def _census(engine, use_steps, occ_kind, occ_param, pi_kind, pi_a, pi_b,
            window, budget, seed, rep):
    """Vertices x in [1, N] whose first particle reaches back to 0, and the
    mirror count on [-N, -1]."""
    right = 0
    left = 0
    for x in range(-window, window + 1):
        if x == 0:
            continue
        eta = eta_draw(occ_kind, occ_param, rng.stream_key(seed, rep, x, 0, rng.ETA))
        if eta < 1:
            continue
        p, theta = pi_draw(pi_kind, pi_a, pi_b, rng.stream_key(seed, rep, x, 0, rng.PI))
        dl, dr, _, _ = particle_reach(engine, use_steps, p, theta, seed, rep, x, 0,
                                      window + x, window - x, budget)
        if x > 0 and dl >= x:
            right += 1
        elif x < 0 and dr >= -x:
            left += 1
    return right, left


@njit(cache=True, nogil=True)
def _closure_batch(engine, use_steps, occ_kind, occ_param, pi_kind, pi_a, pi_b,
                   window, budget, seed, stop_at_boundary, reps, with_census, out):
    for j in range(reps.shape[0]):
        lo, hi, root, particles, ex = _closure(
            engine, use_steps, occ_kind, occ_param, pi_kind, pi_a, pi_b,
            window, budget, seed, stop_at_boundary, reps[j])
        out[j, 0] = lo
        out[j, 1] = hi
        out[j, 2] = root
        out[j, 3] = particles
        out[j, 4] = ex
        if with_census:
            cr, cl = _census(engine, use_steps, occ_kind, occ_param, pi_kind, pi_a, pi_b,
                             window, budget, seed, reps[j])
            out[j, 5] = cr
            out[j, 6] = cl


@njit(cache=True, nogil=True)
def _vertex_particles(engine, use_steps, occ_kind, occ_param, pi_kind, pi_a, pi_b,
                      window, budget, seed, rep, x):
    eta = eta_draw(occ_kind, occ_param, rng.stream_key(seed, rep, x, 0, rng.ETA))
    out = np.empty((max(eta, 0), 3))
    for i in range(eta):
        p, theta = pi_draw(pi_kind, pi_a, pi_b, rng.stream_key(seed, rep, x, i, rng.PI))
        dl, dr, _, _ = particle_reach(engine, use_steps, p, theta, seed, rep, x, i,
                                      window + x, window - x, budget)
        out[i, 0] = dl
        out[i, 1] = dr
        out[i, 2] = p
    return out


# --------------------------------------------------------------------- API

_COLUMNS = ("activated_left", "activated_right", "root_visit_count",
            "particles_activated", "truncation_events", "census_right", "census_left")


def run_frog_closure(config: FrogConfig) -> ClosureResult:
    """One replication (``config.seed.replication``) of the windowed closure."""
    args = config.kernel_args()
    lo, hi, root, particles, ex = _closure(*args, config.seed.replication)
    n = config.window
    return ClosureResult(int(lo), int(hi), lo == -n, hi == n, int(root), int(particles), int(ex))


def run_replications(config: FrogConfig, replications: int, workers: int = 1,
                     census: bool = False, first_replication: int = 0) -> dict:
    """Replications ``first_replication, ...`` as a dict of int64 arrays.

    Chunks are dispatched to a thread pool (the kernels release the GIL) and
    written back by replication index, so the output is independent of
    ``workers``.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    reps = np.arange(first_replication, first_replication + replications, dtype=np.int64)
    out = np.zeros((replications, len(_COLUMNS)), dtype=np.int64)
    args = config.kernel_args()
    workers = max(1, int(workers))
    n_chunks = min(replications, workers * 4) if workers > 1 else 1
    bounds = np.linspace(0, replications, n_chunks + 1).astype(int)

    def run_chunk(k):
        a, b = bounds[k], bounds[k + 1]
        if b > a:
            _closure_batch(*args, reps[a:b], census, out[a:b])

    if workers == 1:
        for k in range(n_chunks):
            run_chunk(k)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_chunk, range(n_chunks)))
    res = {name: out[:, k].copy() for k, name in enumerate(_COLUMNS)}
    res["replication"] = reps
    res["reached_left_boundary"] = res["activated_left"] == -config.window
    res["reached_right_boundary"] = res["activated_right"] == config.window
    res["reached_boundary"] = res["reached_left_boundary"] | res["reached_right_boundary"]
    if not census:
        del res["census_right"], res["census_left"]
    return res


def estimate_survival(config: FrogConfig, replications: int, workers: int = 1) -> SurvivalEstimate:
    """Fraction of replications whose closure reaches -N or N, with a Wilson 95% CI."""
    res = run_replications(config, replications, workers)
    k = int(res["reached_boundary"].sum())
    lo, hi = wilson_interval(k, replications)
    return SurvivalEstimate(k / replications, lo, hi, replications, config.window, k)


def closure_bfs_oracle(config: FrogConfig) -> ClosureResult:
    """Brute-force closure: materialise every visited set A(x) and run a graph
    search over the edges ``x -> y`` for ``y`` in A(x).

    In ``walk="steps"`` mode the visited sets are the literal walk trajectories;
    otherwise they are the intervals of the exit-problem draws.
    """
    if config.engine != EngineKind.EXACT_WALK:
        raise NotImplementedError("the BFS oracle only supports the EXACT_WALK engine")
    if config.window > 500:
        raise ValueError("the BFS oracle is limited to windows <= 500")
    args = config.kernel_args()
    kargs = args[:10]
    n = config.window
    rep = config.seed.replication
    seed = np.uint64(config.seed.master_seed)

    def visited_sets(x):
        parts = _vertex_particles(*kargs, rep, x)
        sets = []
        for i in range(parts.shape[0]):
            if config.walk == "steps":
                key = np.uint64(rng.stream_key(seed, rep, x, i, rng.WALK))
                pos = walk_positions(parts[i, 2], config.budget, n + x, n - x, key)
                s = {int(v) + x for v in pos}
            else:
                dl, dr = int(parts[i, 0]), int(parts[i, 1])
                s = set(range(x - dl, x + dr + 1))
            sets.append({y for y in s if -n <= y <= n})
        return sets

    seen = {0}
    queue = deque([0])
    root = 0
    particles = 0
    while queue:
        x = queue.popleft()
        for a in visited_sets(x):
            particles += 1
            if 0 in a:
                root += 1
            for y in sorted(a):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    lo, hi = min(seen), max(seen)
    if len(seen) != hi - lo + 1:
        raise AssertionError("oracle closure is not an interval")
    return ClosureResult(lo, hi, lo == -n, hi == n, root, particles, 0)


@dataclass
class RecurrenceRow:
    window: int
    replications: int
    surviving: int
    mean_root_visits: float | None
    mean_census: float | None


@dataclass
class RecurrenceProfile:
    rows: list
    raw: dict = field(default_factory=dict, repr=False)


def recurrence_profile(config: FrogConfig, windows, replications: int,
                       workers: int = 1) -> RecurrenceProfile:
    """Mean root-visit count among boundary-reaching replications, per window.

    ``mean_census`` is the mean, over the same replications, of the number of
    vertices x in [1, N] with at least one particle whose first particle's
    leftward reach is >= x.  A window with no surviving replication reports
    ``None`` for both means.
    """
    windows = list(windows)
    if not windows:
        raise ValueError("window ladder must be nonempty")
    rows = []
    raw = {}
    for n in windows:
        cfg = _with_window(config, n)
        res = run_replications(cfg, replications, workers, census=True)
        surv = res["reached_boundary"]
        k = int(surv.sum())
        if k:
            mean_root = float(res["root_visit_count"][surv].mean())
            mean_census = float(res["census_right"][surv].mean())
        else:
            mean_root = mean_census = None
        rows.append(RecurrenceRow(n, replications, k, mean_root, mean_census))
        raw[n] = res
    return RecurrenceProfile(rows, raw)


def _with_window(config: FrogConfig, window: int) -> FrogConfig:
    from dataclasses import replace

    return replace(config, window=window)
