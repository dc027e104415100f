"""Reach of a single particle: a simple symmetric walk killed before each jump
with probability ``1 - p``.

Two routes to the joint rightward/leftward maxima are provided:

* ``walk_reach`` runs the walk step by step (ground truth, cost ~ lifetime);
* ``exact_pair`` samples the same joint law in O(log reach) using the exit
  problem of the killed walk.  With ``theta = acosh(1/p)`` the functions
  ``exp(+-theta x)`` are harmonic for the killed walk, so from ``x`` inside
  ``(lo, hi)`` the walk reaches ``hi`` first with probability
  ``sinh(theta (x - lo)) / sinh(theta (hi - lo))``.  ``D_right`` is geometric
  with ratio ``exp(-theta)``; given ``D_right = b`` the leftward reach has CDF

      P(D_left < a | D_right = b) = h(a) k(a) / P(D_right = b),
      h(a) = sinh(theta a) / sinh(theta (a + b)),
      k(a) = 4 sinh(theta/2) sinh(theta L/2) sinh(theta (L-1)/2) / sinh(theta L),

  with ``L = a + b + 1``: reach ``b`` before ``-a``, then die inside
  ``(-a, b + 1)``.  The same algebra gives ``P(D_star >= n) = sech(theta n)``.

Frog-model engines (``EngineKind``) consume these draws; all randomness comes
from counter-based streams keyed by (vertex, particle), so different engines
can be run on identical particles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from numba import njit

from . import rng
from .laws import theta_from_p
from .quadrature import integrate
from .rng import SeedSpec
from .special import DomainError, log_beta

_LOG2 = math.log(2.0)
_LOG4 = math.log(4.0)


class EngineKind(IntEnum):
    EXACT_WALK = 0
    MARGINAL_INTERVAL = 1
    RIGHT_ONLY = 2
    STAR_UPPER = 3

    @classmethod
    def parse(cls, text: str) -> "EngineKind":
        key = text.strip().lower().replace("-", "_")
        aliases = {
            "exact": cls.EXACT_WALK, "exact_walk": cls.EXACT_WALK, "exactwalk": cls.EXACT_WALK,
            "marginal": cls.MARGINAL_INTERVAL, "marginal_interval": cls.MARGINAL_INTERVAL,
            "right": cls.RIGHT_ONLY, "right_only": cls.RIGHT_ONLY, "rightonly": cls.RIGHT_ONLY,
            "star": cls.STAR_UPPER, "star_upper": cls.STAR_UPPER, "starupper": cls.STAR_UPPER,
        }
        if key not in aliases:
            raise ValueError(f"unknown engine {text!r}")
        return aliases[key]

    @property
    def label(self) -> str:
        return {0: "exact", 1: "marginal", 2: "right", 3: "star"}[int(self)]


class UnboundedReach(ValueError):
    """p = 1: the walk never dies, so its reach is infinite."""


@dataclass(frozen=True)
class ParticleReach:
    d_right: int
    d_left: int
    d_star: int
    truncated_right: bool
    truncated_left: bool
    steps_used: int = 0


# ------------------------------------------------------------------ closed forms


def tail_ratio(p: float) -> float:
    """(1 - sqrt(1 - p^2)) / p, the ratio of the geometric tail of D_right."""
    if not 0.0 < p <= 1.0:
        raise DomainError(f"tail_ratio needs p in (0, 1], got {p!r}")
    return p / (1.0 + math.sqrt((1.0 - p) * (1.0 + p)))


def tail_d_right(p: float, n: int) -> float:
    return tail_ratio(p) ** n if n > 0 else 1.0


def tail_d_star(p: float, n: int) -> float:
    """Exact P(D_star >= n | p) = sech(theta n)."""
    if n <= 0:
        return 1.0
    return 1.0 / math.cosh(theta_from_p(p) * n)


def tail_d_star_upper(p: float, n: int) -> float:
    """min(1, 2 r(p)^n), the two-sided union bound."""
    return min(1.0, 2.0 * tail_d_right(p, n))


def joint_cdf(p: float, a: int, b: int) -> float:
    """P(D_left < a, D_right < b | p) for a, b >= 1."""
    if a < 1 or b < 1:
        return 0.0
    th = theta_from_p(p)
    if th == 0.0:
        return 0.0
    s = math.sinh
    return 1.0 - (s(th * a) + s(th * b)) / s(th * (a + b))


# --------------------------------------------------------------- numba kernels


@njit(cache=True, nogil=True)
def log_sinh(x):
    if x > 20.0:
        return x - _LOG2 + math.log1p(-math.exp(-2.0 * x))
    return math.log(math.sinh(x))


@njit(cache=True, nogil=True)
def right_from_uniform(theta, u):
    """D_right as a float (may exceed any int range); inf when theta == 0."""
    if theta == 0.0:
        return math.inf
    return math.floor(-math.log(u) / theta)


@njit(cache=True, nogil=True)
def log_left_cdf(theta, a, b):
    """log P(D_left < a | D_right = b) for integer-valued a >= 1, b >= 0."""
    big_l = a + b + 1.0
    return (
        log_sinh(theta * a)
        - log_sinh(theta * (a + b))
        + _LOG4
        + log_sinh(0.5 * theta)
        + log_sinh(0.5 * theta * big_l)
        + log_sinh(0.5 * theta * (big_l - 1.0))
        - log_sinh(theta * big_l)
        + theta * b
        - math.log(-math.expm1(-theta))
    )


@njit(cache=True, nogil=True)
def left_given_right(theta, b, u, cap):
    """Smallest d with P(D_left <= d | D_right = b) >= u, clipped at ``cap``.

    Returns ``cap + 1`` when the draw exceeds ``cap`` (caller clips and flags).
    """
    lu = math.log(u)
    if log_left_cdf(theta, 1.0, b) >= lu:
        return 0
    lo = 1  # F(lo) < u
    hi = 2
    while True:
        if hi > cap + 1:
            if log_left_cdf(theta, float(cap + 1), b) < lu:
                return cap + 1
            hi = cap + 1
            break
        if log_left_cdf(theta, float(hi), b) >= lu:
            break
        lo = hi
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_left_cdf(theta, float(mid), b) >= lu:
            hi = mid
        else:
            lo = mid
    return hi - 1


@njit(cache=True, nogil=True)
def left_at_least(theta, b, u, a):
    """Event {D_left >= a} for the same draw ``left_given_right`` would make."""
    if a <= 0:
        return True
    return log_left_cdf(theta, float(a), b) < math.log(u)


@njit(cache=True, nogil=True)
def exact_pair(theta, u_right, u_left, cap):
    """Joint (d_right, d_left) clipped at ``cap`` each; flags mark clipping."""
    if theta == 0.0:
        return cap, cap, True, True
    b = right_from_uniform(theta, u_right)
    tr = b > cap
    dr = cap if tr else int(b)
    dl = left_given_right(theta, b, u_left, cap)
    tl = dl > cap
    if tl:
        dl = cap
    return dr, dl, tr, tl


@njit(cache=True, nogil=True)
def star_upper_from_uniform(theta, u, cap):
    """Inverse transform for the law with tail min(1, 2 exp(-theta n))."""
    if theta == 0.0:
        return cap
    s = math.floor((_LOG2 - math.log(u)) / theta)
    if s > cap:
        return cap
    return int(s)


@njit(cache=True, nogil=True)
def star_upper_coupled(theta, m, m_clipped, v, cap):
    """Union-bound reach that dominates the exact D_star = m pathwise.

    The exact D_star is randomised into a uniform with ``v`` (its own PIT) and
    pushed through the quantile function of the dominating law.
    """
    if theta == 0.0 or m_clipped:
        return cap
    hi = 1.0 / math.cosh(theta * m) if m > 0 else 1.0
    lo = 1.0 / math.cosh(theta * (m + 1))
    tail = hi * (1.0 - v) + lo * v
    s = math.ceil(math.log(2.0 / tail) / theta) - 1.0
    if s < m:
        s = m  # float rounding guard; exact arithmetic gives s >= m
    if s > cap:
        return cap
    return int(s)


@njit(cache=True, nogil=True)
def walk_reach(p, budget, cap_left, cap_right, key):
    """Step-by-step walk; returns (d_right, d_left, trunc_right, trunc_left, steps, alive)."""
    die = 1.0 - p
    step_right = die + 0.5 * p
    pos = 0
    mr = 0
    ml = 0
    steps = 0
    alive = True
    while True:
        if mr >= cap_right and ml >= cap_left:
            break
        if steps >= budget:
            break
        u = rng.uniform(key, steps)
        steps += 1
        if u < die:
            alive = False
            break
        if u < step_right:
            pos += 1
            if pos > mr:
                mr = pos
        else:
            pos -= 1
            if -pos > ml:
                ml = -pos
    tr = alive or mr > cap_right
    tl = alive or ml > cap_left
    if mr > cap_right:
        mr = cap_right
    if ml > cap_left:
        ml = cap_left
    return mr, ml, tr, tl, steps, alive


@njit(cache=True, nogil=True)
def walk_positions(p, budget, cap_left, cap_right, key):
    """Positions visited by the same walk as ``walk_reach`` (debugging/oracle use)."""
    die = 1.0 - p
    step_right = die + 0.5 * p
    out = [0]
    pos = 0
    mr = 0
    ml = 0
    steps = 0
    while not (mr >= cap_right and ml >= cap_left) and steps < budget:
        u = rng.uniform(key, steps)
        steps += 1
        if u < die:
            break
        pos += 1 if u < step_right else -1
        if pos > mr:
            mr = pos
        if -pos > ml:
            ml = -pos
        out.append(pos)
    return np.array(out)


@njit(cache=True, nogil=True)
def particle_reach(engine, use_steps, p, theta, seed, rep, x, i, cap_left, cap_right, budget):
    """Per-engine reach of particle ``i`` at vertex ``x``, clipped at the caps.

    Returns ``(d_left, d_right, budget_exhausted, steps)``.  The exact pair is
    drawn identically for every engine, so engines differ only in how they use
    it: RIGHT_ONLY drops the left reach, STAR_UPPER replaces both sides by a
    union-bound reach coupled to dominate the exact maximum.
    """
    cap = cap_left if cap_left > cap_right else cap_right
    if use_steps:
        k_walk = rng.stream_key(seed, rep, x, i, rng.WALK)
        if engine == 2:
            dr, dl, tr, tl, steps, alive = walk_reach(p, budget, 0, cap_right, k_walk)
            return 0, dr, alive, steps
        if engine == 3:
            dr, dl, tr, tl, steps, alive = walk_reach(p, budget, cap, cap, k_walk)
            m = dr if dr > dl else dl
            v = rng.uniform(rng.stream_key(seed, rep, x, i, rng.STAR), 0)
            s = star_upper_coupled(theta, m, alive or m >= cap, v, cap)
            return min(s, cap_left), min(s, cap_right), alive, steps
        dr, dl, tr, tl, steps, alive = walk_reach(p, budget, cap_left, cap_right, k_walk)
        if engine == 1:
            u = rng.uniform(rng.stream_key(seed, rep, x, i, rng.LEFT_MARGINAL), 0)
            bl = right_from_uniform(theta, u)
            dl = cap_left if bl > cap_left else int(bl)
        return dl, dr, alive, steps

    u_right = rng.uniform(rng.stream_key(seed, rep, x, i, rng.RIGHT), 0)
    if theta == 0.0:
        if engine == 2:
            return 0, cap_right, False, 0
        return cap_left, cap_right, False, 0
    b = right_from_uniform(theta, u_right)
    dr = cap_right if b > cap_right else int(b)
    if engine == 2:
        return 0, dr, False, 0
    if engine == 1:
        u = rng.uniform(rng.stream_key(seed, rep, x, i, rng.LEFT_MARGINAL), 0)
        bl = right_from_uniform(theta, u)
        return (cap_left if bl > cap_left else int(bl)), dr, False, 0
    u_left = rng.uniform(rng.stream_key(seed, rep, x, i, rng.LEFT), 0)
    er, el, tr, tl = exact_pair(theta, u_right, u_left, cap)
    if engine == 3:
        m = er if er > el else el
        v = rng.uniform(rng.stream_key(seed, rep, x, i, rng.STAR), 0)
        s = star_upper_coupled(theta, m, tr or tl, v, cap)
        return min(s, cap_left), min(s, cap_right), False, 0
    return min(el, cap_left), min(er, cap_right), False, 0


@njit(cache=True, nogil=True)
def _walk_block(p_arr, budget, window, seed, rep, out_r, out_l, out_tr, out_tl, out_steps):
    for j in range(p_arr.shape[0]):
        key = rng.stream_key(seed, rep, 0, j, rng.WALK)
        dr, dl, tr, tl, steps, alive = walk_reach(p_arr[j], budget, window, window, key)
        out_r[j] = dr
        out_l[j] = dl
        out_tr[j] = tr
        out_tl[j] = tl
        out_steps[j] = steps


@njit(cache=True, nogil=True)
def _pair_block(theta_arr, cap, seed, rep, out_r, out_l, out_star):
    for j in range(theta_arr.shape[0]):
        ur = rng.uniform(rng.stream_key(seed, rep, 0, j, rng.RIGHT), 0)
        ul = rng.uniform(rng.stream_key(seed, rep, 0, j, rng.LEFT), 0)
        dr, dl, tr, tl = exact_pair(theta_arr[j], ur, ul, cap)
        out_r[j] = dr
        out_l[j] = dl
        m = dr if dr > dl else dl
        v = rng.uniform(rng.stream_key(seed, rep, 0, j, rng.STAR), 0)
        out_star[j] = star_upper_coupled(theta_arr[j], m, tr or tl, v, cap)


# ---------------------------------------------------------------- public ops


def _theta_checked(p: float) -> float:
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    if p == 1.0:
        raise UnboundedReach("p = 1 gives an infinite reach; clip to a window instead")
    return theta_from_p(p)


def sample_d_right(p: float, seed: SeedSpec) -> int:
    """Exact D_right: floor(E / theta) with E standard exponential."""
    theta = _theta_checked(p)
    u = seed.at(purpose=rng.RIGHT).uniform()
    return int(right_from_uniform(theta, u))


def sample_d_star_upper(p: float, seed: SeedSpec) -> int:
    """Draw from the law with tail min(1, 2 r(p)^n)."""
    theta = _theta_checked(p)
    u = seed.at(purpose=rng.STAR_DIRECT).uniform()
    return int(math.floor((_LOG2 - math.log(u)) / theta))


def sample_joint_reach(p: float, cap: int, seed: SeedSpec) -> ParticleReach:
    """Exact joint reach via the exit-problem sampler, clipped at ``cap``."""
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    theta = theta_from_p(p)
    ur = seed.at(purpose=rng.RIGHT).uniform()
    ul = seed.at(purpose=rng.LEFT).uniform()
    dr, dl, tr, tl = exact_pair(theta, ur, ul, cap)
    return ParticleReach(int(dr), int(dl), int(max(dr, dl)), bool(tr), bool(tl), 0)


def simulate_walk_reach(p: float, step_budget: int, window: int, seed: SeedSpec) -> ParticleReach:
    """Run one killed walk step by step; stops at death, at the budget, or once
    both running maxima reach ``window``."""
    if step_budget < 1 or window < 1:
        raise ValueError("step_budget and window must be >= 1")
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    key = seed.at(purpose=rng.WALK).key()
    dr, dl, tr, tl, steps, _ = walk_reach(p, step_budget, window, window, key)
    return ParticleReach(int(dr), int(dl), int(max(dr, dl)), bool(tr), bool(tl), int(steps))


def simulate_walk_reaches(p, n: int, master_seed: int, window: int = 10**4,
                          step_budget: int | None = None, replication: int = 0):
    """Batch of ``n`` independent step-by-step walks (particles 0..n-1 at vertex 0).

    ``p`` is a scalar or an array of per-particle survival parameters.  Returns a
    dict of arrays ``d_right, d_left, truncated_right, truncated_left, steps``.
    """
    budget = 10 * window * window if step_budget is None else step_budget
    p_arr = np.broadcast_to(np.asarray(p, dtype=float), (n,)).copy()
    out = {
        "d_right": np.empty(n, np.int64), "d_left": np.empty(n, np.int64),
        "truncated_right": np.empty(n, np.bool_), "truncated_left": np.empty(n, np.bool_),
        "steps": np.empty(n, np.int64),
    }
    _walk_block(p_arr, budget, window, np.uint64(master_seed), replication,
                out["d_right"], out["d_left"], out["truncated_right"], out["truncated_left"],
                out["steps"])
    return out


def sample_exact_pairs(theta, n: int, master_seed: int, cap: int = 10**9, replication: int = 0):
    """Batch of exit-problem draws; returns ``d_right, d_left, star_upper`` arrays
    (the last one coupled to dominate ``max(d_right, d_left)`` pathwise)."""
    th = np.broadcast_to(np.asarray(theta, dtype=float), (n,)).copy()
    r = np.empty(n, np.int64)
    left = np.empty(n, np.int64)
    star = np.empty(n, np.int64)
    _pair_block(th, cap, np.uint64(master_seed), replication, r, left, star)
    return {"d_right": r, "d_left": left, "star_upper": star}


# ------------------------------------------------------- Beta mixture of tails


def _theta_of_q(q):
    """acosh(1 / (1 - q)) computed from q = 1 - p without cancellation."""
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = q / (1.0 - q)
        th = np.log1p(s + np.sqrt(s * (s + 2.0)))
    return np.where(q >= 1.0, np.inf, th)


def tail_d_right_beta(n: int, alpha: float, beta: float, rel_tol: float = 1e-10) -> float:
    """P(D_right >= n) when p ~ Beta(alpha, beta): the integral of r(x)^n against
    the Beta density.

    The domain is split at ``q = 1 - x = min(1/2, 1/n)``.  Near ``x = 1`` the
    substitution ``t = q^beta`` absorbs the ``(1 - x)^(beta - 1)`` singularity;
    on the left piece ``u = x^alpha`` absorbs ``x^(alpha - 1)``.  The right
    piece gets extra breakpoints around ``q ~ 1/n^2`` where the mass sits.
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    if not (alpha > 0 and beta > 0):
        raise DomainError("alpha and beta must be positive")
    if n == 0:
        return 1.0
    lb = log_beta(alpha, beta)
    q_split = min(0.5, 1.0 / n)

    def right(t):
        q = t ** (1.0 / beta)
        logv = -n * _theta_of_q(q) + (alpha - 1.0) * np.log1p(-q) - lb
        return np.exp(logv) / beta

    def left(u):
        x = u ** (1.0 / alpha)
        q = 1.0 - x
        with np.errstate(divide="ignore"):
            logv = -n * _theta_of_q(q) + (beta - 1.0) * np.log1p(-x) - lb
        return np.exp(logv) / alpha

    t_max = q_split**beta
    scales = [c / (n * n) for c in (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4)]
    bps = sorted({0.0, t_max} | {s**beta for s in scales if s < q_split})
    value = integrate(right, bps, rel_tol=rel_tol).value
    u_max = (1.0 - q_split) ** alpha
    value += integrate(left, [0.0, 0.5 * u_max, u_max], rel_tol=rel_tol).value
    return min(1.0, value)
