"""Laws of the per-particle survival parameter and of the initial occupancy.

Laws are small frozen dataclasses.  Each one has an integer/float encoding
(``encode()``) that the numba kernels consume, so the same law object drives
both the Python API and the compiled simulations.

The survival parameter is carried internally as ``theta = acosh(1/p)``, the
exponential decay rate of the reach tail, ``P(D_right >= n | p) = exp(-theta n)``.
For Beta laws ``theta`` is computed from the log-odds of the two gamma
variates, so particles with ``1 - p`` far below machine epsilon keep their
exact decay rate even though ``p`` itself rounds to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numba import njit

from . import rng
from .rng import SeedSpec
from .special import DomainError, beta_function, beta_pdf  # noqa: F401  (re-export)

INFINITE_MEAN = math.inf
"""Sentinel returned by ``mean()`` for laws without a finite mean."""

PI_POINT, PI_BETA = 0, 1
OCC_CONSTANT, OCC_BERNOULLI, OCC_POISSON, OCC_GEOMETRIC = 0, 1, 2, 3

_LOG2 = math.log(2.0)
_P_BELOW_ONE = 1.0 - 2.0**-53
_POISSON_MAX_LAMBDA = 700.0


# ---------------------------------------------------------------- pi laws


@dataclass(frozen=True)
class PointMass:
    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise DomainError(f"PointMass needs p in (0, 1], got {self.p!r}")

    def encode(self):
        return PI_POINT, float(self.p), 0.0

    def mean(self) -> float:
        return self.p

    def __str__(self):
        return f"point:{self.p:g}"


@dataclass(frozen=True)
class Beta:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(f"Beta needs alpha, beta > 0, got ({self.alpha!r}, {self.beta!r})")

    def encode(self):
        return PI_BETA, float(self.alpha), float(self.beta)

    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def pdf(self, x: float) -> float:
        return beta_pdf(x, self.alpha, self.beta)

    def __str__(self):
        return f"beta:{self.alpha:g},{self.beta:g}"


PiLaw = Union[PointMass, Beta]


# --------------------------------------------------------- occupancy laws


@dataclass(frozen=True)
class Constant:
    k: int

    def __post_init__(self):
        if self.k < 0 or int(self.k) != self.k:
            raise DomainError(f"Constant occupancy needs a non-negative integer, got {self.k!r}")

    def encode(self):
        return OCC_CONSTANT, float(self.k)

    def mean(self) -> float:
        return float(self.k)

    def pgf(self, s):
        return np.ones_like(s, dtype=float) if self.k == 0 else np.power(s, self.k) * 1.0

    def p_zero(self) -> float:
        return 1.0 if self.k == 0 else 0.0

    def __str__(self):
        return f"const:{self.k}"


@dataclass(frozen=True)
class Bernoulli:
    q: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise DomainError(f"Bernoulli occupancy needs q in [0, 1], got {self.q!r}")

    def encode(self):
        return OCC_BERNOULLI, float(self.q)

    def mean(self) -> float:
        return self.q

    def pgf(self, s: float) -> float:
        return 1.0 - self.q + self.q * s

    def p_zero(self) -> float:
        return 1.0 - self.q

    def __str__(self):
        return f"bernoulli:{self.q:g}"


@dataclass(frozen=True)
class Poisson:
    lam: float

    def __post_init__(self):
        if not 0.0 < self.lam <= _POISSON_MAX_LAMBDA:
            raise DomainError(
                f"Poisson occupancy needs 0 < lambda <= {_POISSON_MAX_LAMBDA:g}, got {self.lam!r}"
            )

    def encode(self):
        return OCC_POISSON, float(self.lam)

    def mean(self) -> float:
        return self.lam

    def pgf(self, s):
        return np.exp(self.lam * (np.asarray(s, dtype=float) - 1.0))

    def p_zero(self) -> float:
        return math.exp(-self.lam)

    def __str__(self):
        return f"poisson:{self.lam:g}"


@dataclass(frozen=True)
class GeometricNumber:
    """P(eta = k) = (1 - s) s^k on N_0.  ``s = 1`` is the improper infinite-mean limit."""

    s: float

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise DomainError(f"GeometricNumber needs s in [0, 1], got {self.s!r}")

    def encode(self):
        return OCC_GEOMETRIC, float(self.s)

    def mean(self) -> float:
        if self.s == 1.0:
            return INFINITE_MEAN
        return self.s / (1.0 - self.s)

    def pgf(self, s):
        s = np.asarray(s, dtype=float)
        if self.s == 1.0:
            return np.where(s == 1.0, 1.0, 0.0)
        return (1.0 - self.s) / (1.0 - self.s * s)

    def p_zero(self) -> float:
        return 1.0 - self.s

    def __str__(self):
        return f"geometric:{self.s:g}"


OccupancyLaw = Union[Constant, Bernoulli, Poisson, GeometricNumber]


def parse_pi_law(text: str) -> PiLaw:
    """``point:0.7`` or ``beta:1,0.25``."""
    kind, _, args = text.partition(":")
    vals = [float(v) for v in args.split(",") if v.strip()]
    kind = kind.strip().lower()
    if kind in ("point", "pointmass") and len(vals) == 1:
        return PointMass(vals[0])
    if kind == "beta" and len(vals) == 2:
        return Beta(vals[0], vals[1])
    raise ValueError(f"cannot parse pi law {text!r}")


def parse_occupancy(text: str) -> OccupancyLaw:
    """``const:1``, ``bernoulli:0.5``, ``poisson:2`` or ``geometric:0.5``."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    try:
        val = float(arg)
    except ValueError:
        raise ValueError(f"cannot parse occupancy law {text!r}") from None
    if kind in ("const", "constant"):
        if val != int(val):
            raise ValueError(f"constant occupancy must be an integer: {text!r}")
        return Constant(int(val))
    if kind == "bernoulli":
        return Bernoulli(val)
    if kind == "poisson":
        return Poisson(val)
    if kind in ("geometric", "geom"):
        return GeometricNumber(val)
    raise ValueError(f"cannot parse occupancy law {text!r}")


# ------------------------------------------------------------ numba kernels


@njit(cache=True, nogil=True)
def theta_from_p(p):
    """acosh(1/p): decay rate of the reach tail; 0 when p == 1."""
    if p >= 1.0:
        return 0.0
    t = (1.0 - p) / p
    return math.log1p(t + math.sqrt(t * (t + 2.0)))


@njit(cache=True, nogil=True)
def theta_from_logodds(d):
    """acosh(1 + e^d), i.e. theta for p = 1 / (1 + e^d)."""
    if d > 30.0:
        return d + math.log1p(math.exp(-d)) + _LOG2
    t = math.exp(d)
    return math.log1p(t + math.sqrt(t * (t + 2.0)))


@njit(cache=True, nogil=True)
def _normal(key, c):
    # Box-Muller, cosine branch only
    u1 = rng.uniform(key, c)
    u2 = rng.uniform(key, c + 1)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2), c + 2


@njit(cache=True, nogil=True)
def log_gamma_variate(shape, key, c):
    """log of a Gamma(shape, 1) variate (Marsaglia-Tsang, boosted below 1)."""
    boost = 0.0
    if shape < 1.0:
        boost = math.log(rng.uniform(key, c)) / shape
        c += 1
        shape += 1.0
    d = shape - 1.0 / 3.0
    cc = 1.0 / math.sqrt(9.0 * d)
    while True:
        z, c = _normal(key, c)
        v = 1.0 + cc * z
        if v <= 0.0:
            continue
        v = v * v * v
        u = rng.uniform(key, c)
        c += 1
        if math.log(u) < 0.5 * z * z + d - d * v + d * math.log(v):
            return math.log(d * v) + boost, c


@njit(cache=True, nogil=True)
def pi_draw(kind, a, b, key):
    """Draw the survival parameter; returns (p, theta) with p clamped into (0, 1)."""
    if kind == PI_POINT:
        return a, theta_from_p(a)
    lx, c = log_gamma_variate(a, key, 0)
    ly, c = log_gamma_variate(b, key, c)
    d = ly - lx
    if d > 0.0:
        e = math.exp(-d)
        p = e / (1.0 + e)
    else:
        p = 1.0 / (1.0 + math.exp(d))
    if p >= 1.0:
        p = _P_BELOW_ONE
    elif p <= 0.0:
        p = 5e-324
    return p, theta_from_logodds(d)


@njit(cache=True, nogil=True)
def eta_draw(kind, param, key):
    """Initial particle count; -1 signals the improper s = 1 geometric law."""
    if kind == OCC_CONSTANT:
        return int(param)
    u = rng.uniform(key, 0)
    if kind == OCC_BERNOULLI:
        return 1 if u < param else 0
    if kind == OCC_POISSON:
        k = 0
        pk = math.exp(-param)
        cdf = pk
        while u > cdf:
            k += 1
            pk *= param / k
            new = cdf + pk
            if new == cdf:
                break
            cdf = new
        return k
    # geometric on N_0
    if param <= 0.0:
        return 0
    if param >= 1.0:
        return -1
    return int(math.floor(math.log(u) / math.log(param)))


@njit(cache=True, nogil=True)
def _pi_block(kind, a, b, seed, rep, vertices, particles, p_out, theta_out):
    for j in range(p_out.shape[0]):
        key = rng.stream_key(seed, rep, vertices[j], particles[j], rng.PI)
        p_out[j], theta_out[j] = pi_draw(kind, a, b, key)


@njit(cache=True, nogil=True)
def _eta_block(kind, param, seed, rep, vertices, out):
    for j in range(out.shape[0]):
        out[j] = eta_draw(kind, param, rng.stream_key(seed, rep, vertices[j], 0, rng.ETA))


# ----------------------------------------------------------------- public ops


def sample_pi(law: PiLaw, seed: SeedSpec) -> float:
    """One draw of the survival parameter from the stream at ``seed`` (purpose ignored)."""
    kind, a, b = law.encode()
    key = np.uint64(rng.stream_key(
        np.uint64(seed.master_seed), seed.replication, seed.vertex, seed.particle, rng.PI
    ))
    return float(pi_draw(kind, a, b, key)[0])


def sample_pi_array(law: PiLaw, master_seed: int, n: int, replication: int = 0):
    """``n`` draws (particles 0..n-1 at vertex 0); returns ``(p, theta)`` arrays."""
    kind, a, b = law.encode()
    p = np.empty(n)
    theta = np.empty(n)
    particles = np.arange(n, dtype=np.int64)
    _pi_block(kind, a, b, np.uint64(master_seed), replication,
              np.zeros(n, dtype=np.int64), particles, p, theta)
    return p, theta


def pgf_occupancy(law: OccupancyLaw, s):
    """E[s^eta] for s in [0, 1]; accepts scalars or arrays."""
    arr = np.asarray(s, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise DomainError(f"pgf argument must lie in [0, 1], got {s!r}")
    out = law.pgf(arr)
    return float(out) if np.ndim(out) == 0 else out


def mean_occupancy(law: OccupancyLaw) -> float:
    return law.mean()


def sample_occupancy(law: OccupancyLaw, seed: SeedSpec) -> int:
    kind, param = law.encode()
    key = np.uint64(rng.stream_key(
        np.uint64(seed.master_seed), seed.replication, seed.vertex, 0, rng.ETA
    ))
    k = int(eta_draw(kind, param, key))
    if k < 0:
        raise DomainError("GeometricNumber(1) is improper and cannot be sampled")
    return k


def sample_occupancy_array(law: OccupancyLaw, master_seed: int, n: int, replication: int = 0):
    """Occupancies of vertices 0..n-1."""
    if isinstance(law, GeometricNumber) and law.s == 1.0:
        raise DomainError("GeometricNumber(1) is improper and cannot be sampled")
    kind, param = law.encode()
    out = np.empty(n, dtype=np.int64)
    _eta_block(kind, param, np.uint64(master_seed), replication, np.arange(n, dtype=np.int64), out)
    return out
