"""Counter-based random streams.

Every random quantity in the package is a pure function of
``(master_seed, replication, vertex, particle, purpose, counter)``.  A stream
key is obtained by hashing the first five coordinates with the SplitMix64
finalizer; the ``counter``-th uniform of a stream is the SplitMix64 output at
``key + (counter + 1) * GOLDEN``.  Re-reading a particle's randomness from two
different processes therefore always yields the same numbers, which is what the
coupling checks rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0

# purpose tags
ETA = 1
PI = 2
RIGHT = 3
LEFT = 4
STAR = 5
WALK = 6
RADIUS = 7
LEFT_MARGINAL = 8
STAR_DIRECT = 9
OCCUPANCY_AUX = 10

PURPOSES = {
    "eta": ETA,
    "pi": PI,
    "right": RIGHT,
    "left": LEFT,
    "star": STAR,
    "walk": WALK,
    "radius": RADIUS,
    "left_marginal": LEFT_MARGINAL,
    "star_direct": STAR_DIRECT,
}


@njit(cache=True, nogil=True)
def mix64(z):
    z = np.uint64(z)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def stream_key(seed, rep, vertex, particle, purpose):
    h = mix64(np.uint64(seed) + GOLDEN)
    h = mix64(h ^ mix64(np.uint64(np.int64(rep)) + GOLDEN * np.uint64(2)))
    h = mix64(h ^ mix64(np.uint64(np.int64(vertex)) + GOLDEN * np.uint64(3)))
    h = mix64(h ^ mix64(np.uint64(np.int64(particle)) + GOLDEN * np.uint64(4)))
    h = mix64(h ^ mix64(np.uint64(np.int64(purpose)) + GOLDEN * np.uint64(5)))
    return h


@njit(cache=True, nogil=True)
def uniform(key, counter):
    """Uniform on the open interval (0, 1)."""
    z = mix64(key + (np.uint64(counter) + _ONE) * GOLDEN)
    return (float(z >> _S11) + 0.5) * _INV53


@njit(cache=True, nogil=True)
def _uniform_block(seed, reps, vertices, particles, purpose, counter, out):
    for j in range(out.shape[0]):
        key = stream_key(seed, reps[j], vertices[j], particles[j], purpose)
        out[j] = uniform(key, counter)


def uniforms(seed, replication, vertex, particle, purpose, counter=0):
    """Vectorised uniforms; array-valued coordinates are broadcast together."""
    r, v, p = np.broadcast_arrays(
        np.asarray(replication, dtype=np.int64),
        np.asarray(vertex, dtype=np.int64),
        np.asarray(particle, dtype=np.int64),
    )
    shape = r.shape
    out = np.empty(r.size)
    _uniform_block(
        np.uint64(seed % 2**64),
        np.ascontiguousarray(r).ravel(),
        np.ascontiguousarray(v).ravel(),
        np.ascontiguousarray(p).ravel(),
        int(purpose),
        int(counter),
        out,
    )
    return out.reshape(shape)


@dataclass(frozen=True)
class SeedSpec:
    """Coordinates of one random stream."""

    master_seed: int
    replication: int = 0
    vertex: int = 0
    particle: int = 0
    purpose: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def key(self) -> np.uint64:
        return np.uint64(stream_key(
            np.uint64(self.master_seed),
            self.replication,
            self.vertex,
            self.particle,
            self.purpose,
        ))

    def at(self, **coords) -> "SeedSpec":
        return replace(self, **coords)

    def uniform(self, counter: int = 0) -> float:
        return float(uniform(self.key(), counter))
