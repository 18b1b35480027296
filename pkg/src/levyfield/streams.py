"""Reproducible random streams.

Two kinds of randomness are used:

* replicate streams: a numpy ``Generator`` backed by the counter-based Philox
  bit generator, keyed by ``(root_seed, index, *tags)`` through
  ``SeedSequence`` spawn keys. Streams for different replicates are
  statistically independent and do not depend on execution order.
* point-indexed draws: a uniform (or normal) value attached to a lattice
  point ``t`` that is a pure function of ``(seed, tag, t)``. Growing a
  window never resamples points already drawn, which keeps random sampling
  sets nested.
"""

import zlib

import numpy as np
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _tag_code(tag):
    if isinstance(tag, (int, np.integer)):
        return int(tag) & 0xFFFFFFFF
    return zlib.crc32(str(tag).encode("utf-8"))


def _spawn_key(index, tags):
    return (int(index),) + tuple(_tag_code(t) for t in tags)


def replicate_stream(root_seed, index=0, *tags):
    """Generator for replicate ``index`` under ``root_seed``; ``tags`` separate purposes."""
    ss = np.random.SeedSequence(int(root_seed) & _MASK64, spawn_key=_spawn_key(index, tags))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(root_seed, index=0, *tags):
    """A 64-bit integer seed derived from ``(root_seed, index, *tags)``."""
    ss = np.random.SeedSequence(int(root_seed) & _MASK64, spawn_key=_spawn_key(index, tags))
    lo, hi = (int(w) for w in ss.generate_state(2, dtype=np.uint32))
    return lo | (hi << 32)


def _splitmix64(x):
    z = x + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _point_hash(seed, points, tag):
    points = np.atleast_2d(np.asarray(points, dtype=np.int64))
    with np.errstate(over="ignore"):
        h = np.full(points.shape[0], int(seed) & _MASK64, dtype=np.uint64)
        h = _splitmix64(h ^ np.uint64(_tag_code(tag)))
        for k in range(points.shape[1]):
            h = _splitmix64(h ^ points[:, k].view(np.uint64))
    return h


def point_uniforms(seed, points, tag=0):
    """Uniform(0, 1) value per lattice point; never exactly 0 or 1."""
    h = _point_hash(seed, points, tag)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def point_normals(seed, points, tag=0):
    """Standard normal value per lattice point (inverse-CDF of :func:`point_uniforms`)."""
    return ndtri(point_uniforms(seed, points, tag))
