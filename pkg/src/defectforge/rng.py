"""Deterministic, splittable random streams.

All stochastic choices in the package draw from a RandomStream. A stream is
identified by (seed, stream_id); child streams extend the id, so sibling
streams never share state and reordering one consumer does not perturb
another.
"""
from __future__ import annotations

import zlib
from typing import Sequence

import numpy as np

from .errors import EmptyRequest, InvalidRegion


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("stream keys must be non-negative")
        return int(part)
    # crc32 is stable across platforms and interpreter runs, unlike hash()
    return zlib.crc32(str(part).encode("utf-8"))


class RandomStream:
    """PCG64 generator seeded from a SeedSequence with a spawn key.

    Args:
        seed: 64-bit unsigned seed.
        stream_id: tuple of non-negative ints (or strings, hashed with crc32).
    """

    def __init__(self, seed: int, stream_id: Sequence = ()):
        if seed < 0 or seed >= 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self.stream_id = tuple(_key(p) for p in stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def child(self, *parts) -> "RandomStream":
        return RandomStream(self.seed, self.stream_id + tuple(_key(p) for p in parts))

    def random(self, size=None):
        return self._gen.random(size)

    def uniform(self, low, high, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def choice(self, n: int, size=None, replace=True):
        return self._gen.choice(n, size=size, replace=replace)

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"


def _bounds(region):
    if hasattr(region, "bounds"):
        return region.bounds
    x0, x1, y0, y1 = region
    return float(x0), float(x1), float(y0), float(y1)


def uniform_points(stream: RandomStream, region, n: int) -> np.ndarray:
    """n points uniform in an axis-aligned rectangle, consuming exactly 2n draws.

    ``region`` is (xmin, xmax, ymin, ymax) or anything with a ``bounds`` attribute.
    """
    if n <= 0:
        raise EmptyRequest("uniform_points needs n >= 1")
    x0, x1, y0, y1 = _bounds(region)
    if not (x1 > x0 and y1 > y0):
        raise InvalidRegion(f"degenerate region {(x0, x1, y0, y1)}")
    u = stream.random((n, 2))
    lo = np.array([x0, y0])
    hi = np.array([x1, y1])
    return np.minimum(lo + u * (hi - lo), hi)


def uniform_in_polygon(stream: RandomStream, polygon, n: int) -> np.ndarray:
    """n points uniform strictly inside a convex polygon, by rejection from its bbox."""
    from .geometry import points_in_convex, polygon_area

    poly = np.asarray(polygon, dtype=float)
    if n <= 0:
        return np.zeros((0, 2))
    if abs(polygon_area(poly)) <= 0.0:
        raise InvalidRegion("polygon has zero area")
    if polygon_area(poly) < 0:
        poly = poly[::-1]
    box = (poly[:, 0].min(), poly[:, 0].max(), poly[:, 1].min(), poly[:, 1].max())
    out = []
    got = 0
    while got < n:
        cand = uniform_points(stream, box, max(8, 2 * (n - got)))
        keep = cand[points_in_convex(cand, poly, strict=True)]
        out.append(keep)
        got += len(keep)
    return np.concatenate(out)[:n]
