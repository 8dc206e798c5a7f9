"""Geometry of the compact domain: sample grids, open sets, thickenings."""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from config import MATCH_TOL, DomainError, PreconditionError, RegionMismatch

logger = logging.getLogger(__name__)


def as_xy(zs) -> np.ndarray:
    """Complex points as an (N, 2) real array, the layout cdist expects."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    return np.column_stack([zs.real, zs.imag])


def pairwise(a, b) -> np.ndarray:
    return cdist(as_xy(a), as_xy(b))


@dataclass(frozen=True, eq=False)
class Region:
    """
    A compact set modeled by a finite sample grid.

    Every point of the intended set lies within `h` of some grid point.
    """
    points: np.ndarray
    h: float

    def __post_init__(self):
        points = np.atleast_1d(np.asarray(self.points, dtype=complex)).copy()
        if points.size == 0:
            raise PreconditionError("Region needs at least one sample point")
        if not self.h > 0:
            raise PreconditionError(f"Region resolution must be positive, got {self.h}")
        if points.size > 1:
            d = pairwise(points, points)
            np.fill_diagonal(d, np.inf)
            if d.min() <= MATCH_TOL:
                raise PreconditionError("Region sample points must be pairwise distinct")
        points.setflags(write=False)
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'h', float(self.h))

    def __len__(self) -> int:
        return self.points.size

    @cached_property
    def distances(self) -> np.ndarray:
        d = pairwise(self.points, self.points)
        d.setflags(write=False)
        return d

    @cached_property
    def diameter(self) -> float:
        return float(self.distances.max())

    @property
    def step(self) -> float:
        """Neighborhood radius of one grid step."""
        return 2.0 * self.h

    def matches(self, other: 'Region') -> bool:
        if self is other:
            return True
        return (len(self) == len(other) and self.h == other.h
                and np.array_equal(self.points, other.points))

    def nearest(self, zs) -> Tuple[np.ndarray, np.ndarray]:
        """Index of, and distance to, the nearest grid point of each query."""
        d = pairwise(zs, self.points)
        idx = d.argmin(axis=1)
        return idx, d[np.arange(d.shape[0]), idx]

    def covers(self, zs) -> np.ndarray:
        _, dist = self.nearest(zs)
        return dist <= self.h + MATCH_TOL

    def index_of(self, zs) -> np.ndarray:
        """Grid index of each query point, -1 where it is not a sample point."""
        idx, dist = self.nearest(zs)
        return np.where(dist <= MATCH_TOL, idx, -1)

    def require_covered(self, zs, what: str = "point") -> None:
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        bad = ~self.covers(zs)
        if bad.any():
            raise DomainError(f"{what} {zs[bad][0]} lies farther than h={self.h} from the region")

    def refine(self, extra) -> 'Region':
        """Region with the extra points added as samples (duplicates dropped)."""
        extra = np.atleast_1d(np.asarray(extra, dtype=complex))
        if extra.size == 0:
            return self
        self.require_covered(extra, "refinement point")
        fresh = extra[self.index_of(extra) < 0]
        if fresh.size == 0:
            return self
        keep = [fresh[0]]
        for z in fresh[1:]:
            if np.min(np.abs(np.asarray(keep) - z)) > MATCH_TOL:
                keep.append(z)
        return Region(np.concatenate([self.points, np.asarray(keep)]), self.h)

    def leftmost(self, mask: Optional[np.ndarray] = None) -> int:
        """Index of the lexicographically smallest (re, im) point, optionally within a mask."""
        candidates = np.arange(len(self)) if mask is None else np.flatnonzero(mask)
        if candidates.size == 0:
            raise PreconditionError("No sample points selected")
        pts = self.points[candidates]
        order = np.lexsort((pts.imag, pts.real))
        return int(candidates[order[0]])

    def everything(self) -> 'SampleSet':
        return SampleSet(self, np.ones(len(self), dtype=bool))

    # Constructors

    @classmethod
    def from_points(cls, points, h: float) -> 'Region':
        return cls(np.asarray(points, dtype=complex), h)

    @classmethod
    def disk(cls, radius: float = 1.0, h: float = 0.1, center: complex = 0) -> 'Region':
        """Closed disk: a square lattice plus the boundary circle and a ring h/2 inside it."""
        pts = _lattice(radius, h)
        pts = pts[np.abs(pts) <= radius]
        ring = [_circle(radius, h)]
        if radius > h / 2:
            ring.append(_circle(radius - h / 2, h))
        pts = np.concatenate([pts] + ring)
        return cls(_dedupe(pts) + center, h)

    @classmethod
    def segment(cls, a: complex = 0, b: complex = 1, h: float = 0.05) -> 'Region':
        length = abs(b - a)
        count = max(2, int(math.ceil(length / h)) + 1)
        t = np.linspace(0.0, 1.0, count)
        return cls(a + (b - a) * t, h)

    @classmethod
    def annulus_region(cls, inner: float = 0.5, outer: float = 1.0, h: float = 0.1,
                       center: complex = 0) -> 'Region':
        if not 0 <= inner < outer:
            raise PreconditionError(f"Annulus needs 0 <= inner < outer, got {inner}, {outer}")
        pts = _lattice(outer, h)
        pts = pts[(np.abs(pts) >= inner) & (np.abs(pts) <= outer)]
        # boundary rings, each backed by a ring h/2 inside the annulus
        ring = [_circle(outer, h)]
        if outer - h / 2 > inner:
            ring.append(_circle(outer - h / 2, h))
        if inner > 0:
            ring.append(_circle(inner, h))
            if inner + h / 2 < outer:
                ring.append(_circle(inner + h / 2, h))
        pts = np.concatenate([pts] + ring)
        return cls(_dedupe(pts) + center, h)

    @classmethod
    def from_shape(cls, shape: str, h: float) -> 'Region':
        if shape == 'disk':
            return cls.disk(1.0, h)
        if shape == 'segment':
            return cls.segment(0, 1, h)
        if shape == 'annulus':
            return cls.annulus_region(0.5, 1.0, h)
        raise PreconditionError(f"Unknown region shape: {shape}")

    # JSON

    def to_json(self) -> dict:
        return {"points": [[float(z.real), float(z.imag)] for z in self.points], "h": self.h}

    @classmethod
    def from_json(cls, data: dict) -> 'Region':
        return cls(np.array([complex(re, im) for re, im in data["points"]]), float(data["h"]))


def _lattice(radius: float, h: float) -> np.ndarray:
    # square lattice with covering radius h
    spacing = h * math.sqrt(2.0)
    ticks = np.arange(-radius, radius + spacing / 2, spacing)
    xs, ys = np.meshgrid(ticks, ticks)
    return (xs + 1j * ys).ravel()


def _circle(radius: float, h: float) -> np.ndarray:
    count = max(8, int(math.ceil(2 * math.pi * radius / h)))
    return radius * np.exp(2j * math.pi * np.arange(count) / count)


def _dedupe(pts: np.ndarray) -> np.ndarray:
    rounded = np.round(pts.real, 9) + 1j * np.round(pts.imag, 9)
    _, first = np.unique(rounded, return_index=True)
    pts = pts[np.sort(first)]
    # lattice points closer than tolerance to the boundary circle
    d = pairwise(pts, pts)
    np.fill_diagonal(d, np.inf)
    drop = np.zeros(pts.size, dtype=bool)
    for i, j in zip(*np.nonzero(np.triu(d <= 1e-9))):
        if not drop[i]:
            drop[j] = True
    return pts[~drop]


@dataclass(frozen=True)
class Ball:
    """Open ball B(center, radius)."""
    center: complex
    radius: float

    def to_json(self) -> dict:
        return {"c": [float(np.real(self.center)), float(np.imag(self.center))], "r": float(self.radius)}

    @classmethod
    def from_json(cls, data: dict) -> 'Ball':
        re, im = data["c"]
        return cls(complex(re, im), float(data["r"]))


@dataclass(frozen=True)
class Shell:
    """Closed shell {y : inner <= |y - center| <= outer}; inner = 0 is a closed ball."""
    center: complex
    inner: float
    outer: float

    def to_json(self) -> dict:
        return {"c": [float(np.real(self.center)), float(np.imag(self.center))],
                "inner": float(self.inner), "outer": float(self.outer)}

    @classmethod
    def from_json(cls, data: dict) -> 'Shell':
        re, im = data["c"]
        return cls(complex(re, im), float(data["inner"]), float(data["outer"]))


@dataclass(frozen=True, eq=False)
class OpenSet:
    """
    Finite union of open balls, minus finitely many closed shells, inside a region.

    An empty ball list is the empty set.
    """
    region: Region
    balls: Tuple[Ball, ...] = ()
    holes: Tuple[Shell, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'balls', tuple(self.balls))
        object.__setattr__(self, 'holes', tuple(self.holes))
        for ball in self.balls:
            if not ball.radius > 0:
                raise PreconditionError(f"Ball radius must be positive, got {ball.radius}")

    def gaps(self, zs) -> np.ndarray:
        """dist(z, union of balls) - signed: negative inside. Exact for ball unions."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        if not self.balls:
            return np.full(zs.size, np.inf)
        centers = np.array([b.center for b in self.balls])
        radii = np.array([b.radius for b in self.balls])
        return (pairwise(zs, centers) - radii).min(axis=1)

    def contains(self, zs) -> np.ndarray:
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        inside = self.gaps(zs) < 0
        for hole in self.holes:
            r = np.abs(zs - hole.center)
            inside &= ~((r >= hole.inner) & (r <= hole.outer))
        return inside

    @cached_property
    def mask(self) -> np.ndarray:
        m = self.contains(self.region.points)
        m.setflags(write=False)
        return m

    def is_empty(self) -> bool:
        return not self.mask.any()

    def sampled(self) -> 'SampleSet':
        return SampleSet(self.region, self.mask)

    def union(self, other: 'OpenSet') -> 'OpenSet':
        if not self.region.matches(other.region):
            raise RegionMismatch("Cannot unite open sets of different regions")
        if self.holes or other.holes:
            raise PreconditionError("Union is only defined for plain ball unions")
        return OpenSet(self.region, self.balls + other.balls)

    def thicken(self, r: float) -> 'OpenSet':
        if r < 0:
            raise PreconditionError(f"Thickening radius must be nonnegative, got {r}")
        if r == 0:
            return self
        if not self.holes:
            return OpenSet(self.region, tuple(Ball(b.center, b.radius + r) for b in self.balls))
        # carved sets: distance to the set measured through its sample points
        members = self.region.points[self.mask]
        return OpenSet(self.region, tuple(Ball(z, r) for z in members))

    def to_json(self) -> dict:
        data = {"balls": [b.to_json() for b in self.balls]}
        if self.holes:
            data["holes"] = [s.to_json() for s in self.holes]
        return data

    @classmethod
    def from_json(cls, data: dict, region: Region) -> 'OpenSet':
        return cls(region, tuple(Ball.from_json(b) for b in data.get("balls", [])),
                   tuple(Shell.from_json(s) for s in data.get("holes", [])))


@dataclass(frozen=True, eq=False)
class SampleSet:
    """
    Subset of the finite sample space of a region.

    On a finite metric space every subset is open, and distances between
    subsets, diameters and thickenings are exact.
    """
    region: Region
    members: np.ndarray

    def __post_init__(self):
        members = np.asarray(self.members, dtype=bool).copy()
        if members.shape != (len(self.region),):
            raise PreconditionError("SampleSet mask must have one entry per sample point")
        members.setflags(write=False)
        object.__setattr__(self, 'members', members)

    @property
    def mask(self) -> np.ndarray:
        return self.members

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.members)

    @property
    def points(self) -> np.ndarray:
        return self.region.points[self.members]

    def __len__(self) -> int:
        return int(self.members.sum())

    def is_empty(self) -> bool:
        return not self.members.any()

    def contains(self, zs) -> np.ndarray:
        idx = self.region.index_of(zs)
        return (idx >= 0) & self.members[np.maximum(idx, 0)]

    def distance_from(self, zs=None) -> np.ndarray:
        """dist(p, self) for every sample point p (or for the given points)."""
        if self.is_empty():
            n = len(self.region) if zs is None else np.atleast_1d(zs).size
            return np.full(n, np.inf)
        if zs is None:
            return self.region.distances[:, self.members].min(axis=1)
        return pairwise(zs, self.points).min(axis=1)

    def thicken(self, r: float) -> 'SampleSet':
        if r < 0:
            raise PreconditionError(f"Thickening radius must be nonnegative, got {r}")
        if r == 0:
            return self
        return SampleSet(self.region, self.distance_from() < r)

    def diameter(self) -> float:
        if len(self) < 2:
            return 0.0
        idx = self.indices
        return float(self.region.distances[np.ix_(idx, idx)].max())

    def distance_to(self, other: 'SampleSet') -> float:
        if self.is_empty() or other.is_empty():
            return math.inf
        return float(self.region.distances[np.ix_(self.indices, other.indices)].min())

    def __and__(self, other: 'SampleSet') -> 'SampleSet':
        return SampleSet(self.region, self.members & _mask_of(other))

    def __or__(self, other: 'SampleSet') -> 'SampleSet':
        return SampleSet(self.region, self.members | _mask_of(other))

    def __sub__(self, other: 'SampleSet') -> 'SampleSet':
        return SampleSet(self.region, self.members & ~_mask_of(other))

    def complement(self) -> 'SampleSet':
        return SampleSet(self.region, ~self.members)

    def issubset(self, other) -> bool:
        return not (self.members & ~_mask_of(other)).any()


AnySet = Union[OpenSet, SampleSet]


def _mask_of(s: AnySet) -> np.ndarray:
    return s.mask


def ball(region: Region, center: complex, radius: float) -> OpenSet:
    return OpenSet(region, (Ball(center, radius),))


def empty_set(region: Region) -> OpenSet:
    return OpenSet(region)


def thicken(O: AnySet, r: float) -> AnySet:
    """
    O_r = {x : dist(x, O) < r}; r = 0 returns O unchanged.

    Ball unions thicken exactly by inflating radii. Carved sets thicken
    through their sample points, which is exact on the sample space and
    within h of the continuum set.
    """
    return O.thicken(r)


def annulus(region: Region, x: complex, s: float, eps: float) -> OpenSet:
    """Open annulus {y : s - eps < |y - x| < s + eps}."""
    if not 0 < eps < s:
        raise PreconditionError(f"Annulus needs 0 < eps < s, got eps={eps}, s={s}")
    return OpenSet(region, (Ball(x, s + eps),), (Shell(x, 0.0, s - eps),))


def sphere(region: Region, x: complex, s: float) -> SampleSet:
    """Sample points within grid tolerance of {y : |y - x| = s}."""
    r = np.abs(region.points - x)
    return SampleSet(region, np.abs(r - s) < region.h)


def peak_function(O: AnySet, x: complex) -> float:
    """
    f_O(x) = min(1, dist(x, complement of O)), and 0 off O.

    The complement distance is taken over grid points outside O, so the
    value carries an error of at most h.
    """
    if not O.contains(x)[0]:
        return 0.0
    outside = O.region.points[~O.mask]
    if outside.size == 0:
        return 1.0
    return float(min(1.0, np.abs(outside - x).min()))


def tent_function(Y: AnySet, delta: float) -> Callable[[np.ndarray], np.ndarray]:
    """
    g_Y(z) = 1 - dist(z, Y)/delta on Y_delta, 0 elsewhere.

    Lipschitz with constant 1/delta. Distances go through the sample
    points of Y.
    """
    if not delta > 0:
        raise PreconditionError(f"Tent width must be positive, got {delta}")
    members = Y.region.points[Y.mask]

    def g(zs):
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        if members.size == 0:
            return np.zeros(zs.size)
        dist = pairwise(zs, members).min(axis=1)
        return np.maximum(0.0, 1.0 - dist / delta)

    return g


def farthest_point_net(region: Region, radius: float, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Greedy net by farthest-point insertion.

    Starts at the leftmost selected sample point and adds the point farthest
    from the chosen centers until every selected point is within `radius`
    (strictly) of a center. Returns center indices in insertion order.
    """
    if not radius > 0:
        raise PreconditionError(f"Net radius must be positive, got {radius}")
    selected = np.ones(len(region), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    idx = np.flatnonzero(selected)
    centers = [region.leftmost(selected)]
    dist = region.distances[idx, centers[0]].copy()
    while dist.max() >= radius:
        farthest = int(idx[np.argmax(dist)])
        centers.append(farthest)
        dist = np.minimum(dist, region.distances[idx, farthest])
    logger.debug(f"Net of radius {radius:.4g} has {len(centers)} centers over {idx.size} points")
    return np.asarray(centers, dtype=int)
