"""
The ordered semigroup Lsc(Omega, N-bar) on a sample grid.

Values are stored as floats so that infinity is first class; finite
values are always whole numbers.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Sequence

import numpy as np

from config import PreconditionError, RegionMismatch
from region import AnySet, Region, SampleSet

logger = logging.getLogger(__name__)

INF = math.inf


@dataclass(frozen=True, eq=False)
class LscFn:
    region: Region
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).copy()
        if values.shape != (len(self.region),):
            raise PreconditionError("LscFn needs exactly one value per grid point")
        finite = values[np.isfinite(values)]
        if np.isnan(values).any() or (values < 0).any() or (finite != np.round(finite)).any():
            raise PreconditionError("LscFn values must lie in {0, 1, 2, ..., inf}")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def top(self) -> float:
        return float(self.values.max())

    def __add__(self, other: 'LscFn') -> 'LscFn':
        return add(self, other)

    def __le__(self, other: 'LscFn') -> bool:
        return leq(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LscFn):
            return NotImplemented
        return self.region.matches(other.region) and np.array_equal(self.values, other.values)

    __hash__ = None

    def to_json(self) -> Dict[str, object]:
        """Sparse {grid index: value} map, "inf" for infinity."""
        return {str(i): ("inf" if math.isinf(v) else int(v))
                for i, v in enumerate(self.values) if v != 0}

    @classmethod
    def from_json(cls, data: Dict[str, object], region: Region) -> 'LscFn':
        values = np.zeros(len(region))
        for key, v in data.items():
            values[int(key)] = INF if v == "inf" else float(v)
        return cls(region, values)


def _same_region(f: LscFn, g: LscFn) -> None:
    if not f.region.matches(g.region):
        raise RegionMismatch("Lsc functions live on different regions")


def zero(region: Region) -> LscFn:
    return LscFn(region, np.zeros(len(region)))


def constant(region: Region, k: float) -> LscFn:
    return LscFn(region, np.full(len(region), float(k)))


def indicator(O: AnySet) -> LscFn:
    """1 on grid points of O, 0 elsewhere."""
    return LscFn(O.region, O.mask.astype(float))


def add(f: LscFn, g: LscFn) -> LscFn:
    _same_region(f, g)
    # inf + k = inf under IEEE addition already
    return LscFn(f.region, f.values + g.values)


def scale(f: LscFn, k: int) -> LscFn:
    if k < 0:
        raise PreconditionError(f"Scalar must be nonnegative, got {k}")
    if k == 0:
        return zero(f.region)
    return LscFn(f.region, f.values * k)


def leq(f: LscFn, g: LscFn) -> bool:
    _same_region(f, g)
    return bool((f.values <= g.values).all())


def level_set(f: LscFn, k: float) -> SampleSet:
    """{f >= k} as a set of grid points."""
    return SampleSet(f.region, f.values >= k)


def way_below(f: LscFn, g: LscFn) -> bool:
    """
    Compact containment on the grid.

    f << g iff f is finite and, at every level k >= 1, the one-step
    neighborhood of {f >= k} lies inside {g >= k}.
    """
    _same_region(f, g)
    if not f.is_finite():
        return False
    step = f.region.step
    for k in range(1, int(f.top()) + 1):
        lower = level_set(f, k)
        if lower.is_empty():
            break
        neighborhood = lower.distance_from() <= step
        if (neighborhood & ~(g.values >= k)).any():
            return False
    return True


def restrict(f: LscFn, V: AnySet) -> LscFn:
    """f on V, zero outside."""
    if not f.region.matches(V.region):
        raise RegionMismatch("Restriction set lives on a different region")
    return LscFn(f.region, np.where(V.mask, f.values, 0.0))


def supremum(chain: Sequence[LscFn]) -> LscFn:
    """Pointwise supremum of an increasing chain."""
    chain = list(chain)
    if not chain:
        raise PreconditionError("Supremum of an empty chain")
    for a, b in zip(chain, chain[1:]):
        if not leq(a, b):
            raise PreconditionError("Supremum is only taken along increasing chains")
    stacked = np.vstack([f.values for f in chain])
    return LscFn(chain[0].region, stacked.max(axis=0))


def levels(f: LscFn) -> Iterable[SampleSet]:
    """The level sets {f >= k}, k = 1 .. max f, for finite f."""
    if not f.is_finite():
        raise PreconditionError("Level decomposition needs a finite function")
    for k in range(1, int(f.top()) + 1):
        yield level_set(f, k)
