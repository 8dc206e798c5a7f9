"""
Cu-morphisms from Lsc(Omega, N-bar) into Cu(M_n), stored as rank measures.

A rank measure is a finite multiset of weighted atoms; evaluating it on
the indicator of an open set counts the weight inside the set.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from config import CLUSTER_REL_TOL, MATCH_TOL, DomainError, PreconditionError, RegionMismatch
from lsc import LscFn, levels
from matrix import NormalMatrix
from region import AnySet, Region, ball
from unionfind import UnionFind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Atom:
    location: complex
    weight: int


def _canonical(atoms: Iterable[Tuple[complex, int]]) -> Tuple[Atom, ...]:
    """Merge atoms at coincident points and sort by (re, im)."""
    merged: List[List] = []
    for z, m in atoms:
        z = complex(z)
        m = int(m)
        if m == 0:
            continue
        for entry in merged:
            if abs(entry[0] - z) <= MATCH_TOL:
                entry[1] += m
                break
        else:
            merged.append([z, m])
    merged.sort(key=lambda e: (e[0].real, e[0].imag))
    return tuple(Atom(z, m) for z, m in merged)


class RankMeasure:
    """
    Canonical form of a Cu-morphism into Cu(M_n).

    Args:
        region: the region the atoms live on
        atoms: (location, weight) pairs, weights positive integers
        target_dim: n, the size of the matrix algebra
    """

    def __init__(self, region: Region, atoms: Iterable[Tuple[complex, int]], target_dim: int):
        atoms = list(atoms)
        for z, m in atoms:
            if int(m) != m or m < 0:
                raise PreconditionError(f"Atom weights must be nonnegative integers, got {m}")
        if int(target_dim) != target_dim or target_dim < 0:
            raise PreconditionError(f"Target dimension must be a nonnegative integer, got {target_dim}")
        self.region = region
        self.target_dim = int(target_dim)
        self.atoms = _canonical(atoms)
        if self.mass > self.target_dim:
            raise PreconditionError(f"Total mass {self.mass} exceeds target dimension {self.target_dim}")
        if self.atoms:
            region.require_covered(self.locations, "atom")

    @cached_property
    def locations(self) -> np.ndarray:
        return np.array([a.location for a in self.atoms], dtype=complex)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms], dtype=int)

    @property
    def mass(self) -> int:
        return int(sum(a.weight for a in self.atoms))

    def support(self) -> np.ndarray:
        return self.locations

    def expanded(self) -> Tuple[np.ndarray, np.ndarray]:
        """Weight-expanded locations, and the atom index each copy came from."""
        owner = np.repeat(np.arange(len(self.atoms)), self.weights) if self.atoms else np.zeros(0, dtype=int)
        return self.locations[owner] if self.atoms else np.zeros(0, dtype=complex), owner

    def on_region(self, region: Region) -> 'RankMeasure':
        """Same atoms viewed on another region (typically a refinement)."""
        return RankMeasure(region, ((a.location, a.weight) for a in self.atoms), self.target_dim)

    def restrict(self, V: AnySet) -> 'RankMeasure':
        """alpha|_V: h -> alpha(h restricted to V); keeps only the atoms in V."""
        if not self.atoms:
            return self
        inside = V.contains(self.locations)
        kept = [(a.location, a.weight) for a, keep in zip(self.atoms, inside) if keep]
        return RankMeasure(self.region, kept, self.target_dim)

    def with_target(self, target_dim: int) -> 'RankMeasure':
        return RankMeasure(self.region, ((a.location, a.weight) for a in self.atoms), target_dim)

    def __add__(self, other: 'RankMeasure') -> 'RankMeasure':
        """Orthogonal sum: atoms pooled, target dimensions added."""
        if not self.region.matches(other.region):
            raise RegionMismatch("Cannot add rank measures on different regions")
        pairs = [(a.location, a.weight) for a in self.atoms + other.atoms]
        return RankMeasure(self.region, pairs, self.target_dim + other.target_dim)

    def same_atoms(self, other: 'RankMeasure', tol: float = MATCH_TOL) -> bool:
        if len(self.atoms) != len(other.atoms):
            return False
        return all(a.weight == b.weight and abs(a.location - b.location) <= tol
                   for a, b in zip(self.atoms, other.atoms))

    def evaluator(self) -> 'RankEvaluator':
        return RankEvaluator(self)

    def to_json(self) -> dict:
        return {"n": self.target_dim,
                "atoms": [{"z": [a.location.real, a.location.imag], "m": a.weight} for a in self.atoms]}

    @classmethod
    def from_json(cls, data: dict, region: Region) -> 'RankMeasure':
        atoms = [(complex(*atom["z"]), int(atom["m"])) for atom in data.get("atoms", [])]
        return cls(region, atoms, int(data["n"]))

    def __repr__(self) -> str:
        return f"RankMeasure(n={self.target_dim}, mass={self.mass}, atoms={len(self.atoms)})"


class Functional:
    """The normalized trace of M_n read on ranks: m -> m/n."""

    def __init__(self, n: int):
        if n <= 0:
            raise PreconditionError(f"Normalized trace needs n >= 1, got {n}")
        self.n = n

    def __call__(self, rank: float) -> float:
        return math.inf if math.isinf(rank) else rank / self.n


def eval_indicator(alpha: RankMeasure, O: AnySet) -> int:
    """alpha(1_O): total weight of the atoms inside O."""
    if not alpha.atoms:
        return 0
    return int(alpha.weights[O.contains(alpha.locations)].sum())


def eval_lsc(alpha: RankMeasure, f: LscFn) -> float:
    """alpha(f) = sum of weight * f(nearest grid point of the atom)."""
    if not alpha.region.matches(f.region):
        raise RegionMismatch("Function and measure live on different regions")
    if not alpha.atoms:
        return 0
    idx, _ = f.region.nearest(alpha.locations)
    values = f.values[idx]
    if np.isinf(values).any():
        return math.inf
    return int((alpha.weights * values).sum())


def eval_lsc_by_levels(alpha: RankMeasure, f: LscFn) -> float:
    """alpha(f) = sum_k alpha(1_{f >= k}), with atoms read at their nearest grid point."""
    if not f.is_finite():
        return eval_lsc(alpha, f)
    if not alpha.atoms:
        return 0
    idx, _ = f.region.nearest(alpha.locations)
    total = 0
    for level in levels(f):
        total += int(alpha.weights[level.mask[idx]].sum())
    return total


def measure(alpha: RankMeasure, O: AnySet) -> float:
    """Normalized measure alpha(1_O)/n."""
    return Functional(alpha.target_dim)(eval_indicator(alpha, O))


def min_ball_mass(alpha: RankMeasure, centers: Sequence[complex], radius: float) -> float:
    """sigma = min over centers of the normalized mass of B(center, radius)."""
    masses = [measure(alpha, ball(alpha.region, c, radius)) for c in centers]
    if not masses:
        raise PreconditionError("min_ball_mass needs at least one center")
    for c, m in zip(centers, masses):
        if m <= 0:
            raise PreconditionError(f"Ball B({c}, {radius}) carries no mass")
    return float(min(masses))


class RankEvaluator:
    """
    Set-to-rank oracle for a rank measure.

    This is the only view of a morphism the lifting algorithms get: they
    ask for ranks of sets, never for atoms.
    """

    def __init__(self, alpha: RankMeasure):
        self._alpha = alpha

    @property
    def region(self) -> Region:
        return self._alpha.region

    @property
    def mass(self) -> int:
        return self._alpha.mass

    @property
    def target_dim(self) -> int:
        return self._alpha.target_dim

    def __call__(self, O: AnySet) -> int:
        return eval_indicator(self._alpha, O)

    def measure(self, O: AnySet) -> float:
        return measure(self._alpha, O)

    def min_ball_mass(self, centers: Sequence[complex], radius: float) -> float:
        return min_ball_mass(self._alpha, centers, radius)

    def jump_radii(self, x: complex) -> np.ndarray:
        """Sorted radii where r -> alpha(1_B(x, r)) jumps."""
        if not self._alpha.atoms:
            return np.zeros(0)
        return np.unique(np.abs(self._alpha.locations - x))

    def point_masses(self) -> np.ndarray:
        """alpha of each singleton sample point of the region."""
        out = np.zeros(len(self.region), dtype=int)
        if self._alpha.atoms:
            idx = self.region.index_of(self._alpha.locations)
            if (idx < 0).any():
                raise DomainError("Point masses need every atom to be a sample point")
            np.add.at(out, idx, self._alpha.weights)
        return out

    def restrict(self, V: AnySet) -> 'RankEvaluator':
        return RankEvaluator(self._alpha.restrict(V))

    def on_region(self, region: Region) -> 'RankEvaluator':
        return RankEvaluator(self._alpha.on_region(region))

    def support_region(self) -> Region:
        """The region refined by the support of the measure."""
        return self.region.refine(self._alpha.support())


class FinDimHom:
    """
    A unital homomorphism C(Omega) -> M_n with finite dimensional range:
    phi(f) = sum f(z_i) p_i, stored as (z_i, rank p_i) pairs.
    """

    def __init__(self, region: Region, pairs: Iterable[Tuple[complex, int]], n: int):
        pairs = [(complex(z), int(r)) for z, r in pairs]
        if any(r <= 0 for _, r in pairs):
            raise PreconditionError("Every projection in a homomorphism needs positive rank")
        if sum(r for _, r in pairs) != n:
            raise PreconditionError(f"Ranks sum to {sum(r for _, r in pairs)}, expected n={n}")
        if pairs:
            region.require_covered([z for z, _ in pairs], "homomorphism point")
        self.region = region
        self.pairs = tuple(pairs)
        self.n = int(n)

    def __add__(self, other: 'FinDimHom') -> 'FinDimHom':
        """Orthogonal sum phi (+) psi into M_(n+m)."""
        if not self.region.matches(other.region):
            raise RegionMismatch("Cannot add homomorphisms on different regions")
        return FinDimHom(self.region, self.pairs + other.pairs, self.n + other.n)

    def spectrum(self) -> np.ndarray:
        return np.concatenate([np.full(r, z, dtype=complex) for z, r in self.pairs]) \
            if self.pairs else np.zeros(0, dtype=complex)

    def realize(self) -> NormalMatrix:
        """phi(id) as a diagonal normal matrix."""
        return NormalMatrix.from_diagonal(self.spectrum())

    def to_json(self) -> dict:
        return {"n": self.n, "pairs": [{"z": [z.real, z.imag], "m": r} for z, r in self.pairs]}

    @classmethod
    def from_json(cls, data: dict, region: Region) -> 'FinDimHom':
        return cls(region, [(complex(*p["z"]), int(p["m"])) for p in data["pairs"]], int(data["n"]))

    def __repr__(self) -> str:
        return f"FinDimHom(n={self.n}, points={len(self.pairs)})"


def cu_of_hom(phi: FinDimHom) -> RankMeasure:
    """Cu(phi): atoms at the points of phi, weighted by the ranks."""
    return RankMeasure(phi.region, phi.pairs, phi.n)


def cluster_eigenvalues(values: np.ndarray, tol: float) -> List[Tuple[complex, int]]:
    """Group eigenvalues closer than tol (single linkage); each group becomes its mean."""
    values = np.asarray(values, dtype=complex)
    uf = UnionFind(values.size)
    for i in range(values.size):
        close = np.flatnonzero(np.abs(values[i + 1:] - values[i]) <= tol)
        for j in close:
            uf.union(i, i + 1 + int(j))
    return [(complex(values[g].mean()), len(g)) for g in uf.groups()]


def cu_of_normal(x: NormalMatrix, region: Region) -> RankMeasure:
    """Cu of phi_X(f) = f(x): the spectral multiset of x as atoms."""
    region.require_covered(x.eigenvalues, "eigenvalue")
    tol = CLUSTER_REL_TOL * x.norm
    return RankMeasure(region, cluster_eigenvalues(x.eigenvalues, tol), x.n)
