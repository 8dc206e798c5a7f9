"""Seeded random instances: regions, rank measures, homomorphisms, normal matrices."""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import DEFAULT_SEED, PreconditionError
from matrix import NormalMatrix, random_normal
from morphism import FinDimHom, RankMeasure
from region import Region

logger = logging.getLogger(__name__)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream per (seed, trial); the same pair always gives the same draws."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def composition(total: int, parts: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random split of total into `parts` positive integers."""
    if not 1 <= parts <= total:
        raise PreconditionError(f"Cannot split {total} into {parts} positive parts")
    cuts = np.sort(rng.choice(np.arange(1, total), size=parts - 1, replace=False))
    return np.diff(np.concatenate([[0], cuts, [total]])).astype(int)


class InstanceGenerator:
    """
    Draws instances on a fixed region.

    Atoms and eigenvalues sit at sample points moved by less than h/2, so
    they are always covered by the region but rarely sit on the grid.
    """

    def __init__(self, region: Region, n_range: Tuple[int, int] = (1, 8),
                 atom_range: Tuple[int, int] = (1, 4), seed: int = DEFAULT_SEED):
        if not 1 <= n_range[0] <= n_range[1]:
            raise PreconditionError(f"Bad dimension range {n_range}")
        if not 1 <= atom_range[0] <= atom_range[1]:
            raise PreconditionError(f"Bad atom range {atom_range}")
        self.region = region
        self.n_range = tuple(n_range)
        self.atom_range = tuple(atom_range)
        self.seed = seed

    def rng(self, trial: int) -> np.random.Generator:
        return trial_rng(self.seed, trial)

    def points(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """`count` distinct jittered sample points."""
        if count > len(self.region):
            raise PreconditionError(f"Region has only {len(self.region)} points, asked for {count}")
        base = self.region.points[rng.choice(len(self.region), size=count, replace=False)]
        radius = 0.45 * self.region.h * np.sqrt(rng.uniform(0.0, 1.0, count))
        angle = rng.uniform(0.0, 2 * np.pi, count)
        return base + radius * np.exp(1j * angle)

    def dimension(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.n_range[0], self.n_range[1] + 1))

    def rank_measure(self, rng: np.random.Generator, n: Optional[int] = None,
                     mass: Optional[int] = None, atoms: Optional[int] = None) -> RankMeasure:
        """Random rank measure; unital (mass = n) unless a smaller mass is asked for."""
        n = self.dimension(rng) if n is None else n
        mass = n if mass is None else mass
        if mass == 0:
            return RankMeasure(self.region, [], n)
        if atoms is None:
            atoms = int(rng.integers(self.atom_range[0], self.atom_range[1] + 1))
        atoms = min(atoms, mass, len(self.region))
        locations = self.points(atoms, rng)
        weights = composition(mass, atoms, rng)
        return RankMeasure(self.region, zip(locations, weights), n)

    def multiscale_measure(self, rng: np.random.Generator, n: Optional[int] = None,
                           atoms: Optional[int] = None, min_gap: Optional[float] = None) -> RankMeasure:
        """
        Unital rank measure whose atoms form chains with halving gaps.

        Each chain starts at a random point with a gap of 30-45% of the
        diameter and halves it per atom until it would drop below min_gap
        (default 2h). Every pair of atoms stays at least min_gap apart.
        """
        n = self.dimension(rng) if n is None else n
        if atoms is None:
            atoms = int(rng.integers(self.atom_range[0], self.atom_range[1] + 1))
        atoms = min(atoms, n)
        min_gap = 2 * self.region.h if min_gap is None else min_gap
        placed: List[complex] = []
        gap, misses = 0.0, 0
        for _ in range(64 * atoms):
            if len(placed) == atoms:
                break
            if gap < min_gap or misses >= 8:
                z = complex(self.points(1, rng)[0])
                after = 0.5 * self.region.diameter * rng.uniform(0.6, 0.9)
            else:
                # head towards a random grid point at least one gap away
                offsets = self.region.points - placed[-1]
                reach = np.flatnonzero(np.abs(offsets) >= gap)
                if not reach.size:
                    misses += 1
                    continue
                toward = offsets[rng.choice(reach)]
                z = placed[-1] + gap * toward / abs(toward)
                after = gap / 2
            far = not placed or np.abs(np.asarray(placed) - z).min() >= min_gap
            if far and self.region.covers([z])[0]:
                placed.append(z)
                gap, misses = after, 0
            else:
                misses += 1
        if not placed:
            raise PreconditionError(f"Could not place atoms {min_gap:g} apart")
        weights = composition(n, len(placed), rng)
        return RankMeasure(self.region, zip(placed, weights), n)

    def homomorphism(self, rng: np.random.Generator, n: Optional[int] = None) -> FinDimHom:
        alpha = self.rank_measure(rng, n)
        return FinDimHom(self.region, [(a.location, a.weight) for a in alpha.atoms], alpha.target_dim)

    def spectrum(self, rng: np.random.Generator, n: int) -> np.ndarray:
        alpha = self.rank_measure(rng, n)
        return np.repeat(alpha.locations, alpha.weights)

    def normal_matrix(self, rng: np.random.Generator, n: Optional[int] = None,
                      spectrum: Optional[Sequence[complex]] = None) -> NormalMatrix:
        """Haar-random unitary conjugate of a diagonal with a region-covered spectrum."""
        if spectrum is None:
            spectrum = self.spectrum(rng, self.dimension(rng) if n is None else n)
        return random_normal(spectrum, rng)

    def instance(self, trial: int) -> dict:
        """A JSON-ready bundle (morphism, homomorphism, matrix) for one trial."""
        rng = self.rng(trial)
        alpha = self.rank_measure(rng)
        return {"id": trial,
                "morphism": alpha.to_json(),
                "homomorphism": self.homomorphism(rng).to_json(),
                "matrix": self.normal_matrix(rng).to_json()}
