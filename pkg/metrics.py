"""
The metrics d_Cu, d_W and the d_U bracket.

d_Cu between rank measures of equal mass is the bottleneck matching
distance of the weight-expanded atom multisets. Hall's theorem turns the
one-sided domination alpha(1_O) <= beta(1_{O_r}) over all open O into the
existence of a perfect matching using only pairs at distance <= r.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from config import (CLUSTER_REL_TOL, MATCH_TOL, TRIANGLE_TOL, WITNESS_TOL, CertificateError,
                    PreconditionError, RegionMismatch)
from matrix import NormalMatrix, ScalarFunction, conjugate, functional_calculus, hausdorff, opnorm
from morphism import FinDimHom, RankMeasure, cu_of_hom, cu_of_normal
from region import Ball, OpenSet, Region, pairwise

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchingResult:
    """
    value: bottleneck distance (inf when masses differ)
    pairing: (atom index in alpha, atom index in beta), one pair per unit of mass
    certificate: thresholds examined by the binary search, in order
    """
    value: float
    pairing: Tuple[Tuple[int, int], ...] = ()
    certificate: Tuple[float, ...] = ()

    def to_json(self) -> dict:
        return {"value": "inf" if math.isinf(self.value) else self.value,
                "pairing": [list(p) for p in self.pairing]}


def _perfect_matching(dist: np.ndarray, threshold: float) -> Optional[np.ndarray]:
    """Perfect matching using edges with dist <= threshold, or None."""
    graph = csr_matrix((dist <= threshold + MATCH_TOL).astype(np.int8))
    match = maximum_bipartite_matching(graph, perm_type='column')
    if (match < 0).any():
        return None
    return match


def bottleneck(a: np.ndarray, b: np.ndarray) -> Tuple[float, np.ndarray, Tuple[float, ...]]:
    """
    Bottleneck matching of two equal-size point multisets.

    Binary search over the sorted candidate distances with a bipartite
    perfect-matching feasibility test. Returns (value, match, thresholds)
    where match[i] is the index in b paired with a[i].
    """
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    if a.size != b.size:
        raise PreconditionError(f"Bottleneck matching needs equal sizes, got {a.size} and {b.size}")
    if a.size == 0:
        return 0.0, np.zeros(0, dtype=int), ()
    dist = pairwise(a, b)
    candidates = np.unique(dist)
    lo, hi = 0, candidates.size - 1
    examined = []
    best = _perfect_matching(dist, candidates[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        examined.append(float(candidates[mid]))
        match = _perfect_matching(dist, candidates[mid])
        if match is None:
            lo = mid + 1
        else:
            hi = mid
            best = match
    if best is None or lo != hi:
        raise CertificateError("Bottleneck search lost its feasible matching")
    best = _perfect_matching(dist, candidates[lo])
    value = float(dist[np.arange(a.size), best].max())
    return value, best, tuple(examined)


def _check_comparable(alpha: RankMeasure, beta: RankMeasure) -> None:
    if not alpha.region.matches(beta.region):
        raise RegionMismatch("Rank measures live on different regions")
    if alpha.target_dim != beta.target_dim:
        raise RegionMismatch(f"Target dimensions differ: {alpha.target_dim} vs {beta.target_dim}")


def d_cu(alpha: RankMeasure, beta: RankMeasure) -> MatchingResult:
    """Cuntz distance between two rank measures."""
    _check_comparable(alpha, beta)
    if alpha.mass != beta.mass:
        # O = Omega already forces equal masses
        return MatchingResult(math.inf)
    a, owner_a = alpha.expanded()
    b, owner_b = beta.expanded()
    value, match, examined = bottleneck(a, b)
    pairing = tuple((int(owner_a[i]), int(owner_b[j])) for i, j in enumerate(match))
    return MatchingResult(value, pairing, examined)


def ball_family(alpha: RankMeasure, beta: RankMeasure, grid_balls: bool = True) -> List[OpenSet]:
    """
    Open sets to test the domination conditions on.

    Unions of tiny balls around every subset of atom locations (of either
    measure), plus, optionally, every grid-centered ball whose radius is a
    grid-to-atom distance. Intended for at most 8 atoms per side.
    """
    region = alpha.region
    locations = np.concatenate([alpha.locations if alpha.atoms else np.zeros(0, dtype=complex),
                                beta.locations if beta.atoms else np.zeros(0, dtype=complex)])
    if locations.size == 0:
        return []
    if locations.size > 16:
        raise PreconditionError("Open-set family enumeration is limited to 8 atoms per measure")
    d = pairwise(locations, locations)
    positive = d[d > MATCH_TOL]
    eps = 0.25 * min(region.h, positive.min() if positive.size else region.h)
    family = []
    for mask in range(1, 2 ** locations.size):
        chosen = [locations[i] for i in range(locations.size) if mask >> i & 1]
        family.append(OpenSet(region, tuple(Ball(z, eps) for z in chosen)))
    if grid_balls:
        for c in region.points:
            for r in np.unique(np.abs(locations - c)):
                if r > MATCH_TOL:
                    family.append(OpenSet(region, (Ball(c, float(r)),)))
    return family


def d_cu_bruteforce(alpha: RankMeasure, beta: RankMeasure, family: Sequence[OpenSet]) -> float:
    """
    Smallest candidate r with alpha(1_O) <= beta(1_{O_r}) and
    beta(1_O) <= alpha(1_{O_r}) for every O in the family.

    Candidates are 0 and the pairwise distances between the atoms of the
    two measures. Domination is monotone in r, so the search is binary.
    """
    _check_comparable(alpha, beta)
    if alpha.mass != beta.mass:
        return math.inf
    if alpha.mass == 0:
        return 0.0
    if any(O.holes for O in family):
        raise PreconditionError("Brute-force oracle works on plain ball unions only")
    family = [O for O in family if O.balls]
    # signed gap of each atom to each set: inside iff gap < 0, inside O_r iff gap < r
    gap_a = np.array([O.gaps(alpha.locations) for O in family]) if family else np.zeros((0, 1))
    gap_b = np.array([O.gaps(beta.locations) for O in family]) if family else np.zeros((0, 1))
    wa, wb = alpha.weights, beta.weights

    def dominated(r: float) -> bool:
        a_in = (wa * (gap_a < 0)).sum(axis=1)
        b_in = (wb * (gap_b < 0)).sum(axis=1)
        a_thick = (wa * (gap_a < r)).sum(axis=1)
        b_thick = (wb * (gap_b < r)).sum(axis=1)
        return bool((a_in <= b_thick).all() and (b_in <= a_thick).all())

    candidates = np.unique(np.concatenate([[0.0], pairwise(alpha.locations, beta.locations).ravel()]))
    lo, hi = 0, candidates.size - 1
    if not dominated(candidates[hi]):
        # never happens for equal masses: the largest cross distance matches everything
        return math.inf
    while lo < hi:
        mid = (lo + hi) // 2
        if dominated(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def d_w(x: NormalMatrix, y: NormalMatrix, region: Region) -> float:
    """Cuntz distance between normal matrices via their spectral measures."""
    if x.n != y.n:
        raise RegionMismatch(f"Matrix dimensions differ: {x.n} vs {y.n}")
    return d_cu(cu_of_normal(x, region), cu_of_normal(y, region)).value


def d_w_hom(phi: FinDimHom, psi: FinDimHom) -> float:
    """d_W(phi, psi) = d_Cu(Cu(phi), Cu(psi))."""
    return d_cu(cu_of_hom(phi), cu_of_hom(psi)).value


@dataclass(frozen=True)
class UnitaryBracket:
    lower: float
    upper: float
    witness: np.ndarray = field(repr=False)
    achieved: float = 0.0

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "achieved": self.achieved,
                "witness": {"re": self.witness.real.tolist(), "im": self.witness.imag.tolist()}}


def d_u_bracket(x: NormalMatrix, y: NormalMatrix) -> UnitaryBracket:
    """
    Bracket the unitary-orbit distance inf_u ||u x u* - y||.

    upper: bottleneck matching of the eigenvalues, realized by the witness
    u = V_y P U_x* that sends each eigenvector of x to the eigenvector of
    its matched eigenvalue of y. lower: Hausdorff distance of the spectra,
    since a normal perturbation moves no eigenvalue farther than its norm.
    """
    if x.n != y.n:
        raise RegionMismatch(f"Matrix dimensions differ: {x.n} vs {y.n}")
    upper, match, _ = bottleneck(x.eigenvalues, y.eigenvalues)
    lower = hausdorff(x.eigenvalues, y.eigenvalues)
    witness = y.basis[:, match] @ x.basis.conj().T
    achieved = opnorm(witness @ x.entries @ witness.conj().T - y.entries)
    if achieved > upper + WITNESS_TOL * max(1.0, x.norm, y.norm):
        raise CertificateError(f"Witness unitary reaches {achieved:.3e}, above the matching value {upper:.3e}")
    return UnitaryBracket(lower, upper, witness, achieved)


def d_u_functions(x: NormalMatrix, y: NormalMatrix, functions: Sequence[ScalarFunction]) -> float:
    """
    Upper bound for the homomorphism distance d_U restricted to a finite
    function set: max_f ||u f(x) u* - f(y)|| for the matching witness u.
    """
    u = d_u_bracket(x, y).witness
    return max(opnorm(conjugate(functional_calculus(x, f), u).entries - functional_calculus(y, f).entries)
               for f in functions)


def unitary_equivalence(x: NormalMatrix, y: NormalMatrix, region: Region) -> np.ndarray:
    """
    A unitary u with u x u* = y whenever Cu(x) = Cu(y).

    Raises PreconditionError if the spectral measures differ.
    """
    gap = d_w(x, y, region)
    if gap > CLUSTER_REL_TOL * max(1.0, x.norm, y.norm):
        raise PreconditionError(f"Spectral measures differ (d_W = {gap:.3e}); no unitary equivalence")
    bracket = d_u_bracket(x, y)
    if bracket.achieved > WITNESS_TOL * max(1.0, x.norm):
        raise CertificateError(f"Equivalence witness misses by {bracket.achieved:.3e}")
    return bracket.witness


@dataclass(frozen=True)
class MarriageResult:
    lhs: float
    rhs: float
    permutation: Tuple[int, ...]


def sum_measures(measures: Sequence[RankMeasure]) -> RankMeasure:
    total = measures[0]
    for m in measures[1:]:
        total = total + m
    return total


def marriage_check(alphas: Sequence[RankMeasure], betas: Sequence[RankMeasure]) -> MarriageResult:
    """
    d(sum alpha_i, sum beta_i) <= min over permutations of max_i d(alpha_i, beta_sigma(i)).

    Terms may have different target dimensions. Cross pairs are compared
    inside the common total dimension, so pairs of different mass sit at
    distance inf.
    """
    if len(alphas) != len(betas):
        raise PreconditionError(f"Lists differ in length: {len(alphas)} vs {len(betas)}")
    k = len(alphas)
    if not 1 <= k <= 8:
        raise PreconditionError(f"Permutation enumeration supports 1..8 terms, got {k}")
    lhs = d_cu(sum_measures(alphas), sum_measures(betas)).value
    total = sum(a.target_dim for a in alphas)
    table = np.array([[d_cu(a.with_target(total), b.with_target(total)).value for b in betas]
                      for a in alphas])
    rhs, best = math.inf, tuple(range(k))
    for perm in itertools.permutations(range(k)):
        worst = max(table[i, perm[i]] for i in range(k))
        if worst < rhs:
            rhs, best = worst, perm
    if lhs > rhs + TRIANGLE_TOL:
        raise CertificateError(f"Marriage inequality fails: {lhs:.6g} > {rhs:.6g}")
    return MarriageResult(lhs, rhs, best)


def triangle_violation(alpha: RankMeasure, beta: RankMeasure, gamma: RankMeasure) -> float:
    """d(alpha, beta) - d(alpha, gamma) - d(beta, gamma); positive means a violation."""
    ab = d_cu(alpha, beta).value
    ag = d_cu(alpha, gamma).value
    bg = d_cu(beta, gamma).value
    if math.isinf(ag) or math.isinf(bg):
        return -math.inf
    return ab - ag - bg
