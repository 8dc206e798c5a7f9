"""
Approximate and exact lifting of rank measures to homomorphisms.

The algorithms here only talk to a morphism through RankEvaluator: they
ask for the rank of a set and never read atoms. Everything runs on the
finite compact space obtained by adding the support of the measure to
the sample grid, where thickenings, diameters and set distances are exact.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from config import (MATCH_TOL, MAX_EXACT_LIFT_STEPS, WITNESS_TOL, CertificateError, ConvergenceError,
                    PreconditionError)
from matrix import NormalMatrix, conjugate
from metrics import d_cu, d_u_bracket
from morphism import FinDimHom, RankEvaluator, RankMeasure, cu_of_hom, cu_of_normal
from region import AnySet, Region, SampleSet, annulus, ball, farthest_point_net
from unionfind import UnionFind

logger = logging.getLogger(__name__)

Morphism = Union[RankMeasure, RankEvaluator]


def _evaluator(alpha: Morphism) -> RankEvaluator:
    return alpha if isinstance(alpha, RankEvaluator) else alpha.evaluator()


def _on_support(alpha: Morphism) -> RankEvaluator:
    ev = _evaluator(alpha)
    return ev.on_region(ev.support_region())


def choose_annulus(alpha: Morphism, x: complex, r: float, sigma: float) -> Tuple[float, float]:
    """
    Radius s in (r/2, r) and width eps whose annulus carries at most sigma.

    The rank of B(x, t) only jumps at finitely many radii, so s is taken as
    the midpoint of the widest jump-free interval of (r/2, r) (first one on
    ties) and eps as a quarter of its width.
    """
    if not r > 0:
        raise PreconditionError(f"Annulus radius bound must be positive, got {r}")
    if not sigma > 0:
        raise PreconditionError(f"Annulus budget must be positive, got {sigma}")
    ev = _evaluator(alpha)
    radii = ev.jump_radii(x)
    inside = radii[(radii > r / 2) & (radii < r)]
    knots = np.concatenate([[r / 2], inside, [r]])
    k = int(np.argmax(np.diff(knots)))
    lo, hi = float(knots[k]), float(knots[k + 1])
    s, eps = (lo + hi) / 2, (hi - lo) / 4
    mass = ev.measure(annulus(ev.region, x, s, eps))
    if mass > sigma:
        raise CertificateError(f"Annulus around {x} at s={s:.4g} carries {mass:.4g} > {sigma:.4g}")
    return s, eps


@dataclass(frozen=True)
class CoverCertificates:
    covered: bool
    small: bool
    separated: bool
    residual_dominated: bool

    @property
    def passed(self) -> bool:
        return self.covered and self.small and self.separated and self.residual_dominated

    def failures(self) -> List[str]:
        return [name for name, ok in (("covered", self.covered), ("small", self.small),
                                      ("separated", self.separated),
                                      ("residual_dominated", self.residual_dominated)) if not ok]

    def to_json(self) -> dict:
        return {"covered": self.covered, "small": self.small, "separated": self.separated,
                "residual_dominated": self.residual_dominated}


@dataclass(frozen=True)
class DeltaCover:
    """
    An almost delta-cover: disjoint small sets whose union U comes within
    delta of every point of the domain, and whose complement carries less
    rank than any delta-neighborhood of a cover set inside U.
    """
    region: Region
    domain: SampleSet
    sets: Tuple[SampleSet, ...]
    delta: float
    centers: Tuple[complex, ...] = ()
    annuli: Tuple[Tuple[float, float], ...] = ()
    certificates: Optional[CoverCertificates] = field(default=None, compare=False)

    @property
    def union(self) -> SampleSet:
        mask = np.zeros(len(self.region), dtype=bool)
        for O in self.sets:
            mask |= O.mask
        return SampleSet(self.region, mask)

    def __len__(self) -> int:
        return len(self.sets)

    def verify(self, alpha: Morphism) -> CoverCertificates:
        return certify_cover(alpha, self)

    def to_json(self) -> dict:
        data = {"delta": self.delta,
                "sets": [[[float(z.real), float(z.imag)] for z in O.points] for O in self.sets],
                "annuli": [{"c": [float(c.real), float(c.imag)], "s": s, "eps": eps}
                           for c, (s, eps) in zip(self.centers, self.annuli)]}
        if self.certificates is not None:
            data["certificates"] = self.certificates.to_json()
        return data


def certify_cover(alpha: Morphism, cover: DeltaCover) -> CoverCertificates:
    """Evaluate the four cover conditions directly."""
    ev = _evaluator(alpha)
    if not ev.region.matches(cover.region):
        ev = ev.on_region(cover.region)
    delta = cover.delta
    U = cover.union

    gap = U.distance_from()[cover.domain.mask]
    covered = bool((gap <= delta + MATCH_TOL).all())

    small = all(O.diameter() <= delta + MATCH_TOL for O in cover.sets)

    separated = True
    for i, O in enumerate(cover.sets):
        for P in cover.sets[i + 1:]:
            if (O.mask & P.mask).any() or not O.distance_to(P) > 0:
                separated = False

    residual = ev(U.complement())
    residual_dominated = all(residual <= ev(O.thicken(delta) & U) for O in cover.sets)

    certificates = CoverCertificates(covered, small, separated, residual_dominated)
    if not certificates.passed:
        logger.debug(f"Cover with delta={delta:g} fails {certificates.failures()}")
    return certificates


def _carve(ev: RankEvaluator, delta: float, center_idx: Sequence[int]) -> DeltaCover:
    """Cover construction on ev.region with the given net centers."""
    region = ev.region
    pts = region.points
    participating = [int(c) for c in center_idx if ev(ball(region, pts[c], delta / 2)) > 0]
    if not participating:
        raise PreconditionError(f"No ball of radius {delta / 2:g} around a net center carries rank")
    m = len(participating)
    dist = region.distances[:, participating]
    domain = (dist < delta / 4).any(axis=1)

    sigma = ev.min_ball_mass(pts[participating], delta / 2)
    budget = sigma / (2 * m + 1)
    annuli = [choose_annulus(ev, pts[c], delta / 2, budget) for c in participating]
    radii = np.array([s for s, _ in annuli])

    # thickened annuli of half the smallest width, kept clear of sample points off the spheres
    clearance = np.abs(dist - radii)
    eta = 0.5 * min(eps for _, eps in annuli)
    positive = clearance[clearance > MATCH_TOL]
    if positive.size:
        eta = min(eta, 0.5 * float(positive.min()))
    in_band = (clearance <= eta).any(axis=1)
    remaining = domain & ~in_band

    owner = np.full(len(region), -1)
    for i in range(m):
        grab = remaining & (owner < 0) & (dist[:, i] < radii[i])
        owner[grab] = i
    sets = tuple(SampleSet(region, owner == i) for i in range(m) if (owner == i).any())

    cover = DeltaCover(region, SampleSet(region, domain), sets, delta,
                       tuple(complex(pts[c]) for c in participating), tuple(annuli))
    certificates = certify_cover(ev, cover)
    if not certificates.passed:
        raise CertificateError(f"Cover certificates {certificates.failures()} failed for delta={delta:g}")
    logger.debug(f"Cover: {m} centers, {len(sets)} sets, sigma={sigma:.4g}, eta={eta:.3g}")
    return DeltaCover(cover.region, cover.domain, cover.sets, delta, cover.centers, cover.annuli,
                      certificates)


def build_cover(alpha: Morphism, delta: float) -> DeltaCover:
    """
    Almost delta-cover with respect to alpha.

    Net centers come from a farthest-point delta/4-net; only centers whose
    delta/2-ball carries rank take part, and the cover domain is the union
    of their delta/4-balls.
    """
    if not delta > 0:
        raise PreconditionError(f"delta must be positive, got {delta}")
    ev = _on_support(alpha)
    centers = farthest_point_net(ev.region, delta / 4)
    return _carve(ev, delta, centers)


def components(balls: Sequence[AnySet], alpha: Optional[Morphism] = None) -> Tuple[List[List[int]], List[int]]:
    """
    Group balls into almost connected components.

    Two balls join when they share a sample point; grouping is transitive.
    With alpha given, balls of rank zero are set aside as the null group
    and the rest are grouped. Returns (groups, null).
    """
    if alpha is None:
        null, live = [], list(range(len(balls)))
    else:
        ev = _evaluator(alpha)
        ranks = [ev(B) for B in balls]
        null = [i for i, r in enumerate(ranks) if r == 0]
        live = [i for i, r in enumerate(ranks) if r > 0]
    uf = UnionFind(len(live))
    for a in range(len(live)):
        for b in range(a + 1, len(live)):
            if (balls[live[a]].mask & balls[live[b]].mask).any():
                uf.union(a, b)
    return [[live[i] for i in group] for group in uf.groups()], null


@dataclass(frozen=True)
class ComponentReport:
    mass: int
    rho: float
    residual: int
    cover: DeltaCover = field(repr=False)
    ranks: Tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {"mass": self.mass, "rho": self.rho, "sets": len(self.cover), "ranks": list(self.ranks),
                "residual": self.residual}


@dataclass(frozen=True)
class LiftResult:
    phi: FinDimHom
    bound: float
    delta: float
    components: Tuple[ComponentReport, ...] = ()

    def to_json(self) -> dict:
        data = self.phi.to_json()
        data.update({"bound": self.bound, "delta": self.delta,
                     "components": [c.to_json() for c in self.components]})
        return data


def _anchor(ev: RankEvaluator, O: SampleSet, point_masses: np.ndarray) -> int:
    """The heaviest sample point of O, or its most central point if O holds no rank."""
    idx = O.indices
    weights = point_masses[idx]
    if weights.max() > 0:
        return int(idx[np.argmax(weights)])
    eccentricity = ev.region.distances[np.ix_(idx, idx)].max(axis=1)
    return int(idx[np.argmin(eccentricity)])


def _lift_component(ev: RankEvaluator, delta: float, center_idx: Sequence[int]) -> Tuple[list, ComponentReport]:
    region = ev.region
    cover = _carve(ev, delta, center_idx)
    sets = cover.sets
    gaps = [O.distance_to(P) for i, O in enumerate(sets) for P in sets[i + 1:]]
    rho = 0.25 * min([delta] + gaps)
    point_masses = ev.point_masses()

    pairs, ranks = [], []
    assigned = 0
    for O in sets:
        rank = ev(O.thicken(rho))
        if rank == 0:
            continue
        pairs.append((complex(region.points[_anchor(ev, O, point_masses)]), rank))
        ranks.append(rank)
        assigned += rank

    residual = ev.mass - assigned
    if residual < 0:
        raise CertificateError(f"Cover sets claim {assigned} > component rank {ev.mass}")
    if residual > 0:
        U = cover.union
        rest = cover.domain - U
        if not rest.is_empty():
            z0 = region.leftmost(rest.mask)
        else:
            far = np.where(cover.domain.mask, U.distance_from(), -np.inf)
            z0 = int(np.argmax(far))
        pairs.append((complex(region.points[z0]), residual))
    return pairs, ComponentReport(ev.mass, rho, residual, cover, tuple(ranks))


def lift(alpha: RankMeasure, delta: float) -> LiftResult:
    """
    Finite dimensional homomorphism phi with d_Cu(Cu(phi), alpha) < 6 delta.

    alpha must be unital: its total mass equals the target dimension. The
    support is split into almost connected components of delta/4-balls and
    each component is lifted through its own cover.
    """
    if not delta > 0:
        raise PreconditionError(f"delta must be positive, got {delta}")
    if alpha.target_dim == 0 or alpha.mass != alpha.target_dim:
        raise PreconditionError(f"Lift needs total mass equal to n > 0, got mass {alpha.mass}, "
                                f"n={alpha.target_dim}")
    ev = _on_support(alpha)
    region = ev.region
    centers = farthest_point_net(region, delta / 4)
    balls = [SampleSet(region, region.distances[:, c] < delta / 4) for c in centers]
    groups, null = components(balls, ev)

    parts = []
    for group in groups:
        mask = np.zeros(len(region), dtype=bool)
        for i in group:
            mask |= balls[i].mask
        leftmost = region.points[region.leftmost(mask)]
        parts.append(((leftmost.real, leftmost.imag), mask, [int(centers[i]) for i in group]))
    parts.sort(key=lambda part: part[0])

    pairs, reports = [], []
    for _, mask, group_centers in parts:
        part_ev = ev.restrict(SampleSet(region, mask))
        part_pairs, report = _lift_component(part_ev, delta, group_centers)
        pairs.extend(part_pairs)
        reports.append(report)

    phi = FinDimHom(alpha.region, pairs, alpha.target_dim)
    bound = d_cu(cu_of_hom(phi), alpha).value
    if not bound < 6 * delta:
        raise CertificateError(f"Lift misses: d_Cu = {bound:.4g} >= 6 delta = {6 * delta:.4g}")
    logger.debug(f"lift: delta={delta:g}, {len(reports)} components, {len(null)} null balls, "
                 f"bound={bound:.4g}")
    return LiftResult(phi, bound, delta, tuple(reports))


@dataclass(frozen=True)
class CauchyTrace:
    matrix: NormalMatrix
    deltas: Tuple[float, ...]
    bounds: Tuple[float, ...]
    steps: Tuple[float, ...]
    distance: float

    def decay(self) -> float:
        """
        Average factor by which the Cauchy envelope shrinks per step.

        The envelope is the running tail maximum of the aligned steps,
        followed by the final distance to the target, and is measured from
        its peak. Once it vanishes the sequence has stabilized, and the rest
        of the way counts as a drop to the first unresolved scale, half the
        finest delta. inf when nothing moved above that scale; 1.0 when the
        largest move is the unresolved final distance itself.
        """
        legs = np.append(np.asarray(self.steps, dtype=float), self.distance)
        envelope = np.maximum.accumulate(legs[::-1])[::-1]
        tol = WITNESS_TOL * max(1.0, self.matrix.norm)
        floor = self.deltas[-1] / 2
        if envelope[0] <= max(tol, floor):
            return math.inf
        peak = int(np.flatnonzero(envelope >= envelope[0]).max())
        settled = np.flatnonzero(envelope[peak:] <= tol)
        if settled.size:
            return float((envelope[0] / floor) ** (1.0 / settled[0]))
        if peak == legs.size - 1:
            return 1.0
        return float((envelope[0] / envelope[-1]) ** (1.0 / (legs.size - 1 - peak)))

    def to_json(self) -> dict:
        data = self.matrix.to_json()
        data.update({"deltas": list(self.deltas), "bounds": list(self.bounds),
                     "steps": list(self.steps), "distance": self.distance})
        return data


def cauchy_lift(alpha: RankMeasure, max_steps: int = MAX_EXACT_LIFT_STEPS) -> CauchyTrace:
    """
    Lift alpha at delta_k = diameter * 2^-k until delta_k drops below h,
    aligning each realized matrix to the previous one with the matching
    witness unitary. Aligned steps must stay below 18 * diameter * 2^-k.
    """
    region = alpha.region
    delta0 = region.diameter if region.diameter > 0 else region.h
    rate = 18.0 * delta0
    previous: Optional[NormalMatrix] = None
    deltas, bounds, steps = [], [], []
    for k in range(1, max_steps + 1):
        delta = delta0 * 2.0 ** -k
        result = lift(alpha, delta)
        x = result.phi.realize()
        if previous is not None:
            x = conjugate(x, d_u_bracket(x, previous).witness)
            step = x.distance(previous)
            if step > rate * 2.0 ** -k + MATCH_TOL:
                raise ConvergenceError(f"Step {k}: aligned distance {step:.4g} exceeds "
                                       f"{rate * 2.0 ** -k:.4g}")
            steps.append(step)
        deltas.append(delta)
        bounds.append(result.bound)
        logger.info(f"exact_lift step {k}: delta={delta:.4g}, bound={result.bound:.4g}"
                    + (f", step={steps[-1]:.4g}" if previous is not None else ""))
        previous = x
        if delta < region.h:
            break
    else:
        raise ConvergenceError(f"delta did not drop below h={region.h} within {max_steps} steps")

    distance = d_cu(cu_of_normal(previous, region), alpha).value
    if distance > 2 * region.h + MATCH_TOL:
        raise ConvergenceError(f"Limit sits at d_Cu = {distance:.4g} > 2h = {2 * region.h:.4g}")
    return CauchyTrace(previous, tuple(deltas), tuple(bounds), tuple(steps), distance)


def exact_lift(alpha: RankMeasure) -> NormalMatrix:
    """Normal matrix whose spectral measure matches alpha at grid resolution."""
    return cauchy_lift(alpha).matrix
