"""
Experiment suites behind `run` and `verify`.

Each suite draws one instance per trial from a stream derived from
(seed, trial id), checks its properties and returns a flat row. Trials
run on a thread pool; rows come back ordered by trial id.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from config import (CLUSTER_REL_TOL, DEFAULT_SEED, EXACT_LIFT_MIN_DECAY, MATCH_TOL, NORMALITY_TOL, TRIANGLE_TOL,
                    WITNESS_TOL, ConfigError, CuLabError, ScheduleError)
from file_handler import FileHandler
from generator import InstanceGenerator, trial_rng
from lifting import build_cover, cauchy_lift, lift
from matrix import (IDENTITY, NormalMatrix, ScalarFunction, constant_function, convergence_check,
                    monomial_bound, polynomial, product)
from metrics import ball_family, d_cu, d_cu_bruteforce, d_u_bracket, d_w, marriage_check, triangle_violation
from morphism import RankMeasure
from region import Region, ball, tent_function

logger = logging.getLogger(__name__)

SHAPES = ('disk', 'segment', 'annulus')


@dataclass
class ExperimentConfig:
    """
    Batch settings. Ranges left as None take the suite's own defaults, and
    deltas are fractions of the region diameter.
    """
    seed: int = DEFAULT_SEED
    trials: Optional[int] = None
    n_range: Optional[Tuple[int, int]] = None
    atom_range: Optional[Tuple[int, int]] = None
    deltas: Tuple[float, ...] = (0.05, 0.1, 0.2)
    shape: str = 'disk'
    h: float = 0.1
    output: Optional[str] = None
    workers: int = 4

    def __post_init__(self):
        if self.trials is not None and self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        for name in ('n_range', 'atom_range'):
            value = getattr(self, name)
            if value is not None:
                if len(value) != 2 or not 1 <= value[0] <= value[1]:
                    raise ConfigError(f"{name} must be an interval of positive integers, got {value}")
                setattr(self, name, (int(value[0]), int(value[1])))
        self.deltas = tuple(float(d) for d in self.deltas)
        if not self.deltas or any(not d > 0 for d in self.deltas):
            raise ConfigError(f"deltas must be positive, got {self.deltas}")
        if not self.h > 0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if self.shape not in SHAPES:
            raise ConfigError(f"shape must be one of {SHAPES}, got {self.shape}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")

    def region(self) -> Region:
        return Region.from_shape(self.shape, self.h)


@dataclass
class TrialContext:
    trial: int
    rng: np.random.Generator
    generator: InstanceGenerator
    deltas: Tuple[float, ...]

    @property
    def region(self) -> Region:
        return self.generator.region

    def delta(self) -> float:
        """Cycle through the configured fractions of the diameter by trial id."""
        return self.deltas[self.trial % len(self.deltas)] * self.region.diameter


@dataclass(frozen=True)
class Suite:
    name: str
    check: Callable[[TrialContext], dict]
    trials: int
    n_range: Tuple[int, int]
    atom_range: Tuple[int, int]
    region: Optional[Callable[[], Region]] = None


def lift_bound(ctx: TrialContext) -> dict:
    alpha = ctx.generator.rank_measure(ctx.rng)
    delta = ctx.delta()
    result = lift(alpha, delta)
    return {"n": alpha.target_dim, "atoms": len(alpha.atoms), "delta": delta,
            "bound": result.bound, "ratio": result.bound / delta,
            "components": len(result.components), "passed": result.bound < 6 * delta}


def metric_axioms(ctx: TrialContext) -> dict:
    gen, rng = ctx.generator, ctx.rng
    n = gen.dimension(rng)
    mass = int(rng.integers(1, n + 1))
    alpha, beta, gamma = (gen.rank_measure(rng, n, mass) for _ in range(3))
    ab = d_cu(alpha, beta).value
    symmetric = ab == d_cu(beta, alpha).value
    violation = max(triangle_violation(alpha, beta, gamma), triangle_violation(beta, gamma, alpha),
                    triangle_violation(gamma, alpha, beta))
    copy = RankMeasure.from_json(alpha.to_json(), alpha.region)
    identity = d_cu(alpha, alpha).value == 0 and d_cu(alpha, copy).value == 0
    separates = (ab == 0) == alpha.same_atoms(beta)
    return {"n": n, "mass": mass, "d_ab": ab, "violation": violation,
            "symmetric": symmetric, "identity": identity, "separates": separates,
            "passed": symmetric and identity and separates and violation <= TRIANGLE_TOL}


def oracle_region() -> Region:
    return Region.disk(1.0, 0.4)


def oracle_equivalence(ctx: TrialContext) -> dict:
    gen, rng = ctx.generator, ctx.rng
    n = gen.dimension(rng)
    alpha, beta = gen.rank_measure(rng, n), gen.rank_measure(rng, n)
    matched = d_cu(alpha, beta).value
    brute = d_cu_bruteforce(alpha, beta, ball_family(alpha, beta))
    h = ctx.region.h
    return {"n": n, "atoms": len(alpha.atoms) + len(beta.atoms), "grid": len(ctx.region),
            "matching": matched, "bruteforce": brute,
            "passed": brute <= matched + MATCH_TOL and matched - brute <= h}


def marriage(ctx: TrialContext) -> dict:
    gen, rng = ctx.generator, ctx.rng
    k = int(rng.integers(1, 6))
    dims = [gen.dimension(rng) for _ in range(k)]
    alphas = [gen.rank_measure(rng, n) for n in dims]
    betas = [gen.rank_measure(rng, n) for n in dims]
    result = marriage_check(alphas, betas)
    return {"k": k, "n": sum(dims), "lhs": result.lhs, "rhs": result.rhs,
            "passed": result.lhs <= result.rhs + TRIANGLE_TOL}


def du_bracket(ctx: TrialContext) -> dict:
    gen, rng = ctx.generator, ctx.rng
    n = gen.dimension(rng)
    x, y = gen.normal_matrix(rng, n), gen.normal_matrix(rng, n)
    bracket = d_u_bracket(x, y)
    dw = d_w(x, y, ctx.region)
    tol = 2 * CLUSTER_REL_TOL * max(1.0, x.norm, y.norm) + TRIANGLE_TOL
    checks = (bracket.lower <= bracket.upper + tol,
              bracket.achieved <= bracket.upper + WITNESS_TOL * max(1.0, x.norm, y.norm),
              bracket.lower <= dw + tol,
              bracket.upper <= 2 * dw + tol)
    return {"n": n, "lower": bracket.lower, "upper": bracket.upper, "achieved": bracket.achieved,
            "d_w": dw, "passed": all(checks)}


def exact_lift_suite(ctx: TrialContext) -> dict:
    alpha = ctx.generator.multiscale_measure(ctx.rng)
    trace = cauchy_lift(alpha)
    x = trace.matrix
    normal = x.normality_defect <= NORMALITY_TOL * max(1.0, x.norm ** 2)
    h = ctx.region.h
    decay = trace.decay()
    return {"n": alpha.target_dim, "atoms": len(alpha.atoms), "steps": len(trace.deltas),
            "last_step": trace.steps[-1] if trace.steps else 0.0, "decay": decay,
            "defect": x.normality_defect, "distance": trace.distance,
            "passed": normal and trace.distance <= 2 * h + MATCH_TOL and decay >= EXACT_LIFT_MIN_DECAY}


def cover_certificates(ctx: TrialContext) -> dict:
    gen, rng = ctx.generator, ctx.rng
    n = gen.dimension(rng)
    alpha = gen.rank_measure(rng, n, int(rng.integers(1, n + 1)))
    delta = ctx.delta()
    cover = build_cover(alpha, delta)
    certificates = cover.verify(alpha)
    row = {"n": n, "mass": alpha.mass, "delta": delta, "sets": len(cover)}
    row.update(certificates.to_json())
    row["passed"] = certificates.passed
    return row


def basket(region: Region, rng: np.random.Generator) -> List[ScalarFunction]:
    """Ten test functions: algebraic ones, random polynomials, exp and two tents."""
    coeffs = [rng.uniform(-1, 1, k) + 1j * rng.uniform(-1, 1, k) for k in (3, 4)]
    conj = ScalarFunction(np.conj, 1.0, "conj")
    tents = [ScalarFunction(tent_function(ball(region, c, r).sampled(), r), 1.0 / r, f"tent{i}")
             for i, (c, r) in enumerate(((region.points[0], 0.5), (region.points[-1], 0.3)))]
    return [IDENTITY, constant_function(1 - 0.5j), conj,
            ScalarFunction(lambda z: np.abs(z) ** 2, name="abs2"),
            polynomial(coeffs[0]), polynomial(coeffs[1]), product(IDENTITY, conj),
            ScalarFunction(np.exp, name="exp")] + tents


def fc_continuity(ctx: TrialContext) -> dict:
    gen, rng = ctx.generator, ctx.rng
    n = gen.dimension(rng)
    x = gen.normal_matrix(rng, n)
    direction = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * ctx.region.h / 4
    u = x.basis
    xs = [NormalMatrix((u * (x.eigenvalues + 2.0 ** -k * direction)) @ u.conj().T) for k in range(1, 31)]
    N = convergence_check(xs, x, basket(ctx.region, rng), 1e-3)
    worst = 0.0
    for xk in xs:
        for s, t in ((1, 0), (0, 2), (1, 1), (2, 1), (2, 2)):
            measured, bound = monomial_bound(xk, x, s, t)
            worst = max(worst, measured - bound)
    dw_last = d_w(xs[-1], x, ctx.region)
    return {"n": n, "N": N, "monomial_excess": worst, "d_w_last": dw_last,
            "passed": worst <= 1e-12 and dw_last <= 1e-6}


SUITES: Dict[str, Suite] = {s.name: s for s in (
    Suite('lift-bound', lift_bound, 200, (1, 64), (1, 32)),
    Suite('metric-axioms', metric_axioms, 1000, (1, 12), (1, 6)),
    Suite('oracle-equivalence', oracle_equivalence, 100, (1, 6), (1, 4), oracle_region),
    Suite('marriage', marriage, 500, (1, 4), (1, 3)),
    Suite('du-bracket', du_bracket, 500, (1, 16), (1, 8)),
    Suite('exact-lift', exact_lift_suite, 50, (4, 16), (4, 12)),
    Suite('cover-certificates', cover_certificates, 200, (1, 16), (1, 8)),
    Suite('fc-continuity', fc_continuity, 20, (1, 8), (1, 4)),
)}


@dataclass
class SuiteReport:
    suite: str
    seed: int
    rows: List[dict] = field(default_factory=list)

    @property
    def failed(self) -> List[int]:
        return [row["id"] for row in self.rows if not row["passed"]]

    @property
    def ok(self) -> bool:
        return not self.failed

    def summary(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "trials": len(self.rows),
                "passed": len(self.rows) - len(self.failed), "failed": len(self.failed),
                "failed_ids": self.failed}


class SuiteRunner:
    def __init__(self, config: ExperimentConfig):
        self.config = config

    def suite(self, name: str) -> Suite:
        if name not in SUITES:
            raise ScheduleError(f"Unknown suite '{name}'; choose from {', '.join(SUITES)}")
        return SUITES[name]

    def generator(self, suite: Suite) -> InstanceGenerator:
        config = self.config
        region = suite.region() if suite.region is not None else config.region()
        return InstanceGenerator(region, config.n_range or suite.n_range,
                                 config.atom_range or suite.atom_range, config.seed)

    def trial(self, suite: Suite, generator: InstanceGenerator, trial: int) -> dict:
        ctx = TrialContext(trial, trial_rng(self.config.seed, trial), generator, self.config.deltas)
        row = {"suite": suite.name, "id": trial}
        try:
            row.update(suite.check(ctx))
        except CuLabError as e:
            logger.error(f"{suite.name} trial {trial} failed: {str(e)}")
            row.update({"passed": False, "error": f"{type(e).__name__}: {str(e)}"})
        else:
            if not row["passed"]:
                logger.error(f"{suite.name} trial {trial} violated its check: {row}")
        row["passed"] = bool(row["passed"])
        return row

    def run(self, name: str) -> SuiteReport:
        suite = self.suite(name)
        generator = self.generator(suite)
        trials = self.config.trials or suite.trials
        logger.info(f"Running {name}: {trials} trials, seed {self.config.seed}, "
                    f"{len(generator.region)} grid points")
        started = time.perf_counter()
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            rows = list(pool.map(lambda t: self.trial(suite, generator, t), range(trials)))
        report = SuiteReport(name, self.config.seed, sorted(rows, key=lambda row: row["id"]))
        logger.info(f"{name}: {len(rows) - len(report.failed)}/{len(rows)} passed "
                    f"in {time.perf_counter() - started:.1f}s")
        return report

    def replay(self, name: str, trial: int) -> dict:
        if trial < 0:
            raise ScheduleError(f"Instance ids are nonnegative, got {trial}")
        suite = self.suite(name)
        return self.trial(suite, self.generator(suite), trial)


def write_report(report: SuiteReport, handler: FileHandler) -> Tuple[str, str]:
    """CSV rows plus a JSON summary, named after the suite."""
    ok, csv_path, error = handler.write_csv(f"{report.suite}.csv", report.rows)
    if not ok:
        raise ScheduleError(error)
    ok, json_path, error = handler.write_json(f"{report.suite}_summary.json", report.summary())
    if not ok:
        raise ScheduleError(error)
    return csv_path, json_path


def describe(config: ExperimentConfig) -> dict:
    return {key: (list(value) if isinstance(value, tuple) else value) for key, value in asdict(config).items()}
