"""Normal matrices, functional calculus and convergence checks for sequences of them."""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import linalg as la
from scipy.spatial.distance import cdist

from config import (EIGENBASIS_TOL, NORMALITY_TOL, UNITARY_TOL, ConvergenceError,
                    DomainError, NormalityError, PreconditionError)

logger = logging.getLogger(__name__)


def opnorm(a: np.ndarray) -> float:
    """Operator (spectral) norm."""
    if a.size == 0:
        return 0.0
    return float(la.norm(a, 2))


class NormalMatrix:
    """
    An n x n complex matrix certified normal, with its spectral data.

    The eigendecomposition is computed eagerly at construction, so
    instances are read-only afterwards.
    """

    def __init__(self, entries):
        x = np.array(entries, dtype=complex)
        if x.ndim != 2 or x.shape[0] != x.shape[1] or x.shape[0] == 0:
            raise PreconditionError(f"Expected a nonempty square matrix, got shape {x.shape}")
        x.setflags(write=False)
        self._entries = x
        self.norm = opnorm(x)
        xh = x.conj().T
        self.normality_defect = opnorm(x @ xh - xh @ x)
        if self.normality_defect > NORMALITY_TOL * max(1.0, self.norm ** 2):
            raise NormalityError(f"Normality defect {self.normality_defect:.3e} above tolerance")

        if np.count_nonzero(x - np.diag(np.diag(x))) == 0:
            eigenvalues = np.diag(x).copy()
            basis = np.eye(x.shape[0], dtype=complex)
        else:
            # complex Schur form of a normal matrix is diagonal
            t, basis = la.schur(x, output='complex')
            eigenvalues = np.diag(t).copy()
        residual = opnorm(basis @ np.diag(eigenvalues) @ basis.conj().T - x)
        if residual > EIGENBASIS_TOL * max(1.0, self.norm):
            raise NormalityError(f"Eigenbasis residual {residual:.3e} above tolerance")
        eigenvalues.setflags(write=False)
        basis.setflags(write=False)
        self.eigenvalues = eigenvalues
        self.basis = basis

    @property
    def n(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @classmethod
    def from_diagonal(cls, values) -> 'NormalMatrix':
        return cls(np.diag(np.asarray(values, dtype=complex)))

    def distance(self, other: 'NormalMatrix') -> float:
        return opnorm(self._entries - other.entries)

    def to_json(self) -> dict:
        return {"n": self.n, "re": self._entries.real.tolist(), "im": self._entries.imag.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> 'NormalMatrix':
        x = np.array(data["re"], dtype=float) + 1j * np.array(data["im"], dtype=float)
        if x.shape != (data["n"], data["n"]):
            raise PreconditionError(f"Matrix payload does not match n={data['n']}")
        return cls(x)

    def __repr__(self) -> str:
        return f"NormalMatrix(n={self.n}, norm={self.norm:.4g}, defect={self.normality_defect:.2e})"


@dataclass(frozen=True)
class ScalarFunction:
    """A continuous function sampled at eigenvalues, with its Lipschitz constant."""
    fn: Callable[[np.ndarray], np.ndarray]
    lipschitz: float = math.inf
    name: str = "f"

    def __call__(self, zs) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(zs, dtype=complex)), dtype=complex)


IDENTITY = ScalarFunction(lambda z: z, 1.0, "id")


def constant_function(c: complex) -> ScalarFunction:
    return ScalarFunction(lambda z: np.full(np.shape(z), c, dtype=complex), 0.0, f"const({c})")


def polynomial(coeffs: Sequence[complex]) -> ScalarFunction:
    """p(z) = sum coeffs[k] z^k."""
    coeffs = list(coeffs)
    return ScalarFunction(lambda z: np.polyval(coeffs[::-1], z), math.inf, f"poly{len(coeffs) - 1}")


def product(f: ScalarFunction, g: ScalarFunction) -> ScalarFunction:
    return ScalarFunction(lambda z: f(z) * g(z), math.inf, f"{f.name}*{g.name}")


def functional_calculus(x: NormalMatrix, f: ScalarFunction) -> NormalMatrix:
    """f(x) = u diag(f(lambda_i)) u*."""
    values = np.atleast_1d(f(x.eigenvalues))
    if values.shape != x.eigenvalues.shape or not np.isfinite(values).all():
        raise DomainError(f"{f.name} is undefined at some eigenvalue")
    u = x.basis
    return NormalMatrix((u * values) @ u.conj().T)


def check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NormalityError(f"Unitary must be square, got shape {u.shape}")
    defect = opnorm(u.conj().T @ u - np.eye(u.shape[0]))
    if defect > UNITARY_TOL:
        raise NormalityError(f"Matrix is not unitary (defect {defect:.3e})")
    return u


def conjugate(x: NormalMatrix, u) -> NormalMatrix:
    """u x u*."""
    u = check_unitary(u)
    if u.shape[0] != x.n:
        raise PreconditionError(f"Unitary of size {u.shape[0]} cannot conjugate an n={x.n} matrix")
    return NormalMatrix(u @ x.entries @ u.conj().T)


def monomial(x: NormalMatrix, s: int, t: int) -> np.ndarray:
    """(x*)^s x^t."""
    xs = np.linalg.matrix_power(x.entries.conj().T, s)
    return xs @ np.linalg.matrix_power(x.entries, t)


def monomial_bound(xn: NormalMatrix, x: NormalMatrix, s: int, t: int) -> tuple:
    """
    Measured ||(xn*)^s xn^t - (x*)^s x^t|| against (s+t) M^(s+t) ||xn - x||,
    with M bounding both norms (and at least 1).
    """
    m = max(1.0, xn.norm, x.norm)
    measured = opnorm(monomial(xn, s, t) - monomial(x, s, t))
    bound = (s + t) * m ** (s + t) * xn.distance(x)
    return measured, bound


def convergence_check(xs: Sequence[NormalMatrix], x: NormalMatrix,
                      functions: Sequence[ScalarFunction], eps: float) -> int:
    """
    Least N (1-based) with max_f ||f(x_m) - f(x)|| < eps for every tested m >= N.

    Raises ConvergenceError if the tail of the sequence never gets there.
    """
    if not eps > 0:
        raise PreconditionError(f"eps must be positive, got {eps}")
    if not xs:
        raise PreconditionError("convergence_check needs a nonempty sequence")
    limits = [functional_calculus(x, f).entries for f in functions]
    errors = []
    for xm in xs:
        errors.append(max(opnorm(functional_calculus(xm, f).entries - fx)
                          for f, fx in zip(functions, limits)))
    errors = np.asarray(errors)
    if errors[-1] >= eps:
        raise ConvergenceError(f"No index within {len(xs)} terms reaches eps={eps:g} "
                               f"(last error {errors[-1]:.3e})")
    bad = np.flatnonzero(errors >= eps)
    n = 1 if bad.size == 0 else int(bad[-1]) + 2
    logger.debug(f"convergence_check: N={n} for eps={eps:g} over {len(functions)} functions")
    return n


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = la.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_normal(spectrum, rng: np.random.Generator) -> NormalMatrix:
    spectrum = np.asarray(spectrum, dtype=complex)
    u = random_unitary(spectrum.size, rng)
    return NormalMatrix((u * spectrum) @ u.conj().T)


def hausdorff(a, b) -> float:
    """Hausdorff distance between two finite point sets in the plane."""
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    d = cdist(np.column_stack([a.real, a.imag]), np.column_stack([b.real, b.imag]))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
