import numpy as np
import pytest

from config import ConvergenceError, DomainError, NormalityError, PreconditionError
from matrix import (IDENTITY, NormalMatrix, ScalarFunction, constant_function, conjugate, convergence_check,
                    functional_calculus, hausdorff, monomial_bound, opnorm, polynomial, product,
                    random_normal, random_unitary)
from metrics import bottleneck


def random_spectrum(rng, n):
    return rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)


@pytest.fixture
def x(rng):
    return random_normal(random_spectrum(rng, 5), rng)


def test_rejects_non_normal():
    with pytest.raises(NormalityError):
        NormalMatrix([[0, 1], [0, 0]])


def test_rejects_non_square():
    with pytest.raises(PreconditionError):
        NormalMatrix(np.zeros((2, 3)))


def test_spectral_data_reconstructs(x):
    u = x.basis
    assert opnorm(u @ np.diag(x.eigenvalues) @ u.conj().T - x.entries) <= 1e-9 * max(1.0, x.norm)
    assert opnorm(u.conj().T @ u - np.eye(x.n)) <= 1e-10


def test_identity_and_constant(x):
    assert opnorm(functional_calculus(x, IDENTITY).entries - x.entries) <= 1e-9
    c = 0.3 - 0.2j
    assert opnorm(functional_calculus(x, constant_function(c)).entries - c * np.eye(x.n)) <= 1e-9


def test_calculus_is_multiplicative(x, rng):
    for _ in range(5):
        p = polynomial(random_spectrum(rng, 3))
        q = polynomial(random_spectrum(rng, 4))
        fp, fq = functional_calculus(x, p), functional_calculus(x, q)
        assert opnorm(functional_calculus(x, product(p, q)).entries - fp.entries @ fq.entries) <= 1e-9


def test_norm_of_function_is_max_on_spectrum(x, rng):
    p = polynomial(random_spectrum(rng, 3))
    assert functional_calculus(x, p).norm == pytest.approx(np.abs(p(x.eigenvalues)).max(), abs=1e-9)


def test_spectral_mapping(x, rng):
    for f in (polynomial(random_spectrum(rng, 4)), ScalarFunction(np.exp), ScalarFunction(np.conj)):
        value, _, _ = bottleneck(functional_calculus(x, f).eigenvalues, f(x.eigenvalues))
        assert value <= 1e-8


def test_calculus_rejects_undefined_values():
    x = NormalMatrix.from_diagonal([0, 1])
    with pytest.raises(DomainError):
        functional_calculus(x, ScalarFunction(lambda z: np.where(z == 0, np.nan, z)))


def test_conjugate_by_identity(x):
    assert opnorm(conjugate(x, np.eye(x.n)).entries - x.entries) == 0


def test_conjugate_keeps_spectrum_and_commutes_with_calculus(x, rng):
    u = random_unitary(x.n, rng)
    y = conjugate(x, u)
    assert hausdorff(y.eigenvalues, x.eigenvalues) <= 1e-9
    p = polynomial(random_spectrum(rng, 3))
    lhs = functional_calculus(y, p).entries
    rhs = u @ functional_calculus(x, p).entries @ u.conj().T
    assert opnorm(lhs - rhs) <= 1e-9


def test_conjugate_rejects_non_unitary(x):
    with pytest.raises(NormalityError):
        conjugate(x, 2 * np.eye(x.n))


def test_convergence_check_constant_sequence(x):
    assert convergence_check([x] * 5, x, [IDENTITY], 1e-6) == 1


def test_convergence_check_geometric_sequence(x):
    xs = [NormalMatrix(x.entries + 2.0 ** -k * np.eye(x.n)) for k in range(1, 21)]
    assert convergence_check(xs, x, [IDENTITY], 0.01) == 7


def test_convergence_check_reports_divergence(x):
    xs = [NormalMatrix(x.entries + 0.5 * np.eye(x.n))] * 4
    with pytest.raises(ConvergenceError):
        convergence_check(xs, x, [IDENTITY], 0.1)


@pytest.mark.parametrize("s, t", [(1, 0), (0, 1), (1, 1), (2, 1), (3, 2)])
def test_monomial_bound(x, rng, s, t):
    for k in range(1, 8):
        xn = NormalMatrix((x.basis * (x.eigenvalues + 2.0 ** -k * random_spectrum(rng, x.n))) @ x.basis.conj().T)
        measured, bound = monomial_bound(xn, x, s, t)
        assert measured <= bound + 1e-12


def test_spectral_variation_of_normal_pairs(rng):
    for _ in range(20):
        n = int(rng.integers(1, 8))
        a = random_normal(random_spectrum(rng, n), rng)
        b = random_normal(random_spectrum(rng, n), rng)
        assert hausdorff(a.eigenvalues, b.eigenvalues) <= a.distance(b) + 1e-9


def test_random_unitary_is_unitary(rng):
    u = random_unitary(6, rng)
    assert opnorm(u.conj().T @ u - np.eye(6)) <= 1e-12
