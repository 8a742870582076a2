import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad, trapezoid

from latheat.coefficients import (
    CoefficientModel,
    Constant,
    LogSchedule,
    Mollifier,
    Oscillation,
    Polynomial,
    PowerSchedule,
    SampledCoefficient,
    moderateness_bounds,
    regularize,
    resolving_steps,
    sample,
    strict_positivity_check,
    uniform_grid,
)
from latheat.errors import GridResolutionError, InvalidInputError, PositivityError

MOLL = Mollifier()


def _bump(x):
    return math.exp(-1.0 / (x * (1.0 - x))) if 0 < x < 1 else 0.0


MASS = quad(_bump, 0, 1, epsabs=1e-15, epsrel=1e-13)[0]


def test_bump_shape():
    assert MOLL.normalization == pytest.approx(1 / MASS, rel=1e-12)
    x = np.linspace(-0.5, 1.5, 2001)
    p = MOLL.psi(x)
    assert np.all(p >= 0) and np.all(p[(x <= 0) | (x >= 1)] == 0)
    assert p.max() == pytest.approx(MOLL.sup, rel=1e-12)
    assert MOLL.sup == pytest.approx(math.exp(-4) / MASS)
    h = 1e-6
    xs = np.array([0.2, 0.5, 0.77])
    np.testing.assert_allclose(MOLL.dpsi(xs), (MOLL.psi(xs + h) - MOLL.psi(xs - h)) / (2 * h), rtol=1e-7)


def test_antiderivative_against_adaptive_quadrature():
    for x in (0.05, 0.3, 0.5, 0.61, 0.9, 0.999):
        ref = quad(_bump, 0, x, epsabs=1e-16, epsrel=1e-13)[0] / MASS
        assert float(MOLL.antiderivative(x)) == pytest.approx(ref, abs=1e-12)
    assert float(MOLL.antiderivative(-3)) == 0 and float(MOLL.antiderivative(7)) == 1
    x = np.linspace(0, 1, 10001)
    assert np.all(np.diff(MOLL.antiderivative(x)) >= -1e-15)


def test_schedules():
    assert LogSchedule()(1.0) == 1.0
    assert LogSchedule()(math.exp(-3)) == pytest.approx(0.25)
    assert PowerSchedule(0.5)(0.25) == 0.5
    assert Mollifier(PowerSchedule(2.0)).omega(0.1) == pytest.approx(0.01)


def test_resolving_steps():
    assert resolving_steps(1.0, 1.0) == 512
    assert resolving_steps(1.0, 0.01) == 2048
    n = resolving_steps(2.0, 0.003)
    assert 2.0 / n <= 0.003 / 16 < 2.0 / (n / 2)


def test_constant_is_fixed():
    grid = uniform_grid(1.0, 512)
    a = regularize(CoefficientModel(Constant(1.7)), 0.01, MOLL, grid)
    np.testing.assert_allclose(a.values, 1.7, rtol=1e-14)
    np.testing.assert_allclose(a.derivative, 0, atol=1e-14)


def test_linear_is_shifted_by_half_omega():
    # the bump is symmetric about 1/2, so a linear a is shifted by omega / 2
    eps = 2.0**-6
    w = MOLL.omega(eps)
    grid = uniform_grid(1.0, 512)
    a = regularize(CoefficientModel(Polynomial((1.0, 0.5))), eps, MOLL, grid)
    np.testing.assert_allclose(a.values, 1 + 0.5 * (grid - w / 2), rtol=1e-13)
    np.testing.assert_allclose(a.derivative, 0.5, rtol=1e-13)


def test_oscillation_against_quadrature():
    eps = 0.1
    w = MOLL.omega(eps)
    model = CoefficientModel(Oscillation(0.3, 1.0, 5.0, 0.2))
    grid = uniform_grid(1.0, 512)
    a = regularize(model, eps, MOLL, grid)
    for i in (0, 100, 333, 512):
        t = grid[i]
        ref = quad(lambda x: (0.3 + math.sin(5 * (t - w * x) + 0.2)) * _bump(x), 0, 1, epsabs=1e-14)[0] / MASS
        assert a.values[i] == pytest.approx(ref, abs=1e-12)


def test_delta_atom_is_scaled_bump():
    eps = 2.0**-8
    w = MOLL.omega(eps)
    grid = uniform_grid(1.0, resolving_steps(1.0, w))
    a = regularize(CoefficientModel(delta_atoms=((0.25, 2.0),)), eps, MOLL, grid)
    np.testing.assert_allclose(a.values, 2.0 * MOLL.psi((grid - 0.25) / w) / w, rtol=1e-14)
    assert trapezoid(a.values, grid) == pytest.approx(2.0, rel=1e-10)
    assert np.max(a.values) == pytest.approx(2.0 * MOLL.sup / w, rel=1e-3)


def test_heaviside_atom_ramps_up():
    eps = 0.05
    w = MOLL.omega(eps)
    grid = uniform_grid(1.0, resolving_steps(1.0, w))
    a = regularize(CoefficientModel(heaviside_atoms=((0.0, 3.0),)), eps, MOLL, grid)
    assert a.values[0] == 0
    np.testing.assert_allclose(a.values[grid >= w], 3.0, rtol=1e-14)
    h = grid[1] - grid[0]
    fd = np.gradient(a.values, h)
    assert np.max(np.abs(fd[1:-1] - a.derivative[1:-1])) < 0.05 * np.max(np.abs(a.derivative))


def test_regularize_checks():
    m = CoefficientModel(Constant(1.0))
    with pytest.raises(GridResolutionError):
        regularize(m, 2.0**-10, MOLL, uniform_grid(1.0, 64))
    with pytest.raises(InvalidInputError):
        regularize(m, 0.0)
    with pytest.raises(InvalidInputError):
        regularize(m, 1.5)
    with pytest.raises(InvalidInputError):
        sample(CoefficientModel(delta_atoms=((0.0, 1.0),)), uniform_grid(1.0, 8))
    with pytest.raises(InvalidInputError):
        CoefficientModel(delta_atoms=((2.0, 1.0),), T=1.0)


def test_positivity_gates():
    assert CoefficientModel(Polynomial((1.0, -0.5))).check_diffusion() == pytest.approx(0.5)
    with pytest.raises(PositivityError):
        CoefficientModel(Oscillation(0.5, 1.0)).check_diffusion()
    with pytest.raises(PositivityError):
        CoefficientModel(Constant(1.0), delta_atoms=((0.5, -1.0),)).check_diffusion()
    grid = uniform_grid(1.0, 8)
    with pytest.raises(PositivityError):
        strict_positivity_check(SampledCoefficient(grid, np.linspace(-1, 1, 9), np.zeros(9)))
    assert strict_positivity_check(sample(CoefficientModel(Constant(2.0)), grid)) == 2.0


def test_sampled_coefficient_helpers():
    grid = uniform_grid(1.0, 4)
    a = sample(CoefficientModel(Polynomial((0.0, 1.0))), grid)
    assert (a + a.shifted(1.0)).values[2] == pytest.approx(2.0)
    assert a.sup == 1.0 and a.sup_derivative == 1.0
    assert a.to_csv().splitlines()[:2] == ["t,value,derivative", "0,0,1"]
    with pytest.raises(InvalidInputError):
        a + sample(CoefficientModel(Constant(0.0)), uniform_grid(2.0, 4))
    with pytest.raises(ValueError):
        a.values[0] = 3


def test_moderateness_exponents_of_a_delta_atom():
    eps = 2.0 ** -np.arange(2, 12)
    model = CoefficientModel(delta_atoms=((0.5, 1.0),))
    moll = Mollifier(PowerSchedule(1.0))
    samples = []
    for e in eps:
        samples.append(regularize(model, e, moll, uniform_grid(1.0, resolving_steps(1.0, e, base=64))))
    fit = moderateness_bounds(eps, samples)
    # sup psi_w = sup psi / w and sup psi_w' = sup psi' / w^2
    assert fit.value_slope == pytest.approx(1.0, abs=0.02)
    assert fit.derivative_slope == pytest.approx(2.0, abs=0.05)
    log_fit = moderateness_bounds(eps, [regularize(model, e) for e in eps])
    assert 0 < log_fit.value_slope < 1
    with pytest.raises(InvalidInputError):
        moderateness_bounds(eps[:3], samples[:3])
    with pytest.raises(InvalidInputError):
        moderateness_bounds(eps[:5], samples[:5])


atoms = st.lists(st.tuples(st.floats(0.0, 1.0), st.floats(0.0, 5.0)), max_size=3)


@given(atoms, atoms, st.floats(0.05, 1.0))
def test_atom_mass_and_positivity(deltas, heavisides, eps):
    # extend the grid past T + omega so every bump is fully captured
    w = MOLL.omega(eps)
    n_t = resolving_steps(3.0, w, base=2048)
    grid = uniform_grid(3.0, n_t)
    model = CoefficientModel(Constant(0.0), tuple(deltas), tuple(heavisides), T=1.0)
    a = regularize(model, eps, MOLL, grid)
    assert np.all(a.values >= 0)
    expected = sum(wt for _, wt in deltas) + sum(wt * (1.0 - t0) for t0, wt in heavisides)
    assert trapezoid(a.values, grid) == pytest.approx(expected, rel=1e-6, abs=1e-9)


@given(st.floats(0.1, 3.0), st.floats(-1, 1), st.floats(0.0, 2.0), st.floats(1e-3, 1.0))
def test_regular_positive_model_stays_positive(c0, c1, wt, eps):
    model = CoefficientModel(Oscillation(c0 + abs(c1) + 0.01, c1, 3.0), ((0.5, wt),))
    a = regularize(model, eps)
    assert strict_positivity_check(a) >= model.check_diffusion() - 1e-12
