import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp
from oracles import fractional_coefficients_1d, laplacian_kernel, lattice_symbol_1d

from latheat import io
from latheat.errors import AliasingError, InvalidInputError, SpecMismatchError
from latheat.fraclap import (
    apply_spectral,
    apply_stencil,
    cache_path,
    cached_stencil_coefficients,
    continuous_symbol,
    default_quadrature_points,
    quadrature_kernel,
    stencil_coefficients,
    symbol,
)
from latheat.lattice import GridFunction, LatticeSpec, weighted_inner_product, weighted_norm


def _random(spec, rng):
    return GridFunction(spec, rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape))


@pytest.mark.parametrize("n,M", [(1, None), (2, 64), (3, 16)])
def test_integer_order_is_nearest_neighbour(n, M):
    k = stencil_coefficients(1.0, n, 2, M)
    expected = np.zeros((5,) * n)
    expected[(slice(1, 4),) * n] = laplacian_kernel(n)
    np.testing.assert_allclose(k.coeffs, expected, atol=1e-12, rtol=0)


def test_square_of_laplacian():
    k = stencil_coefficients(2.0, 1, 3, 64)
    np.testing.assert_allclose(k.coeffs, [0, 1, -4, 6, -4, 1, 0], atol=1e-12)


def test_half_order_centre_value():
    k = stencil_coefficients(0.5, 1, 4)
    assert default_quadrature_points(4) == 512
    assert k[0] == pytest.approx(1.27324, abs=1e-5)
    assert k[0] == pytest.approx(4 / np.pi, abs=1e-5)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.75, 1.5])
def test_one_dimensional_coefficients_match_gamma_formula(alpha):
    R = 6
    exact = fractional_coefficients_1d(alpha, R)
    errs = []
    for M in (256, 512, 1024):
        errs.append(np.abs(stencil_coefficients(alpha, 1, R, M).coeffs - exact).max())
    assert errs[-1] < 5.0 * 1024.0 ** (-(1 + 2 * alpha))
    # aliasing error of the periodic trapezoid decays like M^{-(1 + 2 alpha)}
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    np.testing.assert_allclose(rates, 1 + 2 * alpha, atol=0.1)


def test_full_quadrature_kernel_sums_to_zero_symbol():
    for alpha in (0.5, 0.8):
        assert abs(quadrature_kernel(alpha, 2, 32).sum()) < 1e-12


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.9])
def test_symmetry_sign_and_decay(alpha):
    k = stencil_coefficients(alpha, 2, 5, 128)
    c = k.coeffs
    np.testing.assert_allclose(c, c[::-1, :], atol=1e-15)
    np.testing.assert_allclose(c, c.T, atol=1e-15)
    assert c[5, 5] > 0
    off = c.copy()
    off[5, 5] = 0
    assert np.all(off <= 1e-15)
    row = np.abs(stencil_coefficients(alpha, 1, 20).coeffs[20:])
    assert np.all(np.diff(row) < 0)
    assert k.tail_mass > 0


def test_periodic_fold_has_zero_row_sum():
    k = stencil_coefficients(0.6, 2, 4, 64, periodic=True)
    assert k.periodic and k.tail_mass == 0
    assert abs(k.row_sum) < 1e-12


def test_bad_arguments():
    with pytest.raises(AliasingError):
        stencil_coefficients(0.5, 1, 10, 21)
    with pytest.raises(AliasingError):
        stencil_coefficients(0.5, 1, 4, 36, periodic=True)
    with pytest.raises(InvalidInputError):
        stencil_coefficients(-0.5, 1, 4)
    with pytest.raises(InvalidInputError):
        stencil_coefficients(0.5, 1, 0)
    k = stencil_coefficients(0.5, 1, 2)
    with pytest.raises(IndexError):
        k[3]


def test_symbol_closed_form():
    spec = LatticeSpec(1, 0.1, 32)
    nu2 = symbol(spec, 0.7)
    xi = spec.axis_frequencies()
    np.testing.assert_allclose(nu2.values, lattice_symbol_1d(0.7, 0.1, xi), rtol=1e-13)
    assert nu2.at((0,)) == 0
    cont = continuous_symbol(spec, 0.7)
    assert np.all(nu2.values <= cont.values * (1 + 1e-14))
    # small frequencies: the lattice symbol approaches the continuous one
    assert nu2.at((1,)) == pytest.approx(cont.at((1,)), rel=1e-2)


@pytest.mark.parametrize("alpha", [0.5, 0.75, 1.0])
@pytest.mark.parametrize("n,N", [(1, 32), (2, 16)])
def test_periodic_stencil_equals_spectral(alpha, n, N, rng):
    spec = LatticeSpec(n, 0.2, N)
    k = stencil_coefficients(alpha, n, N // 2, 4 * N, periodic=True)
    sym = symbol(spec, alpha)
    for _ in range(3):
        f = _random(spec, rng)
        d = apply_stencil(f, k) - apply_spectral(f, sym)
        assert weighted_norm(d) <= 1e-10 * weighted_norm(f)


def test_truncated_stencil_error_bounded_by_tail(rng):
    spec = LatticeSpec(1, 0.5, 32)
    k = stencil_coefficients(0.5, 1, 16, 128)
    f = _random(spec, rng)
    d = weighted_norm(apply_stencil(f, k) - apply_spectral(f, symbol(spec, 0.5)))
    assert 0 < d <= k.tail_mass * weighted_norm(f) + 1e-12


def test_spectral_scaling():
    spec = LatticeSpec(1, 0.25, 8)
    f = GridFunction.delta(spec)
    sym = symbol(spec, 0.5)
    a = apply_spectral(f, sym, scaled=True)
    b = apply_spectral(f, sym)
    assert a.allclose(GridFunction(spec, b.values / 0.25), atol=1e-13)


def test_period_mismatch_rejected():
    spec = LatticeSpec(1, 0.5, 16)
    with pytest.raises(SpecMismatchError):
        apply_stencil(GridFunction.zeros(spec), stencil_coefficients(0.5, 1, 4, 64, periodic=True))
    with pytest.raises(SpecMismatchError):
        apply_stencil(GridFunction.zeros(spec), stencil_coefficients(0.5, 2, 2, 16))
    with pytest.raises(SpecMismatchError):
        apply_spectral(GridFunction.zeros(spec), symbol(LatticeSpec(1, 0.25, 16), 0.5))


def test_cache_round_trip(tmp_path):
    k1, hit1 = cached_stencil_coefficients(0.5, 1, 8, None, tmp_path)
    k2, hit2 = cached_stencil_coefficients(0.5, 1, 8, None, tmp_path)
    assert (hit1, hit2) == (False, True)
    np.testing.assert_array_equal(k1.coeffs, k2.coeffs)
    assert k1.tail_mass == k2.tail_mass
    p = cache_path(0.5, 1, 8, 512, tmp_path)
    assert p.exists() and p.read_bytes() == io.encode_kernel(k1)
    assert cache_path(0.5000001, 1, 8, 512, tmp_path) != p


def test_cache_honours_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("LATTICE_HEAT_CACHE", str(tmp_path / "env"))
    cached_stencil_coefficients(1.0, 1, 2, 16)
    assert list((tmp_path / "env").iterdir())


spec8 = LatticeSpec(1, 0.3, 8)
kern8 = stencil_coefficients(0.6, 1, 4, 32, periodic=True)
vecs = hnp.arrays(np.complex128, 8, elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))


@given(vecs, vecs, st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_operator_is_linear_self_adjoint_and_nonnegative(u, v, c):
    U, V = GridFunction(spec8, u), GridFunction(spec8, v)
    KU, KV = apply_stencil(U, kern8), apply_stencil(V, kern8)
    scale = 1 + weighted_norm(U) * weighted_norm(V) + weighted_norm(U) ** 2
    assert apply_stencil(U + c * V, kern8).allclose(KU + c * KV, atol=1e-9 * scale)
    assert abs(weighted_inner_product(KU, V) - weighted_inner_product(U, KV)) <= 1e-11 * scale
    assert weighted_inner_product(KU, U).real >= -1e-11 * scale
