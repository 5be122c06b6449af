from __future__ import annotations

import math

import numpy as np
import pytest

from hbarlab.errors import ConvergenceError, GridError, PositivityError
from hbarlab.groupoid import ConstantPoissonData
from hbarlab.moyal import (
    EpsilonFactor,
    Grid,
    LatticeFunction,
    MoyalElement,
    cocycle_sigma,
    default_extent,
    dirac_defect,
    element_to_file,
    ev0,
    fourier_intertwining_residual,
    gaussian,
    kahler_product,
    read_grid,
    symbol_grid,
    twisted_convolution,
    unit_multiplier,
    weyl_quantize,
)
from hbarlab.numerics import fit_order

D = ConstantPoissonData.standard(2)
PI = D.Pi
G48 = Grid.covering(2, 48, 8.0)


def test_cocycle_values():
    assert cocycle_sigma([1, 0], [0, 1], 0.0, PI) == 1
    assert cocycle_sigma([1, 0], [0, 1], 1.0, PI) == pytest.approx(np.exp(0.5j))
    assert cocycle_sigma([1, 0], [0, 1], 1.0, PI, "kahler") == pytest.approx(np.exp(-0.5j))
    with pytest.raises(ValueError):
        cocycle_sigma([1, 0], [0, 1], 1.0, PI, "nope")


def test_cocycle_identity():
    rng = np.random.default_rng(0)
    for _ in range(100):
        y, yp, ypp = rng.normal(size=(3, 2))
        h = rng.uniform(0, 3)
        lhs = cocycle_sigma(y, yp, h, PI) * cocycle_sigma(y + yp, ypp, h, PI)
        rhs = cocycle_sigma(y, yp + ypp, h, PI) * cocycle_sigma(yp, ypp, h, PI)
        assert abs(lhs - rhs) < 1e-14


def test_fourier_intertwining_at_zero():
    a = gaussian(G48, [0.5, -0.3], 0.8)
    b = gaussian(G48, [-0.2, 0.4], 0.6, tilt=[0.3, 0.1])
    assert fourier_intertwining_residual(a, b) < 1e-8


def test_delta_is_a_unit():
    g = Grid.covering(2, 32, 6.0)
    delta = np.zeros(g.shape)
    delta[16, 16] = 1.0 / g.cell
    b = gaussian(g, [0.3, 0.0], 0.9)
    out = twisted_convolution(LatticeFunction(g, delta), b, 1.0, PI)
    assert np.max(np.abs(out.values - b.values)) < 1e-12


def test_associativity_on_gaussians():
    rng = np.random.default_rng(1)
    a, b, c = (gaussian(G48, rng.uniform(-0.5, 0.5, 2), 0.6, tilt=rng.uniform(-0.3, 0.3, 2)) for _ in range(3))
    ab_c = twisted_convolution(twisted_convolution(a, b, 1.0, PI), c, 1.0, PI)
    a_bc = twisted_convolution(a, twisted_convolution(b, c, 1.0, PI), 1.0, PI)
    assert np.max(np.abs(ab_c.values - a_bc.values)) < 1e-7


def test_involution_reverses_products():
    rng = np.random.default_rng(2)
    a, b = (gaussian(G48, rng.uniform(-0.5, 0.5, 2), 0.6, amplitude=1 + 0.5j, tilt=rng.uniform(-0.3, 0.3, 2))
            for _ in range(2))
    lhs = twisted_convolution(a, b, 1.0, PI).involution()
    rhs = twisted_convolution(b.involution(), a.involution(), 1.0, PI)
    assert np.max(np.abs(lhs.values - rhs.values)) < 1e-8


def test_grid_mismatch_and_truncation_warning():
    a = gaussian(G48, width=0.6)
    with pytest.raises(GridError):
        twisted_convolution(a, gaussian(Grid.covering(2, 32, 8.0)), 1.0, PI)
    wide = gaussian(G48, width=4.0)
    assert "warning" in twisted_convolution(wide, wide, 1.0, PI).meta


def test_epsilon_factor():
    e = EpsilonFactor.for_case(D, "kahler")
    assert e.m == 1 and e.eps == pytest.approx(1 / (2 * math.pi))
    assert EpsilonFactor.for_case(D, "flat_V").m == 0
    with pytest.raises(PositivityError):
        e.prefactor(-0.1)


@pytest.mark.parametrize("h", [0.5, 1.0, 2.0])
def test_unit_multiplier_is_idempotent(h):
    K = unit_multiplier(h, D)
    assert K.rep == "translation_invariant"
    KK = kahler_product(K, K, D)
    assert np.max(np.abs(KK.values - K.values)) < 1e-6


def test_unit_multiplier_at_origin():
    K = unit_multiplier(1.0, D)
    assert K.value_at(None, [0.0, 0.0]) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-15)
    with pytest.raises(PositivityError):
        unit_multiplier(-1.0, D)


def test_polarized_element_times_unit_multiplier():
    h = 1.0
    K = unit_multiplier(h, D)
    a = MoyalElement(h, K.ygrid, (3 - 2j) * K.values)
    assert np.max(np.abs(kahler_product(a, K, D).values - a.values)) < 1e-6
    assert np.max(np.abs(kahler_product(K, a, D).values - a.values)) < 1e-6


def test_ev0_of_unit_multipliers():
    yg = Grid.covering(2, 64, default_extent(0.05, D))
    fam = [unit_multiplier(h, D, ygrid=yg) for h in (0.2, 0.1, 0.05)]
    for y in ([0.0, 0.0], [1.0, -0.5]):
        lim, res = ev0(fam, None, y, D)
        assert abs(lim - 1) < 1e-3


def test_ev0_of_zero_family():
    yg = Grid.covering(2, 16, 4.0)
    fam = [MoyalElement(h, yg, np.zeros(yg.shape)) for h in (0.2, 0.1, 0.05)]
    assert ev0(fam, None, [0.0, 0.0], D)[0] == 0


def test_ev0_of_function_times_unit():
    xg = Grid.covering(2, 8, 2.0)
    yg = Grid.covering(2, 16, 4.0)
    X = xg.mesh()
    f = np.cos(X[..., 0]) + X[..., 1]
    fam = []
    for h in (0.2, 0.1, 0.05):
        K = unit_multiplier(h, D, ygrid=yg)
        fam.append(MoyalElement(h, yg, f[:, :, None, None] * K.values[None, None], xg))
    for i, j in [(4, 4), (2, 5)]:
        lim, _ = ev0(fam, X[i, j], [0.5, 0.0], D)
        assert abs(lim - f[i, j]) < 1e-3


def test_ev0_refuses_diverging_family():
    yg = Grid.covering(2, 16, 4.0)
    eps = EpsilonFactor.for_case(D, "kahler")
    fam = [MoyalElement(h, yg, np.full(yg.shape, eps.prefactor(h) / h ** 2)) for h in (0.2, 0.1, 0.05)]
    with pytest.raises(ConvergenceError):
        ev0(fam, None, [0.0, 0.0], D)


def test_kahler_product_refuses_negative_hbar():
    yg = Grid.covering(2, 8, 2.0)
    a = MoyalElement(-0.5, yg, np.ones(yg.shape))
    with pytest.raises(PositivityError):
        kahler_product(a, a, D)


def test_weyl_quantize_gaussian_is_gaussian():
    g = symbol_grid(2, 64)
    f = LatticeFunction.from_function(g, lambda X: np.exp(-0.5 * np.sum(X * X, axis=-1)))
    q = weyl_quantize(f)
    Y = q.grid.mesh()
    want = np.exp(-0.5 * np.sum(Y * Y, axis=-1)) / (2 * math.pi)
    assert np.max(np.abs(q.values - want)) < 1e-12


def test_weyl_quantize_refuses_aliased_symbols():
    g = symbol_grid(2, 32)
    rough = LatticeFunction.from_function(g, lambda X: np.exp(-20 * np.sum(X * X, axis=-1)))
    with pytest.raises(GridError):
        weyl_quantize(rough)


def test_quantization_is_multiplicative_at_zero():
    g = symbol_grid(2, 64)
    f = LatticeFunction.from_function(g, lambda X: np.exp(-0.5 * np.sum((X - 0.3) ** 2, axis=-1)))
    k = LatticeFunction.from_function(g, lambda X: np.exp(-0.4 * np.sum(X * X, axis=-1)) * (1 + X[..., 0]))
    prod = twisted_convolution(weyl_quantize(f), weyl_quantize(k), 0.0, PI)
    fk = LatticeFunction(g, f.values * k.values)
    assert np.max(np.abs(prod.values - weyl_quantize(fk).values)) < 1e-8


def test_quantization_is_noncommutative_above_zero():
    g = symbol_grid(2, 64)
    x1 = LatticeFunction.from_function(g, lambda X: X[..., 0] * np.exp(-np.sum(X * X, axis=-1) / 4))
    x2 = LatticeFunction.from_function(g, lambda X: X[..., 1] * np.exp(-np.sum(X * X, axis=-1) / 4))
    q1, q2 = weyl_quantize(x1, 1.0), weyl_quantize(x2, 1.0)
    comm = twisted_convolution(q1, q2, 1.0, PI) - twisted_convolution(q2, q1, 1.0, PI)
    assert comm.sup() > 1e-3


def test_dirac_defect():
    g = symbol_grid(2, 64)
    f = gaussian(g, [0.4, 0.0], 1.0)
    k = gaussian(g, [0.0, -0.3], 1.2)
    assert dirac_defect(f, f, 0.5, PI) < 1e-12
    assert dirac_defect(f, k, 0.0, PI) < 1e-8
    assert dirac_defect(f, k, 0.4, np.zeros((2, 2))) < 1e-8
    hs = [0.4, 0.2, 0.1]
    d = [dirac_defect(f, k, h, PI) for h in hs]
    assert d[0] > d[1] > d[2]
    assert fit_order(hs, d) >= 1.8


def test_binary_round_trip(tmp_path):
    K = unit_multiplier(1.0, D, n_points=16)
    p = tmp_path / "k.bin"
    element_to_file(p, K)
    vals, spacing, extent, h = read_grid(p)
    assert vals.dtype == np.complex64 and vals.shape == (16, 16)
    assert np.allclose(vals, K.values, atol=1e-7)
    assert spacing == [K.ygrid.spacing] * 2 and h == 1.0
    assert extent[0] == pytest.approx(K.ygrid.extent)
    (tmp_path / "bad.bin").write_bytes(b"nope")
    with pytest.raises(GridError):
        read_grid(tmp_path / "bad.bin")
