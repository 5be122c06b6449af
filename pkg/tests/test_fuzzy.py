from __future__ import annotations

import math

import numpy as np
import pytest

from hbarlab.errors import QuadratureOrderError
from hbarlab.fuzzy import (
    BRACKET_C,
    FuzzyElement,
    SphereQuadrature,
    angles_of,
    classical_limit_curve,
    coherent_frame,
    coherent_states,
    covariant_symbol,
    dirac_defect_sphere,
    equivariance_residual,
    get_symbol,
    kernel_convolution_check,
    overlap_law_residual,
    product_symbol,
    quantize_symbol,
    resolution_of_identity,
    sphere_bracket,
    spin_rep,
    symbol_theorem_check,
    toeplitz_quantize,
)
from hbarlab.numerics import fit_order


def random_unit(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def test_spin_rep_small_cases():
    r1 = spin_rep(1)
    assert all(np.all(M == 0) for M in (r1.Jx, r1.Jy, r1.Jz))
    r2 = spin_rep(2)
    assert np.allclose(r2.Jz, np.diag([0.5, -0.5]))
    assert np.allclose(r2.Jx, [[0, 0.5], [0.5, 0]])
    assert np.allclose(r2.casimir(), 0.75 * np.eye(2))
    with pytest.raises(ValueError):
        spin_rep(0)


@pytest.mark.parametrize("k", [1, 2, 3, 7, 16, 33, 64])
def test_commutation_relations(k):
    r = spin_rep(k)
    assert r.commutator_residual() < 1e-12
    assert r.Jz.shape == (k, k)
    assert np.allclose(r.casimir(), r.j * (r.j + 1) * np.eye(k))


def test_covariant_symbol_examples():
    k = 6
    frame = coherent_frame(k)
    assert np.allclose(covariant_symbol(FuzzyElement(k, np.eye(k)), frame), 1)
    north = coherent_states(k, [0.0], [0.0])[0]
    assert np.vdot(north, spin_rep(k).Jz @ north).real == pytest.approx((k - 1) / 2)
    o = np.array([0.3, -0.4, math.sqrt(1 - 0.25)])
    psi_o = coherent_states(k, *angles_of(o))[0]
    P = FuzzyElement(k, np.outer(psi_o, psi_o.conj()))
    got = covariant_symbol(P, frame)
    want = ((1 + frame.nodes @ o) / 2) ** (k - 1)
    assert np.max(np.abs(got - want)) < 1e-12
    with pytest.raises(ValueError):
        covariant_symbol(FuzzyElement(3, np.eye(3)), frame)


def test_overlap_law():
    rng = np.random.default_rng(0)
    p, q = random_unit(rng, 100), random_unit(rng, 100)
    for k in (1, 2, 5, 16, 32):
        assert overlap_law_residual(k, p, q) < 1e-10


def test_resolution_of_identity():
    assert resolution_of_identity(1, SphereQuadrature.build(1, 2)) == pytest.approx(0, abs=1e-15)
    assert resolution_of_identity(8, SphereQuadrature.build(16, 32)) < 1e-10
    for k in range(1, 33):
        assert resolution_of_identity(k, SphereQuadrature.default(k)) < 1e-9


def test_insufficient_quadrature_is_refused():
    with pytest.raises(QuadratureOrderError) as e:
        resolution_of_identity(20, SphereQuadrature.build(8, 16))
    assert e.value.required == (20, 40)


def test_toeplitz_examples():
    k = 8
    frame = coherent_frame(k)
    one = toeplitz_quantize(np.ones(len(frame.nodes)), frame)
    assert np.max(np.abs(one.mat - np.eye(k))) < 1e-10
    rng = np.random.default_rng(1)
    assert toeplitz_quantize(rng.normal(size=len(frame.nodes)), frame).is_hermitian(0.0)
    Qz = quantize_symbol(get_symbol("z"), k)
    assert np.max(np.abs(Qz.mat - np.diag(np.diag(Qz.mat)))) < 1e-12
    ev = np.sort(np.linalg.eigvalsh(Qz.mat))
    assert np.allclose(np.diff(ev), ev[1] - ev[0], atol=1e-12)
    assert -1 < ev[0] and ev[-1] < 1
    assert ev[-1] == pytest.approx((k - 1) / (k + 1), abs=1e-13)


def test_kernel_convolution():
    k = 6
    frame = coherent_frame(k, SphereQuadrature.default(k, 2))
    I = FuzzyElement(k, np.eye(k))
    assert kernel_convolution_check(I, I, frame) < 1e-10
    rng = np.random.default_rng(2)
    A = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    B = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    a, b = FuzzyElement(k, A + A.conj().T), FuzzyElement(k, B + B.conj().T)
    assert kernel_convolution_check(a, b, frame) < 1e-9
    phi, chi = rng.normal(size=k) + 0j, rng.normal(size=k) + 1j * rng.normal(size=k)
    assert kernel_convolution_check(FuzzyElement(k, np.outer(phi, chi.conj())), b, frame) < 1e-9


def test_symbol_theorem():
    assert symbol_theorem_check(FuzzyElement(1, [[1.0]]), coherent_frame(1)) == pytest.approx(0, abs=1e-15)
    k = 12
    frame = coherent_frame(k)
    psi_o = coherent_states(k, [0.7], [1.1])[0]
    assert symbol_theorem_check(FuzzyElement(k, np.outer(psi_o, psi_o.conj())), frame) < 1e-10
    rng = np.random.default_rng(3)
    phi = rng.normal(size=k) + 1j * rng.normal(size=k)
    assert symbol_theorem_check(FuzzyElement(k, np.outer(phi, phi.conj())), frame) < 1e-10


def test_classical_limit_of_constant():
    c = classical_limit_curve(get_symbol("constant"), [4, 8, 16, 32])
    assert max(c.errors) < 1e-12


def test_classical_limit_of_height():
    c = classical_limit_curve(get_symbol("z"), [4, 8, 16, 32])
    assert c.monotone
    assert abs(c.order - 1) <= 0.2
    # the Berezin transform contracts z by (k-1)/(k+1); nodes do not reach the poles exactly
    for k, e in c.rows():
        assert e <= 2 / (k + 1) + 1e-12


def test_classical_limit_of_height_squared():
    c = classical_limit_curve(get_symbol("z2"), [4, 8, 16, 32])
    assert c.monotone
    # pre-asymptotic over this range; the upper octaves are already close to 1
    assert 0.6 < c.order < 1.2
    assert fit_order([1 / 16, 1 / 32], c.errors[2:]) > 0.8


def test_positivity_and_unitality():
    rng = np.random.default_rng(4)
    k = 10
    frame = coherent_frame(k)
    f = rng.uniform(0, 2, size=len(frame.nodes))
    Q = toeplitz_quantize(f, frame)
    assert np.min(np.linalg.eigvalsh(Q.mat)) >= -1e-12
    assert np.min(covariant_symbol(Q, frame).real) >= -1e-10


def test_trace_compatibility():
    k = 9
    f = product_symbol(get_symbol("x"), get_symbol("z"))
    quad = SphereQuadrature.default(k, f.degree)
    Q = quantize_symbol(f, k, quad)
    direct = (k / (2 * math.pi)) * quad.integrate(f(quad.nodes))
    assert np.trace(Q.mat) == pytest.approx(direct, abs=1e-12)
    g = get_symbol("z2")
    Qg = quantize_symbol(g, k)
    # integral of z^2 against eps (total volume 2 pi) is 2 pi / 3
    assert np.trace(Qg.mat).real == pytest.approx(k / 3, abs=1e-10)


def test_equivariance():
    rng = np.random.default_rng(5)
    for name in ("x", "xz", "Y3_1"):
        angles = tuple(rng.uniform(0, 2 * np.pi, 3))
        assert equivariance_residual(get_symbol(name), 7, angles) < 1e-8


def test_dimension_is_k():
    for k in (1, 5, 12):
        assert coherent_frame(k).states.shape[1] == k


def test_dirac_defect_examples():
    x, y = get_symbol("x"), get_symbol("y")
    assert dirac_defect_sphere(x, x, 8) < 1e-12
    ks = [8, 16, 32]
    d = [dirac_defect_sphere(x, y, k) for k in ks]
    assert d[0] > d[1] > d[2]
    assert fit_order([1 / k for k in ks], d) >= 0.8
    for k, v in zip(ks, d):
        assert v == pytest.approx(2 * (k - 1) / (k + 1) ** 2, rel=1e-9)
    z = get_symbol("z")
    assert dirac_defect_sphere(product_symbol(z, z), z, 12) < 1e-12


def test_bracket_of_coordinates():
    # eps is half the area form, so its inverse doubles the area bracket
    pts = random_unit(np.random.default_rng(6), 50)
    x, y, z = (get_symbol(c) for c in "xyz")
    assert np.allclose(sphere_bracket(x, y, pts), BRACKET_C * pts[:, 2])
    assert np.allclose(sphere_bracket(y, z, pts), BRACKET_C * pts[:, 0])
