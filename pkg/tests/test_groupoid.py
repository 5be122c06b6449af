from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hbarlab.groupoid import (
    ConstantPoissonData,
    DifferentialFormModel,
    check_axioms,
    check_forms,
    check_target_poisson,
    coboundary,
    constant_pi_model,
    grading_residual,
    jacobi_residual,
    pair_groupoid_model,
    squared_coordinate_form,
    su2_bracket_family,
    triple_coboundary,
)

STD = ConstantPoissonData.standard(2)
N = 2


@pytest.fixture(scope="module")
def model():
    return constant_pi_model(STD)


def split_pair(p):
    return p[:N], p[N:2 * N], p[2 * N:3 * N], p[3 * N], p[3 * N + 1], p[3 * N + 2]


def test_poisson_data_validation():
    with pytest.raises(ValueError):
        ConstantPoissonData(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        # on R^4 the two symplectic planes get different scales: not a complex structure
        ConstantPoissonData(ConstantPoissonData.standard(4).Pi, metric=np.diag([1.0, 4.0, 1.0, 1.0]))
    d = ConstantPoissonData(2 * STD.Pi, metric=np.eye(2))
    assert d.pairing([1, 0], [0, 1]) == pytest.approx(2.0)


def test_constant_pi_axioms(model):
    rep = check_axioms(model, 10_000)
    assert rep.passed, rep.residuals
    assert rep.tol == 1e-12
    assert set(rep.residuals) >= {"associativity", "s_and_t_a", "s_and_t_b", "right_unit", "left_unit",
                                  "s_inv_t_a", "s_inv_t_b", "left_inverse", "right_inverse"}


def test_pair_groupoid_axioms():
    rep = check_axioms(pair_groupoid_model(1), 1000)
    assert rep.passed
    assert max(rep.residuals.values()) == 0.0


def test_broken_model_fails_with_witness():
    rep = check_axioms(constant_pi_model(STD, broken=True), 1000)
    assert rep.residuals["associativity"] > 0.1
    assert rep.witnesses["associativity"] is not None
    assert rep.verdict == "fail"


def test_nan_residual_fails(model):
    import dataclasses

    bad = dataclasses.replace(model, inv=lambda g: np.full_like(g, np.nan))
    assert not check_axioms(bad, 100).passed


def test_zero_pi_multiplication_is_addition():
    m = constant_pi_model(ConstantPoissonData(np.zeros((2, 2))))
    p = m.sample_pair(np.random.default_rng(0), 50)
    x, y, yp, z, zp, h = (np.asarray(a) for a in zip(*map(split_pair, p)))
    out = m.mul(p)
    want = np.column_stack([x, y + yp, z + zp, h])
    assert np.allclose(out, want, atol=1e-15)


def test_heisenberg_fibers(model):
    p = model.sample_pair(np.random.default_rng(1), 50)
    p[:, -1] = 0.0
    out = model.mul(p)
    for row, o in zip(p, out):
        x, y, yp, z, zp, _ = split_pair(row)
        assert np.allclose(o, np.r_[x, y + yp, z + zp - 0.5 * STD.pairing(y, yp), 0.0], atol=1e-15)


def test_contact_form_is_multiplicative(model):
    rng = np.random.default_rng(2)
    for p in model.sample_pair(rng, 50):
        assert np.max(np.abs(coboundary(model.forms["theta"], model, p))) < 1e-9


def test_coboundary_of_functions(model):
    rng = np.random.default_rng(3)
    for p in model.sample_pair(rng, 50):
        x, y, yp, z, zp, h = split_pair(p)
        assert coboundary(model.functions["hbar_z"], model, p) == pytest.approx(0.5 * h * STD.pairing(y, yp), abs=1e-9)
        assert coboundary(lambda q: 3.5, model, p) == pytest.approx(3.5)


def test_coboundary_squares_to_zero(model):
    rng = np.random.default_rng(4)

    def F(pp):
        return coboundary(lambda q: np.sin(q[0]) * q[2] + q[4] * q[5] ** 2, model, pp)

    for t in model.sample_triple(rng, 20):
        assert abs(triple_coboundary(F, model, t)) < 1e-9


def test_symplectic_form(model):
    fr = check_forms(model, model.forms["omega"])
    assert fr.verdict == "pass"
    assert fr.closedness == 0.0
    assert fr.multiplicativity < 1e-9
    assert abs(fr.min_abs_det - 1.0) < 1e-12


def test_degenerate_forms(model):
    W = np.zeros((6, 6))
    W[0, 2], W[2, 0] = 1.0, -1.0
    flat = DifferentialFormModel(2, lambda p: W)
    assert check_forms(model, flat, check_multiplicative=False).verdict == "degenerate"
    fr = check_forms(pair_groupoid_model(1), squared_coordinate_form(), probe_points=[[0.0, 0.3]],
                     check_multiplicative=False)
    assert fr.verdict == "degenerate"
    assert fr.closedness < 1e-9
    assert abs(fr.witness["min_abs_det"][0]) < 1e-6


def test_target_map_is_poisson(model):
    n = N
    cases = [
        (lambda b: b[0], lambda b: b[1]),
        (lambda b: b[0] ** 2 + b[1], lambda b: np.sin(b[1]) * b[2]),
        (lambda b: b[n], lambda b: b[0] * b[1]),
    ]
    for f, g in cases:
        rep = check_target_poisson(model, model.forms["omega"], f, g, samples=100)
        assert rep.passed, rep.residuals


def test_hbar_is_casimir(model):
    rep = check_target_poisson(model, model.forms["omega"], lambda b: b[N], lambda b: b[0] ** 3 - b[1], samples=50)
    assert rep.residuals["target_poisson"] < 1e-9


def test_grading_commutes(model):
    for lam in (0.3, 1.7, 4.0):
        assert grading_residual(model, lam) < 1e-12


def test_su2_family_limits():
    C = su2_bracket_family(1.0)
    assert C[0, 1, 2] == 1 and C[1, 2, 0] == 1 and C[2, 0, 1] == 1
    H = su2_bracket_family(0.0)
    assert H[0, 1, 2] == 1
    assert np.count_nonzero(H) == 2


@settings(max_examples=100, deadline=None)
@given(st.floats(-1e3, 1e3, allow_nan=False))
def test_jacobi_identity(h):
    assert jacobi_residual(su2_bracket_family(h)) == 0.0
