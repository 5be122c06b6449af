from __future__ import annotations

import numpy as np
import pytest

from hbarlab.errors import FieldValidationError, InsufficientDataError
from hbarlab.field import (
    assemble_field,
    continuity_report,
    moyal_symbol,
    symbol_section,
)
from hbarlab.fuzzy import get_symbol
from hbarlab.groupoid import ConstantPoissonData
from hbarlab.moyal import LatticeFunction, symbol_grid
from hbarlab.numerics import fit_order
from hbarlab.planck import bohr_sommerfeld_set, get_profile

KS = [4, 8, 16, 32]


def fuzzy_field(ks=KS):
    return assemble_field("fuzzy", [1 / k for k in ks])


def test_fuzzy_field_from_planck_set():
    pset = bohr_sommerfeld_set(get_profile("single-sphere"), 0.01)
    m = assemble_field("fuzzy", pset, k_max=8)
    assert [f.dim for f in m.fibers] == [1, 2, 3, 4, 5, 6, 7, 8, None]
    assert m.index[-1] == 0.0
    assert all(a > b for a, b in zip(m.index, m.index[1:]))
    assert m.fibers[-1].norm_proxy.startswith("sup")


def test_fuzzy_field_rejects_non_reciprocal_hbar():
    with pytest.raises(FieldValidationError) as e:
        assemble_field("fuzzy", [0.5, 0.3])
    assert "Bohr-Sommerfeld" in str(e.value)


def test_empty_index_is_refused():
    with pytest.raises(FieldValidationError):
        assemble_field("fuzzy", [])
    with pytest.raises(FieldValidationError):
        assemble_field("moyal", [0.0])
    with pytest.raises(FieldValidationError):
        assemble_field("nope", [1.0])


def test_moyal_function_case_is_commutative():
    m = assemble_field("moyal", [0.4, 0.2, 0.1], case="function", n_points=64)
    assert np.all(m.Pi == 0)
    sec = symbol_section(m, "gaussian")
    rep = continuity_report(sec, "x1-window")
    for r in rep.rows:
        assert r["product_defect"] < 1e-10
        assert r["dirac_defect"] < 1e-10
    assert rep.orders["product_defect"] is None


def test_constant_section():
    sec = symbol_section(fuzzy_field(), "constant")
    for k in KS:
        assert np.max(np.abs(sec.values[1 / k].mat - np.eye(k))) < 1e-10
    rep = continuity_report(sec, "constant")
    for r in rep.rows:
        assert r["norm"] == pytest.approx(1.0, abs=1e-10)
        assert r["product_defect"] < 1e-10 and r["dirac_defect"] < 1e-10
    assert all(v is None for v in rep.orders.values())


def test_fuzzy_height_section_spectra():
    sec = symbol_section(fuzzy_field(), "z")
    for k in KS:
        ev = np.linalg.eigvalsh(sec.values[1 / k].mat)
        assert ev.max() == pytest.approx((k - 1) / (k + 1), abs=1e-13)
        assert ev.min() == pytest.approx(-(k - 1) / (k + 1), abs=1e-13)


def test_moyal_gaussian_section():
    m = assemble_field("moyal", [0.5, 0.25, 0.125], n_points=64)
    sec = symbol_section(m, "gaussian")
    q = sec.values[0.5]
    Y = q.grid.mesh()
    want = np.exp(-0.5 * np.sum(Y * Y, axis=-1)) / (2 * np.pi)
    assert np.max(np.abs(q.values - want)) < 1e-12


def test_fuzzy_norm_gap_order():
    rep = continuity_report(symbol_section(fuzzy_field(), "z"))
    for r in rep.rows[:-1]:
        k = round(1 / r["hbar"])
        assert r["norm_gap"] == pytest.approx(2 / (k + 1), abs=1e-12)
    assert abs(rep.orders["norm_gap"] - 1) < 0.2


def test_fuzzy_product_defect_order():
    m = fuzzy_field([8, 16, 32])
    rep = continuity_report(symbol_section(m, "z"), "x")
    d = [r["product_defect"] for r in rep.rows[:-1]]
    assert d[0] > d[1] > d[2]
    assert rep.orders["product_defect"] >= 0.8


def test_fuzzy_product_defect_over_full_range_is_preasymptotic():
    rep = continuity_report(symbol_section(fuzzy_field(), "z"), "x")
    assert 0.6 < rep.orders["product_defect"] < 0.8
    hs = [r["hbar"] for r in rep.rows[:-1]]
    assert fit_order(hs[1:], [r["product_defect"] for r in rep.rows[1:-1]]) >= 0.8


def test_fit_window():
    m = assemble_field("fuzzy", k_max=32, index=None)
    rep = continuity_report(symbol_section(m, "z"), fit_window=(1 / 32, 1 / 8))
    assert rep.notes["fit_hbars"][0] == pytest.approx(1 / 8)
    assert len(rep.notes["fit_hbars"]) == 25
    with pytest.raises(InsufficientDataError):
        continuity_report(symbol_section(m, "z"), fit_window=(0.6, 1.0))


def test_too_few_fibers():
    with pytest.raises(InsufficientDataError):
        continuity_report(symbol_section(fuzzy_field([4, 8]), "z"))


def test_norm_continuity_at_zero():
    rep = continuity_report(symbol_section(fuzzy_field(), "z"))
    zero = rep.rows[-1]
    assert zero["hbar"] == 0.0 and zero["norm"] == pytest.approx(1.0, abs=1e-12)
    norms = [r["norm"] for r in rep.rows[:-1]]
    assert all(a <= b + 1e-12 for a, b in zip(norms, norms[1:]))
    assert rep.rows[-2]["norm_gap"] < 0.15 * zero["norm"]


def test_evaluation_compatibility():
    m = fuzzy_field()
    sec = symbol_section(m, "xz")
    assert sec.values[0.0] == get_symbol("xz")
    rep = continuity_report(sec)
    pts = np.array([[np.sqrt(0.5), 0.0, np.sqrt(0.5)]])
    assert abs(rep.rows[-1]["norm"] - abs(get_symbol("xz")(pts)[0])) < 1e-6


def test_self_adjoint_fibers():
    sec = symbol_section(fuzzy_field(), "Y3_1")
    for k in KS:
        assert sec.values[1 / k].is_hermitian(0.0)
    m = assemble_field("moyal", [0.5, 0.25, 0.125], n_points=64)
    msec = symbol_section(m, "x1-window")
    for h in m.positive:
        q = msec.values[h]
        inner = q.values[1:, 1:]
        assert np.array_equal(q.involution().values[1:, 1:], np.conj(np.flip(inner)))
        assert np.max(np.abs(np.conj(np.flip(inner)) - inner)) < 1e-15


def test_moyal_flat_field_orders():
    m = assemble_field("moyal", [0.4, 0.2, 0.1], data=ConstantPoissonData.standard(2, with_metric=False), n_points=64)
    rep = continuity_report(symbol_section(m, "gaussian"), "x1-window")
    assert rep.orders["dirac_defect"] >= 1.8
    assert rep.orders["product_defect"] >= 0.8


def test_lattice_symbol_input():
    g = symbol_grid(2, 32)
    f = LatticeFunction.from_function(g, moyal_symbol("gaussian"))
    m = assemble_field("moyal", [0.4, 0.2, 0.1], n_points=64)
    assert symbol_section(m, f).values[0.0] is f
    with pytest.raises(KeyError):
        moyal_symbol("nope")
