from __future__ import annotations

import math
from fractions import Fraction

import pytest

from hbarlab.errors import ProfileError
from hbarlab.planck import (
    GOLDEN,
    AreaProfile,
    PlanckSet,
    bohr_sommerfeld_set,
    continued_fraction,
    exact_inverse_lambda,
    fibonacci,
    fibonacci_lambda,
    get_profile,
    is_perfect_square,
    laurent_profile,
    matrix_sizes,
    monodromy_ratio_report,
    rational_witness,
)


def test_fibonacci_lambda_values():
    assert fibonacci_lambda(1.0) == pytest.approx(1.0, abs=1e-15)
    assert fibonacci_lambda(1 / 3) == pytest.approx(0.5, abs=1e-15)
    assert fibonacci_lambda(1e-7) / 1e-7 == pytest.approx(GOLDEN, rel=1e-9)
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            fibonacci_lambda(bad)


def test_fibonacci_identity_with_exact_oracle():
    for k in range(1, 11):
        F = fibonacci(2 * k)
        assert is_perfect_square(5 * F * F + 4)
        assert exact_inverse_lambda(F) == fibonacci(2 * k - 1)
        assert abs(1 / fibonacci_lambda(1 / F) - fibonacci(2 * k - 1)) < 1e-9
    with pytest.raises(ValueError):
        exact_inverse_lambda(4)


def test_single_sphere_set():
    s = bohr_sommerfeld_set(get_profile("single-sphere"), 0.1)
    assert [e.integers[0] for e in s.admissible] == list(range(1, 11))
    for e in s.admissible:
        assert e.hbar == pytest.approx(1 / e.integers[0], abs=1e-15)
        assert e.size == e.integers[0]
    assert s.entries[-1].is_marker
    assert s.symmetric


def test_fibonacci_set():
    s = bohr_sommerfeld_set(get_profile("fibonacci"), 0.005)
    rows = s.rows()
    want = [(1, 1, 1), (3, 2, 6), (8, 5, 40), (21, 13, 273), (55, 34, 1870)]
    for (h, a, b, size), (n, m, sz) in zip(rows, want):
        assert h == pytest.approx(1 / n, abs=1e-14)
        assert (a, b, size) == (n, m, sz)
    assert rows[5][1:] == (144, 89, 12816)
    hs = [e.hbar for e in s.entries]
    assert all(a > b for a, b in zip(hs, hs[1:]))


def test_entries_revalidate():
    prof = get_profile("fibonacci")
    for e in bohr_sommerfeld_set(prof, 0.001).admissible:
        for v, n in zip(prof.values(e.hbar), e.integers):
            assert abs(v - n) < 1e-10


def test_golden_linear_set_is_empty():
    s = bohr_sommerfeld_set(get_profile("golden-linear"), 1e-3)
    assert len(s) == 0
    assert s.entries[-1].is_marker


def test_refinement_stability():
    prof = get_profile("fibonacci")
    a = bohr_sommerfeld_set(prof, 0.002, scan_step=0.01)
    b = bohr_sommerfeld_set(prof, 0.002, scan_step=0.005)
    assert [e.integers for e in a.admissible] == [e.integers for e in b.admissible]
    assert max(abs(x.hbar - y.hbar) for x, y in zip(a.admissible, b.admissible)) <= 1e-12


def test_nonmonotone_leading_component_is_refused():
    prof = AreaProfile("bump", (lambda h: 1 / h + 50 * math.sin(20 * h),))
    with pytest.raises(ProfileError):
        bohr_sommerfeld_set(prof, 0.05)


def test_matrix_sizes():
    s = bohr_sommerfeld_set(get_profile("fibonacci"), 0.01)
    assert [sz for _, sz in matrix_sizes(s)][:4] == [1, 6, 40, 273]
    sph = bohr_sommerfeld_set(get_profile("single-sphere"), 0.2)
    assert [sz for _, sz in matrix_sizes(sph)] == [1, 2, 3, 4, 5]
    with pytest.raises(ProfileError):
        matrix_sizes(bohr_sommerfeld_set(get_profile("golden-linear"), 0.01))
    with pytest.raises(ProfileError):
        AreaProfile("empty", ())


def test_rational_witness():
    assert rational_witness(2 / 3) == Fraction(2, 3)
    assert rational_witness(GOLDEN) is None
    assert continued_fraction(GOLDEN, 8) == [1] * 8
    assert continued_fraction(2 / 3) == [0, 1, 2]


def test_ratio_report_integrable():
    rep = monodromy_ratio_report(get_profile("rational-linear"))
    assert rep.verdict == "integrable-compatible"
    assert rep.rationality["1/2"]["witness"] == "2/3"
    assert rep.monotonicity["negative"] == 0


def test_ratio_report_golden():
    rep = monodromy_ratio_report(get_profile("golden-linear"))
    assert rep.verdict == "nonintegrable"
    assert rep.failing == ["irrational_ratio"]


def test_ratio_report_fibonacci():
    rep = monodromy_ratio_report(get_profile("fibonacci"))
    assert rep.verdict == "nonintegrable"
    assert "ratio_varies" in rep.failing
    assert rep.ratio_stats["1/2"]["relative_spread"] > 0.1


def test_allowed_form_is_compatible():
    # c_i / F with F(h) = h + h^3 and rational c ratios, derivatives from finite differences
    F = lambda h: h + h ** 3  # noqa: E731
    prof = AreaProfile("shared-F", (lambda h: 3 / F(h), lambda h: 5 / F(h), lambda h: 7 / F(h)))
    rep = monodromy_ratio_report(prof, lo=0.05)
    assert rep.verdict == "integrable-compatible", rep.to_dict()
    assert rep.rationality["1/2"]["witness"] == "3/5"


def test_decreasing_F_is_flagged():
    prof = AreaProfile("growing", (lambda h: 1 + h, lambda h: 2 + 2 * h), (lambda h: 1.0, lambda h: 2.0))
    rep = monodromy_ratio_report(prof)
    assert "F_not_monotone" in rep.failing


def test_coefficient_table_profile():
    prof = laurent_profile("table", [{-1: 2.0}, {-1: 3.0}])
    assert prof.odd
    assert monodromy_ratio_report(prof).verdict == "integrable-compatible"
    s = bohr_sommerfeld_set(prof, 0.05)
    assert all(e.integers[0] % 2 == 0 for e in s.admissible)


def test_planck_set_serializes_marker():
    d = bohr_sommerfeld_set(get_profile("single-sphere"), 0.5).to_dict()
    assert d["entries"][-1] == {"hbar": 0.0, "integers": None, "size": None}
    assert isinstance(PlanckSet("x", [], True, 0.1).to_dict()["entries"], list)
