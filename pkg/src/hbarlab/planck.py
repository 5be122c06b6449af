"""Admissible Planck values from integrality of hbar-dependent areas.

A profile lists the normalized areas ``A_i(hbar)``. Admissible ``hbar`` are
the values where every ``A_i`` is an integer; the leading component is
solved level by level and the rest are filtered. A second screen compares
the derivatives ``A_i'`` to decide whether the areas can come from a single
rescaling ``F`` with rational ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ProfileError

GOLDEN = (1 + math.sqrt(5)) / 2


def fibonacci_lambda(hbar: float) -> float:
    """``lambda(hbar) = 2 hbar / (-1 + sqrt(5 + 4 hbar^2))``."""
    if not hbar > 0:
        raise ValueError("fibonacci_lambda needs hbar > 0")
    return 2 * hbar / (-1 + math.sqrt(5 + 4 * hbar * hbar))


def fibonacci_inverse_area(hbar: float) -> float:
    """``1 / lambda(hbar)`` written without the division by a small difference."""
    if not hbar > 0:
        raise ValueError("needs hbar > 0")
    return (-1 + math.sqrt(5 + 4 * hbar * hbar)) / (2 * hbar)


def fibonacci(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def is_perfect_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def exact_inverse_lambda(F: int) -> Fraction:
    """``1/lambda(1/F) = (sqrt(5F^2 + 4) - F) / 2`` in exact arithmetic.

    Only defined when ``5F^2 + 4`` is a perfect square (``F`` an even-index
    Fibonacci number).
    """
    s = 5 * F * F + 4
    if not is_perfect_square(s):
        raise ValueError(f"5*{F}^2+4 is not a perfect square")
    return Fraction(math.isqrt(s) - F, 2)


@dataclass(frozen=True)
class AreaProfile:
    """Components ``A_i(hbar)`` on ``(0, hbar_max]`` with optional derivatives."""

    name: str
    components: tuple
    derivatives: Optional[tuple] = None
    hbar_max: float = 1.0
    odd: bool = False  # A_i(-hbar) = -A_i(hbar): the set is symmetric under hbar -> -hbar
    rho: Optional[tuple] = None
    provenance: str = ""

    def __post_init__(self):
        if not self.components:
            raise ProfileError("a profile needs at least one component")
        if self.derivatives is not None and len(self.derivatives) != len(self.components):
            raise ProfileError("one derivative per component")
        if not self.hbar_max > 0:
            raise ProfileError("hbar_max must be positive")

    def __len__(self) -> int:
        return len(self.components)

    def values(self, hbar: float) -> np.ndarray:
        return np.array([A(hbar) for A in self.components], dtype=float)

    def derivative(self, i: int, hbar: float, step: float = 1e-5) -> float:
        if self.derivatives is not None:
            return float(self.derivatives[i](hbar))
        h = step * hbar
        A = self.components[i]
        return (A(hbar + h) - A(hbar - h)) / (2 * h)


def laurent_profile(name: str, tables: Sequence[dict], hbar_max: float = 1.0, rho=None) -> AreaProfile:
    """Profile with components ``sum_p c_p hbar^p``; each table maps ``p`` to ``c_p``."""
    comps, ders = [], []
    powers_all = []
    for t in tables:
        terms = [(int(p), float(c)) for p, c in t.items()]
        if not terms:
            raise ProfileError("empty coefficient table")
        powers_all += [p for p, c in terms if c != 0]
        comps.append(lambda h, terms=terms: sum(c * h ** p for p, c in terms))
        ders.append(lambda h, terms=terms: sum(c * p * h ** (p - 1) for p, c in terms if p != 0))
    odd = all(p % 2 for p in powers_all)
    return AreaProfile(name, tuple(comps), tuple(ders), hbar_max, odd, None if rho is None else tuple(rho),
                       provenance="coefficient table")


def single_sphere() -> AreaProfile:
    return AreaProfile("single-sphere", (lambda h: 1 / h,), (lambda h: -1 / h ** 2,), 1.0, True,
                       provenance="builtin")


def fibonacci_profile() -> AreaProfile:
    def d2(h):
        s = math.sqrt(5 + 4 * h * h)
        return (4 * h * h / s - (-1 + s)) / (2 * h * h)

    return AreaProfile("fibonacci", (lambda h: 1 / h, fibonacci_inverse_area), (lambda h: -1 / h ** 2, d2),
                       1.0, True, provenance="builtin")


def golden_linear() -> AreaProfile:
    return AreaProfile("golden-linear", (lambda h: 1 / h, lambda h: GOLDEN / h),
                       (lambda h: -1 / h ** 2, lambda h: -GOLDEN / h ** 2), 1.0, True, provenance="builtin")


def rational_linear() -> AreaProfile:
    return AreaProfile("rational-linear", (lambda h: 2 / h, lambda h: 3 / h),
                       (lambda h: -2 / h ** 2, lambda h: -3 / h ** 2), 1.0, True, provenance="builtin")


PROFILES = {
    "fibonacci": fibonacci_profile,
    "golden-linear": golden_linear,
    "rational-linear": rational_linear,
    "single-sphere": single_sphere,
}


def get_profile(name: str) -> AreaProfile:
    if name not in PROFILES:
        raise KeyError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}")
    return PROFILES[name]()


@dataclass(frozen=True)
class PlanckEntry:
    hbar: float
    integers: Optional[tuple]
    size: Optional[int]

    @property
    def is_marker(self) -> bool:
        return self.hbar == 0.0


@dataclass
class PlanckSet:
    profile: str
    entries: list
    symmetric: bool
    min_hbar: float

    @property
    def admissible(self) -> list[PlanckEntry]:
        return [e for e in self.entries if not e.is_marker]

    def __len__(self) -> int:
        return len(self.admissible)

    def rows(self) -> list[tuple]:
        return [(e.hbar, *e.integers, e.size) for e in self.admissible]

    def to_dict(self) -> dict:
        return {
            "profile": self.profile,
            "min_hbar": self.min_hbar,
            "symmetric_under_sign": self.symmetric,
            "entries": [
                {"hbar": e.hbar, "integers": None if e.integers is None else list(e.integers), "size": e.size}
                for e in self.entries
            ],
        }


def _scan_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Log-spaced grid with ``step`` as the spacing in ``log hbar``."""
    n = max(2, int(math.ceil(math.log(hi / lo) / step)) + 1)
    return np.geomspace(lo, hi, n)


def _bisect(f: Callable[[float], float], lo: float, hi: float) -> float:
    """Root of a monotone ``f`` on ``[lo, hi]``, bisected until the bracket stops shrinking."""
    flo = f(lo)
    if flo == 0:
        return lo
    if f(hi) == 0:
        return hi
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return lo if abs(f(lo)) <= abs(f(hi)) else hi
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid


def bohr_sommerfeld_set(profile: AreaProfile, min_hbar: float, scan_step: float = 0.01,
                        int_tol: float = 1e-10) -> PlanckSet:
    """Integer levels of ``A_1`` by bisection, filtered by integrality of the others."""
    if not 0 < min_hbar < profile.hbar_max:
        raise ProfileError(f"min_hbar must lie in (0, {profile.hbar_max})")
    A1 = profile.components[0]
    grid = _scan_grid(min_hbar, profile.hbar_max, scan_step)
    vals = np.array([A1(h) for h in grid])
    d = np.diff(vals)
    if not (np.all(d < 0) or np.all(d > 0)):
        raise ProfileError(f"the leading component of {profile.name!r} is not monotone on "
                           f"[{min_hbar}, {profile.hbar_max}]; reorder the components")
    lo_v, hi_v = sorted((vals[0], vals[-1]))
    levels = range(math.ceil(lo_v - 1e-12), math.floor(hi_v + 1e-12) + 1)
    entries = []
    for n in levels:
        if n <= 0:
            continue
        h = _bisect(lambda t: A1(t) - n, min_hbar, profile.hbar_max)
        ints = [n]
        ok = abs(A1(h) - n) < int_tol
        for A in profile.components[1:]:
            v = A(h)
            r = round(v)
            if abs(v - r) >= int_tol or r <= 0:
                ok = False
                break
            ints.append(int(r))
        if ok:
            entries.append(PlanckEntry(h, tuple(ints), math.prod(ints)))
    entries.sort(key=lambda e: -e.hbar)
    entries.append(PlanckEntry(0.0, None, None))
    return PlanckSet(profile.name, entries, profile.odd, min_hbar)


def matrix_sizes(pset: PlanckSet) -> list[tuple[float, int]]:
    """Dimension of the tensor-product quantization at every admissible ``hbar``."""
    out = []
    for e in pset.admissible:
        if not e.integers:
            raise ProfileError("an entry without integers has no matrix size")
        out.append((e.hbar, math.prod(e.integers)))
    if not out:
        raise ProfileError("the Planck set has no admissible nonzero hbar")
    return out


# ---------------------------------------------------------------------------
# integrability screen


def continued_fraction(x: float, terms: int = 12) -> list[int]:
    out = []
    for _ in range(terms):
        a = math.floor(x)
        out.append(int(a))
        frac = x - a
        if frac < 1e-12:
            break
        x = 1 / frac
    return out


def rational_witness(x: float, bound: int = 10 ** 6, tol: float = 1e-9) -> Optional[Fraction]:
    """Best ``p/q`` with ``|x - p/q| < tol`` and ``q`` below the effective bound.

    The bound is capped at ``1/sqrt(100 tol)``: every real lies within
    ``1/q^2`` of some ``p/q``, so a larger denominator would certify any
    number as rational.
    """
    eff = max(1, min(bound, int(1 / math.sqrt(100 * tol))))
    f = Fraction(x).limit_denominator(eff)
    return f if abs(float(f) - x) < tol else None


@dataclass
class IntegrabilityReport:
    profile: str
    ratio_stats: dict
    rationality: dict
    monotonicity: dict
    verdict: str
    failing: list
    diagnostics: dict = field(default_factory=dict)
    assumptions: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "profile": self.profile,
            "verdict": self.verdict,
            "failing_clauses": self.failing,
            "ratio_stats": self.ratio_stats,
            "rationality": self.rationality,
            "monotonicity": self.monotonicity,
            "diagnostics": self.diagnostics,
            "assumptions": self.assumptions,
        }


def monodromy_ratio_report(profile: AreaProfile, lo: float = 0.01, hi: Optional[float] = None, n: int = 200,
                           spread_tol: float = 1e-6, bound: int = 10 ** 6, rational_tol: float = 1e-9,
                           rho: Optional[Sequence[float]] = None) -> IntegrabilityReport:
    """Screen a profile against the single-rescaling, rational-ratio form ``rho + c_i / F``."""
    hi = profile.hbar_max if hi is None else hi
    if not 0 < lo < hi <= profile.hbar_max:
        raise ProfileError("scan grid must lie inside (0, hbar_max]")
    grid = np.geomspace(lo, hi, n)
    m = len(profile)
    D = np.array([[profile.derivative(i, h) for h in grid] for i in range(m)])
    noise = 0.0
    if profile.derivatives is None:
        D2 = np.array([[profile.derivative(i, h, step=5e-6) for h in grid] for i in range(m)])
        noise = float(np.max(np.abs(D - D2) / np.maximum(np.abs(D), 1e-300)))
    if np.any(D == 0):
        raise ProfileError("a derivative vanishes on the grid; ratios are undefined")

    stats, rational, failing = {}, {}, []
    for i in range(m):
        for j in range(i + 1, m):
            r = D[i] / D[j]
            mean = float(np.mean(r))
            spread = float((r.max() - r.min()) / abs(mean))
            key = f"{i + 1}/{j + 1}"
            stats[key] = {"min": float(r.min()), "max": float(r.max()), "relative_spread": spread}
            if spread >= spread_tol:
                if "ratio_varies" not in failing:
                    failing.append("ratio_varies")
                rational[key] = {"constant": False}
                continue
            w = rational_witness(mean, bound, rational_tol)
            rational[key] = {
                "constant": True,
                "value": mean,
                "continued_fraction": continued_fraction(mean),
                "witness": None if w is None else f"{w.numerator}/{w.denominator}",
            }
            if w is None and "irrational_ratio" not in failing:
                failing.append("irrational_ratio")

    rho1 = 0.0 if rho is None else float(rho[0])
    A1 = np.array([profile.components[0](h) for h in grid])
    Fp = -D[0] / (A1 - rho1) ** 2  # F proportional to 1/(A_1 - rho_1)
    signs = np.sign(Fp)
    mono = {"positive": int(np.sum(signs > 0)), "negative": int(np.sum(signs < 0)), "zero": int(np.sum(signs == 0))}
    if mono["negative"] or mono["zero"]:
        failing.append("F_not_monotone")

    diagnostics = {"derivative_noise": noise, "grid": [lo, hi, n]}
    if noise > spread_tol:
        verdict = "indeterminate"
        diagnostics["reason"] = f"finite-difference noise {noise:.2e} exceeds the spread tolerance {spread_tol:.1e}"
    else:
        verdict = "nonintegrable" if failing else "integrable-compatible"
    return IntegrabilityReport(
        profile.name, stats, rational, mono, verdict, failing, diagnostics,
        assumptions=["the base is simply connected (not checked)",
                     "periods are locally constant, so one area per generator suffices"],
    )
