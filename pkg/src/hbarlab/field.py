"""Sampled continuous fields of algebras over an admissible hbar index.

A field pairs a backend (fuzzy sphere matrices or lattice twisted algebras)
with a finite set of hbar values. Fibers at hbar > 0 are built on demand;
the hbar = 0 fiber is the commutative algebra of symbols. Continuity is
measured through norms and deformation defects of symbol sections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import fuzzy, moyal
from .errors import FieldValidationError, InsufficientDataError
from .groupoid import ConstantPoissonData
from .numerics import fit_order, parallel_map
from .planck import PlanckSet

BACKENDS = ("fuzzy", "moyal")
MOYAL_CASES = ("function", "flat_V")
RECIPROCAL_TOL = 1e-9


@dataclass(frozen=True)
class Fiber:
    hbar: float
    dim: Optional[int]
    norm_proxy: str
    k: Optional[int] = None


@dataclass(frozen=True)
class FieldModel:
    backend: str
    index: tuple  # strictly decreasing, ends with 0.0
    fibers: tuple
    case: Optional[str] = None
    data: Optional[ConstantPoissonData] = None
    n_points: int = 64

    @property
    def Pi(self) -> np.ndarray:
        if self.case == "function" or self.data is None:
            return np.zeros((2, 2))
        return self.data.Pi

    def fiber(self, hbar: float) -> Fiber:
        for f in self.fibers:
            if f.hbar == hbar:
                return f
        raise KeyError(hbar)

    @property
    def positive(self) -> list[float]:
        return [h for h in self.index if h > 0]


def _reciprocal_integer(hbar: float) -> int:
    k = round(1 / hbar)
    if k < 1 or abs(1 / hbar - k) > RECIPROCAL_TOL * max(1, k):
        raise FieldValidationError(
            f"hbar = {hbar!r} is not 1/k: the Bohr-Sommerfeld condition on the sphere "
            "admits hbar only when 1/hbar is a positive integer"
        )
    return k


def assemble_field(backend: str, index: Union[PlanckSet, Sequence[float], None] = None, k_max: Optional[int] = None,
                   case: str = "flat_V", data: Optional[ConstantPoissonData] = None, n_points: int = 64) -> FieldModel:
    """Validate the index against the backend and record per-fiber metadata."""
    if backend not in BACKENDS:
        raise FieldValidationError(f"backend must be one of {BACKENDS}")
    if isinstance(index, PlanckSet):
        hbars = [e.hbar for e in index.admissible]
    elif index is None:
        if backend != "fuzzy" or k_max is None:
            raise FieldValidationError("an hbar index is required")
        hbars = [1.0 / k for k in range(1, k_max + 1)]
    else:
        hbars = [float(h) for h in index]
    hbars = [h for h in hbars if h != 0.0]
    if any(h < 0 for h in hbars):
        raise FieldValidationError("negative hbar is outside every shipped backend")
    fibers = []
    if backend == "fuzzy":
        ks = sorted({_reciprocal_integer(h) for h in hbars})
        if k_max is not None:
            ks = [k for k in ks if k <= k_max]
        if ks and ks[-1] > fuzzy.K_MAX_MATRIX:
            raise FieldValidationError(f"fuzzy fibers are capped at k = {fuzzy.K_MAX_MATRIX}")
        hbars = [1.0 / k for k in ks]
        fibers = [Fiber(1.0 / k, k, "operator norm (largest singular value)", k) for k in ks]
        fibers.append(Fiber(0.0, None, "sup over the sphere"))
    else:
        if case not in MOYAL_CASES:
            raise FieldValidationError(f"moyal field case must be one of {MOYAL_CASES}")
        data = ConstantPoissonData.standard(2, with_metric=False) if data is None else data
        if data.n != 2:
            raise FieldValidationError("the moyal field works on a two-dimensional symbol grid")
        hbars = sorted(set(hbars))
        fibers = [Fiber(h, n_points ** 2, "sup over the symbol grid") for h in hbars]
        fibers.append(Fiber(0.0, None, "sup over the symbol grid"))
    if not hbars:
        raise FieldValidationError("the hbar index is empty")
    hbars = sorted(hbars, reverse=True)
    fibers = sorted(fibers, key=lambda f: -f.hbar)
    return FieldModel(backend, tuple(hbars) + (0.0,), tuple(fibers), case if backend == "moyal" else None,
                      data, n_points)


@dataclass
class SymbolSection:
    model: FieldModel
    symbol: object  # fuzzy.Symbol or moyal.LatticeFunction
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = [h for h in self.model.index if h not in self.values]
        if missing:
            raise FieldValidationError(f"section misses fibers at hbar = {missing}")


def _sphere_sup(f: fuzzy.Symbol, n: int = 181) -> float:
    th = np.linspace(0, math.pi, n)
    ph = np.linspace(0, 2 * math.pi, 2 * n, endpoint=False)
    T, P = np.meshgrid(th, ph, indexing="ij")
    pts = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1).reshape(-1, 3)
    return float(np.max(np.abs(f(pts))))


def _as_symbol(model: FieldModel, f):
    if model.backend == "fuzzy":
        return fuzzy.get_symbol(f) if isinstance(f, str) else f
    if isinstance(f, moyal.LatticeFunction):
        return f
    grid = moyal.symbol_grid(2, model.n_points)
    if isinstance(f, str):
        f = moyal_symbol(f)
    return moyal.LatticeFunction.from_function(grid, f)


def moyal_symbol(name: str):
    """Builtin smooth, rapidly decaying symbols on the plane."""
    table = {
        "constant": lambda X: np.exp(-0.0 * X[..., 0]),
        "gaussian": lambda X: np.exp(-np.sum(X * X, axis=-1) / 2),
        "x1-window": lambda X: X[..., 0] * np.exp(-np.sum(X * X, axis=-1) / 4),
        "x2-window": lambda X: X[..., 1] * np.exp(-np.sum(X * X, axis=-1) / 4),
    }
    if name not in table:
        raise KeyError(f"unknown lattice symbol {name!r}; choose from {sorted(table)}")
    return table[name]


def _fiber_value(model: FieldModel, f, hbar: float):
    if hbar == 0.0:
        return f
    if model.backend == "fuzzy":
        return fuzzy.quantize_symbol(f, model.fiber(hbar).k)
    return moyal.weyl_quantize(f, hbar)


def symbol_section(model: FieldModel, f) -> SymbolSection:
    """``values[hbar] = Q_hbar(f)`` on every fiber and ``values[0] = f``."""
    f = _as_symbol(model, f)
    vals = parallel_map(lambda h: _fiber_value(model, f, h), list(model.index))
    return SymbolSection(model, f, dict(zip(model.index, vals)))


def _norm(model: FieldModel, value, hbar: float) -> float:
    if model.backend == "fuzzy":
        return _sphere_sup(value) if hbar == 0.0 else value.op_norm()
    if hbar == 0.0:
        return value.sup()
    return moyal.inverse_weyl(value, _symbol_grid(model)).sup()


def _symbol_grid(model: FieldModel) -> moyal.Grid:
    return moyal.symbol_grid(2, model.n_points)


@dataclass
class ContinuityReport:
    backend: str
    norm_proxy: str
    rows: list  # dicts keyed by COLUMNS
    orders: dict
    notes: dict = field(default_factory=dict)

    COLUMNS = ("hbar", "norm", "norm_gap", "symbol_error", "product_defect", "dirac_defect")

    def table(self) -> list[list]:
        return [[r.get(c) for c in self.COLUMNS] for r in self.rows]

    def to_dict(self) -> dict:
        return {"backend": self.backend, "norm_proxy": self.norm_proxy, "columns": list(self.COLUMNS),
                "rows": self.rows, "orders": self.orders, "notes": self.notes}


def _fit(hs, errs) -> Optional[float]:
    if max(errs) < 1e-10:
        return None  # the defect vanishes identically
    o = fit_order(hs, errs)
    return None if math.isnan(o) else o


def continuity_report(section: SymbolSection, g=None, fit_window: Optional[tuple[float, float]] = None) -> ContinuityReport:
    """Norms, norm gaps and (with ``g``) deformation and Dirac defects per fiber, plus fitted orders in hbar.

    ``fit_window = (lo, hi)`` restricts the order fits to ``lo <= hbar <= hi``;
    every fiber still gets a row.
    """
    model = section.model
    hs = model.positive
    if len(hs) < 3:
        raise InsufficientDataError(f"order fits need at least 3 positive hbar values, got {len(hs)}")
    f = section.symbol
    g = None if g is None else _as_symbol(model, g)
    norm0 = _norm(model, section.values[0.0], 0.0)

    def row(h):
        a = section.values[h]
        r = {"hbar": h}
        r["norm"] = _norm(model, a, h)
        r["norm_gap"] = abs(r["norm"] - norm0)
        r["symbol_error"] = _symbol_error(model, f, a, h)
        if g is not None:
            r["product_defect"], r["dirac_defect"] = _defects(model, f, g, a, h)
        return r

    rows = parallel_map(row, hs)
    zero = {"hbar": 0.0, "norm": norm0, "norm_gap": 0.0, "symbol_error": 0.0}
    if g is not None:
        zero["product_defect"] = 0.0
        zero["dirac_defect"] = 0.0
    lo, hi = (0.0, math.inf) if fit_window is None else fit_window
    fitted = [r for r in rows if lo * (1 - 1e-12) <= r["hbar"] <= hi * (1 + 1e-12)]
    if len(fitted) < 3:
        raise InsufficientDataError(f"the fit window {fit_window} holds {len(fitted)} fibers; at least 3 are needed")
    rows.append(zero)
    fit_h = [r["hbar"] for r in fitted]
    cols = ["norm_gap", "symbol_error"] + (["product_defect", "dirac_defect"] if g is not None else [])
    orders = {c: _fit(fit_h, [r[c] for r in fitted]) for c in cols}
    notes = {"fit": "least-squares slope of log(defect) against log(hbar); null when the defect vanishes",
             "fit_hbars": fit_h}
    return ContinuityReport(model.backend, model.fibers[0].norm_proxy, rows, orders, notes)


def _symbol_error(model: FieldModel, f, a, h: float) -> float:
    """Distance between the fiber element read back as a symbol and ``f``."""
    if model.backend == "fuzzy":
        k = model.fiber(h).k
        quad = fuzzy.SphereQuadrature.default(k, f.degree)
        frame = fuzzy.coherent_frame(k, quad)
        return float(np.max(np.abs(fuzzy.covariant_symbol(a, frame) - f(quad.nodes))))
    back = moyal.inverse_weyl(a, _symbol_grid(model))
    return float(np.max(np.abs(back.values - f.values)))


def _defects(model: FieldModel, f, g, a, h: float) -> tuple[float, float]:
    if model.backend == "fuzzy":
        k = model.fiber(h).k
        fg = fuzzy.product_symbol(f, g)
        Qg = fuzzy.quantize_symbol(g, k)
        Qfg = fuzzy.quantize_symbol(fg, k)
        prod = float(np.linalg.norm((a @ Qg).mat - Qfg.mat, 2))
        return prod, fuzzy.dirac_defect_sphere(f, g, k)
    Pi = model.Pi
    qg = moyal.weyl_quantize(g, h)
    qfg = moyal.weyl_quantize(moyal.LatticeFunction(f.grid, (f.values * g.values).real), h)
    prod = (moyal.twisted_convolution(a, qg, h, Pi) - qfg).sup()
    return prod, moyal.dirac_defect(f, g, h, Pi)
