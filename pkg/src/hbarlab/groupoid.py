"""Lie groupoids given by explicit structure maps on coordinate models.

Every map acts on stacked points (arrays of shape ``(N, d)``). Composable
pairs and triples are explicit parameterizations, so no fiber product is
ever solved numerically. The harness checks the groupoid diagrams pointwise,
pulls forms back along the structure maps to test multiplicativity, and
checks that the target map is Poisson.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DerivativeOracleError
from .numerics import jacobian_fd
from .reports import CheckReport

Map = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ConstantPoissonData:
    """A constant bivector ``Pi`` on ``V = R^n``, with an optional metric."""

    Pi: np.ndarray
    metric: Optional[np.ndarray] = None

    def __post_init__(self):
        Pi = np.atleast_2d(np.asarray(self.Pi, float))
        if Pi.shape[0] != Pi.shape[1]:
            raise ValueError("Pi must be square")
        if not np.allclose(Pi, -Pi.T, atol=1e-14):
            raise ValueError("Pi must be antisymmetric")
        object.__setattr__(self, "Pi", Pi)
        if self.metric is not None:
            g = np.atleast_2d(np.asarray(self.metric, float))
            if g.shape != Pi.shape or not np.allclose(g, g.T):
                raise ValueError("metric must be symmetric with the shape of Pi")
            if np.any(np.linalg.eigvalsh(g) <= 0):
                raise ValueError("metric must be positive definite")
            if abs(np.linalg.det(Pi)) > 1e-12:
                J = np.linalg.solve(g, Pi)
                J2 = J @ J
                c2 = -J2[0, 0]
                if c2 <= 0 or not np.allclose(J2, -c2 * np.eye(self.n), atol=1e-10 * max(1.0, c2)):
                    raise ValueError("metric is not compatible with Pi: (g^-1 Pi)^2 is not a negative multiple of Id")
            object.__setattr__(self, "metric", g)

    @property
    def n(self) -> int:
        return self.Pi.shape[0]

    @classmethod
    def standard(cls, n: int = 2, with_metric: bool = True) -> "ConstantPoissonData":
        if n % 2:
            raise ValueError("the standard symplectic bivector needs even n")
        Pi = np.zeros((n, n))
        for i in range(0, n, 2):
            Pi[i, i + 1], Pi[i + 1, i] = 1.0, -1.0
        return cls(Pi, np.eye(n) if with_metric else None)

    def pairing(self, y, yp) -> np.ndarray:
        """``Pi(y, y') = y^T Pi y'`` along the last axis."""
        return np.einsum("...i,ij,...j->...", y, self.Pi, yp)

    def sharp(self, y) -> np.ndarray:
        """``#_Pi y = Pi(y, .)`` for covectors stacked on the last axis."""
        return np.asarray(y) @ self.Pi


@dataclass(frozen=True)
class DifferentialFormModel:
    """A 1- or 2-form in arrow coordinates.

    ``eval`` takes a single point and returns a coefficient vector (degree 1)
    or an antisymmetric matrix (degree 2). ``d`` optionally returns the
    exterior derivative's coefficients in closed form.
    """

    degree: int
    eval: Callable[[np.ndarray], np.ndarray]
    d: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    def __post_init__(self):
        if self.degree not in (1, 2):
            raise ValueError("only 1-forms and 2-forms are supported")

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.eval(np.asarray(p, float)), float)


@dataclass
class GroupoidChartModel:
    """Structure maps and samplers for a groupoid on coordinate models.

    Face maps of the triples model: ``d3`` forgets the last arrow, ``d0`` the
    first, ``d1`` multiplies the first two and ``d2`` the last two. The
    ``*_pair`` sections build the pairs used in the unit and inverse
    diagrams: right unit ``(g, 1_s(g))``, left unit ``(1_t(g), g)``, left
    inverse ``(g^-1, g)`` and right inverse ``(g, g^-1)``.
    """

    name: str
    dim_base: int
    dim_arrow: int
    dim_pairs: int
    dim_triples: int
    unit: Map
    inv: Map
    src: Map
    tgt: Map
    pr1: Map
    pr2: Map
    mul: Map
    d0: Map
    d1: Map
    d2: Map
    d3: Map
    right_unit_pair: Map
    left_unit_pair: Map
    left_inv_pair: Map
    right_inv_pair: Map
    sample_base: Callable
    sample_arrow: Callable
    sample_pair: Callable
    sample_triple: Callable
    forms: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)
    base_poisson: Optional[Callable[[np.ndarray], np.ndarray]] = None
    grading: Optional[dict] = None
    closed_form: bool = True
    hbar_coordinate: bool = True


def _norm(a: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.atleast_2d(a), axis=-1)


def _diagram_residuals(model: GroupoidChartModel, base, arrows, pairs, triples) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    M = model
    out = {}

    def put(name, pts, *diffs):
        r = np.zeros(len(pts))
        for d in diffs:
            r = np.maximum(r, _norm(d))
        out[name] = (r, pts)

    # the pairs model really parameterizes composable pairs
    put("pairs_compatible", pairs, M.src(M.pr1(pairs)) - M.tgt(M.pr2(pairs)))
    # triples faces are consistent with pr1, pr2, m
    put(
        "triples_faces",
        triples,
        M.pr1(M.d1(triples)) - M.mul(M.d3(triples)),
        M.pr2(M.d1(triples)) - M.pr2(M.d0(triples)),
        M.pr1(M.d2(triples)) - M.pr1(M.d3(triples)),
        M.pr2(M.d2(triples)) - M.mul(M.d0(triples)),
        M.pr2(M.d3(triples)) - M.pr1(M.d0(triples)),
    )
    put("associativity", triples, M.mul(M.d1(triples)) - M.mul(M.d2(triples)))
    put("s_and_t_a", pairs, M.src(M.mul(pairs)) - M.src(M.pr2(pairs)))
    put("s_and_t_b", pairs, M.tgt(M.mul(pairs)) - M.tgt(M.pr1(pairs)))
    ru = M.right_unit_pair(arrows)
    put("right_unit", arrows, M.mul(ru) - arrows, M.pr1(ru) - arrows, M.pr2(ru) - M.unit(M.src(arrows)))
    lu = M.left_unit_pair(arrows)
    put("left_unit", arrows, M.mul(lu) - arrows, M.pr2(lu) - arrows, M.pr1(lu) - M.unit(M.tgt(arrows)))
    put("s_inv_t_a", arrows, M.src(M.inv(arrows)) - M.tgt(arrows))
    put("s_inv_t_b", arrows, M.tgt(M.inv(arrows)) - M.src(arrows))
    li = M.left_inv_pair(arrows)
    put("left_inverse", arrows, M.mul(li) - M.unit(M.src(arrows)), M.pr1(li) - M.inv(arrows), M.pr2(li) - arrows)
    ri = M.right_inv_pair(arrows)
    put("right_inverse", arrows, M.mul(ri) - M.unit(M.tgt(arrows)), M.pr1(ri) - arrows, M.pr2(ri) - M.inv(arrows))
    put("unit", base, M.src(M.unit(base)) - base, M.tgt(M.unit(base)) - base)
    return out


def check_axioms(model: GroupoidChartModel, n_samples: int = 10_000, tol: Optional[float] = None,
                 rng=None, zero_fraction: float = 0.1) -> CheckReport:
    """Evaluate every groupoid diagram at random points.

    Residuals are Euclidean norms of coordinate differences; the report
    keeps the maximum per diagram and the point where it occurred.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    tol = (1e-12 if model.closed_form else 1e-9) if tol is None else tol
    t0 = time.perf_counter()
    samples = {}
    for kind in ("base", "arrow", "pair", "triple"):
        sampler = getattr(model, f"sample_{kind}")
        try:
            samples[kind] = np.asarray(sampler(rng, n_samples, zero_fraction), float)
        except Exception as exc:
            raise RuntimeError(f"{kind} sampler of model {model.name!r} failed: {exc}") from exc
    table = _diagram_residuals(model, samples["base"], samples["arrow"], samples["pair"], samples["triple"])
    residuals, witnesses = {}, {}
    for name, (r, pts) in table.items():
        if np.any(np.isnan(r)):
            i = int(np.argmax(np.isnan(r)))
            residuals[name] = float("nan")
        else:
            i = int(np.argmax(r))
            residuals[name] = float(r[i])
        witnesses[name] = pts[i].tolist()
    notes = {"model": model.name, "seconds": time.perf_counter() - t0}
    if model.hbar_coordinate:
        notes["hbar_zero_samples"] = int(np.sum(samples["triple"][:, -1] == 0.0))
    return CheckReport(residuals, n_samples, tol, witnesses, notes)


# ---------------------------------------------------------------------------
# pullbacks and coboundaries


def _pointwise(f: Map) -> Callable[[np.ndarray], np.ndarray]:
    return lambda p: np.asarray(f(np.asarray(p)[None, :]))[0]


def _checked_jacobian(f: Map, p: np.ndarray, h: float = 1e-5) -> np.ndarray:
    g = _pointwise(f)
    J1 = jacobian_fd(g, p, h)
    J2 = jacobian_fd(g, p, h / 2)
    scale = max(1.0, float(np.max(np.abs(J1))))
    if not np.all(np.isfinite(J1)) or np.max(np.abs(J1 - J2)) > 1e-6 * scale:
        raise DerivativeOracleError(
            f"finite-difference Jacobian is unstable at {np.asarray(p).tolist()} "
            f"(step {h:g} vs {h / 2:g} differ by {np.max(np.abs(J1 - J2)):.2e})"
        )
    return J1


def pullback(obj, f: Map, p: np.ndarray) -> np.ndarray | float:
    """Pull a function, 1-form or 2-form back along ``f`` at ``p``."""
    p = np.asarray(p, float)
    q = _pointwise(f)(p)
    if isinstance(obj, DifferentialFormModel):
        J = _checked_jacobian(f, p)
        w = obj(q)
        return J.T @ w if obj.degree == 1 else J.T @ w @ J
    return float(obj(q))


def coboundary(obj, model: GroupoidChartModel, pair_point) -> np.ndarray | float:
    """``pr1^* - m^* + pr2^*`` of a function or form at a composable pair."""
    p = np.asarray(pair_point, float)
    return pullback(obj, model.pr1, p) - pullback(obj, model.mul, p) + pullback(obj, model.pr2, p)


def triple_coboundary(F: Callable[[np.ndarray], float], model: GroupoidChartModel, triple_point) -> float:
    """``d0^* - d1^* + d2^* - d3^*`` of a function on composable pairs."""
    t = np.asarray(triple_point, float)[None, :]
    return float(F(model.d0(t)[0]) - F(model.d1(t)[0]) + F(model.d2(t)[0]) - F(model.d3(t)[0]))


@dataclass
class FormReport:
    closedness: float
    multiplicativity: float
    min_abs_det: float
    tol: float
    witness: dict
    n_samples: int

    @property
    def degenerate(self) -> bool:
        return self.min_abs_det < 10 * self.tol

    @property
    def verdict(self) -> str:
        if self.degenerate:
            return "degenerate"
        ok = self.closedness < self.tol and self.multiplicativity < self.tol
        return "pass" if ok else "fail"

    def as_check_report(self) -> CheckReport:
        res = {"closedness": self.closedness, "multiplicativity": self.multiplicativity,
               "nondegeneracy": 0.0 if not self.degenerate else float("inf")}
        return CheckReport(res, self.n_samples, self.tol, self.witness, {"min_abs_det": self.min_abs_det})

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "closedness": self.closedness,
            "multiplicativity": self.multiplicativity,
            "min_abs_det": self.min_abs_det,
            "tolerance": self.tol,
            "n_samples": self.n_samples,
            "witness": self.witness,
        }


def exterior_derivative_fd(omega: DifferentialFormModel, p: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Coefficients of ``d omega`` for a 2-form: ``T_ijk = d_i w_jk + d_j w_ki + d_k w_ij``."""
    p = np.asarray(p, float)
    n = p.size
    dW = np.empty((n, n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        dW[i] = (omega(p + e) - omega(p - e)) / (2 * h)
    return dW + np.transpose(dW, (1, 2, 0)) + np.transpose(dW, (2, 0, 1))


def check_forms(model: GroupoidChartModel, omega: DifferentialFormModel, tol: float = 1e-9,
                n_samples: int = 200, rng=None, probe_points=None, check_multiplicative: bool = True) -> FormReport:
    """Closedness, multiplicativity and nondegeneracy of a 2-form."""
    if omega.degree != 2:
        raise ValueError("check_forms needs a 2-form")
    rng = np.random.default_rng(0) if rng is None else rng
    arrows = np.asarray(model.sample_arrow(rng, n_samples, 0.1), float)
    if probe_points is not None:
        arrows = np.vstack([arrows, np.atleast_2d(np.asarray(probe_points, float))])
    witness = {}
    closed = 0.0
    min_det, det_at = np.inf, None
    for p in arrows:
        W = omega(p)
        if np.max(np.abs(W + W.T)) > 1e-12 * max(1.0, np.max(np.abs(W))):
            raise ValueError(f"2-form coefficients are not antisymmetric at {p.tolist()}")
        dW = omega.d(p) if omega.d is not None else exterior_derivative_fd(omega, p)
        c = float(np.max(np.abs(dW))) if np.size(dW) else 0.0
        if c >= closed:
            closed, witness["closedness"] = c, p.tolist()
        det = abs(float(np.linalg.det(W)))
        if det < min_det:
            min_det, det_at = det, p.tolist()
    witness["min_abs_det"] = det_at
    mult = 0.0
    if check_multiplicative:
        for P in np.asarray(model.sample_pair(rng, n_samples, 0.1), float):
            r = float(np.max(np.abs(coboundary(omega, model, P))))
            if r >= mult:
                mult, witness["multiplicativity"] = r, P.tolist()
    return FormReport(closed, mult, float(min_det), tol, witness, len(arrows))


def check_target_poisson(model: GroupoidChartModel, omega: DifferentialFormModel, f: Callable, g: Callable,
                         samples: int = 200, tol: float = 1e-9, rng=None) -> CheckReport:
    """Compare ``{f o t, g o t}_omega`` with the base bracket at ``t(sample)``.

    Hamiltonian vector fields are fixed by ``iota_{X_F} omega = dF`` and the
    bracket is ``omega(X_F, X_G) = -dF^T W^-1 dG`` with ``W`` the
    coefficient matrix of ``omega``. ``f`` and ``g`` act on single base points.
    """
    if model.base_poisson is None:
        raise ValueError(f"model {model.name!r} has no base Poisson tensor")
    rng = np.random.default_rng(0) if rng is None else rng
    tgt = _pointwise(model.tgt)
    worst, wit, min_det = 0.0, None, np.inf
    for p in np.asarray(model.sample_arrow(rng, samples, 0.1), float):
        W = omega(p)
        det = abs(np.linalg.det(W))
        min_det = min(min_det, det)
        if det < 10 * tol:
            return CheckReport({"target_poisson": float("inf")}, samples, tol, {"degenerate": p.tolist()},
                               {"verdict_detail": "degenerate"})
        dF = jacobian_fd(lambda q: np.atleast_1d(f(tgt(q))), p)[0]
        dG = jacobian_fd(lambda q: np.atleast_1d(g(tgt(q))), p)[0]
        lhs = -dF @ np.linalg.solve(W, dG)
        b = tgt(p)
        df = jacobian_fd(lambda q: np.atleast_1d(f(q)), b)[0]
        dg = jacobian_fd(lambda q: np.atleast_1d(g(q)), b)[0]
        rhs = df @ model.base_poisson(b) @ dg
        r = abs(lhs - rhs)
        if r >= worst:
            worst, wit = float(r), p.tolist()
    return CheckReport({"target_poisson": worst}, samples, tol, {"target_poisson": wit}, {"min_abs_det": float(min_det)})


def grading_residual(model: GroupoidChartModel, lam: float, n_samples: int = 1000, rng=None) -> float:
    """Max deviation of ``f(grade(p))`` from ``grade(f(p))`` over every structure map."""
    if model.grading is None:
        raise ValueError(f"model {model.name!r} carries no grading")
    rng = np.random.default_rng(0) if rng is None else rng
    G = model.grading
    pts = {k: np.asarray(getattr(model, f"sample_{k}")(rng, n_samples, 0.1), float)
           for k in ("base", "arrow", "pair", "triple")}
    maps = [
        ("base", "arrow", model.unit), ("arrow", "arrow", model.inv), ("arrow", "base", model.src),
        ("arrow", "base", model.tgt), ("pair", "arrow", model.pr1), ("pair", "arrow", model.pr2),
        ("pair", "arrow", model.mul), ("triple", "pair", model.d0), ("triple", "pair", model.d1),
        ("triple", "pair", model.d2), ("triple", "pair", model.d3),
    ]
    worst = 0.0
    for a, b, f in maps:
        p = pts[a]
        worst = max(worst, float(np.max(_norm(f(G[a](p, lam)) - G[b](f(p), lam)))))
    return worst


def su2_bracket_family(hbar: float) -> np.ndarray:
    """Structure constants ``C[i, j, k]`` of ``[e_i, e_j] = sum_k C[i,j,k] e_k`` for (X', Y', Z')."""
    C = np.zeros((3, 3, 3))
    h2 = float(hbar) ** 2
    C[0, 1, 2], C[1, 0, 2] = 1.0, -1.0
    C[1, 2, 0], C[2, 1, 0] = h2, -h2
    C[2, 0, 1], C[0, 2, 1] = h2, -h2
    return C


def jacobi_residual(C: np.ndarray) -> float:
    """Max coefficient of ``[[a,b],c] + [[b,c],a] + [[c,a],b]`` over basis triples."""
    # [[e_i, e_j], e_k] = C_ijl C_lkm e_m
    t = np.einsum("ijl,lkm->ijkm", C, C)
    jac = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
    return float(np.max(np.abs(jac)))


# ---------------------------------------------------------------------------
# built-in models


def _uniform(rng, n, d, box=1.0):
    return box * (2 * rng.random((n, d)) - 1)


def _zero_hbar(rng, pts, zero_fraction):
    k = int(round(zero_fraction * len(pts)))
    if k:
        idx = rng.choice(len(pts), size=k, replace=False)
        pts[idx, -1] = 0.0
    return pts


def constant_pi_model(data: ConstantPoissonData, broken: bool = False) -> GroupoidChartModel:
    """The exploded symplectic groupoid of a constant bivector over ``V x R``.

    Arrows ``(x, y, z, hbar)``, base ``(x, hbar)``, pairs
    ``(x, y, y', z, z', hbar)``, triples ``(x, y1, y2, y3, z1, z2, z3, hbar)``.
    ``broken=True`` flips the sign of ``z'`` in the product (fault injection).
    """
    n = data.n
    P = data

    def A(p):  # split an arrow
        return p[:, :n], p[:, n:2 * n], p[:, 2 * n], p[:, 2 * n + 1]

    def arrow(x, y, z, h):
        return np.column_stack([x, y, z, h])

    def pair(x, y, yp, z, zp, h):
        return np.column_stack([x, y, yp, z, zp, h])

    def Pp(p):
        return p[:, :n], p[:, n:2 * n], p[:, 2 * n:3 * n], p[:, 3 * n], p[:, 3 * n + 1], p[:, 3 * n + 2]

    def T(p):
        return (p[:, :n], p[:, n:2 * n], p[:, 2 * n:3 * n], p[:, 3 * n:4 * n],
                p[:, 4 * n], p[:, 4 * n + 1], p[:, 4 * n + 2], p[:, 4 * n + 3])

    zsign = -1.0 if broken else 1.0

    def half(h, y):
        return 0.5 * h[:, None] * P.sharp(y)

    def unit(b):
        x, h = b[:, :n], b[:, n]
        return arrow(x, np.zeros_like(x), np.zeros(len(b)), h)

    def inv(g):
        x, y, z, h = A(g)
        return arrow(x, -y, -z, h)

    def src(g):
        x, y, z, h = A(g)
        return np.column_stack([x - half(h, y), h])

    def tgt(g):
        x, y, z, h = A(g)
        return np.column_stack([x + half(h, y), h])

    def pr1(p):
        x, y, yp, z, zp, h = Pp(p)
        return arrow(x + half(h, yp), y, z, h)

    def pr2(p):
        x, y, yp, z, zp, h = Pp(p)
        return arrow(x - half(h, y), yp, zp, h)

    def mul(p):
        x, y, yp, z, zp, h = Pp(p)
        return arrow(x, y + yp, z + zsign * zp - 0.5 * P.pairing(y, yp), h)

    def d3(t):
        x, y1, y2, y3, z1, z2, z3, h = T(t)
        return pair(x + half(h, y3), y1, y2, z1, z2, h)

    def d0(t):
        x, y1, y2, y3, z1, z2, z3, h = T(t)
        return pair(x - half(h, y1), y2, y3, z2, z3, h)

    def d1(t):
        x, y1, y2, y3, z1, z2, z3, h = T(t)
        return pair(x, y1 + y2, y3, z1 + zsign * z2 - 0.5 * P.pairing(y1, y2), z3, h)

    def d2(t):
        x, y1, y2, y3, z1, z2, z3, h = T(t)
        return pair(x, y1, y2 + y3, z1, z2 + zsign * z3 - 0.5 * P.pairing(y2, y3), h)

    def right_unit_pair(g):
        x, y, z, h = A(g)
        return pair(x, y, np.zeros_like(y), z, np.zeros_like(z), h)

    def left_unit_pair(g):
        x, y, z, h = A(g)
        return pair(x, np.zeros_like(y), y, np.zeros_like(z), z, h)

    def left_inv_pair(g):
        x, y, z, h = A(g)
        return pair(x - half(h, y), -y, y, -z, z, h)

    def right_inv_pair(g):
        x, y, z, h = A(g)
        return pair(x + half(h, y), y, -y, z, -z, h)

    def sampler(d):
        return lambda rng, k, zf=0.1: _zero_hbar(rng, _uniform(rng, k, d), zf)

    def theta(p):
        y, z, h = p[n:2 * n], p[2 * n], p[2 * n + 1]
        return np.concatenate([y, np.zeros(n), [h, 2 * z]])

    W = np.zeros((2 * n + 2, 2 * n + 2))
    for i in range(n):
        W[i, n + i], W[n + i, i] = 1.0, -1.0
    W[2 * n + 1, 2 * n], W[2 * n, 2 * n + 1] = 1.0, -1.0
    omega = DifferentialFormModel(2, lambda p: W.copy(), d=lambda p: np.zeros((2 * n + 2,) * 3), name="omega_Gamma")

    def base_poisson(b):
        B = np.zeros((n + 1, n + 1))
        B[:n, :n] = b[n] * P.Pi
        return B

    def grade_arrow(p, lam):
        q = p.copy()
        q[:, n:2 * n] *= lam
        q[:, 2 * n] *= lam * lam
        q[:, 2 * n + 1] /= lam
        return q

    def grade_base(b, lam):
        q = b.copy()
        q[:, n] /= lam
        return q

    def grade_pair(p, lam):
        q = p.copy()
        q[:, n:3 * n] *= lam
        q[:, 3 * n:3 * n + 2] *= lam * lam
        q[:, 3 * n + 2] /= lam
        return q

    def grade_triple(p, lam):
        q = p.copy()
        q[:, n:4 * n] *= lam
        q[:, 4 * n:4 * n + 3] *= lam * lam
        q[:, 4 * n + 3] /= lam
        return q

    return GroupoidChartModel(
        name="broken-constant-pi" if broken else "constant-pi",
        dim_base=n + 1, dim_arrow=2 * n + 2, dim_pairs=3 * n + 3, dim_triples=4 * n + 4,
        unit=unit, inv=inv, src=src, tgt=tgt, pr1=pr1, pr2=pr2, mul=mul,
        d0=d0, d1=d1, d2=d2, d3=d3,
        right_unit_pair=right_unit_pair, left_unit_pair=left_unit_pair,
        left_inv_pair=left_inv_pair, right_inv_pair=right_inv_pair,
        sample_base=sampler(n + 1), sample_arrow=sampler(2 * n + 2),
        sample_pair=sampler(3 * n + 3), sample_triple=sampler(4 * n + 4),
        forms={"theta": DifferentialFormModel(1, theta, name="exploded_contact_form"), "omega": omega},
        functions={"hbar_z": lambda p: p[2 * n + 1] * p[2 * n]},
        base_poisson=base_poisson,
        grading={"base": grade_base, "arrow": grade_arrow, "pair": grade_pair, "triple": grade_triple},
    )


def pair_groupoid_model(dim: int = 1) -> GroupoidChartModel:
    """Pair groupoid of ``R^dim``: arrows ``(a, b)`` from ``b`` to ``a``."""
    d = dim

    def blocks(p, k):
        return [p[:, i * d:(i + 1) * d] for i in range(k)]

    def cat(*xs):
        return np.column_stack(xs)

    def sampler(k):
        return lambda rng, m, zf=0.1: _uniform(rng, m, k * d)

    def arr2(g):
        return blocks(g, 2)

    return GroupoidChartModel(
        name="pair-groupoid",
        dim_base=d, dim_arrow=2 * d, dim_pairs=3 * d, dim_triples=4 * d,
        unit=lambda b: cat(b, b),
        inv=lambda g: cat(arr2(g)[1], arr2(g)[0]),
        src=lambda g: arr2(g)[1].copy(),
        tgt=lambda g: arr2(g)[0].copy(),
        pr1=lambda p: cat(*blocks(p, 3)[:2]),
        pr2=lambda p: cat(*blocks(p, 3)[1:]),
        mul=lambda p: cat(blocks(p, 3)[0], blocks(p, 3)[2]),
        d0=lambda t: cat(*blocks(t, 4)[1:]),
        d1=lambda t: cat(*[blocks(t, 4)[i] for i in (0, 2, 3)]),
        d2=lambda t: cat(*[blocks(t, 4)[i] for i in (0, 1, 3)]),
        d3=lambda t: cat(*blocks(t, 4)[:3]),
        right_unit_pair=lambda g: cat(arr2(g)[0], arr2(g)[1], arr2(g)[1]),
        left_unit_pair=lambda g: cat(arr2(g)[0], arr2(g)[0], arr2(g)[1]),
        left_inv_pair=lambda g: cat(arr2(g)[1], arr2(g)[0], arr2(g)[1]),
        right_inv_pair=lambda g: cat(arr2(g)[0], arr2(g)[1], arr2(g)[0]),
        sample_base=sampler(1), sample_arrow=sampler(2), sample_pair=sampler(3), sample_triple=sampler(4),
        hbar_coordinate=False,
    )


def squared_coordinate_form(dim: int = 1) -> DifferentialFormModel:
    """``d(a_1^2) ^ db_1`` on the pair groupoid arrows ``(a, b)``; degenerate along ``a_1 = 0``."""

    def ev(p):
        W = np.zeros((2 * dim, 2 * dim))
        W[0, dim] = 2 * p[0]
        W[dim, 0] = -2 * p[0]
        return W

    return DifferentialFormModel(2, ev, name="d(a^2)^db")


MODELS = {
    "broken-constant-pi": lambda: constant_pi_model(ConstantPoissonData.standard(2), broken=True),
    "constant-pi": lambda: constant_pi_model(ConstantPoissonData.standard(2)),
    "pair-groupoid": lambda: pair_groupoid_model(1),
}
