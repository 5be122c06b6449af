"""Double explosions of explosive coordinate charts.

A chart has coordinates ``(x, y, z)``; ``N`` is ``{y = z = 0}`` and ``E`` is
spanned by the ``y`` directions. Its explosion has coordinates
``(x, y, z, hbar)`` and projects to the chart by ``(x, hbar*y, hbar**2*z)``.
Compatible maps explode to maps over the ``hbar`` line, 1-forms normal to
``N`` and ``E`` explode after division by ``hbar``, and any smooth function
``r`` yields a rescaling ``Res_r`` of the explosion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError, DerivativeOracleError, DomainError
from .numerics import derivative_tensors_fd, extrapolate_to_zero, richardson_symmetric
from .polynomial import Polynomial, PolynomialMap
from .reports import CheckReport

DEFAULT_FD_STEPS = (1e-4, 1e-3, 5e-3)


@dataclass(frozen=True)
class ExplosiveChart:
    """Open box in ``R^(dim_x + dim_y + dim_z)``; unbounded by default."""

    dim_x: int
    dim_y: int
    dim_z: int
    lower: Optional[tuple] = None
    upper: Optional[tuple] = None

    def __post_init__(self):
        if min(self.dim_x, self.dim_y, self.dim_z) < 0:
            raise ValueError("chart dimensions must be nonnegative")
        if self.dim < 1:
            raise ValueError("chart needs at least one coordinate")
        lo = np.full(self.dim, -np.inf) if self.lower is None else np.asarray(self.lower, float)
        hi = np.full(self.dim, np.inf) if self.upper is None else np.asarray(self.upper, float)
        if lo.shape != (self.dim,) or hi.shape != (self.dim,):
            raise ValueError("box bounds must match the chart dimension")
        if np.any(lo >= hi):
            raise ValueError("empty box")
        # N must meet the box: y = z = 0 strictly inside the normal bounds
        normal = slice(self.dim_x, self.dim)
        if np.any(lo[normal] >= 0) or np.any(hi[normal] <= 0):
            raise ValueError("the box does not meet N = {y = z = 0}")
        object.__setattr__(self, "lower", tuple(lo))
        object.__setattr__(self, "upper", tuple(hi))

    @property
    def dim(self) -> int:
        return self.dim_x + self.dim_y + self.dim_z

    @property
    def sx(self) -> slice:
        return slice(0, self.dim_x)

    @property
    def sy(self) -> slice:
        return slice(self.dim_x, self.dim_x + self.dim_y)

    @property
    def sz(self) -> slice:
        return slice(self.dim_x + self.dim_y, self.dim)

    def contains(self, p) -> bool:
        p = np.asarray(p, float)
        return bool(np.all(p > np.asarray(self.lower)) and np.all(p < np.asarray(self.upper)))

    def require(self, p, what: str = "point") -> None:
        if not self.contains(p):
            raise DomainError(f"{what} {np.asarray(p).tolist()} lies outside the chart box", point=p)

    def join(self, x, y, z) -> np.ndarray:
        return np.concatenate([np.atleast_1d(np.asarray(v, float)) for v in (x, y, z)])

    def split(self, p):
        p = np.asarray(p, float)
        return p[self.sx], p[self.sy], p[self.sz]

    def sample_base(self, rng: np.random.Generator, n: int, box: float = 1.0) -> np.ndarray:
        """``n`` random points of N (as full chart points with y = z = 0)."""
        lo = np.maximum(np.asarray(self.lower)[self.sx], -box)
        hi = np.minimum(np.asarray(self.upper)[self.sx], box)
        pts = np.zeros((n, self.dim))
        pts[:, self.sx] = lo + (hi - lo) * rng.random((n, self.dim_x))
        return pts

    def sample_exploded(self, rng, n: int, box: float = 1.0, hbar_box: float = 1.0) -> list["ExplodedPoint"]:
        """Random exploded points whose projections stay inside the box."""
        out = []
        lo = np.maximum(np.asarray(self.lower), -box)
        hi = np.minimum(np.asarray(self.upper), box)
        while len(out) < n:
            q = lo + (hi - lo) * rng.random(self.dim)
            h = hbar_box * (2 * rng.random() - 1)
            x, y, z = self.split(q)
            p = ExplodedPoint(x, y, z, h)
            if self.contains(p.projected()):
                out.append(p)
        return out


@dataclass(frozen=True)
class ExplodedPoint:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    hbar: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), float)))
        object.__setattr__(self, "hbar", float(self.hbar))

    @classmethod
    def from_array(cls, chart: ExplosiveChart, arr) -> "ExplodedPoint":
        arr = np.asarray(arr, float)
        return cls(arr[chart.sx], arr[chart.sy], arr[chart.sz], arr[-1])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.y, self.z, [self.hbar]])

    def projected(self) -> np.ndarray:
        h = self.hbar
        return np.concatenate([self.x, h * self.y, h * h * self.z])


def project(chart: ExplosiveChart, p: ExplodedPoint) -> np.ndarray:
    """``Pr(x, y, z, hbar) = (x, hbar y, hbar^2 z)``."""
    q = p.projected()
    chart.require(q, "projection")
    return q


class CompatibleMap:
    """Smooth map between explosive charts with a derivative oracle.

    ``func`` maps a full source point to a full target point. Partials come
    from ``partials(p, order)`` when given (a :class:`PolynomialMap` supplies
    exact ones), otherwise from central differences with ``fd_steps``.
    """

    def __init__(
        self,
        source: ExplosiveChart,
        target: ExplosiveChart,
        func: Callable[[np.ndarray], np.ndarray],
        partials: Optional[Callable[[np.ndarray, int], np.ndarray]] = None,
        name: str = "",
        fd_steps: tuple[float, float, float] = DEFAULT_FD_STEPS,
    ):
        self.source = source
        self.target = target
        self.func = func
        self.partials = partials
        self.name = name or getattr(func, "__name__", "map")
        self.fd_steps = fd_steps

    @classmethod
    def polynomial(cls, source, target, pmap: PolynomialMap, name: str = "") -> "CompatibleMap":
        if pmap.nin != source.dim or pmap.nout != target.dim:
            raise ValueError(f"polynomial map is {pmap.nin}->{pmap.nout}, charts are {source.dim}->{target.dim}")
        m = cls(source, target, pmap, pmap.derivative, name=name)
        m.pmap = pmap
        return m

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.func(np.asarray(p, float)), float)

    @property
    def has_closed_form(self) -> bool:
        return self.partials is not None

    def derivative(self, p, order: int) -> np.ndarray:
        p = np.asarray(p, float)
        if self.partials is not None:
            return np.asarray(self.partials(p, order), float)
        tensor = derivative_tensors_fd(self, p, order, self.fd_steps)
        if order == 3:
            # a third-order stencil is noisy; demand agreement with half the step
            steps = list(self.fd_steps)
            steps[2] /= 2
            check = derivative_tensors_fd(self, p, 3, tuple(steps))
            scale = max(1.0, float(np.max(np.abs(tensor))))
            if np.max(np.abs(check - tensor)) > 1e-4 * scale:
                raise DerivativeOracleError(
                    f"third partials of {self.name} are unstable at {p.tolist()}: "
                    "supply closed-form partials or a smaller third-order step"
                )
        return tensor

    def compose(self, inner: "CompatibleMap") -> "CompatibleMap":
        """``self o inner``; exact when both are polynomial."""
        if hasattr(self, "pmap") and hasattr(inner, "pmap"):
            return CompatibleMap.polynomial(
                inner.source, self.target, self.pmap.compose(inner.pmap), f"{self.name}o{inner.name}"
            )
        return CompatibleMap(
            inner.source, self.target, lambda p: self(inner(p)), name=f"{self.name}o{inner.name}",
            fd_steps=self.fd_steps,
        )


@dataclass(frozen=True)
class _Blocks:
    """Derivative blocks of a compatible map at a point of N."""

    value: np.ndarray
    d1: np.ndarray
    d2: Optional[np.ndarray]
    d3: Optional[np.ndarray]


def _blocks(phi: CompatibleMap, base: np.ndarray, order: int) -> _Blocks:
    names = {1: "first", 2: "second", 3: "third"}
    tensors = []
    for k in range(1, order + 1):
        try:
            tensors.append(phi.derivative(base, k))
        except DerivativeOracleError:
            raise
        except Exception as exc:  # oracle failure
            raise DerivativeOracleError(f"{names[k]} partials of {phi.name} failed at {base.tolist()}: {exc}") from exc
    tensors += [None] * (3 - order)
    return _Blocks(phi(base), tensors[0], tensors[1], tensors[2])


def check_compatible(phi: CompatibleMap, samples: int = 32, tol: float = 1e-10, rng=None) -> CheckReport:
    """Sample ``N`` and measure how far ``phi`` is from being compatible.

    Residuals: ``phi^y, phi^z`` on ``N`` (N maps to N'), ``phi^z_y`` on ``N``
    (E maps to E') and the vanishing lower blocks ``phi^y_x, phi^z_x`` of the
    Jacobian along ``N``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    S, T = phi.source, phi.target
    res = {"maps_N_to_N": 0.0, "normal_bundle": 0.0, "block_triangular": 0.0}
    wit: dict = {}
    for base in S.sample_base(rng, samples):
        val = phi(base)
        d1 = _blocks(phi, base, 1).d1
        checks = {
            "maps_N_to_N": np.concatenate([val[T.sy], val[T.sz]]),
            "normal_bundle": d1[T.sz, S.sy],
            "block_triangular": np.concatenate([d1[T.sy, S.sx].ravel(), d1[T.sz, S.sx].ravel(), d1[T.sz, S.sy].ravel()]),
        }
        for k, v in checks.items():
            r = float(np.max(np.abs(v))) if np.size(v) else 0.0
            if r >= res[k]:
                res[k] = r
                wit[k] = {"x": base[S.sx].tolist(), "value": np.asarray(v).tolist()}
    return CheckReport(res, samples, tol, wit, notes={"map": phi.name})


def explode_map(phi: CompatibleMap, p: ExplodedPoint) -> ExplodedPoint:
    S, T = phi.source, phi.target
    h = p.hbar
    if h != 0.0:
        q = p.projected()
        S.require(q, "projection of exploded point")
        img = phi(q)
        T.require(img, "image")
        x2, y2, z2 = T.split(img)
        return ExplodedPoint(x2, y2 / h, z2 / (h * h), h)
    base = S.join(p.x, np.zeros(S.dim_y), np.zeros(S.dim_z))
    S.require(base, "base point")
    b = _blocks(phi, base, 2 if T.dim_z else 1)
    x2 = b.value[T.sx]
    y2 = b.d1[T.sy, S.sy] @ p.y
    z2 = b.d1[T.sz, S.sz] @ p.z
    if T.dim_z and S.dim_y:
        z2 = z2 + 0.5 * np.einsum("aij,i,j->a", b.d2[T.sz][:, S.sy, S.sy], p.y, p.y)
    return ExplodedPoint(x2, y2, z2, 0.0)


def explode_jacobian(phi: CompatibleMap, p: ExplodedPoint) -> np.ndarray:
    """Jacobian of the exploded map at an ``hbar = 0`` point.

    Rows and columns are ordered ``(x, y, z, hbar)``.
    """
    if p.hbar != 0.0:
        raise ValueError("explode_jacobian is the hbar = 0 closed form; use finite differences elsewhere")
    S, T = phi.source, phi.target
    base = S.join(p.x, np.zeros(S.dim_y), np.zeros(S.dim_z))
    S.require(base, "base point")
    b = _blocks(phi, base, 3 if T.dim_z else 2)
    y, z = p.y, p.z
    n, m = S.dim, T.dim
    J = np.zeros((m + 1, n + 1))
    d1, d2, d3 = b.d1, b.d2, b.d3
    sx, sy, sz = S.sx, S.sy, S.sz
    tx, ty, tz = T.sx, T.sy, T.sz
    H = n  # hbar column / row index

    J[tx, sx] = d1[tx, sx]
    J[tx, H] = d1[tx, sy] @ y

    J[ty, sx] = np.einsum("aib,b->ai", d2[ty][:, sx, sy], y)
    J[ty, sy] = d1[ty, sy]
    J[ty, H] = 0.5 * np.einsum("aij,i,j->a", d2[ty][:, sy, sy], y, y) + d1[ty, sz] @ z

    if T.dim_z:
        J[tz, sx] = 0.5 * np.einsum("aibc,b,c->ai", d3[tz][:, sx, sy, sy], y, y) + np.einsum(
            "aib,b->ai", d2[tz][:, sx, sz], z
        )
        J[tz, sy] = np.einsum("aib,b->ai", d2[tz][:, sy, sy], y)
        J[tz, sz] = d1[tz, sz]
        J[tz, H] = np.einsum("aijk,i,j,k->a", d3[tz][:, sy, sy, sy], y, y, y) / 6.0 + np.einsum(
            "aij,i,j->a", d2[tz][:, sy, sz], y, z
        )
    J[m, H] = 1.0
    return J


def exploded_fd_jacobian(phi: CompatibleMap, p: ExplodedPoint, h: float = 1e-4) -> np.ndarray:
    """Central differences of :func:`explode_map` in exploded coordinates."""
    S = phi.source
    arr = p.as_array()

    def f(a):
        return explode_map(phi, ExplodedPoint.from_array(S, a)).as_array()

    cols = []
    for j in range(arr.size):
        e = np.zeros_like(arr)
        e[j] = h
        cols.append((f(arr + e) - f(arr - e)) / (2 * h))
    return np.stack(cols, axis=1)


def limit_at_zero(phi: CompatibleMap, p: ExplodedPoint, hbars=(1e-2, 1e-3, 1e-4)) -> np.ndarray:
    """Extrapolated limit of the ``hbar != 0`` branch as ``hbar -> 0``."""
    vals = [explode_map(phi, ExplodedPoint(p.x, p.y, p.z, h)).as_array()[:-1] for h in hbars]
    limit, _ = extrapolate_to_zero(hbars, vals)
    return limit


def classify_map(phi: CompatibleMap, samples: int = 16, tol: float = 1e-8, rng=None) -> dict:
    """Explosive submersion / immersion verdicts from block ranks on ``N``.

    Each verdict is ``True``, ``False`` or ``"indeterminate"`` (some relevant
    singular value sits in ``(tol, 10 tol)``).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    S, T = phi.source, phi.target
    pts = S.sample_base(rng, samples)

    def rank_state(block: np.ndarray, want: str):
        r, c = block.shape
        need = r if want == "onto" else c
        if need == 0:
            return True
        if min(r, c) < need:
            return False
        sv = np.linalg.svd(block, compute_uv=False)[:need]
        smin = sv.min() if sv.size else 0.0
        if smin <= tol:
            return False
        if smin < 10 * tol:
            return "indeterminate"
        return True

    def combine(states):
        if any(s is False for s in states):
            return False
        if any(s == "indeterminate" for s in states):
            return "indeterminate"
        return True

    sub, imm = [], []
    for base in pts:
        d1 = _blocks(phi, base, 1).d1
        blocks = (d1[T.sx, S.sx], d1[T.sy, S.sy], d1[T.sz, S.sz])
        sub += [rank_state(b, "onto") for b in blocks]
        imm += [rank_state(b, "into") for b in blocks]
    submersion, immersion = combine(sub), combine(imm)
    if immersion is True:
        images = np.array([phi(b) for b in pts])
        gaps = np.linalg.norm(images[:, None, :] - images[None, :, :], axis=-1)
        src = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        collide = np.any((gaps < tol) & (src > tol))
        injective = False if collide else True
    else:
        injective = immersion
    return {"submersion": submersion, "immersion": immersion, "injective_immersion": injective}


@dataclass(frozen=True)
class NormalOneForm:
    """1-form ``theta_x dx + theta_y dy + theta_z dz`` on a chart.

    Each coefficient callable takes a full chart point and returns the block
    of components; a missing one means zero.
    """

    chart: ExplosiveChart
    coeff_x: Optional[Callable] = None
    coeff_y: Optional[Callable] = None
    coeff_z: Optional[Callable] = None

    def components(self, q) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        c = self.chart
        out = []
        for fn, d in ((self.coeff_x, c.dim_x), (self.coeff_y, c.dim_y), (self.coeff_z, c.dim_z)):
            out.append(np.zeros(d) if fn is None else np.atleast_1d(np.asarray(fn(q), float)))
        return tuple(out)

    def __call__(self, q) -> np.ndarray:
        return np.concatenate(self.components(q))

    def normality_residual(self, samples: int = 16, rng=None) -> float:
        rng = np.random.default_rng(0) if rng is None else rng
        worst = 0.0
        for base in self.chart.sample_base(rng, samples):
            tx, ty, _ = self.components(base)
            worst = max(worst, float(np.max(np.abs(np.concatenate([tx, ty, [0.0]])))))
        return worst

    def scaled(self, r: Callable) -> "NormalOneForm":
        """``e^r theta``."""

        def wrap(fn):
            if fn is None:
                return None
            return lambda q: np.exp(r(q)) * np.asarray(fn(q), float)

        return NormalOneForm(self.chart, wrap(self.coeff_x), wrap(self.coeff_y), wrap(self.coeff_z))


def _exploded_form_nonzero(theta: NormalOneForm, x, y, z, h) -> np.ndarray:
    q = np.concatenate([x, h * y, h * h * z])
    tx, ty, tz = theta.components(q)
    dh = (ty @ y) / h + 2.0 * (tz @ z)
    return np.concatenate([tx / h, ty, h * tz, [dh]])


def explode_form(theta: NormalOneForm, p: ExplodedPoint, h: float = 1e-3, tol: float = 1e-6) -> np.ndarray:
    """The unique form with ``hbar * form = Pr^* theta``; ordered (dx, dy, dz, dhbar)."""
    if p.hbar != 0.0:
        theta.chart.require(p.projected(), "projection")
        return _exploded_form_nonzero(theta, p.x, p.y, p.z, p.hbar)

    def g(hh):
        return _exploded_form_nonzero(theta, p.x, p.y, p.z, hh)

    value, singular = richardson_symmetric(g, h)
    # compare against a second, halved level
    value2, _ = richardson_symmetric(g, h / 2)
    scale = max(1.0, float(np.max(np.abs(value))))
    if np.max(np.abs(singular)) > tol * scale or np.max(np.abs(value - value2)) > tol * scale:
        raise ConvergenceError(
            "exploded form does not converge at hbar = 0 (is theta normal to N and E?): "
            f"singular part {np.max(np.abs(singular)):.3e}"
        )
    return value2


@dataclass(frozen=True)
class RescaleFunction:
    r: Callable[[np.ndarray], float]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, q) -> float:
        return float(self.r(np.asarray(q, float)))


def rescale(chart: ExplosiveChart, r: RescaleFunction, p: ExplodedPoint) -> ExplodedPoint:
    """``Res_r(x, y, z, hbar) = (x, e^s y, e^{2s} z, e^{-s} hbar)``, ``s = r(Pr(p))``."""
    q = project(chart, p)
    s = r(q)
    if not np.isfinite(s):
        raise DomainError(f"rescaling function is not finite at {q.tolist()}", point=q)
    e = np.exp(s)
    return ExplodedPoint(p.x, e * p.y, e * e * p.z, p.hbar / e)


# ---------------------------------------------------------------------------
# built-in maps


def _poly_map(source: ExplosiveChart, target: ExplosiveChart, comps, name: str) -> CompatibleMap:
    return CompatibleMap.polynomial(source, target, PolynomialMap(comps), name)


def identity_map(chart: ExplosiveChart) -> CompatibleMap:
    v = [Polynomial.variable(chart.dim, i) for i in range(chart.dim)]
    return _poly_map(chart, chart, v, "identity")


def linear_map(chart: ExplosiveChart, A, B, C) -> CompatibleMap:
    """``(x, y, z) -> (A x, B y, C z)`` with square blocks."""
    A, B, C = (np.atleast_2d(np.asarray(M, float)) if np.size(M) else np.zeros((0, 0)) for M in (A, B, C))
    v = [Polynomial.variable(chart.dim, i) for i in range(chart.dim)]
    comps = []
    for M, sl in ((A, chart.sx), (B, chart.sy), (C, chart.sz)):
        idx = list(range(chart.dim))[sl]
        for row in M:
            comps.append(sum((row[k] * v[i] for k, i in enumerate(idx)), Polynomial(chart.dim, {})))
    return _poly_map(chart, chart, comps, "linear")


def sample_maps() -> dict[str, CompatibleMap]:
    """Small maps on the (1, 1, 1) chart used by tests and the CLI."""
    c = ExplosiveChart(1, 1, 1)
    x, y, z = (Polynomial.variable(3, i) for i in range(3))
    return {
        "quadratic": _poly_map(c, c, [x, y + x * y, z + y * y], "quadratic"),
        "squash": _poly_map(c, c, [x, 2.0 * y, z + y * y], "squash"),
        "shear": _poly_map(c, c, [x + 0.5 * y + x * z, y + x * y + 0.3 * z, 1.5 * z + 0.25 * y * y + x * y * y], "shear"),
        "cubic": _poly_map(
            c, c, [x + 0.2 * x * x + y * z, (1 + x) * y + 0.5 * y * y + z, (1 - 0.5 * x) * z + y * y + 0.7 * y * y * y + x * x * y * y], "cubic"
        ),
        "not-normal": _poly_map(c, c, [x, y, z + y], "not-normal"),
    }


def projection_map() -> CompatibleMap:
    """``(x1, x2, y, z) -> (x1, y, z)``."""
    src, tgt = ExplosiveChart(2, 1, 1), ExplosiveChart(1, 1, 1)
    v = [Polynomial.variable(4, i) for i in range(4)]
    return _poly_map(src, tgt, [v[0], v[2], v[3]], "projection")


def inclusion_map(dim_x: int = 1, dim_y: int = 1, dim_z: int = 1) -> CompatibleMap:
    """``x -> (x, 0, 0)`` from the trivial chart on N into a larger chart."""
    src = ExplosiveChart(dim_x, 0, 0)
    tgt = ExplosiveChart(dim_x, dim_y, dim_z)
    v = [Polynomial.variable(dim_x, i) for i in range(dim_x)]
    zero = Polynomial(dim_x, {})
    return _poly_map(src, tgt, v + [zero] * (dim_y + dim_z), "inclusion")


def constant_pi_chart_maps(Pi) -> dict[str, CompatibleMap]:
    """Unexploded structure maps of the contact groupoid of a constant bivector.

    Arrows are charted as ``(x; y; z)`` over ``V x V* x R`` and composable
    pairs as ``(x; y, y'; z, z')``. Exploding these reproduces the exploded
    groupoid's ``pr1, pr2, m``.
    """
    Pi = np.atleast_2d(np.asarray(Pi, float))
    n = Pi.shape[0]
    arrow = ExplosiveChart(n, n, 1)
    pair = ExplosiveChart(n, 2 * n, 2)
    d = 3 * n + 2
    v = [Polynomial.variable(d, i) for i in range(d)]
    xs, ys, yps = v[:n], v[n:2 * n], v[2 * n:3 * n]
    zz, zp = v[3 * n], v[3 * n + 1]
    zero = Polynomial(d, {})

    def sharp(w, sign):
        return [xs[i] + sum((sign * 0.5 * Pi[j, i] * w[j] for j in range(n)), zero) for i in range(n)]

    piyy = sum((Pi[i, j] * ys[i] * yps[j] for i in range(n) for j in range(n)), zero)
    return {
        "pr1": _poly_map(pair, arrow, sharp(yps, +1) + ys + [zz], "pr1"),
        "pr2": _poly_map(pair, arrow, sharp(ys, -1) + yps + [zp], "pr2"),
        "m": _poly_map(pair, arrow, xs + [ys[i] + yps[i] for i in range(n)] + [zz + zp - 0.5 * piyy], "m"),
    }


def contact_form(n: int) -> NormalOneForm:
    """``theta = dz + y_i dx^i`` on the ``(x; y; z)`` arrow chart."""
    chart = ExplosiveChart(n, n, 1)
    return NormalOneForm(chart, coeff_x=lambda q: q[n:2 * n], coeff_z=lambda q: np.ones(1))


def map_from_config(cfg: dict) -> CompatibleMap:
    """Build a map from ``{"builtin": name}`` or a polynomial coefficient table.

    Table layout::

        {"source": [dx, dy, dz], "target": [dx, dy, dz],
         "components": [[[coeff, [exponents...]], ...], ...]}
    """
    if "builtin" in cfg:
        name = cfg["builtin"]
        maps = sample_maps()
        if name in maps:
            return maps[name]
        if name == "identity":
            return identity_map(ExplosiveChart(*cfg.get("dims", (1, 1, 1))))
        if name == "projection":
            return projection_map()
        if name == "inclusion":
            return inclusion_map()
        if name.startswith("constant-pi-"):
            Pi = cfg.get("Pi", [[0.0, 1.0], [-1.0, 0.0]])
            return constant_pi_chart_maps(Pi)[name.removeprefix("constant-pi-")]
        raise KeyError(f"unknown built-in map {name!r}")
    src = ExplosiveChart(*cfg["source"])
    tgt = ExplosiveChart(*cfg["target"])
    pmap = PolynomialMap.from_tables(src.dim, cfg["components"])
    return CompatibleMap.polynomial(src, tgt, pmap, cfg.get("name", "table"))


BUILTIN_MAPS = ("cubic", "identity", "inclusion", "not-normal", "projection", "quadratic", "shear", "squash",
                "constant-pi-m", "constant-pi-pr1", "constant-pi-pr2")
