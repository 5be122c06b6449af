"""Quantization of a constant Poisson structure on grids.

Sections over ``V*`` live on centered FFT-style grids: ``N`` points per axis
at ``(i - N/2) * h`` for ``i = 0..N-1``. Products are brute-force twisted
convolutions (trapezoid rule, spectrally accurate for rapidly decaying
integrands). The Kahler case carries the factor ``hbar^(m/2) eps^(1/2)`` and
an optional ``x`` dependence on a second grid over ``V``.
"""

from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .errors import ConvergenceError, GridError, PositivityError
from .groupoid import ConstantPoissonData
from .numerics import extrapolate_to_zero

CASES = ("flat_V", "kahler")


@dataclass(frozen=True)
class Grid:
    """Uniform centered grid with ``n_points`` per axis in ``dim`` dimensions."""

    dim: int
    n_points: int
    spacing: float

    def __post_init__(self):
        if self.dim < 1 or self.n_points < 2 or self.n_points % 2:
            raise GridError("grids need dim >= 1 and an even number of points per axis")
        if not self.spacing > 0:
            raise GridError("grid spacing must be positive")

    @classmethod
    def covering(cls, dim: int, n_points: int, extent: float) -> "Grid":
        """Grid whose points reach ``+-extent`` (up to one spacing on the positive side)."""
        return cls(dim, n_points, 2.0 * extent / n_points)

    @property
    def extent(self) -> float:
        return self.n_points // 2 * self.spacing

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_points,) * self.dim

    @property
    def cell(self) -> float:
        return self.spacing ** self.dim

    def axis(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_points // 2) * self.spacing

    def mesh(self) -> np.ndarray:
        """Coordinates with shape ``shape + (dim,)``."""
        axes = np.meshgrid(*([self.axis()] * self.dim), indexing="ij")
        return np.stack(axes, axis=-1)

    def index_of(self, point) -> np.ndarray:
        """Fractional grid index of a point."""
        return np.asarray(point, float) / self.spacing + self.n_points // 2

    def dual(self) -> "Grid":
        """Frequency grid matched to this one by the discrete Fourier transform."""
        return Grid(self.dim, self.n_points, 2 * math.pi / (self.n_points * self.spacing))


@dataclass(frozen=True)
class LatticeFunction:
    grid: Grid
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise GridError(f"values of shape {v.shape} do not fit a grid of shape {self.grid.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, f) -> "LatticeFunction":
        return cls(grid, f(grid.mesh()))

    def boundary_ratio(self) -> float:
        """Largest modulus on the outer layer relative to the largest modulus overall."""
        a = np.abs(self.values)
        top = a.max()
        if top == 0:
            return 0.0
        edge = 0.0
        for ax in range(a.ndim):
            edge = max(edge, np.take(a, 0, axis=ax).max(), np.take(a, -1, axis=ax).max())
        return float(edge / top)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other: "LatticeFunction") -> "LatticeFunction":
        _same_grid(self.grid, other.grid)
        return LatticeFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "LatticeFunction") -> "LatticeFunction":
        _same_grid(self.grid, other.grid)
        return LatticeFunction(self.grid, self.values - other.values)

    def scale(self, c) -> "LatticeFunction":
        return LatticeFunction(self.grid, c * self.values)

    def involution(self) -> "LatticeFunction":
        """``a*(y) = conj(a(-y))``; the lone unpaired boundary layer is set to 0."""
        v = self.values
        out = np.zeros_like(v)
        inner = tuple(slice(1, None) for _ in range(v.ndim))
        out[inner] = np.conj(np.flip(v[inner], axis=tuple(range(v.ndim))))
        return LatticeFunction(self.grid, out)


def _same_grid(g1: Grid, g2: Grid) -> None:
    if g1 != g2:
        raise GridError(f"grid mismatch: {g1} vs {g2}")


@dataclass(frozen=True)
class EpsilonFactor:
    m: int
    eps: float

    def __post_init__(self):
        if self.m < 0 or not self.eps > 0:
            raise ValueError("epsilon factor needs m >= 0 and eps > 0")

    @classmethod
    def for_case(cls, data: ConstantPoissonData, case: str) -> "EpsilonFactor":
        if case in ("function", "flat_V"):
            return cls(0, 1.0)
        if case != "kahler":
            raise ValueError(f"unknown case {case!r}")
        n = data.n
        det = np.linalg.det(data.Pi)
        if n % 2 or abs(det) < 1e-14:
            raise ValueError("the Kahler case needs an invertible Pi")
        m = n // 2
        return cls(m, math.sqrt(abs(det)) / (2 * math.pi) ** m)

    def prefactor(self, hbar: float) -> float:
        """``hbar^(m/2) eps^(1/2)``; negative hbar is refused when ``m`` is positive."""
        if self.m and hbar < 0:
            raise PositivityError("the polarization is only positive for hbar >= 0")
        return hbar ** (self.m / 2) * math.sqrt(self.eps)


def cocycle_sigma(y, yp, hbar: float, Pi, case: str = "flat_V") -> np.ndarray:
    """``exp(+-(i/2) hbar Pi(y, y'))``: plus for ``flat_V``, minus for ``kahler``."""
    if case not in CASES:
        raise ValueError(f"case must be one of {CASES}")
    sign = 1.0 if case == "flat_V" else -1.0
    Pi = np.atleast_2d(np.asarray(Pi, float))
    pairing = np.einsum("...i,ij,...j->...", np.asarray(y, float), Pi, np.asarray(yp, float))
    return np.exp(sign * 0.5j * hbar * pairing)


def _twisted_sum(a: np.ndarray, b: np.ndarray, grid: Grid, hbar: float, Pi: np.ndarray, sign: float) -> np.ndarray:
    """``sum_{y'} a(y') b(y - y') exp(sign (i/2) hbar y'^T Pi y)`` without the cell factor.

    Uses ``Pi(y', y - y') = y'^T Pi y``; ``b`` vanishes off the grid.
    """
    N, d = grid.n_points, grid.dim
    pad = [(N // 2, N // 2)] * d
    bp = np.pad(b, pad)
    axis = grid.axis()
    out = np.zeros(grid.shape, dtype=complex)
    amax = np.max(np.abs(a)) if a.size else 0.0
    for idx in np.ndindex(*grid.shape):
        ai = a[idx]
        if ai == 0 or abs(ai) < 1e-300 * max(amax, 1e-300):
            continue
        yprime = np.array([axis[i] for i in idx])
        w = sign * 0.5 * hbar * (yprime @ Pi)  # phase = exp(i w . y)
        phase = np.ones((1,) * d, dtype=complex)
        for ax in range(d):
            shape = [1] * d
            shape[ax] = N
            phase = phase * np.exp(1j * w[ax] * axis).reshape(shape)
        sl = tuple(slice(N - i, 2 * N - i) for i in idx)
        out += ai * phase * bp[sl]
    return out


def twisted_convolution(a: LatticeFunction, b: LatticeFunction, hbar: float, Pi, case: str = "flat_V") -> LatticeFunction:
    """``(a*b)(y) = sum_{y'} a(y') b(y-y') sigma(y', y-y') h^n`` on the common grid."""
    _same_grid(a.grid, b.grid)
    Pi = np.atleast_2d(np.asarray(Pi, float))
    if Pi.shape != (a.grid.dim,) * 2:
        raise GridError("Pi does not match the grid dimension")
    sign = 1.0 if case == "flat_V" else -1.0
    vals = _twisted_sum(a.values, b.values, a.grid, hbar, Pi, sign) * a.grid.cell
    out = LatticeFunction(a.grid, vals)
    ratio = out.boundary_ratio()
    meta = {"boundary_ratio": ratio}
    if ratio > 1e-6:
        meta["warning"] = f"truncation: boundary mass ratio {ratio:.2e} exceeds 1e-6"
    object.__setattr__(out, "meta", meta)
    return out


def fourier_intertwining_residual(a: LatticeFunction, b: LatticeFunction) -> float:
    """At ``hbar = 0`` the product is a linear convolution; compare with zero-padded FFTs.

    Returns the max deviation relative to the product's sup norm.
    """
    _same_grid(a.grid, b.grid)
    g = a.grid
    N, d = g.n_points, g.dim
    conv = twisted_convolution(a, b, 0.0, np.zeros((d, d))).values
    size = (2 * N,) * d
    axes = tuple(range(d))
    fa = np.fft.fftn(a.values, size, axes=axes)
    fb = np.fft.fftn(b.values, size, axes=axes)
    full = np.fft.ifftn(fa * fb, axes=axes) * g.cell
    # full[k] is the sum over index pairs with i + j = k; output index j_out = k - N/2
    sl = tuple(slice(N // 2, N // 2 + N) for _ in range(d))
    ref = full[sl]
    scale = max(np.max(np.abs(ref)), 1e-300)
    return float(np.max(np.abs(conv - ref)) / scale)


# ---------------------------------------------------------------------------
# Kahler case


def kahler_metric(data: ConstantPoissonData) -> np.ndarray:
    """Metric on ``V*`` normalized so that ``(G^-1 Pi)^2 = -Id``.

    The supplied metric is read on ``V*``; when ``(g^-1 Pi)^2 = -c^2 Id`` it
    is rescaled to ``c g``.
    """
    if data.metric is None:
        raise ValueError("the Kahler case needs a metric")
    J = np.linalg.solve(data.metric, data.Pi)
    c = math.sqrt(-(J @ J)[0, 0])
    return c * data.metric


@dataclass(frozen=True)
class MoyalElement:
    """A section ``a(x, y, hbar)`` at fixed ``hbar``.

    With ``xgrid`` unset the section is translation invariant and ``values``
    lives on ``ygrid``; otherwise ``values`` has shape
    ``xgrid.shape + ygrid.shape``.
    """

    hbar: float
    ygrid: Grid
    values: np.ndarray
    xgrid: Optional[Grid] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        want = self.ygrid.shape if self.xgrid is None else self.xgrid.shape + self.ygrid.shape
        if v.shape != want:
            raise GridError(f"values of shape {v.shape}, expected {want}")
        if self.xgrid is not None and (self.xgrid.dim != self.ygrid.dim or self.ygrid.dim > 2):
            raise GridError("full (x, y) sections need matching dims and dim V <= 2")
        object.__setattr__(self, "values", v)

    @property
    def rep(self) -> str:
        return "translation_invariant" if self.xgrid is None else "full"

    def lattice(self) -> LatticeFunction:
        if self.xgrid is not None:
            raise GridError("a full section has no single lattice over V*")
        return LatticeFunction(self.ygrid, self.values)

    def promote(self, xgrid: Grid) -> "MoyalElement":
        if self.xgrid is not None:
            _same_grid(self.xgrid, xgrid)
            return self
        vals = np.broadcast_to(self.values, xgrid.shape + self.ygrid.shape).copy()
        return MoyalElement(self.hbar, self.ygrid, vals, xgrid)

    def value_at(self, x, y) -> complex:
        """Multilinear interpolation at ``(x, y)`` (exact at grid nodes)."""
        yi = self.ygrid.index_of(np.atleast_1d(y))
        if self.xgrid is None:
            coords = yi
        else:
            coords = np.concatenate([self.xgrid.index_of(np.atleast_1d(x)), yi])
        c = coords.reshape(-1, 1)
        re = ndimage.map_coordinates(self.values.real, c, order=1, mode="nearest")[0]
        im = ndimage.map_coordinates(self.values.imag, c, order=1, mode="nearest")[0]
        return complex(re, im)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


def default_extent(hbar: float, data: ConstantPoissonData, sigmas: float = 7.0) -> float:
    """``sigmas`` standard deviations of the unit multiplier's Gaussian."""
    G = kahler_metric(data)
    lam = float(np.min(np.linalg.eigvalsh(G)))
    return sigmas * math.sqrt(2.0 / (hbar * lam))


def unit_multiplier(hbar: float, data: ConstantPoissonData, n_points: int = 64,
                    ygrid: Optional[Grid] = None) -> MoyalElement:
    """``K(y) = exp(-hbar |y|^2 / 4) hbar^(m/2) eps^(1/2)`` (translation invariant)."""
    if not hbar > 0:
        raise PositivityError("the unit multiplier needs hbar > 0")
    G = kahler_metric(data)
    eps = EpsilonFactor.for_case(data, "kahler")
    if ygrid is None:
        ygrid = Grid.covering(data.n, n_points, default_extent(hbar, data))
    Y = ygrid.mesh()
    q = np.einsum("...i,ij,...j->...", Y, G, Y)
    return MoyalElement(hbar, ygrid, np.exp(-0.25 * hbar * q) * eps.prefactor(hbar))


def _lerp_periodic(f: np.ndarray, q: Sequence[np.ndarray]) -> np.ndarray:
    """Multilinear interpolation of ``f`` (x axes only) at fractional indices ``q``, wrapping."""
    d = len(q)
    base, frac = [], []
    for k in range(d):
        i0 = np.floor(q[k])
        frac.append(q[k] - i0)
        base.append(i0.astype(np.intp))
    out = 0.0
    for corner in itertools.product((0, 1), repeat=d):
        w = 1.0
        idx = []
        for k, c in enumerate(corner):
            w = w * (frac[k] if c else 1.0 - frac[k])
            idx.append((base[k] + c) % f.shape[k])
        out = out + w * f[tuple(idx)]
    return out


def _shift_periodic(f: np.ndarray, shifts: Sequence[float]) -> np.ndarray:
    """``g(x) = f(x + s)`` along the leading axes, linear in the fractional part."""
    out = f
    for ax, s in enumerate(shifts):
        if s == 0:
            continue
        k = math.floor(s)
        t = s - k
        lo = np.roll(out, -k, axis=ax)
        out = lo if t == 0 else (1 - t) * lo + t * np.roll(out, -k - 1, axis=ax)
    return out


def _kahler_full(a: MoyalElement, b: MoyalElement, Pi: np.ndarray) -> np.ndarray:
    """Brute-force product sum for sections with ``x`` dependence.

    The ``x`` grid is treated as one periodic cell when shifting.
    """
    hbar, yg, xg = a.hbar, a.ygrid, a.xgrid
    N, d = yg.n_points, yg.dim
    axis = yg.axis()
    nx = xg.shape
    Y = yg.mesh()
    xidx = np.meshgrid(*[np.arange(n, dtype=float) for n in nx], indexing="ij")
    out = np.zeros(nx + yg.shape, dtype=complex)
    ypad = [(0, 0)] * d + [(N // 2, N // 2)] * d
    for idx in np.ndindex(*yg.shape):
        a_slice = a.values[(slice(None),) * d + idx]
        if not np.any(a_slice):
            continue
        yprime = np.array([axis[i] for i in idx])
        # b(x - hbar/2 #y', y - y')
        shift_b = -0.5 * hbar * (yprime @ Pi) / xg.spacing
        bpad = np.pad(_shift_periodic(b.values, shift_b), ypad)
        b_part = bpad[(slice(None),) * d + tuple(slice(N - i, 2 * N - i) for i in idx)]
        # a(x + hbar/2 #(y - y'), y'): the shift varies with the output y
        shift = 0.5 * hbar * ((Y - yprime) @ Pi) / xg.spacing
        q = [xidx[k].reshape(nx + (1,) * d) + shift[..., k].reshape((1,) * d + yg.shape) for k in range(d)]
        a_part = _lerp_periodic(a_slice, q)
        phase = np.exp(-0.5j * hbar * (Y @ (Pi.T @ yprime)))  # y'^T Pi y
        out += a_part * b_part * phase.reshape((1,) * d + yg.shape)
    return out


def kahler_product(a: MoyalElement, b: MoyalElement, data: ConstantPoissonData) -> MoyalElement:
    """Product of polarized sections in the Kahler case.

    Translation-invariant operands reduce to a twisted convolution with the
    ``kahler`` cocycle sign; otherwise ``x`` shifts are interpolated
    multilinearly on the ``x`` grid, read as one period cell.
    """
    if a.hbar != b.hbar:
        raise ValueError("operands live over different hbar")
    _same_grid(a.ygrid, b.ygrid)
    hbar = a.hbar
    pref = EpsilonFactor.for_case(data, "kahler").prefactor(hbar)
    Pi = data.Pi
    if a.xgrid is None and b.xgrid is None:
        vals = _twisted_sum(a.values, b.values, a.ygrid, hbar, Pi, -1.0)
        return MoyalElement(hbar, a.ygrid, vals * a.ygrid.cell * pref)
    xg = a.xgrid if a.xgrid is not None else b.xgrid
    a, b = a.promote(xg), b.promote(xg)
    vals = _kahler_full(a, b, Pi) * a.ygrid.cell * pref
    return MoyalElement(hbar, a.ygrid, vals, xg)


def ev0(family: Sequence[MoyalElement], x, y, data: ConstantPoissonData, case: str = "kahler") -> tuple[complex, float]:
    """Limit of ``hbar^(-m/2) eps^(-1/2) a(x, y, hbar)`` as ``hbar -> 0``.

    Polynomial extrapolation in ``hbar`` over the family; returns
    ``(limit, residual)``. Raises :class:`ConvergenceError` when successive
    members do not settle.
    """
    if len(family) < 3:
        raise ValueError("ev0 needs at least three family members")
    hs = np.array([m.hbar for m in family])
    if np.any(np.diff(hs) >= 0) or np.any(hs <= 0):
        raise ValueError("family must have positive, strictly decreasing hbar")
    eps = EpsilonFactor.for_case(data, case)
    vals = np.array([m.value_at(x, y) / eps.prefactor(m.hbar) for m in family])
    steps = np.abs(np.diff(vals))
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.any(steps[1:] > steps[:-1] + 1e-12 * scale):
        raise ConvergenceError(
            f"rescaled values {vals.tolist()} do not settle as hbar -> 0: the limit does not exist"
        )
    limit, residual = extrapolate_to_zero(hs, vals)
    return complex(limit), float(np.max(residual))


# ---------------------------------------------------------------------------
# symbols on V


def weyl_quantize(f: LatticeFunction, hbar: float = 0.0) -> LatticeFunction:
    """``Q(f)(y) = (2 pi)^-n sum_x f(x) exp(-i y.x) h^n`` on the dual grid.

    The result is read as an element of the twisted algebra at ``hbar``
    (recorded in ``meta``); the transform itself does not depend on it.
    """
    if np.max(np.abs(f.values.imag)) > 1e-12 * max(1.0, f.sup()):
        raise ValueError("weyl_quantize expects a real symbol")
    g = f.grid
    axes = tuple(range(g.dim))
    spectrum = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(f.values, axes=axes), axes=axes), axes=axes)
    spectrum = spectrum * g.cell / (2 * math.pi) ** g.dim
    out = LatticeFunction(g.dual(), spectrum, {"hbar": hbar})
    _check_aliasing(out)
    return out


def _check_aliasing(q: LatticeFunction) -> None:
    a = np.abs(q.values)
    total = a.sum()
    if total == 0:
        return
    N = q.grid.n_points
    idx = np.abs(np.arange(N) - N // 2)
    outer1d = idx > 3 * N // 8
    mask = np.zeros(a.shape, dtype=bool)
    for ax in range(a.ndim):
        shape = [1] * a.ndim
        shape[ax] = N
        mask |= outer1d.reshape(shape)
    frac = a[mask].sum() / total
    if frac > 1e-6:
        raise GridError(f"spectral mass {frac:.2e} in the outer quarter: refine the symbol grid")


def inverse_weyl(q: LatticeFunction, xgrid: Grid) -> LatticeFunction:
    """Back to symbols on ``xgrid`` (the grid ``q`` came from)."""
    axes = tuple(range(xgrid.dim))
    vals = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(q.values, axes=axes), axes=axes), axes=axes)
    return LatticeFunction(xgrid, vals * (2 * math.pi) ** xgrid.dim / xgrid.cell)


def symbol_grid(dim: int = 2, n_points: int = 64) -> Grid:
    """Symbol grid whose dual reaches the same extent: ``h = sqrt(2 pi / N)``."""
    return Grid(dim, n_points, math.sqrt(2 * math.pi / n_points))


def gradient(f: LatticeFunction, method: str = "spectral") -> np.ndarray:
    """Partial derivatives, stacked on the last axis."""
    g = f.grid
    if method == "central":
        return np.stack(np.gradient(f.values, g.spacing, edge_order=2), axis=-1) if g.dim > 1 else \
            np.gradient(f.values, g.spacing, edge_order=2)[..., None]
    if method != "spectral":
        raise ValueError("method is 'spectral' or 'central'")
    k = 2 * math.pi * np.fft.fftfreq(g.n_points, d=g.spacing)
    F = np.fft.fftn(f.values)
    out = []
    for ax in range(g.dim):
        shape = [1] * g.dim
        shape[ax] = g.n_points
        out.append(np.fft.ifftn(1j * k.reshape(shape) * F))
    return np.stack(out, axis=-1)


def poisson_bracket(f: LatticeFunction, g: LatticeFunction, Pi, method: str = "spectral") -> LatticeFunction:
    """``{f, g} = Pi^ij d_i f d_j g``."""
    _same_grid(f.grid, g.grid)
    df, dg = gradient(f, method), gradient(g, method)
    vals = np.einsum("...i,ij,...j->...", df, np.asarray(Pi, float), dg)
    if np.all(np.isreal(f.values)) and np.all(np.isreal(g.values)):
        vals = vals.real
    return LatticeFunction(f.grid, vals)


def dirac_defect(f: LatticeFunction, g: LatticeFunction, hbar: float, Pi, method: str = "spectral") -> float:
    """``sup |[Q f, Q g] + i hbar Q({f, g})|`` with products in the twisted algebra."""
    qf, qg = weyl_quantize(f, hbar), weyl_quantize(g, hbar)
    comm = twisted_convolution(qf, qg, hbar, Pi) - twisted_convolution(qg, qf, hbar, Pi)
    qb = weyl_quantize(poisson_bracket(f, g, Pi, method), hbar)
    return (comm + qb.scale(1j * hbar)).sup()


def gaussian(grid: Grid, center=None, width: float = 1.0, amplitude: complex = 1.0, tilt=None) -> LatticeFunction:
    """``amplitude * exp(-|y - c|^2 / (2 width^2) + i tilt.y)``."""
    c = np.zeros(grid.dim) if center is None else np.asarray(center, float)
    Y = grid.mesh() - c
    vals = amplitude * np.exp(-np.sum(Y * Y, axis=-1) / (2 * width * width))
    if tilt is not None:
        vals = vals * np.exp(1j * grid.mesh() @ np.asarray(tilt, float))
    return LatticeFunction(grid, vals)


# ---------------------------------------------------------------------------
# serialization

_MAGIC = b"HBLG"


def write_grid(path, values: np.ndarray, spacing: Sequence[float], hbar: float) -> None:
    """Binary grid: header of dims, spacing, extent and hbar, then complex64 row-major."""
    v = np.ascontiguousarray(values, dtype=np.complex64)
    dims = v.shape
    spacing = list(spacing)
    if len(spacing) != len(dims):
        raise GridError("one spacing per axis")
    extent = [n // 2 * h for n, h in zip(dims, spacing)]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(dims)))
        fh.write(struct.pack(f"<{len(dims)}I", *dims))
        fh.write(struct.pack(f"<{len(dims)}d", *spacing))
        fh.write(struct.pack(f"<{len(dims)}d", *extent))
        fh.write(struct.pack("<d", hbar))
        fh.write(v.tobytes(order="C"))


def read_grid(path) -> tuple[np.ndarray, list[float], list[float], float]:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise GridError(f"{path} is not a grid file")
        (nd,) = struct.unpack("<I", fh.read(4))
        dims = struct.unpack(f"<{nd}I", fh.read(4 * nd))
        spacing = list(struct.unpack(f"<{nd}d", fh.read(8 * nd)))
        extent = list(struct.unpack(f"<{nd}d", fh.read(8 * nd)))
        (hbar,) = struct.unpack("<d", fh.read(8))
        payload = np.frombuffer(fh.read(), dtype=np.complex64)
    if payload.size != int(np.prod(dims)):
        raise GridError(f"{path}: payload has {payload.size} values, header says {int(np.prod(dims))}")
    return payload.reshape(dims), spacing, extent, hbar


def element_to_file(path, a: MoyalElement) -> None:
    spacing = [a.ygrid.spacing] * a.ygrid.dim
    if a.xgrid is not None:
        spacing = [a.xgrid.spacing] * a.xgrid.dim + spacing
    write_grid(path, a.values, spacing, a.hbar)
