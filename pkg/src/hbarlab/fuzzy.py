"""Berezin quantization of the two-sphere with coherent states.

``H_k`` is the spin ``j = (k - 1)/2`` representation. The sphere carries the
symplectic form ``eps`` equal to half the area form (total volume ``2 pi``),
and every integral is a Gauss-Legendre x uniform quadrature that is exact on
the polynomial degrees involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import comb

from .errors import QuadratureOrderError
from .numerics import fit_order
from .polynomial import Polynomial

K_MAX_MATRIX = 256
K_MAX_TABLE = 64

# bracket {f, g} = BRACKET_C * x . (grad f x grad g); eps is half the area
# form, so inverting it doubles the area bracket
BRACKET_C = 2.0


@dataclass(frozen=True)
class SpinRep:
    k: int
    Jx: np.ndarray
    Jy: np.ndarray
    Jz: np.ndarray

    @property
    def j(self) -> float:
        return (self.k - 1) / 2

    def casimir(self) -> np.ndarray:
        return self.Jx @ self.Jx + self.Jy @ self.Jy + self.Jz @ self.Jz

    def commutator_residual(self) -> float:
        Jx, Jy, Jz = self.Jx, self.Jy, self.Jz
        r = 0.0
        for A, B, C in ((Jx, Jy, Jz), (Jy, Jz, Jx), (Jz, Jx, Jy)):
            r = max(r, float(np.max(np.abs(A @ B - B @ A - 1j * C))))
        return r

    def rotation(self, alpha: float, beta: float, gamma: float) -> np.ndarray:
        """``exp(-i alpha Jz) exp(-i beta Jy) exp(-i gamma Jz)``."""
        mz = np.diag(self.Jz).real
        return (np.exp(-1j * alpha * mz)[:, None] * wigner_y(self, beta)) * np.exp(-1j * gamma * mz)[None, :]


@lru_cache(maxsize=None)
def _spin_matrices(k: int):
    j = (k - 1) / 2
    m = j - np.arange(k)  # j, j-1, ..., -j
    jp = np.zeros((k, k))
    for i in range(1, k):
        jp[i - 1, i] = math.sqrt(j * (j + 1) - m[i] * (m[i] + 1))
    Jx = (jp + jp.T) / 2
    Jy = (jp - jp.T) / 2j
    Jz = np.diag(m)
    for M in (Jx, Jy, Jz):
        M.setflags(write=False)
    return Jx.astype(complex), Jy.astype(complex), Jz.astype(complex)


def spin_rep(k: int) -> SpinRep:
    """Ladder-operator construction with ``Jz = diag(j, j-1, ..., -j)``."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError("k must be a positive integer")
    if k > K_MAX_MATRIX:
        raise ValueError(f"k = {k} exceeds the matrix cap {K_MAX_MATRIX}")
    return SpinRep(int(k), *_spin_matrices(int(k)))


def wigner_y(rep: SpinRep, beta: float) -> np.ndarray:
    """``exp(-i beta Jy)`` from the eigendecomposition of ``Jy``."""
    lam, V = np.linalg.eigh(rep.Jy)
    return (V * np.exp(-1j * beta * lam)) @ V.conj().T


@dataclass(frozen=True)
class SphereQuadrature:
    n_theta: int
    n_phi: int
    theta: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, n_theta: int, n_phi: int) -> "SphereQuadrature":
        if n_theta < 1 or n_phi < 1:
            raise ValueError("need at least one node per direction")
        u, w = np.polynomial.legendre.leggauss(n_theta)
        th = np.arccos(u)
        ph = 2 * np.pi * np.arange(n_phi) / n_phi
        T, P = np.meshgrid(th, ph, indexing="ij")
        W = np.repeat(w[:, None], n_phi, axis=1) * (2 * np.pi / n_phi) * 0.5
        T, P, W = T.ravel(), P.ravel(), W.ravel()
        nodes = np.column_stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)])
        return cls(n_theta, n_phi, T, P, nodes, W)

    @classmethod
    def default(cls, k: int, bandwidth: int = 0) -> "SphereQuadrature":
        """``n_theta = max(k, 8)``, ``n_phi = 2 n_theta``, raised if the bandwidth needs it."""
        nt = max(k, 8)
        req_t, req_p = required_nodes(k, bandwidth)
        nt = max(nt, req_t, (req_p + 1) // 2)
        return cls.build(nt, 2 * nt)

    def exact_degree(self) -> int:
        """Largest polynomial degree integrated exactly."""
        return min(2 * self.n_theta - 1, self.n_phi - 2)

    def integrate(self, values) -> float | complex:
        return np.sum(self.weights * np.asarray(values))


def required_nodes(k: int, bandwidth: int = 0) -> tuple[int, int]:
    """Nodes needed for degree ``2(k-1) + bandwidth``: ``(n_theta, n_phi)``."""
    D = 2 * (k - 1) + bandwidth
    return max(1, math.ceil((D + 1) / 2)), D + 2


def _require(quad: SphereQuadrature, k: int, bandwidth: int, what: str) -> None:
    nt, nphi = required_nodes(k, bandwidth)
    if quad.n_theta < nt or quad.n_phi < nphi:
        raise QuadratureOrderError(
            f"{what} at k={k} with bandwidth {bandwidth} needs at least {nt} x {nphi} nodes "
            f"(got {quad.n_theta} x {quad.n_phi})",
            required=(nt, nphi),
        )


@dataclass(frozen=True)
class CoherentFrame:
    k: int
    quad: SphereQuadrature
    states: np.ndarray = field(repr=False)  # (n_nodes, k)

    @property
    def nodes(self) -> np.ndarray:
        return self.quad.nodes


def coherent_states(k: int, theta, phi) -> np.ndarray:
    """``exp(-i phi Jz) exp(-i theta Jy) |j, j>`` in closed form, one row per angle pair."""
    theta = np.atleast_1d(np.asarray(theta, float))
    phi = np.atleast_1d(np.asarray(phi, float))
    i = np.arange(k)  # m = j - i
    j = (k - 1) / 2
    c = np.cos(theta / 2)[:, None]
    s = np.sin(theta / 2)[:, None]
    amp = np.sqrt(comb(k - 1, i)) * c ** (k - 1 - i) * s ** i
    return amp * np.exp(-1j * phi[:, None] * (j - i))


def coherent_frame(k: int, quad: Optional[SphereQuadrature] = None) -> CoherentFrame:
    if k > K_MAX_MATRIX:
        raise ValueError(f"k = {k} exceeds the matrix cap {K_MAX_MATRIX}")
    quad = SphereQuadrature.default(k) if quad is None else quad
    return CoherentFrame(k, quad, coherent_states(k, quad.theta, quad.phi))


def angles_of(points) -> tuple[np.ndarray, np.ndarray]:
    p = np.atleast_2d(np.asarray(points, float))
    p = p / np.linalg.norm(p, axis=1, keepdims=True)
    return np.arccos(np.clip(p[:, 2], -1, 1)), np.arctan2(p[:, 1], p[:, 0])


@dataclass(frozen=True)
class FuzzyElement:
    k: int
    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.shape != (self.k, self.k):
            raise ValueError(f"expected a {self.k}x{self.k} matrix, got {m.shape}")
        object.__setattr__(self, "mat", m)

    def is_hermitian(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.mat - self.mat.conj().T)) <= tol)

    def op_norm(self) -> float:
        return float(np.linalg.norm(self.mat, 2))

    def __matmul__(self, other: "FuzzyElement") -> "FuzzyElement":
        _match(self.k, other.k)
        return FuzzyElement(self.k, self.mat @ other.mat)


def _match(k1: int, k2: int) -> None:
    if k1 != k2:
        raise ValueError(f"dimension mismatch: k={k1} vs k={k2}")


def covariant_symbol(a: FuzzyElement, frame: CoherentFrame) -> np.ndarray:
    """``I_k(a)(x) = <psi_x| a |psi_x>`` at every frame node."""
    _match(a.k, frame.k)
    psi = frame.states
    return np.einsum("ni,ij,nj->n", psi.conj(), a.mat, psi)


def resolution_of_identity(k: int, quad: SphereQuadrature) -> float:
    """Frobenius norm of ``(k/2pi) sum_i w_i |psi_i><psi_i| - Id``."""
    _require(quad, k, 0, "resolution of identity")
    frame = coherent_frame(k, quad)
    S = (k / (2 * np.pi)) * np.einsum("n,ni,nj->ij", quad.weights, frame.states, frame.states.conj())
    return float(np.linalg.norm(S - np.eye(k)))


def toeplitz_quantize(values, frame: CoherentFrame, bandwidth: Optional[int] = None) -> FuzzyElement:
    """``Q_k(f) = (k/2pi) sum_i w_i f(x_i) |psi_i><psi_i|`` from node values."""
    f = np.asarray(values)
    if f.shape != (len(frame.quad.weights),):
        raise ValueError("one symbol value per quadrature node is required")
    if bandwidth is not None:
        _require(frame.quad, frame.k, bandwidth, "Toeplitz quantization")
    psi = frame.states
    w = frame.quad.weights * f
    M = (frame.k / (2 * np.pi)) * (psi.T * w) @ psi.conj()
    if np.isrealobj(f):
        M = 0.5 * (M + M.conj().T)  # exact Hermitian form of a real combination of projectors
    return FuzzyElement(frame.k, M)


def overlap_law_residual(k: int, p, q) -> float:
    """``| |<psi_p|psi_q>|^2 - ((1 + p.q)/2)^(k-1) |`` for unit vectors p, q."""
    tp, pp = angles_of(p)
    tq, pq = angles_of(q)
    a = coherent_states(k, tp, pp)
    b = coherent_states(k, tq, pq)
    lhs = np.abs(np.sum(a.conj() * b, axis=1)) ** 2
    P = np.atleast_2d(p) / np.linalg.norm(np.atleast_2d(p), axis=1, keepdims=True)
    Q = np.atleast_2d(q) / np.linalg.norm(np.atleast_2d(q), axis=1, keepdims=True)
    rhs = ((1 + np.sum(P * Q, axis=1)) / 2) ** (k - 1)
    return float(np.max(np.abs(lhs - rhs)))


def kernel_convolution_check(a: FuzzyElement, b: FuzzyElement, frame: CoherentFrame) -> float:
    """Max over node pairs of ``|<x|ab|y> - (k/2pi) sum_z w_z <x|a|z><z|b|y>|``."""
    _match(a.k, b.k)
    _match(a.k, frame.k)
    _require(frame.quad, frame.k, 2, "kernel convolution")
    psi = frame.states
    A = psi.conj() @ a.mat @ psi.T
    B = psi.conj() @ b.mat @ psi.T
    direct = psi.conj() @ (a.mat @ b.mat) @ psi.T
    conv = (frame.k / (2 * np.pi)) * (A * frame.quad.weights[None, :]) @ B
    return float(np.max(np.abs(direct - conv)))


def symbol_theorem_check(a: FuzzyElement, frame: CoherentFrame, rng=None) -> float:
    """Max of ``|(k/2pi) sum_i w_i |<psi_i|phi>|^2 - <phi|phi>|``.

    ``phi`` ranges over the singular vectors of ``a`` (its rank-one parts),
    the standard basis and the pairwise real and imaginary combinations.
    """
    _match(a.k, frame.k)
    _require(frame.quad, frame.k, 0, "symbol theorem")
    k = frame.k
    vecs = [np.eye(k)[i] for i in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            e = np.eye(k)
            vecs += [(e[i] + e[j]) / math.sqrt(2), (e[i] + 1j * e[j]) / math.sqrt(2)]
    U, s, Vh = np.linalg.svd(a.mat)
    vecs += [U[:, i] * math.sqrt(s[i]) for i in range(k) if s[i] > 0]
    vecs += [Vh[i].conj() * math.sqrt(s[i]) for i in range(k) if s[i] > 0]
    Phi = np.array(vecs, dtype=complex)
    ov = np.abs(frame.states.conj() @ Phi.T) ** 2
    lhs = (k / (2 * np.pi)) * frame.quad.weights @ ov
    rhs = np.sum(np.abs(Phi) ** 2, axis=1)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True)
class Symbol:
    """A polynomial function on the sphere (through its ambient extension)."""

    name: str
    poly: Polynomial

    @property
    def degree(self) -> int:
        return self.poly.degree

    def __call__(self, points) -> np.ndarray:
        return self.poly(np.atleast_2d(points))

    def gradient(self, points) -> np.ndarray:
        p = np.atleast_2d(points)
        return np.stack([self.poly.diff(i)(p) for i in range(3)], axis=-1)

    def rotated(self, R: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
        """``x -> f(R^-1 x)``."""
        return lambda pts: self.poly(np.atleast_2d(pts) @ np.asarray(R))


def _xyz():
    return tuple(Polynomial.variable(3, i) for i in range(3))


def _harmonics() -> dict[str, Polynomial]:
    x, y, z = _xyz()
    r2 = x * x + y * y + z * z
    one = Polynomial.constant(3, 1.0)
    return {
        "Y0_0": one,
        "Y1_-1": y, "Y1_0": z, "Y1_1": x,
        "Y2_-2": x * y, "Y2_-1": y * z, "Y2_0": 2 * z * z - x * x - y * y, "Y2_1": x * z, "Y2_2": x * x - y * y,
        "Y3_-3": y * (3 * x * x - y * y), "Y3_-2": x * y * z, "Y3_-1": y * (4 * z * z - x * x - y * y),
        "Y3_0": z * (2 * z * z - 3 * x * x - 3 * y * y), "Y3_1": x * (4 * z * z - x * x - y * y),
        "Y3_2": z * (x * x - y * y), "Y3_3": x * (x * x - 3 * y * y),
        "Y4_-4": x * y * (x * x - y * y), "Y4_-3": (3 * x * x - y * y) * y * z,
        "Y4_-2": x * y * (7 * z * z - r2), "Y4_-1": y * z * (7 * z * z - 3 * r2),
        "Y4_0": 35 * z ** 4 - 30 * z * z * r2 + 3 * r2 * r2, "Y4_1": x * z * (7 * z * z - 3 * r2),
        "Y4_2": (x * x - y * y) * (7 * z * z - r2), "Y4_3": (x * x - 3 * y * y) * x * z,
        "Y4_4": x * x * (x * x - 3 * y * y) - y * y * (3 * x * x - y * y),
    }


def builtin_symbols() -> dict[str, Symbol]:
    x, y, z = _xyz()
    table = {
        "constant": Polynomial.constant(3, 1.0),
        "x": x, "y": y, "z": z,
        "z2": z * z, "xy": x * y, "xz": x * z, "yz": y * z,
    }
    table.update(_harmonics())
    return {k: Symbol(k, p) for k, p in table.items()}


def get_symbol(name: str) -> Symbol:
    table = builtin_symbols()
    if name not in table:
        raise KeyError(f"unknown symbol {name!r}; choose from {sorted(table)}")
    return table[name]


def product_symbol(f: Symbol, g: Symbol) -> Symbol:
    return Symbol(f"{f.name}*{g.name}", f.poly * g.poly)


def sphere_bracket(f: Symbol, g: Symbol, points) -> np.ndarray:
    """``{f, g}(x) = BRACKET_C * x . (grad f x grad g)``."""
    p = np.atleast_2d(points)
    return BRACKET_C * np.einsum("ni,ni->n", p, np.cross(f.gradient(p), g.gradient(p)))


def quantize_symbol(f: Symbol, k: int, quad: Optional[SphereQuadrature] = None) -> FuzzyElement:
    quad = SphereQuadrature.default(k, f.degree) if quad is None else quad
    frame = coherent_frame(k, quad)
    return toeplitz_quantize(f(quad.nodes), frame, bandwidth=f.degree)


@dataclass
class LimitCurve:
    k: list[int]
    errors: list[float]
    order: float
    monotone: bool

    def rows(self) -> list[tuple[int, float]]:
        return list(zip(self.k, self.errors))


def classical_limit_curve(f: Symbol, k_list: Sequence[int]) -> LimitCurve:
    """``e_k = sup_x |I_k(Q_k f)(x) - f(x)|`` over the quadrature nodes, with the fitted order in ``1/k``."""
    ks = sorted(int(k) for k in k_list)
    if ks and ks[-1] > K_MAX_TABLE:
        raise ValueError(f"symbol tables are capped at k = {K_MAX_TABLE}")
    errs = []
    for k in ks:
        quad = SphereQuadrature.default(k, f.degree)
        frame = coherent_frame(k, quad)
        vals = f(quad.nodes)
        Q = toeplitz_quantize(vals, frame, bandwidth=f.degree)
        errs.append(float(np.max(np.abs(covariant_symbol(Q, frame) - vals))))
    order = fit_order([1.0 / k for k in ks], errs) if len(ks) >= 2 else float("nan")
    mono = bool(np.all(np.diff(errs) <= 1e-12))
    return LimitCurve(ks, errs, order, mono)


def dirac_defect_sphere(f: Symbol, g: Symbol, k: int) -> float:
    """``|| i k [Q f, Q g] + Q({f, g}) ||_op`` with ``hbar = 1/k``."""
    bw = f.degree + g.degree
    quad = SphereQuadrature.default(k, bw)
    frame = coherent_frame(k, quad)
    Qf = toeplitz_quantize(f(quad.nodes), frame, bandwidth=f.degree).mat
    Qg = toeplitz_quantize(g(quad.nodes), frame, bandwidth=g.degree).mat
    Qb = toeplitz_quantize(sphere_bracket(f, g, quad.nodes), frame, bandwidth=bw).mat
    return float(np.linalg.norm(1j * k * (Qf @ Qg - Qg @ Qf) + Qb, 2))


def rotation_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """``Rz(alpha) Ry(beta) Rz(gamma)``."""

    def rz(a):
        c, s = math.cos(a), math.sin(a)
        return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])

    def ry(b):
        c, s = math.cos(b), math.sin(b)
        return np.array([[c, 0, s], [0, 1.0, 0], [-s, 0, c]])

    return rz(alpha) @ ry(beta) @ rz(gamma)


def equivariance_residual(f: Symbol, k: int, angles: tuple[float, float, float]) -> float:
    """``|| Q(f o R^-1) - U Q(f) U^dagger ||`` for the rotation with the given Euler angles."""
    quad = SphereQuadrature.default(k, f.degree)
    frame = coherent_frame(k, quad)
    R = rotation_matrix(*angles)
    U = spin_rep(k).rotation(*angles)
    Qf = toeplitz_quantize(f(quad.nodes), frame, bandwidth=f.degree).mat
    Qrot = toeplitz_quantize(f.rotated(R)(quad.nodes), frame, bandwidth=f.degree).mat
    return float(np.max(np.abs(Qrot - U @ Qf @ U.conj().T)))
