"""Small numerical kernels shared by the modules: limit extrapolation,
convergence-order fits and central finite differences."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np


def extrapolate_to_zero(hs: Sequence[float], values: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """Polynomial (Neville) extrapolation of ``values(h)`` to ``h = 0``.

    Returns ``(limit, residual)`` where ``residual`` is the difference between
    the extrapolant using every level and the one that drops the coarsest
    level. Values may be arrays; the tableau works elementwise.
    """
    hs = np.asarray(hs, dtype=float)
    if hs.size < 2:
        raise ValueError("need at least two levels to extrapolate")
    table = [np.asarray(v, dtype=complex if np.iscomplexobj(v) else float) for v in values]
    n = len(table)
    # tableau[i] holds the extrapolant through points i..i+order
    cur = list(table)
    for order in range(1, n):
        nxt = []
        for i in range(n - order):
            h0, h1 = hs[i], hs[i + order]
            nxt.append((h0 * cur[i + 1] - h1 * cur[i]) / (h0 - h1))
        cur = nxt
    limit = cur[0]
    if n >= 3:
        # same extrapolation without the coarsest level
        sub = list(table[1:])
        for order in range(1, n - 1):
            sub = [
                (hs[1 + i] * sub[i + 1] - hs[1 + i + order] * sub[i]) / (hs[1 + i] - hs[1 + i + order])
                for i in range(len(sub) - 1)
            ]
        residual = np.abs(limit - sub[0])
    else:
        residual = np.abs(limit - table[-1])
    return limit, residual


def richardson_symmetric(g: Callable[[float], np.ndarray], h: float) -> tuple[np.ndarray, np.ndarray]:
    """Value at 0 of a function smooth through 0, from samples at +-h, +-h/2.

    Symmetric averages cancel odd powers; one Richardson step removes the
    h**2 term. Returns ``(value, odd_singular_part)`` where the second entry
    estimates the coefficient ``c`` of a ``c/h`` singularity (zero for a
    function that is genuinely smooth at 0).
    """
    gp1, gm1 = np.asarray(g(h)), np.asarray(g(-h))
    gp2, gm2 = np.asarray(g(h / 2)), np.asarray(g(-h / 2))
    s1, s2 = 0.5 * (gp1 + gm1), 0.5 * (gp2 + gm2)
    value = (4.0 * s2 - s1) / 3.0
    a1, a2 = 0.5 * (gp1 - gm1) * h, 0.5 * (gp2 - gm2) * (h / 2)
    singular = (4.0 * a2 - a1) / 3.0
    return value, singular


def fit_order(xs: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(x).

    With ``x = hbar`` a positive slope p means error ~ hbar**p. Non-positive
    errors are dropped; NaN is returned with fewer than two usable points.
    """
    xs = np.asarray(xs, dtype=float)
    es = np.asarray(errors, dtype=float)
    keep = (es > 0) & (xs > 0) & np.isfinite(es)
    if keep.sum() < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(xs[keep]), np.log(es[keep]), 1)
    return float(slope)


def is_monotone(values: Sequence[float], rtol: float = 1e-3) -> bool:
    """True when the sequence is non-increasing up to relative noise."""
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) <= rtol * np.abs(v[:-1]) + 1e-300))


def jacobian_fd(f: Callable[[np.ndarray], np.ndarray], p: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian ``J[i, j] = d f_i / d p_j``."""
    p = np.asarray(p, dtype=float)
    f0 = np.atleast_1d(np.asarray(f(p)))
    jac = np.empty((f0.size, p.size), dtype=f0.dtype)
    for j in range(p.size):
        e = np.zeros_like(p)
        e[j] = h
        jac[:, j] = (np.atleast_1d(f(p + e)) - np.atleast_1d(f(p - e))) / (2 * h)
    return jac


def derivative_tensors_fd(
    f: Callable[[np.ndarray], np.ndarray],
    p: np.ndarray,
    order: int,
    steps: tuple[float, float, float] = (1e-4, 1e-3, 5e-3),
) -> np.ndarray:
    """Central-difference derivative tensor of the given order (1, 2 or 3).

    The result has shape ``(out, in)``, ``(out, in, in)`` or ``(out, in, in, in)``.
    Mixed partials use nested central differences, so repeated indices are
    handled by the same stencil.
    """
    p = np.asarray(p, dtype=float)
    n = p.size
    h = steps[order - 1]
    out = np.atleast_1d(np.asarray(f(p))).size
    shape = (out,) + (n,) * order
    tensor = np.empty(shape)
    eye = np.eye(n) * h
    signs = np.array(np.meshgrid(*([[1.0, -1.0]] * order), indexing="ij")).reshape(order, -1).T
    for idx in np.ndindex(*((n,) * order)):
        # symmetric tensors: fill from the sorted representative
        key = tuple(sorted(idx))
        if key != idx:
            tensor[(slice(None),) + idx] = tensor[(slice(None),) + key]
            continue
        acc = np.zeros(out)
        for s in signs:
            q = p + sum(s[a] * eye[idx[a]] for a in range(order))
            acc += np.prod(s) * np.atleast_1d(f(q))
        tensor[(slice(None),) + idx] = acc / (2 * h) ** order
    return tensor


def sig17(x: float) -> str:
    """Fixed 17-significant-digit formatting used for every CSV float."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def worker_count() -> int:
    """Thread cap from ``HBARLAB_THREADS`` (default 1, never below 1)."""
    raw = os.environ.get("HBARLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(func: Callable, items: Sequence) -> list:
    """``[func(i) for i in items]``, spread over ``worker_count()`` threads."""
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [func(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
