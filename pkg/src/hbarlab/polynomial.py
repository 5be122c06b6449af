"""Sparse multivariate polynomials, used for coefficient-table maps.

Polynomials give exact partial derivatives of any order and close under
composition, which is what the explosion checks need to stay at machine
precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class Polynomial:
    nvars: int
    terms: Mapping[tuple[int, ...], float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for exps, c in dict(self.terms).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars:
                raise ValueError(f"exponent tuple {exps} does not match {self.nvars} variables")
            if c != 0:
                clean[exps] = clean.get(exps, 0.0) + float(c)
        object.__setattr__(self, "terms", {k: v for k, v in clean.items() if v != 0})

    @classmethod
    def constant(cls, nvars: int, c: float) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Polynomial":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1.0})

    @classmethod
    def from_table(cls, nvars: int, table: Iterable) -> "Polynomial":
        """Build from ``[[coeff, [e0, e1, ...]], ...]`` (the JSON layout)."""
        terms: dict[tuple[int, ...], float] = {}
        for coeff, exps in table:
            key = tuple(int(e) for e in exps)
            terms[key] = terms.get(key, 0.0) + float(coeff)
        return cls(nvars, terms)

    def to_table(self) -> list:
        return [[c, list(e)] for e, c in sorted(self.terms.items())]

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape[:-1])
        for exps, c in self.terms.items():
            term = np.full(p.shape[:-1], c)
            for i, e in enumerate(exps):
                if e:
                    term = term * p[..., i] ** e
            out = out + term
        return out

    def diff(self, i: int) -> "Polynomial":
        terms = {}
        for exps, c in self.terms.items():
            if exps[i]:
                e = list(exps)
                e[i] -= 1
                terms[tuple(e)] = c * exps[i]
        return Polynomial(self.nvars, terms)

    def __add__(self, other: "Polynomial | float") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.nvars, other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0.0) + c
        return Polynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-other if isinstance(other, Polynomial) else -float(other))

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other: "Polynomial | float") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial(self.nvars, {e: c * other for e, c in self.terms.items()})
        terms: dict[tuple[int, ...], float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0.0) + c1 * c2
        return Polynomial(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial.constant(self.nvars, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def compose(self, inner: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute ``inner[i]`` for variable i."""
        if len(inner) != self.nvars:
            raise ValueError("composition arity mismatch")
        nv = inner[0].nvars
        out = Polynomial(nv, {})
        cache: dict[tuple[int, int], Polynomial] = {}
        for exps, c in self.terms.items():
            term = Polynomial.constant(nv, c)
            for i, e in enumerate(exps):
                if e:
                    if (i, e) not in cache:
                        cache[(i, e)] = inner[i] ** e
                    term = term * cache[(i, e)]
            out = out + term
        return out


class PolynomialMap:
    """A vector of polynomials ``R^n -> R^m`` with exact derivative tensors."""

    def __init__(self, components: Sequence[Polynomial]):
        if not components:
            raise ValueError("a polynomial map needs at least one component")
        self.components = list(components)
        self.nin = components[0].nvars
        self.nout = len(components)
        self._derivs: dict[tuple[int, ...], list[Polynomial]] = {}

    @classmethod
    def from_tables(cls, nvars: int, tables: Sequence) -> "PolynomialMap":
        return cls([Polynomial.from_table(nvars, t) for t in tables])

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.stack([c(p) for c in self.components], axis=-1)

    def _partial(self, idx: tuple[int, ...]) -> list[Polynomial]:
        key = tuple(sorted(idx))
        if key not in self._derivs:
            if not key:
                self._derivs[key] = self.components
            else:
                self._derivs[key] = [q.diff(key[-1]) for q in self._partial(key[:-1])]
        return self._derivs[key]

    def derivative(self, p, order: int) -> np.ndarray:
        """Exact tensor of partials at ``p``; shape ``(nout,) + (nin,) * order``."""
        p = np.asarray(p, dtype=float)
        shape = (self.nout,) + (self.nin,) * order
        out = np.empty(shape)
        for idx in np.ndindex(*((self.nin,) * order)):
            polys = self._partial(idx)
            out[(slice(None),) + idx] = [q(p) for q in polys]
        return out

    def compose(self, inner: "PolynomialMap") -> "PolynomialMap":
        """``self o inner``."""
        return PolynomialMap([c.compose(inner.components) for c in self.components])

    def to_tables(self) -> list:
        return [c.to_table() for c in self.components]
