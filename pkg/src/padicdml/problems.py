"""Problem descriptions shared by the solvers, the oracle and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .poly import Poly


@dataclass(frozen=True)
class LinearOrbitProblem:
    """Orbit of ``alpha`` under ``x -> L x``; variety cut out by ``variety``."""

    L: tuple  # rows of Fractions
    alpha: tuple
    variety: tuple  # Poly in g variables
    prime_hint: int | None = None

    @property
    def g(self) -> int:
        return len(self.alpha)

    @classmethod
    def make(cls, L, alpha, variety, prime_hint=None) -> LinearOrbitProblem:
        L = tuple(tuple(Fraction(x) for x in row) for row in L)
        alpha = tuple(Fraction(x) for x in alpha)
        return cls(L, alpha, tuple(variety), prime_hint)


@dataclass(frozen=True)
class TorusOrbitProblem:
    """Orbit of ``alpha`` under the monomial map ``x_i -> prod_j x_j^A[i][j]``."""

    A: tuple  # rows of ints
    alpha: tuple  # nonzero Fractions
    variety: tuple
    prime_hint: int | None = None

    @property
    def g(self) -> int:
        return len(self.alpha)

    @classmethod
    def make(cls, A, alpha, variety, prime_hint=None) -> TorusOrbitProblem:
        A = tuple(tuple(int(x) for x in row) for row in A)
        alpha = tuple(Fraction(x) for x in alpha)
        if any(a == 0 for a in alpha):
            raise ValueError("torus points need nonzero coordinates")
        return cls(A, alpha, tuple(variety), prime_hint)


@dataclass(frozen=True)
class Bounds:
    M_max: int = 6  # period search
    K_burn_in: int = 60
    D: int = 24  # series truncation degree
    N: int = 64  # working precision (digits)
    E_max: int = 10  # multiplicative-relation search
    n_max: int = 2000  # brute-force window
    P_max: int = 10_000  # prime search bound


@dataclass(frozen=True)
class OrbitProblem:
    """Orbit of ``alpha`` under the coordinatewise polynomial map ``(f_1, ..., f_g)``."""

    maps: tuple  # univariate Poly per coordinate
    alpha: tuple
    variety: tuple  # Poly in g variables
    strategy: str = "auto"
    prime_hint: int | None = None
    bounds: Bounds = field(default_factory=Bounds)

    @property
    def g(self) -> int:
        return len(self.alpha)

    @classmethod
    def make(cls, maps, alpha, variety, strategy="auto", prime_hint=None, bounds=None) -> OrbitProblem:
        alpha = tuple(Fraction(x) for x in alpha)
        return cls(tuple(maps), alpha, tuple(variety), strategy, prime_hint, bounds or Bounds())

    def step(self, x):
        return tuple(f.evaluate((xi,)) for f, xi in zip(self.maps, x))


def variety_is_everything(variety) -> bool:
    return all(F.is_zero() for F in variety)


def as_polys(variety, g: int) -> tuple:
    out = []
    for F in variety:
        if not isinstance(F, Poly) or F.nvars != g:
            raise ValueError("variety generators must be polynomials in the ambient variables")
        out.append(F)
    return tuple(out)
