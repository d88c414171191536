"""Hybrid Fibonacci polynomials F_n(x, y).

``F_0 = 0``, ``F_1 = 1`` and ``F_n = y F_{n-1} + x F_{n-2}``, so that
``F_n(x, y) = sum_k C(n-1-k, k) x^k y^(n-1-2k)``.  They give the exact
two-additive solution ``E(a^n) = x F_{n-1} e + F_n f`` independently of the
companion-matrix machinery.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .model import _as_fraction


@dataclass(frozen=True)
class HybridFibonacci:
    """``F_n`` as integer-coefficient terms ``(coefficient, x power, y power)``."""

    degree: int
    terms: tuple

    @classmethod
    def of(cls, n: int) -> "HybridFibonacci":
        if n < 0:
            raise ValueError("degree must be non-negative")
        terms = tuple((comb(n - 1 - k, k), k, n - 1 - 2 * k) for k in range((n - 1) // 2 + 1)) if n else ()
        return cls(n, terms)

    def __call__(self, x, y) -> Fraction:
        x, y = _as_fraction(x), _as_fraction(y)
        return sum((c * x ** i * y ** j for c, i, j in self.terms), Fraction(0))

    @property
    def weighted_degree(self) -> int | None:
        """Total degree with deg(x) = 2, deg(y) = 1 (None for the zero polynomial)."""
        if not self.terms:
            return None
        return max(2 * i + j for _, i, j in self.terms)


def fibonacci_hybrid(n: int, x, y) -> Fraction:
    """Exact ``F_n(x, y)``.

    >>> [int(fibonacci_hybrid(n, 1, 1)) for n in range(1, 7)]
    [1, 1, 2, 3, 5, 8]
    """
    return HybridFibonacci.of(n)(x, y)


def fibonacci_2additive_eval(e, f, x, y, n: int) -> Fraction:
    """Exact two-additive value at ``a**n`` copies: ``x F_{n-1} e + F_n f``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x, y = _as_fraction(x), _as_fraction(y)
    return x * fibonacci_hybrid(n - 1, x, y) * _as_fraction(e) + fibonacci_hybrid(n, x, y) * _as_fraction(f)


def binet_check(n: int, x, y) -> float:
    """Residual between exact ``F_n`` and the Binet form ``(l1^n - l2^n)/sqrt(Z)``.

    ``Z = 4x + y^2`` must be positive.
    """
    Z = 4 * float(x) + float(y) ** 2
    if Z <= 0:
        raise ValueError(f"Binet form needs 4x + y^2 > 0, got {Z}")
    exact = fibonacci_hybrid(n, x, y)
    if n == 0:
        return float(abs(exact))
    s = Z ** 0.5
    l1, l2 = (float(y) + s) / 2, (float(y) - s) / 2
    binet = (l1 ** n - l2 ** n) / s
    return abs(float(exact) - binet)
