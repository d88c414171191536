"""Explicit closed forms for orders two and three, including degenerate limits."""
from __future__ import annotations

import cmath
import math

from .errors import ImaginaryResidueError, NearDegenerateError, QAdditiveError
from .model import DEFAULT_RADIUS, IMAG_TOL


def _log_a(N, a):
    if N < 1:
        raise QAdditiveError(f"copy count must be >= 1, got {N!r}")
    return math.log(N) / math.log(a)


def _cpow(base, exponent):
    """``base**exponent`` through the principal complex logarithm."""
    if base == 0:
        return 0j
    return cmath.exp(exponent * cmath.log(base))


def _real(z, tol=IMAG_TOL):
    if abs(z.imag) > tol * (1 + abs(z.real)):
        raise ImaginaryResidueError(f"imaginary residue {abs(z.imag):.3g}", abs(z.imag))
    return z.real


def two_additive_exponents(x, y, a):
    """``(nu_1, nu_2)`` from the closure ``(x, y)``; complex when the roots are not positive."""
    sz = cmath.sqrt(4 * x + y * y)
    la = math.log(a)
    return tuple(cmath.log((y + s) / 2) / la for s in (sz, -sz))


def closed_form_2additive(e, f, x, y, N, a, radius=DEFAULT_RADIUS):
    """Two-additive value at ``N`` copies from ``e`` (1 copy) and ``f`` (a copies).

    Uses ``(N^nu2 a^nu1 - N^nu1 a^nu2) e + (N^nu1 - N^nu2) f`` over
    ``a^nu1 - a^nu2`` with the exponents read off the closure ``(x, y)``.
    A double root falls back to :func:`degenerate_2additive`.
    """
    sz = cmath.sqrt(4 * x + y * y)
    l1, l2 = (y + sz) / 2, (y - sz) / 2
    if abs(l1 - l2) <= radius * max(abs(l1), abs(l2)):
        lam = (l1 + l2) / 2
        if abs(lam.imag) > IMAG_TOL * abs(lam) or lam.real <= 0:
            raise QAdditiveError("double root is not positive; no real exponent")
        return degenerate_2additive(e, f, math.log(lam.real) / math.log(a), N, a)
    if l1 == 0 or l2 == 0:
        raise QAdditiveError("zero eigenvalue (x = 0) has no exponent; use closed_form_eval")
    la = math.log(a)
    nu1, nu2 = cmath.log(l1) / la, cmath.log(l2) / la
    N1, N2 = _cpow(N, nu1), _cpow(N, nu2)
    val = ((N2 * l1 - N1 * l2) * e + (N1 - N2) * f) / (l1 - l2)
    return _real(val)


def closed_form_3additive(e1, e2, e3, nu1, nu2, nu3, N, a, radius=DEFAULT_RADIUS):
    """Three-additive value at ``N`` copies with exponents ``(nu1, nu2, nu3)``.

    Symmetric in the exponents.  Raises :class:`NearDegenerateError` when two
    of ``a**nu`` coincide within ``radius`` (relative).
    """
    A = [a ** nu for nu in (nu1, nu2, nu3)]
    for i in range(3):
        for j in range(i + 1, 3):
            if abs(A[i] - A[j]) <= radius * max(abs(A[i]), abs(A[j])):
                raise NearDegenerateError(
                    "coincident exponents; use degenerate_3additive or closed_form_eval")
    total = 0.0
    for k in range(3):
        i, j = [m for m in range(3) if m != k]
        num = A[i] * A[j] * e1 - (A[i] + A[j]) * e2 + e3
        total += num / ((A[k] - A[i]) * (A[k] - A[j])) * N ** (nu1, nu2, nu3)[k]
    return total


def degenerate_2additive(e, f, nu, N, a):
    """Double-root limit: ``-N^nu (n - 1) e + (N/a)^nu n f`` with ``n = log_a N``."""
    n = _log_a(N, a)
    return -(N ** nu) * (n - 1) * e + (N ** nu / a ** nu) * n * f


def degenerate_3additive(e1, e2, e3, nu, N, a):
    """Triple-root limit of the three-additive form.

    Brackets come from the confluent basis ``{1, n, n^2} * N^nu`` fitted to
    ``E(1) = e1``, ``E(a) = e2``, ``E(a^2) = e3``.
    """
    n = _log_a(N, a)
    return (N ** nu * (1 - 1.5 * n + 0.5 * n * n) * e1
            + (N / a) ** nu * (2 * n - n * n) * e2
            + (N / a ** 2) ** nu * 0.5 * (n * n - n) * e3)


def uncorrected_degenerate_3additive(e1, e2, e3, nu, N, a):
    """Triple-degenerate form with the uncorrected e2/e3 brackets.

    Misses ``E(a) = e2`` and ``E(a**2) = e3``.  Kept as a counterexample
    for tests; use :func:`degenerate_3additive`.
    """
    n = _log_a(N, a)
    return (N ** nu * (1 - 1.5 * n + 0.5 * n * n) * e1
            - (N / a) ** nu * (2 * n + 0.5 * n * n) * e2
            + (N / a ** 2) ** nu * (0.5 * n + 0.5 * n * n) * e3)
