import random
import sys
from fractions import Fraction

import pytest

from qadditive.model import ScalingModel


def expand_roots(roots):
    """Exact closure whose characteristic polynomial is prod(t - r)."""
    poly = [Fraction(1)]
    for r in roots:
        nxt = [Fraction(0)] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i] += c
            nxt[i + 1] -= c * r
        poly = nxt
    q = len(roots)
    return tuple(-poly[q - j] for j in range(q))


def random_rational_model(rng, q=None, min_ratio=1.5):
    """Rational closure with real, distinct eigenvalues in [0.1, a^2].

    Consecutive eigenvalues differ by at least ``min_ratio`` (relative); the
    spectral closed form loses roughly one digit per factor of ten in
    eigenvalue gap, so closely spaced spectra are tested separately.
    """
    q = rng.randint(1, 6) if q is None else q
    a = rng.randint(2, 6)
    hi = 40 * a * a
    while True:
        lam = sorted(Fraction(max(rng.randint(1, hi), 4), 40) for _ in range(q))
        if all(b >= lo * Fraction(min_ratio).limit_denominator(100) for lo, b in zip(lam, lam[1:])):
            break
    e = tuple(Fraction(rng.randint(0, 1000), 100) for _ in range(q))
    return ScalingModel(a, e, closure=expand_roots(lam)), lam


def random_closure(rng, q):
    return tuple(Fraction(rng.randint(-50, 50), rng.randint(1, 9)) for _ in range(q))


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
