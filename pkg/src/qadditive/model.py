"""Linear q-additive scaling models.

A q-additive quantifier obeys ``E(N) = sum_m eta^m(N) e_m`` where ``e_m`` is
the quantifier at ``a**(m-1)`` copies.  Regrouping copies forces the
coefficient vector to advance with a companion matrix,
``eta_n = Q eta_{n-1}``, whose last column holds the closure parameters
``(x, y, z, ...)``.  Two independent evaluation routes live here:

* the recurrence oracle, which iterates the companion matrix in exact
  rational arithmetic, and
* the spectral closed form ``sum_m sum_k C^m_k N^{nu_k} e_m`` built from the
  eigenvalues of ``Q`` and the boundary-condition systems for ``C``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Sequence

import mpmath
import numpy as np

from .errors import (
    IllConditionedError,
    ImaginaryResidueError,
    QAdditiveError,
    SpectrumError,
)

DEFAULT_RADIUS = 1e-7
IMAG_TOL = 1e-9
ORACLE_DPS = 40
SOLVE_DPS = 40


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (float, np.floating)) and not math.isfinite(value):
        raise QAdditiveError(f"non-finite value {value!r}")
    if isinstance(value, (np.integer, np.floating)):
        value = value.item()
    return Fraction(value)


def _as_exponent_int(n) -> int:
    if isinstance(n, (bool, np.bool_)) or int(n) != n or n < 0:
        raise QAdditiveError(f"lattice exponent must be a non-negative integer, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class CopyLattice:
    """A copy count ``N = base**exponent`` on the lattice {1, a, a^2, ...}."""

    base: int
    exponent: int

    def __post_init__(self):
        if int(self.base) != self.base or self.base < 2:
            raise QAdditiveError(f"lattice base must be an integer >= 2, got {self.base!r}")
        _as_exponent_int(self.exponent)

    @property
    def N(self) -> int:
        # Python ints never wrap around
        return int(self.base) ** int(self.exponent)

    @classmethod
    def from_copies(cls, N, base) -> "CopyLattice":
        n = lattice_exponent(N, base)
        if n is None:
            raise QAdditiveError(f"{N} is not a power of {base}")
        return cls(int(base), n)


def lattice_exponent(N, base) -> int | None:
    """Return ``n`` with ``base**n == N``, or None when N is off the lattice."""
    if int(base) != base or base < 2:
        raise QAdditiveError(f"lattice base must be an integer >= 2, got {base!r}")
    if isinstance(N, (float, np.floating)):
        if not float(N).is_integer():
            return None
        N = int(N)
    if isinstance(N, Fraction):
        if N.denominator != 1:
            return None
        N = N.numerator
    N, base = int(N), int(base)
    if N < 1:
        return None
    n = 0
    while N % base == 0:
        N //= base
        n += 1
    return n if N == 1 else None


def is_lattice_point(N, base) -> bool:
    return lattice_exponent(N, base) is not None


@dataclass(frozen=True)
class ScalingModel:
    """Full description of a q-additive quantifier.

    Exactly one of ``closure`` (the companion last column) or ``exponents``
    (``nu_k = log_a lambda_k``) must be given.  ``evector[j]`` is the
    quantifier value at ``base**j`` copies.
    """

    base: int
    evector: tuple
    closure: tuple | None = None
    exponents: tuple | None = None
    monotone: bool = False
    notes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if int(self.base) != self.base or self.base < 2:
            raise QAdditiveError(f"base must be an integer >= 2, got {self.base!r}")
        if (self.closure is None) == (self.exponents is None):
            raise QAdditiveError("give exactly one of closure or exponents")
        object.__setattr__(self, "evector", tuple(self.evector))
        if self.closure is not None:
            object.__setattr__(self, "closure", tuple(self.closure))
            q = len(self.closure)
        else:
            object.__setattr__(self, "exponents", tuple(self.exponents))
            q = len(self.exponents)
        object.__setattr__(self, "notes", tuple(self.notes))
        if q < 1:
            raise QAdditiveError("model order q must be >= 1")
        if len(self.evector) != q:
            raise QAdditiveError(f"evector has {len(self.evector)} components, expected q={q}")
        for v in self.evector:
            if not v >= 0:
                raise QAdditiveError(f"evector components must be non-negative, got {v!r}")
        if self.monotone and any(b < a for a, b in zip(self.evector, self.evector[1:])):
            raise QAdditiveError("evector is not monotone")

    @property
    def q(self) -> int:
        return len(self.evector)

    @cached_property
    def closure_params(self) -> tuple:
        if self.closure is not None:
            return self.closure
        return closure_from_exponents(self.exponents, self.base)

    @cached_property
    def spectrum(self) -> "Spectrum":
        if self.exponents is not None:
            return spectrum_from_exponents(self.exponents, self.base)
        return eigen_spectrum(self.closure, self.base)

    @cached_property
    def coefficients(self) -> "CoefficientTable":
        return solve_coefficients(self.spectrum)

    def with_evector(self, evector) -> "ScalingModel":
        return ScalingModel(self.base, tuple(evector), self.closure, self.exponents,
                            self.monotone, self.notes)


def build_companion(closure: Sequence) -> np.ndarray:
    """Companion matrix advancing ``eta_{n-1} -> eta_n``.

    >>> build_companion([2.0, 3.0])
    array([[0., 2.],
           [1., 3.]])
    """
    params = np.asarray(closure, dtype=float)
    q = params.size
    if q < 1:
        raise QAdditiveError("closure must have at least one parameter")
    Q = np.zeros((q, q))
    Q[1:, :-1] = np.eye(q - 1)
    Q[:, -1] = params
    return Q


def _closure_of(obj) -> tuple:
    if isinstance(obj, ScalingModel):
        return obj.closure_params
    return tuple(obj)


def recurrence_oracle(model, n, exact: bool = True) -> list:
    """Coefficient vector ``eta_n = Q**n (1, 0, ..., 0)``.

    ``model`` may be a :class:`ScalingModel` or a bare closure sequence.
    With ``exact=True`` every closure parameter is converted to a
    :class:`~fractions.Fraction` (finite floats are exact binary rationals)
    and the result is exact.  ``exact=False`` iterates in mpmath with
    ``ORACLE_DPS`` digits instead.
    """
    n = _as_exponent_int(n)
    closure = _closure_of(model)
    q = len(closure)
    if exact:
        params = [_as_fraction(p) for p in closure]
        zero, one = Fraction(0), Fraction(1)
    else:
        params = [mpmath.mpf(p) if not isinstance(p, Fraction)
                  else mpmath.mpf(p.numerator) / p.denominator for p in closure]
        zero, one = mpmath.mpf(0), mpmath.mpf(1)
    with mpmath.workdps(ORACLE_DPS):
        eta = [one] + [zero] * (q - 1)
        for _ in range(n):
            last = eta[-1]
            eta = [params[0] * last] + [eta[j - 1] + params[j] * last for j in range(1, q)]
    return eta


def oracle_eval(model: ScalingModel, n, exact: bool = True):
    """``E(a**n)`` from the recurrence oracle: a Fraction when exact, else float."""
    eta = recurrence_oracle(model, n, exact=exact)
    if exact:
        return sum((c * _as_fraction(e) for c, e in zip(eta, model.evector)), Fraction(0))
    with mpmath.workdps(ORACLE_DPS):
        return float(mpmath.fsum(c * mpmath.mpf(float(e)) for c, e in zip(eta, model.evector)))


@dataclass(frozen=True)
class Spectrum:
    """Distinct companion eigenvalues with their multiplicities."""

    base: int
    roots: tuple
    multiplicities: tuple

    def __post_init__(self):
        object.__setattr__(self, "roots", tuple(complex(r) for r in self.roots))
        object.__setattr__(self, "multiplicities", tuple(int(m) for m in self.multiplicities))
        if len(self.roots) != len(self.multiplicities) or any(m < 1 for m in self.multiplicities):
            raise QAdditiveError("each root needs a positive multiplicity")

    @property
    def order(self) -> int:
        return sum(self.multiplicities)

    @property
    def exponents(self) -> tuple:
        """``nu_k = log_a lambda_k``; complex for negative or complex roots, -inf for 0."""
        la = math.log(self.base)
        out = []
        for r in self.roots:
            if r == 0:
                out.append(complex(-math.inf))
            else:
                out.append(np.log(r) / la)
        return tuple(out)

    @property
    def flags(self) -> tuple:
        """Per-root tag: ``None`` for a positive real root, otherwise
        ``'zero'``, ``'negative'`` or ``'complex'``."""
        tags = []
        for r in self.roots:
            if r == 0:
                tags.append("zero")
            elif abs(r.imag) > IMAG_TOL * abs(r):
                tags.append("complex")
            elif r.real < 0:
                tags.append("negative")
            else:
                tags.append(None)
        return tuple(tags)

    @property
    def is_real_positive(self) -> bool:
        return all(f is None for f in self.flags)

    def expanded(self) -> list:
        """Roots repeated according to multiplicity."""
        return [r for r, m in zip(self.roots, self.multiplicities) for _ in range(m)]

    def permuted(self, order: Sequence[int]) -> "Spectrum":
        return Spectrum(self.base, [self.roots[i] for i in order],
                        [self.multiplicities[i] for i in order])


def charpoly(closure: Sequence) -> list:
    """Monic characteristic polynomial of the companion matrix, highest power first."""
    return [1] + [-p for p in reversed(tuple(closure))]


def _backward_error(coeffs, root) -> float:
    c = np.asarray(coeffs, dtype=complex)
    val = np.polyval(c, root)
    scale = np.polyval(np.abs(c), abs(root))
    return float(abs(val) / scale) if scale else 0.0


def _cluster(roots, mults, radius):
    """Merge roots within relative distance ``radius``; merged roots become
    the multiplicity-weighted mean of their members."""
    groups = []
    for r, m in zip(roots, mults):
        for g in groups:
            center = g[0] / g[1]
            if abs(center - r) <= radius * max(abs(center), abs(r)):
                g[0] += r * m
                g[1] += m
                break
        else:
            groups.append([r * m, m])
    return [g[0] / g[1] for g in groups], [g[1] for g in groups]


def _clean(r: complex) -> complex:
    if abs(r.imag) <= 1e-14 * abs(r):
        return complex(r.real, 0.0)
    return r


def _squarefree_parts(closure):
    """Exact square-free factorisation of the characteristic polynomial.

    Returns ``[(float coefficients, multiplicity), ...]``, or None when the
    closure cannot be represented in rational arithmetic.
    """
    import sympy

    try:
        coeffs = [sympy.Rational(_as_fraction(c).numerator, _as_fraction(c).denominator)
                  for c in charpoly(closure)]
    except (TypeError, ValueError, QAdditiveError):
        return None
    t = sympy.Symbol("t")
    poly = sympy.Poly(coeffs, t, domain=sympy.QQ)
    _, factors = poly.sqf_list()
    return [([float(c) for c in f.all_coeffs()], m) for f, m in factors]


def _polish(coeffs, r, steps=3):
    c = np.asarray(coeffs, dtype=complex)
    dc = np.polyder(c)
    for _ in range(steps):
        d = np.polyval(dc, r)
        if d == 0:
            break
        step = np.polyval(c, r) / d
        if not np.isfinite(step):
            break
        r = r - step
    return r


def eigen_spectrum(closure: Sequence, base_a, radius: float = DEFAULT_RADIUS,
                   tol: float = 1e-9) -> Spectrum:
    """All roots of ``t^q - z t^{q-1} - ... - x`` with multiplicities.

    Multiplicities are first found exactly by square-free factorisation
    (closure parameters are read as exact rationals); roots of each
    square-free part come from a companion eigensolve followed by Newton
    polishing.  Roots closer than ``radius`` (relative) are then merged.
    Negative and complex roots are kept; see :attr:`Spectrum.flags`.
    """
    closure = tuple(closure)
    if len(closure) < 1:
        raise QAdditiveError("closure must have at least one parameter")
    full = [float(c) for c in charpoly(closure)]
    parts = _squarefree_parts(closure) or [(full, 1)]
    roots, mults = [], []
    for coeffs, m in parts:
        if len(coeffs) < 2:
            continue
        try:
            found = np.roots(coeffs)
        except np.linalg.LinAlgError as exc:
            raise SpectrumError(f"eigensolver failed: {exc}") from exc
        for r in found:
            roots.append(_clean(complex(_polish(coeffs, complex(r)))))
            mults.append(m)
    roots, mults = _cluster(roots, mults, radius)
    roots = [_clean(complex(r)) for r in roots]
    residuals = [_backward_error(full, r) for r in roots]
    if sum(mults) != len(closure) or any(e > tol for e in residuals):
        raise SpectrumError(
            f"characteristic roots not resolved (max backward error {max(residuals, default=0):.3g})",
            residuals,
        )
    order = sorted(range(len(roots)), key=lambda i: (-abs(roots[i]), -roots[i].real, roots[i].imag))
    return Spectrum(int(base_a), [roots[i] for i in order], [mults[i] for i in order])


def spectrum_from_exponents(exponents: Sequence[float], base_a,
                            radius: float = DEFAULT_RADIUS) -> Spectrum:
    """Spectrum with roots ``a**nu_k`` directly, no root finding."""
    lam = [complex(float(base_a) ** float(nu)) for nu in exponents]
    roots, mults = _cluster(lam, [1] * len(lam), radius)
    return Spectrum(int(base_a), roots, mults)


def closure_from_exponents(exponents: Sequence[float], base_a) -> tuple:
    """Closure parameters whose companion eigenvalues are ``a**nu_k``.

    The characteristic polynomial is ``prod_k (t - a**nu_k)``; the closure is
    minus its lower coefficients, lowest degree first.

    >>> closure_from_exponents([1, 0], 2)
    (-2.0, 3.0)
    """
    lam = [float(base_a) ** float(nu) for nu in exponents]
    if not lam:
        raise QAdditiveError("need at least one exponent")
    poly = np.poly(lam) if len(lam) > 1 else np.array([1.0, -lam[0]])
    q = len(lam)
    return tuple(float(-poly[q - j]) for j in range(q))


@dataclass(frozen=True)
class CoefficientTable:
    """Solution of the boundary-condition systems.

    ``columns[c] = (root, power)`` names the basis function
    ``n**power * root**n``; ``matrix[m, c]`` is the weight of that basis
    function in ``eta^{m+1}``.  For distinct roots ``matrix[m, k]`` is the
    familiar ``C^{m+1}_{k+1}``.
    """

    columns: tuple
    matrix: np.ndarray
    condition: float
    residual: float

    @property
    def q(self) -> int:
        return len(self.columns)


def _basis(root: complex, power: int, n):
    """``n**power * root**n`` evaluated at (possibly real, non-integer) n."""
    n = np.asarray(n, dtype=float)
    if root == 0:
        return (n == power).astype(complex)
    if root.imag == 0 and root.real > 0:
        # real pow is accurate to ~1 ulp; exp(n log r) loses ~n|log r| ulps
        return (n ** power * np.power(root.real, n)).astype(complex)
    return n ** power * np.exp(n * np.log(complex(root)))


def solve_coefficients(spectrum: Spectrum, max_condition: float = 1e13,
                       tol: float = 1e-10) -> CoefficientTable:
    """Solve ``sum_c C^m_c basis_c(l) = delta_{m-1, l}`` for ``l = 0..q-1``.

    With distinct roots this is a transposed Vandermonde system in the
    eigenvalues; repeated roots use the confluent basis ``n**j lambda**n``.
    Columns are equilibrated before the solve.
    """
    columns = [(r, j) for r, m in zip(spectrum.roots, spectrum.multiplicities) for j in range(m)]
    q = len(columns)
    ls = np.arange(q)
    V = np.column_stack([_basis(r, j, ls) for r, j in columns])
    scale = np.max(np.abs(V), axis=0)
    scale[scale == 0] = 1.0
    cond = float(np.linalg.cond(V / scale))
    if not np.isfinite(cond) or cond > max_condition:
        raise IllConditionedError(
            f"boundary system condition {cond:.3g} exceeds {max_condition:.3g}; "
            "roots may need clustering (raise the clustering radius)", cond)
    # extended precision so C is correctly rounded even for moderately close roots
    with mpmath.workdps(SOLVE_DPS):
        Vm = mpmath.matrix(q, q)
        for c, (r, j) in enumerate(columns):
            rm = mpmath.mpc(r.real, r.imag)
            for l in range(q):
                Vm[l, c] = (mpmath.mpf(l) ** j if j else 1) * rm ** l if r != 0 else int(l == j)
        Cm = mpmath.inverse(Vm)
        C = np.array([[complex(Cm[i, m]) for m in range(q)] for i in range(q)])
    # componentwise relative residual |VC - I| / (|V||C|)
    err = np.abs(V @ C - np.eye(q))
    ref = np.abs(V) @ np.abs(C)
    residual = float(np.max(np.divide(err, ref, out=np.zeros_like(err), where=ref > 0)))
    if residual > tol:
        raise IllConditionedError(f"boundary residual {residual:.3g} too large", cond)
    # C[c, m] solves column m; store as matrix[m, c]
    return CoefficientTable(tuple(columns), C.T.copy(), cond, residual)


def _lattice_n(N, base) -> np.ndarray:
    N = np.asarray(N, dtype=float)
    if np.any(N < 1):
        raise QAdditiveError("copy counts must be >= 1")
    n = np.log(N) / math.log(base)
    r = np.round(n)
    return np.where(np.abs(n - r) < 1e-12, r, n)


def coefficient_vector(model: ScalingModel, N, spectrum: Spectrum | None = None,
                       table: CoefficientTable | None = None) -> np.ndarray:
    """Complex weights ``eta^m(N)`` with shape ``N.shape + (q,)``."""
    if table is None:
        table = model.coefficients if spectrum is None else solve_coefficients(spectrum)
    n = _lattice_n(N, model.base)
    B = np.stack([_basis(r, j, n) for r, j in table.columns], axis=-1)
    return B @ table.matrix.T


def _real_part(z, what="value"):
    z = np.asarray(z, dtype=complex)
    residue = np.abs(z.imag)
    bound = IMAG_TOL * (1 + np.abs(z.real))
    if np.any(residue > bound):
        worst = float(np.max(residue))
        raise ImaginaryResidueError(
            f"{what} has imaginary residue {worst:.3g}; complex spectrum evaluated "
            "where it is not real", worst)
    return z.real


def closed_form_eval(model: ScalingModel, N, spectrum: Spectrum | None = None):
    """``E(N) = sum_m sum_k C^m_k N^{nu_k} e_m`` for real ``N >= 1``.

    Scalar in, float out; array in, array out.
    """
    scalar = np.ndim(N) == 0
    w = coefficient_vector(model, N, spectrum=spectrum)
    val = _real_part(w @ np.asarray(model.evector, dtype=float), "closed form")
    return float(val) if scalar else val


class ConsistencyResult(NamedTuple):
    ok: bool
    residual: float


def scalability_consistency_check(model, n, k, exact: bool = True,
                                  tol: float = 1e-12) -> ConsistencyResult:
    """Check ``eta^j(N) = sum_l eta^j(a^{l-1} K) eta^l(N/K)`` with ``K = a**k``.

    In exact arithmetic the residual is exactly zero for any valid model.
    """
    n, k = _as_exponent_int(n), _as_exponent_int(k)
    if k > n:
        raise QAdditiveError("need k <= n")
    q = len(_closure_of(model))
    lhs = recurrence_oracle(model, n, exact)
    inner = recurrence_oracle(model, n - k, exact)
    blocks = [recurrence_oracle(model, k + l, exact) for l in range(q)]
    rhs = [sum((blocks[l][j] * inner[l] for l in range(q)), lhs[0] * 0) for j in range(q)]
    if exact:
        residual = max(abs(a - b) for a, b in zip(lhs, rhs))
        return ConsistencyResult(residual == 0, float(residual))
    with mpmath.workdps(ORACLE_DPS):
        residual = max(abs(a - b) for a, b in zip(lhs, rhs))
        scale = 1 + max(abs(a) for a in lhs)
        return ConsistencyResult(bool(residual <= tol * scale), float(residual))


def lattice_values(model: ScalingModel, n_max: int, exact: bool = True) -> list:
    """Oracle values ``E(a**n)`` for ``n = 0..n_max``."""
    return [oracle_eval(model, n, exact) for n in range(_as_exponent_int(n_max) + 1)]
