"""Feasibility constraints, asymptotic limits and the one-shot distillable
entanglement (OSD) three-additive model."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import FeasibilityWarning, QAdditiveError
from .model import ScalingModel, closed_form_eval

UNIT_TOL = 1e-9

OSD_EXPONENTS = (1.0, 0.5, 0.0)


@dataclass(frozen=True)
class Constraint:
    name: str
    satisfied: bool
    margin: float


@dataclass(frozen=True)
class FeasibilityReport:
    constraints: tuple

    @property
    def ok(self) -> bool:
        return all(c.satisfied for c in self.constraints)

    @property
    def violations(self) -> tuple:
        return tuple(c for c in self.constraints if not c.satisfied)

    def __getitem__(self, name: str) -> Constraint:
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)

    def __iter__(self):
        return iter(self.constraints)

    def __add__(self, other: "FeasibilityReport") -> "FeasibilityReport":
        return FeasibilityReport(self.constraints + other.constraints)


def _ge(name, lhs, rhs):
    margin = float(lhs - rhs)
    return Constraint(name, margin >= 0, margin)


def check_2additive_feasibility(e, f, x, y) -> FeasibilityReport:
    """Necessary conditions on a two-additive closure ``(x, y)`` and data ``(e, f)``.

    * ``x < 0`` (it equals ``-a^(nu1 + nu2)``),
    * ``y^2 >= 4|x|`` (real exponents),
    * ``f (y - 1) >= |x| e`` (monotonicity ``E(a^2) >= E(a)``), written
      multiplicatively so that ``e = 0`` and ``y = 1`` are harmless.
    """
    return FeasibilityReport((
        Constraint("x_negative", x < 0, float(-x)),
        _ge("discriminant", y * y, 4 * abs(x)),
        _ge("monotone", f * (y - 1), abs(x) * e),
    ))


def check_osd_consistency(a, e2, e3) -> FeasibilityReport:
    """``e3 >= (sqrt(a) + 1) e2``: non-negative asymptote of the OSD model."""
    if a < 2:
        raise QAdditiveError("superactivation copy number must be >= 2")
    return FeasibilityReport((_ge("osd_consistency", e3, (math.sqrt(a) + 1) * e2),))


@dataclass(frozen=True)
class AsymptoteReport:
    """Large-N behaviour of ``E(N)/N``.

    ``kind`` is one of ``vanishes``, ``finite``, ``power-divergent`` or
    ``log-divergent``; ``value`` is the limit (0.0 when it vanishes, None
    when it diverges).  ``log_order`` is the power of ``log_a N`` in a
    logarithmic divergence.
    """

    kind: str
    value: float | None
    nu_max: float
    multiplicity: int
    log_order: int = 0


def asymptote(model: ScalingModel, tol: float = UNIT_TOL) -> AsymptoteReport:
    spectrum = model.spectrum
    live = [(r, m) for r, m in zip(spectrum.roots, spectrum.multiplicities) if r != 0]
    if not live:
        return AsymptoteReport("vanishes", 0.0, -math.inf, spectrum.order)
    top = max(abs(r) for r, _ in live)
    dominant = [(r, m) for r, m in live if abs(r) >= top * (1 - tol)]
    if len(dominant) > 1 or dominant[0][0].imag != 0 or dominant[0][0].real < 0:
        raise QAdditiveError(
            f"dominant eigenvalue(s) {[r for r, _ in dominant]} not a single positive real root; "
            "asymptote undefined")
    root, mult = dominant[0]
    nu_max = math.log(root.real) / math.log(model.base)
    if abs(nu_max - 1) <= tol:
        if mult > 1:
            return AsymptoteReport("log-divergent", None, 1.0, mult, mult - 1)
        table = model.coefficients
        col = next(c for c, (r, j) in enumerate(table.columns) if r == root and j == 0)
        value = complex(table.matrix[:, col] @ np.asarray(model.evector, dtype=float))
        return AsymptoteReport("finite", value.real, 1.0, 1)
    if nu_max > 1:
        return AsymptoteReport("power-divergent", None, nu_max, mult)
    return AsymptoteReport("vanishes", 0.0, nu_max, mult)


def model_feasibility(model: ScalingModel) -> FeasibilityReport:
    """Run every necessary condition that applies to ``model``."""
    e = model.evector
    items = [_ge("evector_nonnegative", min(e), 0)]
    if model.q == 2:
        x, y = (float(p) for p in model.closure_params)
        items.extend(check_2additive_feasibility(e[0], e[1], x, y))
    if is_osd_model(model):
        items.extend(check_osd_consistency(model.base, e[1], e[2]))
    try:
        report = asymptote(model)
    except QAdditiveError:
        report = None
    if report is not None and report.kind == "finite":
        items.append(_ge("asymptote_nonnegative", report.value, 0))
    return FeasibilityReport(tuple(items))


def is_osd_model(model: ScalingModel) -> bool:
    return (model.q == 3 and model.exponents is not None and model.evector[0] == 0
            and sorted(float(v) for v in model.exponents) == sorted(OSD_EXPONENTS))


@dataclass(frozen=True)
class OsdModelSpec:
    """Inputs of the superactivated three-additive model.

    ``a`` is the superactivation copy number, ``e2`` the value at ``a``
    copies and ``e3`` the value at ``a**2`` copies; ``e1`` is zero.
    """

    a: int
    e2: float
    e3: float
    d: int | None = None
    fidelity: float | None = None
    epsilon: float | None = None

    def __post_init__(self):
        if int(self.a) != self.a or self.a < 2:
            raise QAdditiveError("superactivation copy number must be an integer >= 2")
        if not (self.e2 > 0 and self.e3 > 0):
            raise QAdditiveError("e2 and e3 must be positive")


def _per_copy(n, value) -> float:
    return float(Fraction(n) * Fraction(value))


# Linear-program inputs for isotropic two-qudit states, error tolerance 1e-3.
OSD_INPUTS = {
    2: OsdModelSpec(6, 1.0, _per_copy(36, "0.405"), d=2, fidelity=0.96, epsilon=0.001),
    3: OsdModelSpec(6, 1.0, _per_copy(36, "0.518"), d=3, fidelity=0.9, epsilon=0.001),
    4: OsdModelSpec(5, 1.0, _per_copy(25, "0.659"), d=4, fidelity=0.9, epsilon=0.001),
}
# default table range (largest N) for each dimension
OSD_NMAX = {2: 50, 3: 40, 4: 30}


def build_osd_model(spec: OsdModelSpec) -> ScalingModel:
    """Three-additive model with exponents (1, 1/2, 0) and ``e = (0, e2, e3)``.

    A failed consistency check warns and is recorded in ``model.notes``;
    the model is still returned.
    """
    notes = [f"osd: a={spec.a} e2={spec.e2!r} e3={spec.e3!r}"]
    if spec.d is not None:
        notes.append(f"d={spec.d} F={spec.fidelity} eps={spec.epsilon}")
    check = check_osd_consistency(spec.a, spec.e2, spec.e3)
    if not check.ok:
        msg = f"e3 < (sqrt(a)+1) e2 (margin {check['osd_consistency'].margin:.6g}): negative asymptote"
        warnings.warn(msg, FeasibilityWarning, stacklevel=2)
        notes.append("warning: " + msg)
    return ScalingModel(int(spec.a), (0.0, float(spec.e2), float(spec.e3)),
                        exponents=OSD_EXPONENTS, notes=tuple(notes))


def osd_regularized(N, a, e2, e3):
    """Per-copy OSD model written out term by term (independent of the
    spectral machinery)."""
    r = math.sqrt(a)
    N = np.asarray(N, dtype=float)
    c2 = -((r + 1) / ((a - r) * (a - 1))
           + (a + 1) / ((r - a) * (r - 1) * np.sqrt(N))
           + (a + r) / ((1 - a) * (1 - r) * N))
    c3 = (1 / ((a - r) * (a - 1))
          + 1 / ((r - a) * (r - 1) * np.sqrt(N))
          + 1 / ((1 - a) * (1 - r) * N))
    out = c2 * e2 + c3 * e3
    return float(out) if out.ndim == 0 else out


def osd_asymptote(a, e2, e3) -> float:
    """``(e3 - (sqrt(a) + 1) e2) / ((a - sqrt(a)) (a - 1))``."""
    r = math.sqrt(a)
    return (-(r + 1) * e2 + e3) / ((a - r) * (a - 1))


def regularized_curve(model: ScalingModel, N_list: Iterable) -> list:
    """``[(N, E(N)/N), ...]`` in input order."""
    N = np.asarray(list(N_list), dtype=float)
    if np.any(N < 1):
        raise QAdditiveError("copy counts must be >= 1")
    vals = closed_form_eval(model, N) / N
    return [(float(n), float(v)) for n, v in zip(N, vals)]
