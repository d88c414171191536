"""Least-squares estimation of q-additive models from (N, E_total) data.

``E(N)`` is linear in the e-vector once the exponents are fixed, so the
inner problem is a (optionally non-negative) linear least-squares solve.
Exponents are found by an outer deterministic search: a coarse grid,
coordinate-wise bounded scalar minimisation, then a joint variable-projection
least-squares polish (the e-vector is re-solved at every trial exponent).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize_scalar, nnls

from .analysis import FeasibilityReport, model_feasibility
from .errors import FitConvergenceError, QAdditiveError, RankDeficiencyError
from .model import ScalingModel, closed_form_eval, coefficient_vector, _real_part

MAX_SEARCH_Q = 4  # the full grid grows as 41**q
COORD_SWEEPS = 10  # warm start only; the joint polish does the rest


@dataclass(frozen=True)
class FitProblem:
    """Data and structure for a fit.

    ``values`` are total quantifier values (not per copy).  ``exponents``
    holds fixed exponents; entries set to None are free for
    :func:`fit_exponents`.  ``fixed_e`` pins e-components by index.
    """

    N: tuple
    values: tuple
    base: int
    q: int
    exponents: tuple | None = None
    fixed_e: Mapping[int, float] = field(default_factory=dict)
    nonneg: bool = True
    per_copy: bool = True

    def __post_init__(self):
        object.__setattr__(self, "N", tuple(float(n) for n in self.N))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.N) != len(self.values) or not self.N:
            raise QAdditiveError("need matching, non-empty N and values")
        if min(self.N) < 1:
            raise QAdditiveError("copy counts must be >= 1")
        if self.exponents is not None and len(self.exponents) != self.q:
            raise QAdditiveError(f"expected {self.q} exponents")
        if any(not 0 <= i < self.q for i in self.fixed_e):
            raise QAdditiveError("fixed_e index out of range")
        n_free = self.q - len(self.fixed_e)
        if self.exponents is None:
            n_free += self.q
        else:
            n_free += sum(v is None for v in self.exponents)
        if len(self.N) < n_free:
            raise QAdditiveError(f"{len(self.N)} data points for {n_free} free parameters")

    @classmethod
    def from_dataset(cls, dataset, base, q, **kwargs) -> "FitProblem":
        return cls(tuple(dataset.N), tuple(dataset.E_total), base, q, **kwargs)


@dataclass(frozen=True)
class FitResult:
    exponents: tuple
    evector: tuple
    rms: float
    residuals: tuple
    feasibility: FeasibilityReport | None
    model: ScalingModel | None


def _skeleton(base, exponents):
    return ScalingModel(int(base), (0.0,) * len(exponents), exponents=tuple(float(v) for v in exponents))


def _design(problem, exponents):
    sk = _skeleton(problem.base, exponents)
    return _real_part(coefficient_vector(sk, np.asarray(problem.N)), "design matrix")


def _solve(problem, exponents):
    G = _design(problem, exponents)
    N = np.asarray(problem.N)
    y = np.asarray(problem.values)
    w = 1 / N if problem.per_copy else np.ones_like(N)
    fixed = sorted(problem.fixed_e)
    free = [m for m in range(problem.q) if m not in problem.fixed_e]
    e = np.zeros(problem.q)
    for m in fixed:
        e[m] = problem.fixed_e[m]
    rhs = w * (y - G[:, fixed] @ e[fixed])
    A = w[:, None] * G[:, free]
    if free:
        sv = np.linalg.svd(A, compute_uv=False)
        rank = int(np.sum(sv > sv[0] * max(A.shape) * np.finfo(float).eps)) if sv[0] > 0 else 0
        if rank < len(free):
            raise RankDeficiencyError(
                f"design matrix rank {rank} < {len(free)} free components "
                f"(condition {sv[0] / sv[-1] if sv[-1] else math.inf:.3g})", rank, sv)
        if problem.nonneg:
            sol, _ = nnls(A, rhs)
        else:
            sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
        e[free] = sol
    return e


def _finish(problem, exponents, e) -> FitResult:
    N = np.asarray(problem.N)
    exponents = tuple(float(v) for v in exponents)
    model = None
    feas = None
    if np.all(e >= 0):
        model = ScalingModel(int(problem.base), tuple(float(v) for v in e), exponents=exponents)
        pred = closed_form_eval(model, N)
        feas = model_feasibility(model)
    else:
        pred = _design(problem, exponents) @ e
    res = (pred - np.asarray(problem.values)) / N
    rms = float(np.sqrt(np.mean(res ** 2)))
    return FitResult(exponents, tuple(float(v) for v in e), rms,
                     tuple(float(r) for r in res), feas, model)


def fit_evector(problem: FitProblem, exponents: Sequence[float] | None = None) -> FitResult:
    """Least-squares e-vector for fixed exponents.

    Non-negativity (default) uses the Lawson-Hanson active-set solver.
    With as many points as free components the fit interpolates.
    """
    exponents = problem.exponents if exponents is None else exponents
    if exponents is None or any(v is None for v in exponents):
        raise QAdditiveError("fit_evector needs all exponents fixed")
    e = _solve(problem, exponents)
    return _finish(problem, exponents, e)


def _residuals(problem, nu) -> np.ndarray:
    e = _solve(problem, nu)
    N = np.asarray(problem.N)
    return (_design(problem, nu) @ e - np.asarray(problem.values)) / N


def _objective(problem, nu) -> float:
    try:
        res = _residuals(problem, nu)
    except QAdditiveError:
        return math.inf
    return float(np.mean(res ** 2))


def _polish(problem, nu, free, bounds, max_nfev, xtol):
    """Joint Gauss-Newton refinement of the free exponents; returns (nu, value, converged)."""
    lo, hi = bounds
    penalty = np.full(len(problem.N), 1e6)

    def fun(x):
        trial = list(nu)
        for i, v in zip(free, x):
            trial[i] = float(v)
        try:
            return _residuals(problem, trial)
        except QAdditiveError:  # crossing exponents can make the basis singular
            return penalty

    x0 = np.clip([nu[i] for i in free], lo, hi)
    r = least_squares(fun, x0, bounds=(lo, hi), method="trf", jac="3-point",
                      xtol=max(xtol, np.finfo(float).eps), ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
    out = list(nu)
    for i, v in zip(free, r.x):
        out[i] = float(v)
    return out, _objective(problem, out), r.status > 0


def exponent_grid(problem: FitProblem, bounds=(-0.5, 1.5), step=0.05) -> list:
    lo, hi = bounds
    free = [float(v) for v in np.round(np.arange(lo, hi + step / 2, step), 10)]
    fixed = problem.exponents or (None,) * problem.q
    return [free if v is None else [float(v)] for v in fixed]


def fit_exponents(problem: FitProblem, grid: Sequence[Sequence[float]] | None = None,
                  bounds=(-0.5, 1.5), step: float = 0.05, refine: bool = True,
                  max_iter: int = 200, xtol: float = 1e-11) -> FitResult:
    """Search exponents minimising the per-copy RMS residual.

    ``grid`` gives candidate values per coordinate; a single-valued
    coordinate stays fixed during refinement.  The search is fully
    deterministic.  Raises :class:`FitConvergenceError` (with ``best``) if
    the joint polish has not converged after ``max_iter`` Gauss-Newton
    iterations.
    """
    if problem.q > MAX_SEARCH_Q:
        raise QAdditiveError(f"exponent search supports q <= {MAX_SEARCH_Q}, got {problem.q}")
    grid = exponent_grid(problem, bounds, step) if grid is None else [list(map(float, g)) for g in grid]
    if len(grid) != problem.q:
        raise QAdditiveError(f"grid needs {problem.q} coordinates")
    best_nu, best = None, math.inf
    seen = set()
    for nu in itertools.product(*grid):
        key = tuple(sorted(nu))
        if key in seen:
            continue
        seen.add(key)
        val = _objective(problem, nu)
        if val < best:
            best_nu, best = list(nu), val
    if best_nu is None:
        raise FitConvergenceError("no admissible grid point")

    free = [i for i, g in enumerate(grid) if len(g) > 1]
    if refine and free and best > 0:
        lo, hi = bounds
        for _ in range(COORD_SWEEPS):
            moved = 0.0
            for i in free:
                def f(v, i=i):
                    trial = list(best_nu)
                    trial[i] = v
                    return _objective(problem, trial)
                a, b = max(lo, best_nu[i] - step), min(hi, best_nu[i] + step)
                r = minimize_scalar(f, bounds=(a, b), method="bounded",
                                    options={"xatol": xtol, "maxiter": 500})
                if r.fun < best:
                    moved = max(moved, abs(r.x - best_nu[i]))
                    best_nu[i], best = float(r.x), float(r.fun)
            if moved <= xtol or best == 0:
                break
        if best > 0:
            nu, val, ok = _polish(problem, best_nu, free, bounds, max_iter * (2 * len(free) + 1), xtol)
            if val <= best:
                best_nu, best = nu, val
            if not ok:
                raise FitConvergenceError(f"exponent refinement not converged within {max_iter} iterations",
                                          best=fit_evector(problem, best_nu))
    return fit_evector(problem, best_nu)


def hypothesis_residual(model: ScalingModel, dataset) -> float:
    """Per-copy RMS distance between a model and ``(N, E_total)`` data.

    ``dataset`` is a :class:`~qadditive.io.DatasetFile` or an ``(N, E)`` pair.
    """
    if hasattr(dataset, "E_total"):
        N, E = dataset.N, dataset.E_total
    else:
        N, E = dataset
    N = np.asarray(N, dtype=float)
    E = np.asarray(E, dtype=float)
    if N.size == 0:
        raise QAdditiveError("empty dataset")
    res = closed_form_eval(model, N) / N - E / N
    return float(np.sqrt(np.mean(res ** 2)))
