import numpy as np
import pytest

from qadditive.analysis import OSD_INPUTS, build_osd_model
from qadditive.errors import FitConvergenceError, QAdditiveError, RankDeficiencyError
from qadditive.fit import FitProblem, exponent_grid, fit_evector, fit_exponents, hypothesis_residual
from qadditive.io import DatasetFile
from qadditive.model import ScalingModel, closed_form_eval, coefficient_vector


def synth(model, Ns):
    Ns = np.asarray(Ns, dtype=float)
    return tuple(Ns), tuple(closed_form_eval(model, Ns))


class TestEvector:
    def test_round_trip_on_lattice(self):
        truth = ScalingModel(6, (0.3, 1.0, 18.648), exponents=(1.0, 0.5, 0.0))
        N, E = synth(truth, [1, 6, 36])
        r = fit_evector(FitProblem(N, E, 6, 3, exponents=(1.0, 0.5, 0.0)))
        np.testing.assert_allclose(r.evector, truth.evector, rtol=1e-10, atol=1e-12)
        assert r.rms <= 1e-12

    def test_osd_interpolation(self):
        r = fit_evector(FitProblem((6, 36), (1.0, 18.648), 6, 3, exponents=(1.0, 0.5, 0.0),
                                   fixed_e={0: 0.0}))
        assert r.evector[0] == 0
        assert r.evector[1] == pytest.approx(1.0, rel=1e-12)
        assert r.evector[2] == pytest.approx(18.648, rel=1e-12)
        assert r.feasibility.ok
        assert closed_form_eval(r.model, 40) / 40 == pytest.approx(0.5335, abs=1e-3)

    def test_zero_data(self):
        r = fit_evector(FitProblem((1, 2, 4, 8), (0, 0, 0, 0), 2, 2, exponents=(1.0, 0.5)))
        assert r.evector == (0.0, 0.0) and r.rms == 0

    def test_overdetermined_with_noise(self):
        truth = ScalingModel(3, (0.5, 2.0), exponents=(1.0, 0.4))
        N, E = synth(truth, range(1, 30))
        noisy = np.asarray(E) * (1 + 1e-3 * np.cos(np.arange(len(E))))
        r = fit_evector(FitProblem(N, noisy, 3, 2, exponents=(1.0, 0.4)))
        np.testing.assert_allclose(r.evector, truth.evector, rtol=1e-2)
        assert 0 < r.rms < 1e-2

    def test_nonneg_clamps(self):
        # data that prefer a negative first component
        truth_e = np.array([-0.5, 3.0])
        sk = ScalingModel(2, (1.0, 1.0), exponents=(1.0, 0.0))
        Ns = np.arange(1.0, 12.0)
        E = coefficient_vector(sk, Ns).real @ truth_e
        r = fit_evector(FitProblem(Ns, np.abs(E), 2, 2, exponents=(1.0, 0.0)))
        assert min(r.evector) >= 0
        free = fit_evector(FitProblem(Ns, E, 2, 2, exponents=(1.0, 0.0), nonneg=False))
        np.testing.assert_allclose(free.evector, truth_e, rtol=1e-10)
        assert free.model is None and free.feasibility is None

    def test_rank_deficiency(self):
        p = FitProblem((4, 4, 4), (1.0, 1.0, 1.0), 2, 2, exponents=(1.0, 0.5))
        with pytest.raises(RankDeficiencyError) as info:
            fit_evector(p)
        assert info.value.rank == 1

    def test_scaling_equivariance(self):
        truth = ScalingModel(5, (0.2, 1.0, 7.0), exponents=(1.0, 0.5, 0.0))
        N, E = synth(truth, [1, 3, 5, 11, 25, 60])
        p = FitProblem(N, E, 5, 3, exponents=(1.0, 0.5, 0.0))
        r1 = fit_evector(p)
        r2 = fit_evector(FitProblem(N, tuple(7.5 * v for v in E), 5, 3, exponents=(1.0, 0.5, 0.0)))
        np.testing.assert_allclose(np.array(r2.evector), 7.5 * np.array(r1.evector), rtol=1e-10, atol=1e-12)

    def test_total_weighting(self):
        truth = ScalingModel(2, (1.0, 2.0), exponents=(1.0, 0.5))
        N, E = synth(truth, [1, 2, 4, 8])
        r = fit_evector(FitProblem(N, E, 2, 2, exponents=(1.0, 0.5), per_copy=False))
        np.testing.assert_allclose(r.evector, truth.evector, rtol=1e-10)


class TestProblemValidation:
    def test_counts(self):
        with pytest.raises(QAdditiveError):
            FitProblem((1, 2), (1.0,), 2, 2)
        with pytest.raises(QAdditiveError):
            FitProblem((1, 2, 3), (1, 2, 3), 2, 2)  # 4 free parameters
        with pytest.raises(QAdditiveError):
            FitProblem((0.5, 2), (1, 2), 2, 2, exponents=(1, 0))
        with pytest.raises(QAdditiveError):
            FitProblem((1, 2), (1, 2), 2, 2, exponents=(1, 0), fixed_e={5: 1.0})

    def test_needs_exponents(self):
        with pytest.raises(QAdditiveError):
            fit_evector(FitProblem((1, 2, 3, 4), (1, 2, 3, 4), 2, 2))

    def test_from_dataset(self):
        ds = DatasetFile((6, 36), (1.0, 18.648))
        p = FitProblem.from_dataset(ds, 6, 3, exponents=(1, 0.5, 0), fixed_e={0: 0})
        assert p.N == (6.0, 36.0)


class TestExponents:
    def test_recovers_two_additive(self):
        truth = ScalingModel(2, (0.4, 1.7), exponents=(1.0, 0.5))
        N, E = synth(truth, [1, 2, 3, 4, 6, 8, 12, 16])
        r = fit_exponents(FitProblem(N, E, 2, 2))
        assert sorted(r.exponents) == pytest.approx([0.5, 1.0], abs=1e-8)
        assert r.rms <= 1e-10

    def test_linear_data(self):
        N = tuple(range(1, 9))
        r = fit_exponents(FitProblem(N, tuple(2.0 * n for n in N), 2, 2))
        assert r.rms <= 1e-10
        np.testing.assert_allclose(closed_form_eval(r.model, np.array(N, float)), 2.0 * np.array(N), rtol=1e-9)

    def test_restricted_grid(self):
        truth = build_osd_model(OSD_INPUTS[3])
        N, E = synth(truth, [1, 2, 4, 6, 10, 20, 36, 50])
        grid = [[1.0], [0.3, 0.4, 0.5, 0.6, 0.7], [0.0]]
        r = fit_exponents(FitProblem(N, E, 6, 3), grid=grid)
        assert r.exponents[0] == 1.0 and r.exponents[2] == 0.0
        assert r.exponents[1] == pytest.approx(0.5, abs=1e-8)
        np.testing.assert_allclose(r.evector, truth.evector, atol=1e-7)

    def test_deterministic(self):
        truth = ScalingModel(3, (0.2, 1.1), exponents=(0.9, 0.35))
        N, E = synth(truth, [1, 2, 3, 5, 9, 14, 27])
        p = FitProblem(N, E, 3, 2, exponents=(0.9, None))
        a, b = fit_exponents(p), fit_exponents(p)
        assert a.exponents == b.exponents and a.evector == b.evector and a.rms == b.rms
        assert a.exponents[1] == pytest.approx(0.35, abs=1e-8)

    def test_q_limit(self):
        N = tuple(range(1, 12))
        with pytest.raises(QAdditiveError):
            fit_exponents(FitProblem(N, N, 2, 5, exponents=(1, 0.5, 0, None, None)))

    def test_grid_shape(self):
        p = FitProblem((1, 2, 3), (1, 2, 3), 2, 2, exponents=(1.0, None))
        g = exponent_grid(p)
        assert g[0] == [1.0] and len(g[1]) == 41 and g[1][0] == -0.5 and g[1][-1] == 1.5

    def test_nonconvergence_reports_best(self):
        truth = ScalingModel(3, (0.2, 1.1), exponents=(0.93, 0.41))
        N, E = synth(truth, [1, 2, 3, 5, 9, 14, 27])
        with pytest.raises(FitConvergenceError) as info:
            fit_exponents(FitProblem(N, E, 3, 2), max_iter=1, xtol=0.0)
        assert info.value.best is not None and np.isfinite(info.value.best.rms)


def test_hypothesis_residual():
    m = build_osd_model(OSD_INPUTS[3])
    assert hypothesis_residual(m, DatasetFile((6, 36), (1.0, 18.648))) <= 1e-12
    r = hypothesis_residual(m, ((6, 36), (1.0 + 6 * 0.01, 18.648 + 36 * 0.01)))
    assert r == pytest.approx(0.01, rel=1e-9)
    with pytest.raises(QAdditiveError):
        hypothesis_residual(m, ((), ()))
