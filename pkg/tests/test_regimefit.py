import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motifpersist.errors import InsufficientDataError, ParameterError, ValidationError
from motifpersist.persistence import PersistenceCurve
from motifpersist.regimefit import (
    adjusted_triangle_exponent,
    fit_power_law,
    fit_two_regimes,
)


def piecewise_curve(exp_decay, exp_plateau, breakpoint, max_tau, noise=0.0, seed=0):
    """Continuous two-regime power law with multiplicative log-normal noise."""
    taus = np.arange(0, max_tau + 1, dtype=float)
    values = np.empty_like(taus)
    values[0] = 1.0
    t = taus[1:]
    scale = float(breakpoint) ** (exp_decay - exp_plateau)
    values[1:] = np.where(
        t <= breakpoint, t**exp_decay, scale * t**exp_plateau
    )
    if noise:
        rng = np.random.default_rng(seed)
        values[1:] *= np.exp(noise * rng.standard_normal(t.shape[0]))
    return PersistenceCurve("tetrahedron", taus, values)


class TestFitPowerLaw:
    def test_exact_power_law(self):
        taus = np.arange(1, 200, dtype=float)
        fit = fit_power_law(taus, taus**-0.5)
        assert fit.exponent == pytest.approx(-0.5, abs=1e-9)
        assert fit.mse == pytest.approx(0.0, abs=1e-18)

    def test_constant_values(self):
        taus = np.arange(1, 50, dtype=float)
        fit = fit_power_law(taus, np.full(49, 0.37))
        assert fit.exponent == pytest.approx(0.0, abs=1e-12)
        assert fit.log_intercept == pytest.approx(math.log(0.37), rel=1e-12)

    def test_noisy_recovery_table_magnitude(self):
        # exponent magnitude mirrors a realistic fast-decay regime
        rng = np.random.default_rng(42)
        taus = np.arange(1, 400, dtype=float)
        values = 2.0 * taus**-1.024 * np.exp(0.01 * rng.standard_normal(399))
        fit = fit_power_law(taus, values)
        assert fit.exponent == pytest.approx(-1.024, abs=0.03)

    def test_nonpositive_value_raises_or_drops(self):
        taus = np.array([1.0, 2.0, 3.0, 4.0])
        values = np.array([1.0, 0.0, 0.3, 0.2])
        with pytest.raises(ValidationError):
            fit_power_law(taus, values)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            fit = fit_power_law(taus, values, on_nonpositive="drop")
        assert fit.n_points == 3
        assert caught

    def test_too_few_points(self):
        with pytest.raises(InsufficientDataError):
            fit_power_law([1.0], [0.5])

    def test_tau_zero_excluded(self):
        fit = fit_power_law([0.0, 1.0, 2.0, 4.0], [5.0, 1.0, 0.5, 0.25])
        assert fit.n_points == 3
        assert fit.tau_lo == 1.0


class TestFitTwoRegimes:
    def test_recovers_planted_breakpoint(self):
        curve = piecewise_curve(-0.5, -0.05, 100, 400, noise=0.01, seed=1)
        fit = fit_two_regimes(curve)
        assert 90 <= fit.tau_plat <= 110
        assert fit.decay.exponent == pytest.approx(-0.5, abs=0.02)
        assert fit.plateau.exponent == pytest.approx(-0.05, abs=0.02)

    def test_single_regime_degenerates_to_smallest_k(self):
        # pure power law: near-zero MSE everywhere, exponents agree
        curve = piecewise_curve(-0.4, -0.4, 100, 300)
        fit = fit_two_regimes(curve, min_segment=10)
        assert fit.decay.exponent == pytest.approx(fit.plateau.exponent, abs=1e-6)
        assert fit.combined_mse == pytest.approx(0.0, abs=1e-18)

    def test_exact_ties_return_smallest_k(self):
        # constant 1.0: ln is exactly 0, so every breakpoint ties at MSE 0
        taus = np.arange(0, 101, dtype=float)
        values = np.ones(101)
        curve = PersistenceCurve("edge", taus, values)
        fit = fit_two_regimes(curve, min_segment=10)
        assert fit.combined_mse == 0.0
        assert fit.tau_plat == 10  # smallest admissible breakpoint

    def test_argmin_beats_random_breakpoints(self):
        curve = piecewise_curve(-0.6, -0.08, 80, 400, noise=0.02, seed=3)
        fit = fit_two_regimes(curve)
        taus = curve.taus[1:]
        values = curve.values[1:]
        rng = np.random.default_rng(7)
        for k in rng.choice(np.arange(15, 385), size=10, replace=False):
            k = int(k)
            left = fit_power_law(taus[:k], values[:k])
            right = fit_power_law(taus[k - 1 :], values[k - 1 :])
            assert fit.combined_mse <= (left.mse + right.mse) / 2.0 + 1e-15

    def test_scale_invariance(self):
        curve = piecewise_curve(-0.7, -0.1, 60, 300, noise=0.01, seed=5)
        scaled = PersistenceCurve(curve.kind, curve.taus, 7.3 * curve.values)
        a = fit_two_regimes(curve)
        b = fit_two_regimes(scaled)
        assert a.tau_plat == b.tau_plat
        assert a.decay.exponent == pytest.approx(b.decay.exponent, abs=1e-9)
        assert a.plateau.exponent == pytest.approx(b.plateau.exponent, abs=1e-9)
        assert b.decay.log_intercept - a.decay.log_intercept == pytest.approx(
            math.log(7.3), rel=1e-9
        )

    def test_too_few_points(self):
        curve = piecewise_curve(-0.5, -0.05, 5, 12)
        with pytest.raises(InsufficientDataError):
            fit_two_regimes(curve, min_segment=10)
        with pytest.raises(ParameterError):
            fit_two_regimes(curve, min_segment=1)

    def test_runtime_budget(self):
        import time

        curve = piecewise_curve(-0.5, -0.05, 100, 900, noise=0.01, seed=2)
        start = time.time()
        fit_two_regimes(curve)
        assert time.time() - start < 1.0


@settings(max_examples=20, deadline=None)
@given(
    st.floats(min_value=-1.1, max_value=-0.3),
    st.floats(min_value=-0.15, max_value=-0.01),
    st.integers(min_value=60, max_value=140),
)
def test_breakpoint_recovery_property(exp_decay, exp_plateau, breakpoint):
    curve = piecewise_curve(exp_decay, exp_plateau, breakpoint, 400, noise=0.01, seed=11)
    fit = fit_two_regimes(curve)
    assert abs(fit.tau_plat - breakpoint) <= max(3, 0.1 * breakpoint)
    assert fit.decay.exponent == pytest.approx(exp_decay, abs=0.03)
    assert fit.plateau.exponent == pytest.approx(exp_plateau, abs=0.03)


class TestAdjustedExponent:
    @pytest.mark.parametrize(
        "raw, adjusted",
        [(-0.398, -0.133), (-0.471, -0.157), (-0.458, -0.153), (-0.830, -0.277)],
    )
    def test_reference_rows(self, raw, adjusted):
        assert round(adjusted_triangle_exponent(raw), 3) == adjusted

    def test_zero(self):
        assert adjusted_triangle_exponent(0.0) == 0.0

    def test_is_exact_division(self):
        assert adjusted_triangle_exponent(-0.9) == -0.3
