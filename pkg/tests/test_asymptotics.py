"""Long-time law prediction, constant estimation, residual reports."""

import io
import math

import numpy as np
import pytest

from dephasing import (
    BathSpec,
    DephasingCurve,
    QuadConfig,
    RegimeClass,
    SpectralDensity,
    a_const,
    alpha_const,
    coherence_law,
    estimate_constant,
    gamma0,
    gamma_of_t,
    predict_law,
    residual_report,
)
from dephasing.errors import RegimeError


def flicker_bath() -> BathSpec:
    # J = w^0.1 exp(-w): low-frequency coefficient 1, beta = 1
    return BathSpec(1.0, SpectralDensity.power_law(1.0, 0.1, 0.5))


class TestPredictLaw:
    def test_ohmic_exponential_law(self, ohmic_b1):
        law = predict_law(ohmic_b1)
        assert law.regime.regime_class is RegimeClass.EXPONENTIAL
        assert law.gamma0 == pytest.approx(math.pi)
        assert law.alpha == pytest.approx(-2.0)
        assert law.constant is None and law.constant_estimable

    def test_drude_has_no_log_term(self, drude_b1):
        law = predict_law(drude_b1)
        assert law.gamma0 == pytest.approx(math.pi)
        assert law.alpha == 0.0
        # alpha = 0 must not poison the law value at t = 0
        assert law.known_terms(0.0) == 0.0

    def test_zero_temperature_ohmic_power_law(self, ohmic_zero_t):
        law = predict_law(ohmic_zero_t)
        assert law.regime.regime_class is RegimeClass.POWER_LAW
        assert law.gamma0 is None
        assert law.alpha == pytest.approx(1.0)

    def test_superexponential_flicker(self):
        law = predict_law(flicker_bath())
        assert law.regime.regime_class is RegimeClass.SUPEREXPONENTIAL
        assert law.power_exponent == pytest.approx(1.9)
        assert not law.constant_estimable

    def test_partial_carries_plateau(self):
        b = BathSpec(math.inf, SpectralDensity.power_law(1.0, 2.0, 0.5))
        law = predict_law(b)
        assert law.regime.regime_class is RegimeClass.PARTIAL
        assert law.constant == pytest.approx(1.0, rel=1e-9)

    def test_constants_identical_to_spectral_module(self, ohmic_b1, ohmic_zero_t):
        assert predict_law(ohmic_b1).gamma0 == gamma0(ohmic_b1)
        assert predict_law(ohmic_b1).alpha == alpha_const(ohmic_b1)
        assert predict_law(ohmic_zero_t).alpha == alpha_const(ohmic_zero_t)
        fl = flicker_bath()
        assert predict_law(fl).power_coeff == a_const(fl)


class TestEstimateConstant:
    def synthetic_curve(self, constant=0.7):
        ts = np.linspace(40.0, 120.0, 200)
        gs = math.pi * ts - 2.0 * np.log(ts) + constant
        return DephasingCurve(ts, gs)

    def test_recovers_exact_member(self, ohmic_b1):
        law = predict_law(ohmic_b1)
        est = estimate_constant(law, self.synthetic_curve(0.7))
        assert est.value == pytest.approx(0.7, abs=1e-10)
        assert est.std < 1e-10

    def test_explicit_window(self, ohmic_b1):
        law = predict_law(ohmic_b1)
        est = estimate_constant(law, self.synthetic_curve(-1.3), t_fit=50.0, t_hi=75.0)
        assert est.value == pytest.approx(-1.3, abs=1e-10)
        assert est.t_lo == 50.0 and est.t_hi == 75.0

    def test_zero_temperature_constant_vanishes(self, ohmic_zero_t):
        # 0.5 ln(1+t^2) - ln t -> 0, so the estimated constant is ~0
        ts = np.linspace(50.0, 100.0, 60)
        gs = 0.5 * np.log1p(ts**2)
        law = predict_law(ohmic_zero_t)
        est = estimate_constant(law, DephasingCurve(ts, gs))
        assert abs(est.value) < 1e-3

    def test_partial_regime_rejected(self):
        b = BathSpec(math.inf, SpectralDensity.power_law(1.0, 2.0, 0.5))
        curve = DephasingCurve(np.linspace(1.0, 10.0, 20), np.full(20, 0.9))
        with pytest.raises(RegimeError):
            estimate_constant(predict_law(b), curve)

    def test_superexponential_rejected(self):
        curve = DephasingCurve(np.linspace(1.0, 10.0, 20), np.linspace(0.1, 500.0, 20))
        with pytest.raises(RegimeError):
            estimate_constant(predict_law(flicker_bath()), curve)

    def test_coverage_precondition(self, ohmic_b1):
        law = predict_law(ohmic_b1)
        with pytest.raises(ValueError, match="coverage"):
            estimate_constant(law, self.synthetic_curve(), t_fit=100.0)


class TestResidualReport:
    def test_exponential_regime_decreasing_residuals(self, ohmic_b1):
        report = residual_report(ohmic_b1, [50.0, 100.0, 150.0, 200.0])
        res = [abs(r.residual) for r in report.rows]
        assert res[0] >= res[1] >= res[2]
        assert max(res) < 1e-2
        assert report.c_hat is not None
        # exact constant for this bath is -ln(2 pi)
        assert report.c_hat.value == pytest.approx(-math.log(2.0 * math.pi), abs=1e-3)

    def test_power_law_regime_small_residual(self, ohmic_zero_t):
        ts = np.geomspace(10.0, 100.0, 25)
        report = residual_report(ohmic_zero_t, ts)
        last = report.rows[-1]
        assert last.t == pytest.approx(100.0)
        assert abs(last.residual) < 1e-3

    def test_partial_regime_rejected(self):
        b = BathSpec(math.inf, SpectralDensity.power_law(1.0, 2.0, 0.5))
        with pytest.raises(RegimeError):
            residual_report(b, [1.0, 2.0, 4.0])

    def test_superexponential_normalized_bounded(self):
        b = flicker_bath()
        ts = np.array([5.0, 10.0, 20.0, 40.0, 80.0])
        report = residual_report(b, ts, QuadConfig(omega_c=1.0, rel_tol=1e-9))
        norms = [abs(r.normalized) for r in report.rows if r.normalized is not None]
        assert len(norms) == len(ts)
        assert max(norms) < 10.0 * min(norms)  # bounded, no growth trend
        assert report.c_hat is None

    def test_flicker_power_ratio_approaches_coefficient(self):
        # Gamma(t)/t^1.9 within 5 percent of the predicted coefficient by t = 100
        b = flicker_bath()
        big_a = a_const(b)
        ratio = gamma_of_t(b, 100.0) / (big_a * 100.0**1.9)
        assert abs(ratio - 1.0) < 0.05

    def test_json_and_csv_exports(self, ohmic_zero_t):
        report = residual_report(ohmic_zero_t, np.geomspace(5.0, 50.0, 9))
        doc = report.to_json_dict()
        assert doc["regime"] == "PowerLaw"
        assert "alpha" in doc["constants"] and "c_hat" in doc["constants"]
        assert len(doc["residuals"]) == 9
        buf = io.StringIO()
        report.write_csv(buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == "t,exact,law,residual"
        assert len(lines) == 10

    def test_grid_validation(self, ohmic_b1):
        with pytest.raises(ValueError):
            residual_report(ohmic_b1, [3.0, 2.0, 1.0])


class TestCoherenceLaw:
    def test_exponential_shape(self, ohmic_b1):
        # alpha = -2: |rho10| ~ t^2 exp(-pi t) up to a constant
        t = 2.0
        expected = t**2 * math.exp(-math.pi * t)
        assert coherence_law(ohmic_b1, t) == pytest.approx(expected, rel=1e-12)

    def test_partial_constant(self):
        b = BathSpec(math.inf, SpectralDensity.power_law(1.0, 2.0, 0.5))
        val = coherence_law(b, 3.0)
        assert val == pytest.approx(math.exp(-1.0), rel=1e-9)
        assert coherence_law(b, 300.0) == val

    def test_unity_at_zero_without_log_terms(self, drude_b1):
        assert coherence_law(drude_b1, 0.0) == 1.0

    def test_vectorized(self, ohmic_zero_t):
        ts = np.array([1.0, 2.0, 4.0])
        np.testing.assert_allclose(coherence_law(ohmic_zero_t, ts), 1.0 / ts, rtol=1e-12)
