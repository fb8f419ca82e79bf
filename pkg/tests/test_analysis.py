import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import constants as sc
from scipy import integrate

from casimir_nernst.analysis import (
    crossover_temperature,
    default_fit_temperatures,
    fit_asymptotic_coefficients,
    regime_report,
    relation,
    scaling_check,
)
from casimir_nernst.errors import ConfigError, FitError, RegimeError
from casimir_nernst.lifshitz import PlateSystem, ThermalCorrection
from casimir_nernst.materials import ConstantRelaxation, Drude, Plasma, gold_bloch_gruneisen

NU0_TYPICAL = 34.5e-3
NU0_BEST = 34.5e-6


def c1_oracle(omega_p_mev, nu0_mev):
    """Leading low-temperature coefficient from the TM zero-frequency-free expansion.

    For zeta << nu << omega_p the Drude permittivity is ~ omega_p^2/(zeta nu),
    and the T^2 term of Delta F reduces to a one-dimensional integral of
    t ln(1 - rho^2) with rho = -(sqrt(t^2+1) - t)^2.
    """
    g1, _ = integrate.quad(lambda t: t * math.log1p(-((math.sqrt(t * t + 1) - t) ** 4)),
                           0, math.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    wp = omega_p_mev * 1e-3 * sc.e / sc.hbar
    nu = nu0_mev * 1e-3 * sc.e / sc.hbar
    return -g1 * sc.k**2 * wp**2 / (12 * sc.hbar * sc.c**2 * nu)


# ----------------------------------------------------------------- regimes


def test_relation_rules():
    assert relation(1.0, 10.0) == "much_less"
    assert relation(10.0, 1.0) == "much_greater"
    assert relation(5.0, 10.0) == "less"
    assert relation(10.0, 5.0) == "greater"
    assert relation(2.0, 10.0, strong_ratio=0.2) == "much_less"


def test_regime_examples():
    bg = gold_bloch_gruneisen()
    r300 = regime_report(bg, 300.0, 10)
    assert r300.entries[0].relation == "greater"
    assert r300.nu == 34.5
    assert all(e.relation in ("greater", "much_greater") for e in r300.entries)
    assert r300.boundary_index == 1
    r10 = regime_report(bg, 10.0, 1)
    assert r10.entries[0].relation == "much_greater"
    low = regime_report(ConstantRelaxation(NU0_TYPICAL), 1e-4, 10)
    assert {e.relation for e in low.entries} == {"much_less"}
    assert low.boundary_index is None


_ORDER = {"much_less": 0, "less": 1, "greater": 2, "much_greater": 3}


@given(T=st.floats(1e-6, 800.0), nu0=st.floats(0.0, 50.0), m_max=st.integers(1, 40))
def test_regime_monotone_in_m(T, nu0, m_max):
    r = regime_report(gold_bloch_gruneisen(nu0), T, m_max)
    ranks = [_ORDER[e.relation] for e in r.entries]
    assert ranks == sorted(ranks)
    b = r.boundary_index
    if b is not None:
        assert all(e.relation in ("much_less", "less") for e in r.entries[: b - 1])
        assert all(e.relation in ("greater", "much_greater") for e in r.entries[b - 1:])


@pytest.mark.parametrize("kwargs", [
    {"T": 0.0, "m_max": 1},
    {"T": 1.0, "m_max": 0},
    {"T": 1.0, "m_max": 1.5},
    {"T": 1.0, "m_max": 1, "strong_ratio": 0.0},
    {"T": 1.0, "m_max": 1, "strong_ratio": 0.3},
])
def test_regime_report_validation(kwargs):
    with pytest.raises(ConfigError):
        regime_report(ConstantRelaxation(1.0), **kwargs)


def test_crossover_examples():
    typ = crossover_temperature(NU0_TYPICAL, 10, 0.1)
    best = crossover_temperature(NU0_BEST, 10, 0.1)
    assert typ == pytest.approx(6.4e-4, rel=0.01)
    assert best == pytest.approx(6.4e-7, rel=0.01)
    assert 1e-4 <= typ <= 1e-3 and 1e-7 <= best <= 1e-6
    assert crossover_temperature(NU0_TYPICAL, 1, 0.1) == pytest.approx(10 * typ, rel=1e-15)


def test_crossover_is_the_regime_boundary():
    tc = crossover_temperature(NU0_TYPICAL, 10, 0.1)
    nu = ConstantRelaxation(NU0_TYPICAL)
    assert regime_report(nu, tc * (1 - 1e-9), 10).entries[-1].relation == "much_less"
    assert regime_report(nu, tc * (1 + 1e-9), 10).entries[-1].relation == "less"


@given(nu0=st.floats(1e-9, 1e3), n=st.integers(1, 1000), r=st.floats(1e-3, 0.2), k=st.floats(1e-3, 1e3))
def test_crossover_linearity(nu0, n, r, k):
    base = crossover_temperature(nu0, n, r)
    assert crossover_temperature(k * nu0, n, r) == pytest.approx(k * base, rel=1e-13)
    assert crossover_temperature(nu0, n, r * min(k, 1.0)) == pytest.approx(min(k, 1.0) * base, rel=1e-13)
    assert crossover_temperature(nu0, 1, r) == pytest.approx(n * base, rel=1e-13)


@pytest.mark.parametrize("args", [(0.0, 10, 0.1), (1.0, 0, 0.1), (1.0, 2.5, 0.1), (1.0, 10, 0.0)])
def test_crossover_validation(args):
    with pytest.raises(ConfigError):
        crossover_temperature(*args)


def test_default_window_fractions():
    T = default_fit_temperatures(NU0_TYPICAL)
    tc = crossover_temperature(NU0_TYPICAL)
    assert T.size == 8
    assert T[0] == pytest.approx(2e-5 * tc) and T[-1] == pytest.approx(2e-4 * tc)


# ----------------------------------------------------------------- fit


def test_typical_fit_matches_analytic_c1(typical_fit):
    fit = typical_fit.value
    assert fit.C1 == pytest.approx(c1_oracle(9000.0, NU0_TYPICAL), rel=0.01)


def test_synthetic_fit_matches_analytic_c1(synthetic_fit):
    assert synthetic_fit.value.C1 == pytest.approx(c1_oracle(9000.0, 3.45), rel=0.01)


def test_fit_diagnostics_and_signs(typical_fit):
    fit = typical_fit.value
    assert fit.C1 > 0 and fit.C2 > 0
    assert fit.rms_residual < 1e-3
    assert 0 < fit.C1_error < 1e-2 * fit.C1
    assert 0 < fit.C2_error < 0.05 * fit.C2
    assert fit.separation == 1e-6 and fit.nu0 == NU0_TYPICAL
    t_hi = fit.fit_window[1]
    T = np.array([0.9 * t_hi, t_hi])
    assert np.all(fit.thermal_correction(T) > 0)
    assert np.all(fit.entropy(T) < 0)
    d = fit.to_dict()
    assert d["C1_J_per_m2_K2"] == fit.C1 and len(d["points"]) == 8


def test_fitted_c1_is_extrapolated_limit(typical_fit):
    fit = typical_fit.value
    T = np.array(fit.temperatures)
    y = np.array(fit.delta_f) / T**2
    s = np.sqrt(T)
    limit = y[0] - s[0] * (y[1] - y[0]) / (s[1] - s[0])
    assert abs(limit - fit.C1) <= 2 * fit.C1_error


def test_fitted_form_reproduces_points(typical_fit):
    fit = typical_fit.value
    model = fit.thermal_correction(np.array(fit.temperatures))
    assert np.allclose(model, fit.delta_f, rtol=1e-3, atol=0)


@pytest.mark.parametrize("pick", [[0, 1, 3, 4, 6, 7], [0, 2, 3, 5, 6, 7]])
def test_fit_subsample_invariance(impure_system, typical_fit, pick):
    fit = typical_fit.value
    sub = fit_asymptotic_coefficients(impure_system, np.array(fit.temperatures)[pick])
    assert abs(sub.C1 - fit.C1) < fit.C1_error
    assert abs(sub.C2 - fit.C2) < fit.C2_error


def test_fit_parallel_matches_serial(synthetic_system, synthetic_fit):
    par = fit_asymptotic_coefficients(synthetic_system, jobs=2)
    assert par == synthetic_fit.value


def test_fit_rejects_wrong_models():
    for perm in (Plasma(9000.0), Drude(9000.0, gold_bloch_gruneisen(0.01)), Drude(9000.0, ConstantRelaxation(0.0))):
        with pytest.raises(RegimeError):
            fit_asymptotic_coefficients(PlateSystem(1e-6, perm))


def test_fit_rejects_points_above_crossover(impure_system):
    tc = crossover_temperature(NU0_TYPICAL)
    with pytest.raises(RegimeError):
        fit_asymptotic_coefficients(impure_system, np.geomspace(0.1 * tc, 2 * tc, 8))


@pytest.mark.parametrize("temps", [
    np.geomspace(1e-8, 1e-7, 5),        # too few points
    np.geomspace(1e-8, 5e-8, 8),        # less than a decade
    np.array([1e-8, 1e-8, 2e-8, 5e-8, 8e-8, 1e-7]),  # repeated point
])
def test_fit_point_validation(impure_system, temps):
    with pytest.raises(FitError):
        fit_asymptotic_coefficients(impure_system, temps)


def _fake_correction(values):
    it = iter(values)

    def fake(system, T):
        return ThermalCorrection(T, float(next(it)(T)), 0.0, 0)

    return fake


def test_fit_refuses_nonlinear_data(monkeypatch, impure_system):
    from casimir_nernst import analysis

    T = np.geomspace(1e-8, 1e-7, 8)
    monkeypatch.setattr(analysis, "thermal_correction", _fake_correction([lambda t: t**2 * (2 + math.sin(3e8 * t))] * 8))
    with pytest.raises(FitError, match="not linear"):
        fit_asymptotic_coefficients(impure_system, T)


def test_fit_refuses_wrong_signs(monkeypatch, impure_system):
    from casimir_nernst import analysis

    T = np.geomspace(1e-8, 1e-7, 8)
    monkeypatch.setattr(analysis, "thermal_correction", _fake_correction([lambda t: t**2 * (1 + math.sqrt(t))] * 8))
    with pytest.raises(FitError, match="wrong sign"):
        fit_asymptotic_coefficients(impure_system, T)


def test_entropy_error_shape(typical_fit):
    fit = typical_fit.value
    T = np.array(fit.temperatures)
    err = fit.entropy_error(T)
    assert err.shape == T.shape and np.all(err > 0)
    assert float(fit.entropy_error(T[0])) == pytest.approx(err[0])


# ----------------------------------------------------------------- scaling


def test_scaling_pair(scaling_table):
    table = scaling_table.value
    assert [r.nu0 for r in table.rows] == [3.45, 0.345]
    assert table.c1_spread < 0.05 and table.c2_spread < 0.05
    assert table.consistent()
    r0, r1 = table.rows
    assert r1.C1 / r0.C1 == pytest.approx(10.0, rel=0.05)
    assert r1.C2 / r0.C2 == pytest.approx(math.sqrt(10.0), rel=0.05)


def test_scaling_single_row(synthetic_fit):
    table = scaling_check(1e-6, [3.45])
    assert len(table.rows) == 1 and table.consistent()
    row = table.rows[0]
    assert row.C1 == synthetic_fit.value.C1
    assert row.C1_nu0 == pytest.approx(row.C1 * 3.45)
    assert row.C2_sqrt_nu0 == pytest.approx(row.C2 * math.sqrt(3.45))


def test_scaling_rejects_empty_list():
    with pytest.raises(ConfigError):
        scaling_check(1e-6, [])


def test_best_to_typical_c2_ratio(typical_fit):
    best = fit_asymptotic_coefficients(PlateSystem(1e-6, Drude(9000.0, ConstantRelaxation(NU0_BEST))))
    assert best.C2 / typical_fit.value.C2 == pytest.approx(3028.0 / 95.75, rel=0.10)
    assert best.C1 / typical_fit.value.C1 == pytest.approx(1e3, rel=0.05)
