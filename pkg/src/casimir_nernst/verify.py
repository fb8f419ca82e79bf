"""Golden verification suite with built-in Au defaults.

Each check returns a :class:`Check`; the report is plain text with one line
per check and no timings, so repeated runs are byte-identical.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, NamedTuple

import numpy as np

from .analysis import crossover_temperature, fit_asymptotic_coefficients, regime_report, scaling_check
from .lifshitz import NumericControls, PlateSystem, zero_temperature_energy
from .materials import (
    AU_NU0_BEST_MEV,
    AU_NU0_TYPICAL_MEV,
    AU_OMEGA_P_MEV,
    ConstantRelaxation,
    Drude,
    Plasma,
    gold_bloch_gruneisen,
    nu_at,
)
from .quantities import CONSTANTS, matsubara_frequency
from .thermo import classify_nernst, entropy

__all__ = ["Check", "VerifySettings", "format_report", "run_checks"]

ZETA1_300K_MEV = 161.9
C1_TYPICAL = 5.81e-10
C2_TYPICAL = 95.75
C2_BEST = 3028.0
CROSSOVER_BOUNDS_K = {AU_NU0_TYPICAL_MEV: 1e-3, AU_NU0_BEST_MEV: 1e-6}
SCALING_NU0_MEV = (3.45, 0.345)
# lowest plasma frequency covered by the ideal-mirror criterion (100 eV)
IDEAL_OMEGA_P_MEV = 1e5


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


class VerifySettings(NamedTuple):
    omega_p: float = AU_OMEGA_P_MEV
    separation: float = 1e-6
    strong_ratio: float = 0.1
    numeric: NumericControls = NumericControls()
    slow: bool = False


def _within(value: float, target: float, rel: float) -> bool:
    return abs(value - target) <= rel * abs(target)


def check_matsubara(s: VerifySettings) -> list[Check]:
    z = float(matsubara_frequency(1, 300.0))
    return [Check("zeta_1(300 K)", _within(z, ZETA1_300K_MEV, 5e-3), f"{z:.4f} meV vs {ZETA1_300K_MEV} meV (0.5%)")]


def check_relaxation(s: VerifySettings) -> list[Check]:
    bg = gold_bloch_gruneisen()
    nu300 = float(nu_at(bg, 300.0))
    ratio = float(nu_at(bg, 2.0)) / float(nu_at(bg, 1.0))
    return [
        Check("nu(300 K)", nu300 == 34.5, f"{nu300:.6f} meV vs 34.5 meV (calibration)"),
        Check("nu(2 K)/nu(1 K)", _within(ratio, 32.0, 0.02), f"{ratio:.5f} vs 32 (2%)"),
    ]


def check_regimes(s: VerifySettings) -> list[Check]:
    bg = gold_bloch_gruneisen()
    hot = regime_report(bg, 300.0, 10, s.strong_ratio)
    cold = regime_report(bg, 10.0, 1, s.strong_ratio)
    hot_ok = all(e.zeta > hot.nu for e in hot.entries)
    cold_ok = cold.nu <= 0.1 * cold.entries[0].zeta
    return [
        Check("regime 300 K", hot_ok, f"nu={hot.nu:.4f} meV < zeta_1={hot.entries[0].zeta:.4f} meV ({hot.entries[0].relation})"),
        Check("regime 10 K", cold_ok, f"nu={cold.nu:.4e} meV <= 0.1 zeta_1={0.1 * cold.entries[0].zeta:.4e} meV"),
    ]


def check_crossover(s: VerifySettings) -> list[Check]:
    out = []
    for nu0, bound in CROSSOVER_BOUNDS_K.items():
        t = crossover_temperature(nu0, 10, s.strong_ratio)
        # same order of magnitude as the stated upper bound
        ok = abs(math.log10(t / bound)) <= 1.0
        out.append(Check(f"crossover nu0={nu0:g} meV", ok, f"{t:.4e} K vs bound {bound:g} K (one decade)"))
    return out


def check_ideal_mirror(s: VerifySettings) -> list[Check]:
    a = s.separation
    exact = -math.pi**2 * CONSTANTS.hbar * CONSTANTS.light_speed / (720.0 * a**3)
    omega_p = IDEAL_OMEGA_P_MEV
    e = zero_temperature_energy(PlateSystem(a, Plasma(omega_p), s.numeric)).value
    return [Check("ideal-mirror limit", _within(e, exact, 0.01),
                  f"E={e:.6e} J/m^2 (omega_p={omega_p:g} meV) vs {exact:.6e} J/m^2 (1%)")]


def check_scaling(s: VerifySettings) -> list[Check]:
    table = scaling_check(s.separation, SCALING_NU0_MEV, s.omega_p, s.numeric)
    return [
        Check("C1*nu0 constant", table.c1_spread <= 0.05, f"spread {table.c1_spread:.3e} (5%)"),
        Check("C2*sqrt(nu0) constant", table.c2_spread <= 0.05, f"spread {table.c2_spread:.3e} (5%)"),
    ]


def _typical_system(s: VerifySettings) -> PlateSystem:
    return PlateSystem(s.separation, Drude(s.omega_p, ConstantRelaxation(AU_NU0_TYPICAL_MEV)), s.numeric)


def _order_of_magnitude(value: float, target: float) -> bool:
    return target / 10.0 <= value <= target * 10.0


def check_typical_coefficients(s: VerifySettings) -> list[Check]:
    fit = fit_asymptotic_coefficients(_typical_system(s))
    window = f"window [{fit.fit_window[0]:.3e}, {fit.fit_window[1]:.3e}] K"
    return [
        Check("C1 typical Au (order)", _order_of_magnitude(fit.C1, C1_TYPICAL),
              f"{fit.C1:.4e} vs {C1_TYPICAL:g} J/(m^2 K^2) (x/10), {window}"),
        Check("C2 typical Au (order)", _order_of_magnitude(fit.C2, C2_TYPICAL),
              f"{fit.C2:.4f} vs {C2_TYPICAL} K^-1/2 (x/10)"),
        # tighter golden checks, sensitive to omega_p
        Check("C1 typical Au (5%)", _within(fit.C1, C1_TYPICAL, 0.05), f"{fit.C1:.4e} vs {C1_TYPICAL:g}"),
        Check("C2 typical Au (10%)", _within(fit.C2, C2_TYPICAL, 0.10), f"{fit.C2:.4f} vs {C2_TYPICAL}"),
    ]


def check_fit_entropy(s: VerifySettings) -> list[Check]:
    system = PlateSystem(s.separation, Drude(s.omega_p, ConstantRelaxation(SCALING_NU0_MEV[0])), s.numeric)
    fit = fit_asymptotic_coefficients(system)
    worst = 0.0
    for T in np.geomspace(fit.fit_window[0], fit.fit_window[1], 4):
        p = entropy(system, float(T))
        worst = max(worst, abs(p.S - float(fit.entropy(T))) / (p.est_error + float(fit.entropy_error(T))))
    return [Check("fitted vs direct entropy", worst <= 1.0, f"max |dS|/combined error = {worst:.3f}")]


def check_best_coefficients(s: VerifySettings) -> list[Check]:
    typical = fit_asymptotic_coefficients(_typical_system(s))
    best = fit_asymptotic_coefficients(
        PlateSystem(s.separation, Drude(s.omega_p, ConstantRelaxation(AU_NU0_BEST_MEV)), s.numeric))
    ratio = best.C2 / typical.C2
    target = C2_BEST / C2_TYPICAL
    return [Check("C2 best/typical", _within(ratio, target, 0.10), f"{ratio:.4f} vs {target:.4f} (10%)")]


def check_nernst(s: VerifySettings) -> list[Check]:
    cases = [
        ("plasma", PlateSystem(s.separation, Plasma(s.omega_p), s.numeric),
         np.geomspace(1.0, 1e-2, 8), ("satisfied_smooth", "satisfied_with_negative_dip")),
        ("drude impure", _typical_system(s), np.geomspace(1.0, 1e-8, 25), ("satisfied_with_negative_dip",)),
        ("drude perfect lattice", PlateSystem(s.separation, Drude(s.omega_p, gold_bloch_gruneisen(0.0)), s.numeric),
         np.geomspace(0.5, 5e-3, 8), ("violated_negative_limit",)),
    ]
    out = []
    for name, system, grid, expected in cases:
        v = classify_nernst(system, grid)
        out.append(Check(f"Nernst {name}", v.classification in expected,
                         f"{v.classification}, S(0) = {v.s_limit_estimate:.4e} +- {v.s_limit_error:.2e} J/(m^2 K)"))
    return out


FAST_CHECKS: tuple[Callable[[VerifySettings], list[Check]], ...] = (
    check_matsubara,
    check_relaxation,
    check_regimes,
    check_crossover,
    check_ideal_mirror,
    check_scaling,
    check_typical_coefficients,
    check_fit_entropy,
)
SLOW_CHECKS = (check_best_coefficients, check_nernst)


def _run_group(args) -> list[Check]:
    func, settings = args
    return func(settings)


def run_checks(settings: VerifySettings = VerifySettings(), jobs: int = 1) -> list[Check]:
    """Run the suite; the result order does not depend on ``jobs``."""
    groups = FAST_CHECKS + (SLOW_CHECKS if settings.slow else ())
    tasks = [(g, settings) for g in groups]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_group, tasks))
    else:
        results = [_run_group(t) for t in tasks]
    return [c for group in results for c in group]


def format_report(checks: list[Check]) -> str:
    lines = [c.line() for c in checks]
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"
