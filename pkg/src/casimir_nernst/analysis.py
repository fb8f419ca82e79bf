"""Frequency-regime reports and the low-temperature asymptotics of Delta F.

Below the crossover temperature, where the first few Matsubara frequencies
are much smaller than the residual relaxation frequency, Drude plates obey

    Delta F = C1 T^2 (1 - C2 sqrt(T) + ...),

and C1, C2 are obtained here by linear least squares of Delta F / T^2 on
sqrt(T).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, FitError, RegimeError
from .lifshitz import NumericControls, PlateSystem, thermal_correction
from .materials import AU_OMEGA_P_MEV, ConstantRelaxation, Drude, nu_at
from .quantities import CONSTANTS, matsubara_frequency

__all__ = [
    "AsymptoticFit",
    "RegimeEntry",
    "RegimeReport",
    "ScalingRow",
    "ScalingTable",
    "crossover_temperature",
    "default_fit_temperatures",
    "fit_asymptotic_coefficients",
    "regime_report",
    "relation",
    "scaling_check",
]

DEFAULT_STRONG_RATIO = 0.1
DEFAULT_N_FREQ = 10
# fit window as fractions of the crossover temperature
DEFAULT_WINDOW = (2e-5, 2e-4)
DEFAULT_FIT_POINTS = 8
MAX_RMS_RESIDUAL = 1e-2

RELATIONS = ("much_less", "less", "greater", "much_greater")


# --------------------------------------------------------------------------
# regimes


def relation(zeta: float, nu: float, strong_ratio: float = DEFAULT_STRONG_RATIO) -> str:
    """Compare a Matsubara frequency with a relaxation frequency (both meV)."""
    if zeta <= strong_ratio * nu:
        return "much_less"
    if nu <= strong_ratio * zeta:
        return "much_greater"
    return "less" if zeta < nu else "greater"


class RegimeEntry(NamedTuple):
    m: int
    zeta: float
    relation: str


@dataclass(frozen=True)
class RegimeReport:
    T: float
    nu: float
    entries: tuple[RegimeEntry, ...]
    strong_ratio: float

    @property
    def boundary_index(self) -> int | None:
        """Smallest m with zeta_m above nu, or None if every entry is below."""
        for e in self.entries:
            if e.relation in ("greater", "much_greater"):
                return e.m
        return None


def regime_report(nu_model, T: float, m_max: int,
                  strong_ratio: float = DEFAULT_STRONG_RATIO) -> RegimeReport:
    """Relation of zeta_1 ... zeta_m_max to nu(T) for a relaxation model.

    Examples
    --------
    >>> from casimir_nernst.materials import ConstantRelaxation
    >>> r = regime_report(ConstantRelaxation(34.5e-3), 1e-4, 10)
    >>> {e.relation for e in r.entries}
    {'much_less'}
    """
    if not T > 0:
        raise ConfigError(f"T must be > 0, got {T!r}")
    if int(m_max) != m_max or m_max < 1:
        raise ConfigError(f"m_max must be an integer >= 1, got {m_max!r}")
    if not 0 < strong_ratio <= 0.2:
        raise ConfigError(f"strong_ratio must be in (0, 0.2], got {strong_ratio!r}")
    nu = float(nu_at(nu_model, T))
    entries = []
    for m in range(1, int(m_max) + 1):
        z = float(matsubara_frequency(m, T))
        entries.append(RegimeEntry(m, z, relation(z, nu, strong_ratio)))
    return RegimeReport(float(T), nu, tuple(entries), float(strong_ratio))


def crossover_temperature(nu0: float, n_freq: int = DEFAULT_N_FREQ,
                          strong_ratio: float = DEFAULT_STRONG_RATIO) -> float:
    """Largest T (K) with zeta_{n_freq}(T) <= strong_ratio * nu0 (nu0 in meV)."""
    if not nu0 > 0:
        raise ConfigError(f"nu0 must be > 0, got {nu0!r}")
    if int(n_freq) != n_freq or n_freq < 1:
        raise ConfigError(f"n_freq must be an integer >= 1, got {n_freq!r}")
    if not strong_ratio > 0:
        raise ConfigError(f"strong_ratio must be > 0, got {strong_ratio!r}")
    return strong_ratio * nu0 / (2.0 * math.pi * CONSTANTS.boltzmann_mev * n_freq)


# --------------------------------------------------------------------------
# asymptotic fit


def default_fit_temperatures(nu0: float, n_points: int = DEFAULT_FIT_POINTS,
                             window: tuple[float, float] = DEFAULT_WINDOW,
                             strong_ratio: float = DEFAULT_STRONG_RATIO,
                             n_freq: int = DEFAULT_N_FREQ) -> np.ndarray:
    """Log-spaced fit temperatures, placed at fixed fractions of the crossover.

    Fixing the window relative to the crossover keeps the neglected
    higher-order terms at the same relative size for every nu0.
    """
    tc = crossover_temperature(nu0, n_freq, strong_ratio)
    return np.geomspace(window[0] * tc, window[1] * tc, n_points)


@dataclass(frozen=True)
class AsymptoticFit:
    """Fitted Delta F = C1 T^2 (1 - C2 sqrt(T)).

    ``covariance`` refers to the linear parameters (C1, -C1 C2). It is the
    least-squares covariance plus the spread of fits to the lower and upper
    halves of the window, which accounts for the truncated expansion.
    """

    C1: float
    C2: float
    C1_error: float
    C2_error: float
    fit_window: tuple[float, float]
    rms_residual: float
    separation: float
    nu0: float
    temperatures: tuple[float, ...]
    delta_f: tuple[float, ...]
    covariance: tuple[tuple[float, float], tuple[float, float]] = field(repr=False)

    def thermal_correction(self, T):
        T = np.asarray(T, dtype=float)
        return self.C1 * T**2 * (1.0 - self.C2 * np.sqrt(T))

    def entropy(self, T):
        """-d(Delta F)/dT of the fitted form: -2 C1 T + (5/2) C1 C2 T^(3/2)."""
        T = np.asarray(T, dtype=float)
        return -2.0 * self.C1 * T + 2.5 * self.C1 * self.C2 * T**1.5

    def entropy_error(self, T):
        T = np.asarray(T, dtype=float)
        g = np.stack([-2.0 * T, -2.5 * T**1.5])
        cov = np.asarray(self.covariance)
        return np.sqrt(np.einsum("i...,ij,j...->...", g, cov, g))

    def zero_crossing(self) -> float:
        """Temperature where the fitted entropy changes sign, 16 / (25 C2^2)."""
        return 16.0 / (25.0 * self.C2**2)

    def to_dict(self) -> dict:
        return {
            "C1_J_per_m2_K2": self.C1,
            "C1_error": self.C1_error,
            "C2_per_sqrt_K": self.C2,
            "C2_error": self.C2_error,
            "fit_window_K": list(self.fit_window),
            "rms_residual": self.rms_residual,
            "separation_m": self.separation,
            "nu0_meV": self.nu0,
            "points": [{"T_K": t, "delta_F_J_per_m2": f} for t, f in zip(self.temperatures, self.delta_f)],
        }


def _linear_fit(s: np.ndarray, y: np.ndarray):
    X = np.column_stack([np.ones_like(s), s])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = max(s.size - 2, 1)
    cov = np.linalg.inv(X.T @ X) * float(resid @ resid) / dof
    return coef, cov, resid


def _delta_f_task(args):
    system, T = args
    return thermal_correction(system, T)


def fit_asymptotic_coefficients(system: PlateSystem, T_points: Sequence[float] | None = None,
                                strong_ratio: float = DEFAULT_STRONG_RATIO,
                                n_freq: int = DEFAULT_N_FREQ, jobs: int = 1) -> AsymptoticFit:
    """Fit C1 and C2 for Drude plates with a constant relaxation frequency.

    Parameters
    ----------
    system : PlateSystem
        Must use ``Drude`` with ``ConstantRelaxation``.
    T_points : sequence of float, optional
        At least 6 temperatures (K) spanning a decade, all at or below the
        crossover temperature. Defaults to :func:`default_fit_temperatures`.
    strong_ratio, n_freq : float, int
        Define the crossover temperature bounding the window.
    jobs : int
        Worker processes for the Delta F evaluations.

    Raises
    ------
    RegimeError
        Wrong material model, or a point above the crossover.
    FitError
        Fewer than 6 points, less than a decade, relative rms residual above
        1e-2, or non-positive coefficients.
    CancellationError
        Propagated from an unresolved Delta F.
    """
    perm = system.permittivity
    if not (isinstance(perm, Drude) and isinstance(perm.relaxation, ConstantRelaxation)):
        raise RegimeError("asymptotic fit requires Drude plates with constant relaxation")
    nu0 = perm.relaxation.nu0
    if not nu0 > 0:
        raise RegimeError("asymptotic fit requires a positive residual relaxation frequency")
    t_cross = crossover_temperature(nu0, n_freq, strong_ratio)
    if T_points is None:
        T_points = default_fit_temperatures(nu0, strong_ratio=strong_ratio, n_freq=n_freq)
    T = np.sort(np.asarray(T_points, dtype=float))
    if T.size < 6:
        raise FitError(f"need at least 6 fit points, got {T.size}")
    if not np.all(T > 0) or np.any(np.diff(T) <= 0):
        raise FitError("fit temperatures must be positive and distinct")
    if T[-1] / T[0] < 10.0 * (1.0 - 1e-12):
        raise FitError("fit temperatures must span at least one decade")
    if T[-1] > t_cross * (1.0 + 1e-12):
        raise RegimeError(f"fit point {T[-1]:.3g} K lies above the crossover temperature {t_cross:.3g} K")

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            corr = list(pool.map(_delta_f_task, [(system, float(t)) for t in T]))
    else:
        corr = [thermal_correction(system, float(t)) for t in T]
    dF = np.array([c.value for c in corr])
    y = dF / T**2
    s = np.sqrt(T)
    coef, cov, resid = _linear_fit(s, y)
    rms = float(np.sqrt(np.mean((resid / y) ** 2)))
    if rms > MAX_RMS_RESIDUAL:
        raise FitError(f"Delta F / T^2 is not linear in sqrt(T): relative rms {rms:.3g}")

    half = T.size // 2
    spread = np.zeros((2, 2))
    for part in (slice(0, T.size - half), slice(half, None)):
        sub, _, _ = _linear_fit(s[part], y[part])
        d = sub - coef
        spread += 0.5 * np.outer(d, d)
    cov = cov + spread

    a, b = float(coef[0]), float(coef[1])
    if not a > 0 or not b < 0:
        raise FitError(f"fitted coefficients have the wrong sign: C1={a:.3g}, C1*C2={-b:.3g}")
    C2 = -b / a
    g = np.array([b / a**2, -1.0 / a])
    c2_err = float(math.sqrt(max(g @ cov @ g, 0.0)))
    return AsymptoticFit(
        C1=a,
        C2=C2,
        C1_error=float(math.sqrt(cov[0, 0])),
        C2_error=c2_err,
        fit_window=(float(T[0]), float(T[-1])),
        rms_residual=rms,
        separation=system.separation,
        nu0=nu0,
        temperatures=tuple(float(t) for t in T),
        delta_f=tuple(float(v) for v in dF),
        covariance=tuple(tuple(float(v) for v in row) for row in cov),
    )


# --------------------------------------------------------------------------
# scaling


class ScalingRow(NamedTuple):
    nu0: float
    C1: float
    C2: float
    C1_nu0: float
    C2_sqrt_nu0: float


@dataclass(frozen=True)
class ScalingTable:
    separation: float
    rows: tuple[ScalingRow, ...]
    fits: tuple[AsymptoticFit, ...] = field(repr=False)

    @staticmethod
    def _spread(values) -> float:
        v = np.asarray(values, dtype=float)
        return float(v.max() / v.min() - 1.0)

    @property
    def c1_spread(self) -> float:
        """max/min - 1 of C1 * nu0 across rows."""
        return self._spread([r.C1_nu0 for r in self.rows])

    @property
    def c2_spread(self) -> float:
        """max/min - 1 of C2 * sqrt(nu0) across rows."""
        return self._spread([r.C2_sqrt_nu0 for r in self.rows])

    def consistent(self, tolerance: float = 0.05) -> bool:
        """Both products constant within ``tolerance``; vacuously true for one row."""
        if len(self.rows) < 2:
            return True
        return self.c1_spread <= tolerance and self.c2_spread <= tolerance


def scaling_check(a: float, nu0_list: Sequence[float], omega_p: float = AU_OMEGA_P_MEV,
                  numeric: NumericControls | None = None, jobs: int = 1) -> ScalingTable:
    """Fit C1, C2 at each nu0 (meV) for separation ``a`` (m) with default windows."""
    if len(nu0_list) < 1:
        raise ConfigError("nu0_list must not be empty")
    numeric = numeric or NumericControls()
    rows, fits = [], []
    for nu0 in nu0_list:
        system = PlateSystem(a, Drude(omega_p, ConstantRelaxation(float(nu0))), numeric)
        fit = fit_asymptotic_coefficients(system, jobs=jobs)
        fits.append(fit)
        rows.append(ScalingRow(float(nu0), fit.C1, fit.C2, fit.C1 * nu0, fit.C2 * math.sqrt(nu0)))
    return ScalingTable(float(a), tuple(rows), tuple(fits))
