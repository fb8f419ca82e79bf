r"""Lifshitz free energy of two parallel plates on the imaginary frequency axis.

Everything is evaluated in the dimensionless variables

    x = 2 a zeta / c,    y = 2 a q,

so that the Matsubara frequencies are ``x_m = m * tau`` with
``tau = 4 pi a k T / (hbar c)`` and

    F(a, T) = P * tau * sum'_m G(x_m),     E(a) = P * int_0^inf G(x) dx,
    G(x)    = int_x^inf y [ln(1 - r_TM^2 e^-y) + ln(1 - r_TE^2 e^-y)] dy,

with ``P = hbar c / (32 pi^2 a^3)``. The primed sum gives m = 0 half weight.

The Matsubara sum is split as ``tau sum' G = int_0^inf G dx + D(tau)``, where
``D`` is the trapezoid rule on the first M ladder nodes minus the integral over
the same interval, plus Gregory's finite-difference form of the
Euler-Maclaurin correction for the remaining infinite tail. ``D`` is computed
from ``H(x) = G(x) - G(0)``, evaluated from a log-ratio integrand, so the
thermal correction never appears as a difference of two large numbers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from ._quadrature import geometric_edges, gregory_coefficients, panel_nodes
from .errors import CancellationError, ConfigError, ConvergenceError
from .materials import Drude, IdealMetal, Plasma, PermittivityModel
from .quantities import CONSTANTS

__all__ = [
    "Estimate",
    "FreeEnergyCurve",
    "FreeEnergyPoint",
    "NumericControls",
    "PlateSystem",
    "ThermalCorrection",
    "free_energy",
    "free_energy_curve",
    "matsubara_sum",
    "per_frequency_integral",
    "reflection_coeffs",
    "thermal_correction",
    "zero_frequency_reflection",
    "zero_temperature_energy",
]

# (Gauss-Legendre order, y panels, x panels per octave) per refinement level
_LEVELS = ((16, 48, 1), (24, 64, 2), (32, 96, 3))
_Y_FLOOR = 1e-12  # first y panel is [x, x + _Y_FLOOR]
_Y_SPAN = 50.0  # y e^-y below 1e-20 beyond x + _Y_SPAN
_X_FLOOR = 1e-16  # first x panel of the energy integral is [0, _X_FLOOR]
_X_SPAN = 60.0
_GREGORY_ORDER = 6
_CHUNK = 96


@dataclass(frozen=True)
class NumericControls:
    """Tolerances and limits for one evaluation.

    ``min_direct_terms`` is the number of Matsubara nodes summed explicitly
    before the Gregory tail takes over; it doubles until the last Gregory
    term is below tolerance.
    """

    quad_rel_tol: float = 1e-9
    sum_rel_tol: float = 1e-8
    max_matsubara_terms: int = 5_000_000
    tail_method: str = "euler_maclaurin"
    min_direct_terms: int = 64

    def __post_init__(self):
        for name in ("quad_rel_tol", "sum_rel_tol"):
            v = getattr(self, name)
            if not 0 < v <= 1e-3:
                raise ConfigError(f"{name} must be in (0, 1e-3], got {v!r}")
        if self.max_matsubara_terms < 1000:
            raise ConfigError(f"max_matsubara_terms must be >= 1000, got {self.max_matsubara_terms!r}")
        if self.tail_method not in ("euler_maclaurin", "truncate"):
            raise ConfigError(f"tail_method must be 'euler_maclaurin' or 'truncate', got {self.tail_method!r}")
        if self.min_direct_terms < 8:
            raise ConfigError("min_direct_terms must be >= 8")

    def tightened(self, factor: float = 0.5) -> "NumericControls":
        return NumericControls(
            quad_rel_tol=self.quad_rel_tol * factor,
            sum_rel_tol=self.sum_rel_tol * factor,
            max_matsubara_terms=self.max_matsubara_terms,
            tail_method=self.tail_method,
            min_direct_terms=self.min_direct_terms,
        )


@dataclass(frozen=True)
class PlateSystem:
    """Two identical half-spaces at separation ``separation`` (m)."""

    separation: float = 1e-6
    permittivity: PermittivityModel = field(default_factory=Drude)
    numeric: NumericControls = field(default_factory=NumericControls)

    def __post_init__(self):
        if not self.separation > 0:
            raise ConfigError(f"separation must be > 0, got {self.separation!r}")

    @property
    def energy_scale(self) -> float:
        """hbar c / (2a) in meV; divides a frequency in meV to give x."""
        return CONSTANTS.mev_per_radps * CONSTANTS.light_speed / (2.0 * self.separation)

    @property
    def prefactor(self) -> float:
        """hbar c / (32 pi^2 a^3) in J/m^2."""
        return CONSTANTS.hbar * CONSTANTS.light_speed / (32.0 * math.pi**2 * self.separation**3)

    def tau(self, T: float) -> float:
        """Dimensionless Matsubara spacing 4 pi a k T / (hbar c)."""
        return 4.0 * math.pi * self.separation * CONSTANTS.boltzmann * T / (CONSTANTS.hbar * CONSTANTS.light_speed)

    def nu(self, T: float) -> float:
        perm = self.permittivity
        return perm.relaxation.nu(T) if isinstance(perm, Drude) else 0.0

    def with_numeric(self, numeric: NumericControls) -> "PlateSystem":
        return PlateSystem(self.separation, self.permittivity, numeric)


class Estimate(NamedTuple):
    value: float
    error: float


class FreeEnergyPoint(NamedTuple):
    T: float
    F: float
    terms_used: int
    est_error: float


class ThermalCorrection(NamedTuple):
    T: float
    value: float
    est_error: float
    terms_used: int

    @property
    def meaningful(self) -> bool:
        return self.est_error < abs(self.value) / 10.0


@dataclass
class FreeEnergyCurve:
    system: PlateSystem
    points: list[FreeEnergyPoint]


# --------------------------------------------------------------------------
# reflection coefficients


def reflection_coeffs(eps_m, y, y_m):
    """Fresnel coefficients at imaginary frequency in the dimensionless form.

    ``y = 2 a q`` and ``y_m = 2 a zeta_m / c`` with ``y >= y_m >= 0``;
    ``s = sqrt(y^2 + (eps - 1) y_m^2)``. Returns ``(r_TM, r_TE)``.
    Works elementwise on arrays.
    """
    eps_m = np.asarray(eps_m, dtype=float)
    y = np.asarray(y, dtype=float)
    y_m = np.asarray(y_m, dtype=float)
    if np.any(y < y_m) or np.any(y_m < 0):
        raise ValueError("reflection_coeffs needs y >= y_m >= 0")
    if np.any(eps_m < 1):
        raise ValueError("reflection_coeffs needs eps >= 1")
    w = (eps_m - 1.0) * y_m**2
    s = np.sqrt(y * y + w)
    with np.errstate(invalid="ignore", divide="ignore"):
        r_te = -w / (y + s) ** 2
        r_tm = (eps_m * y - s) / (eps_m * y + s)
    return r_tm, r_te


def zero_frequency_reflection(system: PlateSystem, y, T: float = 0.0):
    """``(r_TM, r_TE)`` at zeta = 0 from the model's explicit limits.

    Drude with nu(T) > 0: TM -> 1, TE -> 0. Plasma (and Drude with nu = 0):
    TM -> 1, TE -> (y - sqrt(y^2 + (2 a omega_p / c)^2)) / (y + ...).
    """
    y = np.asarray(y, dtype=float)
    med = _Medium.build(system, system.nu(T))
    one = np.ones_like(y)
    if med.kind == "ideal":
        return one, one
    if med.kind == "drude":
        return one, np.zeros_like(y)
    return one, -med.p / (y + np.sqrt(y * y + med.p)) ** 2


# --------------------------------------------------------------------------
# dimensionless kernel


@dataclass(frozen=True)
class _Medium:
    """Dimensionless material: p = (omega_p / E_a)^2, nu_t = nu / E_a."""

    kind: str
    p: float = 0.0
    nu_t: float = 0.0

    @classmethod
    def build(cls, system: PlateSystem, nu: float) -> "_Medium":
        perm = system.permittivity
        scale = system.energy_scale
        if isinstance(perm, IdealMetal):
            return cls("ideal")
        p = (perm.omega_p / scale) ** 2
        if isinstance(perm, Plasma) or nu == 0.0:
            return cls("plasma", p)
        return cls("drude", p, nu / scale)

    def w(self, x):
        """(eps - 1) x^2 as a function of x."""
        if self.kind == "plasma":
            return np.full_like(x, self.p)
        return self.p * x / (x + self.nu_t)


def _parts(x, y, med: _Medium):
    """exp(-y), -expm1(-y), then (1 - r^2, r^2) for TM and TE on a broadcast grid."""
    e = np.exp(-y)
    e1 = -np.expm1(-y)
    w = med.w(x)
    s = np.sqrt(y * y + w)
    # 1 - |r_TE| = 2y / (y + s) since s^2 - w = y^2
    d_te = 2.0 * y / (y + s)
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = 1.0 + w / (x * x)
        d_tm = np.where(x > 0, 2.0 * s / (eps * y + s), 0.0)
    return e, e1, d_tm * (2.0 - d_tm), (1.0 - d_tm) ** 2, d_te * (2.0 - d_te), (1.0 - d_te) ** 2


def _log1mexp(y):
    """ln(1 - e^-y) for y > 0, accurate at both ends."""
    with np.errstate(divide="ignore"):
        return np.where(y < math.log(2.0), np.log(-np.expm1(-y)), np.log1p(-np.exp(-y)))


def _pol_log(e, e1, q, r2):
    """ln(1 - r^2 e^-y) for one polarization, accurate for small r^2 e^-y and for r^2 near 1."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(r2 * e < 0.5, np.log1p(-r2 * e), np.log(e1 + q * e))


def _log_terms(x, y, med: _Medium):
    """ln(1 - r_TM^2 e^-y) + ln(1 - r_TE^2 e^-y)."""
    if med.kind == "ideal":
        return 2.0 * _log1mexp(y) + 0.0 * x
    e, e1, q_tm, rtm2, q_te, rte2 = _parts(x, y, med)
    return _pol_log(e, e1, q_tm, rtm2) + _pol_log(e, e1, q_te, rte2)


def _zero_log_terms(y, med: _Medium):
    """Zero-frequency log terms L0(y)."""
    out = _log1mexp(y)
    if med.kind == "ideal":
        return 2.0 * out
    if med.kind == "plasma":
        e, e1, _, _, q_te, rte2 = _parts(np.zeros_like(y), y, med)
        out = out + _pol_log(e, e1, q_te, rte2)
    return out


def _shift_terms(x, y, med: _Medium):
    """ln(1 - r^2(x, y) e^-y) - ln(1 - r0^2(y) e^-y) summed over polarizations."""
    if med.kind == "ideal":
        return np.zeros(np.broadcast(x, y).shape)
    e, e1, q_tm, _, q_te, rte2 = _parts(x, y, med)
    out = np.log1p(q_tm * e / e1)
    if med.kind == "drude":
        out = out + _pol_log(e, e1, q_te, rte2)
    # plasma TE: r_TE(x, y) equals its zero-frequency value identically
    return out


def _y_grid(level: int):
    n, panels, _ = _LEVELS[level]
    edges = np.concatenate([[0.0], geometric_edges(_Y_FLOOR, _Y_SPAN, panels)[0]])
    t, w = panel_nodes(edges[None, :], n)
    return t[0], w[0]


def _lower_grid(level: int):
    # relative nodes on [0, 1] for int_0^x; the integrand is O(y ln y) at 0
    n, _, _ = _LEVELS[level]
    edges = np.concatenate([[0.0], geometric_edges(1e-9, 1.0, 30)[0]])
    u, w = panel_nodes(edges[None, :], n)
    return u[0], w[0]


def _kernel_G(x: np.ndarray, med: _Medium, level: int) -> np.ndarray:
    """G(x) for a 1-D array of x >= 0."""
    x = np.asarray(x, dtype=float)
    t, wt = _y_grid(level)
    out = np.empty_like(x)
    for i in range(0, x.size, _CHUNK):
        xc = x[i : i + _CHUNK, None]
        y = xc + t[None, :]
        out[i : i + _CHUNK] = (y * _log_terms(xc, y, med)) @ wt
    return out


def _kernel_H(x: np.ndarray, med: _Medium, level: int) -> np.ndarray:
    """H(x) = G(x) - G(0) without forming the difference."""
    x = np.asarray(x, dtype=float)
    t, wt = _y_grid(level)
    u, wu = _lower_grid(level)
    out = np.zeros_like(x)
    for i in range(0, x.size, _CHUNK):
        xc = x[i : i + _CHUNK, None]
        y = xc + t[None, :]
        upper = (y * _shift_terms(xc, y, med)) @ wt
        yl = xc * u[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            lower = (yl * _zero_log_terms(yl, med)) @ wu * x[i : i + _CHUNK]
        out[i : i + _CHUNK] = upper - np.where(x[i : i + _CHUNK] > 0, lower, 0.0)
    return out


def _x_rule(hi: float, floor: float, level: int):
    n, _, per_oct = _LEVELS[level]
    octaves = max(1, math.ceil(math.log2(hi / floor)))
    edges = np.concatenate([[0.0], geometric_edges(floor, hi, octaves * per_oct)[0]])
    x, w = panel_nodes(edges[None, :], n)
    return x[0], w[0]


def matsubara_sum(values: Sequence[float], order: str = "ascending") -> float:
    """Compensated (exactly rounded) sum of ladder terms in the given order."""
    vals = list(values)
    if order == "descending":
        vals.reverse()
    elif order != "ascending":
        raise ValueError(f"order must be 'ascending' or 'descending', got {order!r}")
    return math.fsum(vals)


# --------------------------------------------------------------------------
# level-refined building blocks; each returns (value, error)


def _refine(compute, tol_of, max_level: int = len(_LEVELS) - 1):
    """Evaluate at successive levels until two agree within ``tol_of(value)``."""
    prev = compute(0)
    for level in range(1, max_level + 1):
        cur = compute(level)
        err = abs(cur - prev)
        if err <= tol_of(cur) or level == max_level:
            return cur, err
        prev = cur
    raise AssertionError("unreachable")


def _energy_integral(med: _Medium, rel_tol: float) -> Estimate:
    def compute(level):
        x, w = _x_rule(_X_SPAN, _X_FLOOR, level)
        return float(_kernel_G(x, med, level) @ w)

    val, err = _refine(compute, lambda v: rel_tol * abs(v))
    return Estimate(float(val), float(err))


def _energy_difference(med_t: _Medium, med_0: _Medium, abs_tol: float) -> Estimate:
    """int_0^inf (G_T - G_0) dx for media differing only through nu."""
    if med_t == med_0:
        return Estimate(0.0, 0.0)

    def compute(level):
        x, w = _x_rule(_X_SPAN, _X_FLOOR, level)
        return float((_kernel_G(x, med_t, level) - _kernel_G(x, med_0, level)) @ w)

    val, err = _refine(compute, lambda v: abs_tol)
    return Estimate(float(val), float(err))


def _ladder_correction(med: _Medium, tau: float, M: int, level: int):
    """D(tau) with M direct nodes at one quadrature level, plus the Gregory residual."""
    gam = gregory_coefficients(_GREGORY_ORDER)
    xm = tau * np.arange(M + _GREGORY_ORDER + 1, dtype=float)
    H = _kernel_H(xm, med, level)
    trap = tau * math.fsum(np.concatenate([H[1:M], [0.5 * H[M]]]))
    Z = M * tau
    xq, wq = _x_rule(Z, Z * 1e-14, level)
    integ = math.fsum(_kernel_H(xq, med, level) * wq)
    diffs = H[M:]
    corr = 0.0
    last = 0.0
    for k, g in enumerate(gam, start=1):
        diffs = np.diff(diffs)
        last = (-1) ** (k + 1) * g * diffs[0]
        corr += last
    return trap - integ - tau * corr, abs(tau * last)


def _ladder_D(system: PlateSystem, med: _Medium, tau: float, tol_of) -> tuple[float, float, int]:
    """D(tau) with adaptive M and quadrature level. Returns (D, error, M).

    ``tol_of(D)`` gives the absolute error target for a candidate value.
    """
    ctl = system.numeric
    M = ctl.min_direct_terms
    while True:
        vals = []
        greg = 0.0
        value = err = None
        for level in range(len(_LEVELS)):
            d, greg = _ladder_correction(med, tau, M, level)
            vals.append(d)
            if level == 0:
                continue
            err = abs(vals[-1] - vals[-2])
            value = vals[-1]
            if err <= tol_of(value):
                break
        if greg <= tol_of(value) or greg <= 1e-3 * err:
            return value, err + greg, M
        if 2 * M > ctl.max_matsubara_terms:
            raise ConvergenceError(
                f"Gregory tail not converged with {M} direct Matsubara terms (residual {greg:.3g})"
            )
        M *= 2


# --------------------------------------------------------------------------
# public operations


def per_frequency_integral(system: PlateSystem, zeta: float, T: float) -> Estimate:
    """G(zeta) at temperature ``T`` (zeta in meV), dimensionless, with error.

    At zeta = 0 the model's explicit zero-frequency reflection limits apply.
    """
    if zeta < 0:
        raise ValueError(f"zeta must be >= 0, got {zeta!r}")
    med = _Medium.build(system, system.nu(T))
    x = np.array([zeta / system.energy_scale])
    tol = system.numeric.quad_rel_tol

    val, err = _refine(lambda level: float(_kernel_G(x, med, level)[0]), lambda v: tol * abs(v))
    if err > tol * abs(val) and err > 1e-300:
        raise ConvergenceError(f"G({zeta} meV) not converged: rel err {err / abs(val):.2g}")
    return Estimate(float(val), float(err))


def zero_temperature_energy(system: PlateSystem) -> Estimate:
    """E(a) in J/m^2, using nu(0) of the relaxation model for Drude plates."""
    med = _Medium.build(system, system.nu(0.0))
    tol = system.numeric.quad_rel_tol
    val, err = _energy_integral(med, tol)
    if err > tol * abs(val):
        raise ConvergenceError(f"zero-temperature energy not converged: rel err {err / abs(val):.2g}")
    P = system.prefactor
    return Estimate(float(P * val), float(P * err))


def _check_T(T):
    if not T > 0:
        raise ValueError(f"temperature must be > 0, got {T!r}")


def free_energy(system: PlateSystem, T: float) -> FreeEnergyPoint:
    """Casimir free energy per unit area F(a, T) in J/m^2."""
    _check_T(T)
    if system.numeric.tail_method == "truncate":
        return _free_energy_truncated(system, T)
    ctl = system.numeric
    med = _Medium.build(system, system.nu(T))
    tau = system.tau(T)
    integral = _energy_integral(med, ctl.quad_rel_tol)
    D, d_err, M = _ladder_D(system, med, tau, lambda d: 0.5 * ctl.sum_rel_tol * abs(integral.value + d))
    total = integral.value + D
    err = integral.error + d_err
    if err > ctl.sum_rel_tol * abs(total):
        raise ConvergenceError(f"F(T={T}) not converged: rel err {err / abs(total):.2g}")
    P = system.prefactor
    return FreeEnergyPoint(float(T), float(P * total), int(M), float(P * err))


def _free_energy_truncated(system: PlateSystem, T: float) -> FreeEnergyPoint:
    """Plain Matsubara sum, stopped once the geometric tail bound is below tolerance."""
    ctl = system.numeric
    med = _Medium.build(system, system.nu(T))
    tau = system.tau(T)
    block = 512
    terms: list[float] = []
    coarse: list[float] = []
    m = 0
    while True:
        if m >= ctl.max_matsubara_terms:
            raise ConvergenceError(f"truncated Matsubara sum needs more than {ctl.max_matsubara_terms} terms")
        x = tau * np.arange(m, min(m + block, ctl.max_matsubara_terms), dtype=float)
        g = _kernel_G(x, med, 1)
        terms.extend(g.tolist())
        coarse.extend(_kernel_G(x, med, 0).tolist())
        m += x.size
        partial = math.fsum(terms) - 0.5 * terms[0]
        decay = -math.expm1(-tau)
        tail = abs(terms[-1]) * (1.0 + x[-1]) / max(x[-1], 1e-300) * math.exp(-tau) / decay
        if tail <= ctl.sum_rel_tol * abs(partial) * 1e-2:
            break
    fine = tau * partial
    rough = tau * (math.fsum(coarse) - 0.5 * coarse[0])
    err = abs(fine - rough) + tau * tail
    P = system.prefactor
    return FreeEnergyPoint(float(T), float(P * fine), len(terms), float(P * err))


def thermal_correction(system: PlateSystem, T: float) -> ThermalCorrection:
    """Delta F(T) = F(a, T) - E(a) in J/m^2, evaluated without cancellation.

    For Drude plates F uses nu(T) and E uses nu(0), so the zero-temperature
    energies of the two media are differenced explicitly.

    Raises
    ------
    CancellationError
        If the estimated error is not below |Delta F|.
    """
    _check_T(T)
    ctl = system.numeric
    med_t = _Medium.build(system, system.nu(T))
    med_0 = _Medium.build(system, system.nu(0.0))
    tau = system.tau(T)
    D, d_err, M = _ladder_D(system, med_t, tau, lambda d: ctl.sum_rel_tol * abs(d))
    shift = _energy_difference(med_t, med_0, ctl.sum_rel_tol * abs(D))
    P = system.prefactor
    value = float(P * (D + shift.value))
    err = float(P * (d_err + shift.error))
    if not err < abs(value):
        raise CancellationError(
            f"Delta F(T={T}) = {value:.3g} J/m^2 is below its error estimate {err:.3g}; tighten tolerances"
        )
    return ThermalCorrection(float(T), value, err, int(M))


def _free_energy_task(args):
    system, T = args
    return free_energy(system, T)


def free_energy_curve(system: PlateSystem, temperatures: Sequence[float], jobs: int = 1) -> FreeEnergyCurve:
    """F at each temperature, in input order. ``jobs > 1`` uses worker processes."""
    temps = [float(T) for T in temperatures]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_free_energy_task, [(system, T) for T in temps]))
    else:
        points = [free_energy(system, T) for T in temps]
    return FreeEnergyCurve(system, points)
