"""Relaxation-frequency models nu(T) and permittivities on the imaginary axis.

The phonon part of the relaxation follows the Bloch-Grueneisen law,
normalized by a single calibration point; impurities add a constant residual
value (Matthiessen's rule). All frequencies are in meV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from scipy import integrate, special

from .errors import ConvergenceError
from .quantities import FrequencyValue

__all__ = [
    "AU_CALIB_NU_MEV",
    "AU_CALIB_T_K",
    "AU_DEBYE_K",
    "AU_NU0_BEST_MEV",
    "AU_NU0_TYPICAL_MEV",
    "AU_OMEGA_P_MEV",
    "BlochGruneisen",
    "BlochGruneisenResidual",
    "ConstantRelaxation",
    "Drude",
    "IdealMetal",
    "Plasma",
    "bloch_gruneisen_integral",
    "bloch_gruneisen_nu",
    "gold_bloch_gruneisen",
    "nu_at",
    "permittivity_imag_axis",
]

AU_DEBYE_K = 165.0
AU_CALIB_T_K = 300.0
AU_CALIB_NU_MEV = 34.5
AU_NU0_TYPICAL_MEV = 34.5e-3
AU_NU0_BEST_MEV = 34.5e-6
# conventional literature value for Au; configurable
AU_OMEGA_P_MEV = 9000.0

# J5(inf) = 5! zeta(5)
_J5_INF = 120.0 * float(special.zeta(5.0))
_TAIL_CUTOFF = 50.0
_BG_REL_TOL = 1e-8


def _j5_integrand(x: float) -> float:
    if x < 1e-4:
        # x^5 e^x / (e^x - 1)^2 -> x^3 (1 - x^2/12)
        return x**3 * (1.0 - x * x / 12.0)
    em = math.exp(-x)
    return x**5 * em / (-math.expm1(-x)) ** 2


@lru_cache(maxsize=4096)
def bloch_gruneisen_integral(z: float) -> float:
    """J5(z) = integral_0^z x^5 e^x / (e^x - 1)^2 dx.

    For z > 50 the complement is taken from the incomplete gamma function,
    since the integrand there is x^5 e^-x to double precision.
    """
    if not z >= 0:
        raise ValueError(f"upper limit must be >= 0, got {z!r}")
    if z == 0:
        return 0.0
    if z > _TAIL_CUTOFF:
        return _J5_INF - 120.0 * float(special.gammaincc(6.0, z))
    val, err = integrate.quad(_j5_integrand, 0.0, z, epsabs=0.0, epsrel=_BG_REL_TOL, limit=200)
    if not err <= 10 * _BG_REL_TOL * abs(val):
        raise ConvergenceError(f"Bloch-Grueneisen quadrature failed at z={z}: err={err:.3g}")
    return val


def _check_positive(**kw):
    for name, v in kw.items():
        if not v > 0:
            raise ValueError(f"{name} must be > 0, got {v!r}")


@dataclass(frozen=True)
class ConstantRelaxation:
    """Temperature-independent relaxation nu0 (meV)."""

    nu0: float

    def __post_init__(self):
        if not self.nu0 >= 0:
            raise ValueError(f"nu0 must be >= 0, got {self.nu0!r}")

    variant = "constant"

    def nu(self, T: float) -> float:
        return self.nu0


@dataclass(frozen=True)
class BlochGruneisen:
    """Phonon-limited relaxation of a perfect lattice (no residual term).

    ``nu(T) = A (T/T_D)^5 J5(T_D/T)`` with ``A`` fixed by nu(calib_t) = calib_nu.
    """

    debye_t: float = AU_DEBYE_K
    calib_t: float = AU_CALIB_T_K
    calib_nu: float = AU_CALIB_NU_MEV

    variant = "bloch_gruneisen"

    def __post_init__(self):
        _check_positive(debye_t=self.debye_t, calib_t=self.calib_t)
        if not self.calib_nu >= 0:
            raise ValueError(f"calib_nu must be >= 0, got {self.calib_nu!r}")

    @property
    def amplitude(self) -> float:
        r = self.calib_t / self.debye_t
        return self.calib_nu / (r**5 * bloch_gruneisen_integral(1.0 / r))

    def phonon_nu(self, T: float) -> float:
        if T < 0:
            raise ValueError(f"temperature must be >= 0, got {T!r}")
        if T == 0:
            return 0.0
        if T == self.calib_t:
            return self.calib_nu
        r = T / self.debye_t
        return self.amplitude * r**5 * bloch_gruneisen_integral(1.0 / r)

    def nu(self, T: float) -> float:
        return self.phonon_nu(T)


@dataclass(frozen=True)
class BlochGruneisenResidual(BlochGruneisen):
    """Bloch-Grueneisen phonon term plus a residual impurity value nu0."""

    nu0: float = AU_NU0_TYPICAL_MEV

    variant = "bloch_gruneisen_residual"

    def __post_init__(self):
        super().__post_init__()
        if not self.nu0 >= 0:
            raise ValueError(f"nu0 must be >= 0, got {self.nu0!r}")

    def nu(self, T: float) -> float:
        return self.phonon_nu(T) + self.nu0


RelaxationModel = Union[ConstantRelaxation, BlochGruneisen, BlochGruneisenResidual]


def gold_bloch_gruneisen(nu0: float | None = None) -> BlochGruneisen:
    """Au relaxation: T_D = 165 K, nu(300 K) = 34.5 meV, optional residual nu0."""
    if nu0 is None:
        return BlochGruneisen()
    return BlochGruneisenResidual(nu0=nu0)


def bloch_gruneisen_nu(model: BlochGruneisen, T: float) -> FrequencyValue:
    """Bloch-Grueneisen relaxation frequency at ``T`` (residual added if present).

    Raises
    ------
    TypeError
        If ``model`` is not a Bloch-Grueneisen variant.
    """
    if not isinstance(model, BlochGruneisen):
        raise TypeError(f"expected a Bloch-Grueneisen model, got {type(model).__name__}")
    return FrequencyValue(model.nu(T), "relaxation")


def nu_at(model: RelaxationModel, T: float) -> FrequencyValue:
    """Relaxation frequency of any variant at temperature ``T`` (meV)."""
    if T < 0:
        raise ValueError(f"temperature must be >= 0, got {T!r}")
    return FrequencyValue(model.nu(T), "relaxation")


@dataclass(frozen=True)
class Drude:
    """eps(i zeta) = 1 + omega_p^2 / (zeta (zeta + nu(T)))."""

    omega_p: float = AU_OMEGA_P_MEV
    relaxation: RelaxationModel = BlochGruneisen()

    kind = "drude"

    def __post_init__(self):
        _check_positive(omega_p=self.omega_p)


@dataclass(frozen=True)
class Plasma:
    """eps(i zeta) = 1 + omega_p^2 / zeta^2 (dissipationless)."""

    omega_p: float = AU_OMEGA_P_MEV

    kind = "plasma"

    def __post_init__(self):
        _check_positive(omega_p=self.omega_p)


@dataclass(frozen=True)
class IdealMetal:
    """Perfect mirror, |r_TM| = |r_TE| = 1 at every frequency (omega_p -> inf)."""

    kind = "ideal"


PermittivityModel = Union[Drude, Plasma, IdealMetal]


def permittivity_imag_axis(model: PermittivityModel, zeta: float, T: float) -> float:
    """eps(i zeta) for ``zeta > 0`` (meV) at temperature ``T``.

    The zeta = 0 limit is never evaluated here; the Lifshitz kernel uses
    explicit zero-frequency reflection coefficients instead.
    """
    if not zeta > 0:
        raise ValueError(f"zeta must be > 0 (zero frequency is handled by the kernel), got {zeta!r}")
    if isinstance(model, Drude):
        return 1.0 + model.omega_p**2 / (zeta * (zeta + model.relaxation.nu(T)))
    if isinstance(model, Plasma):
        return 1.0 + model.omega_p**2 / zeta**2
    if isinstance(model, IdealMetal):
        return math.inf
    raise TypeError(f"unknown permittivity model {model!r}")
