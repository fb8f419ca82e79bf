"""Physical constants, unit conversions and the Matsubara ladder.

Frequencies are carried in meV (angular frequency times hbar) everywhere in
the package; conversion to rad/s happens only where SI quantities are built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "CONSTANTS",
    "Constants",
    "FrequencyValue",
    "convert_energy_frequency",
    "convert_frequency_energy",
    "matsubara_frequency",
    "matsubara_ladder",
]


@dataclass(frozen=True)
class Constants:
    """CODATA-2018 values, 9 significant digits (SI)."""

    boltzmann: float = 1.38064900e-23  # J/K
    hbar: float = 1.05457182e-34  # J s
    light_speed: float = 2.99792458e8  # m/s
    elementary_charge: float = 1.60217663e-19  # C

    @property
    def mev_per_radps(self) -> float:
        """hbar in meV s, i.e. the energy in meV of 1 rad/s."""
        return self.hbar / self.elementary_charge * 1e3

    @property
    def boltzmann_mev(self) -> float:
        """Boltzmann constant in meV/K."""
        return self.boltzmann / self.elementary_charge * 1e3


CONSTANTS = Constants()


class FrequencyValue(float):
    """Angular frequency in meV, tagged with where it came from.

    Behaves as a plain float in arithmetic; ``basis`` is one of
    ``"matsubara"``, ``"relaxation"`` or ``"plasma"``. For Matsubara
    frequencies ``index`` and ``temperature`` record (m, T).
    """

    __slots__ = ("basis", "index", "temperature")

    def __new__(cls, value, basis="matsubara", index=None, temperature=None):
        if not value >= 0:
            raise ValueError(f"frequency must be >= 0, got {value!r}")
        obj = super().__new__(cls, value)
        obj.basis = basis
        obj.index = index
        obj.temperature = temperature
        return obj

    def __repr__(self):
        if self.basis == "matsubara":
            return f"FrequencyValue({float(self)!r} meV, matsubara m={self.index}, T={self.temperature})"
        return f"FrequencyValue({float(self)!r} meV, {self.basis})"


def _zeta1_mev(T: float) -> float:
    return 2.0 * math.pi * CONSTANTS.boltzmann * T / CONSTANTS.hbar * CONSTANTS.mev_per_radps


def matsubara_frequency(m: int, T: float) -> FrequencyValue:
    """Matsubara frequency zeta_m(T) = 2 pi k m T / hbar in meV.

    Exactly zero for ``m == 0`` or ``T == 0``.
    """
    if m < 0 or int(m) != m:
        raise ValueError(f"Matsubara index must be a nonnegative integer, got {m!r}")
    if T < 0:
        raise ValueError(f"temperature must be >= 0, got {T!r}")
    if m == 0 or T == 0:
        return FrequencyValue(0.0, "matsubara", int(m), T)
    return FrequencyValue(int(m) * _zeta1_mev(T), "matsubara", int(m), T)


def matsubara_ladder(T: float, count: int) -> list[FrequencyValue]:
    """zeta_1 ... zeta_count at temperature ``T``.

    T = 0 is rejected: the ladder collapses and the continuum integral
    (:func:`casimir_nernst.lifshitz.zero_temperature_energy`) applies.
    """
    if not T > 0:
        raise ValueError(f"ladder needs T > 0, got {T!r}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count!r}")
    z1 = _zeta1_mev(T)
    return [FrequencyValue(m * z1, "matsubara", m, T) for m in range(1, count + 1)]


def convert_energy_frequency(x_mev: float) -> float:
    """meV -> rad/s."""
    if x_mev < 0:
        raise ValueError(f"energy must be >= 0, got {x_mev!r}")
    return x_mev / CONSTANTS.mev_per_radps


def convert_frequency_energy(omega: float) -> float:
    """rad/s -> meV."""
    if omega < 0:
        raise ValueError(f"frequency must be >= 0, got {omega!r}")
    return omega * CONSTANTS.mev_per_radps
