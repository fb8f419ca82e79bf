"""Finite-temperature Casimir free energy and entropy between metal plates.

Drude and plasma permittivities, Bloch-Grueneisen relaxation, low-temperature
asymptotics of the thermal correction and Nernst-theorem classification.
"""

from .errors import (
    CancellationError,
    CasimirError,
    ConfigError,
    ConvergenceError,
    FitError,
    RegimeError,
)
from .quantities import (
    CONSTANTS,
    FrequencyValue,
    convert_energy_frequency,
    matsubara_frequency,
    matsubara_ladder,
)
from .materials import (
    BlochGruneisen,
    BlochGruneisenResidual,
    ConstantRelaxation,
    Drude,
    IdealMetal,
    Plasma,
    bloch_gruneisen_nu,
    gold_bloch_gruneisen,
    nu_at,
    permittivity_imag_axis,
)
from .lifshitz import (
    FreeEnergyCurve,
    NumericControls,
    PlateSystem,
    free_energy,
    free_energy_curve,
    per_frequency_integral,
    reflection_coeffs,
    thermal_correction,
    zero_temperature_energy,
)
from .thermo import EntropyCurve, EntropyPoint, NernstVerdict, classify_nernst, entropy, entropy_curve
from .analysis import (
    AsymptoticFit,
    RegimeReport,
    ScalingTable,
    crossover_temperature,
    default_fit_temperatures,
    fit_asymptotic_coefficients,
    regime_report,
    scaling_check,
)

__version__ = "0.1.0"
