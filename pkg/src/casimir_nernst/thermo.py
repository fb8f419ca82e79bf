"""Casimir entropy S = -dF/dT and classification of its T -> 0 behaviour.

The zero-temperature energy does not depend on T, so the derivative is taken
of the thermal correction, which is evaluated without cancellation and keeps
its relative accuracy at any temperature.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, ConvergenceError, FitError
from .lifshitz import PlateSystem, thermal_correction

__all__ = [
    "CLASSIFICATIONS",
    "EntropyCurve",
    "EntropyPoint",
    "check_grid",
    "NernstVerdict",
    "classify_nernst",
    "entropy",
    "entropy_curve",
]

CLASSIFICATIONS = ("satisfied_smooth", "satisfied_with_negative_dip", "violated_negative_limit")

DEFAULT_STEP_FRACTION = 1.0 / 20.0
# "consistent with zero" means |value| <= SIGMA_RULE * error
SIGMA_RULE = 3.0
_STEP_DOMINATED = 0.1


class EntropyPoint(NamedTuple):
    T: float
    S: float
    step_used: float
    est_error: float
    step_dominated: bool


@dataclass
class EntropyCurve:
    system: PlateSystem
    points: list[EntropyPoint]

    @property
    def temperatures(self) -> np.ndarray:
        return np.array([p.T for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p.S for p in self.points])

    @property
    def errors(self) -> np.ndarray:
        return np.array([p.est_error for p in self.points])


@dataclass(frozen=True)
class NernstVerdict:
    classification: str
    s_limit_estimate: float
    s_limit_error: float
    evidence_window: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "s_limit_estimate": self.s_limit_estimate,
            "s_limit_error": self.s_limit_error,
            "evidence_window": list(self.evidence_window),
        }


def _central(system: PlateSystem, T: float, h: float) -> tuple[float, float]:
    hi = thermal_correction(system, T + h)
    lo = thermal_correction(system, T - h)
    return -(hi.value - lo.value) / (2.0 * h), (hi.est_error + lo.est_error) / (2.0 * h)


def entropy(system: PlateSystem, T: float, step: float | None = None) -> EntropyPoint:
    """Casimir entropy per unit area at ``T``, in J/(m^2 K).

    Central differences with steps ``h`` and ``h/2`` are combined by one
    Richardson step, which removes the O(h^2) term.

    Parameters
    ----------
    system : PlateSystem
    T : float
        Temperature in K.
    step : float, optional
        Difference step ``h`` in K, default ``T/20``. Must satisfy ``0 < h < T``.

    Returns
    -------
    EntropyPoint
        ``est_error`` adds the Richardson discrepancy to the propagated
        free-energy error; ``step_dominated`` is set when the discrepancy
        alone exceeds 10% of ``|S|``.
    """
    h = T * DEFAULT_STEP_FRACTION if step is None else float(step)
    if not (T > h > 0):
        raise ConfigError(f"entropy needs T > step > 0, got T={T!r}, step={h!r}")
    s1, n1 = _central(system, T, h)
    s2, n2 = _central(system, T, h / 2.0)
    S = (4.0 * s2 - s1) / 3.0
    rich = abs(s2 - s1) / 3.0
    noise = (4.0 * n2 + n1) / 3.0
    err = rich + noise
    if not (math.isfinite(S) and math.isfinite(err)):
        raise ConvergenceError(f"entropy at T={T} K is not finite")
    return EntropyPoint(float(T), float(S), h, float(err), bool(rich > _STEP_DOMINATED * abs(S)))


def _entropy_task(args):
    system, T = args
    return entropy(system, T)


def entropy_curve(system: PlateSystem, temperatures: Sequence[float], jobs: int = 1) -> EntropyCurve:
    """Entropy at each temperature, in input order. ``jobs > 1`` uses worker processes."""
    temps = [float(T) for T in temperatures]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_entropy_task, [(system, T) for T in temps]))
    else:
        points = [entropy(system, T) for T in temps]
    return EntropyCurve(system, points)


def check_grid(T_grid: Sequence[float]) -> np.ndarray:
    T = np.asarray(T_grid, dtype=float)
    if T.ndim != 1 or T.size < 8:
        raise ConfigError("Nernst classification needs at least 8 temperatures")
    if not np.all(T > 0) or not np.all(np.diff(T) < 0):
        raise ConfigError("temperature grid must be positive and strictly decreasing")
    if T[0] / T[-1] < 100.0 * (1.0 - 1e-12):
        raise ConfigError("temperature grid must span at least two decades")
    return T


def _intercept(t: np.ndarray, s: np.ndarray, degree: int) -> tuple[float, float]:
    """Polynomial least squares in ``t``; returns (intercept, its standard error)."""
    X = np.vander(t, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(X, s, rcond=None)
    dof = t.size - degree - 1
    if dof <= 0:
        return float(coef[0]), 0.0
    resid = s - X @ coef
    cov = np.linalg.inv(X.T @ X) * float(resid @ resid) / dof
    return float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0)))


def limit_from_curve(curve: EntropyCurve) -> tuple[float, float, tuple[float, float]]:
    """Extrapolate S to T = 0 from the lowest decade of ``curve``.

    Returns (estimate, error, window). The estimate is the intercept of a
    quadratic fit in T; the error adds its standard error, the difference
    from the linear-fit intercept and the largest point error in the window.
    """
    T = curve.temperatures
    S = curve.values
    t_min = float(T.min())
    sel = T <= 10.0 * t_min * (1.0 + 1e-12)
    if sel.sum() < 3:
        raise ConfigError("the lowest decade of the grid needs at least 3 points")
    t = T[sel] / t_min
    s = S[sel]
    scale = float(np.max(np.abs(s))) or 1.0
    lin, lin_err = _intercept(t, s / scale, 1)
    if sel.sum() >= 4:
        est, est_err = _intercept(t, s / scale, 2)
    else:
        est, est_err = lin, lin_err
    err = (est_err + abs(est - lin)) * scale + float(curve.errors[sel].max())
    return est * scale, err, (t_min, float(T[sel].max()))


def classify_nernst(system: PlateSystem, T_grid: Sequence[float], jobs: int = 1,
                    curve: EntropyCurve | None = None) -> NernstVerdict:
    """Classify the T -> 0 entropy of ``system`` on a decreasing grid.

    Parameters
    ----------
    system : PlateSystem
    T_grid : sequence of float
        At least 8 strictly decreasing temperatures (K) spanning two decades.
    jobs : int
        Worker processes for the entropy evaluations.
    curve : EntropyCurve, optional
        Precomputed entropies on ``T_grid``; skips the evaluation.

    Returns
    -------
    NernstVerdict
        ``satisfied_smooth`` when the limit is consistent with zero and no
        point is significantly negative, ``satisfied_with_negative_dip`` when
        the limit is zero but S < 0 somewhere, ``violated_negative_limit``
        when the limit is negative beyond three standard errors.

    Raises
    ------
    FitError
        If the extrapolated limit is significantly positive, which matches
        none of the three classes.
    """
    T = check_grid(T_grid)
    if curve is None:
        curve = entropy_curve(system, T, jobs=jobs)
    elif not np.array_equal(curve.temperatures, T):
        raise ConfigError("precomputed entropy curve does not match the grid")
    est, err, window = limit_from_curve(curve)
    if abs(est) <= SIGMA_RULE * err:
        negative = np.any(curve.values + SIGMA_RULE * curve.errors < 0)
        label = CLASSIFICATIONS[1] if negative else CLASSIFICATIONS[0]
    elif est < 0:
        label = CLASSIFICATIONS[2]
    else:
        raise FitError(f"entropy extrapolates to a positive limit {est:.3g} +- {err:.2g} J/(m^2 K)")
    return NernstVerdict(label, est, err, window)
