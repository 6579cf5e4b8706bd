"""Resistance, critical current, Josephson energy and transmon spectrum.

Units at the interface: ohm, nA, GHz (energies divided by h), ueV, K, um^2.
Spectra use the asymptotic transmon expressions ``f01 = sqrt(8 EJ EC) - EC``
and ``alpha = -EC``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from shadowfab.errors import ConfigurationError, DomainError

# CODATA 2018 (exact SI defining constants)
ELEMENTARY_CHARGE = 1.602176634e-19  # C
PLANCK = 6.62607015e-34  # J s
BOLTZMANN = 1.380649e-23  # J / K
FLUX_QUANTUM = PLANCK / (2 * ELEMENTARY_CHARGE)  # Wb

TRANSMON_RATIO = 20.0
ZERO_T_LIMIT_K = 0.1


class TransmonRegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class MaterialParams:
    gap_delta: float = 180.0  # ueV, thin-film Al default (configurable)
    resistance_area_product: float | None = None  # ohm um^2
    temperature: float = 0.02  # K

    def __post_init__(self):
        if not self.gap_delta > 0:
            raise DomainError("gap_delta must be > 0")
        if not self.temperature >= 0:
            raise DomainError("temperature must be >= 0")
        if self.resistance_area_product is not None and not self.resistance_area_product > 0:
            raise DomainError("resistance_area_product must be > 0")


@dataclass(frozen=True)
class TransmonParams:
    rn: float  # ohm
    ic: float  # nA
    ej_over_h: float  # GHz
    ec_over_h: float  # GHz
    f01: float  # GHz
    anharmonicity: float  # GHz

    @property
    def ej_ec_ratio(self) -> float:
        return self.ej_over_h / self.ec_over_h

    @property
    def transmon_regime(self) -> bool:
        return self.ej_ec_ratio > TRANSMON_RATIO


def thermal_factor(mat: MaterialParams) -> float:
    """``tanh(Delta / 2 kB T)``, taken as exactly 1 below 0.1 K."""
    if mat.temperature < ZERO_T_LIMIT_K:
        return 1.0
    delta_j = mat.gap_delta * 1e-6 * ELEMENTARY_CHARGE
    return math.tanh(delta_j / (2 * BOLTZMANN * mat.temperature))


def ic_from_resistance(rn: float, mat: MaterialParams) -> float:
    """Ambegaokar-Baratoff critical current in nA."""
    if not rn > 0:
        raise DomainError(f"normal-state resistance must be > 0, got {rn}")
    if math.isinf(rn):
        return 0.0
    delta_v = mat.gap_delta * 1e-6  # Delta / e in volts
    return math.pi * delta_v / (2 * rn) * thermal_factor(mat) * 1e9


def resistance_from_ic(ic: float, mat: MaterialParams) -> float:
    if not ic > 0:
        raise DomainError(f"critical current must be > 0, got {ic}")
    delta_v = mat.gap_delta * 1e-6
    return math.pi * delta_v * thermal_factor(mat) / (2 * ic * 1e-9)


def ej_from_ic(ic: float) -> float:
    """Josephson energy ``Phi0 Ic / 2 pi`` expressed as a frequency in GHz."""
    if ic < 0:
        raise DomainError(f"critical current must be >= 0, got {ic}")
    return FLUX_QUANTUM * ic * 1e-9 / (2 * math.pi) / PLANCK * 1e-9


def ic_from_ej(ej_over_h: float) -> float:
    if not ej_over_h > 0:
        raise DomainError(f"E_J/h must be > 0, got {ej_over_h}")
    return ej_over_h * 1e9 * PLANCK * 2 * math.pi / FLUX_QUANTUM * 1e9


def _check_regime(ej: float, ec: float) -> None:
    if ej / ec <= TRANSMON_RATIO:
        warnings.warn(f"E_J/E_C = {ej / ec:.3g} is outside the transmon regime (> {TRANSMON_RATIO:g})",
                      TransmonRegimeWarning, stacklevel=3)


def f01_from_energies(ej_over_h: float, ec_over_h: float) -> tuple[float, float]:
    """Return ``(f01, anharmonicity)`` in GHz."""
    if not ej_over_h > 0 or not ec_over_h > 0:
        raise DomainError("E_J and E_C must both be > 0")
    _check_regime(ej_over_h, ec_over_h)
    return math.sqrt(8 * ej_over_h * ec_over_h) - ec_over_h, -ec_over_h


def ec_from_f01(f01: float, ej_over_h: float) -> float:
    """Charging energy reproducing ``f01`` for a given E_J (transmon branch).

    Solving ``sqrt(8 EJ EC) - EC = f01`` in ``x = sqrt(EC)`` gives
    ``x**2 - sqrt(8 EJ) x + f01 = 0``; the smaller root is returned. A real
    root requires ``f01 <= 2 EJ``.
    """
    if not f01 > 0 or not ej_over_h > 0:
        raise DomainError("f01 and E_J must both be > 0")
    s = math.sqrt(8 * ej_over_h)
    disc = 8 * ej_over_h - 4 * f01
    if disc < 0:
        raise DomainError("f01 unattainable with given E_J")
    x = 2 * f01 / (s + math.sqrt(disc))
    return x * x


def ej_from_f01(f01: float, ec_over_h: float) -> float:
    if not f01 > 0 or not ec_over_h > 0:
        raise DomainError("f01 and E_C must both be > 0")
    return (f01 + ec_over_h) ** 2 / (8 * ec_over_h)


def rn_for_target_f01(f01: float, ec_over_h: float, mat: MaterialParams) -> float:
    """Normal-state resistance that puts the qubit at ``f01`` for a given E_C."""
    ej = ej_from_f01(f01, ec_over_h)
    _check_regime(ej, ec_over_h)
    return resistance_from_ic(ic_from_ej(ej), mat)


def resistance_from_area(area: float, mat: MaterialParams) -> float:
    if mat.resistance_area_product is None:
        raise ConfigurationError("resistance_area_product is not configured")
    if not area > 0:
        raise DomainError(f"junction area must be > 0, got {area}")
    return mat.resistance_area_product / area


def transmon_from_resistance(rn: float, ec_over_h: float, mat: MaterialParams) -> TransmonParams:
    ic = ic_from_resistance(rn, mat)
    ej = ej_from_ic(ic)
    f01, alpha = f01_from_energies(ej, ec_over_h)
    return TransmonParams(rn, ic, ej, ec_over_h, f01, alpha)


def transmon_from_f01(f01: float, ec_over_h: float, mat: MaterialParams) -> TransmonParams:
    ej = ej_from_f01(f01, ec_over_h)
    _check_regime(ej, ec_over_h)
    ic = ic_from_ej(ej)
    rn = resistance_from_ic(ic, mat)
    return TransmonParams(rn, ic, ej, ec_over_h, f01, -ec_over_h)
