"""Static gas-loop units: fan, purge, mixer, electric heater, filter.

These units have no holdup; they appear in the plant DAE only through
algebraic residuals (fan, mixer, heater) or exact stream arithmetic
(purge, filter).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ops
from . import thermo
from .errors import ModelDomainError

__all__ = [
    "FanSpec",
    "StreamSpec",
    "fan_residual",
    "purge_split",
    "mixer_residual",
    "heater_residual",
    "ideal_filter",
    "volumetric_gas_flow",
]

_GAS_MASK = np.array([0.0, 0.0, 1.0, 1.0, 0.0])


@dataclass(frozen=True)
class FanSpec:
    """Mechanical fan: fixed electric power and efficiency."""

    efficiency: float = 0.8
    power: float = 1200.0  # W

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("fan efficiency must be in (0, 1]")
        if self.power < 0.0:
            raise ValueError("fan power must be non-negative")


@dataclass
class StreamSpec:
    """A molar flow vector [mol/s] with its temperature and pressure."""

    f: np.ndarray
    T: float
    P: float


def volumetric_gas_flow(f, T, P, table=None):
    """Ideal-gas volumetric flow [m^3/s] of the gas part of ``f``."""
    return thermo.gas_volume(T, P, f, table)


def fan_residual(F_vol, P1, P5, spec):
    """Mechanical fan balance: shaft work equals flow work.

    Zero when eta_fan * P_fan = F_vol * (P1 - P5).  The fan moves gas
    from pressure P5 up to P1 and adds no heat.
    """
    return spec.efficiency * spec.power - F_vol * (P1 - P5)


def purge_split(f_in, alpha):
    """Split a stream into (purged, recirculated) at unchanged T, P."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("purge fraction must lie in [0, 1]")
    return alpha * f_in, (1.0 - alpha) * f_in


def mixer_residual(T_mix, recirc, fresh, P, table=None):
    """Adiabatic merge of two gas streams; zero at the mixed temperature.

    residual = H(T_recirc, f_recirc) + H(T_fresh, f_fresh)
             - H(T_mix, f_recirc + f_fresh)
    """
    total = _gas_total(recirc.f) + _gas_total(fresh.f)
    if np.all(np.asarray(ops.value(total)) <= 0.0):
        raise ModelDomainError("mixer has no gas feed on either branch")
    h_in = thermo.gas_enthalpy(recirc.T, P, recirc.f, table) + thermo.gas_enthalpy(
        fresh.T, P, fresh.f, table
    )
    h_out = thermo.gas_enthalpy(T_mix, P, recirc.f + fresh.f, table)
    return h_in - h_out


def heater_residual(T_out, mix, power, P, table=None):
    """Electric hot gas generator: all resistive power enters the gas."""
    return (
        thermo.gas_enthalpy(mix.T, P, mix.f, table)
        + power
        - thermo.gas_enthalpy(T_out, P, mix.f, table)
    )


def ideal_filter(stream):
    """Perfect separation into a clean gas stream and a dust stream."""
    gas = StreamSpec(f=_GAS_MASK * stream.f, T=stream.T, P=stream.P)
    dust = StreamSpec(f=(1.0 - _GAS_MASK) * stream.f, T=stream.T, P=stream.P)
    return gas, dust


def _gas_total(f):
    return f[thermo.WATER_VAPOR] + f[thermo.AIR]
