"""Arrhenius kinetics of the dehydroxylation reaction.

One irreversible reaction converts the hydrous clay backbone to its
dehydrated form and releases two moles of water vapor per mole reacted:

    kaolinite -> metakaolin + 2 water_vapor

The stoichiometric vector over the fixed species order and the two
conserved moiety vectors (clay backbone units and water units, bound or
free) are published here; every balance in the package uses them.

The rate constant has cubic concentration dependence.  The default
``conversion_cubic`` form divides by the square of the total backbone
concentration, which makes the rate first order in total backbone and
cubic in the unreacted fraction; the ``literal_cubic`` form uses the
plain cubic mass-action expression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ops
from .thermo import R_GAS

__all__ = [
    "STOICHIOMETRY",
    "MOIETY_BACKBONE",
    "MOIETY_WATER",
    "KineticParameters",
    "DEFAULT_KINETICS",
    "rate_constant",
    "reaction_rate",
    "production_rates",
]

# species order: kaolinite, metakaolin, water_vapor, air, quartz
STOICHIOMETRY = np.array([-1.0, 1.0, 2.0, 0.0, 0.0])

# conserved moieties: backbone units (A) and water units (B, bound or free)
MOIETY_BACKBONE = np.array([1.0, 1.0, 0.0, 0.0, 0.0])
MOIETY_WATER = np.array([2.0, 0.0, 1.0, 0.0, 0.0])

_RATE_FORMS = ("conversion_cubic", "literal_cubic")
_EPS_DENOM = 1e-12


@dataclass(frozen=True)
class KineticParameters:
    """Arrhenius parameters and the chosen rate form."""

    pre_exponential: float = 2.9e15  # 1/s
    activation_energy: float = 202e3  # J/mol
    rate_form: str = "conversion_cubic"

    def __post_init__(self):
        if self.rate_form not in _RATE_FORMS:
            raise ValueError(
                f"rate_form must be one of {_RATE_FORMS}, got {self.rate_form!r}"
            )


DEFAULT_KINETICS = KineticParameters()


def rate_constant(T_s, params=DEFAULT_KINETICS):
    """Arrhenius rate constant [1/s] at solid temperature T_s."""
    return params.pre_exponential * np.exp(
        -params.activation_energy / (R_GAS * T_s)
    )


def reaction_rate(c_kaolinite, c_metakaolin, T_s, params=DEFAULT_KINETICS):
    """Volumetric reaction rate [mol/(m^3 s)], never negative.

    Round-off level negative concentrations are treated as zero, and the
    conversion form guards its denominator so an (almost) backbone-free
    volume simply stops reacting.
    """
    k = rate_constant(T_s, params)
    c_ab2 = ops.where(c_kaolinite > 0.0, c_kaolinite, 0.0)
    if params.rate_form == "literal_cubic":
        return k * c_ab2 * c_ab2 * c_ab2
    c_a = ops.where(c_metakaolin > 0.0, c_metakaolin, 0.0)
    total = c_ab2 + c_a
    safe = ops.where(total > _EPS_DENOM, total, 1.0)
    rate = k * c_ab2 * c_ab2 * c_ab2 / (safe * safe)
    return ops.where(total > _EPS_DENOM, rate, 0.0)


def production_rates(c, T_s, params=DEFAULT_KINETICS):
    """Per-species production [mol/(m^3 s)] as stoichiometry times rate."""
    r = reaction_rate(c[0], c[1], T_s, params)
    return ops.stack([nu * r for nu in STOICHIOMETRY], axis=0)
