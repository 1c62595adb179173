"""Thermodynamic and transport properties of the five model species.

Species are indexed in a fixed order used by every state vector in the
package:

    0  kaolinite     (solid, hydrous backbone AB2)
    1  metakaolin    (solid, dehydrated backbone A)
    2  water_vapor   (gas, B)
    3  air           (gas, fixed 78/21/1 N2/O2/Ar pseudo species)
    4  quartz        (solid, inert)

Heat capacities come from tabulated correlations (an extended polynomial
for the clay solids, Shomate forms for gases and quartz) and are clamped
outside their validity window; enthalpy then continues linearly with the
boundary heat capacity so that all property functions stay C0 and keep a
bounded slope.  Enthalpies are absolute (formation enthalpy at 298.15 K
plus sensible part), which makes reaction energetics drop out of plain
enthalpy bookkeeping.

All functions accept plain floats/arrays or :class:`~flashclay.autodiff.
DualArray` temperatures and compositions, so the same code path serves
residual evaluation and analytical Jacobians.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from . import autodiff as ops
from .errors import DataFileError, ModelDomainError

__all__ = [
    "KAOLINITE", "METAKAOLIN", "WATER_VAPOR", "AIR", "QUARTZ",
    "SPECIES_NAMES", "SOLIDS", "GASES", "N_SPECIES", "R_GAS", "T_REF",
    "SpeciesTable", "load_species_table", "default_table",
    "heat_capacity", "molar_enthalpy", "molar_volume",
    "molar_internal_energy", "molar_mass",
    "solid_enthalpy", "gas_enthalpy", "mixture_enthalpy",
    "solid_volume", "gas_volume", "mixture_volume",
    "solid_internal_energy", "gas_internal_energy",
    "mixture_density", "solid_density", "gas_density",
    "sutherland_viscosity", "gas_viscosity", "suspension_viscosity",
    "reaction_enthalpy", "ThermoRangeWarning",
]

KAOLINITE, METAKAOLIN, WATER_VAPOR, AIR, QUARTZ = range(5)
SPECIES_NAMES = ("kaolinite", "metakaolin", "water_vapor", "air", "quartz")
SOLIDS = (KAOLINITE, METAKAOLIN, QUARTZ)
GASES = (WATER_VAPOR, AIR)
N_SPECIES = 5

R_GAS = 8.314462618
T_REF = 298.15


class ThermoRangeWarning(UserWarning):
    """A property correlation was evaluated outside its fitted range."""


_warned_ranges: set = set()


def _warn_range(name, side):
    key = (name, side)
    if key not in _warned_ranges:
        _warned_ranges.add(key)
        warnings.warn(
            f"heat capacity of {name} clamped {side} its fitted range; "
            "enthalpy continues linearly",
            ThermoRangeWarning,
            stacklevel=3,
        )


# ----------------------------------------------------------------------
# heat-capacity tables
# ----------------------------------------------------------------------
def _poly6_cp(k, T):
    k1, k2, k3, k4, k5, k6 = k
    return k1 + k2 * T + k3 * T * T + k4 / T + k5 / (T * T) + k6 / np.sqrt(T)


def _poly6_anti(k, T):
    k1, k2, k3, k4, k5, k6 = k
    return (
        k1 * T + 0.5 * k2 * T * T + k3 * T * T * T / 3.0
        + k4 * np.log(T) - k5 / T + 2.0 * k6 * np.sqrt(T)
    )


def _shomate_cp(k, T):
    A, B, C, D, E = k
    t = T / 1000.0
    return A + B * t + C * t * t + D * t * t * t + E / (t * t)


def _shomate_anti(k, T):
    A, B, C, D, E = k
    t = T / 1000.0
    return 1000.0 * (
        A * t + 0.5 * B * t * t + C * t * t * t / 3.0
        + 0.25 * D * t * t * t * t - E / t
    )


_CP_FORMS = {
    "extended_polynomial": (_poly6_cp, _poly6_anti),
    "shomate": (_shomate_cp, _shomate_anti),
}


@dataclass(frozen=True)
class _Segment:
    T_lo: float
    T_hi: float
    form: str
    coeffs: tuple
    dh_at_lo: float = 0.0  # integral of cp from T_REF to T_lo

    def cp(self, T):
        return _CP_FORMS[self.form][0](self.coeffs, T)

    def dh(self, T):
        anti = _CP_FORMS[self.form][1]
        return self.dh_at_lo + anti(self.coeffs, T) - anti(self.coeffs, self.T_lo)


@dataclass(frozen=True)
class _CpTable:
    """Piecewise heat-capacity correlation, clamped outside its range."""

    name: str
    segments: tuple

    @property
    def T_lo(self):
        return self.segments[0].T_lo

    @property
    def T_hi(self):
        return self.segments[-1].T_hi

    def _select(self, fn, T):
        out = fn(self.segments[-1], T)
        for seg in reversed(self.segments[:-1]):
            out = ops.where(T <= seg.T_hi, fn(seg, T), out)
        return out

    def _clamped(self, T):
        Tv = ops.value(T)
        if np.any(Tv < self.T_lo - 1e-9):
            _warn_range(self.name, "below")
        if np.any(Tv > self.T_hi + 1e-9):
            _warn_range(self.name, "above")
        return ops.clip(T, self.T_lo, self.T_hi)

    def cp(self, T):
        Tc = self._clamped(T)
        return self._select(lambda s, t: s.cp(t), Tc)

    def dh(self, T):
        """Sensible enthalpy relative to T_REF, linear outside the range."""
        Tc = self._clamped(T)
        inside = self._select(lambda s, t: s.dh(t), Tc)
        return inside + self._select(lambda s, t: s.cp(t), Tc) * (T - Tc)


@dataclass(frozen=True)
class _CompositeCp:
    """Mole-fraction weighted blend of component tables (used for air)."""

    name: str
    fractions: tuple
    tables: tuple

    @property
    def T_lo(self):
        return max(t.T_lo for t in self.tables)

    @property
    def T_hi(self):
        return min(t.T_hi for t in self.tables)

    def cp(self, T):
        out = 0.0
        for y, tab in zip(self.fractions, self.tables):
            out = out + y * tab.cp(T)
        return out

    def dh(self, T):
        out = 0.0
        for y, tab in zip(self.fractions, self.tables):
            out = out + y * tab.dh(T)
        return out


@dataclass(frozen=True)
class SpeciesRecord:
    name: str
    index: int
    phase: str
    molar_mass: float
    formation_enthalpy: float
    cp_table: object
    volume_v1: float = 0.0
    volume_v2: float = 0.0
    sutherland: tuple = None


@dataclass(frozen=True)
class SpeciesTable:
    records: tuple
    R_gas: float
    T_ref: float
    volume_scale: float
    molar_masses: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(
            self,
            "molar_masses",
            np.array([r.molar_mass for r in self.records]),
        )

    def __getitem__(self, sp):
        return self.records[sp]


# ----------------------------------------------------------------------
# data file loading
# ----------------------------------------------------------------------
def _read_keyvalue(path):
    """Parse a flat ``dotted.key = value`` file into a dict."""
    table = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataFileError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if not key or not val:
                raise DataFileError(f"{path}:{lineno}: empty key or value")
            if key in table:
                raise DataFileError(f"{path}:{lineno}: duplicate key {key!r}")
            table[key] = (val, lineno)
    return table


class _KeyView:
    def __init__(self, raw, path):
        self.raw = raw
        self.path = path
        self.used = set()

    def get(self, key, kind=float):
        if key not in self.raw:
            raise DataFileError(f"{self.path}: missing key {key!r}")
        self.used.add(key)
        val, lineno = self.raw[key]
        if kind is str:
            return val
        try:
            return kind(val)
        except ValueError:
            raise DataFileError(
                f"{self.path}:{lineno}: cannot parse {val!r} for {key!r}"
            ) from None

    def subkeys(self, prefix):
        return sorted(k for k in self.raw if k.startswith(prefix))


def _load_cp_segments(view, prefix, name):
    n_seg = int(view.get(f"{prefix}.segments"))
    segs = []
    for i in range(1, n_seg + 1):
        p = f"{prefix}.seg{i}"
        segs.append(
            dict(
                T_lo=view.get(f"{p}.T_min"),
                T_hi=view.get(f"{p}.T_max"),
                form="shomate",
                coeffs=tuple(view.get(f"{p}.{c}") for c in "ABCDE"),
            )
        )
    return _finish_segments(name, segs)


def _finish_segments(name, segs):
    segs = sorted(segs, key=lambda s: s["T_lo"])
    for a, b in zip(segs, segs[1:]):
        if abs(a["T_hi"] - b["T_lo"]) > 1e-9:
            raise DataFileError(
                f"species {name}: cp segments are not contiguous "
                f"({a['T_hi']} vs {b['T_lo']})"
            )
    # accumulate the integral from T_REF so segment enthalpies are continuous
    built = [_Segment(**s) for s in segs]
    if not (built[0].T_lo <= T_REF <= built[-1].T_hi):
        raise DataFileError(f"species {name}: {T_REF} K outside cp range")
    # cumulative integral of cp from the first segment's T_lo, then shift
    # so that dh(T_REF) == 0
    cum = [0.0]
    for seg in built:
        anti = _CP_FORMS[seg.form][1]
        cum.append(cum[-1] + anti(seg.coeffs, seg.T_hi) - anti(seg.coeffs, seg.T_lo))
    # integral from built[0].T_lo to T_REF
    ref_seg = next(s for s in built if s.T_lo <= T_REF <= s.T_hi)
    k = built.index(ref_seg)
    anti = _CP_FORMS[ref_seg.form][1]
    to_ref = cum[k] + anti(ref_seg.coeffs, T_REF) - anti(ref_seg.coeffs, ref_seg.T_lo)
    final = tuple(
        _Segment(s.T_lo, s.T_hi, s.form, s.coeffs, dh_at_lo=cum[i] - to_ref)
        for i, s in enumerate(built)
    )
    return _CpTable(name=name, segments=final)


def load_species_table(path=None):
    """Load species property data from a key-value file."""
    if path is None:
        path = resources.files("flashclay").joinpath("data/species.dat")
    path = str(path)
    view = _KeyView(_read_keyvalue(path), path)

    R = view.get("constants.R_gas")
    t_ref = view.get("constants.T_ref")
    if abs(t_ref - T_REF) > 1e-9:
        raise DataFileError(f"{path}: reference temperature must be {T_REF} K")
    vscale = view.get("constants.solid_volume_unit_scale")

    components = {}
    for comp in ("N2", "O2", "Ar"):
        prefix = f"component.{comp}.cp"
        components[comp] = (
            view.get(f"component.{comp}.molar_mass"),
            _load_cp_segments(view, prefix, comp),
        )

    records = []
    for idx, name in enumerate(SPECIES_NAMES):
        p = f"species.{name}"
        phase = view.get(f"{p}.phase", str)
        model = view.get(f"{p}.cp.model", str)
        if model == "extended_polynomial":
            seg = dict(
                T_lo=view.get(f"{p}.cp.T_min"),
                T_hi=view.get(f"{p}.cp.T_max"),
                form="extended_polynomial",
                coeffs=tuple(view.get(f"{p}.cp.k{i}") for i in range(1, 7)),
            )
            table = _finish_segments(name, [seg])
        elif model == "shomate":
            table = _load_cp_segments(view, f"{p}.cp", name)
        elif model == "composite":
            fracs, tabs = [], []
            for comp in ("N2", "O2", "Ar"):
                fracs.append(view.get(f"{p}.cp.component.{comp}"))
                tabs.append(components[comp][1])
            if abs(sum(fracs) - 1.0) > 1e-12:
                raise DataFileError(f"{path}: {name} fractions must sum to 1")
            table = _CompositeCp(name=name, fractions=tuple(fracs), tables=tuple(tabs))
        else:
            raise DataFileError(f"{path}: unknown cp model {model!r} for {name}")

        suth = None
        if f"{p}.sutherland.mu0" in view.raw:
            suth = tuple(view.get(f"{p}.sutherland.{k}") for k in ("mu0", "T0", "S"))

        v1 = v2 = 0.0
        if phase == "solid":
            v1 = view.get(f"{p}.volume.v1")
            v2 = view.get(f"{p}.volume.v2")
        records.append(
            SpeciesRecord(
                name=name,
                index=idx,
                phase=phase,
                molar_mass=view.get(f"{p}.molar_mass"),
                formation_enthalpy=view.get(f"{p}.formation_enthalpy"),
                cp_table=table,
                volume_v1=v1,
                volume_v2=v2,
                sutherland=suth,
            )
        )

    return SpeciesTable(
        records=tuple(records), R_gas=R, T_ref=t_ref, volume_scale=vscale
    )


@lru_cache(maxsize=None)
def _cached_default():
    return load_species_table()


def default_table():
    return _cached_default()


# ----------------------------------------------------------------------
# single-species properties
# ----------------------------------------------------------------------
def molar_mass(sp, table=None):
    table = table or default_table()
    return table[sp].molar_mass


def heat_capacity(sp, T, table=None):
    """Molar heat capacity [J/(mol K)], clamped outside the fitted range."""
    table = table or default_table()
    return table[sp].cp_table.cp(T)


def molar_enthalpy(sp, T, P=101325.0, table=None):
    """Absolute molar enthalpy [J/mol] (formation + sensible)."""
    table = table or default_table()
    rec = table[sp]
    return rec.formation_enthalpy + rec.cp_table.dh(T)


def molar_volume(sp, T, P, table=None):
    """Molar volume [m^3/mol]: linear-in-T for solids, ideal gas otherwise."""
    table = table or default_table()
    rec = table[sp]
    if rec.phase == "solid":
        return (rec.volume_v1 + rec.volume_v2 * T) * table.volume_scale
    return table.R_gas * T / P


def molar_internal_energy(sp, T, P, table=None):
    return molar_enthalpy(sp, T, P, table) - P * molar_volume(sp, T, P, table)


# ----------------------------------------------------------------------
# phase aggregates over a 5-species composition vector
# ----------------------------------------------------------------------
def _guard(n):
    """Zero out round-off level negative amounts (> -1e-9)."""
    return ops.where((n < 0.0) & (n > -1e-9), 0.0, n)


def _accumulate(indices, fn, n):
    out = 0.0
    for i in indices:
        out = out + _guard(n[i]) * fn(i)
    return out


def solid_enthalpy(T_s, P, n, table=None):
    """Enthalpy of the solid phase [J per unit of n] at temperature T_s."""
    return _accumulate(SOLIDS, lambda i: molar_enthalpy(i, T_s, P, table), n)


def gas_enthalpy(T_g, P, n, table=None):
    return _accumulate(GASES, lambda i: molar_enthalpy(i, T_g, P, table), n)


def mixture_enthalpy(T, P, n, table=None):
    return solid_enthalpy(T, P, n, table) + gas_enthalpy(T, P, n, table)


def solid_volume(T_s, P, n, table=None):
    """Volume of the solid phase; with n in mol/m^3 this is a volume fraction."""
    return _accumulate(SOLIDS, lambda i: molar_volume(i, T_s, P, table), n)


def gas_volume(T_g, P, n, table=None):
    return _accumulate(GASES, lambda i: molar_volume(i, T_g, P, table), n)


def mixture_volume(T, P, n, table=None):
    return solid_volume(T, P, n, table) + gas_volume(T, P, n, table)


def solid_internal_energy(T_s, P, n, table=None):
    return solid_enthalpy(T_s, P, n, table) - P * solid_volume(T_s, P, n, table)


def gas_internal_energy(T_g, P, n, table=None):
    return gas_enthalpy(T_g, P, n, table) - P * gas_volume(T_g, P, n, table)


# ----------------------------------------------------------------------
# densities
# ----------------------------------------------------------------------
def mixture_density(c, table=None):
    """Suspension density [kg/m^3] from concentrations [mol/m^3]."""
    table = table or default_table()
    out = 0.0
    for i in range(N_SPECIES):
        out = out + _guard(c[i]) * table[i].molar_mass
    return out


def solid_density(c, T_s, P, table=None):
    """Density of the solid material itself (mass over solid volume)."""
    table = table or default_table()
    mass = 0.0
    for i in SOLIDS:
        mass = mass + _guard(c[i]) * table[i].molar_mass
    return mass / solid_volume(T_s, P, c, table)


def gas_density(c, T_g, P, table=None):
    table = table or default_table()
    mass = 0.0
    for i in GASES:
        mass = mass + _guard(c[i]) * table[i].molar_mass
    return mass / gas_volume(T_g, P, c, table)


# ----------------------------------------------------------------------
# viscosity
# ----------------------------------------------------------------------
def sutherland_viscosity(sp, T, table=None):
    """Pure-gas dynamic viscosity [Pa s] from the Sutherland correlation."""
    table = table or default_table()
    rec = table[sp]
    if rec.sutherland is None:
        raise ModelDomainError(f"no viscosity correlation for {rec.name}")
    mu0, T0, S = rec.sutherland
    return mu0 * (T / T0) ** 1.5 * (T0 + S) / (T + S)


def gas_viscosity(T, x, table=None):
    """Viscosity of the water/air mixture by Wilke's rule.

    x is the pair of gas mole fractions (water_vapor, air); it must sum
    to one.
    """
    xw, xa = x[0], x[1]
    s = ops.value(xw) + ops.value(xa)
    if np.any(np.abs(s - 1.0) > 1e-8):
        raise ValueError("gas mole fractions must sum to 1")
    mus = [sutherland_viscosity(WATER_VAPOR, T, table),
           sutherland_viscosity(AIR, T, table)]
    Ms = [molar_mass(WATER_VAPOR, table), molar_mass(AIR, table)]
    xs = [xw, xa]
    out = 0.0
    for i in range(2):
        denom = 0.0
        for j in range(2):
            if i == j:
                phi = 1.0
            else:
                ratio = (1.0 + np.sqrt(mus[i] / mus[j]) * (Ms[j] / Ms[i]) ** 0.25) ** 2
                phi = ratio / (2.0 * np.sqrt(2.0) * np.sqrt(1.0 + Ms[i] / Ms[j]))
            denom = denom + xs[j] * phi
        out = out + xs[i] * mus[i] / denom
    return out


def suspension_viscosity(mu_g, phi_s):
    """Effective viscosity of the dusty gas (extended Einstein form)."""
    if np.any(ops.value(phi_s) >= 0.5):
        raise ModelDomainError(
            "solid volume fraction >= 0.5: suspension viscosity singular"
        )
    return mu_g * (1.0 + 0.5 * phi_s) / (1.0 - 2.0 * phi_s)


# ----------------------------------------------------------------------
# reaction bookkeeping helper
# ----------------------------------------------------------------------
def reaction_enthalpy(T, table=None):
    """Enthalpy of kaolinite -> metakaolin + 2 water_vapor at T [J/mol]."""
    return (
        molar_enthalpy(METAKAOLIN, T, table=table)
        + 2.0 * molar_enthalpy(WATER_VAPOR, T, table=table)
        - molar_enthalpy(KAOLINITE, T, table=table)
    )
