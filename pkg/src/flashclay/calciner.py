"""Finite-volume model of the electrically heated duct calciner.

The reactor is a vertical duct discretized into ``n_cells`` equal plug
flow cells.  Each cell carries five molar concentrations and two
volumetric internal energies (solid and gas phase) as differential
states, plus temperature pair and pressure as algebraic states tied to
the energies by the phase internal-energy relations and by the volume
closure (solid and gas fractions fill the cell).

Interface velocities follow a Darcy-Weisbach correlation driven by the
pressure drop across the interface; species transport is first-order
upwind advection plus Fickian diffusion between interior cells.  The
enthalpy carried by an interface flux is evaluated at the donor cell's
temperature and pressure, so phase energy accounting is exact for any
flow direction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csc_matrix

from . import autodiff as ops
from . import thermo
from .dae import DaeSystem
from .kinetics import (DEFAULT_KINETICS, MOIETY_BACKBONE, MOIETY_WATER,
                       production_rates)
from .thermo import N_SPECIES, R_GAS

__all__ = [
    "CalcinerGeometry",
    "CalcinerState",
    "CalcinerBoundary",
    "CalcinerEval",
    "ClosedDuctSystem",
    "MachWarning",
    "darcy_velocity",
    "heat_exchange",
    "interface_fluxes",
    "rhs",
    "algebraic_residuals",
    "evaluate",
]

_SIGN_EPS = 1.0  # Pa/m, regularization scale of the velocity sign
_MACH_LIMIT = 0.2


class MachWarning(UserWarning):
    """Interface velocity left the low-Mach validity of the flow model."""


_mach_warned = False


@dataclass(frozen=True)
class CalcinerGeometry:
    """Duct geometry plus transport and loss parameters."""

    length: float = 12.0
    diameter: float = 0.18
    n_cells: int = 10
    diffusion: np.ndarray = 0.1  # m^2/s, scalar or per-species
    particle_diameter: float = 7.61e-6  # median, m
    heat_transfer: float = 200.0  # solid-gas film coefficient, W/(m^2 K)
    ambient_loss: float = 0.0  # volumetric wall loss, W/m^3

    def __post_init__(self):
        if self.length <= 0 or self.diameter <= 0:
            raise ValueError("calciner length and diameter must be positive")
        if self.n_cells < 2:
            raise ValueError("calciner needs at least 2 cells")
        diff = np.broadcast_to(
            np.asarray(self.diffusion, dtype=float), (N_SPECIES,)
        ).copy()
        if np.any(diff < 0):
            raise ValueError("diffusion coefficients must be non-negative")
        object.__setattr__(self, "diffusion", diff)

    @property
    def area(self):
        return 0.25 * np.pi * self.diameter**2

    @property
    def dz(self):
        return self.length / self.n_cells

    @property
    def volume(self):
        return self.area * self.length


@dataclass
class CalcinerState:
    """Per-cell states; arrays are cell-indexed with species axis first."""

    c: np.ndarray  # (5, n_cells) mol/m^3
    u_s: np.ndarray  # (n_cells,) J/m^3
    u_g: np.ndarray  # (n_cells,) J/m^3
    T_s: np.ndarray  # (n_cells,) K
    T_g: np.ndarray  # (n_cells,) K
    P: np.ndarray  # (n_cells,) Pa


@dataclass
class CalcinerBoundary:
    """Upstream/downstream coupling of the duct.

    Exactly one of ``c_in`` (inlet concentrations, used as
    ``N = v_in * c_in``) or ``molar_inflow`` (total molar feed in mol/s,
    used as ``N = inflow / A``) must be given.  The flow-based form is
    what the plant coupling uses; it conserves species exactly no matter
    how small the interface velocity is.
    """

    P_in: float
    P_out: float
    T_s_in: float
    T_g_in: float
    c_in: np.ndarray = None
    molar_inflow: np.ndarray = None

    def __post_init__(self):
        if (self.c_in is None) == (self.molar_inflow is None):
            raise ValueError("give exactly one of c_in or molar_inflow")


@dataclass
class CalcinerEval:
    """Everything one residual evaluation of the duct produces."""

    dc_dt: object  # (5, n_cells)
    du_s_dt: object  # (n_cells,)
    du_g_dt: object  # (n_cells,)
    res_energy_s: object  # (n_cells,)
    res_energy_g: object  # (n_cells,)
    res_volume: object  # (n_cells,)
    v_faces: object  # (n_cells + 1,)
    flux: object  # (5, n_cells + 1) mol/(m^2 s)
    solid_fraction: object  # (n_cells,)


def darcy_velocity(dpdz, rho, mu, d):
    """Velocity [m/s] from the pressure drop per length [Pa/m].

    A positive argument (pressure falling downstream) gives positive
    velocity.  The sign is regularized as g/sqrt(g^2 + eps^2) with
    eps = 1 Pa/m so the 4/7-power law stays Newton-differentiable
    through zero.
    """
    coeff = (2.0 / 0.316) * (d**5 / (mu * rho**3)) ** 0.25
    mag = np.sqrt(dpdz * dpdz + 1e-60)
    smooth_sign = dpdz / np.sqrt(dpdz * dpdz + _SIGN_EPS**2)
    return (coeff * mag) ** (4.0 / 7.0) * smooth_sign


def heat_exchange(solid_fraction, T_g, T_s, geometry, particle_diameter=None):
    """Volumetric solid-gas heat exchange [W/m^3], positive heating solid."""
    d_med = (
        geometry.particle_diameter if particle_diameter is None else particle_diameter
    )
    area_density = 6.0 * solid_fraction / d_med
    return geometry.heat_transfer * area_density * (T_g - T_s)


def _check_mach(v, T_g):
    global _mach_warned
    if _mach_warned:
        return
    vmax = float(np.max(np.abs(ops.value(v))))
    t_hot = float(np.max(ops.value(T_g)))
    speed_of_sound = np.sqrt(1.4 * R_GAS * t_hot / 0.0289)
    if vmax > _MACH_LIMIT * speed_of_sound:
        _mach_warned = True
        warnings.warn(
            f"interface velocity {vmax:.1f} m/s exceeds Mach "
            f"{_MACH_LIMIT} of the estimated sound speed; the "
            "incompressible flow correlation is extrapolating",
            MachWarning,
            stacklevel=3,
        )


def _mixture_properties(c, T_s, T_g, P):
    """Suspension density and viscosity per cell."""
    rho = thermo.mixture_density(c)
    c_w = ops.where(c[thermo.WATER_VAPOR] > 0.0, c[thermo.WATER_VAPOR], 0.0)
    c_a = ops.where(c[thermo.AIR] > 0.0, c[thermo.AIR], 0.0)
    total = c_w + c_a
    x_w = c_w / total
    mu_gas = thermo.gas_viscosity(T_g, (x_w, 1.0 - x_w))
    phi_s = thermo.solid_volume(T_s, P, c)
    mu = thermo.suspension_viscosity(mu_gas, phi_s)
    return rho, mu, phi_s


def _face_velocities(P, boundary, rho, mu, geometry):
    """Darcy velocities on the n_cells + 1 interfaces."""
    dz = geometry.dz
    drop = ops.concatenate(
        [
            ops.stack([boundary.P_in - P[0]]),
            P[:-1] - P[1:],
            ops.stack([P[-1] - boundary.P_out]),
        ]
    ) / dz
    # interface transport properties: mean of neighbours, single cell at ends
    rho_f = ops.concatenate(
        [ops.stack([rho[0]]), 0.5 * (rho[:-1] + rho[1:]), ops.stack([rho[-1]])]
    )
    mu_f = ops.concatenate(
        [ops.stack([mu[0]]), 0.5 * (mu[:-1] + mu[1:]), ops.stack([mu[-1]])]
    )
    return darcy_velocity(drop, rho_f, mu_f, geometry.diameter)


def evaluate(c, u_s, u_g, T_s, T_g, P, boundary, geometry,
             kinetics=DEFAULT_KINETICS):
    """Full spatial evaluation of the duct: derivatives plus residuals.

    All state arguments may be DualArray; the result then carries exact
    derivatives.
    """
    nz = geometry.n_cells
    dz = geometry.dz
    area = geometry.area

    rho, mu, phi_s = _mixture_properties(c, T_s, T_g, P)
    v = _face_velocities(P, boundary, rho, mu, geometry)
    _check_mach(v, T_g)

    # inlet flux: either v*c_in or exact molar feed over the cross-section
    if boundary.c_in is not None:
        n_in = v[0] * np.asarray(boundary.c_in, dtype=float)
    else:
        n_in = ops.stack(list(boundary.molar_inflow)) * (1.0 / area)

    # interior faces: upwind donor concentration plus Fickian diffusion
    up = ops.value(v[1:nz]) >= 0.0
    c_donor = ops.where(up, c[:, :-1], c[:, 1:])
    diff = geometry.diffusion[:, None]
    n_int = v[1:nz] * c_donor - diff * (c[:, 1:] - c[:, :-1]) / dz
    n_out = v[nz] * c[:, -1]

    flux = ops.concatenate(
        [_col(n_in), n_int, _col(n_out)], axis=1
    )

    # enthalpy carried by each face flux, at donor temperature/pressure
    T_s_donor = ops.where(up, T_s[:-1], T_s[1:])
    T_g_donor = ops.where(up, T_g[:-1], T_g[1:])
    P_donor = ops.where(up, P[:-1], P[1:])
    h_s = ops.concatenate(
        [
            ops.stack([thermo.solid_enthalpy(boundary.T_s_in, boundary.P_in, n_in)]),
            thermo.solid_enthalpy(T_s_donor, P_donor, n_int),
            ops.stack([thermo.solid_enthalpy(T_s[-1], P[-1], n_out)]),
        ]
    )
    h_g = ops.concatenate(
        [
            ops.stack([thermo.gas_enthalpy(boundary.T_g_in, boundary.P_in, n_in)]),
            thermo.gas_enthalpy(T_g_donor, P_donor, n_int),
            ops.stack([thermo.gas_enthalpy(T_g[-1], P[-1], n_out)]),
        ]
    )

    production = production_rates(c, T_s, kinetics)
    exchange = heat_exchange(phi_s, T_g, T_s, geometry)

    dc_dt = -(flux[:, 1:] - flux[:, :-1]) / dz + production
    du_s_dt = -(h_s[1:] - h_s[:-1]) / dz + exchange - geometry.ambient_loss
    du_g_dt = -(h_g[1:] - h_g[:-1]) / dz - exchange - geometry.ambient_loss

    res_energy_s = thermo.solid_internal_energy(T_s, P, c) - u_s
    res_energy_g = thermo.gas_internal_energy(T_g, P, c) - u_g
    res_volume = phi_s + thermo.gas_volume(T_g, P, c) - 1.0

    return CalcinerEval(
        dc_dt=dc_dt,
        du_s_dt=du_s_dt,
        du_g_dt=du_g_dt,
        res_energy_s=res_energy_s,
        res_energy_g=res_energy_g,
        res_volume=res_volume,
        v_faces=v,
        flux=flux,
        solid_fraction=phi_s,
    )


def _col(vec):
    """Reshape a 5-vector to a (5, 1) column (dual-aware)."""
    if isinstance(vec, ops.DualArray):
        return vec.reshape(5, 1)
    return np.asarray(vec, dtype=float).reshape(5, 1)


# ----------------------------------------------------------------------
# state-based wrappers
# ----------------------------------------------------------------------
def interface_fluxes(state, boundary, geometry, kinetics=DEFAULT_KINETICS):
    """Molar face fluxes (5, n_cells + 1) and face velocities."""
    ev = evaluate(
        state.c, state.u_s, state.u_g, state.T_s, state.T_g, state.P,
        boundary, geometry, kinetics,
    )
    return ev.flux, ev.v_faces


def rhs(state, boundary, geometry, kinetics=DEFAULT_KINETICS):
    """Time derivatives (dc/dt, du_s/dt, du_g/dt) of every cell."""
    ev = evaluate(
        state.c, state.u_s, state.u_g, state.T_s, state.T_g, state.P,
        boundary, geometry, kinetics,
    )
    return ev.dc_dt, ev.du_s_dt, ev.du_g_dt


def algebraic_residuals(state, geometry):
    """Per-cell [energy_s, energy_g, volume] residuals, shape (3, n_cells)."""
    res_s = thermo.solid_internal_energy(state.T_s, state.P, state.c) - state.u_s
    res_g = thermo.gas_internal_energy(state.T_g, state.P, state.c) - state.u_g
    res_v = (
        thermo.solid_volume(state.T_s, state.P, state.c)
        + thermo.gas_volume(state.T_g, state.P, state.c)
        - 1.0
    )
    return ops.stack([res_s, res_g, res_v], axis=0)


def consistent_cell_state(T_s, T_g, P, c, geometry=None):
    """Build (u_s, u_g) that satisfy the cell algebraic relations exactly."""
    u_s = thermo.solid_internal_energy(T_s, P, c)
    u_g = thermo.gas_internal_energy(T_g, P, c)
    return u_s, u_g


# ----------------------------------------------------------------------
# sealed duct as a standalone DAE system
# ----------------------------------------------------------------------
class ClosedDuctSystem(DaeSystem):
    """Sealed adiabatic duct: zero flow through both end faces.

    The boundary pressures track the live end cells, so the end-face
    velocities vanish identically and the molar feed is zero.  Species
    then only move between cells and between phases; both conserved
    moiety totals and the total internal energy are exact invariants of
    the continuous model, which makes this system the reference case
    for measuring integrator drift.

    Layout matches the duct block of the plant: per cell
    x = [c(5), u_s, u_g] and y = [T_s, T_g, P].
    """

    def __init__(self, geometry=None, kinetics=DEFAULT_KINETICS):
        geometry = geometry or CalcinerGeometry()
        if geometry.ambient_loss != 0.0:
            raise ValueError("closed duct must be adiabatic")
        self.geometry = geometry
        self.kinetics = kinetics
        self.n_x = 7 * geometry.n_cells
        self.n_y = 3 * geometry.n_cells

    @property
    def var_scale(self):
        nz = self.geometry.n_cells
        return np.concatenate([
            np.tile([1.0, 1.0, 1.0, 1.0, 1.0, 1e6, 1e6], nz),
            np.tile([1.0, 1.0, 1e5], nz),
        ])

    @property
    def res_scale(self):
        nz = self.geometry.n_cells
        return np.concatenate([
            np.tile([1.0, 1.0, 1.0, 1.0, 1.0, 1e-6, 1e-6], nz),
            np.tile([1e-6, 1e-6, 1.0], nz),
        ])

    def _state(self, z):
        nz = self.geometry.n_cells
        yo = self.n_x
        return CalcinerState(
            c=ops.stack([z[7 * i: 7 * i + 5] for i in range(nz)], axis=1),
            u_s=ops.stack([z[7 * i + 5] for i in range(nz)]),
            u_g=ops.stack([z[7 * i + 6] for i in range(nz)]),
            T_s=ops.stack([z[yo + 3 * i] for i in range(nz)]),
            T_g=ops.stack([z[yo + 3 * i + 1] for i in range(nz)]),
            P=ops.stack([z[yo + 3 * i + 2] for i in range(nz)]),
        )

    def residual(self, z, u=None, d=None):
        nz = self.geometry.n_cells
        st = self._state(z)
        boundary = CalcinerBoundary(
            P_in=st.P[0], P_out=st.P[-1], T_s_in=300.0, T_g_in=300.0,
            molar_inflow=np.zeros(N_SPECIES),
        )
        ev = evaluate(st.c, st.u_s, st.u_g, st.T_s, st.T_g, st.P,
                      boundary, self.geometry, self.kinetics)
        parts = []
        for i in range(nz):
            parts.append(ev.dc_dt[:, i])
            parts.append(ops.stack([ev.du_s_dt[i], ev.du_g_dt[i]]))
        for i in range(nz):
            parts.append(ops.stack([
                ev.res_energy_s[i], ev.res_energy_g[i], ev.res_volume[i],
            ]))
        return ops.concatenate(parts)

    def jacobian(self, z, u=None, d=None):
        dual = self.residual(ops.seed(np.asarray(z, dtype=float)), u, d)
        return csc_matrix(dual.der)

    # -- invariants ------------------------------------------------------
    def moiety_totals(self, z):
        """Total backbone and water moieties held in the duct [mol]."""
        nz = self.geometry.n_cells
        v_cell = self.geometry.area * self.geometry.dz
        c = np.array([z[7 * i: 7 * i + 5] for i in range(nz)])
        totals = v_cell * c.sum(axis=0)
        return np.array([
            float(np.dot(MOIETY_BACKBONE, totals)),
            float(np.dot(MOIETY_WATER, totals)),
        ])

    def energy_total(self, z):
        """Total internal energy held in the duct [J]."""
        nz = self.geometry.n_cells
        v_cell = self.geometry.area * self.geometry.dz
        u = np.array([z[7 * i + 5] + z[7 * i + 6] for i in range(nz)])
        return float(v_cell * u.sum())

    def packed_state(self, T_s, T_g, P, c):
        """Exactly consistent z from per-cell T_s, T_g, P, c(5,).

        The gas concentrations are rescaled so the volume closure holds
        to machine precision, and the energies come from the energy
        closures themselves, so the algebraic residual is zero by
        construction.
        """
        nz = self.geometry.n_cells
        T_s = np.broadcast_to(np.asarray(T_s, float), (nz,))
        T_g = np.broadcast_to(np.asarray(T_g, float), (nz,))
        P = np.broadcast_to(np.asarray(P, float), (nz,))
        c = np.broadcast_to(np.asarray(c, float), (nz, N_SPECIES)).copy()
        z = np.zeros(self.n)
        for i in range(nz):
            ci = c[i].copy()
            phi_s = float(thermo.solid_volume(T_s[i], P[i], ci))
            if phi_s >= 1.0:
                raise ValueError("solids alone overfill the cell")
            gas = ci[2] + ci[3]
            if gas <= 0.0:
                raise ValueError("cells need some gas")
            target = (1.0 - phi_s) * P[i] / (R_GAS * T_g[i])
            ci[2] *= target / gas
            ci[3] *= target / gas
            u_s, u_g = consistent_cell_state(T_s[i], T_g[i], P[i], ci)
            z[7 * i: 7 * i + 5] = ci
            z[7 * i + 5] = float(u_s)
            z[7 * i + 6] = float(u_g)
            z[self.n_x + 3 * i: self.n_x + 3 * i + 3] = (T_s[i], T_g[i], P[i])
        return z
