"""Lumped gas-solid cyclone model.

Each cyclone is a well-mixed volume with one tangential feed (stream 1),
a gas outlet through the vortex finder carrying non-separated dust
(stream 2) and a solids outlet at the cone tip (stream 3).  The state
holds five concentrations, two phase internal energies, the lumped
temperature pair, a mean pressure plus the two internal pressure points,
and the inlet/outlet velocities.

Pressure drops follow a three-part model (inlet expansion, swirl
friction against the wall, dissipation in the vortex tube); separation
follows the Muschelknautz limit-load model with a fractional efficiency
for the inner feed.  The dissipation term is implemented as the exact
composition of the axial and tangential kinetic energies, i.e. with
coefficient (2R³ − R² + 1)/(1 − R²)³; see the pressure-drop tests for
the composition identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ops
from . import thermo
from .errors import ModelDomainError
from .kinetics import DEFAULT_KINETICS, production_rates

__all__ = [
    "CycloneGeometry",
    "CycloneState",
    "CycloneInlet",
    "CycloneEval",
    "stairmand_geometry",
    "pressure_drop_ab",
    "pressure_drop_c",
    "separation_velocity",
    "solid_load_fraction",
    "separation_efficiency",
    "rhs",
    "algebraic_residuals",
    "evaluate",
]

_ETA_EXPONENT = 1.25  # fractional-efficiency exponent of the inner feed
_ZERO_LOAD = 1e-8  # below this inlet load the limit-load mechanism is off
_V1_FLOOR = 1e-2  # m/s; keeps the efficiency chain defined off-solution
_C0_FLOOR = 1e-12  # floor under fractional powers of the load fraction


@dataclass(frozen=True)
class CycloneGeometry:
    """Body diameter and the standard dimensionless ratios."""

    diameter: float = 0.3
    inlet_height_ratio: float = 0.5  # h_in / D
    inlet_width_ratio: float = 0.2  # w_in / D
    vortex_diameter_ratio: float = 0.5  # d_e / D
    vortex_depth_ratio: float = 0.5  # h_e / D
    total_height_ratio: float = 4.0  # h_t / D
    cone_height_ratio: float = 2.5  # h_c / D
    dust_outlet_ratio: float = 0.37  # d_d / D
    entry_constant: float = 0.3  # k_i of the inlet expansion loss

    def __post_init__(self):
        ratios = (
            self.inlet_height_ratio, self.inlet_width_ratio,
            self.vortex_diameter_ratio, self.vortex_depth_ratio,
            self.total_height_ratio, self.cone_height_ratio,
            self.dust_outlet_ratio,
        )
        if self.diameter <= 0 or any(r <= 0 for r in ratios):
            raise ValueError("cyclone dimensions must be positive")
        if self.vortex_diameter_ratio >= 1.0:
            raise ValueError("vortex finder must be narrower than the body")
        if self.cone_height_ratio >= self.total_height_ratio:
            raise ValueError("cone must be shorter than the body")

    # -- primary dimensions --------------------------------------------
    @property
    def r_c(self):
        return 0.5 * self.diameter

    @property
    def h_in(self):
        return self.inlet_height_ratio * self.diameter

    @property
    def w_in(self):
        return self.inlet_width_ratio * self.diameter

    @property
    def d_e(self):
        return self.vortex_diameter_ratio * self.diameter

    @property
    def h_e(self):
        return self.vortex_depth_ratio * self.diameter

    @property
    def h_t(self):
        return self.total_height_ratio * self.diameter

    @property
    def h_c(self):
        return self.cone_height_ratio * self.diameter

    @property
    def d_d(self):
        return self.dust_outlet_ratio * self.diameter

    # -- derived areas and volume --------------------------------------
    @property
    def inlet_area(self):
        return self.h_in * self.w_in

    @property
    def vortex_area(self):
        return 0.25 * np.pi * self.d_e**2

    @property
    def r_m(self):
        return np.sqrt(self.r_c * 0.5 * self.d_e)

    @property
    def separation_area(self):
        return np.pi * (self.r_c**2 - self.r_m**2)

    @property
    def volume(self):
        r_c, d_d, d_e = self.r_c, self.d_d, self.d_e
        barrel = r_c**2 * (self.h_t - self.h_c)
        cone = self.h_c / 3.0 * (r_c**2 + d_d**2 / 4.0 + r_c * d_d / 2.0)
        finder = d_e**2 / 4.0 * self.h_e
        return np.pi * (barrel + cone - finder)

    @property
    def cone_wall_radius(self):
        """Mid-cone radius used by the friction wall area."""
        return self.r_c - 0.5 * (self.r_c - 0.5 * self.d_d)

    @property
    def surface_area(self):
        r_c, d_d = self.r_c, self.d_d
        barrel = 2.0 * np.pi * r_c * (self.h_t - self.h_c)
        lid = np.pi * (r_c**2 - self.d_e**2 / 4.0)
        cone = np.pi * (r_c + d_d / 2.0) * np.sqrt(
            (r_c - d_d / 2.0) ** 2 + self.h_c**2
        )
        return barrel + lid + cone

    @property
    def wall_area(self):
        r_c, r_2 = self.r_c, self.cone_wall_radius
        barrel = 2.0 * np.pi * r_c * (self.h_t - self.h_c)
        cone = np.pi * (r_c + r_2) * np.sqrt(
            (r_c - r_2) ** 2 + self.h_c**2 / 4.0
        )
        return barrel + cone


def stairmand_geometry(diameter=0.3):
    """High-efficiency Stairmand proportions."""
    return CycloneGeometry(diameter=diameter)


@dataclass
class CycloneState:
    c: np.ndarray  # (5,) mol/m^3
    u_s: float  # J/m^3
    u_g: float  # J/m^3
    T_s: float  # K
    T_g: float  # K
    P: float  # Pa, mean body pressure
    P_1: float  # Pa, after inlet expansion
    P_2: float  # Pa, after wall friction
    v_1: float  # m/s, inlet velocity
    v_2: float  # m/s, vortex-tube velocity


@dataclass
class CycloneInlet:
    """Feed description: either concentrations or explicit molar flows.

    Concentration mode (``c_in`` set): the feed flux is ``v_1 * c_in``
    over the inlet area, solids entering at ``T_s_in`` and gas at
    ``T_g_in``.  Flow mode (``gas_flow`` set): the feed is the given gas
    molar flow [mol/s] at ``T_g_in`` plus any number of solid sources,
    each a (molar-flow-vector, temperature) pair; this is the exact form
    the plant coupling needs when several solid streams of different
    temperature merge at one inlet.
    """

    P_in: float
    P_out: float
    T_s_in: float = None
    T_g_in: float = None
    c_in: np.ndarray = None
    gas_flow: np.ndarray = None
    solid_sources: tuple = ()

    def __post_init__(self):
        if (self.c_in is None) == (self.gas_flow is None):
            raise ValueError("give exactly one of c_in or gas_flow")

    def total_inflow(self, inlet_area, v_1):
        """Total molar feed [mol/s] of all five species."""
        if self.c_in is not None:
            return inlet_area * v_1 * np.asarray(self.c_in, dtype=float)
        total = self.gas_flow
        for flow, _temp in self.solid_sources:
            total = total + flow
        return total

    def enthalpy_inflow(self, inlet_area, v_1):
        """Total enthalpy feed [W] split into (solid, gas) parts."""
        if self.c_in is not None:
            f = inlet_area * v_1 * np.asarray(self.c_in, dtype=float)
            h_s = thermo.solid_enthalpy(self.T_s_in, self.P_in, f)
            h_g = thermo.gas_enthalpy(self.T_g_in, self.P_in, f)
            return h_s, h_g
        h_s = 0.0
        for flow, temp in self.solid_sources:
            h_s = h_s + thermo.solid_enthalpy(temp, self.P_in, flow)
        h_g = thermo.gas_enthalpy(self.T_g_in, self.P_in, self.gas_flow)
        return h_s, h_g


@dataclass
class CycloneEval:
    dc_dt: object
    du_s_dt: object
    du_g_dt: object
    residuals: object  # the 7 algebraic rows
    eta_model: object
    stream2_flow: object  # (5,) mol/s through the vortex finder
    stream3_flow: object  # (5,) mol/s separated solids
    v_3: object
    c_0: object
    rho_g: object
    mu_gas: object
    mu_suspension: object


# ----------------------------------------------------------------------
# pressure-drop model
# ----------------------------------------------------------------------
def _friction_factor(c_0):
    c0p = ops.where(c_0 > _C0_FLOOR, c_0, _C0_FLOOR)
    return 0.005 * (1.0 + 3.0 * np.sqrt(c0p))


def pressure_drop_ab(v_1, rho_g, mu_g, c_0, geometry):
    """Inlet expansion loss and swirl wall-friction loss [Pa]."""
    g = geometry
    if np.any(ops.value(rho_g) <= 0.0) or np.any(ops.value(mu_g) <= 0.0):
        raise ValueError("gas density and viscosity must be positive")
    head = 0.5 * rho_g * v_1 * v_1

    squeeze = 1.0 - g.entry_constant * g.w_in / (g.r_c - 0.5 * g.d_e)
    dp_a = squeeze * squeeze * head

    area_ratio = np.pi * g.r_c**2 / g.inlet_area  # K_A
    de_ratio = g.d_e / g.diameter
    f_0 = _friction_factor(c_0)
    re = rho_g * v_1 * 2.0 * g.r_c / (mu_g * area_ratio * de_ratio)
    if np.any(ops.value(re) <= 0.0):
        raise ValueError("Reynolds number must be positive")
    vortex_exponent = 1.0 - np.exp(
        -0.26 * re**0.12
        * (1.0 + np.abs(g.h_e - g.h_in) / g.w_in) ** -0.5
    )
    c0p = ops.where(c_0 > _C0_FLOOR, c_0, _C0_FLOOR)
    wall_swirl = (
        1.11 * area_ratio**-0.21 * de_ratio**0.16 * re**0.06
        / (
            (1.0 + 0.35 * c0p**0.27)
            * (
                1.0
                + f_0
                * (g.surface_area / (np.pi * g.r_c**2))
                * np.sqrt(area_ratio * de_ratio)
            )
        )
    )
    dp_b = (
        4.0 * area_ratio * f_0 * g.surface_area * wall_swirl**3
        / (0.9 * np.pi * g.diameter**2 * de_ratio ** (1.5 * vortex_exponent))
    ) * head
    return dp_a, dp_b


def core_radius_ratio(geometry):
    """Vortex core radius over vortex-finder radius (R_cx)."""
    de_ratio = geometry.d_e / geometry.diameter
    core = 0.38 * de_ratio + 0.5 * de_ratio**2  # r~_c in body radii
    return core * geometry.diameter / geometry.d_e


def pressure_drop_c(v_2, rho_g, geometry):
    """Kinetic dissipation loss of the vortex-tube flow [Pa].

    Exact composition of the axial and tangential dynamic heads:
    v_a = v_2/(1-R²), v_θ² = 2R³ v_2²/(1-R²)³ with R the core radius
    ratio, giving the closed form (2R³ - R² + 1)/(1-R²)³ · ρ v_2²/2.
    """
    R = core_radius_ratio(geometry)
    denom = 1.0 - R * R
    if abs(denom) < 1e-9:
        raise ModelDomainError("vortex core radius ratio too close to 1")
    coeff = (2.0 * R**3 - R * R + 1.0) / denom**3
    return coeff * 0.5 * rho_g * v_2 * v_2


def separation_velocity(v_1, geometry):
    """Axial wall velocity v_3 feeding the solids outlet [m/s]."""
    return 0.9 * geometry.inlet_area * v_1 / geometry.separation_area


# ----------------------------------------------------------------------
# separation efficiency (Muschelknautz limit-load model)
# ----------------------------------------------------------------------
def solid_load_fraction(c_in, table=None):
    """Solids mass fraction of a composition or flow vector."""
    table = table or thermo.default_table()
    mass_s = 0.0
    mass_t = 0.0
    for i in range(thermo.N_SPECIES):
        part = ops.where(c_in[i] > 0.0, c_in[i], 0.0) * table[i].molar_mass
        mass_t = mass_t + part
        if i in thermo.SOLIDS:
            mass_s = mass_s + part
    return mass_s / mass_t


def separation_efficiency(c_in, v_1, rho_s, rho_g, mu, d_med, geometry,
                          table=None):
    """Fraction of the solid feed leaving through the solids outlet.

    ``c_in`` is the feed composition (concentrations or molar flows) from
    which the solid load fraction is taken.  Densities and viscosity are
    the current lumped-state values.  Inputs are floored (velocity,
    density contrast, load fraction) so the chain stays defined while a
    Newton iteration passes through unphysical intermediate states; the
    floors are inactive at any plausible operating point.
    """
    g = geometry
    c_0 = solid_load_fraction(c_in, table)
    v1 = ops.where(v_1 > _V1_FLOOR, v_1, _V1_FLOOR)
    drho = rho_s - rho_g
    drho = ops.where(drho > 1.0, drho, 1.0)
    c0p = ops.where(c_0 > _C0_FLOOR, c_0, _C0_FLOOR)

    f_0 = _friction_factor(c_0)
    beta = g.w_in / g.r_c
    load = 1.0 - beta * (2.0 - beta) * (1.0 - beta**2) / (1.0 + c_0)
    alpha = (1.0 / beta) * (
        1.0 - np.sqrt(1.0 + (beta**2 - 2.0 * beta) * np.sqrt(load))
    )

    r_1 = g.r_c - 0.5 * g.w_in
    u_c = r_1 * v1 / (alpha * g.r_c)
    drag = f_0 * g.wall_area * u_c / (2.0 * g.inlet_area * v1)

    def swirl(r):
        ratio = g.r_c / r
        return u_c * ratio / (1.0 + drag * np.sqrt(ratio))

    u_inner = swirl(0.5 * g.d_e)
    u_1 = swirl(r_1)
    u_2 = swirl(g.cone_wall_radius)
    accel = u_1 * u_2 / np.sqrt(r_1 * g.cone_wall_radius)

    sink_50 = 0.45 * g.inlet_area * v1 / g.wall_area
    d_star = np.sqrt(
        18.0 * 0.9 * mu * g.inlet_area * v1
        / (2.0 * np.pi * (g.h_t - g.h_e) * u_inner**2 * drho)
    )
    d_e_star = np.sqrt(18.0 * mu * sink_50 / (drho * accel))
    d_split = d_e_star / 0.7 ** (1.0 / _ETA_EXPONENT)

    inner = np.exp(-((d_star / d_split) ** _ETA_EXPONENT))

    k = ops.where(
        c_0 >= 0.1, -0.11 - 0.10 * np.log(c0p), 0.15 + 0.0 * c0p
    )
    limit_load = 0.025 * (d_star / d_med) * (10.0 * c0p) ** k
    ratio = limit_load / c0p
    ratio = ops.where(ratio < 1.0, ratio, 1.0)
    eta = 1.0 - ratio + ratio * inner
    eta = ops.where(c_0 < _ZERO_LOAD, inner, eta)
    return ops.clip(eta, 0.0, 1.0)


# ----------------------------------------------------------------------
# balances
# ----------------------------------------------------------------------
def _state_properties(state, table=None):
    c, T_s, T_g, P = state.c, state.T_s, state.T_g, state.P
    phi_s = thermo.solid_volume(T_s, P, c, table)
    rho_g = thermo.gas_density(c, T_g, P, table)
    rho_s = thermo.solid_density(c, T_s, P, table)
    c_w = ops.where(c[thermo.WATER_VAPOR] > 0.0, c[thermo.WATER_VAPOR], 0.0)
    c_a = ops.where(c[thermo.AIR] > 0.0, c[thermo.AIR], 0.0)
    x_w = c_w / (c_w + c_a)
    mu_gas = thermo.gas_viscosity(T_g, (x_w, 1.0 - x_w), table)
    mu_susp = thermo.suspension_viscosity(mu_gas, phi_s)
    return phi_s, rho_g, rho_s, mu_gas, mu_susp


def evaluate(state, inlet, geometry, heat_transfer=200.0,
             particle_diameter=7.61e-6, kinetics=DEFAULT_KINETICS,
             eta=None, table=None):
    """Balances, residuals and stream flows of one cyclone.

    If ``eta`` is None the separation efficiency is evaluated from the
    inlet and the lumped state; the plant instead passes its algebraic
    efficiency variable and closes the loop with the ``eta_model``
    returned here.
    """
    g = geometry
    c, T_s, T_g, P = state.c, state.T_s, state.T_g, state.P
    phi_s, rho_g, rho_s, mu_gas, mu_susp = _state_properties(state, table)

    feed = inlet.total_inflow(g.inlet_area, state.v_1)
    c_0 = solid_load_fraction(feed, table)
    eta_model = separation_efficiency(
        feed, state.v_1, rho_s, rho_g, mu_susp, particle_diameter, g, table
    )
    if eta is None:
        eta = eta_model

    # outlet molar flows [mol/s]
    q_2 = g.vortex_area * state.v_2
    v_3 = separation_velocity(state.v_1, g)
    q_3 = g.separation_area * v_3
    gas_mask = np.array([0.0, 0.0, 1.0, 1.0, 0.0])
    solid_mask = 1.0 - gas_mask
    stream2 = q_2 * (gas_mask * c + solid_mask * (1.0 - eta) * c)
    stream3 = q_3 * eta * solid_mask * c

    production = production_rates(c, T_s, kinetics)
    dc_dt = (feed - stream2 - stream3) / g.volume + production

    h_s_in, h_g_in = inlet.enthalpy_inflow(g.inlet_area, state.v_1)
    h_s_out = (
        thermo.solid_enthalpy(T_s, P, stream2)
        + thermo.solid_enthalpy(T_s, P, stream3)
    )
    h_g_out = thermo.gas_enthalpy(T_g, P, stream2)
    area_density = 6.0 * phi_s / particle_diameter
    exchange = heat_transfer * area_density * (T_g - T_s)
    du_s_dt = (h_s_in - h_s_out) / g.volume + exchange
    du_g_dt = (h_g_in - h_g_out) / g.volume - exchange

    dp_a, dp_b = pressure_drop_ab(state.v_1, rho_g, mu_gas, c_0, g)
    dp_c = pressure_drop_c(state.v_2, rho_g, g)
    residuals = ops.stack(
        [
            phi_s + thermo.gas_volume(T_g, P, c, table) - 1.0,
            thermo.solid_internal_energy(T_s, P, c, table) - state.u_s,
            thermo.gas_internal_energy(T_g, P, c, table) - state.u_g,
            dp_a - (inlet.P_in - state.P_1),
            dp_b - (state.P_1 - state.P_2),
            dp_c - (state.P_2 - inlet.P_out),
            P - 0.5 * (state.P_1 + state.P_2),
        ]
    )

    return CycloneEval(
        dc_dt=dc_dt,
        du_s_dt=du_s_dt,
        du_g_dt=du_g_dt,
        residuals=residuals,
        eta_model=eta_model,
        stream2_flow=stream2,
        stream3_flow=stream3,
        v_3=v_3,
        c_0=c_0,
        rho_g=rho_g,
        mu_gas=mu_gas,
        mu_suspension=mu_susp,
    )


def rhs(state, inlet, geometry, heat_transfer=200.0,
        particle_diameter=7.61e-6, kinetics=DEFAULT_KINETICS, eta=None,
        table=None):
    ev = evaluate(
        state, inlet, geometry, heat_transfer, particle_diameter,
        kinetics, eta, table,
    )
    return ev.dc_dt, ev.du_s_dt, ev.du_g_dt


def algebraic_residuals(state, inlet, geometry, table=None):
    """The seven per-cyclone algebraic rows (volume, energies, pressures)."""
    ev = evaluate(state, inlet, geometry, table=table)
    return ev.residuals
