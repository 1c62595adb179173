"""Plain-text scenario files for plant simulations.

One assignment per line, dotted keys, ``#`` comments::

    simulation.t_end   = 120 s
    inputs.clay_feed   = [0: 100 kg/h, 60: 200 kg/h]
    solver.rel_tol     = 1e-4

Numbers accept a unit suffix and are converted to SI on parse: flows
to kg/s, temperatures to K (``C`` is accepted and shifted), pressures
to Pa, powers to W, lengths to m, times to s.  A bracketed value is
either a plain list (``[60 s, 120 s]``) or a piecewise-constant
schedule of ``time: value`` pairs with strictly increasing times
starting at 0.  Unknown keys, bad units, and malformed lines raise
:class:`ScenarioError` carrying the line number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from .calciner import CalcinerGeometry
from .cyclone import CycloneGeometry
from .dae import SolverConfig
from .plant import PlantDisturbances, PlantInputs, PlantSystem
from .units_aux import FanSpec


class ScenarioError(ValueError):
    """Malformed or incomplete scenario file."""


# multiplicative unit suffixes (SI target is the mapped factor);
# Celsius is affine and handled separately in _quantity
_UNIT_FACTORS = {
    "": 1.0,
    "s": 1.0, "min": 60.0, "h": 3600.0,
    "m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6,
    "m^2/s": 1.0,
    "kg/s": 1.0, "kg/h": 1.0 / 3600.0, "t/h": 1000.0 / 3600.0,
    "W": 1.0, "kW": 1e3, "MW": 1e6,
    "Pa": 1.0, "kPa": 1e3, "bar": 1e5,
    "K": 1.0,
    "W/m^2/K": 1.0, "W/m^3": 1.0,
}

_NUMBER = re.compile(r"^([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*)$")


def _quantity(text, where):
    """Parse '<number> [unit]' into an SI float."""
    m = _NUMBER.match(text.strip())
    if m is None:
        raise ScenarioError(f"{where}: expected a number, got {text.strip()!r}")
    value = float(m.group(1))
    unit = m.group(2).strip()
    if unit == "C":
        return value + 273.15
    if unit not in _UNIT_FACTORS:
        raise ScenarioError(f"{where}: unknown unit suffix {unit!r}")
    return value * _UNIT_FACTORS[unit]


def _schedule(text, where):
    """Parse '[t0: v0 unit, t1: v1 unit, ...]' into ((t, v), ...)."""
    inner = text.strip()[1:-1].strip()
    if not inner:
        raise ScenarioError(f"{where}: empty schedule")
    pairs = []
    for part in inner.split(","):
        if ":" not in part:
            raise ScenarioError(f"{where}: schedule entry {part.strip()!r} "
                                "needs the form 'time: value'")
        t_text, v_text = part.split(":", 1)
        pairs.append((_quantity(t_text, where), _quantity(v_text, where)))
    times = [t for t, _ in pairs]
    if times[0] != 0.0:
        raise ScenarioError(f"{where}: schedule must start at time 0")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ScenarioError(f"{where}: schedule times must be strictly "
                            "increasing")
    return tuple(pairs)


def _number_list(text, where):
    inner = text.strip()[1:-1].strip()
    if not inner:
        return ()
    return tuple(_quantity(p, where) for p in inner.split(","))


# key -> (kind, default); required keys carry the _REQUIRED marker
_REQUIRED = object()
_SCHEMA = {
    "name": ("string", "scenario"),
    "calciner.length": ("number", _REQUIRED),
    "calciner.diameter": ("number", 0.18),
    "calciner.cells": ("int", 10),
    "calciner.diffusion": ("number", 0.1),
    "calciner.heat_transfer": ("number", 200.0),
    "calciner.particle_diameter": ("number", 7.61e-6),
    "cyclone.diameter": ("number", 0.3),
    "fan.efficiency": ("number", 0.8),
    "fan.power": ("number", 1200.0),
    "inputs.clay_feed": ("schedule", _REQUIRED),
    "inputs.clay_kaolinite": ("fraction", 0.68),
    "inputs.clay_temperature": ("number", 303.15),
    "inputs.fresh_feed": ("schedule", _REQUIRED),
    "inputs.fresh_water": ("fraction", 0.10),
    "inputs.fresh_temperature": ("number", 303.15),
    "inputs.purge_fraction": ("fraction", 0.3),
    "inputs.heater_power": ("schedule", _REQUIRED),
    "disturbances.ambient_loss": ("number", 0.0),
    "solver.method": ("string", "bdf2"),
    "solver.jacobian": ("string", "analytic"),
    "solver.rel_tol": ("number", 1e-6),
    "solver.abs_tol": ("number", 1e-8),
    "solver.newton_tol": ("number", 1e-9),
    "solver.h_init": ("number", 1e-3),
    "solver.h_max": ("number", 10.0),
    "solver.max_steps": ("int", 200000),
    "simulation.t_end": ("number", _REQUIRED),
    "simulation.sample_interval": ("number", 1.0),
    "simulation.stream_times": ("list", None),  # defaults to [t_end]
}


@dataclass(frozen=True)
class Scenario:
    """Fully validated simulation configuration in SI units.

    Feed and heater entries are piecewise-constant schedules stored as
    ``((t, value), ...)``; a constant input is a single pair at t = 0.
    """

    name: str
    calciner_length: float
    calciner_diameter: float
    n_cells: int
    diffusion: float
    heat_transfer: float
    particle_diameter: float
    cyclone_diameter: float
    fan_efficiency: float
    fan_power: float
    clay_feed: tuple
    clay_kaolinite: float
    clay_temperature: float
    fresh_feed: tuple
    fresh_water: float
    fresh_temperature: float
    purge_fraction: float
    heater_power: tuple
    ambient_loss: float
    solver: SolverConfig = field(default_factory=SolverConfig)
    t_end: float = 120.0
    sample_interval: float = 1.0
    stream_times: tuple = ()

    # -- model assembly -------------------------------------------------
    def system(self, n_cells=None):
        geom = CalcinerGeometry(
            length=self.calciner_length,
            diameter=self.calciner_diameter,
            n_cells=int(n_cells if n_cells is not None else self.n_cells),
            diffusion=self.diffusion,
            particle_diameter=self.particle_diameter,
            heat_transfer=self.heat_transfer,
            ambient_loss=0.0,
        )
        cyc = CycloneGeometry(diameter=self.cyclone_diameter)
        return PlantSystem(
            n_cells=geom.n_cells,
            calciner_geometry=geom,
            cyclone_geometry=cyc,
            heat_transfer=self.heat_transfer,
            particle_diameter=self.particle_diameter,
        )

    def _inputs_at(self, t):
        def sample(schedule):
            v = schedule[0][1]
            for tk, vk in schedule:
                if tk <= t:
                    v = vk
            return v

        return PlantInputs.from_mass_rates(
            sample(self.clay_feed), sample(self.fresh_feed),
            kaolinite_fraction=self.clay_kaolinite,
            water_fraction=self.fresh_water,
            clay_temperature=self.clay_temperature,
            fresh_temperature=self.fresh_temperature,
            purge_fraction=self.purge_fraction,
            fan=FanSpec(self.fan_efficiency, self.fan_power),
            heater_power=sample(self.heater_power),
        )

    def input_schedule(self):
        """Merged breakpoints as [(t, PlantInputs), ...] starting at 0."""
        times = sorted({t for sched in (self.clay_feed, self.fresh_feed,
                                        self.heater_power) for t, _ in sched})
        return [(t, self._inputs_at(t)) for t in times if t < self.t_end]

    def disturbance(self):
        return PlantDisturbances(ambient_loss=self.ambient_loss)

    def solver_config(self, method=None, jacobian_mode=None):
        return SolverConfig(
            rel_tol=self.solver.rel_tol,
            abs_tol=self.solver.abs_tol,
            newton_tol=self.solver.newton_tol,
            method=method or self.solver.method,
            jacobian_mode=jacobian_mode or self.solver.jacobian_mode,
            h_init=self.solver.h_init,
            h_max=self.solver.h_max,
            max_steps=self.solver.max_steps,
        )


def baseline_path():
    """Path of the bundled feed-step scenario."""
    return resources.files(__package__) / "data" / "baseline.scn"


def parse_scenario(path):
    """Read and validate a scenario file; returns a :class:`Scenario`."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario_text(fh.read())


def parse_scenario_text(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        if "=" not in line:
            raise ScenarioError(f"{where}: expected 'key = value'")
        key, _, rhs = line.partition("=")
        key, rhs = key.strip(), rhs.strip()
        if key not in _SCHEMA:
            raise ScenarioError(f"{where}: unknown key {key!r}")
        if key in values:
            raise ScenarioError(f"{where}: duplicate key {key!r}")
        kind = _SCHEMA[key][0]
        if kind == "string":
            values[key] = rhs
        elif kind == "int":
            try:
                values[key] = int(rhs)
            except ValueError:
                raise ScenarioError(f"{where}: expected an integer") from None
        elif kind == "fraction":
            v = _quantity(rhs, where)
            if not 0.0 <= v <= 1.0:
                raise ScenarioError(f"{where}: {key} must lie in [0, 1]")
            values[key] = v
        elif kind == "number":
            values[key] = _quantity(rhs, where)
        elif kind == "schedule":
            if rhs.startswith("["):
                values[key] = _schedule(rhs, where)
            else:
                values[key] = ((0.0, _quantity(rhs, where)),)
        elif kind == "list":
            if not rhs.startswith("["):
                raise ScenarioError(f"{where}: {key} needs a bracketed list")
            values[key] = _number_list(rhs, where)

    for key, (_, default) in _SCHEMA.items():
        if key in values:
            continue
        if default is _REQUIRED:
            raise ScenarioError(f"missing required key {key!r}")
        values[key] = default

    solver = SolverConfig(
        rel_tol=values["solver.rel_tol"],
        abs_tol=values["solver.abs_tol"],
        newton_tol=values["solver.newton_tol"],
        method=values["solver.method"],
        jacobian_mode=values["solver.jacobian"],
        h_init=values["solver.h_init"],
        h_max=values["solver.h_max"],
        max_steps=values["solver.max_steps"],
    )
    t_end = values["simulation.t_end"]
    if t_end < 0:
        raise ScenarioError("simulation.t_end must be non-negative")
    stream_times = values["simulation.stream_times"]
    if stream_times is None:
        stream_times = (t_end,)
    return Scenario(
        name=values["name"],
        calciner_length=values["calciner.length"],
        calciner_diameter=values["calciner.diameter"],
        n_cells=values["calciner.cells"],
        diffusion=values["calciner.diffusion"],
        heat_transfer=values["calciner.heat_transfer"],
        particle_diameter=values["calciner.particle_diameter"],
        cyclone_diameter=values["cyclone.diameter"],
        fan_efficiency=values["fan.efficiency"],
        fan_power=values["fan.power"],
        clay_feed=values["inputs.clay_feed"],
        clay_kaolinite=values["inputs.clay_kaolinite"],
        clay_temperature=values["inputs.clay_temperature"],
        fresh_feed=values["inputs.fresh_feed"],
        fresh_water=values["inputs.fresh_water"],
        fresh_temperature=values["inputs.fresh_temperature"],
        purge_fraction=values["inputs.purge_fraction"],
        heater_power=values["inputs.heater_power"],
        ambient_loss=values["disturbances.ambient_loss"],
        solver=solver,
        t_end=t_end,
        sample_interval=values["simulation.sample_interval"],
        stream_times=tuple(stream_times),
    )


def serialize_scenario(sc):
    """Canonical SI-unit text form; parse(serialize(s)) == s."""
    def sched(pairs):
        inner = ", ".join(f"{t!r}: {v!r} kg/s" for t, v in pairs)
        return f"[{inner}]"

    lines = [
        f"name = {sc.name}",
        f"calciner.length = {sc.calciner_length!r} m",
        f"calciner.diameter = {sc.calciner_diameter!r} m",
        f"calciner.cells = {sc.n_cells}",
        f"calciner.diffusion = {sc.diffusion!r} m^2/s",
        f"calciner.heat_transfer = {sc.heat_transfer!r} W/m^2/K",
        f"calciner.particle_diameter = {sc.particle_diameter!r} m",
        f"cyclone.diameter = {sc.cyclone_diameter!r} m",
        f"fan.efficiency = {sc.fan_efficiency!r}",
        f"fan.power = {sc.fan_power!r} W",
        f"inputs.clay_feed = {sched(sc.clay_feed)}",
        f"inputs.clay_kaolinite = {sc.clay_kaolinite!r}",
        f"inputs.clay_temperature = {sc.clay_temperature!r} K",
        f"inputs.fresh_feed = {sched(sc.fresh_feed)}",
        f"inputs.fresh_water = {sc.fresh_water!r}",
        f"inputs.fresh_temperature = {sc.fresh_temperature!r} K",
        f"inputs.purge_fraction = {sc.purge_fraction!r}",
        "inputs.heater_power = [{}]".format(
            ", ".join(f"{t!r}: {v!r} W" for t, v in sc.heater_power)),
        f"disturbances.ambient_loss = {sc.ambient_loss!r} W/m^3",
        f"solver.method = {sc.solver.method}",
        f"solver.jacobian = {sc.solver.jacobian_mode}",
        f"solver.rel_tol = {sc.solver.rel_tol!r}",
        f"solver.abs_tol = {sc.solver.abs_tol!r}",
        f"solver.newton_tol = {sc.solver.newton_tol!r}",
        f"solver.h_init = {sc.solver.h_init!r} s",
        f"solver.h_max = {sc.solver.h_max!r} s",
        f"solver.max_steps = {sc.solver.max_steps}",
        f"simulation.t_end = {sc.t_end!r} s",
        f"simulation.sample_interval = {sc.sample_interval!r} s",
        "simulation.stream_times = [{}]".format(
            ", ".join(f"{t!r} s" for t in sc.stream_times)),
    ]
    return "\n".join(lines) + "\n"
