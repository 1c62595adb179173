"""Result emission: delimited time series, stream tables, figures.

Every CSV column header carries its unit.  Figures are rendered with
the non-interactive matplotlib backend so the writers work headless.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from . import dae  # noqa: E402
from .kinetics import MOIETY_BACKBONE, MOIETY_WATER  # noqa: E402

_CYC = ("cyc1", "cyc2", "cyc3")


def _input_at(schedule, t):
    u = schedule[0][1]
    for tk, uk in schedule:
        if tk <= t:
            u = uk
    return u


def timeseries_columns(system):
    cols = [("t", "s")]
    for name in _CYC:
        cols += [(f"{name}.T_s", "K"), (f"{name}.T_g", "K"),
                 (f"{name}.P", "Pa")]
    for i in range(system.n_cells):
        cell = f"calc{i + 1:02d}"
        cols += [(f"{cell}.T_s", "K"), (f"{cell}.T_g", "K"),
                 (f"{cell}.P", "Pa")]
    for name in _CYC:
        cols += [(f"{name}.v_1", "m/s"), (f"{name}.v_2", "m/s")]
    cols += [(f"P_{k}", "Pa") for k in range(1, 6)]
    cols += [("CC", "kg/h"), ("CD", "-")]
    return cols


def timeseries_row(system, t, z, u):
    snap = system.snapshot(z)
    out = system.outputs(z, u)
    row = [t]
    for j in range(3):
        row += [snap["cyclone_T_s"][j], snap["cyclone_T_g"][j],
                snap["cyclone_P"][j]]
    for i in range(system.n_cells):
        row += [snap["cell_T_s"][i], snap["cell_T_g"][i], snap["cell_P"][i]]
    for j in range(3):
        row += [snap["cyclone_v1"][j], snap["cyclone_v2"][j]]
    row += list(snap["levels"])
    row += [out["product_rate"] * 3600.0, out["conversion"]]
    return row


def sample_grid(t_end, interval):
    if t_end <= 0.0:
        return np.array([0.0])
    n = int(np.floor(t_end / interval + 1e-9))
    times = np.arange(n + 1) * interval
    if times[-1] < t_end - 1e-9 * max(1.0, t_end):
        times = np.append(times, t_end)
    return times


def state_at(result, t):
    """Last recorded state with time <= t (the re-initialized one at a
    discontinuity)."""
    k = int(np.searchsorted(result.t, t, side="right")) - 1
    return result.z[max(k, 0)]


def write_timeseries(path, system, result, schedule, interval):
    """Delimited trajectory sampled on a uniform grid."""
    cols = timeseries_columns(system)
    times = sample_grid(float(result.t[-1]), interval)
    states = dae.sample_result(result, times)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"{name} [{unit}]" for name, unit in cols])
        for t, z in zip(times, states):
            u = _input_at(schedule, t)
            writer.writerow([repr(float(v))
                             for v in timeseries_row(system, t, z, u)])


def write_stream_table(path, rows):
    """Stream table as CSV; phase-less temperature cells stay empty."""
    header = ["stream", "F_s [kg/h]", "F_g [kg/h]", "P [bar]",
              "T_s [C]", "T_g [C]", "w_A [-]", "w_B [-]"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in rows:
            has_solid = r.solid_rate > 0.0
            has_gas = r.gas_rate > 0.0
            writer.writerow([
                r.name,
                repr(r.solid_rate * 3600.0),
                repr(r.gas_rate * 3600.0),
                repr(r.pressure / 1e5),
                repr(r.temperature - 273.15) if has_solid else "",
                repr(r.gas_temperature - 273.15) if has_gas else "",
                repr(r.w_clay) if has_solid else "",
                repr(r.w_water) if has_gas else "",
            ])


def closure_numbers(system, z, u, d=None):
    """Boundary closures at a steady state, as relative errors.

    backbone: clay units fed = clay units in product + dust;
    water: water fed + water freed by reaction = water purged;
    enthalpy: stream enthalpy rise = electric power added.
    """
    flows = system.boundary_flows(z, u, d)
    a_in = float(np.dot(MOIETY_BACKBONE, flows["inflow"]))
    a_out = float(np.dot(MOIETY_BACKBONE, flows["outflow"]))
    b_in = float(np.dot(MOIETY_WATER, flows["inflow"]))
    b_out = float(np.dot(MOIETY_WATER, flows["outflow"]))
    dH = flows["enthalpy_out"] - flows["enthalpy_in"]
    power = flows["electric_power"]
    return {
        "backbone_closure": abs(a_in - a_out) / max(a_in, 1e-30),
        "water_closure": abs(b_in - b_out) / max(b_in, 1e-30),
        "enthalpy_closure": abs(dH - power) / max(abs(power), 1e-30),
    }


def write_report(path, lines):
    """Key = value run report, one entry per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in lines:
            fh.write(f"{key} = {value}\n")


# ----------------------------------------------------------------------
# figures
# ----------------------------------------------------------------------
def render_figures(out_dir, system, result, schedule, interval=1.0):
    """Temperature, pressure, output, velocity, and sparsity plots."""
    t = sample_grid(float(result.t[-1]), interval)
    states = dae.sample_result(result, t)
    series = np.array([timeseries_row(system, tk, zk, _input_at(schedule, tk))
                       for tk, zk in zip(t, states)])
    cols = [name for name, _ in timeseries_columns(system)]
    ix = {name: k for k, name in enumerate(cols)}
    files = []

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name in _CYC:
        ax.plot(t, series[:, ix[f"{name}.T_s"]], label=f"{name} solids")
        ax.plot(t, series[:, ix[f"{name}.T_g"]], "--", label=f"{name} gas")
    last = f"calc{system.n_cells:02d}"
    ax.plot(t, series[:, ix[f"{last}.T_s"]], label="duct outlet solids")
    ax.plot(t, series[:, ix[f"{last}.T_g"]], "--", label="duct outlet gas")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("T [K]")
    ax.legend(fontsize=7, ncol=2)
    files.append(_save(fig, out_dir, "temperatures.png"))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for k in range(1, 6):
        ax.plot(t, series[:, ix[f"P_{k}"]] / 1e5, label=f"P_{k}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("P [bar]")
    ax.legend(fontsize=8)
    files.append(_save(fig, out_dir, "pressures.png"))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(t, series[:, ix["CC"]], color="tab:blue", label="production")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("production [kg/h]", color="tab:blue")
    twin = ax.twinx()
    twin.plot(t, 100.0 * series[:, ix["CD"]], color="tab:red",
              label="conversion")
    twin.set_ylabel("conversion [%]", color="tab:red")
    files.append(_save(fig, out_dir, "outputs.png"))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name in _CYC:
        ax.plot(t, series[:, ix[f"{name}.v_1"]], label=f"{name} inlet")
        ax.plot(t, series[:, ix[f"{name}.v_2"]], "--", label=f"{name} vortex")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("v [m/s]")
    ax.legend(fontsize=7, ncol=2)
    files.append(_save(fig, out_dir, "velocities.png"))

    files.append(render_sparsity(out_dir, system, result.z[-1],
                                 _input_at(schedule, t[-1])))
    return files


def render_sparsity(out_dir, system, z, u, d=None):
    """Jacobian structure in solver (by-cell) and by-kind orderings."""
    J = dae.scaled_jacobian(system, np.asarray(z, float), u, d).toarray()
    perm = system.species_ordering()
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.8))
    axes[0].spy(J, markersize=1.0)
    axes[0].set_title("by unit (solver order)", fontsize=9)
    axes[1].spy(J[np.ix_(perm, perm)], markersize=1.0)
    axes[1].set_title("by variable kind", fontsize=9)
    return _save(fig, out_dir, "jacobian_spy.png")


def _save(fig, out_dir, name):
    path = f"{out_dir}/{name}"
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
