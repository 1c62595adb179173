"""Command-line front end.

Three subcommands share one scenario file format:

* ``simulate`` integrates the plant over the scenario horizon and
  writes the sampled time series, stream tables at the requested
  times, a run report, and figures.
* ``steady`` solves directly for the steady state of the first
  schedule segment.
* ``verify`` runs the built-in verification suite and prints one
  machine-readable pass/fail line per check.

Exit codes: 0 success, 1 input error, 2 solver or verification
failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import dae, report
from .calciner import ClosedDuctSystem
from .errors import InitializationError, SolverError
from .scenario import ScenarioError, parse_scenario


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="flashclay",
        description="dynamic simulator for an electric flash clay "
                    "calcination plant",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate the scenario horizon")
    sim.add_argument("--scenario", required=True, help="scenario file")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--nz", type=int, default=None,
                     help="override the number of duct cells")
    sim.add_argument("--jacobian", choices=("analytic", "fd"), default=None)
    sim.add_argument("--method", choices=("be", "bdf2"), default=None)

    st = sub.add_parser("steady", help="solve the steady state directly")
    st.add_argument("--scenario", required=True)
    st.add_argument("--out", required=True)

    ver = sub.add_parser("verify", help="run the verification suite")
    ver.add_argument("--scenario", required=True)
    ver.add_argument("--corrupt-jacobian", default=None, metavar="ROW,COL",
                     help="fault-injection hook: perturb one analytic "
                          "Jacobian entry before the comparison")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        sc = parse_scenario(args.scenario)
    except (ScenarioError, OSError) as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "simulate":
            return _simulate(sc, args)
        if args.command == "steady":
            return _steady(sc, args)
        return _verify(sc, args)
    except (SolverError, InitializationError) as exc:
        out = getattr(args, "out", None)
        if out:
            os.makedirs(out, exist_ok=True)
            with open(os.path.join(out, "diagnostics.txt"), "w",
                      encoding="utf-8") as fh:
                fh.write(f"{type(exc).__name__}: {exc}\n")
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------
def _simulate(sc, args):
    os.makedirs(args.out, exist_ok=True)
    system = sc.system(args.nz)
    cfg = sc.solver_config(args.method, args.jacobian)
    schedule = sc.input_schedule()
    d = sc.disturbance()

    wall = time.perf_counter()
    z0 = system.initialize(schedule[0][1], d, cfg)
    if sc.t_end > 0.0:
        result = dae.integrate(
            system, z0[:system.n_x], z0[system.n_x:], (0.0, sc.t_end),
            schedule, d, cfg, record_every=1,
        )
    else:
        # zero-duration span: snapshot of the consistent initial state
        result = dae.IntegrationResult(
            t=np.array([0.0]), z=np.array([z0]), stats={},
        )
    wall = time.perf_counter() - wall

    report.write_timeseries(
        os.path.join(args.out, "timeseries.csv"),
        system, result, schedule, sc.sample_interval,
    )
    stream_files = []
    for t_req in sc.stream_times:
        t_req = min(t_req, sc.t_end)
        z = report.state_at(result, t_req)
        rows = system.stream_table(z, report._input_at(schedule, t_req), d)
        path = os.path.join(args.out, f"streams_t{t_req:g}.csv")
        report.write_stream_table(path, rows)
        stream_files.append(path)

    z_end = result.z[-1]
    u_end = report._input_at(schedule, float(result.t[-1]))
    closures = report.closure_numbers(system, z_end, u_end, d)
    jac = dae.jacobian_check(system, z_end, u_end, d)
    out = system.outputs(z_end, u_end, d)
    lines = [
        ("scenario", sc.name),
        ("t_end [s]", sc.t_end),
        ("wall_time [s]", f"{wall:.2f}"),
        ("production [kg/h]", f"{out['product_rate'] * 3600.0:.3f}"),
        ("conversion [-]", f"{out['conversion']:.5f}"),
        ("pressure_span [Pa]", f"{out['pressure_span']:.1f}"),
        ("closure.backbone [-]", f"{closures['backbone_closure']:.3e}"),
        ("closure.water [-]", f"{closures['water_closure']:.3e}"),
        ("closure.enthalpy [-]", f"{closures['enthalpy_closure']:.3e}"),
        ("jacobian.max_rel_discrepancy", f"{jac['max_discrepancy']:.3e}"),
        ("jacobian.worst_row", jac["worst_row_name"]),
        ("jacobian.worst_col", jac["worst_col_name"]),
    ]
    for key, value in sorted(result.stats.items()):
        if key != "wall_time":
            lines.append((f"solver.{key}", value))
    report.write_report(os.path.join(args.out, "report.txt"), lines)
    report.render_figures(args.out, system, result, schedule,
                          sc.sample_interval)
    return 0


# ----------------------------------------------------------------------
# steady
# ----------------------------------------------------------------------
def _steady(sc, args):
    os.makedirs(args.out, exist_ok=True)
    system = sc.system()
    cfg = sc.solver_config()
    u = sc.input_schedule()[0][1]
    d = sc.disturbance()

    wall = time.perf_counter()
    z0 = system.initialize(u, d, cfg)
    # ride a short transient toward the attractor, then polish with Newton
    res = dae.integrate(system, z0[:system.n_x], z0[system.n_x:],
                        (0.0, 30.0), u, d, cfg, record_every=50)
    z = dae.steady_state(system, res.final, u, d, cfg)
    wall = time.perf_counter() - wall

    single = dae.IntegrationResult(t=np.array([0.0]), z=np.array([z]),
                                   stats={})
    report.write_timeseries(os.path.join(args.out, "steady_state.csv"),
                            system, single, [(0.0, u)], sc.sample_interval)
    report.write_stream_table(os.path.join(args.out, "streams_steady.csv"),
                              system.stream_table(z, u, d))
    closures = report.closure_numbers(system, z, u, d)
    out = system.outputs(z, u, d)
    resid = float(np.max(np.abs(
        system.res_scale * system.residual(z, u, d))))
    report.write_report(os.path.join(args.out, "report.txt"), [
        ("scenario", sc.name),
        ("wall_time [s]", f"{wall:.2f}"),
        ("residual_inf_norm", f"{resid:.3e}"),
        ("production [kg/h]", f"{out['product_rate'] * 3600.0:.3f}"),
        ("conversion [-]", f"{out['conversion']:.5f}"),
        ("pressure_span [Pa]", f"{out['pressure_span']:.1f}"),
        ("closure.backbone [-]", f"{closures['backbone_closure']:.3e}"),
        ("closure.water [-]", f"{closures['water_closure']:.3e}"),
        ("closure.enthalpy [-]", f"{closures['enthalpy_closure']:.3e}"),
    ])
    report.render_sparsity(args.out, system, z, u, d)
    return 0


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------
class _CorruptedJacobian:
    """Wrapper that flips one analytic Jacobian entry (fault injection)."""

    def __init__(self, system, row, col):
        self._system = system
        self.row = row
        self.col = col

    def __getattr__(self, name):
        return getattr(self._system, name)

    def jacobian(self, z, u, d=None):
        J = self._system.jacobian(z, u, d).tolil()
        J[self.row, self.col] += 1.0 + 10.0 * abs(J[self.row, self.col])
        return J.tocsc()


class _ScalarDecay(dae.DaeSystem):
    """x' = -x with the trivial constraint y = x; exact solution e^-t."""

    n_x = 1
    n_y = 1

    def residual(self, z, u, d):
        return np.array([-z[0], z[1] - z[0]])

    def jacobian(self, z, u, d):
        return np.array([[-1.0, 0.0], [-1.0, 1.0]])


def _order_slope(method):
    system = _ScalarDecay()
    steps = (0.1, 0.05, 0.025, 0.0125)
    errors = []
    for h in steps:
        cfg = dae.SolverConfig(method=method, fixed_step=h)
        res = dae.integrate(system, [1.0], [1.0], (0.0, 1.0), None,
                            config=cfg, record_every=1000000)
        errors.append(abs(res.final[0] - np.exp(-1.0)))
    slope = np.polyfit(np.log(steps), np.log(errors), 1)[0]
    return float(slope)


def _verify(sc, args):
    checks = []

    system = sc.system()
    u = sc.input_schedule()[0][1]
    d = sc.disturbance()
    z0 = system.initialize(u, d)

    target = system
    if args.corrupt_jacobian:
        row, col = (int(v) for v in args.corrupt_jacobian.split(","))
        target = _CorruptedJacobian(system, row, col)
    jac = dae.jacobian_check(target, z0, u, d)
    checks.append((
        "jacobian",
        jac["max_discrepancy"] < 1e-5,
        f"max_rel_discrepancy={jac['max_discrepancy']:.3e} limit=1e-05 "
        f"entry=({jac['worst_row_name']}, {jac['worst_col_name']})",
    ))

    duct = ClosedDuctSystem()
    nz = duct.geometry.n_cells
    zd = duct.packed_state(
        T_s=np.linspace(630.0, 650.0, nz),
        T_g=np.linspace(880.0, 860.0, nz),
        P=1.05e5,
        c=[1.2, 0.0, 0.2, 0.8, 0.9],
    )
    m0 = duct.moiety_totals(zd)
    resd = dae.integrate(duct, zd[:duct.n_x], zd[duct.n_x:], (0.0, 60.0),
                         None, config=dae.SolverConfig(), record_every=100)
    drift = float(np.max(np.abs(duct.moiety_totals(resd.final) - m0) / m0))
    checks.append((
        "conservation.closed_duct",
        drift < 1e-8,
        f"max_moiety_drift={drift:.3e} limit=1e-08 horizon=60s",
    ))

    cfg = sc.solver_config()
    res = dae.integrate(system, z0[:system.n_x], z0[system.n_x:],
                        (0.0, 30.0), u, d, cfg, record_every=100)
    zs = dae.steady_state(system, res.final, u, d, cfg)
    closures = report.closure_numbers(system, zs, u, d)
    species = max(closures["backbone_closure"], closures["water_closure"])
    checks.append((
        "conservation.plant_species",
        species < 1e-3,
        f"max_moiety_closure={species:.3e} limit=1e-03",
    ))
    checks.append((
        "conservation.plant_enthalpy",
        closures["enthalpy_closure"] < 5e-3,
        f"closure={closures['enthalpy_closure']:.3e} limit=5e-03",
    ))

    be = _order_slope("be")
    bdf2 = _order_slope("bdf2")
    checks.append(("order.be", abs(be - 1.0) < 0.2,
                   f"slope={be:.3f} expected=1.0 tol=0.2"))
    checks.append(("order.bdf2", abs(bdf2 - 2.0) < 0.2,
                   f"slope={bdf2:.3f} expected=2.0 tol=0.2"))

    reps = 3
    t0 = time.perf_counter()
    for _ in range(reps):
        dae.scaled_jacobian(system, zs, u, d)
    t_an = (time.perf_counter() - t0) / reps
    t0 = time.perf_counter()
    dae.fd_jacobian(system, zs, u, d, 1e-6)
    t_fd = time.perf_counter() - t0
    checks.append(("jacobian.speed_ratio", t_an < t_fd,
                   f"analytic={t_an * 1e3:.1f}ms fd={t_fd * 1e3:.1f}ms "
                   f"ratio={t_fd / max(t_an, 1e-12):.1f}x"))

    all_pass = True
    for name, passed, detail in checks:
        status = "PASS" if passed else "FAIL"
        all_pass = all_pass and passed
        print(f"check.{name} = {status} {detail}")
    return 0 if all_pass else 2


if __name__ == "__main__":
    sys.exit(main())
