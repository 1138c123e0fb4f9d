"""Command-line front end: single-point queries and experiment sweeps.

Angles are degrees at this boundary (radians everywhere inside).  Numbers
print with 12 significant digits; sweep output is CSV written atomically
(temp file + rename) so repeated runs are byte-comparable.

Exit codes: 0 ok, 2 usage, 3 parameter file, 4 singular configuration,
5 solver failure.
"""

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from ._kernels import backend_name
from .errors import (CcarmError, ConfigurationError, ConvergenceError,
                     ParameterError, SingularConfigurationError,
                     UnreachableTargetError)
from .kinematics import (forward_kinematics, jacobian_q_psi, jacobian_v_psi,
                         jacobian_w_psi, jacobian_w_psi_vectorized,
                         jacobian_x_psi)
from .model import (Configuration, Wrench, default_parameters, load_parameters,
                    wrap_configuration)
from .sim import (STANDARD_GRAVITY, finite_difference_oracle, mirrored_schedule,
                  run_stiffness_sweep, solve_perching_reaction)
from .statics import allocate_tensions, energy_gradient
from .stiffness import configuration_stiffness, task_stiffness, tendon_stiffness

PARAMS_ENV_VAR = "CONTINUUM_PARAMS"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARAMS = 3
EXIT_SINGULAR = 4
EXIT_SOLVER = 5


def _fmt(x):
    return format(float(x), ".12g")


def _print_matrix(name, matrix):
    print(name)
    for row in np.atleast_2d(matrix):
        print(" ".join(_fmt(v) for v in row))


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ccarm-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resolve_params(args):
    path = getattr(args, "params", None) or os.environ.get(PARAMS_ENV_VAR)
    if path:
        return load_parameters(path)
    return default_parameters()


def _config_from_args(args):
    return wrap_configuration(math.radians(args.theta_deg), math.radians(args.delta_deg))


def _add_config_flags(parser):
    parser.add_argument("--theta-deg", type=float, required=True,
                        help="bending angle, degrees")
    parser.add_argument("--delta-deg", type=float, default=0.0,
                        help="bending-plane angle, degrees (default 0)")
    parser.add_argument("--params", help="parameter file (default: $%s or built-in)"
                        % PARAMS_ENV_VAR)


def cmd_pose(params, args):
    pose = forward_kinematics(params, _config_from_args(args))
    print("position_m " + " ".join(_fmt(v) for v in pose.position))
    print("rotation_row_major " + " ".join(_fmt(v) for v in pose.rotation.ravel()))
    return EXIT_OK


def cmd_jacobians(params, args):
    psi = _config_from_args(args)
    jq = jacobian_q_psi(params, psi)
    jv = jacobian_v_psi(params, psi)
    jw = jacobian_w_psi(params, psi)
    rank = int(np.linalg.matrix_rank(jacobian_x_psi(params, psi)))

    checks = None
    if args.check:
        vectorized = jacobian_w_psi_vectorized(params, psi)

        def rel_fd(analytic, fd):
            return float(np.linalg.norm(analytic - fd) / max(np.linalg.norm(analytic), 1e-300))

        x0 = np.array([psi.theta, psi.delta])
        fd_q = finite_difference_oracle(
            lambda x: (params.pitch_radius * x[0]
                       * np.cos(x[1] + params.tendon_phases)), x0)
        fd_v = finite_difference_oracle(
            lambda x: forward_kinematics(params, Configuration(x[0], x[1])).position, x0)
        checks = {
            "vectorized_vs_analytic_max_abs": float(np.max(np.abs(vectorized - jw))),
            "fd_rel_err_j_q_psi": rel_fd(jq, fd_q),
            "fd_rel_err_j_v_psi": rel_fd(jv, fd_v),
        }

    if args.json:
        doc = {
            "theta_rad": psi.theta,
            "delta_rad": psi.delta,
            "j_q_psi": jq.tolist(),
            "j_v_psi": jv.tolist(),
            "j_w_psi": jw.tolist(),
            "j_x_psi_rank": rank,
        }
        if checks is not None:
            doc["checks"] = checks
        print(json.dumps(doc))
    else:
        _print_matrix("j_q_psi", jq)
        _print_matrix("j_v_psi", jv)
        _print_matrix("j_w_psi", jw)
        print(f"j_x_psi_rank {rank}")
        if checks is not None:
            for key, value in checks.items():
                print(f"{key} {value:.3e}")
    if rank < 2:
        print("warning: singular configuration (twist Jacobian rank < 2)")
    return EXIT_OK


def cmd_stiffness(params, args):
    psi = _config_from_args(args)
    if args.tensions is not None:
        tau = np.array([float(v) for v in args.tensions.split(",")])
        if tau.size != params.tendon_count:
            raise ConfigurationError(
                f"--tensions expects {params.tendon_count} comma-separated values")
        f_star = energy_gradient(params, psi) - jacobian_q_psi(params, psi).T @ tau
    else:
        report = allocate_tensions(params, psi, Wrench.zero(), args.pretension)
        tau = report.tensions
        f_star = report.generalized_force
    k_x = task_stiffness(params, psi, tau, f_star, damped=args.damped)
    _print_matrix("k_psi", configuration_stiffness(params, psi, tau))
    print("k_q_diag " + " ".join(_fmt(v) for v in np.diag(tendon_stiffness(params))))
    _print_matrix("k_x", k_x)
    print("tensions_N " + " ".join(_fmt(v) for v in tau))
    return EXIT_OK


def _csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _stiffness_sweep_rows(params, args):
    configs_deg = [float(v) for v in args.configs_deg.split(",")] if args.configs_deg else []
    schedule = mirrored_schedule(args.increment_n, args.steps)
    rows = []
    failures = 0
    for theta_deg in configs_deg:
        config = wrap_configuration(math.radians(theta_deg), math.radians(args.delta_deg))
        for cycle in range(1, args.cycles + 1):
            records = run_stiffness_sweep(
                params, [config], schedule, args.direction, args.pretension,
                strict=False, tol=args.tol, max_iter=args.max_iter,
                backtrack=args.backtrack)
            for record in records:
                status = "ok" if record.converged else "no_converge"
                failures += status != "ok"
                rows.append([
                    _fmt(theta_deg), _fmt(args.delta_deg), str(cycle),
                    _fmt(np.linalg.norm(record.applied_force)),
                    _fmt(record.tip_displacement[0]),
                    _fmt(record.tip_displacement[1]),
                    _fmt(record.tip_displacement[2]),
                    str(record.solver_iterations), status,
                ])
    header = ["config_theta_deg", "config_delta_deg", "cycle", "load_N",
              "disp_x_m", "disp_y_m", "disp_z_m", "iterations", "status"]
    return header, rows, failures


def _perching_sweep_rows(params, args):
    config = wrap_configuration(math.radians(args.theta_deg), math.radians(args.delta_deg))
    anchor = forward_kinematics(params, config).position
    axis = {"x": np.array([1.0, 0.0, 0.0]), "z": np.array([0.0, 0.0, 1.0])}[args.axis]
    steps = max(0, int(round(args.travel_mm / args.step_mm)))
    out = [k * args.step_mm * 1e-3 for k in range(0, steps + 1)]
    offsets = out + out[-2::-1]
    rows = []
    failures = 0
    for offset in offsets:
        try:
            record = solve_perching_reaction(
                params, config, anchor, offset * axis, args.pretension,
                tol=args.ik_tol, max_iter=args.max_iter)
            force, moment, status = record.reaction_force, record.reaction_moment, "ok"
        except (ConvergenceError, UnreachableTargetError):
            force = moment = np.full(3, np.nan)
            status = "no_converge"
            failures += 1
        rows.append([_fmt(offset)] + [_fmt(v) for v in force] + [_fmt(v) for v in moment]
                    + [status])
    header = ["offset_m", "fx_N", "fy_N", "fz_N", "mx_Nm", "my_Nm", "mz_Nm", "status"]
    return header, rows, failures


def cmd_sweep(params, args):
    if args.experiment == "stiffness":
        header, rows, failures = _stiffness_sweep_rows(params, args)
    else:
        header, rows, failures = _perching_sweep_rows(params, args)
    _write_atomic(args.out, _csv_text(header, rows))
    print(f"wrote {args.out} ({len(rows)} rows)")
    if failures:
        print(f"error: {failures} sweep points did not converge", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ccarm",
        description="Constant-curvature tendon arm: kinematics, statics, "
                    "stiffness and experiment sweeps",
    )
    parser.add_argument("--version", action="version",
                        version=f"ccarm {__version__} ({backend_name()} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_pose = sub.add_parser("pose", help="tip pose of one configuration")
    _add_config_flags(p_pose)
    p_pose.set_defaults(handler=cmd_pose)

    p_jac = sub.add_parser("jacobians", help="all Jacobians of one configuration")
    _add_config_flags(p_jac)
    p_jac.add_argument("--check", action="store_true",
                       help="cross-check against the vectorized construction "
                            "and finite differences")
    p_jac.add_argument("--json", action="store_true", help="emit a JSON document")
    p_jac.set_defaults(handler=cmd_jacobians)

    p_stiff = sub.add_parser("stiffness", help="stiffness matrices at one configuration")
    _add_config_flags(p_stiff)
    group = p_stiff.add_mutually_exclusive_group()
    group.add_argument("--tensions", help="comma-separated tendon tensions, N")
    group.add_argument("--equilibrium", action="store_true",
                       help="allocate equilibrium tensions (default)")
    p_stiff.add_argument("--pretension", type=float, default=0.0,
                         help="pretension floor for --equilibrium, N")
    p_stiff.add_argument("--damped", action="store_true",
                         help="damped pseudoinverse at singular configurations")
    p_stiff.set_defaults(handler=cmd_stiffness)

    p_sweep = sub.add_parser("sweep", help="experiment sweep to CSV")
    p_sweep.add_argument("--experiment", choices=("stiffness", "perching"), required=True)
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--params", help="parameter file")
    p_sweep.add_argument("--delta-deg", type=float, default=0.0)
    p_sweep.add_argument("--pretension", type=float, default=0.0)
    # solver hyper-parameters
    p_sweep.add_argument("--tol", type=float, default=1e-10,
                         help="deflection residual tolerance, N*m")
    p_sweep.add_argument("--ik-tol", type=float, default=1e-8,
                         help="perching IK positional tolerance, m")
    p_sweep.add_argument("--max-iter", type=int, default=100)
    p_sweep.add_argument("--backtrack", type=float, default=0.5,
                         help="line-search step factor")
    # stiffness protocol: five 20-gram increments, five cycles, five bends
    p_sweep.add_argument("--configs-deg", default="0,15,30,45,60",
                         help="comma-separated bending angles, degrees")
    p_sweep.add_argument("--increment-n", type=float, default=0.02 * STANDARD_GRAVITY,
                         help="load increment, N (default 20 g)")
    p_sweep.add_argument("--steps", type=int, default=5, help="increments per cycle")
    p_sweep.add_argument("--cycles", type=int, default=5, help="loading cycles")
    p_sweep.add_argument("--direction", choices=("inward", "outward"), default="inward")
    # perching protocol: 10 mm out and back at a 30 degree bend
    p_sweep.add_argument("--theta-deg", type=float, default=30.0)
    p_sweep.add_argument("--travel-mm", type=float, default=10.0)
    p_sweep.add_argument("--step-mm", type=float, default=0.5)
    p_sweep.add_argument("--axis", choices=("x", "z"), default="x")
    p_sweep.set_defaults(handler=cmd_sweep)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse printed its own message
        return int(exc.code or 0)
    try:
        params = _resolve_params(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    try:
        return args.handler(params, args)
    except SingularConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (ConvergenceError, UnreachableTargetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CcarmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
