"""Nonlinear quasi-static solvers replaying the two bench experiments.

Deflection sweeps load the arm tip with an in-plane radial force and track
the equilibrium against the commanded configuration; the perching benchmark
pins the tip in space, moves the base and reports the reaction wrench felt
by the carrier.  Motors are displacement-locked throughout: tendon tensions
follow tau(psi) = max(0, tau0 - K_q (q(psi) - q_cmd)).

Solvers run in the smooth bend-vector chart internally (kernels module) and
every returned record carries a residual re-evaluated here, independently of
the solver's internal bookkeeping.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import core
from .errors import ConvergenceError, UnreachableTargetError
from .kinematics import configuration_to_joints, jacobian_q_psi, jacobian_v_psi
from .model import Configuration, Wrench, _readonly, wrap_configuration
from .statics import allocate_tensions, energy_gradient

# Newton loads beyond this are refused by default; the bench protocol stays
# around 1 N.
DEFAULT_FORCE_CAP = 2.0

STANDARD_GRAVITY = 9.80665  # m/s^2, converts gram-denominated bench loads


@dataclass(frozen=True)
class DeflectionRecord:
    """Equilibrium reached under one tip load."""

    applied_force: np.ndarray       # N, base frame
    equilibrium_config: Configuration
    tip_displacement: np.ndarray    # m, relative to the unloaded tip
    solver_iterations: int
    residual_norm: float            # re-evaluated, N*m scale
    converged: bool = True

    def __post_init__(self):
        object.__setattr__(self, "applied_force", _readonly(self.applied_force, (3,)))
        object.__setattr__(self, "tip_displacement", _readonly(self.tip_displacement, (3,)))


@dataclass(frozen=True)
class PerchingRecord:
    """Reaction wrench on the carrier for one base offset with the tip pinned."""

    base_offset: np.ndarray         # m
    reaction_force: np.ndarray      # N
    reaction_moment: np.ndarray     # N*m
    equilibrium_config: Configuration
    ik_residual_norm: float         # reachable-component positional residual, m
    iterations: int
    converged: bool = True

    def __post_init__(self):
        object.__setattr__(self, "base_offset", _readonly(self.base_offset, (3,)))
        object.__setattr__(self, "reaction_force", _readonly(self.reaction_force, (3,)))
        object.__setattr__(self, "reaction_moment", _readonly(self.reaction_moment, (3,)))


def finite_difference_oracle(f, x, step=1e-6):
    """Central-difference Jacobian of a vector map, column by column."""
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        dx = np.zeros_like(x)
        dx[k] = step
        plus = np.atleast_1d(np.asarray(f(x + dx), dtype=float))
        minus = np.atleast_1d(np.asarray(f(x - dx), dtype=float))
        cols.append((plus - minus) / (2.0 * step))
    return np.column_stack(cols)


def _bend_vector(psi):
    return psi.theta * math.cos(psi.delta), psi.theta * math.sin(psi.delta)


def _wrap_bend(wx, wy, fallback_delta, theta_max):
    theta = math.hypot(wx, wy)
    delta = math.atan2(wy, wx) if theta > 0.0 else fallback_delta
    return wrap_configuration(theta, delta, theta_max=theta_max)


def _locked_motor_tensions(params, psi, q_cmd, tau0):
    q = configuration_to_joints(params, psi).displacements
    return np.maximum(0.0, tau0 - params.tendon_axial_stiffness * (q - q_cmd))


def solve_deflection(params, commanded_config, tip_force, pretension=0.0, *,
                     force_cap=DEFAULT_FORCE_CAP, tol=1e-10, max_iter=100,
                     backtrack=0.5, theta_max=math.pi):
    """Equilibrium of the displacement-locked arm under a tip force.

    Motors hold the tendon lengths of commanded_config; tensions start from
    the pure-bending allocation at that configuration.  Newton iteration runs
    until the configuration-space residual drops below tol (N*m).

    Returns a DeflectionRecord; raises ConvergenceError when the iteration
    budget is exhausted and ValueError when the force exceeds force_cap.
    """
    f = np.asarray(tip_force, dtype=float).reshape(3)
    magnitude = float(np.linalg.norm(f))
    if magnitude > force_cap:
        raise ValueError(f"tip force {magnitude:.3g} N exceeds cap {force_cap:.3g} N")
    q_cmd = configuration_to_joints(params, commanded_config).displacements
    tau0 = allocate_tensions(params, commanded_config, Wrench.zero(), pretension).tensions
    w0x, w0y = _bend_vector(commanded_config)

    wx, wy, iters, _, ok = core.solve_deflection(
        params.backbone_length, params.pitch_radius, params.tendon_division_angle,
        params.tendon_count, params.flexural_rigidity, params.tendon_axial_stiffness,
        np.ascontiguousarray(q_cmd), np.ascontiguousarray(tau0),
        f[0], f[1], f[2], w0x, w0y, 0.5 * tol, max_iter, backtrack,
    )
    if not ok:
        raise ConvergenceError(
            f"deflection solve did not converge in {max_iter} iterations",
            iterations=iters,
        )
    psi_eq = _wrap_bend(wx, wy, commanded_config.delta, theta_max)

    tau = _locked_motor_tensions(params, psi_eq, q_cmd, tau0)
    residual = (energy_gradient(params, psi_eq)
                - jacobian_q_psi(params, psi_eq).T @ tau
                - jacobian_v_psi(params, psi_eq).T @ f)
    p0 = np.array(core.bend_position(params.backbone_length, w0x, w0y))
    p1 = np.array(core.bend_position(params.backbone_length, wx, wy))
    return DeflectionRecord(
        applied_force=f,
        equilibrium_config=psi_eq,
        tip_displacement=p1 - p0,
        solver_iterations=iters,
        residual_norm=float(np.linalg.norm(residual)),
    )


def radial_load_direction(psi, direction):
    """Unit in-plane load direction, perpendicular to the end-disk normal.

    "inward" points toward the arc center (it deepens the bend), "outward"
    is its opposite.
    """
    try:
        sign = {"inward": 1.0, "outward": -1.0}[direction]
    except KeyError:
        raise ValueError(f"direction must be 'inward' or 'outward', got {direction!r}")
    st, ct = math.sin(psi.theta), math.cos(psi.theta)
    sd, cd = math.sin(psi.delta), math.cos(psi.delta)
    return sign * np.array([ct * cd, ct * sd, -st])


def _solve_radial_load(params, config, load, direction, pretension,
                       reaim_tol=1e-12, max_reaim=50, **solver_kw):
    # The bench rig re-aims the pull so it stays radial at the *deflected*
    # configuration: iterate direction and equilibrium to a joint fixed point.
    d = radial_load_direction(config, direction)
    for _ in range(max_reaim):
        record = solve_deflection(params, config, load * d, pretension, **solver_kw)
        d_new = radial_load_direction(record.equilibrium_config, direction)
        if float(np.max(np.abs(d_new - d))) < reaim_tol:
            return record
        d = d_new
    raise ConvergenceError("radial load direction did not settle while re-aiming")


def run_stiffness_sweep(params, configs, load_schedule, direction="inward",
                        pretension=0.0, *, strict=True, **solver_kw):
    """Deflection records over configurations x load schedule (config-major).

    The load stays perpendicular to the end-disk normal within the bending
    plane, re-aimed at each equilibrium.  With strict=True solver failures
    raise, annotated with (config, load); otherwise they are recorded with
    converged=False and NaN displacements.
    """
    records = []
    for config in configs:
        for load in load_schedule:
            try:
                records.append(_solve_radial_load(
                    params, config, float(load), direction, pretension, **solver_kw))
            except ConvergenceError as exc:
                if strict:
                    raise ConvergenceError(
                        f"sweep point theta={math.degrees(config.theta):.3g} deg, "
                        f"load={load:.4g} N: {exc}") from exc
                records.append(DeflectionRecord(
                    applied_force=float(load) * radial_load_direction(config, direction),
                    equilibrium_config=config,
                    tip_displacement=np.full(3, np.nan),
                    solver_iterations=getattr(exc, "iterations", 0) or 0,
                    residual_norm=float("nan"),
                    converged=False,
                ))
    return records


def mirrored_schedule(increment, steps):
    """Load schedule increasing in equal steps and mirrored back to zero."""
    up = [increment * k for k in range(1, steps + 1)]
    down = [increment * k for k in range(steps - 1, -1, -1)]
    return up + down


def solve_perching_reaction(params, commanded_config, tip_anchor, base_offset,
                            pretension=0.0, *, tol=1e-8, max_iter=100,
                            damping=1e-6, theta_max=math.pi):
    """Reaction wrench on the carrier with the tip pinned and the base moved.

    The tip must stay at tip_anchor while the base translates by base_offset,
    so the arm settles to the configuration whose tip is closest to
    tip_anchor - base_offset (least-squares positional IK, the bend has only
    two degrees of freedom).  The reaction transmitted to the carrier is
    -(J_v^T)^+ (grad E - J_q^T tau), with the moment taken about the base
    origin at the tip position.
    """
    anchor = np.asarray(tip_anchor, dtype=float).reshape(3)
    offset = np.asarray(base_offset, dtype=float).reshape(3)
    target = anchor - offset
    length = params.backbone_length
    reach = float(np.linalg.norm(target))
    if reach > length * (1.0 + 1e-9):
        raise UnreachableTargetError(
            f"anchor at distance {reach:.4g} m exceeds the arm length {length:.4g} m"
        )
    w0x, w0y = _bend_vector(commanded_config)
    wx, wy, iters, reach_residual, ok = core.solve_tip_constraint(
        length, w0x, w0y, target[0], target[1], target[2], damping, tol, max_iter,
    )
    if not ok:
        raise ConvergenceError(
            f"constrained-tip IK did not converge in {max_iter} iterations",
            iterations=iters, residual=reach_residual,
        )
    psi = _wrap_bend(wx, wy, commanded_config.delta, theta_max)

    q_cmd = configuration_to_joints(params, commanded_config).displacements
    tau0 = allocate_tensions(params, commanded_config, Wrench.zero(), pretension).tensions
    tau = _locked_motor_tensions(params, psi, q_cmd, tau0)
    generalized = energy_gradient(params, psi) - jacobian_q_psi(params, psi).T @ tau
    force = -np.linalg.pinv(jacobian_v_psi(params, psi).T) @ generalized
    tip = np.array(core.bend_position(length, wx, wy))
    return PerchingRecord(
        base_offset=offset,
        reaction_force=force,
        reaction_moment=np.cross(tip, force),
        equilibrium_config=psi,
        ik_residual_norm=float(reach_residual),
        iterations=iters,
    )
