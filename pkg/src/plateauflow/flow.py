"""Time integration of the half-harmonic map heat flow u_t = -dpi_N(u) d_r u.

The field is a band-limited BoundaryField; the nonlinear projections act
pointwise on an oversampled collocation grid (M >= 3K+1) and are truncated
back to K modes.  Three schemes are available:

* ``euler_project`` -- forward Euler, then pointwise reprojection onto N;
* ``rk4_project``   -- classical RK4 with every stage reprojected;
* ``imex_factor``   -- the linear part -d_r u is integrated exactly per mode
  (factor e^{-|k| dt}); the normal remainder dpi_N^perp(u) d_r u is explicit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .spectral import BoundaryField, TWO_PI
from .targets import OutsideTubularNeighborhood, TargetManifold

log = logging.getLogger(__name__)

SCHEMES = ("euler_project", "rk4_project", "imex_factor")
TERMINATIONS = ("converged", "t_max_reached", "concentration_detected", "step_rejected_floor")
DT_FLOOR = 1e-12


@dataclass(frozen=True)
class FlowConfig:
    max_mode: int = 64
    grid_size: int | None = None
    scheme: str = "euler_project"
    epsilon: float = 0.0
    dt: float | None = None
    dt_policy: str = "fixed"
    c_stab: float = 0.5
    safety: float = 1.0
    t_max: float = 10.0
    residual_tol: float = 1e-8
    snapshot_interval: float = 1.0
    delta_conc: float | None = None
    radius_base: float = 0.8
    radius_levels: int = 3
    reproject: bool = True
    max_steps: int = 10_000_000
    energy_tol: float = 1e-12

    def __post_init__(self):
        if self.max_mode < 1:
            raise ValueError("max_mode must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.dt_policy not in ("fixed", "adaptive"):
            raise ValueError("dt_policy must be 'fixed' or 'adaptive'")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.snapshot_interval <= 0:
            raise ValueError("snapshot_interval must be positive")
        if self.delta_conc is not None and not self.delta_conc > 0:
            raise ValueError("delta_conc must be positive")
        if self.grid_size is not None and self.grid_size < 3 * self.max_mode + 1:
            raise ValueError(f"grid_size must be >= 3K+1 = {3 * self.max_mode + 1}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def grid(self) -> int:
        if self.grid_size is not None:
            return int(self.grid_size)
        return 1 << math.ceil(math.log2(3 * self.max_mode + 1))

    @property
    def dt_cap(self) -> float:
        return self.c_stab / self.max_mode

    @property
    def initial_dt(self) -> float:
        dt = self.dt_cap if self.dt is None else self.dt
        return self.safety * dt if self.dt_policy == "adaptive" else dt

    @property
    def radius_ladder(self) -> list[float]:
        return [self.radius_base * 2.0**-j for j in range(self.radius_levels + 1)]


@dataclass(frozen=True)
class FlowState:
    t: float
    field: BoundaryField
    step_count: int = 0
    last_dt: float = 0.0


@dataclass
class Trajectory:
    snapshots: list[FlowState] = field(default_factory=list)
    series: dict[str, list[float]] = field(default_factory=lambda: {
        "t": [], "E": [], "E_half": [], "dissipation": [], "residual": [],
        "max_local_energy": [], "degree": [], "dt": []})
    termination: str = ""
    events: list = field(default_factory=list)

    @property
    def final(self) -> FlowState:
        return self.snapshots[-1]

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.series[name], dtype=float)


# -- right-hand sides ---------------------------------------------------------

def _decompose(u: BoundaryField, target: TargetManifold, grid: int):
    """Grid samples of u, and tangential/normal parts of d_r u at pi_N(u)."""
    vals = spectral.synthesize(u, grid)
    ur = spectral.synthesize(spectral.dtn(u), grid)
    _, tan, nor = target.split(vals, ur)
    return vals, ur, tan, nor


def rhs(u: BoundaryField, target: TargetManifold, grid_size: int | None = None) -> BoundaryField:
    """-dpi_N(u) d_r u, truncated to the band limit of u."""
    grid = grid_size or spectral.default_grid(u.max_mode, 1.5)
    _, _, tan, _ = _decompose(u, target, grid)
    return -spectral.analyze(tan, u.max_mode)


def rhs_regularized(u: BoundaryField, target: TargetManifold, epsilon: float,
                    grid_size: int | None = None) -> BoundaryField:
    """-(epsilon + dpi_N(u)) d_r u."""
    out = rhs(u, target, grid_size)
    if epsilon:
        out = out - epsilon * spectral.dtn(u)
    return out


def residual_norm(u: BoundaryField, target: TargetManifold, grid_size: int | None = None) -> float:
    """L2(S^1) norm of dpi_N(u) d_r u on the collocation grid (trapezoid rule)."""
    grid = grid_size or spectral.default_grid(u.max_mode, 1.5)
    _, _, tan, _ = _decompose(u, target, grid)
    return float(np.sqrt(TWO_PI / grid * np.sum(tan * tan)))


def reproject(u: BoundaryField, target: TargetManifold, grid_size: int | None = None) -> BoundaryField:
    grid = grid_size or spectral.default_grid(u.max_mode, 1.5)
    vals = spectral.synthesize(u, grid)
    return spectral.analyze(target.project(vals), u.max_mode)


def manifold_defect(u: BoundaryField, target: TargetManifold, grid_size: int | None = None) -> float:
    """Largest distance to N over the collocation grid."""
    grid = grid_size or spectral.default_grid(u.max_mode, 1.5)
    return float(np.max(target.distance(spectral.synthesize(u, grid))))


def prepare_initial(u0: BoundaryField, cfg: FlowConfig, target: TargetManifold) -> BoundaryField:
    """Resize arbitrary R^n-valued data to K modes and project it pointwise onto N."""
    if u0.n_components != target.ambient_dim:
        raise ValueError(f"initial data has {u0.n_components} components, target lives in R^{target.ambient_dim}")
    grid = max(cfg.grid, spectral.default_grid(u0.max_mode, 1.0))
    vals = spectral.synthesize(u0, grid)
    return spectral.analyze(target.project(vals), cfg.max_mode)


# -- stepping -----------------------------------------------------------------

def _velocity(u, cfg: FlowConfig, target):
    return rhs_regularized(u, target, cfg.epsilon, cfg.grid)


def _project(u, cfg: FlowConfig, target):
    return reproject(u, target, cfg.grid) if cfg.reproject else u


def _phi1(x):
    """(e^x - 1) / x, stable near zero."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x != 0
    out[nz] = np.expm1(x[nz]) / x[nz]
    return out


def advance(u: BoundaryField, dt: float, cfg: FlowConfig, target: TargetManifold,
            velocity: BoundaryField | None = None) -> BoundaryField:
    """One step of size dt; raises OutsideTubularNeighborhood if a stage leaves N_rho."""
    if cfg.scheme == "euler_project":
        v = velocity if velocity is not None else _velocity(u, cfg, target)
        return _project(u + dt * v, cfg, target)
    if cfg.scheme == "rk4_project":
        k1 = velocity if velocity is not None else _velocity(u, cfg, target)
        k2 = _velocity(_project(u + 0.5 * dt * k1, cfg, target), cfg, target)
        k3 = _velocity(_project(u + 0.5 * dt * k2, cfg, target), cfg, target)
        k4 = _velocity(_project(u + dt * k3, cfg, target), cfg, target)
        return _project(u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), cfg, target)
    # imex_factor: u_t = -d_r u + [dpi^perp(u) d_r u - eps d_r u]
    _, _, _, nor = _decompose(u, target, cfg.grid)
    forcing = spectral.analyze(nor, u.max_mode)
    if cfg.epsilon:
        forcing = forcing - cfg.epsilon * spectral.dtn(u)
    lam = -np.abs(spectral.modes(u.max_mode)) * dt
    new = u.multiply_modes(np.exp(lam)) + dt * forcing.multiply_modes(_phi1(lam))
    return _project(new, cfg, target)


def step(state: FlowState, cfg: FlowConfig, target: TargetManifold, dt: float | None = None,
         velocity: BoundaryField | None = None) -> FlowState:
    """Advance by one accepted step, halving dt on projection failure.

    Raises ``StepRejected`` once dt falls below the floor.
    """
    dt = cfg.initial_dt if dt is None else dt
    e0 = spectral.dirichlet_energy(state.field) if cfg.dt_policy == "adaptive" else None
    while True:
        if dt < DT_FLOOR:
            raise StepRejected(f"time step fell below {DT_FLOOR:g} at t = {state.t:.6g}")
        try:
            new = advance(state.field, dt, cfg, target, velocity)
        except OutsideTubularNeighborhood:
            log.debug("step of size %g left the tubular neighborhood; halving", dt)
            dt *= 0.5
            continue
        if e0 is not None and spectral.dirichlet_energy(new) > e0 + cfg.energy_tol + dt * dt:
            dt *= 0.5
            continue
        return FlowState(state.t + dt, new, state.step_count + 1, dt)


class StepRejected(RuntimeError):
    pass


# -- driver -------------------------------------------------------------------

def run(u0: BoundaryField, cfg: FlowConfig, target: TargetManifold, monitor=None) -> Trajectory:
    """Integrate from u0 until convergence, t_max or a concentration event.

    ``monitor(state)`` is called at every snapshot and may return a list of
    concentration events; a non-empty list stops the run.  When no monitor
    is given and ``cfg.delta_conc`` is set, the boundary lattice scan of
    ``diagnostics.detect_concentration`` is used.
    """
    from . import diagnostics

    if monitor is None:
        def monitor(st):
            return diagnostics.scan_state(st, cfg)

    traj = Trajectory()
    state = FlowState(0.0, prepare_initial(u0, cfg, target))
    dt = cfg.initial_dt
    next_snap = 0.0
    t_tol = 1e-9 * dt
    while True:
        u = state.field
        vel = _velocity(u, cfg, target)
        res = residual_norm(u, target, cfg.grid)
        diss = spectral.l2_norm(vel) ** 2
        snap = state.t >= next_snap - t_tol
        s = traj.series
        s["t"].append(state.t)
        s["E"].append(spectral.dirichlet_energy(u))
        s["E_half"].append(spectral.half_energy(u))
        s["dissipation"].append(diss)
        s["residual"].append(res)
        s["dt"].append(state.last_dt)
        mle, deg = math.nan, math.nan
        done = None
        if res <= cfg.residual_tol:
            done = "converged"
        elif state.t >= cfg.t_max - t_tol:
            done = "t_max_reached"
        elif state.step_count >= cfg.max_steps:
            done = "t_max_reached"
        if snap or done:
            traj.snapshots.append(state)
            mle, events = monitor(state)
            if u.n_components == 2:
                try:
                    deg = float(spectral.winding_degree(u))
                except ValueError:
                    pass
            if events:
                traj.events.extend(events)
                done = "concentration_detected"
            while next_snap <= state.t + t_tol:
                next_snap += cfg.snapshot_interval
        s["max_local_energy"].append(mle)
        s["degree"].append(deg)
        if done:
            traj.termination = done
            return traj
        h = min(dt, cfg.t_max - state.t, next_snap - state.t)
        try:
            new = step(state, cfg, target, h, velocity=vel)
        except StepRejected as exc:
            log.warning("%s", exc)
            if traj.snapshots[-1] is not state:
                traj.snapshots.append(state)
            traj.termination = "step_rejected_floor"
            return traj
        if cfg.dt_policy == "adaptive":
            dt = min(cfg.dt_cap, new.last_dt * 1.5) if new.last_dt >= h else new.last_dt
        elif new.last_dt < h:
            dt = new.last_dt
        state = new
