"""Runtime checks of the flow's identities, and blow-up analysis.

Includes the stationarity residual, the Pythagorean split of d_r u, the
distance-Laplacian identity, the Hopf differential, concentration
detection on a boundary lattice and bubble extraction by a disc Mobius
chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .flow import FlowConfig, FlowState, Trajectory, residual_norm, rhs_regularized
from .spectral import TWO_PI, BoundaryField, MobiusParams
from .targets import TargetManifold, _smoothstep


class StaleEvent(ValueError):
    """The local energy at an event's center has dropped below the threshold."""


@dataclass(frozen=True)
class ConcentrationEvent:
    center: complex
    radius: float
    local_energy: float
    t: float
    threshold: float

    def __post_init__(self):
        if self.local_energy < self.threshold:
            raise ValueError("event local energy below threshold")


@dataclass(frozen=True)
class BubbleExtract:
    field: BoundaryField
    center: complex
    scale: float
    energy: float
    residual: float
    conformality_defect: float


def residual(u: BoundaryField, target: TargetManifold, grid_size: int | None = None) -> float:
    return residual_norm(u, target, grid_size)


def _trace_grid(u: BoundaryField, grid_size: int | None):
    M = grid_size or spectral.default_grid(u.max_mode, 1.5)
    return spectral.synthesize(u, M), spectral.synthesize(spectral.dtn(u), M), M


def pythagoras_check(u: BoundaryField, target: TargetManifold, grid_size: int | None = None) -> float:
    """max | |u_r|^2 - |dpi u_r|^2 - |dpi^perp u_r|^2 | over the grid.

    The tangential part comes from ``tangent_project`` and the normal part
    from the normal frame, so the check also exercises their consistency.
    """
    vals, ur, _ = _trace_grid(u, grid_size)
    p = target.project(vals)
    tan = target.tangent_project(p, ur, check=False)
    nor = target.normal_project(p, ur, check=False)
    defect = np.sum(ur * ur, axis=1) - np.sum(tan * tan, axis=1) - np.sum(nor * nor, axis=1)
    return float(np.max(np.abs(defect)))


def trace_identity_defect(u: BoundaryField, grid_size: int | None = None) -> float:
    """Relative gap between ||u_phi|| and ||u_r|| in L2(S^1), by grid quadrature."""
    M = grid_size or 2 * u.max_mode + 2
    a = spectral.synthesize(spectral.angular_derivative(u), M)
    b = spectral.synthesize(spectral.dtn(u), M)
    na, nb = np.sqrt(np.sum(a * a)), np.sqrt(np.sum(b * b))
    if nb == 0:
        return float(na)
    return float(abs(na - nb) / nb)


def radial_l2_profile(u: BoundaryField, radii) -> np.ndarray:
    """r -> int_{|z| = r} |U|^2 ds for the harmonic extension."""
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    k = np.abs(spectral.modes(u.max_mode))
    power = np.sum(np.abs(u.coeffs) ** 2, axis=0)
    return np.array([TWO_PI * r * np.sum(power * r ** (2 * k)) for r in radii])


# -- distance Laplacian -------------------------------------------------------

def fd_laplacian(f, z, h: float):
    """Five-point Laplacian of f at complex points z."""
    return (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4.0 * f(z)) / (h * h)


def dist_laplace_terms(u: BoundaryField, target: TargetManifold, points, h: float | None = None):
    """Finite-difference Laplacian of dist_N(U) and grad U . d nu(U) grad U at points.

    Returns (lhs, rhs, valid) with lhs, rhs of shape (P, m).  Points where the
    extension (or any stencil point) leaves N_{rho/2} are marked invalid.
    """
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    if h is None:
        h = np.minimum(0.01, (1.0 - np.abs(z)) / 4.0)
    h = np.broadcast_to(np.asarray(h, dtype=float), z.shape)

    def dist_of(w):
        U = spectral.holomorphic_value(u, w).real
        return target.signed_distance(U), target.distance(U)

    valid = np.ones(z.shape, dtype=bool)
    lhs = np.zeros(z.shape + (target.codim,))
    center, dc = dist_of(z)
    acc = -4.0 * center
    valid &= dc < 0.5 * target.tubular_radius
    for off in (1, -1, 1j, -1j):
        v, dv = dist_of(z + off * h)
        acc = acc + v
        valid &= dv < 0.5 * target.tubular_radius
    lhs = acc / (h * h)[:, None]

    gx, gy = spectral.grad_at(u, z)
    U = spectral.holomorphic_value(u, z).real
    H = target.distance_hessian(U)
    rhs = (np.einsum("pn,pinm,pm->pi", gx, H, gx) + np.einsum("pn,pinm,pm->pi", gy, H, gy))
    valid &= np.all(np.isfinite(rhs), axis=1)
    return lhs, rhs, valid


def dist_laplace_check(u: BoundaryField, target: TargetManifold, points, h: float | None = None) -> float:
    """Max |FD Laplacian of dist_N(U) - grad U . d nu(U) grad U| over the valid points."""
    lhs, rhs, valid = dist_laplace_terms(u, target, points, h)
    if not np.any(valid):
        return math.nan
    return float(np.max(np.abs(lhs - rhs)[valid]))


# -- Hopf differential --------------------------------------------------------

def hopf_differential(u: BoundaryField, points) -> np.ndarray:
    """f = |U_x|^2 - |U_y|^2 - 2i U_x . U_y at complex points in the disc."""
    gx, gy = spectral.grad_at(u, np.asarray(points, dtype=complex))
    return np.sum(gx * gx, axis=-1) - np.sum(gy * gy, axis=-1) - 2j * np.sum(gx * gy, axis=-1)


def interior_lattice(rings: int = 9, per_ring: int = 32) -> np.ndarray:
    r = np.arange(1, rings + 1) / (rings + 1)
    a = TWO_PI * np.arange(per_ring) / per_ring
    return np.concatenate([[0.0], (r[:, None] * np.exp(1j * a)[None, :]).ravel()])


def conformality_defect(u: BoundaryField, lattice=None) -> float:
    """max |f| over an interior lattice (radii 0.1..0.9)."""
    pts = interior_lattice() if lattice is None else lattice
    return float(np.max(np.abs(hopf_differential(u, pts))))


def cauchy_riemann_defect(u: BoundaryField, h: float, lattice=None) -> float:
    """max |(d_x + i d_y) f| / 2 by central differences; O(h^2) for holomorphic f."""
    pts = interior_lattice(5, 16) * 0.8 if lattice is None else np.asarray(lattice)
    fx = (hopf_differential(u, pts + h) - hopf_differential(u, pts - h)) / (2 * h)
    fy = (hopf_differential(u, pts + 1j * h) - hopf_differential(u, pts - 1j * h)) / (2 * h)
    return float(np.max(np.abs(0.5 * (fx + 1j * fy))))


# -- concentration ------------------------------------------------------------

def boundary_lattice(spacing: float) -> np.ndarray:
    """Points on the unit circle no farther apart than ``spacing``."""
    count = max(8, int(math.ceil(TWO_PI / spacing)))
    count = 8 * int(math.ceil(count / 8))
    return np.exp(1j * TWO_PI * np.arange(count) / count)


def _refine_center(u: BoundaryField, center: complex, radius: float) -> complex:
    """Move a boundary center to the peak of |u_phi|^2 within the firing radius."""
    if abs(center) < 1.0 - 1e-12:
        return center
    M = spectral.default_grid(u.max_mode, 4.0)
    dens = np.sum(spectral.synthesize(spectral.angular_derivative(u), M) ** 2, axis=1)
    ang = spectral.grid_angles(M)
    near = np.abs(np.exp(1j * ang) - center) <= radius
    if not np.any(near):
        return center
    i = np.flatnonzero(near)[np.argmax(dens[near])]
    return complex(np.exp(1j * ang[i]))


def detect_concentration(snapshots, delta_conc: float, radius_ladder, lattice=None) -> list[ConcentrationEvent]:
    """Scan local energy over a lattice at every snapshot.

    A center fires when the local energy in a disc of the smallest ladder
    radius is at least ``delta_conc``.  Firing centers within one radius of a
    stronger one are merged; surviving boundary centers are moved to the
    peak of the boundary energy density.
    """
    if not delta_conc > 0:
        raise ValueError("delta_conc must be positive")
    R = float(min(radius_ladder))
    pts = boundary_lattice(R) if lattice is None else np.asarray(lattice, dtype=complex)
    events: list[ConcentrationEvent] = []
    for snap in snapshots:
        t, u = (snap.t, snap.field) if isinstance(snap, FlowState) else snap
        if spectral.dirichlet_energy(u) < 0.5 * delta_conc:
            continue
        values = spectral.local_energies(u, pts, R)
        order = np.argsort(-values, kind="stable")
        kept: list[complex] = []
        for i in order:
            if values[i] < delta_conc:
                break
            if any(abs(pts[i] - c) <= R for c in kept):
                continue
            kept.append(pts[i])
            c = _refine_center(u, complex(pts[i]), R)
            e = spectral.local_energy(u, c, R)
            if e < delta_conc:
                c, e = complex(pts[i]), float(values[i])
            events.append(ConcentrationEvent(c, R, float(e), float(t), float(delta_conc)))
    return events


def scan_state(state: FlowState, cfg: FlowConfig):
    """Max local energy over the boundary lattice at the smallest ladder radius, and events."""
    R = min(cfg.radius_ladder)
    u = state.field
    pts = boundary_lattice(R)
    mle = float(np.max(spectral.local_energies(u, pts, R)))
    events = []
    if cfg.delta_conc is not None and mle >= cfg.delta_conc:
        events = detect_concentration([state], cfg.delta_conc, cfg.radius_ladder, pts)
    return mle, events


def extract_bubble(state, event: ConcentrationEvent, target: TargetManifold | None = None,
                   out_mode: int = 128, min_scale: float = 1e-7) -> BubbleExtract:
    """Rescale the field about a concentration point with a disc Mobius chart.

    The scale r is the smallest dyadic refinement of the event radius whose
    disc still holds ``event.threshold`` energy.  The chart maps 0 to the
    point at depth r below the center, so the rescaled field sees the
    concentration region at unit scale.  The gauge rotation puts the
    maximum of |w_phi| at angle 0.
    """
    u = state.field if isinstance(state, FlowState) else state
    z0 = complex(event.center)
    delta = event.threshold
    if spectral.local_energy(u, z0, event.radius) < delta:
        raise StaleEvent(f"local energy at {z0:.4f} no longer reaches {delta:g}")
    r = event.radius
    while r > min_scale and spectral.local_energy(u, z0, 0.5 * r) >= delta:
        r *= 0.5
    d = abs(z0)
    b = z0 if d <= 1.0 - r else (1.0 - r) * z0 / d
    chart = MobiusParams(-b)
    w = spectral.compose_with_mobius(u, chart, out_mode)
    M = spectral.default_grid(out_mode, 4.0)
    dens = np.sum(spectral.synthesize(spectral.angular_derivative(w), M) ** 2, axis=1)
    w = spectral.rotate(w, spectral.grid_angles(M)[int(np.argmax(dens))])
    res = residual_norm(w, target) if target is not None else math.nan
    return BubbleExtract(w, z0, r, spectral.dirichlet_energy(w), res, conformality_defect(w))


# -- energy bookkeeping -------------------------------------------------------

@dataclass
class DissipationReport:
    delta_E: np.ndarray
    predicted: np.ndarray
    balance_defect: float
    global_lhs: float
    global_rhs: float
    holds: bool
    localized: list


def cutoff_weight(z, z0: complex, R: float):
    """phi((z - z0)/R)^2 with phi = 1 on the half-radius disc, 0 outside the unit disc."""
    s = np.abs(np.asarray(z) - z0) / R
    phi = 1.0 - _smoothstep((s - 0.5) / 0.5)
    return phi * phi


def localized_energy(u: BoundaryField, z0: complex, R: float, radial: int | None = None,
                     angular: int = 64) -> float:
    """int_B |grad U|^2 phi_{z0,R}^2 dz."""
    from .oracles import clipped_polar_nodes

    z, w = clipped_polar_nodes(z0, R, radial or u.max_mode + 2, angular)
    z = np.where(np.abs(z) <= 1.0, z, z / np.abs(z))
    gx, gy = spectral.grad_at(u, z)
    return float(w @ (np.sum(gx**2 + gy**2, axis=-1) * cutoff_weight(z, z0, R)))


def dissipation_report(traj: Trajectory, tol: float | None = None, target: TargetManifold | None = None,
                       cfg: FlowConfig | None = None, localized=()) -> DissipationReport:
    """Per-step and global energy balance of a trajectory.

    ``localized`` is a sequence of (z0, R, eps); for each, consecutive
    snapshot pairs with t1 - t0 <= eps R are checked against the localized
    energy inequality and the constant C it would require is reported.
    """
    t = traj.column("t")
    if t.size < 2:
        raise ValueError("need at least two recorded steps")
    E = traj.column("E")
    diss = traj.column("dissipation")
    dts = np.diff(t)
    dE = np.diff(E)
    predicted = -dts * diss[:-1]
    dissipated = float(np.sum(-predicted))
    defect = float(abs(E[-1] - E[0] + dissipated))
    if tol is None:
        tol = float(np.max(dts, initial=0.0)) * max(E[0], 1.0)
    lhs = float(E[-1] + dissipated)
    rhs = float(E[0] + tol)
    out = []
    if localized:
        if target is None:
            raise ValueError("localized report needs the target")
        eps_flow = cfg.epsilon if cfg is not None else 0.0
        grid = cfg.grid if cfg is not None else None
        E0 = E[0]
        snaps = traj.snapshots
        for z0, R, eps in localized:
            worst = 0.0
            for s0, s1 in zip(snaps[:-1], snaps[1:]):
                if s1.t - s0.t > eps * R + 1e-12:
                    continue
                a0 = localized_energy(s0.field, z0, R)
                a1 = localized_energy(s1.field, z0, R)
                M = grid or spectral.default_grid(s0.field.max_mode, 1.5)
                ang = spectral.grid_angles(M)
                wgt = cutoff_weight(np.exp(1j * ang), z0, R)
                flux = []
                for s in (s0, s1):
                    v = spectral.synthesize(rhs_regularized(s.field, target, eps_flow, M), M)
                    flux.append(TWO_PI / M * float(np.sum(np.sum(v * v, axis=1) * wgt)))
                boundary = 0.5 * (s1.t - s0.t) * (flux[0] + flux[1])
                excess = a1 + 4.0 * boundary - 4.0 * a0
                if E0 > 0:
                    worst = max(worst, excess / (eps * E0))
            out.append({"z0": complex(z0), "R": float(R), "eps": float(eps), "C_required": float(worst)})
    return DissipationReport(dE, predicted, defect, lhs, rhs, lhs <= rhs, out)
