"""Brute-force references for the spectral and projection code paths.

Nothing here calls the Fourier machinery of :mod:`spectral` except to read
a field's gradient where the oracle is a quadrature rule for it.  They are
slow by design and shipped with the library so ``plateauflow check`` can
run them after installation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import TWO_PI, BoundaryField, GridSamples, dirichlet_energy, grad_at


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def trapezoid(cls, size: int) -> QuadratureRule:
        """Periodic trapezoid rule on [0, 2 pi)."""
        return cls(TWO_PI * np.arange(size) / size, np.full(size, TWO_PI / size))

    @classmethod
    def gauss_legendre(cls, size: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
        x, w = np.polynomial.legendre.leggauss(size)
        return cls(0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w)

    def __call__(self, values) -> float:
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))


def poisson_kernel(r, alpha):
    return (1.0 - r * r) / (1.0 - 2.0 * r * np.cos(alpha) + r * r)


def poisson_eval(samples: GridSamples, r: float, phi) -> np.ndarray:
    """Harmonic extension at r e^{i phi} by trapezoid quadrature of the Poisson integral.

    Aliasing error is about r^(M - K) for data of band limit K on M points.
    """
    if not 0 <= r < 1:
        raise ValueError("Poisson oracle needs 0 <= r < 1")
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    rule = QuadratureRule.trapezoid(samples.grid_size)
    out = np.empty((phi.size, samples.n_components))
    for i, p in enumerate(phi):
        kernel = poisson_kernel(r, p - rule.nodes) * rule.weights / TWO_PI
        out[i] = kernel @ samples.values
    return out


def poisson_radial_derivative(samples: GridSamples, h: float, indices=None) -> np.ndarray:
    """One-sided difference (u - U(1-h)) / h at grid angles; O(h) accurate."""
    idx = np.arange(samples.grid_size) if indices is None else np.asarray(indices)
    inner = poisson_eval(samples, 1.0 - h, samples.angles[idx])
    return (samples.values[idx] - inner) / h


def dense_project(curve, q, samples: int = 100_000) -> np.ndarray:
    """Nearest curve point by exhaustive sampling and a bisection refinement."""
    if samples < 10_000:
        raise ValueError("dense projection oracle needs at least 10^4 samples")
    q = np.asarray(q, dtype=float)
    L = curve.length
    s = L * np.arange(samples) / samples
    pts = curve.point(s)
    i = int(np.argmin(np.sum((pts - q) ** 2, axis=1)))
    h = L / samples

    def slope(t):
        return float((curve.point(t) - q) @ curve.derivative(t, 1))

    a, b = s[i] - h, s[i] + h
    fa = slope(a)
    if fa * slope(b) > 0:
        return pts[i]
    for _ in range(60):
        m = 0.5 * (a + b)
        fm = slope(m)
        if fa * fm <= 0:
            b = m
        else:
            a, fa = m, fm
    return curve.point(0.5 * (a + b))


def fd_energy_derivative(state0, state1) -> float:
    """Forward difference (E(t1) - E(t0)) / (t1 - t0) between two flow states."""
    dt = state1.t - state0.t
    if dt <= 0:
        raise ValueError("states must be in increasing time order")
    return (dirichlet_energy(state1.field) - dirichlet_energy(state0.field)) / dt


# -- area quadrature ----------------------------------------------------------

def disc_energy_quadrature(u: BoundaryField, radial: int = 64, angular: int | None = None) -> float:
    """1/2 int_B |grad U|^2 by Gauss-Legendre in r and trapezoid in theta."""
    angular = angular or 4 * u.max_mode + 8
    rr = QuadratureRule.gauss_legendre(radial, 0.0, 1.0)
    th = QuadratureRule.trapezoid(angular)
    z = rr.nodes[:, None] * np.exp(1j * th.nodes)[None, :]
    gx, gy = grad_at(u, z)
    dens = np.sum(gx**2 + gy**2, axis=-1)
    return 0.5 * float(rr.weights @ (dens * rr.nodes[:, None]) @ th.weights)


def _ray_length(z0: complex, R: float, alpha):
    """Distance from z0 along direction alpha to the unit circle, capped at R."""
    e = np.exp(1j * alpha)
    b = np.real(np.conj(z0) * e)
    s = -b + np.sqrt(np.maximum(b * b + 1.0 - abs(z0) ** 2, 0.0))
    return np.minimum(s, R)


def clipped_polar_nodes(z0: complex, R: float, radial: int = 48, angular: int = 48):
    """Tensor Gauss-Legendre nodes (z, w) on B_R(z0) cap B in polar coordinates about z0.

    Angular panels are split where the circle |z - z0| = R crosses the unit
    circle, so the clipped radial extent is smooth on every panel.
    """
    z0 = complex(z0)
    d = abs(z0)
    breaks = [0.0, TWO_PI]
    if d > 0 and abs(1.0 - d) < R < 1.0 + d:
        beta = np.angle(z0)
        gam = np.arccos(np.clip((1.0 - d * d - R * R) / (2.0 * R * d), -1.0, 1.0))
        breaks += [np.mod(beta + gam, TWO_PI), np.mod(beta - gam, TWO_PI)]
    if d >= 1.0 - 1e-14:
        # boundary center: the ray length vanishes on the outward half-plane
        beta = np.angle(z0)
        breaks += [np.mod(beta + 0.5 * np.pi, TWO_PI), np.mod(beta - 0.5 * np.pi, TWO_PI)]
    breaks = np.unique(np.round(breaks, 15))
    xg, wg = np.polynomial.legendre.leggauss(angular)
    xr, wr = np.polynomial.legendre.leggauss(radial)
    zs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a < 1e-15:
            continue
        alpha = 0.5 * (b - a) * xg + 0.5 * (a + b)
        wa = 0.5 * (b - a) * wg
        smax = _ray_length(z0, R, alpha)
        s = 0.5 * smax[:, None] * (xr[None, :] + 1.0)
        wsr = 0.5 * smax[:, None] * wr[None, :]
        zs.append(z0 + s * np.exp(1j * alpha)[:, None])
        ws.append(wa[:, None] * wsr * s)
    return np.concatenate([z.ravel() for z in zs]), np.concatenate([w.ravel() for w in ws])


def local_energy_polar(u: BoundaryField, z0: complex, R: float, radial: int | None = None,
                       angular: int = 64) -> float:
    """int_{B_R(z0) cap B} |grad U|^2 by clipped polar tensor quadrature."""
    radial = radial or u.max_mode + 2
    z, w = clipped_polar_nodes(z0, R, radial, angular)
    inside = np.abs(z) <= 1.0
    z = np.where(inside, z, z / np.abs(z))
    gx, gy = grad_at(u, z)
    return float(w @ np.sum(gx**2 + gy**2, axis=-1))
