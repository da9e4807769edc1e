"""Closed target manifolds N in R^n with nearest-point projection.

Every target exposes the projection pi_N, the tangential projector dpi_N,
an orthonormal normal frame nu_1..nu_m and the truncated vector-valued signed
distance built from that frame.  All point arguments may be stacked: a
point array has shape (..., n).
"""

from __future__ import annotations

import abc
import csv
from pathlib import Path

import numpy as np
from scipy.interpolate import make_interp_spline

from .spectral import TWO_PI


class OutsideTubularNeighborhood(ValueError):
    """A point is farther than rho from N; the nearest-point projection is not defined."""


class NotOnManifold(ValueError):
    pass


class DegenerateCurve(ValueError):
    pass


def _smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    f = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    g = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return f / (f + g)


def cutoff(s, rho: float):
    """eta(s): identity for |s| < rho/2, zero for |s| >= 3 rho/4, smooth in between."""
    s = np.asarray(s, dtype=float)
    return s * (1.0 - _smoothstep((np.abs(s) - 0.5 * rho) / (0.25 * rho)))


class TargetManifold(abc.ABC):
    """Closed submanifold with a parallelized normal bundle."""

    ambient_dim: int
    codim: int
    tubular_radius: float
    on_manifold_tol: float = 1e-10

    @abc.abstractmethod
    def _closest(self, q: np.ndarray) -> tuple[np.ndarray, np.ndarray, object]:
        """Nearest points, distances and an opaque footpoint key (no range check)."""

    @abc.abstractmethod
    def _tangent_from_key(self, key, X: np.ndarray) -> np.ndarray:
        """Tangential part of X at the footpoints described by ``key``."""

    @abc.abstractmethod
    def _normals_from_key(self, key) -> np.ndarray:
        """Normal frame at the footpoints, shape (..., m, n)."""

    def _points(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape[-1] != self.ambient_dim:
            raise ValueError(f"points must have {self.ambient_dim} coordinates, got shape {q.shape}")
        return q

    def project(self, q) -> np.ndarray:
        """Nearest point on N; raises OutsideTubularNeighborhood beyond rho."""
        q = self._points(q)
        p, dist, _ = self._closest(q)
        worst = np.max(dist, initial=0.0)
        if not worst < self.tubular_radius:
            raise OutsideTubularNeighborhood(
                f"point at distance {worst:.3g} from N exceeds tubular radius {self.tubular_radius:.3g}")
        return p

    def distance(self, q) -> np.ndarray:
        """Euclidean distance to N (no range check)."""
        return self._closest(self._points(q))[1]

    def _key_on_manifold(self, p, check: bool):
        p = self._points(p)
        _, dist, key = self._closest(p)
        if check and np.max(dist, initial=0.0) > self.on_manifold_tol:
            raise NotOnManifold(f"point is {np.max(dist):.3g} away from N")
        return key

    def tangent_project(self, p, X, check: bool = True) -> np.ndarray:
        """dpi_N(p) X, the orthogonal projection of X onto T_pN."""
        key = self._key_on_manifold(p, check)
        return self._tangent_from_key(key, np.asarray(X, dtype=float))

    def normal_project(self, p, X, check: bool = True) -> np.ndarray:
        """sum_i nu_i <nu_i, X>, computed from the normal frame."""
        nu = self.normal_frame(p, check)
        X = np.asarray(X, dtype=float)
        return np.einsum("...in,...i->...n", nu, np.einsum("...in,...n->...i", nu, X))

    def normal_frame(self, p, check: bool = True) -> np.ndarray:
        key = self._key_on_manifold(p, check)
        return self._normals_from_key(key)

    def split(self, q, X):
        """Project q and decompose X there: returns (pi_N(q), dpi_N X, X - dpi_N X)."""
        q = self._points(q)
        p, dist, key = self._closest(q)
        worst = np.max(dist, initial=0.0)
        if not worst < self.tubular_radius:
            raise OutsideTubularNeighborhood(
                f"point at distance {worst:.3g} from N exceeds tubular radius {self.tubular_radius:.3g}")
        X = np.asarray(X, dtype=float)
        Xt = self._tangent_from_key(key, X)
        return p, Xt, X - Xt

    def raw_distance(self, q) -> np.ndarray:
        """h(q) = (nu_i(pi q) . (q - pi q))_i inside N_rho, zero outside; shape (..., m)."""
        q = self._points(q)
        p, dist, key = self._closest(q)
        nu = self._normals_from_key(key)
        h = np.einsum("...in,...n->...i", nu, q - p)
        return np.where((dist < self.tubular_radius)[..., None], h, 0.0)

    def signed_distance(self, q) -> np.ndarray:
        """Truncated signed distance dist_N(q) = (eta(h^1), ..., eta(h^m))."""
        return cutoff(self.raw_distance(q), self.tubular_radius)

    def distance_hessian(self, q, step: float = 1e-4) -> np.ndarray:
        """Hessians of the components of dist_N at q, shape (..., m, n, n).

        Central differences of ``signed_distance``; subclasses override with
        closed forms where available.
        """
        q = self._points(q)
        n = self.ambient_dim
        eye = np.eye(n) * step
        H = np.empty(q.shape[:-1] + (self.codim, n, n))
        f0 = self.signed_distance(q)
        for a in range(n):
            fp = self.signed_distance(q + eye[a])
            fm = self.signed_distance(q - eye[a])
            H[..., a, a] = (fp - 2 * f0 + fm) / step**2
            for b in range(a + 1, n):
                fpp = self.signed_distance(q + eye[a] + eye[b])
                fpm = self.signed_distance(q + eye[a] - eye[b])
                fmp = self.signed_distance(q - eye[a] + eye[b])
                fmm = self.signed_distance(q - eye[a] - eye[b])
                H[..., a, b] = H[..., b, a] = (fpp - fpm - fmp + fmm) / (4 * step**2)
        return H


class SphereTarget(TargetManifold):
    """Unit sphere S^{n-1} in R^n with tubular radius 1/2."""

    codim = 1

    def __init__(self, ambient_dim: int = 2, tubular_radius: float = 0.5):
        if ambient_dim < 2:
            raise ValueError("sphere target needs ambient dimension >= 2")
        if not 0 < tubular_radius < 1:
            raise ValueError("tubular radius of the unit sphere must lie in (0, 1)")
        self.ambient_dim = int(ambient_dim)
        self.tubular_radius = float(tubular_radius)

    def __repr__(self):
        return f"SphereTarget(ambient_dim={self.ambient_dim})"

    def _closest(self, q):
        r = np.linalg.norm(q, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        p = q / safe[..., None]
        p = np.where((r > 0)[..., None], p, np.eye(self.ambient_dim)[0])
        return p, np.abs(r - 1.0), p

    def _tangent_from_key(self, p, X):
        return X - np.sum(p * X, axis=-1, keepdims=True) * p

    def _normals_from_key(self, p):
        return p[..., None, :]

    def distance_hessian(self, q, step=None):
        q = self._points(q)
        r = np.linalg.norm(q, axis=-1)[..., None, None]
        qh = q[..., :, None] / r
        H = (np.eye(self.ambient_dim) - qh * np.swapaxes(qh, -1, -2)) / r
        inside = (np.abs(r - 1.0) < 0.5 * self.tubular_radius)
        return np.where(inside, H, np.nan)[..., None, :, :]


class CurveTarget(TargetManifold):
    """Closed embedded curve in R^2 or R^3, parametrized by arc length.

    The curve is stored as a trigonometric series in theta = 2 pi s / L,
    together with a lookup table of (s, gamma, gamma') used to seed the
    Newton projection.  For space curves the normal frame is a
    rotation-minimizing frame with its holonomy spread as uniform twist.
    """

    codim = 1

    def __init__(self, coeffs: np.ndarray, length: float, tubular_radius: float,
                 frame_coeffs: np.ndarray | None = None, table_size: int = 1024):
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.ambient_dim = self.coeffs.shape[0]
        if self.ambient_dim not in (2, 3):
            raise ValueError("curve targets live in R^2 or R^3")
        self.codim = self.ambient_dim - 1
        self.length = float(length)
        self.tubular_radius = float(tubular_radius)
        self.frame_coeffs = None if frame_coeffs is None else np.asarray(frame_coeffs, dtype=complex)
        self._j = np.arange(-(self.coeffs.shape[1] // 2), self.coeffs.shape[1] // 2 + 1)
        seed = max(int(table_size), int(np.ceil(8.0 * self.length / self.tubular_radius)))
        self.table_s = self.length * np.arange(seed) / seed
        self.table_points = self.point(self.table_s)
        self.table_tangents = self.tangent(self.table_s)

    def __repr__(self):
        return (f"CurveTarget(ambient_dim={self.ambient_dim}, length={self.length:.6g}, "
                f"rho={self.tubular_radius:.4g})")

    # -- series evaluation
    def _series(self, coeffs, s, order=0, chunk: int = 8192):
        j = np.arange(-(coeffs.shape[1] // 2), coeffs.shape[1] // 2 + 1)
        w = TWO_PI / self.length
        s = np.asarray(s, dtype=float)
        flat = s.reshape(-1)
        cT = (coeffs * (1j * w * j) ** order).T
        out = np.empty((flat.size, coeffs.shape[0]))
        for lo in range(0, flat.size, chunk):
            E = np.exp(1j * w * flat[lo:lo + chunk, None] * j)
            out[lo:lo + chunk] = np.real(E @ cT)
        return out.reshape(s.shape + (coeffs.shape[0],))

    def point(self, s):
        return self._series(self.coeffs, s, 0)

    def derivative(self, s, order=1):
        return self._series(self.coeffs, s, order)

    def tangent(self, s):
        d = self.derivative(s, 1)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def frame_at(self, s) -> np.ndarray:
        """Normal frame along the curve at arc length s, shape (..., m, n)."""
        T = self.tangent(s)
        if self.ambient_dim == 2:
            return np.stack([T[..., 1], -T[..., 0]], axis=-1)[..., None, :]
        v = self._series(self.frame_coeffs, s, 0)
        v = v - np.sum(v * T, axis=-1, keepdims=True) * T
        v /= np.linalg.norm(v, axis=-1, keepdims=True)
        return np.stack([v, np.cross(T, v)], axis=-2)

    # -- projection
    def parameter_of(self, q, iterations: int = 30) -> np.ndarray:
        """Arc-length parameter of the nearest point: dense seed, then Newton."""
        q = self._points(q)
        flat = q.reshape(-1, self.ambient_dim)
        d2 = (np.sum(flat**2, axis=1)[:, None] - 2.0 * flat @ self.table_points.T
              + np.sum(self.table_points**2, axis=1)[None, :])
        idx = np.argmin(d2, axis=1)
        s = self.table_s[idx].copy()
        h = self.length / self.table_s.size
        lo, hi = s - 1.5 * h, s + 1.5 * h
        for _ in range(iterations):
            g0 = self.point(s) - flat
            g1 = self.derivative(s, 1)
            g2 = self.derivative(s, 2)
            f = np.sum(g0 * g1, axis=1)
            fp = np.sum(g1 * g1, axis=1) + np.sum(g0 * g2, axis=1)
            step = f / np.where(fp > 0, fp, 1.0)
            s_new = np.clip(s - step, lo, hi)
            done = np.max(np.abs(s_new - s), initial=0.0) < 1e-15 * self.length
            s = s_new
            if done:
                break
        return np.mod(s, self.length).reshape(q.shape[:-1])

    def _closest(self, q):
        s = self.parameter_of(q)
        p = self.point(s)
        return p, np.linalg.norm(q - p, axis=-1), s

    def _tangent_from_key(self, s, X):
        T = self.tangent(s)
        return np.sum(T * X, axis=-1, keepdims=True) * T

    def _normals_from_key(self, s):
        return self.frame_at(s)


# -- curve construction -------------------------------------------------------

def _fourier_table(values: np.ndarray) -> np.ndarray:
    """Two-sided Fourier coefficients (n, 2J+1) of equispaced periodic samples (N, n)."""
    N = values.shape[0]
    J = (N - 1) // 2
    c = np.fft.fft(values, axis=0) / N
    out = np.zeros((values.shape[1], 2 * J + 1), dtype=complex)
    out[:, J:] = c[:J + 1].T
    out[:, :J] = c[N - J:].T
    return out


def _trim(coeffs: np.ndarray, rel: float = 1e-15) -> np.ndarray:
    J = coeffs.shape[1] // 2
    mag = np.max(np.abs(coeffs), axis=0)
    big = np.nonzero(mag > rel * np.max(mag))[0]
    keep = max(1, int(np.max(np.abs(big - J))))
    return coeffs[:, J - keep:J + keep + 1]


def _interpolant(points: np.ndarray, interpolation: str):
    """Periodic interpolant through the control points: (position, velocity, period)."""
    N = points.shape[0]
    if interpolation == "trigonometric":
        c = np.fft.fft(points, axis=0) / N
        k = np.fft.fftfreq(N, 1.0 / N)
        if N % 2 == 0:
            # split the Nyquist mode symmetrically so the interpolant is real
            c = np.concatenate([c, 0.5 * c[N // 2:N // 2 + 1]])
            c[N // 2] *= 0.5
            k = np.concatenate([k, [N // 2]])

        def series(t, order):
            t = np.asarray(t, dtype=float)
            flat = t.ravel()
            ck = c * ((1j * k) ** order)[:, None]
            out = np.empty((flat.size, c.shape[1]))
            for lo in range(0, flat.size, 2048):
                out[lo:lo + 2048] = np.real(np.exp(1j * flat[lo:lo + 2048, None] * k) @ ck)
            return out.reshape(t.shape + (c.shape[1],))

        def pos(t):
            return series(t, 0)

        def vel(t):
            return series(t, 1)

        return pos, vel, TWO_PI
    if interpolation == "spline":
        closed = np.vstack([points, points[:1]])
        t = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(closed, axis=0), axis=1))])
        # quintic keeps four continuous derivatives, so the arc-length
        # Fourier series converges fast enough for |gamma'| = 1 to 1e-8
        spline = make_interp_spline(t, closed, k=5, bc_type="periodic")
        period = t[-1]
        return (lambda s: spline(np.mod(s, period))), (lambda s: spline(np.mod(s, period), 1)), period
    raise ValueError(f"unknown interpolation {interpolation!r}")


def _arclength_resample(pos, vel, period: float, size: int, panels: int):
    """Points equispaced in arc length along a periodic parametrized curve."""
    x, w = np.polynomial.legendre.leggauss(10)
    edges = np.linspace(0.0, period, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    nodes = 0.5 * (edges[1:] + edges[:-1])[:, None] + half * x
    speed = np.linalg.norm(vel(nodes), axis=-1)
    if np.min(speed) <= 1e-12 * np.max(speed):
        raise DegenerateCurve("interpolating curve has vanishing speed")
    cum = np.concatenate([[0.0], np.cumsum(half * speed @ w)])
    L = cum[-1]
    targets = L * np.arange(size) / size
    j = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, panels - 1)
    a = edges[j]
    t = a + (targets - cum[j]) / (cum[j + 1] - cum[j]) * (edges[j + 1] - a)
    for _ in range(8):
        hh = 0.5 * (t - a)
        mid = 0.5 * (t + a)
        partial = hh * (np.linalg.norm(vel(mid[:, None] + hh[:, None] * x), axis=-1) @ w)
        t = t - (cum[j] + partial - targets) / np.linalg.norm(vel(t), axis=-1)
    return pos(t), L


def _rotation_minimizing_normals(points: np.ndarray, tangents: np.ndarray) -> np.ndarray:
    """Double-reflection transport of a normal vector around a closed polyline."""
    N = points.shape[0]
    T0 = tangents[0]
    e = np.eye(3)[np.argmin(np.abs(T0))]
    r = e - (e @ T0) * T0
    r /= np.linalg.norm(r)
    out = np.empty((N + 1, 3))
    out[0] = r
    for i in range(N):
        i1 = (i + 1) % N
        v1 = points[i1] - points[i]
        c1 = v1 @ v1
        rL = r - (2.0 / c1) * (v1 @ r) * v1
        tL = tangents[i] - (2.0 / c1) * (v1 @ tangents[i]) * v1
        v2 = tangents[i1] - tL
        c2 = v2 @ v2
        r = rL - (2.0 / c2) * (v2 @ rL) * v2 if c2 > 0 else rL
        out[i + 1] = r
    return out


def build_curve(control_points, interpolation: str = "trigonometric", table_size: int = 2048,
                rho: float | None = None, check_size: int = 4096) -> CurveTarget:
    """Closed arc-length parametrized curve through ordered control points.

    ``interpolation`` is "trigonometric" (spectral, exact for circles and
    ellipses sampled uniformly in angle) or "spline" (periodic quintic on the
    chord-length parameter, for unevenly spaced data).  ``rho`` defaults to
    min(0.9 / max curvature, 0.45 * min distance between non-adjacent points).
    """
    P = np.asarray(control_points, dtype=float)
    if P.ndim != 2 or P.shape[1] not in (2, 3):
        raise ValueError("control points must be an (N, 2) or (N, 3) array")
    if P.shape[0] < 4:
        raise DegenerateCurve("need at least 4 control points")
    gaps = np.linalg.norm(np.roll(P, -1, axis=0) - P, axis=1)
    if np.min(gaps) <= 1e-12 * np.max(gaps):
        raise DegenerateCurve("consecutive control points coincide")
    sv = np.linalg.svd(P - P.mean(axis=0), compute_uv=False)
    if sv[1] <= 1e-10 * sv[0]:
        raise DegenerateCurve("control points are collinear")

    pos, vel, period = _interpolant(P, interpolation)
    samples, L = _arclength_resample(pos, vel, period, table_size, panels=4 * table_size)
    coeffs = _trim(_fourier_table(samples))

    probe = CurveTarget(coeffs, L, tubular_radius=1.0, table_size=16)
    s = L * np.arange(check_size) / check_size
    speed = np.linalg.norm(probe.derivative(s, 1), axis=1)
    if np.max(np.abs(speed - 1.0)) > 1e-8:
        raise DegenerateCurve(
            f"arc-length reparametrization off by {np.max(np.abs(speed - 1.0)):.2e}; "
            "raise table_size or use smoother control points")
    kappa = np.max(np.linalg.norm(probe.derivative(s, 2), axis=1))

    # self-distance over pairs separated by at least pi / (3 kappa) in arc length
    coarse = min(check_size, 1024)
    sc = L * np.arange(coarse) / coarse
    X = probe.point(sc)
    D = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1)
    sep = np.abs(sc[:, None] - sc[None, :])
    sep = np.minimum(sep, L - sep)
    gap = min(0.5 * L, np.pi / (3.0 * kappa))
    far = sep >= gap
    self_distance = float(np.min(D[far])) if np.any(far) else np.inf
    if self_distance <= 1e-6 * L:
        raise DegenerateCurve("curve is self-intersecting")
    estimate = min(0.9 / kappa, 0.45 * self_distance)
    if rho is None:
        rho = estimate
    elif not 0 < rho < 0.5 * self_distance:
        raise ValueError(f"tubular radius {rho} is incompatible with self-distance {self_distance:.4g}")

    frame = None
    if P.shape[1] == 3:
        frame = _closed_frame(probe, table_size)
    return CurveTarget(coeffs, L, tubular_radius=float(rho), frame_coeffs=frame)


def _closed_frame(curve: CurveTarget, size: int) -> np.ndarray:
    s = curve.length * np.arange(size) / size
    pts = curve.point(s)
    T = curve.tangent(s)
    r = _rotation_minimizing_normals(pts, T)
    end, start = r[-1], r[0]
    if abs(end @ T[0]) > 1e-6:
        raise DegenerateCurve("rotation-minimizing frame failed to return to the normal plane")
    holonomy = np.arctan2(np.cross(start, end) @ T[0], start @ end)
    r = r[:-1]
    b = np.cross(T, r)
    angle = -holonomy * s / curve.length
    nu = np.cos(angle)[:, None] * r + np.sin(angle)[:, None] * b
    coeffs = _trim(_fourier_table(nu), 1e-13)
    fitted = CurveTarget(curve.coeffs, curve.length, 1.0, frame_coeffs=coeffs, table_size=16).frame_at(s)[:, 0]
    if np.max(np.abs(fitted - nu)) > 1e-8:
        raise DegenerateCurve("twist-corrected frame does not close smoothly")
    return coeffs


def load_curve_csv(path) -> np.ndarray:
    """Control points from CSV: one point per row, optional '#' header lines."""
    rows = []
    with open(Path(path), newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            rows.append([float(x) for x in rec])
    if not rows:
        raise ValueError(f"no control points in {path}")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"inconsistent column count in {path}")
    return np.array(rows)
