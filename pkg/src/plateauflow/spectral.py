"""Band-limited fields on the unit circle and their harmonic extensions.

A field u: S^1 -> R^n is stored as a two-sided complex Fourier table
``coeffs[j, k + K]`` for component j and mode k = -K..K.  The harmonic
extension to the unit disc is U(r e^{i phi}) = sum_k c_k r^|k| e^{ik phi},
which for real data equals Re F(z) with the holomorphic polynomial
F(z) = c_0 + 2 sum_{k>0} c_k z^k.  Most disc quantities below are computed
from F.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

# relative tolerance for accepting slightly non-Hermitian input
_REALITY_TOL = 1e-9


class GridTooSmall(ValueError):
    pass


def modes(max_mode: int) -> np.ndarray:
    return np.arange(-max_mode, max_mode + 1)


def grid_angles(grid_size: int) -> np.ndarray:
    return TWO_PI * np.arange(grid_size) / grid_size


@dataclass(frozen=True, eq=False)
class BoundaryField:
    """Real band-limited field on S^1, immutable.

    ``coeffs`` has shape (n_components, 2*max_mode + 1); column ``K + k``
    holds mode k.  Conjugate symmetry c[-k] = conj(c[k]) is enforced on
    construction (small violations are symmetrized, large ones rejected).
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex, copy=True)
        if c.ndim == 1:
            c = c[None, :]
        if c.ndim != 2 or c.shape[1] % 2 != 1:
            raise ValueError(f"coefficient table must have shape (n, 2K+1), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite Fourier coefficients")
        mirror = np.conj(c[:, ::-1])
        scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
        if np.max(np.abs(c - mirror), initial=0.0) > _REALITY_TOL * scale:
            raise ValueError("coefficients are not conjugate-symmetric (field is not real)")
        c = 0.5 * (c + mirror)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n_components(self) -> int:
        return self.coeffs.shape[0]

    @property
    def max_mode(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    def mode(self, k: int) -> np.ndarray:
        """Coefficient vector of mode k (zero beyond the band limit)."""
        K = self.max_mode
        if abs(k) > K:
            return np.zeros(self.n_components, dtype=complex)
        return self.coeffs[:, K + k]

    def positive(self) -> np.ndarray:
        """Modes 0..K as an array of shape (K+1, n)."""
        return self.coeffs[:, self.max_mode:].T

    def with_coeffs(self, coeffs) -> BoundaryField:
        return BoundaryField(coeffs)

    def resize(self, max_mode: int) -> BoundaryField:
        """Zero-pad or truncate to a new band limit."""
        K = self.max_mode
        out = np.zeros((self.n_components, 2 * max_mode + 1), dtype=complex)
        k = min(K, max_mode)
        out[:, max_mode - k:max_mode + k + 1] = self.coeffs[:, K - k:K + k + 1]
        return BoundaryField(out)

    def multiply_modes(self, symbol) -> BoundaryField:
        """Apply a Fourier multiplier given as an array over k = -K..K."""
        return BoundaryField(self.coeffs * np.asarray(symbol)[None, :])

    def __add__(self, other: BoundaryField) -> BoundaryField:
        K = max(self.max_mode, other.max_mode)
        return BoundaryField(self.resize(K).coeffs + other.resize(K).coeffs)

    def __sub__(self, other: BoundaryField) -> BoundaryField:
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> BoundaryField:
        return BoundaryField(float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self) -> BoundaryField:
        return BoundaryField(-self.coeffs)

    def __repr__(self):
        return f"BoundaryField(n_components={self.n_components}, max_mode={self.max_mode})"


@dataclass(frozen=True, eq=False)
class GridSamples:
    """Values of a field at the equispaced angles 2*pi*m/M, shape (M, n)."""

    values: np.ndarray
    angles: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValueError(f"grid samples must have shape (M, n), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid samples must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "angles", grid_angles(v.shape[0]))

    @property
    def grid_size(self) -> int:
        return self.values.shape[0]

    @property
    def n_components(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class MobiusParams:
    """Disc automorphism z -> e^{i theta} (z - a) / (1 - conj(a) z)."""

    a: complex = 0.0
    theta: float = 0.0

    def __post_init__(self):
        a = complex(self.a)
        if not abs(a) < 1.0:
            raise ValueError(f"Mobius parameter must satisfy |a| < 1, got |a| = {abs(a)}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "theta", float(self.theta))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.exp(1j * self.theta) * (z - self.a) / (1.0 - np.conj(self.a) * z)

    def inverse(self) -> MobiusParams:
        return MobiusParams(-self.a * np.exp(1j * self.theta), -self.theta)


# -- sampling -----------------------------------------------------------------

def analyze(samples: GridSamples | np.ndarray, max_mode: int) -> BoundaryField:
    """Fourier coefficients of grid data, truncated to ``max_mode``.

    Exact trigonometric interpolation when the data is band-limited to
    ``max_mode`` and M >= 2K+1.
    """
    values = samples.values if isinstance(samples, GridSamples) else np.atleast_2d(np.asarray(samples, dtype=float).T).T
    M = values.shape[0]
    K = int(max_mode)
    if M < 2 * K + 1:
        raise GridTooSmall(f"grid of {M} points cannot resolve max_mode {K} (need M >= {2 * K + 1})")
    half = np.fft.rfft(values, axis=0)[:K + 1] / M
    c = np.empty((values.shape[1], 2 * K + 1), dtype=complex)
    c[:, K:] = half.T
    c[:, :K] = np.conj(half[:0:-1].T)
    c[:, K] = c[:, K].real
    return BoundaryField(c)


def synthesize(u: BoundaryField, grid_size: int) -> np.ndarray:
    """Values of ``u`` on the M-point grid, shape (M, n)."""
    M = int(grid_size)
    K = u.max_mode
    if M < 2 * K + 1:
        raise GridTooSmall(f"grid of {M} points cannot represent max_mode {K} (need M >= {2 * K + 1})")
    half = np.zeros((M // 2 + 1, u.n_components), dtype=complex)
    half[:K + 1] = u.positive() * M
    return np.fft.irfft(half, n=M, axis=0)


def sample(u: BoundaryField, grid_size: int) -> GridSamples:
    return GridSamples(synthesize(u, grid_size))


def default_grid(max_mode: int, factor: float = 1.0) -> int:
    """Power-of-two grid size with at least ``factor * (2K+1)`` points."""
    need = max(2 * max_mode + 1, int(np.ceil(factor * (2 * max_mode + 1))))
    return 1 << int(np.ceil(np.log2(need)))


# -- Fourier multipliers ------------------------------------------------------

def dtn(u: BoundaryField) -> BoundaryField:
    """Dirichlet-to-Neumann map: radial derivative of the harmonic extension on S^1."""
    return u.multiply_modes(np.abs(modes(u.max_mode)))


def quarter_laplacian(u: BoundaryField) -> BoundaryField:
    return u.multiply_modes(np.sqrt(np.abs(modes(u.max_mode))))


def angular_derivative(u: BoundaryField) -> BoundaryField:
    return u.multiply_modes(1j * modes(u.max_mode))


def galerkin_truncate(u: BoundaryField, cutoff: int) -> BoundaryField:
    """Keep modes |k| <= cutoff (the Steklov eigenfunctions of eigenvalue <= cutoff)."""
    if cutoff < 0:
        raise ValueError("mode cutoff must be nonnegative")
    return u.multiply_modes(np.abs(modes(u.max_mode)) <= cutoff)


def rotate(u: BoundaryField, angle: float) -> BoundaryField:
    """The field phi -> u(phi + angle)."""
    return u.multiply_modes(np.exp(1j * modes(u.max_mode) * angle))


# -- norms and energies -------------------------------------------------------

def l2_inner(u: BoundaryField, v: BoundaryField) -> float:
    K = max(u.max_mode, v.max_mode)
    a, b = u.resize(K).coeffs, v.resize(K).coeffs
    return float(TWO_PI * np.sum(np.real(np.conj(a) * b)))


def l2_norm(u: BoundaryField) -> float:
    return float(np.sqrt(TWO_PI * np.sum(np.abs(u.coeffs) ** 2)))


def dirichlet_energy(u: BoundaryField) -> float:
    """E(u) = 1/2 int_{S^1} u . d_r u dphi, evaluated by Parseval."""
    return 0.5 * l2_inner(u, dtn(u))


def half_energy(u: BoundaryField) -> float:
    """1/2 ||(-Delta)^{1/4} u||^2, integrated on a grid by the trapezoid rule."""
    q = quarter_laplacian(u)
    M = 2 * u.max_mode + 2
    vals = synthesize(q, M)
    return float(0.5 * TWO_PI / M * np.sum(vals * vals))


# -- harmonic extension -------------------------------------------------------

def _holomorphic(u: BoundaryField) -> np.ndarray:
    """Taylor coefficients of F with U = Re F, shape (K+1, n)."""
    a = 2.0 * u.positive()
    a[0] *= 0.5
    return a


def _horner(coeffs: np.ndarray, z: np.ndarray, block: int = 64, chunk: int = 8192) -> np.ndarray:
    """Evaluate sum_k coeffs[k] z^k for every z; returns shape z.shape + (n,).

    Coefficients are grouped in blocks of ``block`` powers: each block is a
    matrix product against the table z^0..z^(block-1), and the blocks are
    combined by Horner's rule in z^block.
    """
    z = np.asarray(z, dtype=complex)
    flat = z.reshape(-1)
    deg, n = coeffs.shape
    B = min(block, deg)
    nb = -(-deg // B)
    padded = np.zeros((nb * B, n), dtype=complex)
    padded[:deg] = coeffs
    C = padded.reshape(nb, B, n).transpose(1, 0, 2).reshape(B, nb * n)
    out = np.empty((flat.size, n), dtype=complex)
    for lo in range(0, flat.size, chunk):
        zc = flat[lo:lo + chunk]
        powers = np.ones((zc.size, B), dtype=complex)
        for j in range(1, B):
            powers[:, j] = powers[:, j - 1] * zc
        T = (powers @ C).reshape(zc.size, nb, n)
        w = (powers[:, -1] * zc)[:, None]
        acc = T[:, -1].copy()
        for i in range(nb - 2, -1, -1):
            acc *= w
            acc += T[:, i]
        out[lo:lo + chunk] = acc
    return out.reshape(z.shape + (n,))


def holomorphic_value(u: BoundaryField, z) -> np.ndarray:
    return _horner(_holomorphic(u), z)


def holomorphic_derivative(u: BoundaryField, z) -> np.ndarray:
    a = _holomorphic(u)
    if a.shape[0] == 1:
        z = np.asarray(z, dtype=complex)
        return np.zeros(z.shape + (a.shape[1],), dtype=complex)
    d = a[1:] * np.arange(1, a.shape[0])[:, None]
    return _horner(d, z)


def eval_extension(u: BoundaryField, r, phi) -> np.ndarray:
    """Harmonic extension U(r e^{i phi}); broadcasting over r and phi."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > 1):
        raise ValueError("radius must lie in [0, 1]")
    z = r * np.exp(1j * np.asarray(phi, dtype=float))
    return holomorphic_value(u, z).real


def eval_trace(u: BoundaryField, phi) -> np.ndarray:
    """u at arbitrary angles (non-uniform evaluation of the series)."""
    return eval_extension(u, 1.0, phi)


def grad_extension(u: BoundaryField, r, phi) -> tuple[np.ndarray, np.ndarray]:
    """Cartesian gradient (dU/dx, dU/dy) of the extension, each of shape (..., n)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > 1):
        raise ValueError("radius must lie in [0, 1]")
    z = r * np.exp(1j * np.asarray(phi, dtype=float))
    d = holomorphic_derivative(u, z)
    return d.real, -d.imag


def grad_at(u: BoundaryField, z) -> tuple[np.ndarray, np.ndarray]:
    """Gradient at complex points z in the closed disc."""
    d = holomorphic_derivative(u, z)
    return d.real, -d.imag


# -- local energy -------------------------------------------------------------

def _gl_panels(a: float, b: float, panels: int, order: int = 16):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _n_panels(extent: float, bandwidth: float) -> int:
    # 16-point panels resolve about 32 radians of oscillation each
    return 1 + int(np.ceil(bandwidth * extent / 32.0))


def _horner2(coeffs: np.ndarray, z: np.ndarray):
    """Polynomial and its derivative at points z (1-D); each of shape (P, n)."""
    if coeffs.shape[0] == 1:
        return _horner(coeffs, z), np.zeros((z.size, coeffs.shape[1]), dtype=complex)
    d = coeffs[1:] * np.arange(1, coeffs.shape[0])[:, None]
    return _horner(coeffs, z), _horner(d, z)


def _flux_nodes(z0: complex, R: float, K: int):
    """Quadrature on the part of |z - z0| = R inside the disc.

    Returns nodes, weights, outward normals and (beta, delta): the arc of
    the unit circle bounding the region is beta +- delta (delta = 0 if none).
    """
    d = abs(z0)
    if d + R <= 1.0:
        M = 2 * K + 2
        n = np.exp(1j * grid_angles(M))
        return z0 + R * n, np.full(M, TWO_PI * R / M), n, (0.0, 0.0)
    beta = float(np.angle(z0)) if d > 0 else 0.0
    gam = np.arccos(np.clip((1.0 - d * d - R * R) / (2.0 * R * d), -1.0, 1.0))
    delta = float(np.arccos(np.clip((1.0 + d * d - R * R) / (2.0 * d), -1.0, 1.0))) if d > 0 else np.pi
    extent = TWO_PI - 2.0 * gam
    if extent <= 0:
        empty = np.zeros(0)
        return empty.astype(complex), empty, empty.astype(complex), (beta, delta)
    alpha, w = _gl_panels(beta + gam, beta + TWO_PI - gam, _n_panels(extent, 2.0 * K * R))
    n = np.exp(1j * alpha)
    return z0 + R * n, R * w, n, (beta, delta)


def _arc_integrals(coeffs: np.ndarray, beta: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """int_{beta-delta}^{beta+delta} sum_m c_m e^{im phi} dphi for each (beta, delta).

    coeffs has shape (..., 2J+1) over modes -J..J; result shape (C, ...).
    """
    J = (coeffs.shape[-1] - 1) // 2
    m = modes(J)
    safe = np.where(m == 0, 1, m)
    S = np.where(m == 0, 2.0 * delta[:, None], 2.0 * np.sin(m * delta[:, None]) / safe)
    kernel = np.exp(1j * m * beta[:, None]) * S
    return np.real(np.tensordot(kernel, coeffs, axes=(1, -1)))


def local_energies(u: BoundaryField, centers, R: float) -> np.ndarray:
    """int_{B_R(z0) cap B} |grad U|^2 dz for every center z0.

    U is harmonic, so the area integral equals the flux
    oint (U - U(z0)) . dU/dn ds over the boundary of the intersection.  The
    part on |z - z0| = R uses Gauss-Legendre panels (trapezoid when it is
    a full circle) with one shared polynomial pass for all centers; the
    part on the unit circle is a trigonometric polynomial of degree 2K and
    is integrated exactly from its Fourier coefficients.
    """
    if R <= 0:
        raise ValueError("radius must be positive")
    centers = np.atleast_1d(np.asarray(centers, dtype=complex))
    if np.any(np.abs(centers) > 1.0 + 1e-12):
        raise ValueError("centers must lie in the closed unit disc")
    K = u.max_mode
    out = np.zeros(centers.size)
    if K == 0:
        return out
    whole = R >= 1.0 + np.abs(centers)
    out[whole] = 2.0 * dirichlet_energy(u)
    idx = np.flatnonzero(~whole)
    if idx.size == 0:
        return out
    parts = [_flux_nodes(complex(centers[i]), R, K) for i in idx]
    sizes = np.array([p[0].size for p in parts])
    z = np.concatenate([p[0] for p in parts] + [centers[idx]])
    w = np.concatenate([p[1] for p in parts])
    n = np.concatenate([p[2] for p in parts])
    F, dF = _horner2(_holomorphic(u), z)
    total = w.size
    U0 = F[total:].real
    if total:
        base = np.repeat(U0, sizes, axis=0)
        flux = np.sum((F[:total].real - base) * (dF[:total] * n[:, None]).real, axis=1) * w
        ends = np.cumsum(sizes)
        csum = np.concatenate([[0.0], np.cumsum(flux)])
        out[idx] = csum[ends] - csum[ends - sizes]
    beta = np.array([p[3][0] for p in parts])
    delta = np.array([p[3][1] for p in parts])
    arc = delta > 0
    if np.any(arc):
        ur = dtn(u)
        M = default_grid(2 * K, 1.0)
        prod = np.sum(synthesize(u, M) * synthesize(ur, M), axis=1)
        P = analyze(prod[:, None], 2 * K).coeffs[0]
        out[idx[arc]] += _arc_integrals(P, beta[arc], delta[arc])
        lin = _arc_integrals(ur.coeffs, beta[arc], delta[arc])
        out[idx[arc]] -= np.sum(U0[arc] * lin, axis=1)
    return out


def local_energy(u: BoundaryField, z0: complex, R: float) -> float:
    """int_{B_R(z0) cap B} |grad U|^2 dz (see ``local_energies``)."""
    return float(local_energies(u, [z0], R)[0])


# -- composition and topology -------------------------------------------------

def compose_with_mobius(u: BoundaryField, m: MobiusParams, out_mode: int | None = None,
                        grid_size: int | None = None) -> BoundaryField:
    """Boundary trace of U o Phi, re-analyzed at band limit ``out_mode`` (default 4K).

    The composition is not band-limited; it is sampled on a grid of at least
    2 * (2K'+1) points before truncation to keep aliasing of the tail small.
    """
    K_out = 4 * u.max_mode if out_mode is None else int(out_mode)
    K_out = max(K_out, 1) if u.max_mode > 0 else K_out
    if m.a == 0:
        return rotate(u, m.theta).resize(K_out)
    M = grid_size or default_grid(K_out, 2.0)
    phi = grid_angles(M)
    psi = np.angle(m(np.exp(1j * phi)))
    return analyze(GridSamples(eval_trace(u, psi)), K_out)


def winding_degree(u: BoundaryField, min_radius: float = 1e-8) -> int:
    """Winding number about the origin of a planar boundary field."""
    if u.n_components != 2:
        raise ValueError("winding degree needs a planar (n = 2) field")
    M = default_grid(u.max_mode, 8.0)
    for _ in range(6):
        vals = synthesize(u, M)
        w = vals[:, 0] + 1j * vals[:, 1]
        if np.min(np.abs(w)) <= min_radius * max(1.0, float(np.max(np.abs(w)))):
            raise ValueError("field passes through (or too close to) the origin")
        steps = np.angle(np.roll(w, -1) / w)
        if np.max(np.abs(steps)) < 0.5 * np.pi:
            return int(np.rint(np.sum(steps) / TWO_PI))
        M *= 4
    raise ValueError("could not resolve the argument of the field")


# -- constructors -------------------------------------------------------------

def constant_field(value, max_mode: int) -> BoundaryField:
    value = np.atleast_1d(np.asarray(value, dtype=float))
    c = np.zeros((value.size, 2 * max_mode + 1), dtype=complex)
    c[:, max_mode] = value
    return BoundaryField(c)


def mode_field(k: int, max_mode: int) -> BoundaryField:
    """The planar field e^{ik phi} = (cos k phi, sin k phi)."""
    if abs(k) > max_mode:
        raise ValueError("mode exceeds band limit")
    K = max_mode
    c = np.zeros((2, 2 * K + 1), dtype=complex)
    c[0, K + k] += 0.5
    c[0, K - k] += 0.5
    c[1, K + k] += -0.5j
    c[1, K - k] += 0.5j
    return BoundaryField(c)


def from_function(f, max_mode: int, grid_size: int | None = None) -> BoundaryField:
    """Analyze a callable phi -> (M, n) values sampled on a fine grid."""
    M = grid_size or default_grid(max_mode, 2.0)
    return analyze(GridSamples(f(grid_angles(M))), max_mode)


def random_field(rng: np.random.Generator, n_components: int, max_mode: int,
                 decay: float = 1.0, amplitude: float = 1.0) -> BoundaryField:
    """Random real field with coefficients ~ N(0,1) / (1 + |k|)^decay."""
    K = max_mode
    pos = rng.standard_normal((n_components, K + 1)) + 1j * rng.standard_normal((n_components, K + 1))
    pos /= (1.0 + np.arange(K + 1)) ** decay
    pos[:, 0] = pos[:, 0].real
    c = np.empty((n_components, 2 * K + 1), dtype=complex)
    c[:, K:] = pos
    c[:, :K] = np.conj(pos[:, :0:-1])
    return BoundaryField(amplitude * c)
