"""Reflection operator of a lamellar metal grating at imaginary frequency.

The grating layer (0 <= z <= h) is discretised on the Fourier basis of orders
-N..N. For each Bloch point the transverse fields e = (Ex, Ey) and
h = (Hx, Hy) obey e' = P h and h' = Q e, where at imaginary frequency
(k0 = i q) every entry of P and Q is real. The x-component of D uses the
inverse (factorisation) rule [1/eps]^-1; Ey and Ez use the Laurent rule [eps].

Modes are eigenpairs of P Q; the vacuum above and the gold substrate below
are homogeneous and handled in closed form. Layers are connected through
admittances Y (h = Y e at an interface), which stay bounded because every
exponential that appears is a decaying one.

Amplitude convention of :class:`ReflectionOperator`: rows/columns are ordered
``[TE(-N..N), TM(-N..N)]``; amplitudes are tangential electric fields along
the unit vectors e_TE = z x k/|k| and e_TM = k/|k|, except that outgoing TM
amplitudes carry an extra minus sign. With this choice a flat half-space gives
``diag(r_te, r_tm)`` in the sign convention of :func:`lifshitz.fresnel`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR_C
from .materials import wavenumber
from .numerics import PhysicsError


@dataclass(frozen=True)
class GratingGeometry:
    """Lamellar grating: period p, ridge width w and height h, all in nm."""

    period_p: float = 350.0
    width_w: float = 130.0
    height_h: float = 400.0

    def __post_init__(self):
        if not self.period_p > 0:
            raise ValueError("geometry.p must be > 0")
        if not 0 < self.width_w <= self.period_p:
            raise ValueError("geometry.w must satisfy 0 < w <= p")
        if self.height_h < 0:
            raise ValueError("geometry.h must be >= 0")

    @property
    def filling_factor(self) -> float:
        return self.width_w / self.period_p

    @property
    def groove(self) -> float:
        return self.period_p - self.width_w

    @property
    def is_flat(self) -> bool:
        return self.height_h == 0 or self.width_w == self.period_p

    def scaled(self, s: float) -> "GratingGeometry":
        return GratingGeometry(self.period_p * s, self.width_w * s, self.height_h * s)


@dataclass(frozen=True)
class BlochPoint:
    """In-plane Bloch wavevector (1/nm) and imaginary frequency xi (eV)."""

    k_x: float
    k_y: float
    xi: float


@dataclass(frozen=True)
class ModeSet:
    """Eigenmodes of the grating layer at one Bloch point.

    ``eigenvalues`` are the decay constants lambda_m (1/nm, fields ~ exp(+-lambda z)),
    sorted by increasing real part; ``eigenvectors`` hold the Fourier
    coefficients of (Ex, Ey) for each mode; ``admittance_vectors`` the matching
    (Hx, Hy) coefficients scaled so that h = V c for the mode growing along +z.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    admittance_vectors: np.ndarray
    truncation_N: int


@dataclass(frozen=True)
class ReflectionOperator:
    matrix: np.ndarray
    truncation_N: int

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.truncation_N, self.truncation_N + 1)

    def specular(self) -> np.ndarray:
        """2x2 block (TE, TM) x (TE, TM) of the zeroth diffraction order."""
        n = 2 * self.truncation_N + 1
        i = self.truncation_N
        return self.matrix[np.ix_([i, n + i], [i, n + i])]


def diffraction_orders(N: int) -> np.ndarray:
    return np.arange(-N, N + 1)


def parallel_wavevectors(g: GratingGeometry, k_x, N: int) -> np.ndarray:
    """k_x + 2 pi n / p for n = -N..N (trailing axis)."""
    return np.asarray(k_x, dtype=float)[..., None] + 2 * math.pi / g.period_p * diffraction_orders(N)


def permittivity_fourier(g: GratingGeometry, eps_ridge, N: int):
    """Toeplitz matrices [eps] and [1/eps] for a ridge centred at x = 0.

    ``eps_ridge`` may be an array (leading axes are batched).
    """
    f = g.filling_factor
    j = np.arange(-2 * N, 2 * N + 1)
    # Fourier coefficients of the ridge indicator: f sinc(j f)
    ind = f * np.sinc(j * f)
    delta = (j == 0).astype(float)
    eps_ridge = np.asarray(eps_ridge, dtype=float)[..., None]
    c_eps = delta + (eps_ridge - 1.0) * ind
    c_inv = delta + (1.0 / eps_ridge - 1.0) * ind
    n = diffraction_orders(N)
    diff = n[:, None] - n[None, :] + 2 * N
    return c_eps[..., diff], c_inv[..., diff]


def _pq_matrices(kxn, ky, q, eps_lau, eps_inv_rule, eps_z):
    """Batched P and Q (shape (..., 2M, 2M)) of the transverse field equations.

    ``eps_lau`` multiplies Ey, ``eps_inv_rule`` multiplies Ex and ``eps_z``
    (already inverted) divides the z-component. Frequencies enter through q > 0.
    """
    M = kxn.shape[-1]
    Kx = kxn[..., :, None] * np.eye(M)
    ky = np.asarray(ky, dtype=float)[..., None, None]
    q = np.asarray(q, dtype=float)[..., None, None]
    eye = np.eye(M)
    KEK = Kx @ eps_z @ Kx
    KE = Kx @ eps_z
    EK = eps_z @ Kx
    P = np.empty(kxn.shape[:-1] + (2 * M, 2 * M))
    P[..., :M, :M] = ky * KE / q
    P[..., :M, M:] = -KEK / q - q * eye
    P[..., M:, :M] = ky**2 * eps_z / q + q * eye
    P[..., M:, M:] = -ky * EK / q
    Q = np.empty_like(P)
    Q[..., :M, :M] = -ky * Kx / q
    Q[..., :M, M:] = Kx @ Kx / q + q * eps_lau
    Q[..., M:, :M] = -(ky**2) * eye / q - q * eps_inv_rule
    Q[..., M:, M:] = ky * Kx / q
    return P, Q


def _homogeneous_admittance(kxn, ky, q, eps):
    """Admittance Y (h = Y e) of a homogeneous half-space filling z < z0 (fields ~ e^{+kappa z}).

    Block structure per order: Y = Q / kappa for the scalar-eps P/Q pair.
    Returns (Y, kappa) with batched shapes.
    """
    M = kxn.shape[-1]
    ky_ = np.asarray(ky, dtype=float)[..., None]
    q_ = np.asarray(q, dtype=float)[..., None]
    eps = np.asarray(eps, dtype=float)[..., None]
    kappa = np.sqrt(kxn**2 + ky_**2 + eps * q_**2)
    a, b = kxn, np.broadcast_to(ky_, kxn.shape)
    Y = np.zeros(kxn.shape[:-1] + (2 * M, 2 * M))
    idx = np.arange(M)
    c = eps * q_**2
    Y[..., idx, idx] = -a * b / (q_ * kappa)
    Y[..., idx, M + idx] = (a**2 + c) / (q_ * kappa)
    Y[..., M + idx, idx] = -(b**2 + c) / (q_ * kappa)
    Y[..., M + idx, M + idx] = a * b / (q_ * kappa)
    return Y, kappa


def polarization_basis(kxn, ky):
    """Orthogonal U mapping [TE, TM] amplitudes to [Ex, Ey] Fourier components.

    For k = 0 the choice e_TM = x, e_TE = y is used (the k_y -> 0, k_x -> 0+ limit).
    """
    M = kxn.shape[-1]
    b = np.broadcast_to(np.asarray(ky, dtype=float)[..., None], kxn.shape)
    k = np.hypot(kxn, b)
    safe = k > 0
    cx = np.where(safe, kxn / np.where(safe, k, 1.0), 1.0)
    cy = np.where(safe, b / np.where(safe, k, 1.0), 0.0)
    U = np.zeros(kxn.shape[:-1] + (2 * M, 2 * M))
    idx = np.arange(M)
    U[..., idx, idx] = -cy  # TE -> Ex
    U[..., M + idx, idx] = cx  # TE -> Ey
    U[..., idx, M + idx] = cx  # TM -> Ex
    U[..., M + idx, M + idx] = cy  # TM -> Ey
    return U


def grating_modes(g: GratingGeometry, eps, pt: BlochPoint, N: int) -> ModeSet:
    """Eigenmodes of the grating region (ridges of permittivity ``eps`` in vacuum)."""
    if eps < 1:
        raise ValueError("eps must be >= 1")
    if N < 1:
        raise ValueError("truncation N must be >= 1")
    if not pt.xi > 0:
        raise ValueError("grating_modes requires xi > 0; use the static solver at xi = 0")
    lam, W, V = _layer_modes(g, np.asarray(eps, dtype=float), np.asarray(pt.k_x, dtype=float),
                             np.asarray(pt.k_y, dtype=float), np.asarray(wavenumber(pt.xi)), N)
    return ModeSet(lam, W, V, N)


def _layer_modes(g, eps, k_x, k_y, q, N):
    """Modes of the lamellar layer as (lambda, W, V), batched over k points.

    Because eps depends on x only, the modes split exactly into two families:
    E_x = 0 modes with lambda^2 = k_y^2 + eig(Kx^2 + q^2 [eps]) and H_x = 0
    modes with lambda^2 = k_y^2 + eig([1/eps]^-1 (Kx [eps]^-1 Kx + q^2)).
    Both are solved as symmetric problems (the second through a Cholesky
    factor of [1/eps]), which keeps eigenvectors well defined under the exact
    degeneracies of a uniform layer.
    """
    kxn = parallel_wavevectors(g, k_x, N)
    M = kxn.shape[-1]
    eps_lau, eps_inv = permittivity_fourier(g, eps, N)
    eps_lau = np.broadcast_to(eps_lau, kxn.shape[:-1] + (M, M))
    eps_inv = np.broadcast_to(eps_inv, kxn.shape[:-1] + (M, M))
    q = np.asarray(q, dtype=float)[..., None, None]
    ky = np.asarray(k_y, dtype=float)[..., None, None]
    Kx = kxn[..., :, None] * np.eye(M)
    # E_x = 0 family: Ey = u
    mu_e, U = np.linalg.eigh(Kx @ Kx + q**2 * eps_lau)
    # H_x = 0 family: Hy = v with S v = mu [1/eps] v
    eps_z = np.linalg.inv(eps_lau)
    S = Kx @ eps_z @ Kx + q**2 * np.eye(M)
    L = np.linalg.cholesky(eps_inv)
    Linv = np.linalg.inv(L)
    mu_h, Yv = np.linalg.eigh(Linv @ S @ np.swapaxes(Linv, -1, -2))
    Vh = np.swapaxes(Linv, -1, -2) @ Yv
    scale = max(np.max(np.abs(mu_e)), np.max(np.abs(mu_h)))
    if min(np.min(mu_e), np.min(mu_h)) < -1e-6 * scale:
        raise PhysicsError(f"non-evanescent grating mode at xi={float(q.ravel()[0]) * HBAR_C:.3e} eV")
    # both operators are bounded below by q^2 since [eps] >= 1 and [1/eps]^-1 >= 1;
    # clipping removes round-off when [eps] is badly conditioned (xi -> 0)
    mu_e = np.maximum(mu_e, q[..., 0] ** 2)
    mu_h = np.maximum(mu_h, q[..., 0] ** 2)
    ky1 = ky[..., 0]
    lam_e = np.sqrt(ky1**2 + mu_e)
    lam_h = np.sqrt(ky1**2 + mu_h)
    q1 = q[..., 0]
    # column normalisation is free; chosen so that both families are O(1) in q
    W = np.zeros(kxn.shape[:-1] + (2 * M, 2 * M))
    V = np.zeros_like(W)
    W[..., M:, :M] = U
    V[..., :M, :M] = U * (mu_e / (q1 * lam_e))[..., None, :]
    V[..., M:, :M] = ky * (Kx @ U) / (q * lam_e[..., None, :])
    W[..., :M, M:] = -(S @ Vh) / lam_h[..., None, :]
    W[..., M:, M:] = -ky * (eps_z @ Kx @ Vh) / lam_h[..., None, :]
    V[..., M:, M:] = q * Vh
    lam = np.concatenate([lam_e, lam_h], axis=-1)
    order = np.argsort(lam, axis=-1)
    lam = np.take_along_axis(lam, order, axis=-1)
    W = np.take_along_axis(W, order[..., None, :], axis=-1)
    V = np.take_along_axis(V, order[..., None, :], axis=-1)
    return lam, W, V


def layer_operator_pq(g: GratingGeometry, eps, pt: BlochPoint, N: int):
    """P and Q of the transverse field equations (for residual checks of a ModeSet)."""
    kxn = parallel_wavevectors(g, pt.k_x, N)
    eps_lau, eps_inv = permittivity_fourier(g, eps, N)
    return _pq_matrices(kxn, pt.k_y, wavenumber(pt.xi), eps_lau, np.linalg.inv(eps_inv),
                        np.linalg.inv(eps_lau))


def _reflection_from_admittance(Y0, Ytop, kxn, ky, return_cond=False):
    """Reflection [TE, TM] for vacuum admittance Y0 above a load Ytop.

    TE and TM admittances scale as 1/q and q respectively, so the matching
    system is solved in the polarisation basis after symmetric diagonal
    equilibration.
    """
    M = kxn.shape[-1]
    U = polarization_basis(kxn, ky)
    Ut = np.swapaxes(U, -1, -2)
    # Y maps e_TE onto the TM direction of h and vice versa: swap row blocks
    perm = np.r_[np.arange(M, 2 * M), np.arange(M)]
    A = (Ut @ (Y0 + Ytop) @ U)[..., perm, :]
    B = (Ut @ (Y0 - Ytop) @ U)[..., perm, :]
    s = 1.0 / np.sqrt(np.abs(np.diagonal(A, axis1=-2, axis2=-1)))
    As = A * s[..., :, None] * s[..., None, :]
    Bs = B * s[..., :, None] * s[..., None, :]
    R = np.linalg.solve(As, Bs) * s[..., :, None] / s[..., None, :]
    R[..., M:, :] *= -1.0
    if return_cond:
        return R, np.linalg.cond(As)
    return R


def _layer_admittance(lam, W, V, Yb, h):
    """Admittance at the top of a layer of thickness h loaded by Yb at its bottom."""
    X = np.exp(-lam * h)
    XW = W * X[..., None, :]
    XV = V * X[..., None, :]
    # coefficients c2 = rho c1 of the modes decaying upward from the bottom
    rho = np.linalg.solve(V + Yb @ W, XV - Yb @ XW)
    top_e = W + XW @ rho
    top_h = V - XV @ rho
    # Y = top_h top_e^{-1}  ->  solve top_e^T Y^T = top_h^T
    return np.swapaxes(np.linalg.solve(np.swapaxes(top_e, -1, -2), np.swapaxes(top_h, -1, -2)), -1, -2)


def grating_reflection_batch(g: GratingGeometry, eps, k_x, k_y, q, N: int):
    """Reflection matrices for arrays of (k_x, k_y) at one frequency q > 0.

    ``eps`` is the ridge/substrate permittivity at that frequency.
    Returns an array of shape (..., 2(2N+1), 2(2N+1)).
    """
    k_x = np.asarray(k_x, dtype=float)
    k_y = np.asarray(k_y, dtype=float)
    kxn = parallel_wavevectors(g, k_x, N)
    Y0, _ = _homogeneous_admittance(kxn, k_y, q, 1.0)
    Yb, _ = _homogeneous_admittance(kxn, k_y, q, eps)
    if g.height_h == 0:
        Ytop = Yb
    else:
        lam, W, V = _layer_modes(g, np.asarray(eps, dtype=float), k_x, k_y, np.asarray(q, dtype=float), N)
        Ytop = _layer_admittance(lam, W, V, Yb, g.height_h)
    return _reflection_from_admittance(Y0, Ytop, kxn, k_y)


def grating_reflection(g: GratingGeometry, modes: ModeSet | None, pt: BlochPoint, eps: float,
                       N: int | None = None) -> ReflectionOperator:
    """Reflection operator of the grating on gold bulk at one Bloch point (xi > 0).

    ``modes`` may be supplied from :func:`grating_modes` (same point) or left
    as ``None`` to compute them here.
    """
    if modes is not None:
        N = modes.truncation_N
    if N is None:
        raise ValueError("truncation N required when modes are not given")
    q = float(wavenumber(pt.xi))
    if not q > 0:
        raise ValueError("grating_reflection requires xi > 0; see static_grating_reflection")
    kxn = parallel_wavevectors(g, pt.k_x, N)
    Y0, _ = _homogeneous_admittance(kxn, pt.k_y, q, 1.0)
    Yb, _ = _homogeneous_admittance(kxn, pt.k_y, q, eps)
    if g.height_h == 0:
        Ytop = Yb
    else:
        if modes is None:
            modes = grating_modes(g, eps, pt, N)
        Ytop = _layer_admittance(modes.eigenvalues, modes.eigenvectors, modes.admittance_vectors,
                                 Yb, g.height_h)
    R, cond = _reflection_from_admittance(Y0, Ytop, kxn, pt.k_y, return_cond=True)
    if cond > 1e12:
        raise PhysicsError(f"ill-conditioned boundary matching (cond={cond:.2e}) at {pt}")
    return ReflectionOperator(R, N)


def translation_operator(d: float, pt: BlochPoint, N: int, period: float) -> np.ndarray:
    """Diagonal entries exp(-kappa_n d) over [TE, TM] x orders."""
    if not d > 0:
        raise ValueError("separation must be > 0")
    kxn = pt.k_x + 2 * math.pi / period * diffraction_orders(N)
    kappa = np.sqrt(wavenumber(pt.xi) ** 2 + kxn**2 + pt.k_y**2)
    e = np.exp(-kappa * d)
    return np.concatenate([e, e])


def groove_mode_count(g: GratingGeometry, N: int) -> int:
    """Groove sine modes matched to 2N+1 Rayleigh orders (equal largest wavenumbers)."""
    return max(2, int(round(2 * N * g.groove / g.period_p)))


def static_tm_reflection(g: GratingGeometry, k_x, k_y, N: int, n_groove: int | None = None):
    """xi -> 0 limit of the TM block for a Drude grating on Drude bulk.

    In this limit the metal is an equipotential conductor. The potential in a
    groove of width g is expanded in sin(m pi u / g) sinh(gamma_m z) with
    gamma_m^2 = (m pi / g)^2 + k_y^2 (vanishing on walls and bottom) and matched
    at z = h to the Rayleigh orders above; the ridge tops impose zero potential.
    Returns the real TM reflection matrix (..., 2N+1, 2N+1) in the amplitude
    convention of :class:`ReflectionOperator` (flat conductor -> identity).
    """
    k_x = np.asarray(k_x, dtype=float)
    k_y = np.asarray(k_y, dtype=float)
    kxn = parallel_wavevectors(g, k_x, N)
    n_orders = kxn.shape[-1]
    if g.height_h == 0 or g.width_w == g.period_p:
        return np.broadcast_to(np.eye(n_orders), kxn.shape + (n_orders,)).copy()
    if n_groove is None:
        n_groove = groove_mode_count(g, N)
    gw = g.groove
    m = np.arange(1, n_groove + 1)
    alpha = m * math.pi / gw
    kyb = k_y[..., None]
    kappa = np.sqrt(kxn**2 + kyb**2)
    gamma = np.sqrt(alpha**2 + kyb**2)

    def _exp_integral(beta):
        return gw * np.exp(0.5j * beta * gw) * np.sinc(beta * gw / (2 * math.pi))

    kk = kxn[..., :, None]
    sin_int = (_exp_integral(alpha - kk) - _exp_integral(-alpha - kk)) / 2j
    G = np.exp(-0.5j * kk * g.width_w) * sin_int / g.period_p  # (..., n, m)
    H = (2 * g.period_p / gw) * np.conj(np.swapaxes(G, -1, -2))  # (..., m, n)
    t = np.tanh(gamma * g.height_h) / gamma
    T = (G * t[..., None, :]) @ H * kappa[..., None, :]
    eye = np.eye(n_orders)
    R = np.linalg.solve(eye + T, eye - T)
    # the Bloch phase exp(-i k p/2) cancels; the rest is real up to round-off
    R = R.real
    # express in tangential-E amplitudes: similarity by |k_n| (regularised at k = 0)
    scale = np.where(kappa > 0, kappa, 1.0)
    return scale[..., :, None] * R / scale[..., None, :]
