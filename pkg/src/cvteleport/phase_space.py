"""s-ordered quasiprobabilities, R-functions and numeric nonclassical depth.

Conventions: phase-space points are complex ``alpha = x + i p``; a Gaussian
"of variance v" means exp(-|alpha|^2/v)/(pi v), i.e. v/2 per quadrature.
Ordering s = 1, 1/2, 0 gives the P, Wigner and Q functions; the R-function
at smoothing tau is the s = 1 - tau member.  Smoothing by an extra variance
v maps s to s - v.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import GridTooSmall, InvalidTau, NotRepresentable, OrderOutOfRange, UnsupportedSpec
from .fock import DensityMatrix, StateSpec, displacement_batch

DEPTH_FLOOR = -1e-9
DEPTH_GRID_POINTS = 201
RADIAL_SCAN_POINTS = 4001
MIN_DEPTH_TOL = 1e-4
# the smoothing kernel must reach this far past the input's support
SMOOTH_MARGIN_SIGMAS = 5.0
SUPPORT_THRESHOLD = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid over x = Re(alpha), p = Im(alpha), endpoints included."""

    x_min: float
    x_max: float
    p_min: float
    p_max: float
    nx: int
    n_p: int

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.p_max > self.p_min):
            raise ValueError("grid bounds must be strictly increasing")
        if self.nx < 2 or self.n_p < 2:
            raise ValueError("grid needs at least two points per axis")

    @classmethod
    def square(cls, half_width: float, n: int, center: complex = 0j) -> "GridSpec":
        c = complex(center)
        return cls(c.real - half_width, c.real + half_width, c.imag - half_width, c.imag + half_width, n, n)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.n_p - 1)

    def alphas(self) -> np.ndarray:
        """Complex points, shape (nx, n_p)."""
        return self.x[:, None] + 1j * self.p[None, :]


@dataclass(frozen=True, eq=False)
class QuasiprobGrid:
    """Real values of the s-ordered quasiprobability on ``grid``."""

    grid: GridSpec
    values: np.ndarray
    s: float

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.nx, self.grid.n_p):
            raise ValueError(f"values shape {vals.shape} does not match grid")
        if not np.all(np.isfinite(vals)):
            raise ValueError("quasiprobability values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def tau(self) -> float:
        return 1.0 - self.s

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.dx * self.grid.dp)


def _support_bounds(axis: np.ndarray, mass: np.ndarray) -> tuple[float, float]:
    idx = np.nonzero(mass > SUPPORT_THRESHOLD * mass.max())[0]
    return axis[idx[0]], axis[idx[-1]]


def smooth(grid_in: QuasiprobGrid, extra_variance: float) -> QuasiprobGrid:
    """Convolve with exp(-|alpha|^2/v)/(pi v); lowers the ordering by v.

    The Gaussian is separable, so the convolution is one Riemann-sum matrix
    per axis.  Raises ``GridTooSmall`` if the input support plus five kernel
    widths leaves the grid, or if the spacing does not resolve the kernel.
    """
    v = float(extra_variance)
    if v <= 0:
        raise ValueError(f"extra variance must be positive, got {v}")
    g = grid_in.grid
    sigma = math.sqrt(v / 2.0)
    if g.dx > sigma or g.dp > sigma:
        raise GridTooSmall(f"grid spacing {max(g.dx, g.dp):.3g} does not resolve kernel width {sigma:.3g}")
    mag = np.abs(grid_in.values)
    if mag.max() > 0:
        margin = SMOOTH_MARGIN_SIGMAS * math.sqrt(v)
        x_lo, x_hi = _support_bounds(g.x, mag.max(axis=1))
        p_lo, p_hi = _support_bounds(g.p, mag.max(axis=0))
        if x_lo - margin < g.x_min or x_hi + margin > g.x_max or p_lo - margin < g.p_min or p_hi + margin > g.p_max:
            raise GridTooSmall(f"grid does not extend {margin:.3g} beyond the support of the input")

    def kernel(axis: np.ndarray, step: float) -> np.ndarray:
        diff = axis[:, None] - axis[None, :]
        return np.exp(-diff * diff / v) * (step / math.sqrt(math.pi * v))

    out = kernel(g.x, g.dx) @ grid_in.values @ kernel(g.p, g.dp).T
    return QuasiprobGrid(g, out, grid_in.s - v)


# ---------------------------------------------------------------------------
# closed-form R-functions

def r_function_fock(n: int, tau: float, alpha):
    """R(alpha, tau) of the Fock state |n>.

    Expanded form of (1/(pi tau)) (-(1-tau)/tau)^n exp(-|alpha|^2/tau)
    L_n(|alpha|^2 / (tau (1 - tau))), which has no singularity at tau = 1::

        (1/(pi tau)) e^{-y/tau} sum_k C(n,k)/k! (-1)^{n+k} (1-tau)^{n-k} y^k / tau^{n+k}
    """
    tau = float(tau)
    if not tau > 0:
        raise InvalidTau(f"smoothing must be positive, got {tau}")
    if n < 0 or int(n) != n:
        raise ValueError(f"photon number must be a non-negative integer, got {n}")
    n = int(n)
    y = np.abs(np.asarray(alpha, dtype=complex)) ** 2
    total = np.zeros_like(y)
    for k in range(n + 1):
        log_c = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1) - gammaln(k + 1)
        coef = (-1.0) ** (n + k) * math.exp(log_c) * (1.0 - tau) ** (n - k) / tau ** (n + k)
        total = total + coef * y**k
    value = total * np.exp(-y / tau) / (math.pi * tau)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class GaussianStateParams:
    """P-level Gaussian: centre ``mean`` and principal variances along ``orientation``.

    ``cov_plus`` lies along the direction at angle ``orientation`` in the
    alpha plane, ``cov_minus`` perpendicular to it.  Negative values mark
    nonclassical (squeezed) states.
    """

    mean: complex
    cov_plus: float
    cov_minus: float
    orientation: float = 0.0

    def __post_init__(self):
        if self.cov_plus < self.cov_minus:
            raise ValueError("cov_plus must be >= cov_minus")

    def after_loss(self, T: float) -> "GaussianStateParams":
        """Direct transmission rescales the P-function argument: mean * sqrt(T), covariances * T."""
        return GaussianStateParams(self.mean * math.sqrt(T), self.cov_plus * T, self.cov_minus * T, self.orientation)

    def after_noise(self, nbar: float) -> "GaussianStateParams":
        return GaussianStateParams(self.mean, self.cov_plus + nbar, self.cov_minus + nbar, self.orientation)


def gaussian_params(spec: StateSpec) -> GaussianStateParams:
    if spec.kind == "coherent":
        return GaussianStateParams(spec.amplitude, 0.0, 0.0)
    if spec.kind == "thermal":
        return GaussianStateParams(0j, spec.mean_photons, spec.mean_photons)
    if spec.kind == "fock" and spec.photon_number == 0:
        return GaussianStateParams(0j, 0.0, 0.0)
    if spec.kind == "squeezed_vacuum":
        xi = spec.squeezing
        r = abs(xi)
        return GaussianStateParams(0j, 0.5 * math.expm1(2 * r), 0.5 * math.expm1(-2 * r), 0.5 * np.angle(xi) + 0.5 * math.pi)
    raise UnsupportedSpec(f"{spec.kind} state is not Gaussian")


def gaussian_params_from_density(rho: DensityMatrix) -> GaussianStateParams:
    """P-level Gaussian parameters from the first and second moments of ``rho``.

    Normally ordered moments are P-function moments, so with
    N = <a^dag a> - |<a>|^2 and M = <a^2> - <a>^2 the principal variances
    are N +- |M| and the plus axis points along arg(M)/2.  Exact for
    Gaussian states up to truncation.
    """
    d = rho.dim
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    m = rho.elems
    mean = np.trace(m @ a)
    n = np.trace(m @ a.T @ a).real - abs(mean) ** 2
    mm = np.trace(m @ a @ a) - mean**2
    return GaussianStateParams(complex(mean), float(n + abs(mm)), float(n - abs(mm)), float(0.5 * np.angle(mm)))


def r_function_gaussian(gauss: GaussianStateParams, tau: float, alpha):
    """R(alpha, tau) of a Gaussian state: a Gaussian with variances cov + tau.

    Raises ``NotRepresentable`` when tau + cov_minus <= 0.
    """
    a = gauss.cov_plus + tau
    b = gauss.cov_minus + tau
    if b <= 0.0:
        raise NotRepresentable(f"smoothing {tau} does not cover the squeezed variance {gauss.cov_minus}")
    rot = np.exp(-1j * gauss.orientation) * (np.asarray(alpha, dtype=complex) - gauss.mean)
    value = np.exp(-(rot.real**2) / a - (rot.imag**2) / b) / (math.pi * math.sqrt(a * b))
    return float(value) if value.ndim == 0 else value


# ---------------------------------------------------------------------------
# numeric depth

def _fock_nonnegative(n: int, tau: float) -> bool:
    if tau <= 0.0:
        return False
    y_max = (6.0 * (1.0 + math.sqrt(n))) ** 2
    y = np.concatenate(([0.0], np.geomspace(1e-12, y_max, RADIAL_SCAN_POINTS)))
    return float(np.min(r_function_fock(n, tau, np.sqrt(y)))) >= DEPTH_FLOOR


def _gaussian_nonnegative(gauss: GaussianStateParams, tau: float) -> bool:
    b = gauss.cov_minus + tau
    if b < 0.0:
        return False
    if b == 0.0:
        # degenerate: a positive measure on a line (or a point)
        return True
    mu_ph = abs(gauss.mean) ** 2 + max(gauss.cov_plus, 0.0)
    half = 6.0 * (1.0 + math.sqrt(mu_ph))
    grid = GridSpec.square(half, DEPTH_GRID_POINTS, gauss.mean)
    return float(np.min(r_function_gaussian(gauss, tau, grid.alphas()))) >= DEPTH_FLOOR


def depth_estimate(spec: StateSpec, effective_smoothing: float = 0.0, tol: float = MIN_DEPTH_TOL) -> float:
    """Nonclassical depth of ``spec`` after extra Gaussian smoothing, by bisection.

    The positivity test evaluates the closed-form R-function at smoothing
    tau + effective_smoothing: Fock states on a radial grid in |alpha|^2
    (geometric spacing, so the small negative dip near the origin at tau
    close to 1 is resolved), Gaussian states on a 201 x 201 grid.
    """
    if tol < MIN_DEPTH_TOL:
        raise ValueError(f"tolerance must be >= {MIN_DEPTH_TOL}, got {tol}")
    if effective_smoothing < 0:
        raise ValueError("effective smoothing must be >= 0")
    if spec.kind == "fock" and spec.photon_number > 0:
        n = spec.photon_number

        def nonneg(tau: float) -> bool:
            return _fock_nonnegative(n, tau + effective_smoothing)

    elif spec.kind in ("coherent", "thermal", "squeezed_vacuum", "fock"):
        gauss = gaussian_params(spec)

        def nonneg(tau: float) -> bool:
            return _gaussian_nonnegative(gauss, tau + effective_smoothing)

    else:
        raise UnsupportedSpec(f"no numeric depth for {spec.kind} states")

    if nonneg(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if nonneg(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# quasiprobabilities of density matrices

def quasiprob_from_density(rho: DensityMatrix, s: float, grid: GridSpec, chunk: int = 256) -> QuasiprobGrid:
    """W^(s) of ``rho`` on ``grid`` through the displaced-number series.

    W^(s)(alpha) = 1/(pi (1-s)) sum_k (s/(s-1))^k <k| D(-alpha) rho D(-alpha)^dag |k>

    The series converges only for s < 1/2.  The displaced state is taken on
    a cutoff padded for the largest |alpha| on the grid.
    """
    s = float(s)
    if s >= 0.5:
        raise OrderOutOfRange(f"displaced-number series diverges for s >= 1/2, got {s}")
    ratio = s / (s - 1.0)
    pts = grid.alphas().ravel()
    a_max = float(np.max(np.abs(pts)))
    d = rho.dim
    dpad = d + int(math.ceil(a_max**2 + 6.0 * a_max + 10.0))
    weights = ratio ** np.arange(dpad)
    vals = np.empty(pts.size)
    for start in range(0, pts.size, chunk):
        disp = displacement_batch(-pts[start : start + chunk], dpad)[:, :, :d]
        pops = np.einsum("nij,nij->ni", disp @ rho.elems, disp.conj()).real
        vals[start : start + chunk] = pops @ weights
    vals /= math.pi * (1.0 - s)
    return QuasiprobGrid(grid, vals.reshape(grid.nx, grid.n_p), s)
