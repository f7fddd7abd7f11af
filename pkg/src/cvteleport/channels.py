"""Lossy teleportation and direct transmission channels.

Two routes are provided for each channel: closed-form parameters (the added
thermal photon number ``nbar`` of teleportation, the amplitude scaling of
direct transmission) and explicit Fock-basis maps that act on density
matrices.  The Fock-basis maps are the oracles the closed forms are checked
against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, roots_laguerre, roots_legendre

from .errors import (
    CutoffTooSmall,
    InvalidSqueezing,
    InvalidTransmittance,
    QuadratureNotConverged,
)
from .fock import (
    TAIL_TOLERANCE,
    DensityMatrix,
    cutoff_rule,
    displacement_batch,
    displaced_thermal,
    thermal_diagonal,
    trace_distance,
)

QUADRATURE_TOLERANCE = 1e-5
AVERAGE_TRACE_TOLERANCE = 1e-6


def check_transmittance(T: float) -> float:
    T = float(T)
    if not 0.0 <= T <= 1.0:
        raise InvalidTransmittance(f"transmittance must lie in [0, 1], got {T}")
    return T


@dataclass(frozen=True)
class ChannelParams:
    """Two-mode squeezing ``r`` and per-arm transmittance ``T``.

    ``r = math.inf`` is accepted and means perfect squeezing (lambda = 1).
    """

    r: float
    T: float

    def __post_init__(self):
        r = float(self.r)
        if math.isnan(r) or r < 0:
            raise InvalidSqueezing(f"squeezing must be >= 0, got {self.r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "T", check_transmittance(self.T))

    @classmethod
    def from_lambda(cls, lam: float, T: float) -> "ChannelParams":
        if not 0.0 <= lam <= 1.0:
            raise InvalidSqueezing(f"lambda must lie in [0, 1], got {lam}")
        return cls(math.inf if lam == 1.0 else math.atanh(lam), T)

    @property
    def lam(self) -> float:
        return math.tanh(self.r)

    @property
    def g(self) -> float:
        return math.inf if self.T == 0 else -math.log(self.T)

    @property
    def nbar(self) -> float:
        """Thermal photon number added by teleportation, 1 - (1 - e^{-2r}) T."""
        return 1.0 + math.expm1(-2.0 * self.r) * self.T

    @property
    def nbar_from_lambda(self) -> float:
        """Same quantity in the form 1 - 2 lambda T / (1 + lambda)."""
        lam = self.lam
        return 1.0 - 2.0 * lam * self.T / (1.0 + lam)

    @property
    def nbar_minus(self) -> float:
        """``nbar`` with lambda -> -lambda: 1 + 2 lambda T / (1 - lambda)."""
        lam = self.lam
        if lam == 1.0:
            return math.inf
        return 1.0 + 2.0 * lam * self.T / (1.0 - lam)

    @property
    def ntilde(self) -> float:
        """Thermal photon number of the per-outcome state."""
        lam2, T = self.lam**2, self.T
        if T == 0.0:
            return 0.0
        return lam2 * T * (1.0 - T) / (1.0 - lam2 * (1.0 - T))

    @property
    def outcome_gain(self) -> float:
        """k in mu_out = mu + k (alpha - mu)."""
        lam, T = self.lam, self.T
        if T == 0.0:
            return 0.0
        return lam * T / (1.0 - lam * lam * (1.0 - T))

    @property
    def outcome_precision(self) -> float:
        """c in P(x, p) = c/(2 pi) exp(-c |alpha - mu|^2) for a coherent input."""
        lam2, T = self.lam**2, self.T
        if lam2 == 1.0:
            return 0.0
        return (1.0 - lam2) / (1.0 - lam2 * (1.0 - T))


@dataclass(frozen=True)
class MeasurementOutcome:
    """Joint quadrature outcome (x, p); ``mu = (x + i p) / sqrt(2)``."""

    x: float
    p: float

    @classmethod
    def from_mu(cls, mu: complex) -> "MeasurementOutcome":
        mu = complex(mu)
        return cls(math.sqrt(2.0) * mu.real, math.sqrt(2.0) * mu.imag)

    @property
    def mu(self) -> complex:
        return complex(self.x, self.p) / math.sqrt(2.0)


@dataclass(frozen=True)
class KernelArgs:
    """Position-basis arguments of the teleportation kernel; arrays broadcast."""

    y1: float
    y2: float
    z1: float
    z2: float


# ---------------------------------------------------------------------------
# direct transmission

def loss_map(rho: DensityMatrix, T: float) -> DensityMatrix:
    """Pure-loss channel with vacuum environment and transmittance ``T``.

    Kraus sum written element-wise::

        out[m, n] = sum_k rho[m+k, n+k] sqrt(C(m+k, k) C(n+k, k))
                    T^{(m+n)/2} (1-T)^k

    Photon number only decreases, so the output is exact on the same cutoff.
    """
    T = check_transmittance(T)
    d = rho.dim
    src = rho.elems
    out = np.zeros((d, d), dtype=complex)
    m = np.arange(d)
    for k in range(d):
        loss_k = (1.0 - T) ** k
        if loss_k == 0.0:
            break
        idx = m[: d - k]
        c = np.exp(0.5 * (gammaln(idx + k + 1) - gammaln(idx + 1) - gammaln(k + 1)))
        out[: d - k, : d - k] += loss_k * np.outer(c, c) * src[k:, k:]
    amp = np.sqrt(T) ** m
    out *= np.outer(amp, amp)
    return DensityMatrix(out)


def loss_kraus(T: float, dim: int) -> list[np.ndarray]:
    """Kraus operators A_k = sum_n sqrt(C(n,k) T^{n-k} (1-T)^k) |n-k><n|."""
    T = check_transmittance(T)
    ops = []
    n = np.arange(dim)
    for k in range(dim):
        A = np.zeros((dim, dim))
        idx = n[k:]
        coef = np.exp(0.5 * (gammaln(idx + 1) - gammaln(idx - k + 1) - gammaln(k + 1)))
        A[idx - k, idx] = coef * np.sqrt(T) ** (idx - k) * np.sqrt(1.0 - T) ** k
        ops.append(A)
    return ops


def direct_transmit(rho_in: DensityMatrix, T: float) -> DensityMatrix:
    """Direct transmission through the loss channel; same map as :func:`loss_map`."""
    return loss_map(rho_in, T)


# ---------------------------------------------------------------------------
# teleportation, averaged over outcomes

def _noise_transfer(nbar: float, dim: int, n_radial: int) -> list[np.ndarray]:
    """Per-diagonal transfer matrices of the additive Gaussian noise channel.

    Writing beta = sqrt(nbar u) e^{i phi}, the noise average is
    int_0^inf du e^{-u} int dphi/2pi D(beta) rho D(beta)^dag.  The phi
    integral is done exactly: D(beta) = R(phi) D(|beta|) R(phi)^dag with
    R the phase rotation, so it keeps only terms whose Fock-index
    differences match, and the q-th diagonal of the output depends on the
    q-th diagonal of the input alone.  The u integral is Gauss-Laguerre.
    """
    u, w = roots_laguerre(n_radial)
    disp = displacement_batch(np.sqrt(nbar * u), dim).real
    return [
        np.einsum("r,rij,rij->ij", w, disp[:, : dim - q, : dim - q], disp[:, q:, q:])
        for q in range(dim)
    ]


def _apply_transfer(transfer: list[np.ndarray], rho: np.ndarray) -> np.ndarray:
    d = rho.shape[0]
    out = np.zeros((d, d), dtype=complex)
    rows = np.arange(d)
    for q, mat in enumerate(transfer):
        i = rows[: d - q]
        vals = mat @ rho[i, i + q]
        out[i, i + q] = vals
        if q:
            out[i + q, i] = vals.conj()
    return out


def gaussian_noise_channel(
    rho: DensityMatrix,
    nbar: float,
    *,
    tol: float = QUADRATURE_TOLERANCE,
    start_radial: int = 16,
    max_radial: int = 512,
) -> DensityMatrix:
    """int d^2beta exp(-|beta|^2/nbar)/(pi nbar) D(beta) rho D(beta)^dag.

    The radial node count doubles until consecutive results agree to ``tol``
    in trace distance.
    """
    if nbar < 0:
        raise ValueError(f"noise photon number must be >= 0, got {nbar}")
    if nbar == 0.0:
        return DensityMatrix(rho.elems)
    d = rho.dim
    n_radial = start_radial
    prev = _apply_transfer(_noise_transfer(nbar, d, n_radial), rho.elems)
    while n_radial < max_radial:
        n_radial *= 2
        cur = _apply_transfer(_noise_transfer(nbar, d, n_radial), rho.elems)
        if trace_distance(DensityMatrix(cur), DensityMatrix(prev)) < tol:
            return DensityMatrix(0.5 * (cur + cur.conj().T))
        prev = cur
    raise QuadratureNotConverged(
        f"noise average did not settle to {tol:g} with {max_radial} radial nodes (dim={d}, nbar={nbar})"
    )


def teleport_cutoff(mean_photons: float, nbar: float, tail: float = TAIL_TOLERANCE) -> int:
    """Cutoff for a teleported state: the mean-photon rule plus room for the thermal tail.

    The rule on its own undersizes noisy outputs, whose populations decay
    only geometrically with ratio nbar/(1 + nbar).
    """
    need = cutoff_rule(mean_photons + nbar)
    if nbar > 0:
        need = max(need, cutoff_rule(mean_photons) + math.ceil(math.log(tail) / math.log(nbar / (1.0 + nbar))))
    return need


def teleport_average(rho_in: DensityMatrix, params: ChannelParams, **quad) -> DensityMatrix:
    """Outcome-averaged teleportation output: rho_in smeared by thermal noise ``params.nbar``.

    Raises ``CutoffTooSmall`` if the cutoff is below the rule for the output
    mean photon number, or if more than 1e-6 of the trace leaks out of it.
    """
    nbar = params.nbar
    need = cutoff_rule(rho_in.mean_photons() + nbar)
    if rho_in.dim < need:
        raise CutoffTooSmall(f"teleported state needs dim >= {need}, got {rho_in.dim}")
    out = gaussian_noise_channel(rho_in, nbar, **quad)
    leak = rho_in.trace - out.trace
    if abs(leak) > AVERAGE_TRACE_TOLERANCE:
        raise CutoffTooSmall(f"teleported state leaks {leak:.3g} of its trace at dim={rho_in.dim}")
    return out


# ---------------------------------------------------------------------------
# teleportation, single outcome (coherent input)

def outcome_mean(alpha_in: complex, outcome: MeasurementOutcome, params: ChannelParams) -> complex:
    """Displacement of the per-outcome state: mu + k (alpha - mu)."""
    mu = outcome.mu
    return mu + params.outcome_gain * (complex(alpha_in) - mu)


def teleport_outcome(
    alpha_in: complex, outcome: MeasurementOutcome, params: ChannelParams, dim: int
) -> DensityMatrix:
    """Bob's state after correcting for ``outcome``, given a coherent input ``alpha_in``.

    A thermal state with ``params.ntilde`` photons displaced to
    :func:`outcome_mean`.
    """
    shift = outcome_mean(alpha_in, outcome, params)
    ntilde = params.ntilde
    need = cutoff_rule(abs(shift) ** 2 + ntilde)
    if dim < need:
        raise CutoffTooSmall(f"per-outcome state needs dim >= {need}, got {dim}")
    out = displaced_thermal(shift, ntilde, dim)
    if abs(1.0 - out.trace) > AVERAGE_TRACE_TOLERANCE:
        raise CutoffTooSmall(f"per-outcome state leaks {1 - out.trace:.3g} of its trace at dim={dim}")
    return out


def outcome_density(alpha_in: complex, outcome: MeasurementOutcome, params: ChannelParams) -> float:
    """Probability density of ``outcome`` per unit dx dp for a coherent input.

    Vanishes identically at lambda = 1, where the distribution becomes flat.
    """
    c = params.outcome_precision
    return c / (2.0 * math.pi) * math.exp(-c * abs(complex(alpha_in) - outcome.mu) ** 2)


def outcome_average(
    alpha_in: complex, params: ChannelParams, dim: int, n_nodes: int = 48, width: float = 6.0
) -> DensityMatrix:
    """Average :func:`teleport_outcome` over :func:`outcome_density` by brute force.

    Tensor Gauss-Legendre rule in (x, p) on the box |mu - alpha| <=
    width sqrt(1 + nbar) per quadrature; independent of the noise-channel
    route used by :func:`teleport_average`.
    """
    alpha_in = complex(alpha_in)
    half = math.sqrt(2.0) * width * math.sqrt(1.0 + params.nbar)
    nodes, weights = roots_legendre(n_nodes)
    xs = math.sqrt(2.0) * alpha_in.real + half * nodes
    ps = math.sqrt(2.0) * alpha_in.imag + half * nodes
    w1 = half * weights
    thermal = thermal_diagonal(params.ntilde, dim)
    shifts, wts = [], []
    for x, wx in zip(xs, w1):
        for p, wp in zip(ps, w1):
            o = MeasurementOutcome(float(x), float(p))
            shifts.append(outcome_mean(alpha_in, o, params))
            wts.append(wx * wp * outcome_density(alpha_in, o, params))
    shifts = np.array(shifts)
    wts = np.array(wts)
    out = np.zeros((dim, dim), dtype=complex)
    for s in range(0, shifts.size, 256):
        disp = displacement_batch(shifts[s : s + 256], dim)
        left = disp * thermal[None, None, :] * wts[s : s + 256, None, None]
        n = disp.shape[0]
        out += left.transpose(1, 0, 2).reshape(dim, n * dim) @ disp.transpose(1, 0, 2).reshape(dim, n * dim).conj().T
    return DensityMatrix(0.5 * (out + out.conj().T))


# ---------------------------------------------------------------------------
# position-basis kernel of the teleportation CP map

def _kernel_F(x, y, a, b):
    return (x + a * y) * (x - b * y) + (y + a * x) * (y - b * x)


def kernel_G(args: KernelArgs, params: ChannelParams, prefactor: str = "corrected"):
    """Position-basis kernel G(y1, y2, z1, z2) of the lossy teleportation map.

    ``prefactor="corrected"`` uses 1/(2 pi^2 sqrt(nbar nbar_minus)), which
    makes the T = 1 kernel factorize exactly into :func:`kernel_g_factor`
    products.  ``prefactor="single_nbar"`` uses 1/(2 pi^2 nbar).
    """
    if params.T == 0.0:
        raise InvalidTransmittance("kernel is defined for T > 0")
    lam, T = params.lam, params.T
    if lam == 1.0:
        raise InvalidSqueezing("kernel is singular at lambda = 1")
    nb, nbm = params.nbar, params.nbar_minus
    if prefactor == "corrected":
        pre = 1.0 / (2.0 * math.pi**2 * math.sqrt(nb * nbm))
    elif prefactor == "single_nbar":
        pre = 1.0 / (2.0 * math.pi**2 * nb)
    else:
        raise ValueError(f"unknown prefactor variant {prefactor!r}")
    a = lam * (1.0 - T) / (1.0 + lam * T)
    b = lam * (1.0 - T) / (1.0 - lam * T)
    y1, y2, z1, z2 = (np.asarray(v, dtype=float) for v in (args.y1, args.y2, args.z1, args.z2))
    cross = 0.5 * lam**2 * (1.0 - T) ** 2
    bracket = (
        0.25 * (1.0 + lam * T) ** 2 * _kernel_F(z1 - y1, z2 - y2, a, b)
        + 0.25 * (1.0 - lam * T) ** 2 * _kernel_F(z1 + y1, z2 + y2, a, b)
        - cross * _kernel_F(y1, y2, a, b)
        - cross * _kernel_F(z1, z2, a, b)
    )
    scale = (1.0 - (lam * T) ** 2) / ((1.0 - lam**2) ** 2 * nb * nbm)
    value = pre * np.exp(-scale * bracket)
    return float(value) if value.ndim == 0 else value


def kernel_g_factor(x, y, r: float):
    """Single-mode factor of the T = 1 kernel.

    (1/(pi sqrt 2)) exp[-(e^{2r}/4)(x - y)^2 - (e^{-2r}/4)(x + y)^2]
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    value = np.exp(-0.25 * math.exp(2 * r) * (x - y) ** 2 - 0.25 * math.exp(-2 * r) * (x + y) ** 2)
    value = value / (math.pi * math.sqrt(2.0))
    return float(value) if value.ndim == 0 else value


# ---------------------------------------------------------------------------
# chained teleportation

class IterationResult(NamedTuple):
    iterated: float      # n teleportations at T each: n * nbar(T)
    single_hop: float    # one teleportation at T^n: nbar(T^n)


def iterate_teleport_nbar(params: ChannelParams, n: int) -> IterationResult:
    """Added noise of ``n`` chained hops versus one hop over the whole distance."""
    if n < 1:
        raise ValueError(f"number of hops must be >= 1, got {n}")
    single = ChannelParams(params.r, params.T**n).nbar
    return IterationResult(n * params.nbar, single)
