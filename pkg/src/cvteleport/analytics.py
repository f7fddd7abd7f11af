"""Closed-form fidelities, nonclassical depths and the channel crossover."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

from .channels import ChannelParams, check_transmittance, teleport_average, teleport_cutoff
from .errors import InvalidSpec, InvalidTau
from .fock import MIN_CAT_AMPLITUDE, StateSpec, build_state, default_cutoff, fidelity

# |1 - nbar| below this takes the r = 0 branch of the Fock-state fidelity
NBAR_ONE_TOLERANCE = 1e-9
DISCRIMINANT_CLAMP = 1e-14
MIN_WINDOW_WIDTH = 1e-7

# values quoted in the experimental discussion, rounded to two digits there
QUOTED_SQUEEZED_DEPTH_6DB = 0.38
QUOTED_T_THRESHOLD_6DB = 0.83
QUOTED_F_COHERENT = 0.62
EXPERIMENT_F_COHERENT = (0.58, 0.02)


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 <= tau <= 1.0:
        raise InvalidTau(f"nonclassical depth must lie in [0, 1], got {tau}")
    return tau


def _check_cat(alpha: complex) -> float:
    a2 = abs(alpha) ** 2
    if abs(alpha) < MIN_CAT_AMPLITUDE:
        raise InvalidSpec(f"cat amplitude |alpha|={abs(alpha):.3g} is below {MIN_CAT_AMPLITUDE}")
    return a2


def _sinh_ratio(a: float, b: float) -> float:
    """sinh(a)/sinh(b) for 0 <= a <= b, b > 0, without overflow."""
    if a == 0.0:
        return 0.0
    return math.exp(a - b) * math.expm1(-2.0 * a) / math.expm1(-2.0 * b)


# ---------------------------------------------------------------------------
# Legendre polynomials

def legendre(n: int, x: float) -> float:
    """P_n(x) by the three-term recurrence (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    p_prev, p = 1.0, x
    if n == 0:
        return p_prev
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p


def _scaled_legendre(n: int, t: float, xt: float) -> float:
    """t^n P_n(x) given t and the product x t.

    Running the recurrence on q_k = t^k P_k(x) keeps every term finite as
    x -> infinity with x t fixed::

        (k+1) q_{k+1} = (2k+1) (x t) q_k - k t^2 q_{k-1}
    """
    q_prev, q = 1.0, xt
    if n == 0:
        return q_prev
    t2 = t * t
    for k in range(1, n):
        q_prev, q = q, ((2 * k + 1) * xt * q - k * t2 * q_prev) / (k + 1)
    return q


# ---------------------------------------------------------------------------
# fidelities

def fidelity_coherent_from_nbar(nbar: float) -> float:
    return 1.0 / (1.0 + nbar)


def fidelity_coherent_tel(params: ChannelParams) -> float:
    """(1 + lambda) / (2 (1 + lambda - lambda T)), which equals 1/(1 + nbar)."""
    lam, T = params.lam, params.T
    return (1.0 + lam) / (2.0 * (1.0 + lam - lam * T))


def fock_r0_limit(n: int) -> float:
    """C(2n, n) / (2 4^n), the Fock-state fidelity at nbar = 1."""
    return math.comb(2 * n, n) / (2.0 * 4.0**n)


def fidelity_fock_from_nbar(n: int, nbar: float) -> float:
    """(1/(1+nb)) ((1-nb)/(1+nb))^n P_n((1+nb^2)/(1-nb^2))."""
    if n < 0 or int(n) != n:
        raise InvalidSpec(f"photon number must be a non-negative integer, got {n}")
    n = int(n)
    if abs(1.0 - nbar) < NBAR_ONE_TOLERANCE:
        return fock_r0_limit(n)
    t = (1.0 - nbar) / (1.0 + nbar)
    xt = (1.0 + nbar * nbar) / (1.0 + nbar) ** 2
    return _scaled_legendre(n, t, xt) / (1.0 + nbar)


def fidelity_fock_tel(n: int, params: ChannelParams) -> float:
    return fidelity_fock_from_nbar(n, params.nbar)


def fidelity_cat_from_nbar(alpha: complex, nbar: float) -> float:
    a2 = _check_cat(alpha)
    ratio = _sinh_ratio((1.0 - nbar) / (1.0 + nbar) * a2, a2)
    return (1.0 + ratio * ratio) / (2.0 * (1.0 + nbar))


def fidelity_cat_tel(alpha: complex, params: ChannelParams) -> float:
    """Odd cat state through the teleportation channel."""
    return fidelity_cat_from_nbar(alpha, params.nbar)


def fidelity_fock_dir(n: int, T: float) -> float:
    """T^n. T = 0 is allowed and gives 0 for n >= 1."""
    T = check_transmittance(T)
    if n < 0 or int(n) != n:
        raise InvalidSpec(f"photon number must be a non-negative integer, got {n}")
    return T ** int(n)


def fidelity_cat_dir(alpha: complex, T: float) -> float:
    """[sinh(sqrt(T)|a|^2)/sinh(|a|^2)]^2 cosh((1-T)|a|^2).

    Evaluated as exp(-(1-sqrt T)^2 |a|^2) times bounded factors so that large
    amplitudes do not overflow.
    """
    T = check_transmittance(T)
    a2 = _check_cat(alpha)
    if T == 0.0:
        return 0.0
    s = math.sqrt(T)
    shrink = math.expm1(-2.0 * s * a2) / math.expm1(-2.0 * a2)
    cosh_part = 0.5 * (1.0 + math.exp(-2.0 * (1.0 - T) * a2))
    return math.exp(-((1.0 - s) ** 2) * a2) * shrink * shrink * cosh_part


def fidelity_generic_tel(spec: StateSpec, params: ChannelParams, dim: Optional[int] = None) -> float:
    """Fock-basis overlap <psi| teleport_average(|psi><psi|) |psi>."""
    if not spec.is_pure:
        raise InvalidSpec("fidelity needs a pure input state")
    if dim is None:
        dim = max(default_cutoff(spec), teleport_cutoff(spec.mean_photon_number, params.nbar))
    rho = build_state(spec, dim)
    return fidelity(rho, teleport_average(rho, params))


def fidelity_closed_form(spec: StateSpec, channel: Union[ChannelParams, float]) -> float:
    """Closed-form fidelity for coherent, Fock and cat inputs.

    ``channel`` is :class:`ChannelParams` for teleportation or a bare
    transmittance for direct transmission.  Direct transmission of a
    coherent state has no closed form here.
    """
    if isinstance(channel, ChannelParams):
        if spec.kind == "coherent":
            return fidelity_coherent_tel(channel)
        if spec.kind == "fock":
            return fidelity_fock_tel(spec.photon_number, channel)
        if spec.kind == "cat":
            return fidelity_cat_tel(spec.amplitude, channel)
    else:
        if spec.kind == "fock":
            return fidelity_fock_dir(spec.photon_number, channel)
        if spec.kind == "cat":
            return fidelity_cat_dir(spec.amplitude, channel)
    raise InvalidSpec(f"no closed-form fidelity for a {spec.kind} input on this channel")


@dataclass(frozen=True)
class FidelityReport:
    input: StateSpec
    channel: Union[ChannelParams, float]
    value: float
    method: str  # "closed_form" or "oracle"


# ---------------------------------------------------------------------------
# nonclassical depth

def squeezed_depth(xi_abs: float) -> float:
    """(1 - e^{-2|xi|}) / 2; equivalently tanh|xi| / (1 + tanh|xi|)."""
    return -0.5 * math.expm1(-2.0 * xi_abs)


def depth_of_state(spec: StateSpec) -> float:
    if spec.kind in ("coherent", "thermal"):
        return 0.0
    if spec.kind == "fock":
        return 0.0 if spec.photon_number == 0 else 1.0
    if spec.kind == "cat":
        return 1.0
    if spec.kind == "squeezed_vacuum":
        return squeezed_depth(abs(spec.squeezing))
    raise InvalidSpec(f"unknown state kind {spec.kind!r}")


def depth_transfer_tel(tau_in: float, params: ChannelParams) -> float:
    """max(tau_in - nbar, 0)."""
    tau_in = _check_tau(tau_in)
    return min(1.0, max(tau_in - params.nbar, 0.0))


def depth_transfer_dir(tau_in: float, T: float) -> float:
    """tau_in T for direct transmission at transmittance ``T``."""
    return _check_tau(tau_in) * check_transmittance(T)


def depth_threshold_r(tau_in: float, T: float) -> float:
    """Squeezing above which teleportation keeps some depth; ``inf`` if none suffices."""
    tau_in = _check_tau(tau_in)
    T = check_transmittance(T)
    if T == 0.0 or T <= 1.0 - tau_in:
        return math.inf
    return -0.5 * math.log1p(-(1.0 - tau_in) / T)


def minimal_transmittance(tau_in: float, r: float) -> float:
    """Smallest T with depth_transfer_tel > 0 (exclusive bound); ``inf`` if T <= 1 cannot reach it."""
    tau_in = _check_tau(tau_in)
    c = -math.expm1(-2.0 * r)
    if c == 0.0:
        return math.inf
    t_min = (1.0 - tau_in) / c
    return t_min if t_min < 1.0 else math.inf


def depth_difference(tau_in: float, r: float, T: float) -> float:
    """Teleported depth at T minus directly transmitted depth at T^2, as the quadratic in T."""
    c = -math.expm1(-2.0 * r)
    return -tau_in * T * T + c * T + tau_in - 1.0


def crossover(tau_in: float, r: float) -> Optional[tuple[float, float]]:
    """Open interval of T in [0, 1] where teleportation keeps more depth than direct transmission.

    Direct transmission is taken over the full distance, transmittance T^2.
    Returns ``None`` when there is no such interval, including tangential
    ones narrower than 1e-7.
    """
    tau_in = _check_tau(tau_in)
    if r < 0:
        raise ValueError(f"squeezing must be >= 0, got {r}")
    if tau_in == 0.0:
        return None
    c = -math.expm1(-2.0 * r)
    disc = c * c - 4.0 * tau_in * (1.0 - tau_in)
    if abs(disc) < DISCRIMINANT_CLAMP:
        disc = 0.0
    if disc < 0.0:
        return None
    # larger root directly, smaller one from the product of roots (1 - tau)/tau;
    # (c - sqrt(disc)) / (2 tau) cancels catastrophically for small tau
    q = 0.5 * (c + math.sqrt(disc))
    if q == 0.0:
        return None
    lo = max((1.0 - tau_in) / q, 0.0)
    hi = min(q / tau_in, 1.0)
    if hi - lo < MIN_WINDOW_WIDTH:
        return None
    return lo, hi


def crossover_bound_r(tau_in: float) -> float:
    """Smallest r for which a crossover window exists at ``tau_in``; ``inf`` for tau_in <= 1/2."""
    tau_in = _check_tau(tau_in)
    s = 2.0 * math.sqrt(tau_in * (1.0 - tau_in))
    if tau_in <= 0.5 or s >= 1.0:
        return math.inf
    return -0.5 * math.log1p(-s)


@dataclass(frozen=True)
class DepthReport:
    tau_in: float
    tau_tel: float
    tau_dir: float
    tau_diff: float
    r_threshold: float
    T_window: Optional[tuple[float, float]]


def depth_report(tau_in: float, params: ChannelParams, T_direct: Optional[float] = None) -> DepthReport:
    """Depth bookkeeping for one channel setting.

    Direct transmission defaults to the full-distance transmittance T^2.
    """
    if T_direct is None:
        T_direct = params.T**2
    tel = depth_transfer_tel(tau_in, params)
    direct = depth_transfer_dir(tau_in, T_direct)
    return DepthReport(
        tau_in=tau_in,
        tau_tel=tel,
        tau_dir=direct,
        tau_diff=tel - direct,
        r_threshold=depth_threshold_r(tau_in, params.T),
        T_window=crossover(tau_in, params.r),
    )
