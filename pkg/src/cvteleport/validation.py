"""Closed form versus Fock-oracle equivalence suites.

Each suite returns a :class:`SuiteReport` whose JSON form is
``{suite, checks: [{name, expected, actual, tolerance, pass}], pass}``.
The CLI ``oracle-validate`` command and the acceptance tests both run these.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import analytics as an
from .channels import (
    ChannelParams,
    KernelArgs,
    MeasurementOutcome,
    iterate_teleport_nbar,
    kernel_G,
    kernel_g_factor,
    loss_map,
    outcome_average,
    teleport_average,
    teleport_cutoff,
    teleport_outcome,
)
from .fock import (
    StateSpec,
    build_state,
    default_cutoff,
    displace,
    displaced_thermal,
    fidelity,
    thermal_state,
    trace_distance,
)
from .phase_space import depth_estimate, gaussian_params_from_density

GRID_R = (0.2, 0.7, 2.0)
GRID_T = (0.6, 0.8, 1.0)
CAT_ALPHA = math.sqrt(6.0)
MAX_CUTOFF = 80

TOLERANCES = {
    "fidelity": 1e-3,
    "direct_fock": 1e-6,
    "direct_cat": 1e-3,
    "outcome_average": 1e-3,
    "strong_squeezing": 0.02,
    "kernel": 1e-9,
    "depth": 2e-3,
}


@dataclass
class Check:
    name: str
    expected: object
    actual: object
    tolerance: Optional[float]
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "expected": _jsonable(self.expected),
            "actual": _jsonable(self.actual),
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
        }


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, (np.floating, np.integer)):
        return _jsonable(value.item())
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


def close(name: str, expected: float, actual: float, tol: float) -> Check:
    return Check(name, float(expected), float(actual), tol, bool(abs(actual - expected) <= tol))


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_deviation(self) -> Optional[float]:
        devs = [
            abs(c.actual - c.expected)
            for c in self.checks
            if isinstance(c.actual, float) and isinstance(c.expected, float)
        ]
        return max(devs) if devs else None

    def to_dict(self) -> dict:
        return {"suite": self.suite, "checks": [c.to_dict() for c in self.checks], "pass": self.passed}


def _oracle_dim(spec: StateSpec, nbar: float, cutoff: Optional[int]) -> int:
    if cutoff is not None:
        return cutoff
    return min(MAX_CUTOFF, max(default_cutoff(spec), teleport_cutoff(spec.mean_photon_number, nbar)))


def fidelity_inputs() -> list[tuple[str, StateSpec]]:
    return [
        ("coherent a=1", StateSpec.coherent(1.0)),
        ("fock n=1", StateSpec.fock(1)),
        ("fock n=2", StateSpec.fock(2)),
        ("cat |a|^2=6", StateSpec.cat(CAT_ALPHA)),
    ]


def suite_fidelity(cutoff: Optional[int] = None, tol: Optional[float] = None) -> SuiteReport:
    """Teleportation fidelities: Fock-basis overlap against the closed forms."""
    tol = TOLERANCES["fidelity"] if tol is None else tol
    report = SuiteReport("fidelity")
    for label, spec in fidelity_inputs():
        for r in GRID_R:
            for T in GRID_T:
                params = ChannelParams(r, T)
                rho = build_state(spec, _oracle_dim(spec, params.nbar, cutoff))
                oracle = fidelity(rho, teleport_average(rho, params))
                closed = an.fidelity_closed_form(spec, params)
                report.checks.append(close(f"{label} r={r} T={T}", closed, oracle, tol))
    return report


def suite_direct(cutoff: Optional[int] = None, tol: Optional[float] = None) -> SuiteReport:
    """Direct transmission fidelities T^n and the cat formula against the loss map."""
    report = SuiteReport("direct")
    transmittances = sorted({t for T in GRID_T for t in (T, T * T)})
    for label, spec in fidelity_inputs()[1:]:
        key = "direct_cat" if spec.kind == "cat" else "direct_fock"
        t = TOLERANCES[key] if tol is None else tol
        rho = build_state(spec, _oracle_dim(spec, 0.0, cutoff))
        for T in transmittances:
            oracle = fidelity(rho, loss_map(rho, T))
            report.checks.append(close(f"{label} T={T:g}", an.fidelity_closed_form(spec, T), oracle, t))
    return report


def suite_outcome_average(cutoff: Optional[int] = None, tol: Optional[float] = None) -> SuiteReport:
    """Averaging per-outcome states over the outcome density reproduces teleport_average."""
    tol = TOLERANCES["outcome_average"] if tol is None else tol
    alpha, params = 1.0, ChannelParams(0.7, 0.8)
    spec = StateSpec.coherent(alpha)
    dim = _oracle_dim(spec, params.nbar, cutoff)
    averaged = outcome_average(alpha, params, dim)
    channel = teleport_average(build_state(spec, dim), params)
    closed = displaced_thermal(alpha, params.nbar, dim)
    return SuiteReport(
        "outcome_average",
        [
            close("outcome average vs teleport_average (trace distance)", 0.0, trace_distance(averaged, channel), tol),
            close("teleport_average vs displaced thermal (trace distance)", 0.0, trace_distance(channel, closed), tol),
            close("outcome density normalization", 1.0, averaged.trace, tol),
        ],
    )


def suite_strong_squeezing(cutoff: Optional[int] = None, tol: Optional[float] = None) -> SuiteReport:
    """At lambda = 0.999 Bob's corrected state no longer depends on the outcome."""
    tol = TOLERANCES["strong_squeezing"] if tol is None else tol
    params = ChannelParams.from_lambda(0.999, 0.8)
    alpha = 1.0
    dim = cutoff if cutoff is not None else 40
    reference = thermal_state(1.0 - params.T, dim)
    states = {}
    for mu in (0.0, 2.0, -1.0 + 1.5j):
        out = teleport_outcome(alpha, MeasurementOutcome.from_mu(mu), params, dim)
        states[mu] = displace(out, -alpha)
    report = SuiteReport("strong_squeezing")
    report.checks.append(
        close("outcome mu=0 vs mu=2 (trace distance)", 0.0, trace_distance(states[0.0], states[2.0]), tol)
    )
    for mu, st in states.items():
        report.checks.append(close(f"outcome mu={mu} vs thermal(1-T) (trace distance)", 0.0, trace_distance(st, reference), tol))
    return report


def suite_kernel(tol: Optional[float] = None, **_) -> SuiteReport:
    """T = 1 kernel equals the product of single-mode factors on a 5^4 grid."""
    tol = TOLERANCES["kernel"] if tol is None else tol
    axis = np.linspace(-2.0, 2.0, 5)
    y1, y2, z1, z2 = np.meshgrid(axis, axis, axis, axis, indexing="ij")
    report = SuiteReport("kernel")
    for r in (0.0, 0.2, 0.7, 2.0):
        params = ChannelParams(r, 1.0)
        g = kernel_G(KernelArgs(y1, y2, z1, z2), params)
        prod = kernel_g_factor(z1, y1, r) * kernel_g_factor(z2, y2, r)
        rel = float(np.max(np.abs(g - prod) / np.abs(prod)))
        report.checks.append(close(f"factorization r={r} (max relative error)", 0.0, rel, tol))
        origin = kernel_G(KernelArgs(0.0, 0.0, 0.0, 0.0), params)
        report.checks.append(
            close(f"prefactor r={r} (relative)", 0.0, abs(origin * 2 * math.pi**2 - 1.0), tol)
        )
    params = ChannelParams(0.7, 0.8)
    g = kernel_G(KernelArgs(y1, y2, z1, z2), params)
    swapped = kernel_G(KernelArgs(y2, y1, z2, z1), params)
    report.checks.append(close("swap symmetry at T=0.8", 0.0, float(np.max(np.abs(g - swapped) / g)), tol))
    return report


DEPTH_R = (0.2, 0.5, 0.7, 1.0, 2.0)
DEPTH_T = (0.6, 0.7, 0.8, 0.9, 1.0)


def depth_inputs() -> list[tuple[str, StateSpec]]:
    return [
        ("fock n=1", StateSpec.fock(1)),
        ("fock n=2", StateSpec.fock(2)),
        ("squeezed |xi|=0.35", StateSpec.squeezed_vacuum(0.35)),
        ("squeezed |xi|=0.69", StateSpec.squeezed_vacuum(0.69)),
    ]


def suite_depth(tol: Optional[float] = None, cutoff: Optional[int] = None) -> SuiteReport:
    """Numeric depth after teleportation smoothing against max(tau_in - nbar, 0).

    Also checks the direct-channel rule tau_in T for squeezed inputs using
    Gaussian parameters read off the Fock-basis loss-map output.
    """
    tol = TOLERANCES["depth"] if tol is None else tol
    report = SuiteReport("depth")
    for label, spec in depth_inputs():
        tau_in = an.depth_of_state(spec)
        for r in DEPTH_R:
            for T in DEPTH_T:
                params = ChannelParams(r, T)
                numeric = depth_estimate(spec, params.nbar)
                report.checks.append(close(f"{label} r={r} T={T}", an.depth_transfer_tel(tau_in, params), numeric, tol))
    for label, spec in depth_inputs()[2:]:
        tau_in = an.depth_of_state(spec)
        rho = build_state(spec, cutoff)
        for T in DEPTH_T:
            gauss = gaussian_params_from_density(loss_map(rho, T))
            report.checks.append(
                close(f"{label} direct T={T}", an.depth_transfer_dir(tau_in, T), max(-gauss.cov_minus, 0.0), tol)
            )
    return report


CROSSOVER_TAU = np.linspace(0.0, 1.0, 50)
CROSSOVER_R = np.linspace(0.0, 3.0, 50)
SCAN_STEP = 1e-4


def scan_crossover(tau_in: float, r: float, step: float = SCAN_STEP):
    """Brute-force window: T on a fixed grid where teleported depth beats direct depth at T^2."""
    T = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    nbar = 1.0 - (1.0 - math.exp(-2.0 * r)) * T
    diff = np.maximum(tau_in - nbar, 0.0) - tau_in * T * T
    pos = T[diff > 0]
    if pos.size == 0:
        return None
    return float(pos[0]), float(pos[-1])


def suite_crossover(tol: Optional[float] = None, **_) -> SuiteReport:
    """Analytic crossover window against a sign scan at step 1e-4 on a 50 x 50 (tau_in, r) grid."""
    report = SuiteReport("crossover")
    disagreements = []
    for tau in CROSSOVER_TAU:
        for r in CROSSOVER_R:
            window = an.crossover(float(tau), float(r))
            scanned = scan_crossover(float(tau), float(r))
            if (window is None) != (scanned is None):
                disagreements.append((float(tau), float(r), window, scanned))
            elif window is not None:
                lo, hi = window
                s_lo, s_hi = scanned
                inside = lo - 1e-12 <= s_lo and s_hi <= hi + 1e-12
                tight = s_lo - lo <= SCAN_STEP + 1e-12 and hi - s_hi <= SCAN_STEP + 1e-12
                if not (inside and tight):
                    disagreements.append((float(tau), float(r), window, scanned))
    report.checks.append(Check("disagreements on 50x50 grid", 0, len(disagreements), 0, not disagreements))
    exact = all(an.crossover(1.0, float(r)) == (0.0, -math.expm1(-2.0 * float(r))) for r in CROSSOVER_R if r > 0)
    report.checks.append(Check("tau_in=1 window is exactly (0, 1-e^{-2r})", True, exact, None, exact))
    empty = all(an.crossover(float(t), float(r)) is None for t in CROSSOVER_TAU if t < 0.5 for r in CROSSOVER_R)
    report.checks.append(Check("no window for tau_in < 1/2", True, empty, None, empty))
    return report


def suite_iteration(**_) -> SuiteReport:
    """One hop over T^n never adds more noise than n hops over T."""
    violations = 0
    for r in np.linspace(0.0, 3.0, 20):
        for T in np.linspace(0.0, 1.0, 20):
            params = ChannelParams(float(r), float(T))
            for n in range(1, 11):
                res = iterate_teleport_nbar(params, n)
                if res.single_hop > res.iterated:
                    violations += 1
    return SuiteReport("iteration", [Check("violations of nbar(T^n) <= n nbar(T)", 0, violations, 0, violations == 0)])


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "fidelity": suite_fidelity,
    "direct": suite_direct,
    "outcome_average": suite_outcome_average,
    "strong_squeezing": suite_strong_squeezing,
    "kernel": suite_kernel,
    "depth": suite_depth,
    "crossover": suite_crossover,
    "iteration": suite_iteration,
}


def run_suites(names=None, cutoff: Optional[int] = None, tol: Optional[float] = None) -> list[SuiteReport]:
    names = list(SUITES) if not names else names
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(unknown)}")
    return [SUITES[n](cutoff=cutoff, tol=tol) for n in names]
