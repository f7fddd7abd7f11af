import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from cvteleport.channels import (
    ChannelParams,
    KernelArgs,
    MeasurementOutcome,
    direct_transmit,
    gaussian_noise_channel,
    iterate_teleport_nbar,
    kernel_G,
    kernel_g_factor,
    loss_kraus,
    loss_map,
    outcome_average,
    outcome_density,
    outcome_mean,
    teleport_average,
    teleport_cutoff,
    teleport_outcome,
)
from cvteleport.errors import CutoffTooSmall, InvalidSqueezing, InvalidTransmittance, QuadratureNotConverged
from cvteleport.fock import DensityMatrix, StateSpec, build_state, displaced_thermal, fidelity, thermal_state, trace_distance

import oracles

transmittances = st.floats(0.0, 1.0)
squeezings = st.floats(0.0, 3.0)
seeds = st.integers(0, 2**32 - 1)


def random_density(seed, dim=8, rank=3):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


# ---------------------------------------------------------------------------
# parameters

def test_nbar_forms_agree():
    for r in (0.0, 0.34, 1.0, 3.0):
        for T in (0.0, 0.5, 0.81, 1.0):
            p = ChannelParams(r, T)
            assert p.nbar == pytest.approx(p.nbar_from_lambda, abs=1e-14)
            assert p.nbar == pytest.approx(oracles.nbar(r, T), abs=1e-14)


def test_perfect_squeezing_and_from_lambda():
    p = ChannelParams(math.inf, 0.8)
    assert p.lam == 1.0 and p.nbar == pytest.approx(0.2)
    assert p.outcome_precision == 0.0
    assert ChannelParams.from_lambda(1.0, 0.8).r == math.inf
    assert ChannelParams.from_lambda(math.tanh(0.7), 0.5).r == pytest.approx(0.7)


@pytest.mark.parametrize("T", [-0.1, 1.1, math.nan])
def test_invalid_transmittance(T):
    with pytest.raises(InvalidTransmittance):
        ChannelParams(0.5, T)


def test_invalid_squeezing():
    with pytest.raises(InvalidSqueezing):
        ChannelParams(-0.1, 0.5)
    with pytest.raises(InvalidSqueezing):
        ChannelParams.from_lambda(1.5, 0.5)


def test_zero_transmittance_leaves_nothing():
    p = ChannelParams(1.0, 0.0)
    assert p.nbar == 1.0 and p.ntilde == 0.0 and p.outcome_gain == 0.0


def test_measurement_outcome_round_trip():
    o = MeasurementOutcome.from_mu(0.3 - 1.2j)
    assert o.mu == pytest.approx(0.3 - 1.2j)


# ---------------------------------------------------------------------------
# loss channel

@pytest.mark.parametrize("T", [0.0, 0.3, 0.81, 1.0])
def test_loss_map_matches_beam_splitter(T):
    rho = random_density(7, dim=7)
    assert np.allclose(loss_map(rho, T).elems, oracles.stinespring_loss(rho.elems, T), atol=1e-12)


def test_kraus_operators_are_complete_and_reproduce_map():
    T, dim = 0.6, 9
    ks = loss_kraus(T, dim)
    assert np.allclose(sum(k.conj().T @ k for k in ks), np.eye(dim), atol=1e-12)
    rho = random_density(3, dim=dim)
    assert np.allclose(sum(k @ rho.elems @ k.conj().T for k in ks), loss_map(rho, T).elems, atol=1e-13)


@given(seeds, transmittances)
def test_loss_map_is_trace_preserving_and_positive(seed, T):
    out = loss_map(random_density(seed), T)
    assert out.trace == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(out.elems).min() > -1e-12


@given(seeds, seeds, st.floats(0.0, 1.0), transmittances)
def test_loss_map_is_linear(s1, s2, w, T):
    a, b = random_density(s1), random_density(s2)
    mix = DensityMatrix(w * a.elems + (1 - w) * b.elems)
    lhs = loss_map(mix, T).elems
    rhs = w * loss_map(a, T).elems + (1 - w) * loss_map(b, T).elems
    assert np.allclose(lhs, rhs, atol=1e-13)


@given(seeds, transmittances, transmittances)
def test_loss_map_composes(seed, T1, T2):
    rho = random_density(seed)
    assert np.allclose(loss_map(loss_map(rho, T1), T2).elems, loss_map(rho, T1 * T2).elems, atol=1e-12)


def test_loss_shrinks_coherent_amplitude():
    alpha, T = 1.5 - 0.5j, 0.64
    rho = build_state(StateSpec.coherent(alpha), 40)
    target = build_state(StateSpec.coherent(math.sqrt(T) * alpha), 40)
    assert trace_distance(loss_map(rho, T), target) < 1e-10
    assert direct_transmit(rho, T).elems == pytest.approx(loss_map(rho, T).elems)


# ---------------------------------------------------------------------------
# noise channel and outcome-averaged teleportation

@pytest.mark.parametrize("nbar", [0.1, 0.6, 1.0])
def test_noise_on_vacuum_is_thermal(nbar):
    vac = build_state(StateSpec.fock(0), 50)
    assert trace_distance(gaussian_noise_channel(vac, nbar), thermal_state(nbar, 50)) < 1e-6


def test_noise_on_coherent_is_displaced_thermal():
    alpha, nbar, dim = 1 + 1j, 0.4, 50
    out = gaussian_noise_channel(build_state(StateSpec.coherent(alpha), dim), nbar)
    assert trace_distance(out, displaced_thermal(alpha, nbar, dim)) < 1e-6


def test_noise_photon_numbers_add():
    rho = build_state(StateSpec.fock(2), 60)
    two_step = gaussian_noise_channel(gaussian_noise_channel(rho, 0.2), 0.3)
    assert trace_distance(two_step, gaussian_noise_channel(rho, 0.5)) < 1e-5


def test_noise_quadrature_reports_non_convergence():
    rho = build_state(StateSpec.fock(3), 60)
    with pytest.raises(QuadratureNotConverged):
        gaussian_noise_channel(rho, 0.9, tol=1e-30, max_radial=32)


@given(seeds, st.floats(0.0, 1.0))
def test_noise_channel_is_positive(seed, nbar):
    rho = random_density(seed, dim=8).embed(60)
    out = gaussian_noise_channel(rho, nbar)
    assert np.linalg.eigvalsh(out.elems).min() > -1e-9
    assert out.trace == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("r,T", [(0.34, 0.81), (0.0, 1.0), (2.0, 0.6)])
def test_teleported_coherent_fidelity(r, T):
    params = ChannelParams(r, T)
    dim = teleport_cutoff(1.0, params.nbar)
    rho = build_state(StateSpec.coherent(1.0), dim)
    assert fidelity(rho, teleport_average(rho, params)) == pytest.approx(1 / (1 + params.nbar), abs=1e-9)


def test_teleport_average_rejects_small_cutoff():
    rho = build_state(StateSpec.fock(3), 8)
    with pytest.raises(CutoffTooSmall):
        teleport_average(rho, ChannelParams(0.2, 0.6))
    rho = build_state(StateSpec.coherent(1.0), 22)
    with pytest.raises(CutoffTooSmall):
        teleport_average(rho, ChannelParams(0.0, 0.8))


# ---------------------------------------------------------------------------
# single outcomes

def test_outcome_density_is_normalised():
    params, alpha = ChannelParams(0.7, 0.8), 1.0 + 0.3j
    total, _ = integrate.dblquad(
        lambda p, x: outcome_density(alpha, MeasurementOutcome(x, p), params), -12, 12, -12, 12
    )
    assert total == pytest.approx(1.0, abs=1e-8)


def test_outcome_state_has_predicted_mean():
    params, alpha, dim = ChannelParams(0.7, 0.8), 1.0, 30
    o = MeasurementOutcome(0.4, -0.9)
    rho = teleport_outcome(alpha, o, params, dim)
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    assert np.trace(rho.elems @ a) == pytest.approx(outcome_mean(alpha, o, params), abs=1e-8)
    mu = o.mu
    expected = mu + math.tanh(0.7) * 0.8 / (1 - math.tanh(0.7) ** 2 * 0.2) * (alpha - mu)
    assert outcome_mean(alpha, o, params) == pytest.approx(expected)


def test_outcome_average_reproduces_channel():
    params, dim = ChannelParams(0.7, 0.8), 30
    rho = build_state(StateSpec.coherent(1.0), dim)
    assert trace_distance(outcome_average(1.0, params, dim), teleport_average(rho, params)) < 1e-3


def test_teleport_outcome_rejects_small_cutoff():
    with pytest.raises(CutoffTooSmall):
        teleport_outcome(3.0, MeasurementOutcome(0, 0), ChannelParams(0.7, 0.8), 12)


# ---------------------------------------------------------------------------
# kernel

grid = np.linspace(-1.5, 1.5, 5)


@pytest.mark.parametrize("r", [0.0, 0.2, 0.7, 2.0])
def test_kernel_factorizes_at_unit_transmittance(r):
    y1, y2, z1, z2 = np.meshgrid(grid, grid, grid, grid, indexing="ij")
    G = kernel_G(KernelArgs(y1, y2, z1, z2), ChannelParams(r, 1.0))
    prod = kernel_g_factor(z1, y1, r) * kernel_g_factor(z2, y2, r)
    assert np.max(np.abs(G / prod - 1)) < 1e-9


def test_kernel_origin_value_and_prefactors():
    assert kernel_G(KernelArgs(0, 0, 0, 0), ChannelParams(0.7, 1.0)) == pytest.approx(1 / (2 * math.pi**2))
    p = ChannelParams(0.7, 0.8)
    ratio = kernel_G(KernelArgs(0.1, 0.2, 0.3, 0.4), p, "single_nbar") / kernel_G(KernelArgs(0.1, 0.2, 0.3, 0.4), p)
    assert ratio == pytest.approx(math.sqrt(p.nbar_minus / p.nbar))


@given(st.tuples(*[st.floats(-2, 2)] * 4), squeezings, st.floats(0.05, 1.0))
def test_kernel_is_symmetric_under_mode_swap(v, r, T):
    p = ChannelParams(min(r, 5.0), T)
    y1, y2, z1, z2 = v
    assert kernel_G(KernelArgs(y1, y2, z1, z2), p) == pytest.approx(kernel_G(KernelArgs(y2, y1, z2, z1), p), rel=1e-12)


def test_kernel_domain_errors():
    with pytest.raises(InvalidTransmittance):
        kernel_G(KernelArgs(0, 0, 0, 0), ChannelParams(0.5, 0.0))
    with pytest.raises(InvalidSqueezing):
        kernel_G(KernelArgs(0, 0, 0, 0), ChannelParams(math.inf, 0.5))
    with pytest.raises(ValueError):
        kernel_G(KernelArgs(0, 0, 0, 0), ChannelParams(0.5, 0.5), prefactor="other")


# ---------------------------------------------------------------------------
# chained teleportation

@given(squeezings, transmittances, st.integers(1, 10))
def test_one_long_hop_is_no_noisier_than_many_short(r, T, n):
    it = iterate_teleport_nbar(ChannelParams(r, T), n)
    assert it.single_hop <= it.iterated + 1e-12


def test_iteration_needs_a_hop():
    with pytest.raises(ValueError):
        iterate_teleport_nbar(ChannelParams(1.0, 0.5), 0)
