import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import poisson

from cvteleport.errors import CutoffTooSmall, DimMismatch, InvalidDensityMatrix, InvalidSpec, NotPure
from cvteleport.fock import (
    DensityMatrix,
    StateSpec,
    build_state,
    coherent_ket,
    cutoff_rule,
    default_cutoff,
    displace,
    displaced_thermal,
    displacement_batch,
    displacement_matrix,
    fidelity,
    thermal_diagonal,
    trace_distance,
)

import oracles

amplitudes = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("alpha", [0.3, 1 + 0.5j, 3 + 1j, -2.2j])
def test_displacement_matches_padded_expm(alpha):
    dim = 60
    assert np.allclose(displacement_matrix(alpha, dim), oracles.expm_displacement(alpha, dim), atol=1e-12)


@pytest.mark.parametrize("alpha", [5.0, 4 - 3j])
def test_displacement_large_amplitude_matches_mpmath(alpha):
    dim = 120
    d = displacement_matrix(alpha, dim)
    for m, n in [(0, 0), (10, 3), (3, 10), (60, 59), (119, 40), (25, 25)]:
        assert d[m, n] == pytest.approx(oracles.mpmath_displacement_element(m, n, alpha), abs=1e-13)


@given(amplitudes)
def test_displacement_adjoint_is_negative_shift(alpha):
    d = displacement_batch([alpha, -alpha], 25)
    assert np.allclose(d[1], d[0].conj().T, atol=1e-13)


@given(amplitudes)
def test_displaced_vacuum_is_coherent(alpha):
    dim = 40
    assert np.allclose(displacement_batch([alpha], dim)[0][:, 0], coherent_ket(alpha, dim), atol=1e-13)


def test_displacement_rejects_small_cutoff():
    with pytest.raises(CutoffTooSmall):
        displacement_matrix(3.0, 20)


@pytest.mark.parametrize("alpha", [0.5, 2.0, 1.5 + 1.5j])
def test_coherent_photon_statistics_are_poisson(alpha):
    rho = build_state(StateSpec.coherent(alpha))
    n = np.arange(rho.dim)
    assert np.allclose(rho.diagonal(), poisson.pmf(n, abs(alpha) ** 2), atol=1e-14)


@pytest.mark.parametrize("xi", [0.35, 0.69, 0.5j, 1.0 * np.exp(0.7j)])
def test_squeezed_vacuum_matches_expm(xi):
    spec = StateSpec.squeezed_vacuum(xi)
    dim = default_cutoff(spec)
    psi = oracles.expm_squeezed_vacuum(xi, dim)
    rho = build_state(spec, dim)
    assert np.allclose(rho.elems, np.outer(psi, psi.conj()), atol=1e-10)
    assert rho.mean_photons() == pytest.approx(math.sinh(abs(xi)) ** 2, abs=1e-6)


def test_odd_cat_has_only_odd_photons():
    rho = build_state(StateSpec.cat(math.sqrt(6.0)))
    assert np.all(rho.diagonal()[::2] < 1e-15)
    assert rho.mean_photons() == pytest.approx(6.0 / math.tanh(6.0), abs=1e-7)
    assert rho.purity == pytest.approx(1.0)


def test_cutoff_rule_values():
    assert cutoff_rule(0.0) == 16
    assert cutoff_rule(6.0) == math.ceil(6 + 6 * math.sqrt(7) + 10)


@pytest.mark.parametrize(
    "spec",
    [
        StateSpec.coherent(1.0),
        StateSpec.coherent(3 - 2j),
        StateSpec.fock(7),
        StateSpec.cat(math.sqrt(6.0)),
        StateSpec.squeezed_vacuum(0.69),
        StateSpec.squeezed_vacuum(1.2),
        StateSpec.thermal(2.0),
    ],
)
def test_default_cutoff_keeps_tail_small(spec):
    rho = build_state(spec)
    assert abs(rho.trace - 1.0) <= 1e-8
    assert rho.dim >= cutoff_rule(spec.mean_photon_number)


def test_build_state_rejects_tight_cutoff():
    with pytest.raises(CutoffTooSmall):
        build_state(StateSpec.cat(math.sqrt(6.0)), 12)
    with pytest.raises(CutoffTooSmall):
        build_state(StateSpec.fock(5), 5)
    with pytest.raises(CutoffTooSmall):
        build_state(StateSpec.thermal(3.0), 10)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="fock", photon_number=-1),
        dict(kind="fock", photon_number=1.5),
        dict(kind="thermal", mean_photons=-0.1),
        dict(kind="cat", amplitude=1e-5),
        dict(kind="coherent"),
        dict(kind="coherent", amplitude=1.0, photon_number=2),
        dict(kind="banana"),
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(InvalidSpec):
        StateSpec(**kwargs)


def test_state_spec_purity_and_means():
    assert StateSpec.fock(3).is_pure and not StateSpec.thermal(1.0).is_pure
    assert StateSpec.squeezed_vacuum(0.5).mean_photon_number == pytest.approx(math.sinh(0.5) ** 2)
    assert StateSpec.coherent(2j).mean_photon_number == pytest.approx(4.0)


def test_density_matrix_validation():
    with pytest.raises(InvalidDensityMatrix):
        DensityMatrix(np.ones((2, 3)))
    with pytest.raises(InvalidDensityMatrix):
        DensityMatrix(np.array([[0.5, 0.3], [0.0, 0.5]])).validate()
    with pytest.raises(InvalidDensityMatrix):
        DensityMatrix(np.diag([1.5, -0.5])).validate()
    with pytest.raises(CutoffTooSmall):
        DensityMatrix(np.diag([0.5, 0.4])).validate()
    rho = DensityMatrix(np.diag([0.5, 0.5]))
    with pytest.raises(ValueError):
        rho.elems[0, 0] = 1.0


def test_embed_pads_with_zeros():
    rho = build_state(StateSpec.fock(1), 4).embed(7)
    assert rho.dim == 7 and rho.elems[1, 1] == 1.0 and rho.trace == pytest.approx(1.0)
    with pytest.raises(DimMismatch):
        rho.embed(3)


def test_fidelity_errors_and_values():
    one = build_state(StateSpec.fock(1), 10)
    vac = build_state(StateSpec.fock(0), 10)
    assert fidelity(one, one) == pytest.approx(1.0)
    assert fidelity(one, vac) == 0.0
    with pytest.raises(NotPure):
        fidelity(build_state(StateSpec.thermal(0.5), 40), one.embed(40))
    with pytest.raises(DimMismatch):
        fidelity(one, build_state(StateSpec.fock(0), 11))
    assert trace_distance(one, vac) == pytest.approx(1.0)


@given(amplitudes, st.floats(0.0, 2.0))
def test_displaced_thermal_moments(alpha, nbar):
    dim = 70
    rho = displaced_thermal(alpha, nbar, dim)
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    assert np.trace(rho.elems @ a) == pytest.approx(alpha, abs=1e-7)
    assert rho.mean_photons() == pytest.approx(abs(alpha) ** 2 + nbar, abs=1e-6)


def test_thermal_diagonal_is_geometric():
    p = thermal_diagonal(0.6, 50)
    ratio = p[1:] / p[:-1]
    assert np.allclose(ratio, 0.6 / 1.6)
    assert p.sum() == pytest.approx(1.0, abs=1e-9)


def test_displace_is_unitary_on_low_levels():
    rho = displace(build_state(StateSpec.fock(2), 60), 1 - 1j)
    assert rho.trace == pytest.approx(1.0, abs=1e-10)
    assert rho.purity == pytest.approx(1.0, abs=1e-9)
