"""Truncated Fock-basis states and operators.

Every numerical oracle in the package works with dense density matrices on
the span of ``|0>, ..., |dim-1>``.  States are never renormalised after
truncation: if the discarded tail exceeds :data:`TAIL_TOLERANCE` the
constructor raises :class:`~cvteleport.errors.CutoffTooSmall` instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy.special import gammaln

from .errors import (
    CutoffTooSmall,
    DimMismatch,
    InvalidDensityMatrix,
    InvalidSpec,
    NotPure,
)

TAIL_TOLERANCE = 1e-8
HERMITIAN_TOLERANCE = 1e-10
EIGEN_FLOOR = -1e-8
PURITY_TOLERANCE = 1e-6
# cat states with |alpha| below this are rejected rather than given a limiting form
MIN_CAT_AMPLITUDE = 1e-3

Kind = Literal["coherent", "fock", "cat", "squeezed_vacuum", "thermal"]
KINDS = ("coherent", "fock", "cat", "squeezed_vacuum", "thermal")

_FIELD_FOR_KIND = {
    "coherent": "amplitude",
    "cat": "amplitude",
    "fock": "photon_number",
    "squeezed_vacuum": "squeezing",
    "thermal": "mean_photons",
}


@dataclass(frozen=True)
class StateSpec:
    """Symbolic description of a single-mode input state.

    Only the field belonging to ``kind`` may be set; use the classmethod
    constructors rather than filling fields by hand.
    """

    kind: Kind
    amplitude: Optional[complex] = None
    photon_number: Optional[int] = None
    squeezing: Optional[complex] = None
    mean_photons: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown state kind {self.kind!r}")
        wanted = _FIELD_FOR_KIND[self.kind]
        for name in set(_FIELD_FOR_KIND.values()):
            value = getattr(self, name)
            if name == wanted and value is None:
                raise InvalidSpec(f"{self.kind} state needs {name}")
            if name != wanted and value is not None:
                raise InvalidSpec(f"{self.kind} state does not take {name}")
        if self.kind == "fock":
            n = self.photon_number
            if isinstance(n, bool) or int(n) != n or n < 0:
                raise InvalidSpec(f"photon number must be a non-negative integer, got {n!r}")
            object.__setattr__(self, "photon_number", int(n))
        elif self.kind == "thermal":
            nbar = float(self.mean_photons)
            if not math.isfinite(nbar) or nbar < 0:
                raise InvalidSpec(f"mean photon number must be >= 0, got {nbar}")
            object.__setattr__(self, "mean_photons", nbar)
        elif self.kind == "cat":
            alpha = complex(self.amplitude)
            if abs(alpha) < MIN_CAT_AMPLITUDE:
                raise InvalidSpec(f"cat amplitude |alpha|={abs(alpha):.3g} is below {MIN_CAT_AMPLITUDE}")
            object.__setattr__(self, "amplitude", alpha)
        elif self.kind == "coherent":
            object.__setattr__(self, "amplitude", complex(self.amplitude))
        else:
            object.__setattr__(self, "squeezing", complex(self.squeezing))

    @classmethod
    def coherent(cls, alpha: complex) -> "StateSpec":
        return cls("coherent", amplitude=alpha)

    @classmethod
    def fock(cls, n: int) -> "StateSpec":
        return cls("fock", photon_number=n)

    @classmethod
    def cat(cls, alpha: complex) -> "StateSpec":
        """Odd cat state (|alpha> - |-alpha>) / sqrt(2(1 - exp(-2|alpha|^2)))."""
        return cls("cat", amplitude=alpha)

    @classmethod
    def squeezed_vacuum(cls, xi: complex) -> "StateSpec":
        return cls("squeezed_vacuum", squeezing=xi)

    @classmethod
    def thermal(cls, nbar: float) -> "StateSpec":
        return cls("thermal", mean_photons=nbar)

    @property
    def is_pure(self) -> bool:
        return self.kind != "thermal" or self.mean_photons == 0.0

    @property
    def mean_photon_number(self) -> float:
        if self.kind == "coherent":
            return abs(self.amplitude) ** 2
        if self.kind == "fock":
            return float(self.photon_number)
        if self.kind == "cat":
            a2 = abs(self.amplitude) ** 2
            return a2 / math.tanh(a2)
        if self.kind == "squeezed_vacuum":
            return math.sinh(abs(self.squeezing)) ** 2
        return self.mean_photons


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Dense density matrix in a truncated Fock basis.

    The array is copied and made read-only on construction.  Invariants are
    checked by :meth:`validate`; intermediate results built internally may
    skip that check.
    """

    elems: np.ndarray

    def __post_init__(self):
        arr = np.array(self.elems, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise InvalidDensityMatrix(f"expected a square matrix, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "elems", arr)

    @classmethod
    def from_ket(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return self.elems.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.elems).real)

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.elems.conj().T, self.elems)))

    def diagonal(self) -> np.ndarray:
        return self.elems.diagonal().real.copy()

    def mean_photons(self) -> float:
        return float(np.dot(np.arange(self.dim), self.diagonal()))

    def validate(self, tail_tolerance: float = TAIL_TOLERANCE) -> "DensityMatrix":
        m = self.elems
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOLERANCE:
            raise InvalidDensityMatrix(f"not Hermitian: max deviation {herm:.3g}")
        tr = np.trace(m)
        if abs(tr.imag) > HERMITIAN_TOLERANCE:
            raise InvalidDensityMatrix(f"trace has imaginary part {tr.imag:.3g}")
        if abs(tr.real - 1.0) > tail_tolerance:
            raise CutoffTooSmall(
                f"trace {tr.real:.12g} deviates from 1 by more than {tail_tolerance:g} at dim={self.dim}"
            )
        lowest = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
        if lowest < EIGEN_FLOOR:
            raise InvalidDensityMatrix(f"negative eigenvalue {lowest:.3g}")
        return self

    def embed(self, dim: int) -> "DensityMatrix":
        """Zero-pad to a larger cutoff."""
        if dim < self.dim:
            raise DimMismatch(f"cannot embed dim {self.dim} into {dim}")
        out = np.zeros((dim, dim), dtype=complex)
        out[: self.dim, : self.dim] = self.elems
        return DensityMatrix(out)


# ---------------------------------------------------------------------------
# cutoffs

def cutoff_rule(mean_photons: float) -> int:
    """ceil(mu + 6 sqrt(mu + 1) + 10)."""
    return int(math.ceil(mean_photons + 6.0 * math.sqrt(mean_photons + 1.0) + 10.0))


def _coherent_tail_ok(alpha: complex, dim: int) -> bool:
    a = abs(alpha)
    return a * a + 6.0 * a + 10.0 <= dim


def default_cutoff(spec: StateSpec, tail_tolerance: float = TAIL_TOLERANCE) -> int:
    """Smallest cutoff at or above :func:`cutoff_rule` whose discarded tail is below tolerance.

    The rule alone is not enough for squeezed vacua, whose even-photon
    populations decay only geometrically in ``tanh^2 |xi|``.
    """
    dim = max(cutoff_rule(spec.mean_photon_number), 2)
    if spec.kind in ("coherent", "cat"):
        a = abs(spec.amplitude)
        dim = max(dim, int(math.ceil(a * a + 6.0 * a + 10.0)))
    if spec.kind == "fock":
        dim = max(dim, spec.photon_number + 1)
    while _tail_mass(spec, dim) > tail_tolerance:
        dim += max(1, dim // 8)
    return dim


def _tail_mass(spec: StateSpec, dim: int) -> float:
    if spec.kind == "fock":
        return 0.0 if spec.photon_number < dim else 1.0
    if spec.kind == "thermal":
        nbar = spec.mean_photons
        return (nbar / (1.0 + nbar)) ** dim
    psi = _ket(spec, dim)
    return max(0.0, 1.0 - float(np.sum(np.abs(psi) ** 2)))


# ---------------------------------------------------------------------------
# states

def coherent_ket(alpha: complex, dim: int) -> np.ndarray:
    alpha = complex(alpha)
    psi = np.empty(dim, dtype=complex)
    psi[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, dim):
        psi[n] = psi[n - 1] * alpha / math.sqrt(n)
    return psi


def _squeezed_ket(xi: complex, dim: int) -> np.ndarray:
    # S(xi) = exp((xi* a^2 - xi a^dag^2) / 2), xi = r e^{i theta}
    r = abs(xi)
    ratio = -np.exp(1j * np.angle(xi)) * math.tanh(r)
    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1.0 / math.sqrt(math.cosh(r))
    for n in range(2, dim, 2):
        psi[n] = psi[n - 2] * ratio * math.sqrt((n - 1) / n)
    return psi


def _ket(spec: StateSpec, dim: int) -> np.ndarray:
    if spec.kind == "coherent":
        return coherent_ket(spec.amplitude, dim)
    if spec.kind == "cat":
        alpha = spec.amplitude
        norm = math.sqrt(2.0 * -math.expm1(-2.0 * abs(alpha) ** 2))
        return (coherent_ket(alpha, dim) - coherent_ket(-alpha, dim)) / norm
    if spec.kind == "squeezed_vacuum":
        return _squeezed_ket(spec.squeezing, dim)
    if spec.kind == "fock":
        psi = np.zeros(dim, dtype=complex)
        psi[spec.photon_number] = 1.0
        return psi
    raise InvalidSpec(f"{spec.kind} state has no ket")


def thermal_diagonal(nbar: float, dim: int) -> np.ndarray:
    """Bose-Einstein populations nbar^n / (1 + nbar)^(n+1), n < dim."""
    if nbar < 0:
        raise InvalidSpec(f"mean photon number must be >= 0, got {nbar}")
    n = np.arange(dim)
    if nbar == 0:
        return (n == 0).astype(float)
    return np.exp(n * math.log(nbar / (1.0 + nbar))) / (1.0 + nbar)


def build_state(spec: StateSpec, dim: Optional[int] = None) -> DensityMatrix:
    """Density matrix of ``spec`` truncated to ``dim`` Fock levels.

    ``dim`` defaults to :func:`default_cutoff`.  Raises ``CutoffTooSmall``
    when the truncated trace misses 1 by more than the tail tolerance.
    """
    if dim is None:
        dim = default_cutoff(spec)
    if dim < 2:
        raise CutoffTooSmall(f"dim must be at least 2, got {dim}")
    if spec.kind in ("coherent", "cat") and not _coherent_tail_ok(spec.amplitude, dim):
        a = abs(spec.amplitude)
        raise CutoffTooSmall(f"|alpha|^2 + 6|alpha| + 10 = {a * a + 6 * a + 10:.4g} exceeds dim={dim}")
    if spec.kind == "fock" and spec.photon_number >= dim:
        raise CutoffTooSmall(f"|{spec.photon_number}> does not fit in dim={dim}")
    if spec.kind == "thermal":
        rho = DensityMatrix(np.diag(thermal_diagonal(spec.mean_photons, dim)).astype(complex))
    else:
        rho = DensityMatrix.from_ket(_ket(spec, dim))
    return rho.validate()


def thermal_state(nbar: float, dim: int) -> DensityMatrix:
    return build_state(StateSpec.thermal(nbar), dim)


# ---------------------------------------------------------------------------
# operators

def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def displacement_batch(alphas, dim: int) -> np.ndarray:
    """Exact matrix elements <m|D(alpha)|n>, m, n < dim, for many alphas at once.

    Below the diagonal (m = n + k)::

        D[m, n] = sqrt(n!/m!) alpha^k exp(-|alpha|^2/2) L_n^(k)(|alpha|^2)

    and ``D[n, m] = (-1)^k conj(D[m, n])`` above it.  The factorial and power
    prefactor is assembled in log space and the generalized Laguerre values
    come from the forward three-term recurrence in n, run for every k at
    once.  The plain two-index recurrence on D itself loses all accuracy for
    |alpha| above ~3 at dim ~60, this form stays at ~1e-14.

    The result is the leading block of the infinite matrix, not the
    exponential of a truncated generator.  Shape ``(len(alphas), dim, dim)``.
    """
    a = np.asarray(alphas, dtype=complex).reshape(-1)
    x = np.abs(a) ** 2
    k = np.arange(dim)
    lag = np.empty((a.size, dim, dim))  # [point, n, k] -> L_n^(k)(x)
    lag[:, 0, :] = 1.0
    if dim > 1:
        lag[:, 1, :] = 1.0 + k - x[:, None]
    for n in range(1, dim - 1):
        lag[:, n + 1, :] = (
            (2 * n + 1 + k - x[:, None]) * lag[:, n, :] - (n + k) * lag[:, n - 1, :]
        ) / (n + 1)

    log_fact = 0.5 * (gammaln(k[:, None] + 1) - gammaln(k[:, None] + k[None, :] + 1))  # [n, k]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_pow = np.where(k == 0, 0.0, k * np.log(np.abs(a))[:, None])  # [point, k]
    mag = np.exp(log_fact + log_pow[:, None, :] - 0.5 * x[:, None, None]) * lag
    low = mag * np.exp(1j * np.angle(a)[:, None, None] * k)  # D[n + k, n]

    out = np.zeros((a.size, dim, dim), dtype=complex)
    for kk in range(dim):
        nn = np.arange(dim - kk)
        out[:, nn + kk, nn] = low[:, nn, kk]
        if kk:
            out[:, nn, nn + kk] = (-1) ** kk * low[:, nn, kk].conj()
    return out


def displacement_matrix(alpha: complex, dim: int) -> np.ndarray:
    """Leading ``dim x dim`` block of D(alpha) = exp(alpha a^dag - alpha* a)."""
    if dim < 2:
        raise CutoffTooSmall(f"dim must be at least 2, got {dim}")
    if abs(alpha) ** 2 > dim / 4.0:
        raise CutoffTooSmall(f"|alpha|^2 = {abs(alpha) ** 2:.4g} exceeds dim/4 = {dim / 4:.4g}")
    return displacement_batch([alpha], dim)[0]


def displace(rho: DensityMatrix, alpha: complex) -> DensityMatrix:
    d = displacement_batch([alpha], rho.dim)[0]
    return DensityMatrix(d @ rho.elems @ d.conj().T)


def displaced_thermal(alpha: complex, nbar: float, dim: int) -> DensityMatrix:
    """D(alpha) rho_thermal(nbar) D(alpha)^dag, projected onto the cutoff."""
    d = displacement_batch([alpha], dim)[0]
    return DensityMatrix((d * thermal_diagonal(nbar, dim)) @ d.conj().T)


# ---------------------------------------------------------------------------
# figures of merit

def _check_dims(a: DensityMatrix, b: DensityMatrix) -> None:
    if a.dim != b.dim:
        raise DimMismatch(f"dims differ: {a.dim} vs {b.dim}")


def fidelity(pure: DensityMatrix, mixed: DensityMatrix) -> float:
    """Overlap <psi| rho |psi> = Tr(pure . mixed), clamped to [0, 1]."""
    _check_dims(pure, mixed)
    if pure.purity < 1.0 - PURITY_TOLERANCE:
        raise NotPure(f"purity {pure.purity:.8f} is below 1 - {PURITY_TOLERANCE:g}")
    value = np.vdot(pure.elems.conj().T, mixed.elems)
    return float(min(1.0, max(0.0, value.real)))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    _check_dims(a, b)
    diff = a.elems - b.elems
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
