"""Sweep rows behind the fidelity and depth figures, and their CSV/JSON writers.

Every sweep emits the same columns::

    curve_id, metric_name, tau_in, r, T, T_direct, lambda, nbar, value, oracle, abs_diff

``T`` is the per-arm transmittance of the teleportation channel and
``T_direct`` the transmittance used for direct transmission (T^2 unless the
raw-T comparison is requested).  Columns that do not apply to a row are left
empty.  Reals are written with 12 significant digits.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

import numpy as np

from . import analytics as an
from .channels import ChannelParams, loss_map, teleport_average, teleport_cutoff
from .fock import StateSpec, build_state, default_cutoff, fidelity

COLUMNS = ("curve_id", "metric_name", "tau_in", "r", "T", "T_direct", "lambda", "nbar", "value", "oracle", "abs_diff")

FIG_R = (2.0, 0.7, 0.2)
FIG2_T = (1.0, 0.9, 0.8, 0.7, 0.6)
FIG2_TAU = 0.5
FIG4_TAU = 1.0
FIG3_MEAN_PHOTONS = 6.0
N_POINTS = 201
FIG2_R_MAX = 2.0
SPOT_CHECKS = 5


@dataclass
class SweepRow:
    curve_id: str
    metric_name: str
    value: float
    tau_in: Optional[float] = None
    r: Optional[float] = None
    T: Optional[float] = None
    T_direct: Optional[float] = None
    lam: Optional[float] = None
    nbar: Optional[float] = None
    oracle: Optional[float] = None
    abs_diff: Optional[float] = None

    def with_oracle(self, oracle: float) -> "SweepRow":
        self.oracle = oracle
        self.abs_diff = abs(self.value - oracle)
        return self

    def record(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return {k: d[k] for k in COLUMNS}


def _channel_fields(params: ChannelParams) -> dict:
    return {"r": params.r, "T": params.T, "lam": params.lam, "nbar": params.nbar}


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format(float(value), ".12g")


def write_csv(rows: Iterable[SweepRow], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        rec = row.record()
        writer.writerow([fmt(rec[c]) for c in COLUMNS])


def to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def to_json(rows: Iterable[SweepRow]) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return str(v)
        return v

    return json.dumps([{k: clean(v) for k, v in r.record().items()} for r in rows], indent=2) + "\n"


def t_grid(n_points: int = N_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, n_points)


# ---------------------------------------------------------------------------
# fidelity versus transmittance

def fidelity_rows(
    r_values=FIG_R,
    n_points: int = N_POINTS,
    mean_photons: float = FIG3_MEAN_PHOTONS,
    raw_direct: bool = False,
) -> list[SweepRow]:
    """Cat (|alpha|^2 = mean_photons) and Fock (n = mean_photons) fidelity curves.

    Teleportation curves use the per-arm transmittance T; the direct curve
    uses T^2 (or T itself with ``raw_direct``).
    """
    n = int(round(mean_photons))
    alpha = math.sqrt(mean_photons)
    rows = []
    for state, closed_tel, closed_dir in (
        ("cat", lambda p: an.fidelity_cat_tel(alpha, p), lambda t: an.fidelity_cat_dir(alpha, t)),
        ("fock", lambda p: an.fidelity_fock_tel(n, p), lambda t: an.fidelity_fock_dir(n, t)),
    ):
        for T in t_grid(n_points):
            T = float(T)
            t_dir = T if raw_direct else T * T
            rows.append(SweepRow(f"{state}_direct", f"F_{state}_dir", closed_dir(t_dir), T=T, T_direct=t_dir))
        for r in r_values:
            for T in t_grid(n_points):
                params = ChannelParams(r, float(T))
                t_dir = params.T if raw_direct else params.T**2
                rows.append(
                    SweepRow(f"{state}_tel_r{r:g}", f"F_{state}_tel", closed_tel(params), T_direct=t_dir, **_channel_fields(params))
                )
    return rows


def _spec_for_curve(curve_id: str, mean_photons: float) -> StateSpec:
    if curve_id.startswith("cat"):
        return StateSpec.cat(math.sqrt(mean_photons))
    return StateSpec.fock(int(round(mean_photons)))


def spot_indices(n_points: int, count: int = SPOT_CHECKS) -> list[int]:
    return sorted(set(np.linspace(0, n_points - 1, count).round().astype(int).tolist()))


def validate_fidelity_rows(
    rows: list[SweepRow], mean_photons: float = FIG3_MEAN_PHOTONS, cutoff: Optional[int] = None
) -> list[SweepRow]:
    """Attach Fock-oracle values to SPOT_CHECKS evenly spaced rows of every curve."""
    by_curve: dict[str, list[SweepRow]] = {}
    for row in rows:
        by_curve.setdefault(row.curve_id, []).append(row)
    for curve_id, curve in by_curve.items():
        spec = _spec_for_curve(curve_id, mean_photons)
        for i in spot_indices(len(curve)):
            row = curve[i]
            if curve_id.endswith("direct"):
                rho = build_state(spec, cutoff or default_cutoff(spec))
                row.with_oracle(fidelity(rho, loss_map(rho, row.T_direct)))
            else:
                params = ChannelParams(row.r, row.T)
                dim = cutoff or max(default_cutoff(spec), teleport_cutoff(spec.mean_photon_number, params.nbar))
                rho = build_state(spec, dim)
                row.with_oracle(fidelity(rho, teleport_average(rho, params)))
    return rows


# ---------------------------------------------------------------------------
# nonclassical depth

def figure2_rows(n_points: int = N_POINTS, tau_in: float = FIG2_TAU, T_values=FIG2_T) -> list[SweepRow]:
    """Teleported depth versus r for several T, and the squeezing threshold versus T."""
    rows = []
    for T in T_values:
        for r in np.linspace(0.0, FIG2_R_MAX, n_points):
            params = ChannelParams(float(r), T)
            rows.append(
                SweepRow(f"tau_tel_T{T:g}", "tau_tel", an.depth_transfer_tel(tau_in, params), tau_in=tau_in, **_channel_fields(params))
            )
    for T in t_grid(n_points):
        rows.append(SweepRow("r_threshold", "r_threshold", an.depth_threshold_r(tau_in, float(T)), tau_in=tau_in, T=float(T)))
    return rows


def depth_rows(
    tau_in: float,
    r_values=FIG_R,
    n_points: int = N_POINTS,
    raw_direct: bool = False,
    bound_curve: bool = True,
) -> list[SweepRow]:
    """Teleported versus directly transmitted depth over T, plus crossover windows.

    Crossover rows: ``crossover_exists`` (1/0) for every r, and
    ``crossover_lo``/``crossover_hi`` only when a window exists.  The bound
    curve gives the smallest r with a window, over tau_in in [1/2, 1].
    """
    rows = []
    for T in t_grid(n_points):
        T = float(T)
        t_dir = T if raw_direct else T * T
        rows.append(SweepRow("tau_direct", "tau_dir", an.depth_transfer_dir(tau_in, t_dir), tau_in=tau_in, T=T, T_direct=t_dir))
    for r in r_values:
        for T in t_grid(n_points):
            params = ChannelParams(r, float(T))
            t_dir = params.T if raw_direct else params.T**2
            tel = an.depth_transfer_tel(tau_in, params)
            fields = dict(tau_in=tau_in, T_direct=t_dir, **_channel_fields(params))
            rows.append(SweepRow(f"tau_tel_r{r:g}", "tau_tel", tel, **fields))
            rows.append(SweepRow(f"tau_diff_r{r:g}", "tau_diff", tel - an.depth_transfer_dir(tau_in, t_dir), **fields))
    for r in r_values:
        window = an.crossover(tau_in, r)
        rows.append(SweepRow(f"crossover_r{r:g}", "crossover_exists", float(window is not None), tau_in=tau_in, r=r))
        if window is not None:
            rows.append(SweepRow(f"crossover_r{r:g}", "crossover_lo", window[0], tau_in=tau_in, r=r))
            rows.append(SweepRow(f"crossover_r{r:g}", "crossover_hi", window[1], tau_in=tau_in, r=r))
    if bound_curve:
        for tau in np.linspace(0.5, 1.0, n_points):
            rows.append(SweepRow("crossover_bound", "crossover_bound_r", an.crossover_bound_r(float(tau)), tau_in=float(tau)))
    return rows


def figure_rows(figure: int, n_points: int = N_POINTS, raw_direct: bool = False) -> list[SweepRow]:
    if figure == 2:
        return figure2_rows(n_points)
    if figure == 3:
        return fidelity_rows(n_points=n_points, raw_direct=raw_direct)
    if figure == 4:
        return depth_rows(FIG4_TAU, n_points=n_points, raw_direct=raw_direct)
    raise ValueError(f"no figure {figure}; choose 2, 3 or 4")
