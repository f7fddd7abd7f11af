"""Lossy continuous-variable teleportation channels.

Closed-form fidelities and nonclassical-depth transfer, checked against a
truncated Fock-basis density-matrix simulation.
"""
from .analytics import (
    crossover,
    crossover_bound_r,
    depth_report,
    depth_threshold_r,
    depth_transfer_dir,
    depth_transfer_tel,
    fidelity_cat_dir,
    fidelity_cat_tel,
    fidelity_closed_form,
    fidelity_coherent_tel,
    fidelity_fock_dir,
    fidelity_fock_tel,
    minimal_transmittance,
    squeezed_depth,
)
from .channels import (
    ChannelParams,
    KernelArgs,
    MeasurementOutcome,
    gaussian_noise_channel,
    kernel_G,
    loss_map,
    outcome_average,
    teleport_average,
    teleport_outcome,
)
from .errors import TeleportError
from .fock import DensityMatrix, StateSpec, build_state, fidelity, trace_distance
from .phase_space import GridSpec, QuasiprobGrid, depth_estimate, quasiprob_from_density, smooth

__version__ = "0.1.0"
