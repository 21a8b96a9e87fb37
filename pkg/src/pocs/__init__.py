"""Phase-only compressive sensing.

Recover the direction of a sparse real signal from the phases of its complex
Gaussian projections by turning the phase observations into a linear system
and solving it with basis pursuit denoising.
"""
from .bpdn import SolverConfig, SolverReport, Status, bpdn, lift_complex, project_l1_ball
from .linalg import DimensionError, RngStream, sample_complex_gaussian, sample_sparse_signal
from .linearization import (
    KAPPA,
    DegenerateInputError,
    LinearizedOperator,
    NormalizedSignal,
    build_alpha,
    build_Az,
    build_H,
    e1,
    epsilon_bound,
    normalize_signal,
    phase_consistency_check,
)
from .rip import CombinatorialLimitError, RipEstimate, estimate_rip, rip_of_linearized, validate_fidelity_bound
from .sensing import NoiseSpec, Scaling, SensingEnsemble, measure_linear, measure_phase_only, sample_disk_noise, sign_c

__version__ = "0.1.0"


def recover_direction(ens: SensingEnsemble, z, epsilon: float = 0.0, cfg: SolverConfig | None = None) -> SolverReport:
    """Estimate ``x*`` from phases ``z`` by solving ``A_z u ~ e1`` with BPDN."""
    import dataclasses

    cfg = dataclasses.replace(cfg or SolverConfig(), epsilon=epsilon)
    return bpdn(build_Az(ens, z).matrix, e1(ens.m), cfg)
