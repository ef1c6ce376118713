"""Radially symmetric isentropic Euler flows: characters, affine motions,
a finite-volume solver and a verification suite for supersonic expanding
waves."""

from .gas import (CellState, DomainError, FlowField, GasParams, LeftBoundary, Scenario,
                  cell_faces, riemann_variables, sound_speed, stretched_grid, uniform_grid,
                  wave_speeds)
from .characters import (CharacterField, CharacterUndefined, RiccatiCoeffs, character_field,
                         characters_from_gradients, characters_from_momentum_flux,
                         gradients_from_characters, lambda_hat, lambda_tilde, riccati_coeffs,
                         riccati_rhs)
from .ode import IntegrationError, Trajectory, dopri5
from .affine import (AffineMotion, AffineSolution, boundary_conclusions, check_admissibility,
                     check_compatibility, integrate_motion)
from .solver import (Boundary, RunRecord, SolverConfig, StepError, evolve,
                     integrate_riccati_along, run, stable_dt, step, total_mass,
                     trace_characteristic)
from .verify import (BoundLedger, VerificationReport, blowup_time_bound, build_ledger,
                     compression_threshold, compute_ledger, verify_run)

__version__ = "0.1.0"

__all__ = [
    "AffineMotion",
    "AffineSolution",
    "BoundLedger",
    "Boundary",
    "CellState",
    "CharacterField",
    "CharacterUndefined",
    "DomainError",
    "FlowField",
    "GasParams",
    "LeftBoundary",
    "RiccatiCoeffs",
    "RunRecord",
    "Scenario",
    "SolverConfig",
    "StepError",
    "VerificationReport",
    "blowup_time_bound",
    "boundary_conclusions",
    "build_ledger",
    "cell_faces",
    "character_field",
    "characters_from_gradients",
    "characters_from_momentum_flux",
    "check_admissibility",
    "check_compatibility",
    "compression_threshold",
    "compute_ledger",
    "gradients_from_characters",
    "integrate_motion",
    "IntegrationError",
    "Trajectory",
    "dopri5",
    "evolve",
    "integrate_riccati_along",
    "lambda_hat",
    "lambda_tilde",
    "riccati_coeffs",
    "riccati_rhs",
    "riemann_variables",
    "run",
    "sound_speed",
    "stable_dt",
    "step",
    "stretched_grid",
    "total_mass",
    "trace_characteristic",
    "uniform_grid",
    "verify_run",
    "wave_speeds",
]
