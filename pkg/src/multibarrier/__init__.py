"""Transmission, scattering, box spectra, resonance poles and packet dynamics for N
identical barriers confined to a fixed interval."""
from .core import INFINITE, BarrierSpec, Regime, WaveParams, derive_params, spec_from_length_ratio
from .errors import (AccuracyError, AccuracyWarning, DomainError, IllConditionedError, MultiBarrierError,
                     NumericalError, PoleProximityError, StabilityError, TransferOverflowError,
                     UnderResolvedError)
from .exactsolve import solve_amplitudes, transmission_sweep
from .scattering import cross_sections, phase_shifts, s_matrix
from .spectrum import QuantizationProblem, find_levels, spacing_statistics, unfold
from .transfer import TransferMatrix2, finite_product, limit_matrix, transmission_limit

__version__ = "0.1.0"
