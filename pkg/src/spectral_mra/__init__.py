"""Recover a signal from noisy, randomly cyclically shifted copies via shift-invariant features."""

from .baselines import frequency_marching, iterative_phase_synchronization
from .experiment import ExperimentConfig, parse_config, run_experiment, to_csv
from .invariants import (InvariantAccumulator, Invariants, accumulate_observations, merge,
                         merge_all, read_invariants, write_invariants)
from .kernels import BACKEND
from .pipeline import clean_invariants, invert
from .reconstruct import ReconstructionResult, assemble, evaluate, read_signal, write_signal
from .signal import (bispectrum, circulant, cyclic_shift, dft, idft, normalize_bispectrum, phase,
                     relative_error, signal_bispectrum)
from .simulate import (ObservationSet, generate_gaussian_signal, generate_observations,
                       known_shift_oracle, read_observations, write_observations)
from .spectral import hermitian_eig, select_eigenvector, spectral_gaps, spectral_phase_recovery

__version__ = "0.1.0"
