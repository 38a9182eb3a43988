"""Pulse propagation in single-mode fiber and Sagnac fiber-loop switching."""

from .fiber import (FiberSpec, DispersionCoeffs, RamanKernel, FiberModelError,
                    MultimodeError, loss_coefficient, loss_alpha_per_m,
                    dispersion_D, taylor_betas, beta1_relative, v_number,
                    lp01_effective_area, mutual_effective_area,
                    kerr_coefficient, xpm_coefficient, raman_kernel)
from .pulses import (Grid, Envelope, GridError, make_grid, gaussian_pulse,
                     sech_pulse, measures, energy_nj, fwhm_ps,
                     envelope_to_csv, envelope_from_csv)
from .propagator import (PropagationOptions, PropagationRecord, SolverError,
                         GridOverflowError, propagate, propagate_batch,
                         evolution_map, photon_number)
from .sagnac import (SignalSpec, PhaseProfile, SwitchPoint, SwitchCurve,
                     SpanResult, xpm_phase, switch_probabilities, energy_sweep,
                     span_for_threshold, span_from_profiles, span_vs_length, walkoff_ps_per_m,
                     peak_energy_estimate_nj)

__version__ = "0.1.0"
