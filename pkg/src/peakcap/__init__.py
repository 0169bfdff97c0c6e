"""Capacity per unit energy of peak-constrained Rayleigh flat-fading channels.

The package computes ``C_p(P) = 1 - I(P)/P`` from the fading spectral
density and checks it against closed forms. An independent brute-force
oracle built on finite Toeplitz correlation matrices and sampled
continuous-time channels backs up both.
"""
from .capacity import (
    CapacityResult,
    TimeBounds,
    block_cp_closed,
    cap_per_unit_energy,
    cap_per_unit_time_bounds,
    clarke_cp_closed,
    clarke_cp_published,
    coherent_cp,
    gauss_markov_cp_closed,
    information_rate_integral,
    upper_bound_up,
)
from .sampling import SamplingLimit, aliased_spectrum, cp_KK, i_K, sampled_variance, sampling_limit
from .spectra import (
    Kind,
    SpectralModel,
    autocorrelation,
    block_fading,
    clarke,
    density,
    gauss_markov,
    load_table,
    tabulated,
    white,
)
from .toeplitz import (
    ToeplitzGram,
    alpha,
    build_gram,
    coherent_divergence,
    fourthegy,
    log_det_rate,
    onoff_divergence,
    prediction_trace,
    subset_search,
    verify_alpha_properties,
)

__version__ = "0.1.0"
