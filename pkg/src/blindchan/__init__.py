"""Spectral methods for multichannel blind deconvolution.

Several unknown FIR channels are driven by one unknown source; the
commutativity of convolution turns the channel outputs into a homogeneous
linear system whose null space reveals the channels.  This package provides
the classical eigenvector estimator built on that idea, a subspace-
constrained variant that widens the spectral gap the estimator depends on,
non-blind and linearized least-squares baselines, the diagnostics that
explain when each method works, and a reproducible Monte Carlo harness.
"""

from .exceptions import (
    BlindchanError,
    ConfigurationError,
    DimensionError,
    InputError,
    PowerIterationError,
)
from .harness import (
    ExperimentSpec,
    Grid,
    Sweep,
    aggregate_percentile,
    run_phase_grid,
    run_point,
    run_sweep,
    run_trial,
    spec_from_dict,
    spec_to_dict,
)
from .metrics import (
    MetricReport,
    autocorr_norm,
    crosscorr_norm,
    db_to_linear,
    flatness,
    linear_to_db,
    metric_report,
    min_phase_distance,
    noise_corr_norms,
    sin_angle,
    snr,
)
from .models import (
    ChannelEnsemble,
    RngStreams,
    SubspaceModel,
    add_noise,
    bandpass_pulse,
    complex_gaussian,
    gen_channels_in_subspace,
    gen_gaussian_subspace,
    gen_pca_subspace,
    gen_source,
    load_basis,
    save_basis,
    sigma_for_snr,
)
from .sigops import circular_convolve, circulant, conv_matrix, convolve_short, restrict, zero_pad
from .solvers import (
    Estimate,
    estimate_noise_variance,
    solve_cross_conv,
    solve_linearized_ls,
    solve_oracle_ls,
    solve_subspace_cross_conv,
)
from .spectral import (
    DavisKahanReport,
    EigenResult,
    GapInfo,
    davis_kahan_check,
    eig_hermitian,
    smallest_eigvec,
    spectral_gap,
)
from .xcorr import (
    CrossCorrMatrix,
    apply_cross_corr,
    cross_corr_matrix,
    cross_relation_matrix,
)

__version__ = "0.1.0"
