"""A structured channel family where only the subspace-constrained method survives.

Channels are drawn from a band-pass parametric family (a windowed complex
exponential at continuous random shifts and amplitudes) and modeled by the
top principal components of training draws.  The family leaves most of the
spectrum unexcited: the linearized least-squares system becomes severely
ill-conditioned and the classical method's spectral gap collapses, while
the subspace-constrained estimator keeps working at moderate SNR.
"""

import numpy as np

import blindchan as bc

K, M, D = 32, 16, 6
L = 20 * K
snr_db = 40.0
streams = bc.RngStreams(21)

model = bc.gen_pca_subspace(
    bc.bandpass_pulse, K, D, 50 * D, streams.stream("basis"), n_channels=M
)
u, channels = bc.gen_channels_in_subspace(model, streams.stream("coef"))

spectra = np.abs(np.fft.fft(channels.filters, n=L, axis=1)) ** 2
per_bin = spectra.sum(axis=0)
print(f"channel ensemble spectrum dynamic range: {per_bin.max() / per_bin.min():.1e}")
print("  -> most DFT bins carry essentially no channel energy\n")

x = bc.gen_source("gaussian", L, 1.0, streams.stream("source"))
noise_var = bc.sigma_for_snr(bc.db_to_linear(snr_db), K, L, M, x, u)
noise = streams.stream("noise")
ys = [
    bc.convolve_short(x, channels.filters[m]) + bc.complex_gaussian(noise, L, var=noise_var)
    for m in range(M)
]
truth = channels.stacked

cc = bc.solve_cross_conv(ys, K)
sccc = bc.solve_subspace_cross_conv(ys, model, noise_var)
ls = bc.solve_linearized_ls(ys, model)

print(f"at SNR {snr_db:.0f} dB (K={K}, M={M}, D={D}, L={L}):")
print(f"  classical cross-convolution  error = {bc.sin_angle(cc.h_hat, truth):.3f}")
print(f"  linearized least squares     error = {bc.sin_angle(ls.h_hat, truth):.3f}"
      f"   (condition {ls.condition:.1e}; noise fills the dead bins, signal does not)")
print(f"  subspace-constrained         error = {bc.sin_angle(sccc.h_hat, truth):.4f}")
print("\nonly the method that exploits the model survives this family;")
print("see reproduce/pca_snr_sweep.json for the full SNR sweep.")
