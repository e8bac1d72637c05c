"""Why the classical estimator is fragile: the spectral gap story.

The channel estimate is the smallest eigenvector of a cross-correlation
Gram matrix, so its noise robustness is governed by the gap between the two
smallest eigenvalues.  This script builds one noiseless instance and shows
that gap with and without a subspace model on the channels.
"""

import numpy as np

import blindchan as bc

K, M, D, L = 64, 4, 8, 256
streams = bc.RngStreams(1)

x = bc.gen_source("gaussian", L, 1.0, streams.stream("source"))

# unstructured random channels: the classical setting
h = bc.complex_gaussian(streams.stream("channels"), M, K)
ys = [bc.convolve_short(x, h[m]) for m in range(M)]
gram = bc.cross_corr_matrix(ys, K)
info = bc.spectral_gap(gram.dense)
print(f"unconstrained matrix ({M * K} x {M * K}):")
print(f"  smallest eigenvalue / largest : {info.lambda_min / np.linalg.norm(gram.dense, 2):.2e}")
print(f"  gap ratio (second smallest / largest): {info.gap_ratio:.2e}")
print("  -> an exact null vector exists, but the next eigenvalue is barely above it;")
print("     any noise of comparable size scrambles the estimate.")

# the same construction with channels confined to a D-dimensional model
model = bc.gen_gaussian_subspace(K, D, M, streams.stream("basis"))
u, channels = bc.gen_channels_in_subspace(model, streams.stream("coef"))
ys = [bc.convolve_short(x, channels.filters[m]) for m in range(M)]
gram = bc.cross_corr_matrix(ys, K)
compressed = np.zeros((M * D, M * D), dtype=complex)
for n in range(M):
    for m in range(M):
        compressed[n * D : (n + 1) * D, m * D : (m + 1) * D] = (
            model.bases[n].conj().T @ gram.block(n, m) @ model.bases[m]
        )
info = bc.spectral_gap(compressed)
print(f"\nsubspace-compressed matrix ({M * D} x {M * D}):")
print(f"  gap ratio: {info.gap_ratio:.2f}")
print("  -> compressing by the model basis lifts the gap by orders of magnitude,")
print("     which is exactly the margin the eigenvector estimate needs.")
