"""Cross-correlation matrix of multichannel observations.

For M channel outputs y_1..y_M of a common source, the commutativity of
convolution gives one length-L linear constraint block per channel pair; the
stacked constraint matrix has M(M-1)/2 * L rows and M*K columns.  Its Gram
matrix is what the estimators eigendecompose.  The Gram is assembled here
block-wise from M(M+1)/2 length-L FFT cross-correlations, never forming the
tall constraint matrix; the explicit construction is retained (size-capped)
as the reference oracle.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, DimensionError
from .sigops import as_signal, conv_matrix

# Cap on M*K*L for the dense explicit construction.
EXPLICIT_SIZE_CAP = 2**22


def _check_channels(ys, filter_len):
    ys = [as_signal(y) for y in ys]
    M = len(ys)
    if M < 2:
        raise ConfigurationError(f"need at least 2 channels, got {M}")
    L = len(ys[0])
    if any(len(y) != L for y in ys):
        raise DimensionError("channel outputs must share a common length")
    if not 1 <= filter_len <= L:
        raise DimensionError(f"filter length {filter_len} out of range for signals of length {L}")
    return ys, M, L


@dataclass(frozen=True)
class CrossCorrMatrix:
    """Hermitian MK x MK Gram matrix stored dense, addressable as K x K blocks."""

    values: np.ndarray
    n_channels: int
    filter_len: int

    @property
    def dense(self):
        return self.values

    def block(self, n, m):
        """K x K block at block-row n, block-column m (0-based)."""
        K = self.filter_len
        return self.values[n * K : (n + 1) * K, m * K : (m + 1) * K]


def cross_relation_matrix(ys, filter_len):
    """Explicit stacked constraint matrix (M(M-1)/2*L x M*K), the reference oracle.

    Strip i (i = 0..M-2) holds one L-row block per j > i, with the convolution
    matrix of y_j in block-column i and minus that of y_i in block-column j,
    so that the true stacked filter vector is annihilated.
    """
    ys, M, L = _check_channels(ys, filter_len)
    K = filter_len
    if M * K * L > EXPLICIT_SIZE_CAP:
        raise ConfigurationError(
            f"explicit construction capped at M*K*L <= {EXPLICIT_SIZE_CAP}, got {M * K * L}"
        )
    Ts = [conv_matrix(y, K) for y in ys]
    rows = []
    for i in range(M - 1):
        for j in range(i + 1, M):
            strip = np.zeros((L, M * K), dtype=np.complex128)
            strip[:, i * K : (i + 1) * K] = Ts[j]
            strip[:, j * K : (j + 1) * K] = -Ts[i]
            rows.append(strip)
    return np.vstack(rows)


def _corr_blocks(ys, filter_len):
    """All K x K blocks T_{y_a}^H T_{y_b} needed for the Gram, via FFT."""
    M = len(ys)
    L = len(ys[0])
    K = filter_len
    fhat = [np.fft.fft(y) for y in ys]
    # (i,j) entry of the circulant C_a^H C_b is r[(i-j) mod L] with
    # r = ifft(conj(fft(a)) * fft(b)); the block is its top-left K x K corner.
    idx = (np.arange(K)[:, None] - np.arange(K)[None, :]) % L
    blocks = {}
    for a in range(M):
        blocks[(a, a)] = np.fft.ifft(np.conj(fhat[a]) * fhat[a])[idx]
    for a in range(M):
        for b in range(a + 1, M):
            blk = np.fft.ifft(np.conj(fhat[a]) * fhat[b])[idx]
            blocks[(a, b)] = blk
            blocks[(b, a)] = blk.conj().T
    return blocks


def cross_corr_matrix(ys, filter_len):
    """Assemble the Gram of the stacked constraints from fast correlations.

    Block (n, n) is the sum of the self-correlation blocks of all other
    channels; block (n, m) for n != m is minus the (m, n) cross-correlation
    block.  Equals cross_relation_matrix(ys, K)^H @ cross_relation_matrix(ys, K).
    """
    ys, M, L = _check_channels(ys, filter_len)
    K = filter_len
    blocks = _corr_blocks(ys, K)
    diag_sum = sum(blocks[(a, a)] for a in range(M))
    out = np.zeros((M * K, M * K), dtype=np.complex128)
    for n in range(M):
        for m in range(M):
            if n == m:
                blk = diag_sum - blocks[(m, m)]
            else:
                blk = -blocks[(m, n)]
            out[n * K : (n + 1) * K, m * K : (m + 1) * K] = blk
    return CrossCorrMatrix(values=out, n_channels=M, filter_len=K)


def apply_cross_corr(ys, filter_len, v):
    """Matrix-free product of the Gram with a stacked vector v in C^{MK}.

    Uses 3M length-L FFTs; agrees with the materialized product.
    """
    ys, M, L = _check_channels(ys, filter_len)
    K = filter_len
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (M * K,):
        raise DimensionError(f"expected vector of length {M * K}, got shape {v.shape}")
    yhat = np.array([np.fft.fft(y) for y in ys])
    phat = np.array(
        [np.fft.fft(np.concatenate([v[m * K : (m + 1) * K], np.zeros(L - K)])) for m in range(M)]
    )
    auto = (np.abs(yhat) ** 2).sum(axis=0)
    mixed = (np.conj(yhat) * phat).sum(axis=0)
    out = np.empty(M * K, dtype=np.complex128)
    for n in range(M):
        spec = (auto - np.abs(yhat[n]) ** 2) * phat[n] - yhat[n] * (
            mixed - np.conj(yhat[n]) * phat[n]
        )
        out[n * K : (n + 1) * K] = np.fft.ifft(spec)[:K]
    return out


def noise_gram_mean(n_channels, signal_len, noise_var):
    """Scalar c such that the expected noise-only Gram is c times the identity."""
    return float(noise_var) * (n_channels - 1) * signal_len
